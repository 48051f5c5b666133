//! Newton refinement of invariant pairs and solvents with an exact line
//! search on the squared residual.
//!
//! Along a Newton direction the residual satisfies
//! `P(X + tΔX, S + tΔS) = (1-t) P(X,S) + t² A + t³ B`, where `A` and `B` are
//! contour integrals of resolvents of `S`. The identity is exact for
//! degree <= 2 and a truncated model otherwise, so a model step is only
//! accepted if the true residual decreases.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::contour::{Contour, DEFAULT_NODES, NEAR_CONTOUR_CONDITION};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{self, c, CMat, Factorized, C64};
use crate::matpoly::{InvariantPair, MatrixPolynomial, SINGULAR_CONDITION};
use crate::solvents::Solvent;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAXIT: usize = 500;

/// `DP_(X,S)(ΔX, ΔS) = Σ_j A_j ΔX S^j + Σ_j A_j X Σ_{i<j} S^i ΔS S^{j-i-1}`.
pub fn frechet_apply(
    p: &MatrixPolynomial,
    x: &CMat,
    s: &CMat,
    dx: &CMat,
    ds: &CMat,
) -> Result<CMat> {
    if dx.shape() != x.shape() || ds.shape() != s.shape() {
        return Err(Error::Dimension(format!(
            "directions {:?}/{:?} do not match X {:?} and S {:?}",
            dx.shape(),
            ds.shape(),
            x.shape(),
            s.shape()
        )));
    }
    p.residual(x, s)?;
    let pw = linalg::powers(s, p.degree());
    let mut out = CMat::zeros(x.nrows(), x.ncols());
    for (j, a) in p.coeffs().iter().enumerate() {
        out += a * (dx * &pw[j]);
        if j > 0 {
            let mut inner = CMat::zeros(s.nrows(), s.ncols());
            for i in 0..j {
                inner += &pw[i] * ds * &pw[j - i - 1];
            }
            out += a * (x * inner);
        }
    }
    Ok(out)
}

/// Jacobian blocks `B_X = Σ (S^j)^T ⊗ A_j` and
/// `B_S = Σ_j Σ_{i<j} (S^{j-i-1})^T ⊗ A_j X S^i` acting on column-major vecs.
pub fn pair_jacobian(p: &MatrixPolynomial, x: &CMat, s: &CMat) -> Result<(CMat, CMat)> {
    p.residual(x, s)?;
    let (n, k) = x.shape();
    let pw = linalg::powers(s, p.degree());
    let mut bx = CMat::zeros(n * k, n * k);
    let mut bs = CMat::zeros(n * k, k * k);
    for (j, a) in p.coeffs().iter().enumerate() {
        bx += linalg::kron(&pw[j].transpose(), a);
        for i in 0..j {
            let axs = a * x * &pw[i];
            bs += linalg::kron(&pw[j - i - 1].transpose(), &axs);
        }
    }
    Ok((bx, bs))
}

/// `B̂_S = Σ_j Σ_{i<j} (S^{j-i-1})^T ⊗ A_j S^i`, the `X = I` case of `B_S`.
pub fn solvent_jacobian(p: &MatrixPolynomial, s: &CMat) -> Result<CMat> {
    let n = p.n();
    let (_, bs) = pair_jacobian(p, &CMat::identity(n, n), s)?;
    Ok(bs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStep {
    pub dx: CMat,
    pub ds: CMat,
    pub rank: usize,
    pub expected_rank: usize,
    /// `‖J δ + vec P(X,S)‖_2` of the computed correction.
    pub linear_residual: f64,
    pub warning: Option<String>,
}

/// Minimum-norm least-squares solution of `[B_X B_S] vec(ΔX; ΔS) = -vec P(X,S)`.
pub fn newton_correction(p: &MatrixPolynomial, x: &CMat, s: &CMat) -> Result<NewtonStep> {
    let (n, k) = x.shape();
    let (bx, bs) = pair_jacobian(p, x, s)?;
    let mut jac = CMat::zeros(n * k, n * k + k * k);
    jac.columns_mut(0, n * k).copy_from(&bx);
    jac.columns_mut(n * k, k * k).copy_from(&bs);
    let rhs = -linalg::vec_of(&p.residual(x, s)?);
    let (jp, rank) = linalg::pinv(&jac);
    let sol = &jp * &rhs;
    let linear_residual = (&jac * &sol - &rhs).norm();
    let dx = linalg::unvec(&sol.as_slice()[..n * k], n, k);
    let ds = linalg::unvec(&sol.as_slice()[n * k..], k, k);
    let expected_rank = n * k;
    let warning = (rank < expected_rank).then(|| {
        format!("Jacobian has numerical rank {rank} < {expected_rank}; the pair may not be simple")
    });
    Ok(NewtonStep {
        dx,
        ds,
        rank,
        expected_rank,
        linear_residual,
        warning,
    })
}

/// Solvent Newton step `B̂_S vec(ΔS) = -vec P(S)`; falls back to the
/// pseudoinverse when `B̂_S` is numerically singular.
pub fn solvent_newton_correction(p: &MatrixPolynomial, s: &CMat) -> Result<NewtonStep> {
    let n = p.n();
    let jac = solvent_jacobian(p, s)?;
    let rhs = -linalg::vec_of(&p.eval_solvent(s)?);
    let lu = Factorized::new(&jac);
    let (sol, rank, warning) = match lu.solve_vec(&rhs) {
        Some(sol) if lu.condition <= SINGULAR_CONDITION => (sol, n * n, None),
        _ => {
            let (jp, rank) = linalg::pinv(&jac);
            (
                &jp * &rhs,
                rank,
                Some(format!(
                    "solvent Jacobian is numerically singular (condition {:.3e}); used the pseudoinverse",
                    lu.condition
                )),
            )
        }
    };
    let linear_residual = (&jac * &sol - &rhs).norm();
    Ok(NewtonStep {
        dx: CMat::zeros(n, n),
        ds: linalg::unvec(sol.as_slice(), n, n),
        rank,
        expected_rank: n * n,
        linear_residual,
        warning,
    })
}

/// `p(t) = (1-t)²α + t⁴θ + t⁶φ + t²(1-t)β + t³(1-t)γ + t⁵η`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepPolynomial {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub eta: f64,
    pub phi: f64,
}

impl StepPolynomial {
    /// Solvent case `θt⁴ - βt³ + (α+β)t² - 2αt + α`.
    pub fn quartic(alpha: f64, beta: f64, theta: f64) -> Self {
        StepPolynomial {
            alpha,
            beta,
            theta,
            ..Default::default()
        }
    }

    /// Ascending monomial coefficients of degree 0..=6.
    pub fn coefficients(&self) -> [f64; 7] {
        [
            self.alpha,
            -2.0 * self.alpha,
            self.alpha + self.beta,
            self.gamma - self.beta,
            self.theta - self.gamma,
            self.eta,
            self.phi,
        ]
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients()
            .iter()
            .rev()
            .fold(0.0, |acc, &a| acc * t + a)
    }

    /// Ascending coefficients of `p'`.
    pub fn derivative(&self) -> [f64; 6] {
        let a = self.coefficients();
        std::array::from_fn(|i| (i + 1) as f64 * a[i + 1])
    }
}

/// Minimizer of `p` over the real critical points in `[0, 2]` together with
/// `t = 1` and `t = 2`. Ties go to `t = 1`, then to the point nearer to 1.
pub fn minimize_step(poly: &StepPolynomial) -> f64 {
    let d: Vec<C64> = poly.derivative().iter().map(|&x| c(x, 0.0)).collect();
    let mut candidates: Vec<f64> = vec![2.0];
    if let Ok(roots) = linalg::poly_roots(&d) {
        for r in roots {
            if r.im.abs() <= 1e-8 * r.re.abs().max(1.0) && (0.0..=2.0).contains(&r.re) {
                candidates.push(r.re);
            }
        }
    }
    let mut best: (f64, f64) = (1.0, poly.eval(1.0));
    for t in candidates {
        let v = poly.eval(t);
        if v < best.1 || (v == best.1 && (t - 1.0).abs() < (best.0 - 1.0).abs()) {
            best = (t, v);
        }
    }
    best.0
}

fn re_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Circle centered at the mean of `eig(S)` with radius
/// `1.5 max(spread, ‖S - cI‖_2)`, so that both the spectrum and the
/// resolvent's Neumann series about the center are well inside.
pub fn spectral_contour(s: &CMat, nodes: usize, execution: Execution) -> Result<Contour> {
    let eig = linalg::eigenvalues(s)?;
    let k = eig.len().max(1);
    let center = eig.iter().sum::<C64>() / k as f64;
    let spread = eig.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let shifted = s - CMat::identity(s.nrows(), s.ncols()) * center;
    let mut radius = 1.5 * spread.max(linalg::norm2(&shifted));
    if !(radius > 0.0) {
        radius = 0.5 * center.norm().max(1.0);
    }
    Ok(Contour::new(center, radius, nodes)?.with_execution(execution))
}

fn check_encloses(s: &CMat, contour: &Contour) -> Result<()> {
    for z in linalg::eigenvalues(s)? {
        if !contour.contains(z) {
            return Err(Error::InvalidInput(format!(
                "contour (center {}, radius {}) does not enclose the eigenvalue {z} of S",
                contour.center(),
                contour.radius()
            )));
        }
    }
    Ok(())
}

/// Per-node `(z_j, w_j, (z_j I - S)^{-1})`.
fn resolvents(s: &CMat, contour: &Contour) -> Result<Vec<(C64, C64, CMat)>> {
    let k = s.nrows();
    contour
        .execution()
        .map_range(contour.nodes(), |j| {
            let (z, w) = contour.node(j);
            let shifted = CMat::identity(k, k) * z - s;
            let f = Factorized::new(&shifted);
            let near = || Error::EigenvalueNearContour {
                node: j,
                z: format!("{z}"),
                condition: f.condition,
            };
            if !(f.condition <= NEAR_CONTOUR_CONDITION) {
                return Err(near());
            }
            let r = f.solve(&CMat::identity(k, k)).ok_or_else(near)?;
            Ok((z, w, r))
        })
        .into_iter()
        .collect()
}

fn sum_in_order(terms: Vec<(CMat, CMat)>, rows: usize, cols: usize) -> (CMat, CMat) {
    let mut a = CMat::zeros(rows, cols);
    let mut b = CMat::zeros(rows, cols);
    for (ta, tb) in terms {
        a += ta;
        b += tb;
    }
    (a, b)
}

/// Coefficients of the step polynomial of an invariant-pair Newton step.
pub fn line_search_poly(
    p: &MatrixPolynomial,
    x: &CMat,
    s: &CMat,
    dx: &CMat,
    ds: &CMat,
    contour: &Contour,
) -> Result<StepPolynomial> {
    let r = p.residual(x, s)?;
    if dx.shape() != x.shape() || ds.shape() != s.shape() {
        return Err(Error::Dimension(
            "direction shapes do not match the pair".into(),
        ));
    }
    check_encloses(s, contour)?;
    let nodes = resolvents(s, contour)?;
    let terms = contour.execution().map_slice(&nodes, |(z, w, res)| {
        let pz = p.eval(*z) * *w;
        let rds = res * ds;
        let rdsr = &rds * res;
        let a = &pz * (dx + x * &rds) * &rdsr;
        let b = &pz * dx * &rds * &rdsr;
        (a, b)
    });
    let (a, b) = sum_in_order(terms, x.nrows(), x.ncols());
    Ok(StepPolynomial {
        alpha: r.norm_squared(),
        beta: 2.0 * re_inner(&r, &a),
        gamma: 2.0 * re_inner(&r, &b),
        theta: a.norm_squared(),
        eta: 2.0 * re_inner(&a, &b),
        phi: b.norm_squared(),
    })
}

/// Quartic step polynomial of a solvent Newton step.
pub fn solvent_line_search_poly(
    p: &MatrixPolynomial,
    s: &CMat,
    ds: &CMat,
    contour: &Contour,
) -> Result<StepPolynomial> {
    let r = p.eval_solvent(s)?;
    if ds.shape() != s.shape() {
        return Err(Error::Dimension("direction shape does not match S".into()));
    }
    check_encloses(s, contour)?;
    let nodes = resolvents(s, contour)?;
    let terms = contour.execution().map_slice(&nodes, |(z, w, res)| {
        let rds = res * ds;
        let a = p.eval(*z) * *w * &rds * &rds * res;
        (a, CMat::zeros(0, 0))
    });
    let mut a = CMat::zeros(s.nrows(), s.ncols());
    for (ta, _) in terms {
        a += ta;
    }
    Ok(StepPolynomial::quartic(
        r.norm_squared(),
        2.0 * re_inner(&r, &a),
        a.norm_squared(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOptions {
    pub tol: f64,
    pub maxit: usize,
    pub line_search: bool,
    /// Fixed line-search contour; when absent, or when it stops enclosing
    /// the spectrum of the iterate, [`spectral_contour`] is used.
    pub contour: Option<Contour>,
    pub nodes: usize,
    pub execution: Execution,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            tol: DEFAULT_TOL,
            maxit: DEFAULT_MAXIT,
            line_search: true,
            contour: None,
            nodes: DEFAULT_NODES,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub iterations: usize,
    /// Relative residuals, one per iterate including the start.
    pub residual_history: Vec<f64>,
    pub step_lengths: Vec<f64>,
    pub converged: bool,
    /// Seconds.
    pub wall_time: f64,
    pub warnings: Vec<String>,
}

fn line_search_contour(s: &CMat, opts: &RefineOptions) -> Result<Contour> {
    if let Some(ct) = opts.contour {
        if check_encloses(s, &ct).is_ok() {
            return Ok(ct);
        }
    }
    spectral_contour(s, opts.nodes, opts.execution)
}

/// Picks the model step if it decreases the true squared residual, else
/// `t = 1`, else `t = 1/2`, else the best of the three.
fn safeguarded_step(t_star: f64, current: f64, residual_at: impl Fn(f64) -> f64) -> f64 {
    let mut tried = Vec::with_capacity(3);
    for t in [t_star, 1.0, 0.5] {
        if tried.iter().any(|&(u, _)| u == t) {
            continue;
        }
        let r = residual_at(t);
        if r <= current {
            return t;
        }
        tried.push((t, r));
    }
    tried
        .into_iter()
        .filter(|(_, r)| r.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(t, _)| t)
        .unwrap_or(1.0)
}

pub fn relative_residual(p: &MatrixPolynomial, x: &CMat, s: &CMat) -> Result<f64> {
    let r = p.residual(x, s)?.norm();
    let nx = x.norm();
    Ok(if nx > 0.0 { r / nx } else { f64::INFINITY })
}

/// Newton's method for `P(X, S) = 0`, optionally with exact line search.
pub fn refine_pair(
    p: &MatrixPolynomial,
    pair: &InvariantPair,
    opts: &RefineOptions,
) -> Result<(InvariantPair, RefinementReport)> {
    pair.check_against(p)?;
    let start = Instant::now();
    let mut x = pair.x().clone();
    let mut s = pair.s().clone();
    let mut rel = relative_residual(p, &x, &s)?;
    let mut history = vec![rel];
    let mut steps = Vec::new();
    let mut warnings = Vec::new();
    while steps.len() < opts.maxit && !(rel < opts.tol) && rel.is_finite() {
        let step = newton_correction(p, &x, &s)?;
        if let Some(w) = &step.warning {
            warnings.push(format!("iteration {}: {w}", steps.len()));
        }
        let t = if opts.line_search {
            let poly = line_search_contour(&s, opts)
                .and_then(|ct| line_search_poly(p, &x, &s, &step.dx, &step.ds, &ct));
            match poly {
                Ok(poly) => {
                    let sq = |t: f64| {
                        let xt = &x + &step.dx * c(t, 0.0);
                        let st = &s + &step.ds * c(t, 0.0);
                        p.residual(&xt, &st)
                            .map(|r| r.norm_squared())
                            .unwrap_or(f64::INFINITY)
                    };
                    safeguarded_step(minimize_step(&poly), poly.alpha, sq)
                }
                Err(e) => {
                    warnings.push(format!(
                        "iteration {}: line search skipped: {e}",
                        steps.len()
                    ));
                    1.0
                }
            }
        } else {
            1.0
        };
        x += &step.dx * c(t, 0.0);
        s += &step.ds * c(t, 0.0);
        rel = relative_residual(p, &x, &s)?;
        history.push(rel);
        steps.push(t);
    }
    let report = RefinementReport {
        iterations: steps.len(),
        converged: rel < opts.tol,
        residual_history: history,
        step_lengths: steps,
        wall_time: start.elapsed().as_secs_f64(),
        warnings,
    };
    Ok((InvariantPair::new(x, s)?, report))
}

/// Relative solvent residual `‖P(S)‖_F / ‖I‖_F`.
pub fn solvent_relative_residual(p: &MatrixPolynomial, s: &CMat) -> Result<f64> {
    Ok(p.eval_solvent(s)?.norm() / (p.n() as f64).sqrt())
}

/// Newton's method for `P(S) = 0`, optionally with exact line search.
pub fn refine_solvent(
    p: &MatrixPolynomial,
    s0: &CMat,
    opts: &RefineOptions,
) -> Result<(Solvent, RefinementReport)> {
    let start = Instant::now();
    let mut s = s0.clone();
    let mut rel = solvent_relative_residual(p, &s)?;
    let mut history = vec![rel];
    let mut steps = Vec::new();
    let mut warnings = Vec::new();
    while steps.len() < opts.maxit && !(rel < opts.tol) && rel.is_finite() {
        let step = solvent_newton_correction(p, &s)?;
        if let Some(w) = &step.warning {
            warnings.push(format!("iteration {}: {w}", steps.len()));
        }
        let t = if opts.line_search {
            let poly = line_search_contour(&s, opts)
                .and_then(|ct| solvent_line_search_poly(p, &s, &step.ds, &ct));
            match poly {
                Ok(poly) => {
                    let sq = |t: f64| {
                        p.eval_solvent(&(&s + &step.ds * c(t, 0.0)))
                            .map(|r| r.norm_squared())
                            .unwrap_or(f64::INFINITY)
                    };
                    safeguarded_step(minimize_step(&poly), poly.alpha, sq)
                }
                Err(e) => {
                    warnings.push(format!(
                        "iteration {}: line search skipped: {e}",
                        steps.len()
                    ));
                    1.0
                }
            }
        } else {
            1.0
        };
        s += &step.ds * c(t, 0.0);
        rel = solvent_relative_residual(p, &s)?;
        history.push(rel);
        steps.push(t);
    }
    let report = RefinementReport {
        iterations: steps.len(),
        converged: rel < opts.tol,
        residual_history: history,
        step_lengths: steps,
        wall_time: start.elapsed().as_secs_f64(),
        warnings,
    };
    Ok((Solvent::new(p, s)?, report))
}

/// `‖P(X + tΔX, S + tΔS)‖_F²` evaluated directly.
pub fn direct_step_residual(
    p: &MatrixPolynomial,
    x: &CMat,
    s: &CMat,
    dx: &CMat,
    ds: &CMat,
    t: f64,
) -> Result<f64> {
    let tt = c(t, 0.0);
    Ok(p.residual(&(x + dx * tt), &(s + ds * tt))?.norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ss2() -> MatrixPolynomial {
        MatrixPolynomial::from_real(
            2,
            &[
                &[1.0, 0.0, 0.0, 0.0],
                &[-2.0, 0.0, 2.0, -1.0],
                &[1.0, 0.0, 0.0, 1.0],
            ],
        )
        .unwrap()
    }

    fn golden_pair() -> (CMat, CMat) {
        (
            real_matrix(2, 3, &[0.0, -1.0, -2.0, 1.0, 1.0, 3.0]),
            real_matrix(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, -3.0, 0.0, 1.0, 3.0]),
        )
    }

    fn noise(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            c(
                rng.random_range(-scale..scale),
                rng.random_range(-scale..scale),
            )
        })
    }

    #[test]
    fn frechet_trivial_cases() {
        let p = ss2();
        let (x, s) = golden_pair();
        let z = frechet_apply(&p, &x, &s, &CMat::zeros(2, 3), &CMat::zeros(3, 3)).unwrap();
        assert!(z.norm() == 0.0);
        let lin = MatrixPolynomial::from_real(2, &[&[1.0, 2.0, 3.0, 4.0], &[0.0, 1.0, -1.0, 2.0]])
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (x, s, dx, ds) = (
            noise(2, 2, 1.0, &mut rng),
            noise(2, 2, 1.0, &mut rng),
            noise(2, 2, 1.0, &mut rng),
            noise(2, 2, 1.0, &mut rng),
        );
        let expect = lin.coeff(0) * &dx + lin.coeff(1) * &dx * &s + lin.coeff(1) * &x * &ds;
        let got = frechet_apply(&lin, &x, &s, &dx, &ds).unwrap();
        assert!((got - expect).norm() < 1e-13);
    }

    #[test]
    fn jacobian_matches_frechet() {
        let p = ss2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (x, s) = (noise(2, 3, 1.0, &mut rng), noise(3, 3, 1.0, &mut rng));
        let (dx, ds) = (noise(2, 3, 1.0, &mut rng), noise(3, 3, 1.0, &mut rng));
        let (bx, bs) = pair_jacobian(&p, &x, &s).unwrap();
        let lhs = bx * linalg::vec_of(&dx) + bs * linalg::vec_of(&ds);
        let rhs = linalg::vec_of(&frechet_apply(&p, &x, &s, &dx, &ds).unwrap());
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn exact_pair_has_zero_correction() {
        let (x, s) = golden_pair();
        let step = newton_correction(&ss2(), &x, &s).unwrap();
        assert!(step.dx.norm() <= 1e-12 && step.ds.norm() <= 1e-12);
        assert_eq!(step.rank, 6);
        assert!(step.warning.is_none());
    }

    #[test]
    fn correction_reduces_residual() {
        let p = ss2();
        let (x, s) = golden_pair();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = x + noise(2, 3, 1e-4, &mut rng);
        let s = s + noise(3, 3, 1e-4, &mut rng);
        let before = p.residual(&x, &s).unwrap().norm();
        let st = newton_correction(&p, &x, &s).unwrap();
        let after = p.residual(&(&x + &st.dx), &(&s + &st.ds)).unwrap().norm();
        assert!(after * 10.0 <= before, "{before} -> {after}");
    }

    #[test]
    fn step_polynomial_examples() {
        let p = StepPolynomial {
            alpha: 1.0,
            ..Default::default()
        };
        assert_eq!(minimize_step(&p), 1.0);
        let q = StepPolynomial {
            alpha: 1.0,
            theta: 4.0,
            ..Default::default()
        };
        let t = minimize_step(&q);
        // -2(1-t) + 16 t^3 = 0
        assert!((-2.0 * (1.0 - t) + 16.0 * t * t * t).abs() < 1e-10);
        assert!(t > 0.0 && t < 1.0);
        let zero = StepPolynomial::default();
        assert_eq!(minimize_step(&zero), 1.0);
        let quart = StepPolynomial::quartic(2.0, 0.5, 3.0);
        for t in [0.0f64, 0.3, 1.7] {
            let direct = 3.0 * t.powi(4) - 0.5 * t.powi(3) + 2.5 * t * t - 4.0 * t + 2.0;
            assert!((quart.eval(t) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn line_search_poly_is_exact_for_quadratics() {
        let p = ss2();
        let (x, s) = golden_pair();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = x + noise(2, 3, 1e-2, &mut rng);
        let s = s + noise(3, 3, 1e-2, &mut rng);
        let st = newton_correction(&p, &x, &s).unwrap();
        let ct = spectral_contour(&s, DEFAULT_NODES, Execution::default()).unwrap();
        let poly = line_search_poly(&p, &x, &s, &st.dx, &st.ds, &ct).unwrap();
        for i in 0..=10 {
            let t = 0.2 * i as f64;
            let d = direct_step_residual(&p, &x, &s, &st.dx, &st.ds, t).unwrap();
            assert!(
                (poly.eval(t) - d).abs() <= 1e-10 * d.max(poly.alpha),
                "t={t}: {} vs {d}",
                poly.eval(t)
            );
        }
    }

    #[test]
    fn zero_direction_gives_zero_poly() {
        let p = ss2();
        let (x, s) = golden_pair();
        let ct = spectral_contour(&s, DEFAULT_NODES, Execution::default()).unwrap();
        let poly =
            line_search_poly(&p, &x, &s, &CMat::zeros(2, 3), &CMat::zeros(3, 3), &ct).unwrap();
        let cs = poly.coefficients();
        assert!(cs.iter().all(|v| v.abs() < 1e-20), "{cs:?}");
    }

    #[test]
    fn contour_must_enclose_spectrum() {
        let p = ss2();
        let (x, s) = golden_pair();
        let ct = Contour::circle(c(5.0, 0.0), 0.5).unwrap();
        assert!(line_search_poly(&p, &x, &s, &x, &s, &ct).is_err());
    }

    #[test]
    fn refine_perturbed_pair() {
        let p = ss2();
        let (x, s) = golden_pair();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x0 = x + noise(2, 3, 1e-3, &mut rng);
        let s0 = s + noise(3, 3, 1e-3, &mut rng);
        let pair = InvariantPair::new(x0, s0).unwrap();
        let opts = RefineOptions {
            maxit: 50,
            ..Default::default()
        };
        let (out, rep) = refine_pair(&p, &pair, &opts).unwrap();
        assert!(rep.converged, "{rep:?}");
        assert!(*rep.residual_history.last().unwrap() < 1e-12);
        assert_eq!(rep.residual_history.len(), rep.iterations + 1);
        assert!(relative_residual(&p, out.x(), out.s()).unwrap() < 1e-12);
        let plain = RefineOptions {
            line_search: false,
            ..opts
        };
        let (_, rep2) = refine_pair(&p, &pair, &plain).unwrap();
        assert!(rep2.converged);
        assert!(rep2.step_lengths.iter().all(|&t| t == 1.0));
    }

    #[test]
    fn refine_edge_cases() {
        let p = ss2();
        let (x, s) = golden_pair();
        let exact = InvariantPair::new(x.clone(), s.clone()).unwrap();
        let (_, rep) = refine_pair(&p, &exact, &RefineOptions::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert!(rep.converged);
        let off = InvariantPair::new(x + CMat::from_element(2, 3, c(0.1, 0.0)), s).unwrap();
        let opts = RefineOptions {
            maxit: 0,
            ..Default::default()
        };
        let (_, rep) = refine_pair(&p, &off, &opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.residual_history.len(), 1);
    }

    fn quad5() -> MatrixPolynomial {
        MatrixPolynomial::from_real(
            2,
            &[
                &[0.0, 12.0, -2.0, 14.0],
                &[-1.0, -6.0, 2.0, -9.0],
                &[1.0, 0.0, 0.0, 1.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn solvent_refinement() {
        let p = quad5();
        let s = real_matrix(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let (_, rep) = refine_solvent(&p, &s, &RefineOptions::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s0 = &s + noise(2, 2, 1e-2, &mut rng);
        let (sol, rep) = refine_solvent(&p, &s0, &RefineOptions::default()).unwrap();
        assert!(rep.converged && rep.iterations <= 15, "{rep:?}");
        assert!((sol.s() - &s).norm() < 1e-10);
    }

    #[test]
    fn solvent_quartic_is_exact() {
        let p = quad5();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = real_matrix(2, 2, &[1.0, 0.0, 0.0, 2.0]) + noise(2, 2, 5e-2, &mut rng);
        let st = solvent_newton_correction(&p, &s).unwrap();
        let ct = spectral_contour(&s, DEFAULT_NODES, Execution::default()).unwrap();
        let poly = solvent_line_search_poly(&p, &s, &st.ds, &ct).unwrap();
        let id = CMat::identity(2, 2);
        for t in [0.0, 1.0, 2.0] {
            let d = direct_step_residual(&p, &id, &s, &CMat::zeros(2, 2), &st.ds, t).unwrap();
            assert!((poly.eval(t) - d).abs() <= 1e-10 * d.max(poly.alpha));
        }
    }
}
