//! Matrix solvents `P(S) = Σ A_j S^j = 0`: from invariant pairs, from
//! eigenpair subsets, and from upper-triangular equivalent polynomials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{self, c, CMat, CVec, Factorized, C64, ZERO};
use crate::matpoly::{InvariantPair, MatrixPolynomial, SINGULAR_CONDITION};
use crate::spectrum::{cluster_eigenvalues, ClusterOptions};

pub const MAX_SUBSETS: usize = 10_000;
pub const MAX_BRANCHES: usize = 1_000;

/// Condition estimate above which an eigenvector basis or `Y_1` is treated
/// as singular (`1/√ε`).
pub fn basis_condition_limit() -> f64 {
    1.0 / f64::EPSILON.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solvent {
    s: CMat,
    residual: f64,
}

impl Solvent {
    /// Wraps `S` and records `‖P(S)‖_F`.
    pub fn new(p: &MatrixPolynomial, s: CMat) -> Result<Self> {
        let residual = p.eval_solvent(&s)?.norm();
        Ok(Solvent { s, residual })
    }

    pub fn s(&self) -> &CMat {
        &self.s
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn into_matrix(self) -> CMat {
        self.s
    }
}

/// `Y T Y^{-1}` for a square, well-conditioned `Y`.
fn similarity(y: &CMat, t: &CMat, what: &'static str) -> Result<CMat> {
    let yt = y.transpose();
    let f = Factorized::new(&yt);
    if !(f.condition <= basis_condition_limit()) {
        return Err(Error::Singular {
            what,
            condition: f.condition,
        });
    }
    // S Y = Y T  <=>  Y^T S^T = (Y T)^T
    let st = f.solve(&(y * t).transpose()).ok_or(Error::Singular {
        what,
        condition: f.condition,
    })?;
    Ok(st.transpose())
}

/// `S = X S_pair X^{-1}` for a pair with `k = n`.
pub fn solvent_from_pair(p: &MatrixPolynomial, pair: &InvariantPair) -> Result<Solvent> {
    if pair.n() != p.n() {
        return Err(Error::Dimension(format!(
            "X has {} rows, polynomial has n = {}",
            pair.n(),
            p.n()
        )));
    }
    if pair.k() != p.n() {
        return Err(Error::Dimension(format!(
            "a solvent needs k = n = {}, the pair has k = {}",
            p.n(),
            pair.k()
        )));
    }
    Solvent::new(p, similarity(pair.x(), pair.s(), "X")?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedSolvent {
    /// Zero-based indices into the eigenpair list.
    pub indices: Vec<usize>,
    pub solvent: Solvent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedSubset {
    pub indices: Vec<usize>,
    /// Condition estimate of the eigenvector matrix `W`.
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolventEnumeration {
    pub solvents: Vec<EnumeratedSolvent>,
    pub rejected: Vec<RejectedSubset>,
}

fn binomial_u128(p: usize, n: usize) -> u128 {
    if n > p {
        return 0;
    }
    let n = n.min(p - n);
    let mut acc: u128 = 1;
    for i in 0..n {
        acc = acc * (p - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All `n`-subsets of `0..p` in lexicographic order.
pub fn subsets(p: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n > p {
        return out;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        out.push(idx.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < p - n + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `S = W diag(μ) W^{-1}` for every `n`-subset of eigenpairs whose
/// eigenvectors form a nonsingular `W`; singular subsets are returned as
/// rejected.
pub fn enumerate_solvents(
    p: &MatrixPolynomial,
    eigpairs: &[(C64, CVec)],
    execution: Execution,
) -> Result<SolventEnumeration> {
    let n = p.n();
    let count = eigpairs.len();
    if count > p.degree() * n {
        return Err(Error::InvalidInput(format!(
            "{count} eigenpairs exceed l*n = {}",
            p.degree() * n
        )));
    }
    if let Some((i, _)) = eigpairs.iter().enumerate().find(|(_, (_, v))| v.len() != n) {
        return Err(Error::Dimension(format!(
            "eigenvector {i} does not have length {n}"
        )));
    }
    let total = binomial_u128(count, n);
    if total > MAX_SUBSETS as u128 {
        return Err(Error::TooManySubsets {
            count: total,
            cap: MAX_SUBSETS,
        });
    }
    let subs = subsets(count, n);
    let results = execution.map_slice(
        &subs,
        |idx| -> Result<std::result::Result<EnumeratedSolvent, RejectedSubset>> {
            let mut w = CMat::zeros(n, n);
            let mut d = CMat::zeros(n, n);
            for (col, &i) in idx.iter().enumerate() {
                w.set_column(col, &eigpairs[i].1);
                d[(col, col)] = eigpairs[i].0;
            }
            match similarity(&w, &d, "W") {
                Ok(s) => Ok(Ok(EnumeratedSolvent {
                    indices: idx.clone(),
                    solvent: Solvent::new(p, s)?,
                })),
                Err(Error::Singular { condition, .. }) => Ok(Err(RejectedSubset {
                    indices: idx.clone(),
                    condition,
                })),
                Err(e) => Err(e),
            }
        },
    );
    let mut out = SolventEnumeration {
        solvents: Vec::new(),
        rejected: Vec::new(),
    };
    for r in results {
        match r? {
            Ok(s) => out.solvents.push(s),
            Err(rej) => out.rejected.push(rej),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    None,
    Unique,
    Affine,
}

/// Upper-triangular solvents `base + Σ c_i directions[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularSolventFamily {
    pub kind: FamilyKind,
    pub base: CMat,
    pub directions: Vec<CMat>,
    /// For `kind == None`, the entry whose equation has no solution.
    pub conflict: Option<(usize, usize)>,
}

impl TriangularSolventFamily {
    pub fn member(&self, params: &[C64]) -> CMat {
        let mut m = self.base.clone();
        for (d, &t) in self.directions.iter().zip(params) {
            m += d * t;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangularBranch {
    /// Chosen diagonal `x_11, ..., x_nn`.
    pub diagonal: Vec<C64>,
    pub family: TriangularSolventFamily,
}

/// Distinct roots of every diagonal polynomial `T_ii(λ)`, multiple roots
/// merged into their centroid.
pub fn diagonal_roots(t: &MatrixPolynomial) -> Result<Vec<Vec<C64>>> {
    let opts = ClusterOptions::default();
    (0..t.n())
        .map(|i| {
            let raw = linalg::poly_roots(&t.diagonal_poly(i))?;
            Ok(cluster_eigenvalues(&raw, &opts)
                .into_iter()
                .map(|cl| cl.value)
                .collect())
        })
        .collect()
}

/// Solves `T(S_t) = 0` over upper-triangular `S_t`, one branch per choice
/// of diagonal roots (lexicographic in the sorted root lists).
pub fn triangular_solvent_solve(
    t: &MatrixPolynomial,
    execution: Execution,
) -> Result<Vec<TriangularBranch>> {
    if let Some((coeff, row, col)) = t.is_upper_triangular() {
        return Err(Error::NotTriangular { coeff, row, col });
    }
    let roots = diagonal_roots(t)?;
    let count = roots
        .iter()
        .try_fold(1usize, |acc, r| acc.checked_mul(r.len()))
        .unwrap_or(usize::MAX);
    if count > MAX_BRANCHES {
        return Err(Error::TooManyBranches {
            count,
            cap: MAX_BRANCHES,
        });
    }
    let choices: Vec<Vec<C64>> = (0..count)
        .map(|mut b| {
            let mut d = vec![ZERO; roots.len()];
            for i in (0..roots.len()).rev() {
                d[i] = roots[i][b % roots[i].len()];
                b /= roots[i].len();
            }
            d
        })
        .collect();
    execution
        .map_slice(&choices, |d| {
            solve_branch(t, d).map(|family| TriangularBranch {
                diagonal: d.clone(),
                family,
            })
        })
        .into_iter()
        .collect()
}

/// Entry of `S_t` that is affine in the free parameters:
/// `coeffs[0] + Σ_q coeffs[q+1] c_q`.
type Affine = Vec<C64>;

fn affine_at(a: &Affine, params: &[C64]) -> C64 {
    a.iter()
        .skip(1)
        .zip(params)
        .fold(a[0], |acc, (&k, &p)| acc + k * p)
}

fn solve_branch(t: &MatrixPolynomial, diag: &[C64]) -> Result<TriangularSolventFamily> {
    let n = t.n();
    let l = t.degree();
    let mut entries: Vec<Vec<Option<Affine>>> = vec![vec![None; n]; n];
    for i in 0..n {
        entries[i][i] = Some(vec![diag[i]]);
    }
    let mut nparams = 0usize;
    let dmax = diag.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tmax = t.coeffs().iter().map(linalg::max_abs).fold(0.0, f64::max);
    let a_scale = 1.0
        + (1..=l)
            .map(|k| tmax * k as f64 * dmax.powi(k as i32 - 1))
            .sum::<f64>();
    let tol_a = n as f64 * f64::EPSILON * a_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a1a);

    let numeric = |entries: &Vec<Vec<Option<Affine>>>, params: &[C64]| -> CMat {
        CMat::from_fn(n, n, |i, j| {
            entries[i][j]
                .as_ref()
                .map(|a| affine_at(a, params))
                .unwrap_or(ZERO)
        })
    };

    for d in 1..n {
        for i in 0..(n - d) {
            let j = i + d;
            let mut a = ZERO;
            for k in 1..=l {
                let mut s = ZERO;
                for pw in 0..k {
                    s += diag[i].powu(pw as u32) * diag[j].powu((k - 1 - pw) as u32);
                }
                a += t.coeff(k)[(i, i)] * s;
            }
            // b(c) = T(S(c))_ij with x_ij = 0 and undetermined entries zero
            let b_at = |params: &[C64]| -> C64 {
                let s = numeric(&entries, params);
                t.eval_solvent(&s).map(|r| r[(i, j)]).unwrap_or(ZERO)
            };
            let zero = vec![ZERO; nparams];
            let b0 = b_at(&zero);
            let mut b: Affine = vec![b0];
            for q in 0..nparams {
                let mut e = zero.clone();
                e[q] = c(1.0, 0.0);
                b.push(b_at(&e) - b0);
            }
            let probe: Vec<C64> = (0..nparams)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let smax = (0..n)
                .flat_map(|r| (0..n).map(move |cc| (r, cc)))
                .filter_map(|(r, cc)| entries[r][cc].as_ref())
                .map(|e| e.iter().map(|z| z.norm()).sum::<f64>())
                .fold(1.0, f64::max);
            let b_scale = 1.0 + (0..=l).map(|k| tmax * smax.powi(k as i32)).sum::<f64>();
            let tol_b = 100.0 * n as f64 * f64::EPSILON * b_scale;
            if nparams > 0 && (b_at(&probe) - affine_at(&b, &probe)).norm() > tol_b {
                return Err(Error::NonlinearFamily { row: i, col: j });
            }
            if a.norm() > tol_a {
                entries[i][j] = Some(b.iter().map(|&v| -v / a).collect());
                continue;
            }
            // x_ij does not enter its own equation: it is free, and the
            // equation b(c) = 0 constrains the earlier parameters
            let (piv, pmag) = b
                .iter()
                .enumerate()
                .skip(1)
                .map(|(q, z)| (q, z.norm()))
                .fold((0, 0.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if pmag <= tol_b {
                if b[0].norm() > tol_b {
                    return Ok(TriangularSolventFamily {
                        kind: FamilyKind::None,
                        base: numeric(&entries, &vec![ZERO; nparams]),
                        directions: Vec::new(),
                        conflict: Some((i, j)),
                    });
                }
            } else {
                // c_{piv-1} = -(b_0 + Σ_{q != piv} b_q c_q) / b_piv
                let bp = b[piv];
                let subst: Affine = b
                    .iter()
                    .enumerate()
                    .map(|(q, &v)| if q == piv { ZERO } else { -v / bp })
                    .collect();
                for row in entries.iter_mut() {
                    for e in row.iter_mut().flatten() {
                        if e.len() > piv {
                            let k = e[piv];
                            e[piv] = ZERO;
                            for (q, &sv) in subst.iter().enumerate() {
                                if q < e.len() {
                                    e[q] += k * sv;
                                } else if sv != ZERO {
                                    e.resize(q + 1, ZERO);
                                    e[q] += k * sv;
                                }
                            }
                        }
                    }
                }
            }
            nparams += 1;
            let mut e = vec![ZERO; nparams + 1];
            e[nparams] = c(1.0, 0.0);
            entries[i][j] = Some(e);
        }
    }

    let base = numeric(&entries, &vec![ZERO; nparams]);
    let mut directions = Vec::new();
    for q in 0..nparams {
        let dir = CMat::from_fn(n, n, |i, j| {
            entries[i][j]
                .as_ref()
                .and_then(|e| e.get(q + 1).copied())
                .unwrap_or(ZERO)
        });
        if dir.iter().any(|z| z.norm() > 0.0) {
            directions.push(dir);
        }
    }
    Ok(TriangularSolventFamily {
        kind: if directions.is_empty() {
            FamilyKind::Unique
        } else {
            FamilyKind::Affine
        },
        base,
        directions,
        conflict: None,
    })
}

/// `S = Y_1 S_t Y_1^{-1}` where `Y_1` is the leading block of
/// `M^{-1} [I; S_t; ...; S_t^{ℓ-1}]`. Fails unless `‖P(S)‖_F <= tol`.
pub fn solvent_from_triangular(
    p: &MatrixPolynomial,
    m: &CMat,
    s_t: &CMat,
    tol: f64,
) -> Result<Solvent> {
    let n = p.n();
    let l = p.degree();
    if m.nrows() != l * n || m.ncols() != l * n {
        return Err(Error::Dimension(format!(
            "M must be {0}x{0}, got {1}x{2}",
            l * n,
            m.nrows(),
            m.ncols()
        )));
    }
    if s_t.nrows() != n || s_t.ncols() != n {
        return Err(Error::Dimension(format!(
            "S_t must be {n}x{n}, got {}x{}",
            s_t.nrows(),
            s_t.ncols()
        )));
    }
    let pw = linalg::powers(s_t, l.saturating_sub(1));
    let mut rhs = CMat::zeros(l * n, n);
    for (i, sp) in pw.iter().enumerate() {
        rhs.view_mut((i * n, 0), (n, n)).copy_from(sp);
    }
    let y = linalg::solve_checked(m, &rhs, "M", SINGULAR_CONDITION)?;
    let y1 = y.view((0, 0), (n, n)).into_owned();
    let s = similarity(&y1, s_t, "Y_1")?;
    let sol = Solvent::new(p, s)?;
    if !(sol.residual <= tol) {
        return Err(Error::ResidualTooLarge {
            residual: sol.residual,
            tol,
        });
    }
    Ok(sol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCheck {
    pub value: C64,
    /// `‖P(μ) w‖ / ‖w‖`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolventVerification {
    /// `‖P(S)‖_F / ‖S‖_F` (absolute when `S = 0`).
    pub residual: f64,
    pub eigen_checks: Vec<EigenCheck>,
    pub certified: bool,
}

pub fn verify_solvent(p: &MatrixPolynomial, s: &CMat, tol: f64) -> Result<SolventVerification> {
    let r = p.eval_solvent(s)?.norm();
    let sn = s.norm();
    let residual = if sn > 0.0 { r / sn } else { r };
    let (vals, vecs) = linalg::eig(s)?;
    let eigen_checks: Vec<EigenCheck> = vals
        .iter()
        .enumerate()
        .map(|(i, &mu)| {
            let w = vecs.column(i).into_owned();
            let nw = w.norm();
            EigenCheck {
                value: mu,
                residual: (p.eval(mu) * &w).norm() / if nw > 0.0 { nw } else { 1.0 },
            }
        })
        .collect();
    let certified = residual <= tol && eigen_checks.iter().all(|e| e.residual <= tol);
    Ok(SolventVerification {
        residual,
        eigen_checks,
        certified,
    })
}
