//! Normwise condition numbers and backward errors of invariant pairs and
//! solvents, with perturbations `‖ΔA_i‖_F <= ε α_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Factorized};
use crate::matpoly::{MatrixPolynomial, SINGULAR_CONDITION};
use crate::refine::pair_jacobian;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    alphas: Vec<f64>,
}

impl WeightVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::InvalidInput(format!(
                "weights must be finite and nonnegative, got {a}"
            )));
        }
        Ok(WeightVector { alphas })
    }

    /// `α_i = ‖A_i‖_F`.
    pub fn frobenius(p: &MatrixPolynomial) -> Self {
        WeightVector {
            alphas: p.coeff_norms(),
        }
    }

    pub fn ones(degree: usize) -> Self {
        WeightVector {
            alphas: vec![1.0; degree + 1],
        }
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.alphas.iter().map(|a| a * factor).collect())
    }

    fn check(&self, p: &MatrixPolynomial) -> Result<()> {
        if self.alphas.len() != p.degree() + 1 {
            return Err(Error::Dimension(format!(
                "{} weights for a polynomial of degree {}",
                self.alphas.len(),
                p.degree()
            )));
        }
        if self.alphas.iter().all(|&a| a == 0.0) {
            return Err(Error::ZeroWeights);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub kappa: f64,
    pub jacobian_rank: usize,
    pub expected_rank: usize,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackwardErrorReport {
    /// `‖H^+ r‖_2`; absent when `H` lacks full row rank.
    pub eta: Option<f64>,
    pub lower: f64,
    /// `+∞` when the bound's denominator vanishes.
    pub upper: f64,
    pub h_rank: usize,
}

/// `B_A = [α_ℓ (X S^ℓ)^T ⊗ I_n ... α_0 X^T ⊗ I_n]` without the blocks whose
/// weight is zero. Also returns `X S^i` for `i = 0..=ℓ`.
pub fn weighted_coefficient_block(
    p: &MatrixPolynomial,
    x: &CMat,
    s: &CMat,
    w: &WeightVector,
) -> Result<(CMat, Vec<CMat>)> {
    w.check(p)?;
    p.residual(x, s)?;
    let n = p.n();
    let xs: Vec<CMat> = linalg::powers(s, p.degree())
        .iter()
        .map(|sj| x * sj)
        .collect();
    let active: Vec<usize> = (0..=p.degree())
        .rev()
        .filter(|&i| w.alphas[i] > 0.0)
        .collect();
    let rows = x.nrows() * x.ncols();
    let mut ba = CMat::zeros(rows, active.len() * n * n);
    let id = CMat::identity(n, n);
    for (col, &i) in active.iter().enumerate() {
        let block = linalg::kron(&xs[i].transpose(), &id) * linalg::c(w.alphas[i], 0.0);
        ba.columns_mut(col * n * n, n * n).copy_from(&block);
    }
    Ok((ba, xs))
}

/// `κ(X,S) = ‖[B_X B_S]^+ B_A‖_2 / ‖[X; S]‖_F`.
pub fn pair_condition_number(
    p: &MatrixPolynomial,
    x: &CMat,
    s: &CMat,
    w: &WeightVector,
) -> Result<ConditionReport> {
    let (ba, _) = weighted_coefficient_block(p, x, s, w)?;
    let (n, k) = x.shape();
    let (bx, bs) = pair_jacobian(p, x, s)?;
    let mut jac = CMat::zeros(n * k, n * k + k * k);
    jac.columns_mut(0, n * k).copy_from(&bx);
    jac.columns_mut(n * k, k * k).copy_from(&bs);
    let (jp, rank) = linalg::pinv(&jac);
    let denom = (x.norm_squared() + s.norm_squared()).sqrt();
    let kappa = linalg::norm2(&(jp * ba)) / denom;
    let expected_rank = n * k;
    Ok(ConditionReport {
        kappa,
        jacobian_rank: rank,
        expected_rank,
        warning: (rank < expected_rank).then(|| {
            format!(
                "[B_X B_S] has numerical rank {rank} < {expected_rank}; the pair may not be simple"
            )
        }),
    })
}

fn bound(residual: f64, denom_sq: f64) -> f64 {
    if residual == 0.0 {
        0.0
    } else if denom_sq > 0.0 {
        residual / denom_sq.sqrt()
    } else {
        f64::INFINITY
    }
}

fn min_norm_eta(h: &CMat, r: &CMat) -> (Option<f64>, usize) {
    let (hp, rank) = linalg::pinv(h);
    let eta = (rank == h.nrows()).then(|| (hp * linalg::vec_of(r)).norm());
    (eta, rank)
}

/// Backward error of an approximate pair with the Frobenius-norm lower bound
/// and the smallest-singular-value upper bound.
pub fn pair_backward_error(
    p: &MatrixPolynomial,
    x: &CMat,
    s: &CMat,
    w: &WeightVector,
) -> Result<BackwardErrorReport> {
    let (h, xs) = weighted_coefficient_block(p, x, s, w)?;
    let r = p.residual(x, s)?;
    let rn = r.norm();
    let a = &w.alphas;
    let lower_sq: f64 = xs
        .iter()
        .zip(a)
        .map(|(m, ai)| ai * ai * m.norm_squared())
        .sum();
    let upper_sq: f64 = xs
        .iter()
        .zip(a)
        .map(|(m, ai)| {
            let sm = linalg::sigma_min(m);
            ai * ai * sm * sm
        })
        .sum();
    let (eta, h_rank) = min_norm_eta(&h, &r);
    Ok(BackwardErrorReport {
        eta,
        lower: bound(rn, lower_sq),
        upper: bound(rn, upper_sq),
        h_rank,
    })
}

fn check_square(p: &MatrixPolynomial, s: &CMat) -> Result<()> {
    if s.nrows() != p.n() || s.ncols() != p.n() {
        return Err(Error::Dimension(format!(
            "solvent must be {0}x{0}, got {1}x{2}",
            p.n(),
            s.nrows(),
            s.ncols()
        )));
    }
    Ok(())
}

/// `κ(S) = ‖B̂_S^{-1} B̂_A‖_2 / ‖S‖_F`, with the pseudoinverse when `B̂_S` is
/// numerically singular.
pub fn solvent_condition_number(
    p: &MatrixPolynomial,
    s: &CMat,
    w: &WeightVector,
) -> Result<ConditionReport> {
    check_square(p, s)?;
    let n = p.n();
    let id = CMat::identity(n, n);
    let (ba, _) = weighted_coefficient_block(p, &id, s, w)?;
    let (_, bs) = pair_jacobian(p, &id, s)?;
    let lu = Factorized::new(&bs);
    let (prod, rank, warning) = match lu.solve(&ba) {
        Some(m) if lu.condition <= SINGULAR_CONDITION => (m, n * n, None),
        _ => {
            let (bp, rank) = linalg::pinv(&bs);
            (
                bp * &ba,
                rank,
                Some(format!(
                    "B_S is numerically singular (condition {:.3e}); used the pseudoinverse",
                    lu.condition
                )),
            )
        }
    };
    let sn = s.norm();
    let kappa = if sn > 0.0 {
        linalg::norm2(&prod) / sn
    } else {
        f64::INFINITY
    };
    Ok(ConditionReport {
        kappa,
        jacobian_rank: rank,
        expected_rank: n * n,
        warning,
    })
}

/// Backward error of an approximate solvent `T`; the bounds use
/// `‖T^i‖_F` and `σ_min(T^i)` for `i >= 1` and `α_0²` for the constant term.
pub fn solvent_backward_error(
    p: &MatrixPolynomial,
    t: &CMat,
    w: &WeightVector,
) -> Result<BackwardErrorReport> {
    check_square(p, t)?;
    let n = p.n();
    let (h, ts) = weighted_coefficient_block(p, &CMat::identity(n, n), t, w)?;
    let r = p.eval_solvent(t)?;
    let rn = r.norm();
    let a = &w.alphas;
    let mut lower_sq = a[0] * a[0];
    let mut upper_sq = a[0] * a[0];
    for i in 1..ts.len() {
        lower_sq += a[i] * a[i] * ts[i].norm_squared();
        let sm = linalg::sigma_min(&ts[i]);
        upper_sq += a[i] * a[i] * sm * sm;
    }
    let (eta, h_rank) = min_norm_eta(&h, &r);
    Ok(BackwardErrorReport {
        eta,
        lower: bound(rn, lower_sq),
        upper: bound(rn, upper_sq),
        h_rank,
    })
}
