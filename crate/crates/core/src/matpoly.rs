//! Matrix polynomials `P(λ) = A_0 + A_1 λ + ... + A_ℓ λ^ℓ` and invariant
//! pairs `(X, S)` with `P(X, S) = Σ A_j X S^j`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, Factorized, C64, ONE, ZERO};

/// Seed of the sample point used by the regularity check.
pub const REGULARITY_SEED: u64 = 0x1a2b_3c4d;

/// Condition number above which a matrix is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e13;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    coeffs: Vec<CMat>,
}

impl MatrixPolynomial {
    /// Validates shapes, a nonzero leading coefficient and (probabilistically)
    /// regularity.
    pub fn new(coeffs: Vec<CMat>) -> Result<Self> {
        let p = Self::from_coeffs(coeffs)?;
        p.check_regular(REGULARITY_SEED)?;
        Ok(p)
    }

    /// Shape validation only; skips the regularity sample.
    pub fn from_coeffs(coeffs: Vec<CMat>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least two coefficients (degree >= 1), got {}",
                coeffs.len()
            )));
        }
        let n = coeffs[0].nrows();
        if n == 0 {
            return Err(Error::InvalidInput("empty coefficient matrices".into()));
        }
        for (i, a) in coeffs.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::Dimension(format!(
                    "A_{i} is {}x{}, expected {n}x{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput(format!("A_{i} has non-finite entries")));
            }
        }
        if coeffs.last().is_some_and(|a| a.iter().all(|&z| z == ZERO)) {
            return Err(Error::InvalidInput(
                "leading coefficient A_l is zero".into(),
            ));
        }
        Ok(MatrixPolynomial { coeffs })
    }

    /// Convenience constructor from real row-major coefficient entries.
    pub fn from_real(n: usize, coeffs: &[&[f64]]) -> Result<Self> {
        Self::new(
            coeffs
                .iter()
                .map(|a| linalg::real_matrix(n, n, a))
                .collect(),
        )
    }

    /// Fails when `det P(λ_r)` vanishes numerically at a seeded random point.
    pub fn check_regular(&self, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let pz = self.eval(z);
        if pz.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "P overflows at the sample point {z}; rescale the coefficients"
            )));
        }
        if linalg::numerical_rank(&pz) < self.n() {
            return Err(Error::NotRegular {
                sample: format!("{z}"),
            });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &CMat {
        &self.coeffs[j]
    }

    pub fn leading(&self) -> &CMat {
        &self.coeffs[self.degree()]
    }

    /// `P(λ)` by Horner's rule.
    pub fn eval(&self, lambda: C64) -> CMat {
        let mut acc = self.leading().clone();
        for a in self.coeffs.iter().rev().skip(1) {
            acc *= lambda;
            acc += a;
        }
        acc
    }

    /// `P'(λ) = Σ_{j>=1} j A_j λ^{j-1}`.
    pub fn eval_derivative(&self, lambda: C64) -> CMat {
        let l = self.degree();
        let mut acc = self.leading() * c(l as f64, 0.0);
        for j in (1..l).rev() {
            acc *= lambda;
            acc += &self.coeffs[j] * c(j as f64, 0.0);
        }
        acc
    }

    /// Residual `P(X, S) = Σ A_j X S^j`.
    pub fn eval_pair(&self, pair: &InvariantPair) -> Result<CMat> {
        self.residual(pair.x(), pair.s())
    }

    /// `P(X, S)` on raw matrices, checking dimensions.
    pub fn residual(&self, x: &CMat, s: &CMat) -> Result<CMat> {
        if x.nrows() != self.n() {
            return Err(Error::Dimension(format!(
                "X has {} rows, polynomial has n = {}",
                x.nrows(),
                self.n()
            )));
        }
        if !s.is_square() || s.nrows() != x.ncols() {
            return Err(Error::Dimension(format!(
                "X is {}x{} but S is {}x{}",
                x.nrows(),
                x.ncols(),
                s.nrows(),
                s.ncols()
            )));
        }
        let pw = linalg::powers(s, self.degree());
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for (a, sj) in self.coeffs.iter().zip(&pw) {
            out += a * (x * sj);
        }
        Ok(out)
    }

    /// `P(S) = Σ A_j S^j` for a square `S`.
    pub fn eval_solvent(&self, s: &CMat) -> Result<CMat> {
        let n = self.n();
        if s.nrows() != n || s.ncols() != n {
            return Err(Error::Dimension(format!(
                "solvent must be {n}x{n}, got {}x{}",
                s.nrows(),
                s.ncols()
            )));
        }
        self.residual(&CMat::identity(n, n), s)
    }

    /// Polynomial with coefficients `A_ℓ^{-1} A_i`.
    pub fn monic(&self) -> Result<MatrixPolynomial> {
        let lu = Factorized::new(self.leading());
        if !(lu.condition <= SINGULAR_CONDITION) {
            return Err(Error::SingularLeadingCoefficient {
                rcond: 1.0 / lu.condition,
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| {
                lu.solve(a).ok_or(Error::SingularLeadingCoefficient {
                    rcond: 1.0 / lu.condition,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixPolynomial { coeffs })
    }

    /// Block companion matrix of the monic-normalized polynomial: identity
    /// blocks on the superdiagonal, `-A_0 .. -A_{ℓ-1}` on the last block row.
    pub fn companion_linearization(&self) -> Result<CMat> {
        let monic = self.monic()?;
        let n = self.n();
        let l = self.degree();
        let mut a = CMat::zeros(l * n, l * n);
        for i in 0..l.saturating_sub(1) {
            a.view_mut((i * n, (i + 1) * n), (n, n))
                .copy_from(&CMat::identity(n, n));
        }
        for j in 0..l {
            a.view_mut(((l - 1) * n, j * n), (n, n))
                .copy_from(&(-monic.coeff(j)));
        }
        Ok(a)
    }

    /// Finite eigenpairs `(λ, v)` from the companion linearization; `v` is
    /// the leading block of the companion eigenvector, normalized.
    pub fn eigenpairs(&self) -> Result<Vec<(C64, CVec)>> {
        let a = self.companion_linearization()?;
        let (vals, vecs) = linalg::eig(&a)?;
        let n = self.n();
        Ok(vals
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                let mut v: CVec = vecs.view((0, i), (n, 1)).column(0).into_owned();
                let nv = v.norm();
                if nv > 0.0 {
                    v /= c(nv, 0.0);
                }
                (l, v)
            })
            .collect())
    }

    pub fn is_upper_triangular(&self) -> Option<(usize, usize, usize)> {
        for (k, a) in self.coeffs.iter().enumerate() {
            for j in 0..a.ncols() {
                for i in (j + 1)..a.nrows() {
                    if a[(i, j)] != ZERO {
                        return Some((k, i, j));
                    }
                }
            }
        }
        None
    }

    /// Scalar polynomial on the diagonal entry `i` (ascending coefficients).
    pub fn diagonal_poly(&self, i: usize) -> Vec<C64> {
        self.coeffs.iter().map(|a| a[(i, i)]).collect()
    }

    /// Frobenius norms `‖A_i‖_F`.
    pub fn coeff_norms(&self) -> Vec<f64> {
        self.coeffs.iter().map(linalg::frob).collect()
    }
}

/// A pair `(X, S)` with `X` of size `n x k` and `S` of size `k x k`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantPair {
    x: CMat,
    s: CMat,
}

impl InvariantPair {
    pub fn new(x: CMat, s: CMat) -> Result<Self> {
        if !s.is_square() || s.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "S must be square and nonempty, got {}x{}",
                s.nrows(),
                s.ncols()
            )));
        }
        if x.ncols() != s.nrows() {
            return Err(Error::Dimension(format!(
                "X has {} columns but S is {}x{}",
                x.ncols(),
                s.nrows(),
                s.ncols()
            )));
        }
        if x.iter().all(|&z| z == ZERO) {
            return Err(Error::InvalidInput("X is the zero matrix".into()));
        }
        Ok(InvariantPair { x, s })
    }

    pub fn x(&self) -> &CMat {
        &self.x
    }

    pub fn s(&self) -> &CMat {
        &self.s
    }

    pub fn k(&self) -> usize {
        self.s.nrows()
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn into_parts(self) -> (CMat, CMat) {
        (self.x, self.s)
    }

    /// Checks `1 <= k <= ℓ n` against a polynomial.
    pub fn check_against(&self, p: &MatrixPolynomial) -> Result<()> {
        if self.n() != p.n() {
            return Err(Error::Dimension(format!(
                "X has {} rows, polynomial has n = {}",
                self.n(),
                p.n()
            )));
        }
        if self.k() > p.degree() * p.n() {
            return Err(Error::Dimension(format!(
                "pair size k = {} exceeds l*n = {}",
                self.k(),
                p.degree() * p.n()
            )));
        }
        Ok(())
    }

    /// Pair `(X W, W^{-1} S W)` for an invertible `W`.
    pub fn transformed(&self, w: &CMat) -> Result<Self> {
        let s_w = &self.s * w;
        let w_inv_s_w = linalg::solve_checked(w, &s_w, "W", SINGULAR_CONDITION)?;
        Self::new(&self.x * w, w_inv_s_w)
    }

    /// Smallest `m <= m_max` with `V_m(X, S) = [X S^{m-1}; ...; X S; X]` of
    /// full column rank, or `None`.
    pub fn minimality_index(&self, m_max: usize) -> Option<usize> {
        let k = self.k();
        let n = self.n();
        let mut block = self.x.clone();
        let mut stacked = CMat::zeros(0, k);
        for m in 1..=m_max {
            // row order does not change the rank
            stacked = stacked.insert_rows(0, n, ZERO);
            stacked.view_mut((0, 0), (n, k)).copy_from(&block);
            if linalg::numerical_rank(&stacked) == k {
                return Some(m);
            }
            block = &block * &self.s;
        }
        None
    }
}

/// Companion matrix with ones on the subdiagonal and last column `x`.
pub fn scalar_companion(last_column: &[C64]) -> CMat {
    let m = last_column.len();
    let mut cm = CMat::zeros(m, m);
    for i in 1..m {
        cm[(i, i - 1)] = ONE;
    }
    for (i, &v) in last_column.iter().enumerate() {
        cm[(i, m - 1)] = v;
    }
    cm
}
