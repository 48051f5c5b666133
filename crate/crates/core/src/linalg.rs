//! Dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Builds a complex matrix from real entries given in row-major order.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMat {
    assert_eq!(entries.len(), rows * cols, "entry count");
    CMat::from_fn(rows, cols, |i, j| c(entries[i * cols + j], 0.0))
}

pub fn real_vector(entries: &[f64]) -> CVec {
    CVec::from_iterator(entries.len(), entries.iter().map(|&x| c(x, 0.0)))
}

pub fn frob(m: &CMat) -> f64 {
    m.norm()
}

pub fn norm1(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            let mut blk = out.view_mut((i * br, j * bc), (br, bc));
            blk.zip_apply(b, |o, x| *o = aij * x);
        }
    }
    out
}

/// Column-stacking `vec` operator.
pub fn vec_of(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn unvec(v: &[C64], rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v)
}

/// Repo-wide rank tolerance `max(rows, cols) * eps * sigma_max`.
pub fn rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Singular values in descending order; all NaN when `m` has a non-finite
/// entry.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Vec::new();
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return vec![f64::NAN; k];
    }
    let scale = max_abs(m);
    if scale == 0.0 {
        return vec![0.0; k];
    }
    // scaling to unit max entry keeps the SVD clear of overflow; real
    // scaling, since complex division would square `scale`
    let mut sv: Vec<f64> = m
        .map(|z| z.unscale(scale))
        .svd(false, false)
        .singular_values
        .iter()
        .map(|s| s * scale)
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn numerical_rank(m: &CMat) -> usize {
    let sv = singular_values(m);
    let Some(&smax) = sv.first() else { return 0 };
    let tol = rank_tolerance(m.nrows(), m.ncols(), smax);
    sv.iter().filter(|&&s| s > tol).count()
}

/// Smallest singular value of the Gram matrix view, i.e. `sigma_k(M)` for an
/// `n x k` matrix; zero when `k > n`.
pub fn sigma_min(m: &CMat) -> f64 {
    if m.ncols() > m.nrows() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn norm2(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Moore-Penrose pseudoinverse with the repo-wide rank tolerance.
/// Returns the pseudoinverse and the numerical rank.
pub fn pinv(m: &CMat) -> (CMat, usize) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (CMat::zeros(cols, rows), 0);
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = rank_tolerance(rows, cols, smax);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut out = CMat::zeros(cols, rows);
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > tol && s > 0.0 {
            rank += 1;
            let ui = u.column(i);
            let vi = vt.row(i);
            // v_i * u_i^H / s
            for r in 0..cols {
                let vr = vi[r].conj() / s;
                for q in 0..rows {
                    out[(r, q)] += vr * ui[q].conj();
                }
            }
        }
    }
    (out, rank)
}

/// LU factorization with a 1-norm condition number.
pub struct Factorized {
    lu: nalgebra::linalg::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    pub condition: f64,
}

impl Factorized {
    pub fn new(m: &CMat) -> Self {
        assert!(m.is_square(), "LU of a non-square matrix");
        let lu = m.clone().lu();
        let condition = match lu.try_inverse() {
            Some(inv) => {
                let k = norm1(m) * norm1(&inv);
                if k.is_finite() {
                    k
                } else {
                    f64::INFINITY
                }
            }
            None => f64::INFINITY,
        };
        Factorized { lu, condition }
    }

    pub fn solve(&self, rhs: &CMat) -> Option<CMat> {
        self.lu.solve(rhs)
    }

    pub fn solve_vec(&self, rhs: &CVec) -> Option<CVec> {
        self.lu.solve(rhs)
    }
}

/// Solves `a x = b`, rejecting matrices whose condition exceeds `max_cond`.
pub fn solve_checked(a: &CMat, b: &CMat, what: &'static str, max_cond: f64) -> Result<CMat> {
    let f = Factorized::new(a);
    if !(f.condition <= max_cond) {
        return Err(Error::Singular {
            what,
            condition: f.condition,
        });
    }
    f.solve(b).ok_or(Error::Singular {
        what,
        condition: f.condition,
    })
}

/// `[I, S, S^2, ..., S^upto]`.
pub fn powers(s: &CMat, upto: usize) -> Vec<CMat> {
    let k = s.nrows();
    let mut out = Vec::with_capacity(upto + 1);
    out.push(CMat::identity(k, k));
    for j in 1..=upto {
        let next = &out[j - 1] * s;
        out.push(next);
    }
    out
}

fn schur(m: &CMat) -> Result<(CMat, CMat)> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let s = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or(Error::NoConvergence("Schur decomposition"))?;
    Ok(s.unpack())
}

/// Eigenvalues of a square complex matrix (Schur form diagonal).
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = schur(m)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Eigenvalues and unit-norm right eigenvectors (as columns).
///
/// Eigenvectors come from back substitution on the Schur factor; for
/// defective eigenvalues the returned vectors are nearly parallel.
pub fn eig(m: &CMat) -> Result<(Vec<C64>, CMat)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let (q, t) = schur(m)?;
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let smin = (f64::EPSILON * frob(&t)).max(f64::MIN_POSITIVE);
    let mut vectors = CMat::zeros(n, n);
    for i in 0..n {
        let mut y = CVec::zeros(n);
        y[i] = ONE;
        for j in (0..i).rev() {
            let mut acc = ZERO;
            for l in (j + 1)..=i {
                acc += t[(j, l)] * y[l];
            }
            let mut d = t[(j, j)] - t[(i, i)];
            if d.norm() < smin {
                d = c(smin, 0.0);
            }
            y[j] = -acc / d;
        }
        let mut x = &q * y;
        let nx = x.norm();
        if nx > 0.0 {
            x /= c(nx, 0.0);
        }
        vectors.set_column(i, &x);
    }
    Ok((values, vectors))
}

/// Roots of `coeffs[0] + coeffs[1] z + ...` (trailing zero coefficients
/// are dropped).
pub fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let scale = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1].norm() <= f64::EPSILON * scale {
        deg -= 1;
    }
    if deg <= 1 {
        return Ok(Vec::new());
    }
    let d = deg - 1;
    let lead = coeffs[d];
    let mut comp = CMat::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = ONE;
    }
    for i in 0..d {
        comp[(i, d - 1)] = -coeffs[i] / lead;
    }
    eigenvalues(&comp)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
