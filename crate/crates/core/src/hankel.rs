//! Hankel pencils built from (block) moments, their companion matrices and
//! eigenvalues, and invariant pairs read off from moment vectors.

use crate::contour::{
    block_moments, count_eigenvalues_inside, scalar_moments, BlockMomentSequence, Contour,
    MomentSequence,
};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, C64, ONE};
use crate::matpoly::{InvariantPair, MatrixPolynomial};
use crate::spectrum::{cluster_eigenvalues, ClusterOptions, EigenCluster};

#[derive(Debug, Clone, PartialEq)]
pub struct HankelPencil {
    pub h0: CMat,
    pub h1: CMat,
    /// Pencil size (rows of `h0`).
    pub m: usize,
    /// 1 for scalar moments.
    pub block_size: usize,
}

impl HankelPencil {
    /// Leading `m x m` part of both matrices.
    pub fn truncate(&self, m: usize) -> Result<HankelPencil> {
        if m == 0 || m > self.m {
            return Err(Error::InvalidInput(format!(
                "cannot truncate a pencil of size {} to {m}",
                self.m
            )));
        }
        Ok(HankelPencil {
            h0: self.h0.view((0, 0), (m, m)).into_owned(),
            h1: self.h1.view((0, 0), (m, m)).into_owned(),
            m,
            block_size: self.block_size,
        })
    }
}

/// `H0(i,j) = μ_{i+j}`, `H1(i,j) = μ_{i+j+1}`.
pub fn hankel_from_moments(mu: &[C64], m: usize) -> Result<HankelPencil> {
    if m == 0 {
        return Err(Error::InvalidInput("pencil size must be positive".into()));
    }
    if mu.len() < 2 * m {
        return Err(Error::InsufficientMoments {
            needed: 2 * m,
            available: mu.len(),
        });
    }
    Ok(HankelPencil {
        h0: CMat::from_fn(m, m, |i, j| mu[i + j]),
        h1: CMat::from_fn(m, m, |i, j| mu[i + j + 1]),
        m,
        block_size: 1,
    })
}

pub fn build_hankel(moms: &MomentSequence, m: usize) -> Result<HankelPencil> {
    hankel_from_moments(&moms.mu, m)
}

/// Block Hankel pencil with `mtilde x mtilde` blocks of the `ξ x ξ` moments.
pub fn block_hankel_from_moments(ms: &[CMat], mtilde: usize) -> Result<HankelPencil> {
    if mtilde == 0 {
        return Err(Error::InvalidInput("block count must be positive".into()));
    }
    if ms.len() < 2 * mtilde {
        return Err(Error::InsufficientMoments {
            needed: 2 * mtilde,
            available: ms.len(),
        });
    }
    let xi = ms[0].nrows();
    let size = mtilde * xi;
    let mut h0 = CMat::zeros(size, size);
    let mut h1 = CMat::zeros(size, size);
    for bi in 0..mtilde {
        for bj in 0..mtilde {
            h0.view_mut((bi * xi, bj * xi), (xi, xi))
                .copy_from(&ms[bi + bj]);
            h1.view_mut((bi * xi, bj * xi), (xi, xi))
                .copy_from(&ms[bi + bj + 1]);
        }
    }
    Ok(HankelPencil {
        h0,
        h1,
        m: size,
        block_size: xi,
    })
}

pub fn build_block_hankel(moms: &BlockMomentSequence, mtilde: usize) -> Result<HankelPencil> {
    block_hankel_from_moments(&moms.m, mtilde)
}

pub fn numerical_rank(h: &CMat) -> usize {
    linalg::numerical_rank(h)
}

/// Companion matrix `C` with `H0 C = H1`: the first `m - ξ` columns are unit
/// vectors `e_{j+ξ}`, the last `ξ` columns solve `H0 X = H1[:, m-ξ..m]`.
pub fn companion_from_pencil(hp: &HankelPencil) -> Result<CMat> {
    let m = hp.m;
    let xi = hp.block_size.min(m);
    let rank = linalg::numerical_rank(&hp.h0);
    if rank < m {
        return Err(Error::SingularHankel { requested: m, rank });
    }
    let rhs = hp.h1.view((0, m - xi), (m, xi)).into_owned();
    let lu = linalg::Factorized::new(&hp.h0);
    let x = lu
        .solve(&rhs)
        .ok_or(Error::SingularHankel { requested: m, rank })?;
    let mut cm = CMat::zeros(m, m);
    for j in 0..(m - xi) {
        cm[(j + xi, j)] = ONE;
    }
    cm.view_mut((0, m - xi), (m, xi)).copy_from(&x);
    Ok(cm)
}

/// Ascending coefficients `c_0..c_{m-1}` of the monic characteristic
/// polynomial `λ^m + c_{m-1} λ^{m-1} + ... + c_0` of a scalar companion
/// matrix (the negated last column).
pub fn companion_polynomial(companion: &CMat) -> Vec<C64> {
    let m = companion.ncols();
    (0..m).map(|i| -companion[(i, m - 1)]).collect()
}

pub fn pencil_eigenvalues(hp: &HankelPencil, opts: &ClusterOptions) -> Result<Vec<EigenCluster>> {
    let cm = companion_from_pencil(hp)?;
    let raw = linalg::eigenvalues(&cm)?;
    Ok(cluster_eigenvalues(&raw, opts))
}

/// Largest `m <= max_m` for which the leading Hankel matrices of sizes
/// `1..=m` all have full numerical rank.
pub fn rank_probe(mu: &[C64], max_m: usize) -> usize {
    let mut best = 0;
    for m in 1..=max_m.min(mu.len() / 2) {
        let h0 = CMat::from_fn(m, m, |i, j| mu[i + j]);
        if linalg::numerical_rank(&h0) < m {
            break;
        }
        best = m;
    }
    best
}

/// Block analogue of [`rank_probe`] over leading truncations of the block
/// Hankel matrix.
pub fn block_rank_probe(ms: &[CMat], max_m: usize) -> Result<usize> {
    let xi = ms.first().map(|m| m.nrows()).unwrap_or(1);
    let mtilde = ms.len() / 2;
    if mtilde == 0 {
        return Ok(0);
    }
    let full = block_hankel_from_moments(ms, mtilde)?;
    let mut best = 0;
    for m in 1..=max_m.min(mtilde * xi) {
        if linalg::numerical_rank(&full.h0.view((0, 0), (m, m)).into_owned()) < m {
            break;
        }
        best = m;
    }
    Ok(best)
}

/// Pair size used when the caller gives none: the eigenvalue count inside
/// the contour, reduced to the rank where the scalar Hankel matrices stop
/// growing.
pub fn auto_pair_size(
    p: &MatrixPolynomial,
    contour: &Contour,
    u: &CVec,
    v: &CVec,
) -> Result<usize> {
    let count = count_eigenvalues_inside(p, contour)?.count;
    if count == 0 {
        return Err(Error::InvalidInput(
            "no eigenvalues inside the contour".into(),
        ));
    }
    let moms = scalar_moments(p, contour, u, v, 2 * count)?;
    Ok(rank_probe(&moms.mu, count).max(1))
}

pub fn auto_block_pair_size(
    p: &MatrixPolynomial,
    contour: &Contour,
    u: &CMat,
    v: &CMat,
) -> Result<usize> {
    let count = count_eigenvalues_inside(p, contour)?.count;
    if count == 0 {
        return Err(Error::InvalidInput(
            "no eigenvalues inside the contour".into(),
        ));
    }
    let xi = u.ncols().max(1);
    let mtilde = count.div_ceil(xi);
    let moms = block_moments(p, contour, u, v, 2 * mtilde)?;
    Ok(block_rank_probe(&moms.m, count)?.max(1))
}

/// Pair `(X, S)` with `X = [s_0 ... s_{m-1}]` and `S` the companion matrix
/// of the `m x m` scalar Hankel pencil.
pub fn extract_invariant_pair(
    p: &MatrixPolynomial,
    contour: &Contour,
    u: &CVec,
    v: &CVec,
    m: usize,
) -> Result<InvariantPair> {
    let moms = scalar_moments(p, contour, u, v, 2 * m)?;
    let hp = build_hankel(&moms, m)?;
    let s = companion_from_pencil(&hp)?;
    let mut x = CMat::zeros(p.n(), m);
    for (j, sj) in moms.svecs.iter().take(m).enumerate() {
        x.set_column(j, sj);
    }
    InvariantPair::new(x, s)
}

/// Block version: `mtilde = ceil(m/ξ)` block moments per side, pencil and
/// `Y = [S_0 ... S_{mtilde-1}]` truncated to `m` columns.
pub fn extract_block_invariant_pair(
    p: &MatrixPolynomial,
    contour: &Contour,
    u: &CMat,
    v: &CMat,
    m: usize,
) -> Result<InvariantPair> {
    if m == 0 {
        return Err(Error::InvalidInput("pair size must be positive".into()));
    }
    let xi = u.ncols().max(1);
    let mtilde = m.div_ceil(xi);
    let moms = block_moments(p, contour, u, v, 2 * mtilde)?;
    let hp = build_block_hankel(&moms, mtilde)?.truncate(m)?;
    let t = companion_from_pencil(&hp)?;
    let mut y = CMat::zeros(p.n(), mtilde * xi);
    for (j, sj) in moms.sblocks.iter().take(mtilde).enumerate() {
        y.view_mut((0, j * xi), (p.n(), xi)).copy_from(sj);
    }
    InvariantPair::new(y.columns(0, m).into_owned(), t)
}
