//! Trapezoid-rule quadrature on circles: moments of `z^k u^H P(z)^{-1} v`,
//! block moments, moment vectors and eigenvalue counts.
//!
//! With `φ(t) = γ + ρ e^{it}` and `t_j = 2πj/N`, the normalized integral
//! `(1/2πi) ∮ f(z) dz` becomes `Σ_j w_j f(z_j)` with `z_j = φ(t_j)` and
//! `w_j = φ'(t_j) / (iN) = (z_j - γ) / N`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{self, c, CMat, CVec, Factorized, C64, ZERO};
use crate::matpoly::MatrixPolynomial;

pub const DEFAULT_NODES: usize = 64;

/// Condition estimate of `P(z_j)` above which a node is considered to sit
/// on an eigenvalue.
pub const NEAR_CONTOUR_CONDITION: f64 = 1e13;

/// Count quality above which a warning is attached.
pub const COUNT_WARNING_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    center: C64,
    radius: f64,
    nodes: usize,
    #[serde(default)]
    execution: Execution,
}

impl Contour {
    pub fn new(center: C64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!(
                "contour radius must be positive, got {radius}"
            )));
        }
        if !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::InvalidInput("contour center is not finite".into()));
        }
        if nodes < 4 {
            return Err(Error::InvalidInput(format!(
                "need at least 4 quadrature nodes, got {nodes}"
            )));
        }
        Ok(Contour {
            center,
            radius,
            nodes,
            execution: Execution::default(),
        })
    }

    pub fn circle(center: C64, radius: f64) -> Result<Self> {
        Self::new(center, radius, DEFAULT_NODES)
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_nodes(self, nodes: usize) -> Result<Self> {
        Ok(Self::new(self.center, self.radius, nodes)?.with_execution(self.execution))
    }

    pub fn center(&self) -> C64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    /// Node `z_j = φ(t_j)` and quadrature weight `w_j = φ'(t_j)/(iN)`.
    pub fn node(&self, j: usize) -> (C64, C64) {
        let t = 2.0 * std::f64::consts::PI * j as f64 / self.nodes as f64;
        let e = c(t.cos(), t.sin()) * self.radius;
        (self.center + e, e / self.nodes as f64)
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - self.center).norm() < self.radius
    }

    /// `Σ_j w_j f(z_j)` with `f` evaluated per node (possibly in parallel)
    /// and summed in node order.
    pub fn integrate<F>(&self, f: F) -> Result<C64>
    where
        F: Fn(C64) -> Result<C64> + Sync + Send,
    {
        let vals = self.execution.map_range(self.nodes, |j| {
            let (z, w) = self.node(j);
            f(z).map(|v| v * w)
        });
        let mut acc = ZERO;
        for v in vals {
            acc += v?;
        }
        Ok(acc)
    }
}

fn near_contour(node: usize, z: C64, condition: f64) -> Error {
    Error::EigenvalueNearContour {
        node,
        z: format!("{z}"),
        condition,
    }
}

/// Factorizes `P(z_j)` at every node, failing on the first (lowest index)
/// node whose condition estimate is too large.
fn factorize_nodes(p: &MatrixPolynomial, contour: &Contour) -> Result<Vec<(C64, C64, Factorized)>> {
    contour
        .execution
        .map_range(contour.nodes, |j| {
            let (z, w) = contour.node(j);
            let f = Factorized::new(&p.eval(z));
            if !(f.condition <= NEAR_CONTOUR_CONDITION) {
                Err(near_contour(j, z, f.condition))
            } else {
                Ok((z, w, f))
            }
        })
        .into_iter()
        .collect()
}

/// `S_k = Σ_j w_j z_j^k P(z_j)^{-1} V` for `k < count`.
fn resolvent_moments(
    p: &MatrixPolynomial,
    contour: &Contour,
    v: &CMat,
    count: usize,
) -> Result<Vec<CMat>> {
    let per_node: Vec<Result<Vec<CMat>>> = contour.execution.map_range(contour.nodes, |j| {
        let (z, w) = contour.node(j);
        let f = Factorized::new(&p.eval(z));
        if !(f.condition <= NEAR_CONTOUR_CONDITION) {
            return Err(near_contour(j, z, f.condition));
        }
        let y = f.solve(v).ok_or_else(|| near_contour(j, z, f.condition))?;
        let mut out = Vec::with_capacity(count);
        let mut zk = w;
        for _ in 0..count {
            out.push(&y * zk);
            zk *= z;
        }
        Ok(out)
    });
    let mut acc = vec![CMat::zeros(v.nrows(), v.ncols()); count];
    for node in per_node {
        for (a, t) in acc.iter_mut().zip(node?) {
            *a += t;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    pub u: CVec,
    pub v: CVec,
    pub mu: Vec<C64>,
    /// `s_k = (1/2πi) ∮ z^k P(z)^{-1} v dz`; `μ_k = u^H s_k`.
    pub svecs: Vec<CVec>,
    pub contour: Contour,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockMomentSequence {
    pub u: CMat,
    pub v: CMat,
    pub m: Vec<CMat>,
    pub sblocks: Vec<CMat>,
    pub contour: Contour,
}

impl BlockMomentSequence {
    pub fn block_size(&self) -> usize {
        self.u.ncols()
    }
}

fn check_probe_vector(p: &MatrixPolynomial, w: &CVec, name: &str) -> Result<()> {
    if w.len() != p.n() {
        return Err(Error::Dimension(format!(
            "probe {name} has length {}, expected {}",
            w.len(),
            p.n()
        )));
    }
    if w.iter().all(|&z| z == ZERO) {
        return Err(Error::InvalidInput(format!(
            "probe {name} is the zero vector"
        )));
    }
    Ok(())
}

pub fn scalar_moments(
    p: &MatrixPolynomial,
    contour: &Contour,
    u: &CVec,
    v: &CVec,
    count: usize,
) -> Result<MomentSequence> {
    check_probe_vector(p, u, "u")?;
    check_probe_vector(p, v, "v")?;
    let vm = CMat::from_column_slice(v.len(), 1, v.as_slice());
    let s = resolvent_moments(p, contour, &vm, count)?;
    let svecs: Vec<CVec> = s.into_iter().map(|m| m.column(0).into_owned()).collect();
    let mu = svecs.iter().map(|sk| u.dotc(sk)).collect();
    Ok(MomentSequence {
        u: u.clone(),
        v: v.clone(),
        mu,
        svecs,
        contour: *contour,
    })
}

fn check_probe_block(p: &MatrixPolynomial, w: &CMat, which: &'static str) -> Result<()> {
    if w.nrows() != p.n() {
        return Err(Error::Dimension(format!(
            "probe block {which} has {} rows, expected {}",
            w.nrows(),
            p.n()
        )));
    }
    let xi = w.ncols();
    if xi == 0 || xi > p.n() {
        return Err(Error::InvalidInput(format!(
            "block size must be between 1 and n = {}, got {xi}",
            p.n()
        )));
    }
    let rank = linalg::numerical_rank(w);
    if rank < xi {
        return Err(Error::RankDeficientProbes {
            which,
            rank,
            expected: xi,
        });
    }
    Ok(())
}

pub fn block_moments(
    p: &MatrixPolynomial,
    contour: &Contour,
    u: &CMat,
    v: &CMat,
    count: usize,
) -> Result<BlockMomentSequence> {
    check_probe_block(p, u, "U")?;
    check_probe_block(p, v, "V")?;
    if u.ncols() != v.ncols() {
        return Err(Error::Dimension(format!(
            "U has {} columns, V has {}",
            u.ncols(),
            v.ncols()
        )));
    }
    let sblocks = resolvent_moments(p, contour, v, count)?;
    let uh = u.adjoint();
    let m = sblocks.iter().map(|sk| &uh * sk).collect();
    Ok(BlockMomentSequence {
        u: u.clone(),
        v: v.clone(),
        m,
        sblocks,
        contour: *contour,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCount {
    pub count: usize,
    /// Unrounded quadrature value.
    pub raw: C64,
    /// Distance of `raw` from the reported integer.
    pub quality: f64,
    pub warning: Option<String>,
}

/// Number of eigenvalues inside the contour from
/// `(1/2πi) ∮ trace(P(z)^{-1} P'(z)) dz`.
pub fn count_eigenvalues_inside(p: &MatrixPolynomial, contour: &Contour) -> Result<EigenCount> {
    let factors = factorize_nodes(p, contour)?;
    let terms: Vec<Result<C64>> = contour.execution.map_slice(&factors, |(z, w, f)| {
        let y = f.solve(&p.eval_derivative(*z)).ok_or(Error::Singular {
            what: "P(z) at a quadrature node",
            condition: f.condition,
        })?;
        Ok(y.trace() * w)
    });
    let mut raw = ZERO;
    for t in terms {
        raw += t?;
    }
    let rounded = raw.re.round().max(0.0);
    let quality = (raw - c(rounded, 0.0)).norm();
    let warning = (quality > COUNT_WARNING_THRESHOLD)
        .then(|| format!("count quality {quality:.3e}: increase N or move contour"));
    Ok(EigenCount {
        count: rounded as usize,
        raw,
        quality,
        warning,
    })
}

/// Partial-fraction data of one pole: `Σ_i coeffs[i-1] / (z - lambda)^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pole {
    pub lambda: C64,
    pub coeffs: Vec<C64>,
}

fn binomial(k: usize, r: usize) -> f64 {
    if r > k {
        return 0.0;
    }
    let r = r.min(k - r);
    (0..r).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

/// `μ_k` from residues: `Σ_j Σ_i c_{j,i} C(k, i-1) λ_j^{k-i+1}`.
pub fn residue_moment_oracle(poles: &[Pole], k: usize) -> C64 {
    let mut acc = ZERO;
    for pole in poles {
        for (idx, &cji) in pole.coeffs.iter().enumerate() {
            let i = idx + 1;
            if k + 1 < i {
                continue;
            }
            acc += cji * binomial(k, i - 1) * pole.lambda.powu((k + 1 - i) as u32);
        }
    }
    acc
}

/// `xi` seeded probe columns, each uniform on the complex unit sphere.
pub fn random_probes(n: usize, xi: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = CMat::from_fn(n, xi, |_, _| {
        c(
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        )
    });
    for mut col in m.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= c(nrm, 0.0);
        }
    }
    m
}

pub fn random_probe_vector(n: usize, seed: u64) -> CVec {
    random_probes(n, 1, seed).column(0).into_owned()
}
