//! Grouping of computed eigenvalues into multiple eigenvalues.
//!
//! A `k`-fold defective eigenvalue perturbed by a relative backward error
//! `delta` splits into `k` values on a circle of radius about
//! `delta^(1/k)`, while their centroid stays accurate to `O(delta)`.
//! Clusters are grown as balls around a seed: a seed and its `k - 1`
//! nearest neighbours form a cluster when all lie within `allowance(k)` of
//! their centroid, where
//! `allowance(k) = max(rel_tol, min(10 * delta^(1/k), 1e-2)) * max(1, |centroid|)`.
//! The largest admissible ball is taken first.
//! The reported value of a cluster is its centroid.

use serde::{Deserialize, Serialize};

use crate::linalg::{c, C64};

/// Upper bound on the multiplicity-dependent relative allowance.
pub const MAX_SPLIT_ALLOWANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterOptions {
    /// Relative distance under which eigenvalues are always grouped.
    pub rel_tol: f64,
    /// Relative backward error assumed for the computed eigenvalues.
    pub backward_error: f64,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            rel_tol: 1e-6,
            backward_error: 1e-12,
        }
    }
}

impl ClusterOptions {
    pub fn allowance(&self, k: usize, center: C64) -> f64 {
        let split = 10.0 * self.backward_error.powf(1.0 / k.max(1) as f64);
        let rel = if k > 1 {
            self.rel_tol.max(split.min(MAX_SPLIT_ALLOWANCE))
        } else {
            self.rel_tol
        };
        rel * center.norm().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    /// Centroid of the grouped eigenvalues.
    pub value: C64,
    pub multiplicity: usize,
    /// Largest distance from a raw member to the centroid.
    pub spread: f64,
    pub members: Vec<C64>,
}

fn centroid(members: &[C64]) -> C64 {
    let sum: C64 = members.iter().sum();
    sum / c(members.len() as f64, 0.0)
}

fn spread(members: &[C64], center: C64) -> f64 {
    members
        .iter()
        .map(|z| (z - center).norm())
        .fold(0.0, f64::max)
}

pub fn cluster_eigenvalues(raw: &[C64], opts: &ClusterOptions) -> Vec<EigenCluster> {
    let mut left: Vec<C64> = raw.to_vec();
    let mut groups: Vec<Vec<C64>> = Vec::new();
    while !left.is_empty() {
        // (size, spread, member indices) of the largest admissible ball
        let mut best: Option<(usize, f64, Vec<usize>)> = None;
        for (seed, &z) in left.iter().enumerate() {
            let mut order: Vec<usize> = (0..left.len()).filter(|&i| i != seed).collect();
            order.sort_by(|&a, &b| (left[a] - z).norm().total_cmp(&(left[b] - z).norm()));
            let mut members = vec![seed];
            for &next in &order {
                members.push(next);
                let pts: Vec<C64> = members.iter().map(|&i| left[i]).collect();
                let cm = centroid(&pts);
                let sp = spread(&pts, cm);
                if sp > opts.allowance(pts.len(), cm) {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((k, s, _)) => pts.len() > *k || (pts.len() == *k && sp < *s),
                };
                if better {
                    best = Some((pts.len(), sp, members.clone()));
                }
            }
        }
        match best {
            Some((_, _, mut idx)) => {
                idx.sort_unstable_by(|a, b| b.cmp(a));
                let mut g: Vec<C64> = idx.iter().map(|&i| left.remove(i)).collect();
                g.reverse();
                groups.push(g);
            }
            None => {
                groups.extend(left.drain(..).map(|z| vec![z]));
            }
        }
    }
    let mut out: Vec<EigenCluster> = groups
        .into_iter()
        .map(|members| {
            let value = centroid(&members);
            EigenCluster {
                value,
                multiplicity: members.len(),
                spread: spread(&members, value),
                members,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    out
}

/// Each cluster value repeated by its multiplicity, in cluster order.
pub fn expand(clusters: &[EigenCluster]) -> Vec<C64> {
    clusters
        .iter()
        .flat_map(|cl| std::iter::repeat_n(cl.value, cl.multiplicity))
        .collect()
}
