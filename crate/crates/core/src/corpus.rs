//! Bundled problems: the small worked examples, and a corpus of seeded
//! perturbations of known invariant pairs for comparing plain Newton with
//! Newton plus exact line search.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::contour::Contour;
use crate::error::Result;
use crate::exec::Execution;
use crate::hankel::{extract_block_invariant_pair, extract_invariant_pair};
use crate::linalg::{c, real_matrix, real_vector, CMat};
use crate::matpoly::{InvariantPair, MatrixPolynomial};
use crate::refine::{refine_pair, RefineOptions};

/// Diagonal 4x4 quadratic with eigenvalues 1/2 (x2), 1 (x2), 2, 3 (x3).
pub fn diagonal_quadratic_4() -> MatrixPolynomial {
    MatrixPolynomial::from_real(
        4,
        &[
            &[
                1.0, 0.0, 0.0, 1.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.0, 9.0, 0.0, 0.0, 0.0, 0.0, 6.0,
            ],
            &[
                -2.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, -6.0, 0.0, 0.0, 0.0, 0.0, -5.0,
            ],
            &[
                1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
            ],
        ],
    )
    .expect("valid fixture")
}

/// 2x2 quadratic with eigenvalues 0 and 1 (x3).
pub fn small_quadratic_2() -> MatrixPolynomial {
    MatrixPolynomial::from_real(
        2,
        &[
            &[1.0, 0.0, 0.0, 0.0],
            &[-2.0, 0.0, 2.0, -1.0],
            &[1.0, 0.0, 0.0, 1.0],
        ],
    )
    .expect("valid fixture")
}

/// 3x3 quadratic with eigenvalue 1 in two Jordan chains (lengths 2 and 3)
/// and eigenvalue -1.
pub fn jordan_quadratic_3() -> MatrixPolynomial {
    MatrixPolynomial::from_real(
        3,
        &[
            &[-2.0, 1.0, -2.0, 2.0, 1.0, 0.0, -1.0, 1.0, -2.0],
            &[0.0, 0.0, 0.0, -4.0, -2.0, 0.0, 2.0, -2.0, 4.0],
            &[1.0, 0.0, 0.0, 2.0, 1.0, 0.0, -1.0, 1.0, -2.0],
        ],
    )
    .expect("valid fixture")
}

/// 2x2 monic quadratic with eigenpairs (1,e1), (2,e2), (3,[1,1]), (4,[1,1]).
pub fn solvent_quadratic_2() -> MatrixPolynomial {
    MatrixPolynomial::from_real(
        2,
        &[
            &[0.0, 12.0, -2.0, 14.0],
            &[-1.0, -6.0, 2.0, -9.0],
            &[1.0, 0.0, 0.0, 1.0],
        ],
    )
    .expect("valid fixture")
}

/// 3x3 monic quadratic with infinitely many solvents.
pub fn family_quadratic_3() -> MatrixPolynomial {
    let f = 1.0 / 31.0;
    MatrixPolynomial::from_real(
        3,
        &[
            &[
                13.0,
                9.0,
                7.0,
                -21.0 * f,
                294.0 * f,
                -36.0 * f,
                60.0 * f,
                183.0 * f,
                435.0 * f,
            ],
            &[
                -7.0,
                -2.0,
                -2.0,
                3.0 * f,
                -203.0 * f,
                8.0 * f,
                -13.0 * f,
                -40.0 * f,
                -231.0 * f,
            ],
            &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ],
    )
    .expect("valid fixture")
}

/// Upper-triangular form of [`family_quadratic_3`].
pub fn family_triangular_3() -> MatrixPolynomial {
    MatrixPolynomial::from_real(
        3,
        &[
            &[12.0, -3.0, 0.0, 0.0, 9.0, 1.0, 0.0, 0.0, 16.0],
            &[-7.0, 1.0, 0.0, 0.0, -6.0, 0.0, 0.0, 0.0, -8.0],
            &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ],
    )
    .expect("valid fixture")
}

/// Named fixtures in a fixed order.
pub fn golden_problems() -> Vec<(&'static str, MatrixPolynomial)> {
    vec![
        ("diag_4x4", diagonal_quadratic_4()),
        ("ss_2x2", small_quadratic_2()),
        ("jordan_3x3", jordan_quadratic_3()),
        ("solvent_2x2", solvent_quadratic_2()),
        ("family_3x3", family_quadratic_3()),
        ("triangular_3x3", family_triangular_3()),
    ]
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        c(
            StandardNormal.sample(&mut *rng),
            StandardNormal.sample(&mut *rng),
        )
    })
}

/// Dense quadratic or cubic with a well-conditioned leading coefficient.
pub fn random_problem(seed: u64, n: usize, degree: usize) -> MatrixPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs: Vec<CMat> = (0..degree).map(|_| gaussian(&mut rng, n, n)).collect();
    coeffs.push(CMat::identity(n, n) + gaussian(&mut rng, n, n) * c(0.2, 0.0));
    MatrixPolynomial::new(coeffs).expect("random problem is regular")
}

#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub name: String,
    pub problem: MatrixPolynomial,
    pub exact: InvariantPair,
    pub start: InvariantPair,
}

fn exact_pairs() -> Result<Vec<(String, MatrixPolynomial, InvariantPair)>> {
    let mut out = Vec::new();

    let p = small_quadratic_2();
    let pair = InvariantPair::new(
        real_matrix(2, 3, &[0.0, -1.0, -2.0, 1.0, 1.0, 3.0]),
        real_matrix(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, -3.0, 0.0, 1.0, 3.0]),
    )?;
    out.push(("ss_2x2".to_string(), p, pair));

    let p = diagonal_quadratic_4();
    let ct = Contour::new(c(0.75, 0.0), 0.5, 64)?;
    let pair = extract_invariant_pair(
        &p,
        &ct,
        &real_vector(&[2.0, -2.0, 1.0, -1.0]),
        &real_vector(&[0.0, 1.0, 0.0, 2.0]),
        4,
    )?;
    out.push(("diag_4x4".to_string(), p, pair));

    let p = jordan_quadratic_3();
    let ct = Contour::new(c(1.0, 0.0), 0.1, 64)?;
    let pair = extract_block_invariant_pair(
        &p,
        &ct,
        &real_matrix(3, 2, &[1.0, 0.0, 5.0, -3.0, 2.0, -4.0]),
        &real_matrix(3, 2, &[1.0, 3.0, 0.0, 1.0, -2.0, 4.0]),
        5,
    )?;
    out.push(("jordan_3x3".to_string(), p, pair));

    let p = solvent_quadratic_2();
    let pair = InvariantPair::new(
        real_matrix(2, 2, &[1.0, 1.0, 0.0, 1.0]),
        real_matrix(2, 2, &[1.0, 0.0, 0.0, 3.0]),
    )?;
    out.push(("solvent_2x2".to_string(), p, pair));

    for (i, &(n, degree, k)) in [
        (3, 2, 2),
        (4, 2, 3),
        (5, 3, 2),
        (6, 2, 4),
        (8, 2, 3),
        (4, 3, 5),
    ]
    .iter()
    .enumerate()
    {
        let p = random_problem(1000 + i as u64, n, degree);
        let eig = p.eigenpairs()?;
        // the k eigenvalues of smallest modulus
        let mut order: Vec<usize> = (0..eig.len()).collect();
        order.sort_by(|&a, &b| eig[a].0.norm().total_cmp(&eig[b].0.norm()));
        let mut x = CMat::zeros(n, k);
        let mut s = CMat::zeros(k, k);
        for (j, &idx) in order.iter().take(k).enumerate() {
            x.set_column(j, &eig[idx].1);
            s[(j, j)] = eig[idx].0;
        }
        out.push((
            format!("random_{n}x{k}_deg{degree}"),
            p,
            InvariantPair::new(x, s)?,
        ));
    }
    Ok(out)
}

/// Relative perturbation levels applied to every exact pair.
pub const PERTURBATION_LEVELS: [f64; 3] = [1e-3, 5e-2, 3e-1];

/// Exact pairs and their seeded perturbations, in a fixed order.
pub fn benchmark_corpus(seed: u64) -> Result<Vec<BenchmarkCase>> {
    let mut cases = Vec::new();
    for (row, (name, problem, exact)) in exact_pairs()?.into_iter().enumerate() {
        for (lvl, &noise) in PERTURBATION_LEVELS.iter().enumerate() {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003) ^ ((row * 16 + lvl) as u64));
            let (x, s) = (exact.x(), exact.s());
            let dx = gaussian(&mut rng, x.nrows(), x.ncols());
            let ds = gaussian(&mut rng, s.nrows(), s.ncols());
            let x0 = x + &dx * c(noise * x.norm() / dx.norm(), 0.0);
            let s0 = s + &ds * c(noise * s.norm().max(1.0) / ds.norm(), 0.0);
            cases.push(BenchmarkCase {
                name: format!("{name}@{noise:e}"),
                problem: problem.clone(),
                exact: exact.clone(),
                start: InvariantPair::new(x0, s0)?,
            });
        }
    }
    Ok(cases)
}

/// One row of the plain-versus-line-search comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub problem: String,
    pub degree: usize,
    pub n: usize,
    pub k: usize,
    pub plain_iterations: usize,
    pub plain_time: f64,
    pub plain_converged: bool,
    pub plain_residual: f64,
    pub line_search_iterations: usize,
    pub line_search_time: f64,
    pub line_search_converged: bool,
    pub line_search_residual: f64,
}

/// Refines every case twice, without and with line search. Rows may run
/// in parallel; the output keeps corpus order.
pub fn run_benchmark(
    cases: &[BenchmarkCase],
    opts: &RefineOptions,
    execution: Execution,
) -> Result<Vec<BenchmarkRecord>> {
    let inner = RefineOptions {
        execution: Execution::Sequential,
        ..*opts
    };
    execution
        .map_slice(cases, |case| {
            let plain = RefineOptions {
                line_search: false,
                ..inner
            };
            let ls = RefineOptions {
                line_search: true,
                ..inner
            };
            let (_, rp) = refine_pair(&case.problem, &case.start, &plain)?;
            let (_, rl) = refine_pair(&case.problem, &case.start, &ls)?;
            Ok(BenchmarkRecord {
                problem: case.name.clone(),
                degree: case.problem.degree(),
                n: case.start.n(),
                k: case.start.k(),
                plain_iterations: rp.iterations,
                plain_time: rp.wall_time,
                plain_converged: rp.converged,
                plain_residual: *rp.residual_history.last().unwrap_or(&f64::NAN),
                line_search_iterations: rl.iterations,
                line_search_time: rl.wall_time,
                line_search_converged: rl.converged,
                line_search_residual: *rl.residual_history.last().unwrap_or(&f64::NAN),
            })
        })
        .into_iter()
        .collect()
}

/// Fraction of rows where line search needed at most as many iterations.
pub fn line_search_win_rate(records: &[BenchmarkRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let wins = records
        .iter()
        .filter(|r| r.line_search_iterations <= r.plain_iterations)
        .count();
    wins as f64 / records.len() as f64
}
