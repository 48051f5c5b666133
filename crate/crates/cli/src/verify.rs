//! Checks of the bundled fixtures against their expected outputs, and of a
//! benchmark table against the line-search claim and the frozen seed-7 run.

use invpair::contour::{block_moments, count_eigenvalues_inside, scalar_moments, Contour};
use invpair::corpus::{line_search_win_rate, BenchmarkRecord};
use invpair::hankel::{extract_block_invariant_pair, extract_invariant_pair};
use invpair::linalg::{self, c};
use invpair::solvents::{enumerate_solvents, triangular_solvent_solve, FamilyKind};
use invpair::spectrum::{cluster_eigenvalues, ClusterOptions};
use invpair::{CMat, Execution, MatrixPolynomial, C64};
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::fixtures;
use crate::problem::{self, matrix_from_rows, vector_from_entries, Entry, MatrixRows};

/// Share of rows where line search may not need more iterations.
pub const MIN_WIN_RATE: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub problem: String,
    pub check: String,
    pub ok: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn to_json(&self) -> Value {
        json!({"problem": self.problem, "check": self.check, "ok": self.ok, "detail": self.detail})
    }
}

#[derive(Debug, Deserialize)]
struct Expected {
    problem: String,
    checks: Vec<Check>,
}

#[derive(Debug, Deserialize)]
struct Circle {
    center: Entry,
    radius: f64,
    nodes: usize,
}

impl Circle {
    fn contour(&self) -> Result<Contour, String> {
        Contour::new(c(self.center[0], self.center[1]), self.radius, self.nodes)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Check {
    Count {
        #[serde(flatten)]
        circle: Circle,
        expect: usize,
    },
    Moments {
        #[serde(flatten)]
        circle: Circle,
        u: Vec<Entry>,
        v: Vec<Entry>,
        expect: Vec<Entry>,
        tol: f64,
    },
    BlockMoments {
        #[serde(flatten)]
        circle: Circle,
        u: MatrixRows,
        v: MatrixRows,
        expect: Vec<MatrixRows>,
        tol: f64,
    },
    Pair {
        #[serde(flatten)]
        circle: Circle,
        u: Vec<Entry>,
        v: Vec<Entry>,
        m: usize,
        x: MatrixRows,
        s: MatrixRows,
        tol: f64,
    },
    BlockPair {
        #[serde(flatten)]
        circle: Circle,
        u: MatrixRows,
        v: MatrixRows,
        m: usize,
        eigenvalue: Entry,
        multiplicity: usize,
        eigenvalue_tol: f64,
        residual_max: f64,
    },
    Enumerate {
        solvents: Vec<MatrixRows>,
        rejected: usize,
        tol: f64,
    },
    Triangular {
        branches: Vec<BranchExpect>,
        tol: f64,
    },
}

#[derive(Debug, Deserialize)]
struct BranchExpect {
    diagonal: Vec<Entry>,
    family: FamilyKind,
    base: Option<MatrixRows>,
    directions: Option<Vec<MatrixRows>>,
    #[serde(default)]
    samples: usize,
    residual_max: Option<f64>,
}

impl Check {
    fn name(&self) -> &'static str {
        match self {
            Check::Count { .. } => "count",
            Check::Moments { .. } => "moments",
            Check::BlockMoments { .. } => "block_moments",
            Check::Pair { .. } => "pair",
            Check::BlockPair { .. } => "block_pair",
            Check::Enumerate { .. } => "enumerate",
            Check::Triangular { .. } => "triangular",
        }
    }
}

type Verdict = Result<(bool, String), String>;

fn max_diff(a: &CMat, b: &CMat) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    linalg::max_abs(&(a - b))
}

fn mat(rows: &MatrixRows) -> Result<CMat, String> {
    matrix_from_rows(rows, (None, None), "expected", "matrix").map_err(|e| e.to_string())
}

fn vec_of(entries: &[Entry]) -> Result<invpair::CVec, String> {
    vector_from_entries(entries, "expected", "vector").map_err(|e| e.to_string())
}

fn within(err: f64, tol: f64, what: &str) -> (bool, String) {
    (
        err <= tol,
        format!("{what} max error {err:.2e} (tol {tol:.0e})"),
    )
}

fn run_check(p: &MatrixPolynomial, check: &Check) -> Verdict {
    let err = |e: invpair::Error| e.to_string();
    match check {
        Check::Count { circle, expect } => {
            let ec = count_eigenvalues_inside(p, &circle.contour()?).map_err(err)?;
            Ok((
                ec.count == *expect,
                format!(
                    "count {} (expected {expect}), quality {:.1e}",
                    ec.count, ec.quality
                ),
            ))
        }
        Check::Moments {
            circle,
            u,
            v,
            expect,
            tol,
        } => {
            let moms = scalar_moments(
                p,
                &circle.contour()?,
                &vec_of(u)?,
                &vec_of(v)?,
                expect.len(),
            )
            .map_err(err)?;
            let e = moms
                .mu
                .iter()
                .zip(expect)
                .map(|(a, b)| (a - c(b[0], b[1])).norm())
                .fold(0.0, f64::max);
            Ok(within(e, *tol, &format!("mu_0..mu_{}", expect.len() - 1)))
        }
        Check::BlockMoments {
            circle,
            u,
            v,
            expect,
            tol,
        } => {
            let moms = block_moments(p, &circle.contour()?, &mat(u)?, &mat(v)?, expect.len())
                .map_err(err)?;
            let mut e = 0.0f64;
            for (m, x) in moms.m.iter().zip(expect) {
                e = e.max(max_diff(m, &mat(x)?));
            }
            Ok(within(e, *tol, &format!("M_0..M_{}", expect.len() - 1)))
        }
        Check::Pair {
            circle,
            u,
            v,
            m,
            x,
            s,
            tol,
        } => {
            let pair = extract_invariant_pair(p, &circle.contour()?, &vec_of(u)?, &vec_of(v)?, *m)
                .map_err(err)?;
            let e = max_diff(pair.x(), &mat(x)?).max(max_diff(pair.s(), &mat(s)?));
            Ok(within(e, *tol, "X, S"))
        }
        Check::BlockPair {
            circle,
            u,
            v,
            m,
            eigenvalue,
            multiplicity,
            eigenvalue_tol,
            residual_max,
        } => {
            let pair = extract_block_invariant_pair(p, &circle.contour()?, &mat(u)?, &mat(v)?, *m)
                .map_err(err)?;
            let res = p.residual(pair.x(), pair.s()).map_err(err)?.norm();
            let eig = linalg::eigenvalues(pair.s()).map_err(err)?;
            let cl = cluster_eigenvalues(&eig, &ClusterOptions::default());
            let target = c(eigenvalue[0], eigenvalue[1]);
            let hit = cl.len() == 1
                && cl[0].multiplicity == *multiplicity
                && (cl[0].value - target).norm() <= *eigenvalue_tol;
            let centroid = cl
                .first()
                .map(|k| (k.value - target).norm())
                .unwrap_or(f64::INFINITY);
            Ok((
                hit && res <= *residual_max,
                format!(
                    "{} cluster(s), centroid error {centroid:.1e}, ||P(Y,T)||_F {res:.1e}",
                    cl.len()
                ),
            ))
        }
        Check::Enumerate {
            solvents,
            rejected,
            tol,
        } => {
            let pairs = p.eigenpairs().map_err(err)?;
            let en = enumerate_solvents(p, &pairs, Execution::default()).map_err(err)?;
            let mut worst = 0.0f64;
            for e in solvents {
                let e = mat(e)?;
                let best = en
                    .solvents
                    .iter()
                    .map(|s| max_diff(s.solvent.s(), &e))
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(best);
            }
            let ok = en.solvents.len() == solvents.len()
                && en.rejected.len() == *rejected
                && worst <= *tol;
            Ok((
                ok,
                format!(
                    "{} solvents (expected {}), {} rejected (expected {rejected}), max error {worst:.2e}",
                    en.solvents.len(),
                    solvents.len(),
                    en.rejected.len()
                ),
            ))
        }
        Check::Triangular { branches, tol } => {
            let got = triangular_solvent_solve(p, Execution::default()).map_err(err)?;
            let mut notes = Vec::new();
            let mut ok = true;
            for b in branches {
                let diag = vec_of(&b.diagonal)?;
                let label: Vec<String> = diag.iter().map(|z| format!("{}", z.re)).collect();
                let label = label.join(",");
                let Some(br) = got.iter().find(|g| {
                    g.diagonal.len() == diag.len()
                        && g.diagonal
                            .iter()
                            .zip(diag.iter())
                            .all(|(a, b)| (a - b).norm() <= *tol)
                }) else {
                    ok = false;
                    notes.push(format!("branch ({label}) missing"));
                    continue;
                };
                let f = &br.family;
                let mut b_ok = f.kind == b.family;
                if let Some(base) = &b.base {
                    b_ok &= max_diff(&f.base, &mat(base)?) <= *tol;
                }
                if let Some(dirs) = &b.directions {
                    b_ok &= f.directions.len() == dirs.len();
                    for (d, e) in f.directions.iter().zip(dirs) {
                        b_ok &= max_diff(d, &mat(e)?) <= *tol;
                    }
                }
                let mut worst = 0.0f64;
                for j in 0..b.samples {
                    let params: Vec<C64> = (0..f.directions.len())
                        .map(|i| c(j as f64 - 2.0 + i as f64, 0.5 * j as f64))
                        .collect();
                    worst = worst.max(p.eval_solvent(&f.member(&params)).map_err(err)?.norm());
                }
                if let Some(rmax) = b.residual_max {
                    b_ok &= worst <= rmax;
                }
                ok &= b_ok;
                notes.push(format!(
                    "branch ({label}) {:?}{}",
                    f.kind,
                    if b.samples > 0 {
                        format!(", {} members max ||T(S)||_F {worst:.1e}", b.samples)
                    } else {
                        String::new()
                    }
                ));
            }
            Ok((ok && got.len() >= branches.len(), notes.join("; ")))
        }
    }
}

pub fn check_fixture(name: &str, expected_json: &str) -> Vec<CheckResult> {
    let fail = |check: &str, detail: String| CheckResult {
        problem: name.to_string(),
        check: check.to_string(),
        ok: false,
        detail,
    };
    let expected: Expected =
        match problem::from_json(expected_json, &format!("expected/{name}.json")) {
            Ok(e) => e,
            Err(e) => return vec![fail("parse", e.to_string())],
        };
    let Some(text) = fixtures::problem_text(&expected.problem) else {
        return vec![fail(
            "load",
            format!("no bundled problem {}", expected.problem),
        )];
    };
    let p = match problem::parse_problem_str(text, &expected.problem) {
        Ok(p) => p,
        Err(e) => return vec![fail("load", e.to_string())],
    };
    expected
        .checks
        .iter()
        .map(|chk| match run_check(&p, chk) {
            Ok((ok, detail)) => CheckResult {
                problem: name.to_string(),
                check: chk.name().to_string(),
                ok,
                detail,
            },
            Err(e) => fail(chk.name(), e),
        })
        .collect()
}

/// Expected outputs come from `dir/<problem>.json` when that file exists,
/// otherwise from the bundled copy.
fn expected_text(dir: Option<&Path>, file: &str, bundled: &str) -> Result<String, String> {
    match dir.map(|d| d.join(file)).filter(|p| p.exists()) {
        Some(p) => std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display())),
        None => Ok(bundled.to_string()),
    }
}

pub fn golden_checks(dir: Option<&Path>) -> Vec<CheckResult> {
    fixtures::EXPECTED
        .iter()
        .flat_map(
            |(name, text)| match expected_text(dir, &format!("{name}.json"), text) {
                Ok(t) => check_fixture(name, &t),
                Err(e) => vec![CheckResult {
                    problem: name.to_string(),
                    check: "load".into(),
                    ok: false,
                    detail: e,
                }],
            },
        )
        .collect()
}

/// Win rate, residuals of converged rows and, when `frozen`, agreement of
/// iteration counts and flags with the bundled seed-7 table.
pub fn bench_checks(
    records: &[BenchmarkRecord],
    tol: f64,
    frozen: bool,
    dir: Option<&Path>,
) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let res = |check: &str, ok: bool, detail: String| CheckResult {
        problem: "bench".into(),
        check: check.into(),
        ok,
        detail,
    };
    let rate = line_search_win_rate(records);
    out.push(res(
        "win_rate",
        rate >= MIN_WIN_RATE,
        format!(
            "line search needed no more iterations on {:.0}% of {} rows",
            100.0 * rate,
            records.len()
        ),
    ));
    let bad: Vec<&str> = records
        .iter()
        .filter(|r| {
            (r.plain_converged && !below(r.plain_residual, tol))
                || (r.line_search_converged && !below(r.line_search_residual, tol))
        })
        .map(|r| r.problem.as_str())
        .collect();
    out.push(res(
        "converged_residuals",
        bad.is_empty(),
        if bad.is_empty() {
            format!("every converged run ends below {tol:.0e}")
        } else {
            format!("rows above {tol:.0e}: {}", bad.join(", "))
        },
    ));
    if frozen {
        let table = expected_text(dir, "bench_seed7.json", fixtures::BENCH_SEED7);
        out.push(match table.and_then(|t| frozen_table_diff(records, &t)) {
            Ok(()) => res(
                "frozen_table",
                true,
                "iterations and flags match the seed-7 table".into(),
            ),
            Err(d) => res("frozen_table", false, d),
        });
    }
    out
}

fn frozen_table_diff(records: &[BenchmarkRecord], text: &str) -> Result<(), String> {
    let table: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let rows = table["rows"].as_array().ok_or("frozen table has no rows")?;
    if rows.len() != records.len() {
        return Err(format!(
            "{} rows, frozen table has {}",
            records.len(),
            rows.len()
        ));
    }
    for (r, f) in records.iter().zip(rows) {
        let now = json!([
            r.problem,
            r.plain_iterations,
            r.plain_converged,
            r.line_search_iterations,
            r.line_search_converged
        ]);
        let then = json!([
            f["problem"],
            f["plain_iterations"],
            f["plain_converged"],
            f["line_search_iterations"],
            f["line_search_converged"]
        ]);
        if now != then {
            return Err(format!("row {}: got {now}, frozen {then}", r.problem));
        }
    }
    Ok(())
}

/// False for NaN.
fn below(x: f64, limit: f64) -> bool {
    x < limit
}
