use std::path::Path;

use invpair::conditioning::{
    pair_backward_error, pair_condition_number, solvent_backward_error, solvent_condition_number,
    WeightVector,
};
use invpair::contour::{
    block_moments, count_eigenvalues_inside, random_probes, scalar_moments, Contour,
};
use invpair::corpus::{benchmark_corpus, line_search_win_rate, run_benchmark, BenchmarkRecord};
use invpair::hankel::{
    auto_block_pair_size, auto_pair_size, extract_block_invariant_pair, extract_invariant_pair,
};
use invpair::refine::{refine_pair, refine_solvent, RefineOptions, RefinementReport, DEFAULT_TOL};
use invpair::solvents::{
    enumerate_solvents, solvent_from_pair, triangular_solvent_solve, verify_solvent, FamilyKind,
};
use invpair::spectrum::{cluster_eigenvalues, ClusterOptions};
use invpair::{linalg, CMat, Execution, InvariantPair, MatrixPolynomial};
use serde_json::{json, Value};

use crate::args::{Command, ContourArgs, ProbeArgs, RefineArgs, Source};
use crate::error::CliError;
use crate::fixtures;
use crate::output::{complex, complexes, csv_complex, csv_real, matrix, num, Report};
use crate::problem::{self, from_json, matrix_from_rows, PairFile, ProbeFile};
use crate::verify;

/// Options that shape every report.
#[derive(Debug, Clone, Copy)]
pub struct Context {
    pub timings: bool,
}

/// A finished command. `failure` is reported after the output is written.
pub struct Outcome {
    pub report: Report,
    pub failure: Option<CliError>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome {
            report,
            failure: None,
        }
    }
}

type Res<T> = Result<T, CliError>;

/// Reads a file from disk, falling back to the bundled fixture of that name.
fn read_input(arg: &str) -> Res<(String, String)> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok((problem::read_text(path)?, arg.to_string()));
    }
    match fixtures::bundled(arg) {
        Some(text) => Ok((text.to_string(), format!("<bundled {arg}>"))),
        None => Err(CliError::Usage(format!(
            "{arg}: no such file or bundled fixture"
        ))),
    }
}

fn load_problem(arg: &str) -> Res<MatrixPolynomial> {
    let (text, origin) = read_input(arg)?;
    Ok(problem::parse_problem_str(&text, &origin)?)
}

fn contour(args: &ContourArgs) -> Res<Contour> {
    let center = args
        .center
        .ok_or_else(|| CliError::Usage("--center is required".into()))?;
    let radius = args
        .radius
        .ok_or_else(|| CliError::Usage("--radius is required".into()))?;
    Contour::new(center, radius, args.nodes)
        .map_err(|e| CliError::Usage(format!("invalid contour: {e}")))
}

fn contour_json(ct: &Contour) -> Value {
    json!({"center": complex(ct.center()), "radius": num(ct.radius()), "nodes": ct.nodes()})
}

/// Probe blocks `(U, V)`; single columns unless `block`.
fn probes(p: &MatrixPolynomial, args: &ProbeArgs, block: bool) -> Res<(CMat, CMat)> {
    let n = p.n();
    let (u, v) = match &args.probe_file {
        Some(file) => {
            let (text, origin) = read_input(file)?;
            let pf: ProbeFile = from_json(&text, &origin)?;
            (
                pf.u.to_matrix(n, &origin, "u")?,
                pf.v.to_matrix(n, &origin, "v")?,
            )
        }
        None => {
            let xi = if block {
                args.xi.unwrap_or(n.min(2))
            } else {
                1
            };
            if xi == 0 || xi > n {
                return Err(CliError::Usage(format!(
                    "--xi must be between 1 and n = {n}"
                )));
            }
            (
                random_probes(n, xi, args.seed),
                random_probes(n, xi, args.seed.wrapping_add(1)),
            )
        }
    };
    if u.ncols() != v.ncols() {
        return Err(CliError::Usage(format!(
            "probe blocks have {} and {} columns",
            u.ncols(),
            v.ncols()
        )));
    }
    if let Some(xi) = args.xi {
        if args.probe_file.is_some() && xi != u.ncols() {
            return Err(CliError::Usage(format!(
                "--xi {xi} disagrees with the probe file ({} columns)",
                u.ncols()
            )));
        }
    }
    if !block && u.ncols() != 1 {
        return Err(CliError::Usage(
            "scalar extraction needs probe vectors; use block-pair for probe blocks".into(),
        ));
    }
    Ok((u, v))
}

fn wants_block(args: &ProbeArgs) -> Res<bool> {
    if args.xi.is_some_and(|xi| xi > 1) {
        return Ok(true);
    }
    if let Some(file) = &args.probe_file {
        let (text, origin) = read_input(file)?;
        let pf: ProbeFile = from_json(&text, &origin)?;
        return Ok(
            matches!(pf.u, problem::ProbeData::Matrix(ref m) if m.first().is_some_and(|r| r.len() > 1)),
        );
    }
    Ok(false)
}

fn extract(
    p: &MatrixPolynomial,
    ct: &Contour,
    args: &ProbeArgs,
    block: bool,
) -> Res<InvariantPair> {
    let (u, v) = probes(p, args, block)?;
    if block {
        let m = match args.m {
            Some(m) => m,
            None => auto_block_pair_size(p, ct, &u, &v)?,
        };
        Ok(extract_block_invariant_pair(p, ct, &u, &v, m)?)
    } else {
        let (u, v) = (u.column(0).into_owned(), v.column(0).into_owned());
        let m = match args.m {
            Some(m) => m,
            None => auto_pair_size(p, ct, &u, &v)?,
        };
        Ok(extract_invariant_pair(p, ct, &u, &v, m)?)
    }
}

enum Subject {
    Pair(InvariantPair),
    Solvent(CMat),
}

fn subject(p: &MatrixPolynomial, src: &Source) -> Res<Subject> {
    if let Some(file) = &src.pair_file {
        let (text, origin) = read_input(file)?;
        let pf: PairFile = from_json(&text, &origin)?;
        let s = matrix_from_rows(&pf.s, (None, None), &origin, "s")?;
        if s.nrows() != s.ncols() {
            return Err(CliError::Usage(format!("{origin}: s must be square")));
        }
        return match &pf.x {
            Some(x) => {
                let x = matrix_from_rows(x, (Some(p.n()), Some(s.nrows())), &origin, "x")?;
                Ok(Subject::Pair(InvariantPair::new(x, s)?))
            }
            None if s.nrows() == p.n() => Ok(Subject::Solvent(s)),
            None => Err(CliError::Usage(format!(
                "{origin}: a solvent must be {0}x{0}",
                p.n()
            ))),
        };
    }
    let ct = contour(&src.contour)?;
    let block = wants_block(&src.probes)?;
    Ok(Subject::Pair(extract(p, &ct, &src.probes, block)?))
}

fn clusters_json(s: &CMat) -> Res<Value> {
    let eig = linalg::eigenvalues(s)?;
    let cl = cluster_eigenvalues(&eig, &ClusterOptions::default());
    Ok(Value::Array(
        cl.iter()
            .map(|k| json!({"value": complex(k.value), "multiplicity": k.multiplicity, "spread": num(k.spread)}))
            .collect(),
    ))
}

const MATRIX_HEADER: [&str; 4] = ["matrix", "row", "col", "value"];

fn count(problem: &str, args: &ContourArgs) -> Res<Report> {
    let p = load_problem(problem)?;
    let ct = contour(args)?;
    let ec = count_eigenvalues_inside(&p, &ct)?;
    let mut r = Report::new(
        json!({
            "contour": contour_json(&ct),
            "count": ec.count,
            "raw": complex(ec.raw),
            "quality": num(ec.quality),
            "warning": ec.warning,
        }),
        &["count", "raw", "quality", "warning"],
    );
    r.row(vec![
        ec.count.to_string(),
        csv_complex(ec.raw),
        csv_real(ec.quality),
        ec.warning.unwrap_or_default(),
    ]);
    Ok(r)
}

fn moments(problem: &str, cargs: &ContourArgs, pargs: &ProbeArgs) -> Res<Report> {
    let p = load_problem(problem)?;
    let ct = contour(cargs)?;
    let block = wants_block(pargs)?;
    let (u, v) = probes(&p, pargs, block)?;
    if block {
        let m = match pargs.m {
            Some(m) => m,
            None => auto_block_pair_size(&p, &ct, &u, &v)?,
        };
        let xi = u.ncols();
        let moms = block_moments(&p, &ct, &u, &v, 2 * m.div_ceil(xi))?;
        let mut r = Report::new(
            json!({
                "contour": contour_json(&ct),
                "xi": xi,
                "m": m,
                "u": matrix(&u),
                "v": matrix(&v),
                "moments": moms.m.iter().map(matrix).collect::<Vec<_>>(),
            }),
            &["k", "row", "col", "value"],
        );
        for (k, mk) in moms.m.iter().enumerate() {
            for i in 0..mk.nrows() {
                for j in 0..mk.ncols() {
                    r.row(vec![
                        k.to_string(),
                        i.to_string(),
                        j.to_string(),
                        csv_complex(mk[(i, j)]),
                    ]);
                }
            }
        }
        Ok(r)
    } else {
        let (u, v) = (u.column(0).into_owned(), v.column(0).into_owned());
        let m = match pargs.m {
            Some(m) => m,
            None => auto_pair_size(&p, &ct, &u, &v)?,
        };
        let moms = scalar_moments(&p, &ct, &u, &v, 2 * m)?;
        let mut r = Report::new(
            json!({
                "contour": contour_json(&ct),
                "m": m,
                "u": complexes(u.as_slice()),
                "v": complexes(v.as_slice()),
                "moments": complexes(&moms.mu),
            }),
            &["k", "mu"],
        );
        for (k, mu) in moms.mu.iter().enumerate() {
            r.row(vec![k.to_string(), csv_complex(*mu)]);
        }
        Ok(r)
    }
}

fn pair(problem: &str, cargs: &ContourArgs, pargs: &ProbeArgs, block: bool) -> Res<Report> {
    let p = load_problem(problem)?;
    let ct = contour(cargs)?;
    let pair = extract(&p, &ct, pargs, block)?;
    let rel = invpair::refine::relative_residual(&p, pair.x(), pair.s())?;
    let mut r = Report::new(
        json!({
            "contour": contour_json(&ct),
            "m": pair.k(),
            "x": matrix(pair.x()),
            "s": matrix(pair.s()),
            "relative_residual": num(rel),
            "eigenvalues": clusters_json(pair.s())?,
        }),
        &MATRIX_HEADER,
    );
    r.matrix_rows("X", pair.x());
    r.matrix_rows("S", pair.s());
    Ok(r)
}

fn report_json(rep: &RefinementReport, ctx: Context) -> Value {
    let mut v = json!({
        "iterations": rep.iterations,
        "converged": rep.converged,
        "residual_history": rep.residual_history.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "step_lengths": rep.step_lengths.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "warnings": rep.warnings,
    });
    if ctx.timings {
        v["wall_time"] = num(rep.wall_time);
    }
    v
}

fn refine(src: &Source, args: &RefineArgs, ctx: Context) -> Res<Outcome> {
    let p = load_problem(&src.problem)?;
    let user_contour = match (src.contour.center, src.contour.radius) {
        (Some(_), Some(_)) => Some(contour(&src.contour)?),
        _ => None,
    };
    let opts = RefineOptions {
        tol: args.tol.unwrap_or(DEFAULT_TOL),
        maxit: args.maxit,
        line_search: !args.no_line_search,
        contour: user_contour,
        nodes: src.contour.nodes,
        execution: Execution::default(),
    };
    let (mut body, rep) = match subject(&p, src)? {
        Subject::Pair(pair) => {
            let (out, rep) = refine_pair(&p, &pair, &opts)?;
            (
                json!({"mode": "pair", "x": matrix(out.x()), "s": matrix(out.s())}),
                rep,
            )
        }
        Subject::Solvent(s0) => {
            let (out, rep) = refine_solvent(&p, &s0, &opts)?;
            (json!({"mode": "solvent", "s": matrix(out.s())}), rep)
        }
    };
    body["line_search"] = json!(opts.line_search);
    body["report"] = report_json(&rep, ctx);
    let mut r = Report::new(
        body,
        &[
            "iteration",
            "relative_residual",
            "log10_relative_residual",
            "step_length",
        ],
    );
    for (i, &res) in rep.residual_history.iter().enumerate() {
        let step = if i == 0 {
            String::new()
        } else {
            csv_real(rep.step_lengths[i - 1])
        };
        r.row(vec![
            i.to_string(),
            csv_real(res),
            csv_real(res.log10()),
            step,
        ]);
    }
    let failure = (!rep.converged).then_some(CliError::Numerical(invpair::Error::NoConvergence(
        "Newton refinement",
    )));
    Ok(Outcome { report: r, failure })
}

fn cond(src: &Source) -> Res<Report> {
    let p = load_problem(&src.problem)?;
    let w = WeightVector::frobenius(&p);
    let (mode, rep) = match subject(&p, src)? {
        Subject::Pair(pair) => ("pair", pair_condition_number(&p, pair.x(), pair.s(), &w)?),
        Subject::Solvent(s) => ("solvent", solvent_condition_number(&p, &s, &w)?),
    };
    let mut r = Report::new(
        json!({
            "mode": mode,
            "weights": w.alphas().iter().map(|&a| num(a)).collect::<Vec<_>>(),
            "kappa": num(rep.kappa),
            "jacobian_rank": rep.jacobian_rank,
            "expected_rank": rep.expected_rank,
            "warning": rep.warning,
        }),
        &["mode", "kappa", "jacobian_rank", "expected_rank", "warning"],
    );
    r.row(vec![
        mode.into(),
        csv_real(rep.kappa),
        rep.jacobian_rank.to_string(),
        rep.expected_rank.to_string(),
        rep.warning.unwrap_or_default(),
    ]);
    Ok(r)
}

fn berr(src: &Source) -> Res<Report> {
    let p = load_problem(&src.problem)?;
    let w = WeightVector::frobenius(&p);
    let (mode, rep) = match subject(&p, src)? {
        Subject::Pair(pair) => ("pair", pair_backward_error(&p, pair.x(), pair.s(), &w)?),
        Subject::Solvent(s) => ("solvent", solvent_backward_error(&p, &s, &w)?),
    };
    let eta = rep.eta.map(num).unwrap_or(Value::Null);
    let mut r = Report::new(
        json!({
            "mode": mode,
            "weights": w.alphas().iter().map(|&a| num(a)).collect::<Vec<_>>(),
            "lower": num(rep.lower),
            "eta": eta,
            "upper": num(rep.upper),
            "h_rank": rep.h_rank,
        }),
        &["mode", "lower", "eta", "upper", "h_rank"],
    );
    r.row(vec![
        mode.into(),
        csv_real(rep.lower),
        rep.eta.map(csv_real).unwrap_or_default(),
        csv_real(rep.upper),
        rep.h_rank.to_string(),
    ]);
    Ok(r)
}

fn solvent(src: &Source, tol: f64) -> Res<Outcome> {
    let p = load_problem(&src.problem)?;
    let s = match src.pair_file {
        Some(_) => match subject(&p, src)? {
            Subject::Pair(pair) => solvent_from_pair(&p, &pair)?.into_matrix(),
            Subject::Solvent(s) => s,
        },
        None => {
            let ct = contour(&src.contour)?;
            let mut pargs = src.probes.clone();
            if pargs.m.is_some_and(|m| m != p.n()) {
                return Err(CliError::Usage(format!("a solvent needs --m {}", p.n())));
            }
            pargs.m = Some(p.n());
            let block = wants_block(&pargs)?;
            let pair = extract(&p, &ct, &pargs, block)?;
            solvent_from_pair(&p, &pair)?.into_matrix()
        }
    };
    let ver = verify_solvent(&p, &s, tol)?;
    let mut r = Report::new(
        json!({
            "s": matrix(&s),
            "residual": num(ver.residual),
            "certified": ver.certified,
            "tol": num(tol),
            "eigen_checks": ver.eigen_checks.iter()
                .map(|e| json!({"value": complex(e.value), "residual": num(e.residual)}))
                .collect::<Vec<_>>(),
        }),
        &MATRIX_HEADER,
    );
    r.matrix_rows("S", &s);
    let failure =
        (!ver.certified).then_some(CliError::Numerical(invpair::Error::ResidualTooLarge {
            residual: ver.residual,
            tol,
        }));
    Ok(Outcome { report: r, failure })
}

fn joined_entries(m: &CMat) -> String {
    let mut cells = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            cells.push(csv_complex(m[(i, j)]));
        }
    }
    cells.join(";")
}

fn enumerate(problem: &str) -> Res<Report> {
    let p = load_problem(problem)?;
    let pairs = p.eigenpairs()?;
    let en = enumerate_solvents(&p, &pairs, Execution::default())?;
    let eig: Vec<_> = pairs.iter().map(|(l, _)| *l).collect();
    let mut r = Report::new(
        json!({
            "eigenvalues": complexes(&eig),
            "solvents": en.solvents.iter().map(|e| json!({
                "indices": e.indices,
                "s": matrix(e.solvent.s()),
                "residual": num(e.solvent.residual()),
            })).collect::<Vec<_>>(),
            "rejected": en.rejected.iter().map(|r| json!({
                "indices": r.indices,
                "condition": num(r.condition),
            })).collect::<Vec<_>>(),
        }),
        &["status", "indices", "residual", "condition", "entries"],
    );
    let idx = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    for e in &en.solvents {
        r.row(vec![
            "solvent".into(),
            idx(&e.indices),
            csv_real(e.solvent.residual()),
            String::new(),
            joined_entries(e.solvent.s()),
        ]);
    }
    for rej in &en.rejected {
        r.row(vec![
            "rejected".into(),
            idx(&rej.indices),
            String::new(),
            csv_real(rej.condition),
            String::new(),
        ]);
    }
    Ok(r)
}

fn kind_name(k: FamilyKind) -> &'static str {
    match k {
        FamilyKind::None => "none",
        FamilyKind::Unique => "unique",
        FamilyKind::Affine => "affine",
    }
}

fn triangular(problem: &str) -> Res<Report> {
    let p = load_problem(problem)?;
    let branches = triangular_solvent_solve(&p, Execution::default())?;
    let mut r = Report::new(
        json!({
            "branches": branches.iter().map(|b| {
                let mut v = json!({"diagonal": complexes(&b.diagonal), "kind": kind_name(b.family.kind)});
                match b.family.kind {
                    FamilyKind::None => {
                        v["conflict"] = json!(b.family.conflict.map(|(i, j)| [i, j]));
                    }
                    _ => {
                        v["base"] = matrix(&b.family.base);
                        v["directions"] = Value::Array(b.family.directions.iter().map(matrix).collect());
                    }
                }
                v
            }).collect::<Vec<_>>(),
        }),
        &[
            "branch",
            "diagonal",
            "kind",
            "free_parameters",
            "conflict",
            "base",
        ],
    );
    for (i, b) in branches.iter().enumerate() {
        let none = b.family.kind == FamilyKind::None;
        r.row(vec![
            i.to_string(),
            b.diagonal
                .iter()
                .map(|&z| csv_complex(z))
                .collect::<Vec<_>>()
                .join(";"),
            kind_name(b.family.kind).into(),
            if none {
                String::new()
            } else {
                b.family.directions.len().to_string()
            },
            b.family
                .conflict
                .map(|(i, j)| format!("{i} {j}"))
                .unwrap_or_default(),
            if none {
                String::new()
            } else {
                joined_entries(&b.family.base)
            },
        ]);
    }
    Ok(r)
}

fn record_json(rec: &BenchmarkRecord, ctx: Context) -> Value {
    let mut v = json!({
        "problem": rec.problem,
        "degree": rec.degree,
        "n": rec.n,
        "k": rec.k,
        "plain_iterations": rec.plain_iterations,
        "plain_converged": rec.plain_converged,
        "plain_residual": num(rec.plain_residual),
        "line_search_iterations": rec.line_search_iterations,
        "line_search_converged": rec.line_search_converged,
        "line_search_residual": num(rec.line_search_residual),
    });
    if ctx.timings {
        v["plain_time"] = num(rec.plain_time);
        v["line_search_time"] = num(rec.line_search_time);
    }
    v
}

pub fn bench_records(seed: u64, tol: f64, maxit: usize) -> Res<Vec<BenchmarkRecord>> {
    let cases = benchmark_corpus(seed)?;
    let opts = RefineOptions {
        tol,
        maxit,
        ..RefineOptions::default()
    };
    Ok(run_benchmark(&cases, &opts, Execution::default())?)
}

fn bench(
    seed: u64,
    verify_flag: bool,
    expected: Option<&Path>,
    tol: Option<f64>,
    maxit: usize,
    ctx: Context,
) -> Res<Outcome> {
    let tol = tol.unwrap_or(DEFAULT_TOL);
    let records = bench_records(seed, tol, maxit)?;
    let rate = line_search_win_rate(&records);
    let mut body = json!({
        "seed": seed,
        "tol": num(tol),
        "maxit": maxit,
        "rows": records.iter().map(|r| record_json(r, ctx)).collect::<Vec<_>>(),
        "line_search_win_rate": num(rate),
    });
    let mut header = vec![
        "problem",
        "degree",
        "n",
        "k",
        "plain_iterations",
        "plain_converged",
        "plain_residual",
        "line_search_iterations",
        "line_search_converged",
        "line_search_residual",
    ];
    if ctx.timings {
        header.extend(["plain_time", "line_search_time"]);
    }
    let mut failure = None;
    let mut checks = Vec::new();
    if verify_flag {
        checks = verify::golden_checks(expected);
        let frozen = seed == 7 && tol == DEFAULT_TOL && maxit == invpair::refine::DEFAULT_MAXIT;
        checks.extend(verify::bench_checks(&records, tol, frozen, expected));
        body["verification"] =
            Value::Array(checks.iter().map(verify::CheckResult::to_json).collect());
        let bad: Vec<_> = checks.iter().filter(|c| !c.ok).collect();
        if !bad.is_empty() {
            failure = Some(CliError::Mismatch(format!(
                "{} of {} checks failed, first: {} {}: {}",
                bad.len(),
                checks.len(),
                bad[0].problem,
                bad[0].check,
                bad[0].detail
            )));
        }
    }
    let mut r = Report::new(body, &header);
    for rec in &records {
        let mut row = vec![
            rec.problem.clone(),
            rec.degree.to_string(),
            rec.n.to_string(),
            rec.k.to_string(),
            rec.plain_iterations.to_string(),
            rec.plain_converged.to_string(),
            csv_real(rec.plain_residual),
            rec.line_search_iterations.to_string(),
            rec.line_search_converged.to_string(),
            csv_real(rec.line_search_residual),
        ];
        if ctx.timings {
            row.extend([csv_real(rec.plain_time), csv_real(rec.line_search_time)]);
        }
        r.row(row);
    }
    if verify_flag {
        // verification lines follow the table in CSV mode
        let width = r.header.len();
        for c in &checks {
            let mut row = vec![
                format!("verify:{}", c.problem),
                c.check.clone(),
                if c.ok { "pass" } else { "fail" }.into(),
                c.detail.clone(),
            ];
            row.resize(width, String::new());
            r.row(row);
        }
    }
    Ok(Outcome { report: r, failure })
}

pub fn execute(cmd: &Command, ctx: Context) -> Res<Outcome> {
    match cmd {
        Command::Count { problem, contour } => count(problem, contour).map(Outcome::from),
        Command::Moments {
            problem,
            contour,
            probes,
        } => moments(problem, contour, probes).map(Outcome::from),
        Command::Pair {
            problem,
            contour,
            probes,
        } => pair(problem, contour, probes, false).map(Outcome::from),
        Command::BlockPair {
            problem,
            contour,
            probes,
        } => pair(problem, contour, probes, true).map(Outcome::from),
        Command::Refine { source, refine: r } => refine(source, r, ctx),
        Command::Cond { source } => cond(source).map(Outcome::from),
        Command::Berr { source } => berr(source).map(Outcome::from),
        Command::Solvent { source, tol } => solvent(source, *tol),
        Command::Enumerate { problem } => enumerate(problem).map(Outcome::from),
        Command::Triangular { problem } => triangular(problem).map(Outcome::from),
        Command::Bench {
            seed,
            verify,
            expected,
            tol,
            maxit,
        } => bench(*seed, *verify, expected.as_deref(), *tol, *maxit, ctx),
    }
}
