//! Bundled problems, probe files and expected outputs.
//!
//! A file argument that does not exist on disk is looked up here by file
//! name, so `invpair count ss_2x2.json ...` works from any directory.

use std::path::Path;

macro_rules! bundle {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../fixtures/", $name)))),*]
    };
}

pub const FILES: &[(&str, &str)] = bundle!(
    "diag_4x4.json",
    "ss_2x2.json",
    "jordan_3x3.json",
    "solvent_2x2.json",
    "family_3x3.json",
    "triangular_3x3.json",
    "diag_4x4.probe.json",
    "ss_2x2.probe.json",
    "jordan_3x3.probe.json",
);

/// `(problem name, expected-output JSON)` in verification order.
pub const EXPECTED: &[(&str, &str)] = &[
    (
        "diag_4x4",
        include_str!("../fixtures/expected/diag_4x4.json"),
    ),
    ("ss_2x2", include_str!("../fixtures/expected/ss_2x2.json")),
    (
        "jordan_3x3",
        include_str!("../fixtures/expected/jordan_3x3.json"),
    ),
    (
        "solvent_2x2",
        include_str!("../fixtures/expected/solvent_2x2.json"),
    ),
    (
        "family_3x3",
        include_str!("../fixtures/expected/family_3x3.json"),
    ),
    (
        "triangular_3x3",
        include_str!("../fixtures/expected/triangular_3x3.json"),
    ),
];

/// Frozen `bench --seed 7` table (iterations and convergence flags).
pub const BENCH_SEED7: &str = include_str!("../fixtures/expected/bench_seed7.json");

pub fn bundled(name: &str) -> Option<&'static str> {
    let file = Path::new(name).file_name()?.to_str()?;
    FILES
        .iter()
        .find(|(f, _)| *f == file || f.strip_suffix(".json") == Some(file))
        .map(|(_, text)| *text)
}

pub fn problem_text(name: &str) -> Option<&'static str> {
    bundled(&format!("{name}.json"))
}
