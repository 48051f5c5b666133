use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use invpair::C64;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "invpair",
    version,
    about = "Invariant pairs and solvents of matrix polynomials from contour integrals",
    long_about = None
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,

    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Include wall-clock times in the output.
    #[arg(long, global = true)]
    pub timings: bool,

    #[command(subcommand)]
    pub command: Command,
}

/// `re,im` or a bare real part.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| {
        t.parse::<f64>()
            .map_err(|_| format!("`{t}` is not a number"))
    };
    let z = match parts.as_slice() {
        [re] => C64::new(num(re)?, 0.0),
        [re, im] => C64::new(num(re)?, num(im)?),
        _ => return Err(format!("expected `re,im`, got `{s}`")),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ContourArgs {
    /// Circle center as `re,im`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub center: Option<C64>,

    #[arg(long, allow_hyphen_values = true)]
    pub radius: Option<f64>,

    /// Quadrature nodes.
    #[arg(long, default_value_t = invpair::contour::DEFAULT_NODES)]
    pub nodes: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    /// Seed for the random probe vectors.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// JSON file with probes `u` and `v` (vectors, or n x ξ blocks).
    #[arg(long, value_name = "PATH")]
    pub probe_file: Option<String>,

    /// Probe block size.
    #[arg(long)]
    pub xi: Option<usize>,

    /// Pair size; chosen from the eigenvalue count and a Hankel rank probe
    /// when omitted.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RefineArgs {
    #[arg(long)]
    pub tol: Option<f64>,

    #[arg(long, default_value_t = invpair::refine::DEFAULT_MAXIT)]
    pub maxit: usize,

    /// Plain Newton (every step length 1).
    #[arg(long)]
    pub no_line_search: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Problem file; bundled fixture names such as `ss_2x2.json` also work.
    pub problem: String,

    #[command(flatten)]
    pub contour: ContourArgs,

    #[command(flatten)]
    pub probes: ProbeArgs,

    /// Start from this pair `{x, s}` (or solvent `{s}`) instead of
    /// extracting one.
    #[arg(long, value_name = "PATH")]
    pub pair_file: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Number of eigenvalues inside the contour.
    Count {
        problem: String,
        #[command(flatten)]
        contour: ContourArgs,
    },
    /// Scalar moments μ_k, or block moments M_k when ξ > 1.
    Moments {
        problem: String,
        #[command(flatten)]
        contour: ContourArgs,
        #[command(flatten)]
        probes: ProbeArgs,
    },
    /// Invariant pair from the scalar Hankel pencil.
    Pair {
        problem: String,
        #[command(flatten)]
        contour: ContourArgs,
        #[command(flatten)]
        probes: ProbeArgs,
    },
    /// Invariant pair from the block Hankel pencil.
    BlockPair {
        problem: String,
        #[command(flatten)]
        contour: ContourArgs,
        #[command(flatten)]
        probes: ProbeArgs,
    },
    /// Newton refinement of a pair or solvent.
    Refine {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        refine: RefineArgs,
    },
    /// Condition number of a pair or solvent.
    Cond {
        #[command(flatten)]
        source: Source,
    },
    /// Backward error with its lower and upper bounds.
    Berr {
        #[command(flatten)]
        source: Source,
    },
    /// Solvent from an n x n pair, with verification.
    Solvent {
        #[command(flatten)]
        source: Source,
        /// Verification tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Every solvent built from n-subsets of the eigenpairs.
    Enumerate { problem: String },
    /// Solvent families of an upper-triangular polynomial.
    Triangular { problem: String },
    /// Plain Newton against Newton with line search on the perturbed-pair
    /// corpus.
    Bench {
        #[arg(long, default_value_t = 7)]
        seed: u64,

        /// Also check the bundled fixtures against their expected outputs.
        #[arg(long)]
        verify: bool,

        /// Directory of expected-output files overriding the bundled ones.
        #[arg(long, value_name = "DIR", requires = "verify")]
        expected: Option<PathBuf>,

        #[arg(long)]
        tol: Option<f64>,

        #[arg(long, default_value_t = invpair::refine::DEFAULT_MAXIT)]
        maxit: usize,
    },
}
