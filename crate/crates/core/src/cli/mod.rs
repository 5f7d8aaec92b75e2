//! The `ratiolim` command line.
//!
//! ```text
//! ratiolim <coeffs|asym|roots|validate|oscillations|julia>
//!          [--kernel SPEC] [--n N] [--digits D] [--route R] [--out PATH] [--config FILE] ...
//! ```
//!
//! Kernel grammar:
//!
//! ```text
//! cpoisson:q=[c1,c2,...];measure=MEASURE   q(z) = c1 z + c2 z^2 + ...
//!     MEASURE = full | unit | tail:A | dirac:R0
//! binomial:m=M
//! conjugate:geometric | conjugate:log | conjugate:p=[c1,c2,...]
//! ```
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 mathematically
//! inapplicable request, 3 numeric failure (including failed validation).

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{resolve_digits, FileConfig, DIGITS_ENV};
pub use output::write_atomic;

use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use config::{parse_route, Resolved};

#[derive(Debug, Parser)]
#[command(name = "ratiolim", version, about = "Limit ratios of rare-event probabilities for branching processes in random environments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute phi_1..phi_N and write them as CSV.
    Coeffs(CoeffsArgs),
    /// Build the large-n model of phi_n and write it as JSON.
    Asym(AsymArgs),
    /// Solve an indicial equation and write its roots as CSV.
    Roots(RootsArgs),
    /// Cross-check routes and functional identities; exit 3 on failure.
    Validate(ValidateArgs),
    /// Residuals against the asymptotic model and a log-periodic fit.
    Oscillations(OscillationsArgs),
    /// Escape-time picture of the filled Julia set of z e^(z-1) as PGM.
    Julia(JuliaArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Kernel specification, e.g. `cpoisson:q=[1,1];measure=full`.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Number of coefficients N.
    #[arg(long)]
    pub n: Option<usize>,
    /// Significant decimal digits (default: $RATIOLIM_DIGITS, else 60).
    #[arg(long)]
    pub digits: Option<u32>,
    /// auto | closed | product | recurrence | fixedpoint
    #[arg(long)]
    pub route: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with default values for any of these options.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AsymArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of model terms to keep (1 or 2).
    #[arg(long)]
    pub terms: Option<usize>,
    /// Estimate unknown constants from a table of this many coefficients.
    #[arg(long)]
    pub estimate_n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Binomial indicial equation with this m.
    #[arg(long, conflicts_with = "tail_a")]
    pub binomial_m: Option<u32>,
    /// Tail indicial equation with this threshold a.
    #[arg(long)]
    pub tail_a: Option<String>,
    /// Number of complex-conjugate pairs.
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also check a table read from this CSV file.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OscillationsArgs {
    #[command(flatten)]
    pub common: Common,
    /// First sample index (default N/100).
    #[arg(long)]
    pub from: Option<usize>,
    /// Last sample index (default N).
    #[arg(long)]
    pub to: Option<usize>,
    /// Number of geometrically spaced samples (default 400).
    #[arg(long)]
    pub samples: Option<usize>,
    /// difference | ratio | normalized
    #[arg(long)]
    pub mode: Option<String>,
    /// Override the normalization power of `normalized` mode.
    #[arg(long)]
    pub power: Option<String>,
    /// Where to write the fit as JSON.
    #[arg(long)]
    pub fit_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JuliaArgs {
    #[command(flatten)]
    pub common: Common,
    /// Image width in pixels (default 600)
    #[arg(long)]
    pub width: Option<usize>,
    /// Image height in pixels (default 480)
    #[arg(long)]
    pub height: Option<usize>,
    /// Left edge of the plotted region (default -3.5)
    #[arg(long, allow_hyphen_values = true)]
    pub re_min: Option<f64>,
    /// Right edge (default 2.5)
    #[arg(long, allow_hyphen_values = true)]
    pub re_max: Option<f64>,
    /// Bottom edge (default -2.4)
    #[arg(long, allow_hyphen_values = true)]
    pub im_min: Option<f64>,
    /// Top edge (default 2.4)
    #[arg(long, allow_hyphen_values = true)]
    pub im_max: Option<f64>,
    /// Iteration cap; points that never escape are drawn white (default 200)
    #[arg(long)]
    pub max_iter: Option<u32>,
    /// Modulus beyond which an orbit counts as escaped (default 50)
    #[arg(long)]
    pub escape_radius: Option<f64>,
}

fn resolve(common: &Common) -> Result<(Resolved, FileConfig)> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let env = std::env::var(DIGITS_ENV).ok();
    let digits = resolve_digits(common.digits, file.digits, env.as_deref())?;
    let ctx = PrecisionContext::new(digits)?;
    let route_text = common.route.clone().or_else(|| file.route.clone());
    let resolved = Resolved {
        ctx,
        kernel: common.kernel.clone().or_else(|| file.kernel.clone()),
        n: common.n.or(file.n),
        route: parse_route(route_text.as_deref())?,
        out: common.out.clone().or_else(|| file.out.clone()),
    };
    Ok((resolved, file))
}

/// Executes a parsed command. `Ok(false)` means the command ran but its
/// checks failed.
pub fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Coeffs(a) => {
            let (r, _) = resolve(&a.common)?;
            commands::coeffs(&r).map(|_| true)
        }
        Command::Asym(a) => {
            let (r, f) = resolve(&a.common)?;
            commands::asym(&r, a.terms.or(f.terms), a.estimate_n.or(f.estimate_n)).map(|_| true)
        }
        Command::Roots(a) => {
            let (r, f) = resolve(&a.common)?;
            let opts = commands::RootsOptions {
                binomial_m: a.binomial_m.or(f.binomial_m),
                tail_a: a.tail_a.clone().or(f.tail_a),
                count: a.count.or(f.count).unwrap_or(1),
            };
            commands::roots(&r, &opts).map(|_| true)
        }
        Command::Validate(a) => {
            let (r, f) = resolve(&a.common)?;
            commands::validate(&r, a.table.clone().or(f.table).as_deref())
        }
        Command::Oscillations(a) => {
            let (r, f) = resolve(&a.common)?;
            let opts = commands::OscillationOptions {
                from: a.from.or(f.from),
                to: a.to.or(f.to),
                samples: a.samples.or(f.samples).unwrap_or(400),
                mode: a.mode.clone().or(f.mode),
                power: a.power.clone().or(f.power),
                fit_out: a.fit_out.clone().or(f.fit_out),
            };
            commands::oscillations(&r, &opts).map(|_| true)
        }
        Command::Julia(a) => {
            let (r, f) = resolve(&a.common)?;
            let d = crate::analysis::JuliaParams::default();
            let params = crate::analysis::JuliaParams {
                width: a.width.or(f.width).unwrap_or(d.width),
                height: a.height.or(f.height).unwrap_or(d.height),
                re_range: (
                    a.re_min.or(f.re_min).unwrap_or(d.re_range.0),
                    a.re_max.or(f.re_max).unwrap_or(d.re_range.1),
                ),
                im_range: (
                    a.im_min.or(f.im_min).unwrap_or(d.im_range.0),
                    a.im_max.or(f.im_max).unwrap_or(d.im_range.1),
                ),
                max_iter: a.max_iter.or(f.max_iter).unwrap_or(d.max_iter),
                escape_radius: a.escape_radius.or(f.escape_radius).unwrap_or(d.escape_radius),
            };
            commands::julia(&r, &params).map(|_| true)
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("ratiolim: validation failed");
            3
        }
        Err(e) => {
            eprintln!("ratiolim: {e}");
            e.exit_code()
        }
    }
}

/// Reports a usage problem found after parsing.
fn usage(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}
