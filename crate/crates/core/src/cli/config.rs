//! Run configuration: command-line flags layered over an optional JSON file.
//!
//! Every flag has a snake_case key of the same name in the file. Flags win
//! over the file; the precision falls back to `RATIOLIM_DIGITS` and then to
//! the library default.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::coefficients::Route;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::precision::PrecisionContext;

pub const DIGITS_ENV: &str = "RATIOLIM_DIGITS";

/// Keys accepted in a `--config` file. Unknown keys are rejected so that a
/// misspelt option cannot silently fall back to its default.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub kernel: Option<String>,
    pub n: Option<usize>,
    pub digits: Option<u32>,
    pub route: Option<String>,
    pub out: Option<PathBuf>,
    pub terms: Option<usize>,
    pub estimate_n: Option<usize>,
    pub binomial_m: Option<u32>,
    pub tail_a: Option<String>,
    pub count: Option<usize>,
    pub table: Option<PathBuf>,
    pub from: Option<usize>,
    pub to: Option<usize>,
    pub samples: Option<usize>,
    pub mode: Option<String>,
    pub power: Option<String>,
    pub fit_out: Option<PathBuf>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub re_min: Option<f64>,
    pub re_max: Option<f64>,
    pub im_min: Option<f64>,
    pub im_max: Option<f64>,
    pub max_iter: Option<u32>,
    pub escape_radius: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
    }
}

/// Settings shared by every subcommand after merging flags and file.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub ctx: PrecisionContext,
    pub kernel: Option<String>,
    pub n: Option<usize>,
    pub route: Option<Route>,
    pub out: Option<PathBuf>,
}

impl Resolved {
    pub fn kernel(&self) -> Result<KernelSpec> {
        let text = self
            .kernel
            .as_deref()
            .ok_or_else(|| Error::Parse("missing --kernel".into()))?;
        let k = KernelSpec::parse(text, self.ctx.bits())?;
        k.validate(self.ctx.bits())?;
        Ok(k)
    }

    pub fn n_or(&self, default: usize) -> Result<usize> {
        let n = self.n.unwrap_or(default);
        if n == 0 {
            return Err(Error::Parse("--n must be at least 1".into()));
        }
        Ok(n)
    }

    pub fn n_required(&self) -> Result<usize> {
        match self.n {
            Some(_) => self.n_or(0),
            None => Err(Error::Parse("missing --n".into())),
        }
    }
}

/// Digits from flag, then file, then environment, then the default.
pub fn resolve_digits(flag: Option<u32>, file: Option<u32>, env: Option<&str>) -> Result<u32> {
    if let Some(d) = flag.or(file) {
        return Ok(d);
    }
    match env {
        Some(text) if !text.trim().is_empty() => text
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{DIGITS_ENV} must be a positive integer, got `{text}`"))),
        _ => Ok(PrecisionContext::default().digits()),
    }
}

pub fn parse_route(text: Option<&str>) -> Result<Option<Route>> {
    match text {
        None | Some("auto") => Ok(None),
        Some(r) => r.parse().map(Some),
    }
}
