//! Experiment configuration: a JSON file, overridden by command-line flags.

use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};
use dcq_core::intersect::{AuditOptions, CorpusOptions, CurveOptions, DiskOptions, OracleOptions};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Check monotonicity, log-convexity and root growth of a weight sequence.
    SeqVerify,
    /// Associated function and its attaining index over a grid of r.
    Assoc,
    /// Certified value of a derivative of the lacunary series at one point.
    SeriesEval,
    /// Natural logs of the series coefficients.
    SeriesCoeffs,
    /// Derivative-growth profile sup|f^(j)|^(1/j) of the series.
    Fingerprint,
    /// Point of a manifold at given parameters.
    ManifoldEval,
    /// Generating check of the submanifold tangent space at a point.
    Tangent,
    /// Roots of a hypersurface along an analytic curve.
    IntersectCurve,
    /// Intersection points of an embedded manifold with an analytic disk.
    IntersectDisk,
    /// Solve, cross-check and audit every job of a corpus.
    CorpusRun,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SeqVerify => "seq-verify",
            Command::Assoc => "assoc",
            Command::SeriesEval => "series-eval",
            Command::SeriesCoeffs => "series-coeffs",
            Command::Fingerprint => "fingerprint",
            Command::ManifoldEval => "manifold-eval",
            Command::Tangent => "tangent",
            Command::IntersectCurve => "intersect-curve",
            Command::IntersectDisk => "intersect-disk",
            Command::CorpusRun => "corpus-run",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Solver knobs shared by the intersection commands; `eps` lives at the top level.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntersectKnobs {
    pub curve: CurveOptions,
    pub disk: DiskOptions,
    pub oracle: OracleOptions,
    pub audit: AuditOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    /// Weight sequence: `ilog:k=<1..3>`, `custom:@<file.csv>` or `custom:<v1>,<v2>,...`.
    pub seq: String,
    pub j_lo: u64,
    pub j_hi: u64,
    /// `lo:hi:geometric|linear:count`, a comma list, or one value; `2^40` notation allowed.
    pub r: String,
    pub jmax: u64,
    pub start: u32,
    pub scale: f64,
    pub x: f64,
    pub deriv: u32,
    pub eps: f64,
    /// Coefficient indices: `a..b` (inclusive), a comma list, or one index.
    pub n: String,
    /// Highest derivative order of the fingerprint.
    pub orders: u32,
    pub lo: f64,
    pub hi: f64,
    pub grid: usize,
    /// Fingerprint tolerance relative to `max(1, scale * M_j)`.
    pub rel_eps: f64,
    /// Manifold description (JSON).
    pub spec: Option<PathBuf>,
    /// Comma-separated manifold parameters.
    pub params: Option<String>,
    /// Curve description (JSON).
    pub curve: Option<PathBuf>,
    /// Disk description (JSON).
    pub disk: Option<PathBuf>,
    /// Corpus file (JSON); the built-in standard corpus when absent.
    pub corpus: Option<PathBuf>,
    pub jobs: usize,
    pub format: Format,
    /// Output directory; not echoed, so runs into different directories stay byte-identical.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub intersect: IntersectKnobs,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            seq: "ilog:k=1".into(),
            j_lo: 1,
            j_hi: 500,
            r: "2:2^40:geometric:36".into(),
            jmax: dcq_core::assoc::DEFAULT_J_MAX,
            start: 1,
            scale: 1.0,
            x: 0.3,
            deriv: 0,
            eps: 1e-10,
            n: "1..40".into(),
            orders: 40,
            lo: 0.0,
            hi: std::f64::consts::FRAC_PI_4,
            grid: 1000,
            rel_eps: 1e-10,
            spec: None,
            params: None,
            curve: None,
            disk: None,
            corpus: None,
            jobs: 1,
            format: Format::Csv,
            out: None,
            intersect: IntersectKnobs::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses a config file; errors name the offending key path.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::validation(format!("config key '{path}'"), e.into_inner().to_string())
        })
    }

    pub fn corpus_options(&self) -> CorpusOptions {
        CorpusOptions {
            eps: self.eps,
            curve: self.intersect.curve.clone(),
            disk: self.intersect.disk.clone(),
            oracle: self.intersect.oracle.clone(),
            audit: self.intersect.audit.clone(),
        }
    }

    /// Serialized form embedded in every output.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Parses `2`, `1e6` or `b^e` and returns the natural log.
fn parse_ln(s: &str) -> Option<f64> {
    let s = s.trim();
    let ln = match s.split_once('^') {
        Some((b, e)) => e.trim().parse::<f64>().ok()? * b.trim().parse::<f64>().ok()?.ln(),
        None => s.parse::<f64>().ok()?.ln(),
    };
    ln.is_finite().then_some(ln)
}

/// The `ln r` values of an r-grid spec.
pub fn parse_r_grid(spec: &str) -> Result<Vec<f64>, String> {
    let bad = |why: &str| format!("bad r grid '{spec}': {why}");
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [lo, hi, kind, count] => {
            let lo_ln = parse_ln(lo).ok_or_else(|| bad("lower end is not a positive number"))?;
            let hi_ln = parse_ln(hi).ok_or_else(|| bad("upper end is not a positive number"))?;
            let count: usize = count
                .trim()
                .parse()
                .ok()
                .filter(|&c| c >= 1)
                .ok_or_else(|| bad("count must be a positive integer"))?;
            if hi_ln < lo_ln {
                return Err(bad("upper end is below lower end"));
            }
            let step = |i: usize| {
                if count == 1 {
                    0.0
                } else {
                    i as f64 / (count - 1) as f64
                }
            };
            match kind.trim() {
                "geometric" => Ok((0..count)
                    .map(|i| lo_ln + step(i) * (hi_ln - lo_ln))
                    .collect()),
                "linear" => {
                    let (a, b) = (lo_ln.exp(), hi_ln.exp());
                    Ok((0..count).map(|i| (a + step(i) * (b - a)).ln()).collect())
                }
                other => Err(bad(&format!(
                    "spacing '{other}' is not geometric or linear"
                ))),
            }
        }
        [list] => list
            .split(',')
            .map(|v| parse_ln(v).ok_or_else(|| bad(&format!("'{v}' is not a positive number"))))
            .collect(),
        _ => Err(bad("expected lo:hi:geometric|linear:count")),
    }
}

/// Indices of an inclusive range `a..b` (or `a..=b`), a comma list, or one index.
pub fn parse_index_range(spec: &str) -> Result<Vec<u32>, String> {
    let bad = |why: &str| format!("bad index range '{spec}': {why}");
    let num = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| bad(&format!("'{}' is not a non-negative integer", s.trim())))
    };
    if let Some((a, b)) = spec.split_once("..") {
        let (a, b) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
        if b < a {
            return Err(bad("upper end is below lower end"));
        }
        return Ok((a..=b).collect());
    }
    spec.split(',').map(num).collect()
}

pub fn parse_params(spec: &str) -> Result<Vec<f64>, String> {
    spec.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("'{}' is not a finite number", v.trim()))
        })
        .collect()
}
