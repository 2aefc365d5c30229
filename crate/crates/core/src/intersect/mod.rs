//! Intersections of the perturbed manifolds with analytic curves and disks.
//!
//! Root finding works on sampled defining functions. Curves use an adaptive
//! grid with bisection. Disks use a grid of seeds polished by damped Newton.
//! A brute-force grid oracle and a discreteness audit check the results.
//! Discreteness is only ever established down to the stamped resolution.

mod audit;
mod corpus;
mod curve;
mod disk;
mod oracle;
mod shapes;

use serde::{Deserialize, Serialize};

pub use audit::{discreteness_audit, AuditLevel, AuditOptions, AuditReport};
pub use corpus::{
    run_corpus, run_job, standard_corpus, Corpus, CorpusJob, CorpusOptions, CorpusOutcome, JobKind,
    JobReport, JobShape, OracleResult,
};
pub use curve::{curve_hypersurface_intersect, curve_residual, intersect_1d, CurveOptions};
pub use disk::{disk_manifold_intersect, DiskOptions, DiskSystem};
pub use oracle::{
    curve_oracle, disk_oracle, grid_oracle_1d, grid_oracle_2d, Oracle1d, Oracle2d, OracleOptions,
};
pub use shapes::{AnalyticCurve, AnalyticDisk, ComplexPoly, Component, MAX_DISK_DEGREE};

/// One root: a real parameter `[t]` for curves, `[Re ζ, Im ζ]` for disks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub param: Vec<f64>,
    /// Norm of the defining residual at `param`.
    pub residual: f64,
    /// Radius of the parameter interval or cluster known to contain the root.
    pub uncertainty: f64,
}

/// The tolerances and sampling a report was computed at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub eps: f64,
    /// Largest certified evaluation error of the defining function over the samples.
    pub noise: f64,
    /// Initial samples per axis.
    pub grid: usize,
    /// Distance between neighbouring initial samples.
    pub spacing: f64,
    /// Bisection width for curves, clustering radius for disks.
    pub refine_tol: f64,
    /// Total evaluations of the defining function.
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    /// Sorted lexicographically by parameter.
    pub roots: Vec<Root>,
    /// Residual minima without a sign change (possible even-order roots); not counted as roots.
    pub tangential: Vec<Root>,
    /// Smallest pairwise distance between roots; `None` with fewer than two roots.
    pub min_gap: Option<f64>,
    /// The defining function stayed below `noise + eps` on every sample.
    pub degenerate: bool,
    /// Every root satisfies `residual <= noise + 10 eps`.
    pub residual_ok: bool,
    /// Disk solver only: seeds whose final Jacobian was numerically singular.
    pub singular_seeds: usize,
    pub seeds: usize,
    pub resolution: Resolution,
}

impl IntersectionReport {
    pub fn root_count(&self) -> usize {
        self.roots.len()
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn min_gap(roots: &[Root]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let d = distance(&roots[i].param, &roots[j].param);
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    best
}

fn sort_roots(roots: &mut [Root]) {
    roots.sort_by(|a, b| {
        a.param
            .iter()
            .zip(&b.param)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}
