use std::collections::HashSet;
use std::f64::consts::TAU;

use nalgebra::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::audit::{discreteness_audit, AuditOptions, AuditReport};
use super::curve::{curve_hypersurface_intersect, CurveOptions};
use super::disk::{disk_manifold_intersect, DiskOptions};
use super::oracle::{curve_oracle, disk_oracle, Oracle1d, Oracle2d, OracleOptions};
use super::shapes::{AnalyticCurve, AnalyticDisk, ComplexPoly, Component};
use super::IntersectionReport;
use crate::error::{Error, Result};
use crate::geometry::{EmbeddingSpec, HypersurfaceSpec, Manifold, ManifoldFile, ManifoldVariant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JobShape {
    Curve { curve: AnalyticCurve },
    Disk { disk: AnalyticDisk },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Curve,
    Disk,
}

impl JobShape {
    pub fn kind(&self) -> JobKind {
        match self {
            JobShape::Curve { .. } => JobKind::Curve,
            JobShape::Disk { .. } => JobKind::Disk,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            JobShape::Curve { curve } => curve.is_constant(),
            JobShape::Disk { disk } => disk.is_constant(),
        }
    }
}

/// One intersection experiment: a curve against a hypersurface or a disk against an embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusJob {
    /// Unique key; also the file stem of the job's report.
    pub name: String,
    pub target: ManifoldFile,
    pub shape: JobShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corpus {
    pub jobs: Vec<CorpusJob>,
}

impl Corpus {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Corpus =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("corpus: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for job in &self.jobs {
            let ok = !job.name.is_empty()
                && job
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            if !ok {
                return Err(Error::Parse(format!(
                    "job name {:?} must be non-empty [A-Za-z0-9_-]",
                    job.name
                )));
            }
            if !seen.insert(job.name.as_str()) {
                return Err(Error::Parse(format!("duplicate job name {:?}", job.name)));
            }
            match &job.shape {
                JobShape::Curve { curve } => curve.validate()?,
                JobShape::Disk { disk } => disk.validate()?,
            }
            match (job.shape.kind(), job.target.variant) {
                (JobKind::Curve, ManifoldVariant::Hypersurface) => {}
                (JobKind::Disk, v) if v != ManifoldVariant::Hypersurface => {}
                (kind, v) => {
                    return Err(Error::Parse(format!(
                        "job {:?}: a {kind:?} cannot target {v:?}",
                        job.name
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusOptions {
    pub eps: f64,
    pub curve: CurveOptions,
    pub disk: DiskOptions,
    pub oracle: OracleOptions,
    pub audit: AuditOptions,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            eps: 1e-10,
            curve: CurveOptions::default(),
            disk: DiskOptions::default(),
            oracle: OracleOptions::default(),
            audit: AuditOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OracleResult {
    Curve(Oracle1d),
    Disk(Oracle2d),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobReport {
    pub job: String,
    pub kind: JobKind,
    /// Every component of the shape is constant; such jobs are expected to be degenerate when on the manifold.
    pub constant: bool,
    pub report: Option<IntersectionReport>,
    pub oracle: Option<OracleResult>,
    /// Adaptive count equals the oracle count; for an ambiguous 2-D oracle, lies within its range.
    pub oracle_agreement: Option<bool>,
    pub audit: Option<AuditReport>,
    pub passed: bool,
    pub error: Option<String>,
}

impl JobReport {
    pub fn roots(&self) -> Option<usize> {
        self.report.as_ref().map(|r| r.roots.len())
    }
}

fn failed(job: &CorpusJob, e: Error) -> JobReport {
    JobReport {
        job: job.name.clone(),
        kind: job.shape.kind(),
        constant: job.shape.is_constant(),
        report: None,
        oracle: None,
        oracle_agreement: None,
        audit: None,
        passed: false,
        error: Some(e.to_string()),
    }
}

/// Solves one job, runs its oracle and audits the result. Numeric failures are recorded, not raised.
pub fn run_job(job: &CorpusJob, opts: &CorpusOptions) -> JobReport {
    match run_job_inner(job, opts) {
        Ok(r) => r,
        Err(e) => failed(job, e),
    }
}

fn run_job_inner(job: &CorpusJob, opts: &CorpusOptions) -> Result<JobReport> {
    let target = job.target.build()?;
    let (report, oracle, agreement) = match (&job.shape, &target) {
        (JobShape::Curve { curve }, Manifold::Hypersurface(h)) => {
            let rep = curve_hypersurface_intersect(curve, h, opts.eps, &opts.curve)?;
            let o = curve_oracle(curve, h, opts.oracle.density_1d)?;
            let agree = o.count == rep.roots.len();
            (rep, OracleResult::Curve(o), agree)
        }
        (JobShape::Disk { disk }, Manifold::Embedding(spec)) => {
            let rep = disk_manifold_intersect(disk, spec, opts.eps, &opts.disk)?;
            let o = disk_oracle(disk, spec, opts.oracle.density_2d, &opts.oracle.thresholds)?;
            let n = rep.roots.len();
            let lo = o.counts.iter().copied().min().unwrap_or(0);
            let hi = o.counts.iter().copied().max().unwrap_or(0);
            let agree = if o.ambiguous {
                lo <= n && n <= hi
            } else {
                o.count == n
            };
            (rep, OracleResult::Disk(o), agree)
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "job {:?}: shape does not match its target",
                job.name
            )))
        }
    };
    let constant = job.shape.is_constant();
    let (audit, passed) = if report.degenerate {
        (None, constant)
    } else {
        let a = discreteness_audit(&report, opts.audit.window_for(&report), opts.audit.levels);
        let ok = a.passed && agreement && report.residual_ok;
        (Some(a), ok)
    };
    Ok(JobReport {
        job: job.name.clone(),
        kind: job.shape.kind(),
        constant,
        report: Some(report),
        oracle: Some(oracle),
        oracle_agreement: Some(agreement),
        audit,
        passed,
        error: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusOutcome {
    pub reports: Vec<JobReport>,
    pub passed: bool,
}

/// Runs every job on a pool of `workers` threads; reports keep the corpus order.
pub fn run_corpus(corpus: &Corpus, opts: &CorpusOptions, workers: usize) -> Result<CorpusOutcome> {
    corpus.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let reports: Vec<JobReport> =
        pool.install(|| corpus.jobs.par_iter().map(|j| run_job(j, opts)).collect());
    let passed = reports.iter().all(|r| r.passed);
    Ok(CorpusOutcome { reports, passed })
}

fn hyper(m: usize) -> ManifoldFile {
    ManifoldFile {
        variant: ManifoldVariant::Hypersurface,
        n: m,
        a: None,
        series: None,
        g_series: None,
        convex: None,
        radius: None,
        scale_policy: crate::geometry::ScalePolicy::Budget,
    }
}

fn thm1(n: usize) -> ManifoldFile {
    ManifoldFile {
        variant: ManifoldVariant::FPerturbed,
        ..hyper(n)
    }
}

fn poly(c: &[f64]) -> Component {
    Component::poly(c.to_vec())
}

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

/// `z0 + sum_k terms[k-1] ζ^k` coordinatewise, with `z0` in real coordinates.
fn disk_at(z0: &[f64], terms: &[Vec<Complex<f64>>], radius: f64) -> Result<AnalyticDisk> {
    let n = z0.len() / 2;
    let comps = (0..n)
        .map(|k| {
            let mut coeffs = vec![c(z0[2 * k], z0[2 * k + 1])];
            coeffs.extend(terms.iter().map(|t| t[k]));
            ComplexPoly::new(coeffs)
        })
        .collect();
    AnalyticDisk::new(comps, radius)
}

/// Projects `u` onto the complex orthogonal complement of `z0`, so `|z0 + ζ v|² = |z0|² + |ζ|² |v|²`.
fn complex_tangent(z0: &[f64], u: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let z: Vec<Complex<f64>> = z0.chunks(2).map(|p| c(p[0], p[1])).collect();
    let inner: Complex<f64> = u.iter().zip(&z).map(|(a, b)| a * b.conj()).sum();
    let norm2: f64 = z.iter().map(|b| b.norm_sqr()).sum();
    u.iter()
        .zip(&z)
        .map(|(a, b)| a - b * (inner / norm2))
        .collect()
}

/// The built-in corpus: 22 curves against the graph hypersurfaces for m = 2, 3, 5 and
/// 12 disks against the torus manifolds for n = 2, 3. Each group contains constant members.
pub fn standard_corpus() -> Result<Corpus> {
    let mut jobs = Vec::new();
    let mut curve = |name: &str, m: usize, comps: Vec<Component>, domain: [f64; 2]| -> Result<()> {
        jobs.push(CorpusJob {
            name: name.into(),
            target: hyper(m),
            shape: JobShape::Curve {
                curve: AnalyticCurve::new(comps, domain)?,
            },
        });
        Ok(())
    };
    let h2 = HypersurfaceSpec::standard(2)?;
    let f1 = &h2.components()[0];
    let above2 = 1.01 * f1.value_bound() + 0.01;
    let x0 = 0.3;
    curve(
        "c01_above",
        2,
        vec![poly(&[0.0, 1.0]), poly(&[above2])],
        [-4.0, 4.0],
    )?;
    curve(
        "c02_midline",
        2,
        vec![poly(&[0.0, 1.0]), poly(&[0.0])],
        [-3.0, 3.0],
    )?;
    curve(
        "c03_slope",
        2,
        vec![poly(&[0.0, 1.0]), poly(&[0.0, 0.05])],
        [-3.0, 3.0],
    )?;
    curve(
        "c04_parabola",
        2,
        vec![poly(&[0.0, 1.0]), poly(&[-0.2, 0.0, 0.1])],
        [-2.0, 2.0],
    )?;
    curve(
        "c05_ellipse",
        2,
        vec![
            Component::trig(0.0, vec![2.0], vec![0.0]),
            Component::trig(0.0, vec![0.0], vec![0.2]),
        ],
        [0.0, TAU],
    )?;
    curve(
        "c06_cubic",
        2,
        vec![poly(&[0.0, -1.0, 0.0, 1.0]), poly(&[0.0, 0.1])],
        [-1.5, 1.5],
    )?;
    curve(
        "c07_wave",
        2,
        vec![
            poly(&[0.0, 1.0]),
            Component::trig(0.0, vec![0.0, 0.0, 0.1], vec![0.05, 0.0, 0.0]),
        ],
        [-3.0, 3.0],
    )?;
    curve(
        "c08_sextic",
        2,
        vec![
            poly(&[0.0, 1.0]),
            poly(&[-0.02, 0.0, 0.0, 0.0, 0.0, 0.0, 0.01]),
        ],
        [-2.0, 2.0],
    )?;
    curve(
        "c09_point_on",
        2,
        vec![poly(&[x0]), poly(&[f1.value(x0)])],
        [0.0, 1.0],
    )?;

    let h3 = HypersurfaceSpec::standard(3)?;
    let above3: f64 = h3.component_bounds().iter().sum::<f64>() * 1.01 + 0.01;
    curve(
        "c10_line",
        3,
        vec![poly(&[0.0, 1.0]), poly(&[0.0, 0.5]), poly(&[0.0])],
        [-3.0, 3.0],
    )?;
    curve(
        "c11_antidiag",
        3,
        vec![poly(&[0.0, 1.0]), poly(&[0.0, -1.0]), poly(&[0.1])],
        [-3.0, 3.0],
    )?;
    curve(
        "c12_helix",
        3,
        vec![
            Component::trig(0.0, vec![1.0], vec![0.0]),
            Component::trig(0.0, vec![0.0], vec![1.0]),
            Component::trig(0.0, vec![0.0, 0.05], vec![0.0, 0.0]),
        ],
        [0.0, TAU],
    )?;
    curve(
        "c13_fold",
        3,
        vec![poly(&[0.0, 0.0, 1.0]), poly(&[0.0, 1.0]), poly(&[0.0, 0.2])],
        [-2.0, 2.0],
    )?;
    curve(
        "c14_quartic",
        3,
        vec![
            poly(&[0.0, 1.0]),
            poly(&[1.0, 0.0, -1.0]),
            poly(&[-0.1, 0.0, 0.0, 0.0, 0.02]),
        ],
        [-2.0, 2.0],
    )?;
    curve(
        "c15_quintic",
        3,
        vec![
            poly(&[1.0, 2.0]),
            poly(&[0.0, 0.0, 0.0, 1.0]),
            poly(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.03]),
        ],
        [-1.2, 1.2],
    )?;
    curve(
        "c16_above",
        3,
        vec![poly(&[0.0, 1.0]), poly(&[0.3]), poly(&[above3])],
        [-3.0, 3.0],
    )?;

    curve(
        "c17_line",
        5,
        vec![
            poly(&[0.0, 1.0]),
            poly(&[0.0, 2.0]),
            poly(&[0.0, -1.0]),
            poly(&[0.0, 0.5]),
            poly(&[0.0]),
        ],
        [-2.0, 2.0],
    )?;
    curve(
        "c18_torus_knot",
        5,
        vec![
            Component::trig(0.0, vec![1.0], vec![0.0]),
            Component::trig(0.0, vec![0.0], vec![1.0]),
            Component::trig(0.0, vec![0.0, 1.0], vec![0.0, 0.0]),
            Component::trig(0.0, vec![0.0, 0.0], vec![0.0, 1.0]),
            Component::trig(0.1, vec![], vec![]),
        ],
        [0.0, TAU],
    )?;
    curve(
        "c19_moment",
        5,
        vec![
            poly(&[0.0, 1.0]),
            poly(&[0.0, 0.0, 1.0]),
            poly(&[0.0, 0.0, 0.0, 1.0]),
            poly(&[0.0, -1.0]),
            poly(&[0.0, 0.2]),
        ],
        [-1.5, 1.5],
    )?;
    curve(
        "c20_sextic",
        5,
        vec![
            poly(&[0.0, 1.0]),
            poly(&[0.1]),
            poly(&[0.2]),
            poly(&[0.3]),
            poly(&[-0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.05]),
        ],
        [-2.0, 2.0],
    )?;
    curve(
        "c21_lissajous",
        5,
        vec![
            Component::trig(0.0, vec![0.0], vec![3.0]),
            Component::trig(0.0, vec![2.0], vec![0.0]),
            Component::trig(0.0, vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]),
            Component::trig(0.0, vec![1.0], vec![0.0]),
            Component::trig(0.0, vec![0.0, 0.0], vec![0.0, 0.1]),
        ],
        [0.0, TAU],
    )?;
    curve(
        "c22_point_off",
        5,
        vec![
            poly(&[0.1]),
            poly(&[0.2]),
            poly(&[0.3]),
            poly(&[0.4]),
            poly(&[5.0]),
        ],
        [0.0, 1.0],
    )?;

    let mut disk = |name: &str, n: usize, d: AnalyticDisk| {
        jobs.push(CorpusJob {
            name: name.into(),
            target: thm1(n),
            shape: JobShape::Disk { disk: d },
        });
    };
    let r2 = EmbeddingSpec::standard_thm1(2)?;
    let p = |th: &[f64]| r2.eval(th);
    disk(
        "d01_line",
        2,
        disk_at(&p(&[0.4, 1.1])?, &[vec![c(0.3, -0.2), c(0.1, 0.5)]], 3.0)?,
    );
    disk(
        "d02_line",
        2,
        disk_at(
            &p(&[2.0, -0.7])?,
            &[vec![c(-0.25, 0.4), c(0.35, 0.15)]],
            0.5,
        )?,
    );
    disk(
        "d03_quadratic",
        2,
        disk_at(
            &p(&[1.2, 2.5])?,
            &[
                vec![c(0.2, 0.3), c(-0.3, 0.1)],
                vec![c(0.0, 0.2), c(-0.1, 0.0)],
            ],
            3.0,
        )?,
    );
    disk(
        "d04_cubic",
        2,
        disk_at(
            &p(&[-1.0, 0.3])?,
            &[
                vec![c(0.1, -0.3), c(0.4, 0.2)],
                vec![c(0.0, 0.0), c(0.0, 0.0)],
                vec![c(0.2, 0.0), c(0.0, -0.3)],
            ],
            1.5,
        )?,
    );
    let z5 = p(&[0.7, 1.9])?;
    disk(
        "d05_tangent",
        2,
        disk_at(
            &z5,
            &[complex_tangent(&z5, &[c(0.2, 0.4), c(0.5, -0.1)])],
            0.5,
        )?,
    );
    let z6: Vec<f64> = p(&[0.4, 1.1])?.iter().map(|v| v * 1.05).collect();
    disk(
        "d06_outside",
        2,
        disk_at(&z6, &[vec![c(0.1, 0.1), c(-0.1, 0.2)]], 0.5)?,
    );
    disk("d07_point_on", 2, disk_at(&p(&[0.4, 1.1])?, &[], 0.5)?);
    disk(
        "d08_quartic",
        2,
        disk_at(
            &p(&[2.6, 0.9])?,
            &[
                vec![c(0.3, 0.1), c(0.0, 0.3)],
                vec![c(0.0, 0.0), c(0.1, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 0.0)],
                vec![c(0.2, 0.2), c(0.0, 0.1)],
            ],
            1.5,
        )?,
    );
    let r3 = EmbeddingSpec::standard_thm1(3)?;
    let q = |th: &[f64]| r3.eval(th);
    disk(
        "d09_line",
        3,
        disk_at(
            &q(&[0.3, 0.8, -0.5, 1.2])?,
            &[vec![c(0.2, -0.1), c(0.3, 0.2), c(-0.1, 0.4)]],
            0.5,
        )?,
    );
    disk(
        "d10_quadratic",
        3,
        disk_at(
            &q(&[1.5, -1.0, 2.2, 0.6])?,
            &[
                vec![c(0.1, 0.3), c(-0.2, 0.1), c(0.3, 0.0)],
                vec![c(0.0, 0.1), c(0.1, 0.0), c(0.0, -0.1)],
            ],
            0.5,
        )?,
    );
    let z11 = q(&[0.6, 1.3, -0.4, 2.0])?;
    disk(
        "d11_tangent",
        3,
        disk_at(
            &z11,
            &[complex_tangent(
                &z11,
                &[c(0.3, 0.1), c(-0.2, 0.3), c(0.4, 0.2)],
            )],
            0.5,
        )?,
    );
    disk(
        "d12_line",
        3,
        disk_at(
            &q(&[-0.9, 0.4, 1.0, -1.3])?,
            &[vec![c(-0.3, 0.2), c(0.1, -0.2), c(0.2, 0.3)]],
            0.5,
        )?,
    );
    let corpus = Corpus { jobs };
    corpus.validate()?;
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_corpus_shape() {
        let c = standard_corpus().unwrap();
        let curves: Vec<_> = c
            .jobs
            .iter()
            .filter(|j| j.shape.kind() == JobKind::Curve)
            .collect();
        let disks: Vec<_> = c
            .jobs
            .iter()
            .filter(|j| j.shape.kind() == JobKind::Disk)
            .collect();
        assert!(curves.len() >= 20 && disks.len() >= 10);
        for m in [2, 3, 5] {
            assert!(curves.iter().any(|j| j.target.n == m));
        }
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(Corpus::from_json(&text).unwrap(), c);
    }

    #[test]
    fn tangent_direction_keeps_the_norm() {
        let z0 = [3.0, -1.0, 0.5, 2.0];
        let v = complex_tangent(&z0, &[c(0.2, 0.4), c(0.5, -0.1)]);
        let zeta = c(0.3, -0.7);
        let norm2: f64 = z0
            .chunks(2)
            .zip(&v)
            .map(|(p, w)| (c(p[0], p[1]) + zeta * w).norm_sqr())
            .sum();
        let expect = z0.iter().map(|x| x * x).sum::<f64>()
            + zeta.norm_sqr() * v.iter().map(|w| w.norm_sqr()).sum::<f64>();
        assert!((norm2 - expect).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_corpora() {
        let c = standard_corpus().unwrap();
        let mut dup = c.clone();
        dup.jobs.push(dup.jobs[0].clone());
        assert!(dup.validate().is_err());
        let mut mismatch = c.clone();
        mismatch.jobs[0].target = thm1(2);
        assert!(mismatch.validate().is_err());
        let err = Corpus::from_json(
            r#"{"jobs":[{"name":"x","target":{"variant":"hypersurface","n":2},
            "shape":{"kind":"curve","curve":{"components":[{"type":"poly","coeffs":[1]}],"domain":[0,1]}}}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("degree"), "{err}");
    }
}
