//! Dispatch of one configured command.

use std::path::Path;
use std::sync::Arc;

use dcq_core::assoc::nu_growth_profile_ln;
use dcq_core::geometry::{generating_check, EmbeddingSpec, Manifold, ManifoldFile};
use dcq_core::intersect::{
    curve_hypersurface_intersect, discreteness_audit, disk_manifold_intersect, run_corpus,
    standard_corpus, AnalyticCurve, AnalyticDisk, AuditReport, Corpus, IntersectionReport,
};
use dcq_core::lacunary::{series_fingerprint, LacunarySeries};
use dcq_core::WeightSequence;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::config::{parse_index_range, parse_params, parse_r_grid, Command, ExperimentConfig};
use crate::error::{CliError, Keyed};
use crate::output::{cell, num, opt_cell, render_csv, render_json, Sink, Table};

pub const ASSOC_HEADER: &[&str] = &["r", "nu", "log_tau", "nu_over_ln_r"];
pub const COEFFS_HEADER: &[&str] = &["n", "log_a_n"];
pub const SUMMARY_HEADER: &[&str] = &["job", "roots", "min_gap", "degenerate", "oracle_agreement"];
pub const VERIFY_HEADER: &[&str] = &["check", "passed", "first_violation"];
pub const EVAL_HEADER: &[&str] = &["x", "deriv", "value", "error_bound"];
pub const FINGERPRINT_HEADER: &[&str] = &["j", "sup_abs", "root", "weight_root"];
pub const MANIFOLD_HEADER: &[&str] = &["coordinate", "value"];
pub const TANGENT_HEADER: &[&str] = &["rank", "ambient", "generating"];
pub const CURVE_ROOTS_HEADER: &[&str] = &["t", "residual", "uncertainty"];
pub const DISK_ROOTS_HEADER: &[&str] = &["re", "im", "residual", "uncertainty"];

/// Runs the configured command and writes its artifacts to `sink`.
pub fn run(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let command = cfg
        .command
        .ok_or_else(|| CliError::validation("command", "no command given"))?;
    let stem = command.name();
    match command {
        Command::SeqVerify => seq_verify(cfg, sink, stem),
        Command::Assoc => assoc(cfg, sink, stem),
        Command::SeriesEval => series_eval(cfg, sink, stem),
        Command::SeriesCoeffs => series_coeffs(cfg, sink, stem),
        Command::Fingerprint => fingerprint(cfg, sink, stem),
        Command::ManifoldEval => manifold_eval(cfg, sink, stem),
        Command::Tangent => tangent(cfg, sink, stem),
        Command::IntersectCurve => intersect_curve(cfg, sink, stem),
        Command::IntersectDisk => intersect_disk(cfg, sink, stem),
        Command::CorpusRun => corpus_run(cfg, sink),
    }
}

fn sequence(cfg: &ExperimentConfig) -> Result<Arc<WeightSequence>, CliError> {
    WeightSequence::from_spec_str(&cfg.seq)
        .key("seq")
        .map(Arc::new)
}

fn series(cfg: &ExperimentConfig) -> Result<LacunarySeries, CliError> {
    let seq = sequence(cfg)?;
    LacunarySeries::new(seq, cfg.start, cfg.scale).key("start/scale")
}

fn read(path: &Option<std::path::PathBuf>, key: &str) -> Result<String, CliError> {
    let path = path
        .as_deref()
        .ok_or_else(|| CliError::validation(key, "a path is required"))?;
    std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(key, format!("cannot read {}: {e}", path.display())))
}

fn parse_file<T: DeserializeOwned>(text: &str, key: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::validation(format!("{key} at '{path}'"), e.into_inner())
    })
}

fn manifold(cfg: &ExperimentConfig) -> Result<Manifold, CliError> {
    let file: ManifoldFile = parse_file(&read(&cfg.spec, "spec")?, "spec")?;
    file.build().key("spec")
}

fn embedding(cfg: &ExperimentConfig) -> Result<EmbeddingSpec, CliError> {
    match manifold(cfg)? {
        Manifold::Embedding(e) => Ok(e),
        Manifold::Hypersurface(_) => Err(CliError::validation(
            "spec",
            "an embedded manifold (F_perturbed, G_torus or ThmMe_R) is required",
        )),
    }
}

fn seq_verify(cfg: &ExperimentConfig, sink: &mut Sink, stem: &str) -> Result<(), CliError> {
    let report = sequence(cfg)?.verify(cfg.j_lo, cfg.j_hi).key("j_lo/j_hi")?;
    let mut t = Table::new(VERIFY_HEADER);
    for (name, c) in [
        ("increasing", report.increasing),
        ("log_convex", report.log_convex),
        ("root_growth", report.root_growth),
    ] {
        t.push(vec![
            cell(name),
            cell(c.passed),
            opt_cell(c.first_violation),
        ]);
    }
    sink.emit(cfg, stem, &t, &report)?;
    if !report.all_passed() {
        return Err(CliError::validation(
            "seq",
            format!("sequence fails its checks on [{}, {}]", cfg.j_lo, cfg.j_hi),
        ));
    }
    Ok(())
}

fn assoc(cfg: &ExperimentConfig, sink: &mut Sink, stem: &str) -> Result<(), CliError> {
    let seq = sequence(cfg)?;
    let grid = parse_r_grid(&cfg.r).key("r")?;
    let rows = nu_growth_profile_ln(&seq, &grid, cfg.jmax).key("r")?;
    let mut t = Table::new(ASSOC_HEADER);
    for row in &rows {
        t.push(vec![
            num(row.r),
            cell(row.nu),
            num(row.log_tau),
            num(row.nu_over_ln_r),
        ]);
    }
    sink.emit(cfg, stem, &t, &rows)
}

fn series_eval(cfg: &ExperimentConfig, sink: &mut Sink, stem: &str) -> Result<(), CliError> {
    let v = series(cfg)?
        .evaluate(cfg.x, cfg.deriv, cfg.eps)
        .key("eps")?;
    let mut t = Table::new(EVAL_HEADER);
    t.push(vec![
        num(cfg.x),
        cell(cfg.deriv),
        num(v.value),
        num(v.error_bound),
    ]);
    sink.emit(cfg, stem, &t, &v)
}

#[derive(Serialize)]
struct CoeffRow {
    n: u32,
    log_a_n: f64,
}

fn series_coeffs(cfg: &ExperimentConfig, sink: &mut Sink, stem: &str) -> Result<(), CliError> {
    let s = series(cfg)?;
    let rows = parse_index_range(&cfg.n)
        .key("n")?
        .into_iter()
        .map(|n| {
            let a = s.coefficient(n).key("n")?;
            Ok(CoeffRow {
                n,
                log_a_n: a.log_mag(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new(COEFFS_HEADER);
    for r in &rows {
        t.push(vec![cell(r.n), num(r.log_a_n)]);
    }
    sink.emit(cfg, stem, &t, &rows)
}

#[derive(Serialize)]
struct FingerprintOut {
    j: u32,
    sup_abs: f64,
    root: f64,
    weight_root: f64,
}

fn fingerprint(cfg: &ExperimentConfig, sink: &mut Sink, stem: &str) -> Result<(), CliError> {
    let s = series(cfg)?;
    let rows = series_fingerprint(&s, cfg.orders, cfg.lo, cfg.hi, cfg.grid, cfg.rel_eps)
        .key("orders/lo/hi/grid")?;
    let seq = s.sequence();
    let rows = rows
        .into_iter()
        .map(|r| {
            Ok(FingerprintOut {
                j: r.j,
                sup_abs: r.sup_abs,
                root: r.root,
                weight_root: seq.log_root(r.j as u64).key("orders")?.exp(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new(FINGERPRINT_HEADER);
    for r in &rows {
        t.push(vec![
            cell(r.j),
            num(r.sup_abs),
            num(r.root),
            num(r.weight_root),
        ]);
    }
    sink.emit(cfg, stem, &t, &rows)
}

fn params(cfg: &ExperimentConfig) -> Result<Option<Vec<f64>>, CliError> {
    cfg.params
        .as_deref()
        .map(|p| parse_params(p).key("params"))
        .transpose()
}

#[derive(Serialize)]
struct Coordinate {
    coordinate: String,
    value: f64,
}

fn manifold_eval(cfg: &ExperimentConfig, sink: &mut Sink, stem: &str) -> Result<(), CliError> {
    let p =
        params(cfg)?.ok_or_else(|| CliError::validation("params", "parameters are required"))?;
    let point: Vec<Coordinate> = match manifold(cfg)? {
        Manifold::Embedding(e) => e
            .eval(&p)
            .key("params")?
            .into_iter()
            .enumerate()
            .map(|(i, value)| Coordinate {
                coordinate: format!("{}{}", if i % 2 == 0 { 'x' } else { 'y' }, i / 2 + 1),
                value,
            })
            .collect(),
        Manifold::Hypersurface(h) => {
            let mut x = p.clone();
            x.push(0.0);
            // D(x_1, ..., x_{m-1}, 0) = -sum f_j(x_j)
            let last = -h.defining(&x).key("params")?;
            *x.last_mut().expect("nonempty") = last;
            x.into_iter()
                .enumerate()
                .map(|(i, value)| Coordinate {
                    coordinate: format!("x{}", i + 1),
                    value,
                })
                .collect()
        }
    };
    let mut t = Table::new(MANIFOLD_HEADER);
    for c in &point {
        t.push(vec![c.coordinate.clone(), num(c.value)]);
    }
    sink.emit(cfg, stem, &t, &point)
}

#[derive(Serialize)]
struct TangentOut {
    params: Vec<f64>,
    rank: usize,
    ambient: usize,
    generating: bool,
    /// Tangent vectors of the submanifold, one per row.
    basis: Vec<Vec<f64>>,
}

fn tangent(cfg: &ExperimentConfig, sink: &mut Sink, stem: &str) -> Result<(), CliError> {
    let e = embedding(cfg)?;
    let p = params(cfg)?.unwrap_or_else(|| e.distinguished_point());
    let sub = e.submanifold_m();
    let basis = e.tangent_basis(&p, Some(&sub)).key("params")?;
    let rep = generating_check(&basis).key("params")?;
    let out = TangentOut {
        params: p,
        rank: rep.rank,
        ambient: rep.ambient,
        generating: rep.generating,
        basis: basis
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect(),
    };
    let mut t = Table::new(TANGENT_HEADER);
    t.push(vec![
        cell(out.rank),
        cell(out.ambient),
        cell(out.generating),
    ]);
    sink.emit(cfg, stem, &t, &out)
}

#[derive(Serialize)]
struct IntersectOut {
    report: IntersectionReport,
    audit: AuditReport,
}

fn audited(cfg: &ExperimentConfig, report: IntersectionReport) -> IntersectOut {
    let a = &cfg.intersect.audit;
    let audit = discreteness_audit(&report, a.window_for(&report), a.levels);
    IntersectOut { report, audit }
}

fn intersect_curve(cfg: &ExperimentConfig, sink: &mut Sink, stem: &str) -> Result<(), CliError> {
    let h = match manifold(cfg)? {
        Manifold::Hypersurface(h) => h,
        Manifold::Embedding(_) => {
            return Err(CliError::validation(
                "spec",
                "curve intersection needs a hypersurface spec",
            ))
        }
    };
    let curve: AnalyticCurve = parse_file(&read(&cfg.curve, "curve")?, "curve")?;
    curve.validate().key("curve")?;
    let report =
        curve_hypersurface_intersect(&curve, &h, cfg.eps, &cfg.intersect.curve).key("eps")?;
    let mut t = Table::new(CURVE_ROOTS_HEADER);
    for r in &report.roots {
        t.push(vec![num(r.param[0]), num(r.residual), num(r.uncertainty)]);
    }
    sink.emit(cfg, stem, &t, &audited(cfg, report))
}

fn intersect_disk(cfg: &ExperimentConfig, sink: &mut Sink, stem: &str) -> Result<(), CliError> {
    let e = embedding(cfg)?;
    let disk: AnalyticDisk = parse_file(&read(&cfg.disk, "disk")?, "disk")?;
    disk.validate().key("disk")?;
    let report = disk_manifold_intersect(&disk, &e, cfg.eps, &cfg.intersect.disk).key("eps")?;
    let mut t = Table::new(DISK_ROOTS_HEADER);
    for r in &report.roots {
        t.push(vec![
            num(r.param[0]),
            num(r.param[1]),
            num(r.residual),
            num(r.uncertainty),
        ]);
    }
    sink.emit(cfg, stem, &t, &audited(cfg, report))
}

fn corpus_run(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    if cfg.jobs == 0 {
        return Err(CliError::validation(
            "jobs",
            "at least one worker is required",
        ));
    }
    let corpus = match &cfg.corpus {
        Some(path) => Corpus::from_json(&read(&Some(path.clone()), "corpus")?).key("corpus")?,
        None => standard_corpus().key("corpus")?,
    };
    let outcome = run_corpus(&corpus, &cfg.corpus_options(), cfg.jobs).key("corpus")?;

    let mut t = Table::new(SUMMARY_HEADER);
    for r in &outcome.reports {
        let rep = r.report.as_ref();
        t.push(vec![
            r.job.clone(),
            opt_cell(r.roots()),
            rep.and_then(|x| x.min_gap).map_or_else(String::new, num),
            opt_cell(rep.map(|x| x.degenerate)),
            opt_cell(r.oracle_agreement),
        ]);
    }
    match cfg.format {
        crate::config::Format::Csv => sink.write("summary.csv", &render_csv(cfg, &t)?)?,
        crate::config::Format::Json => {
            let rows: Vec<_> = outcome.reports.iter().map(Summary::from).collect();
            sink.write("summary.json", &render_json(cfg, "result", &rows))?
        }
    }
    if sink.is_dir() {
        for r in &outcome.reports {
            let rel = Path::new("jobs").join(format!("{}.json", r.job));
            sink.write(&rel.to_string_lossy(), &render_json(cfg, "report", r))?;
        }
    }

    let failed: Vec<&str> = outcome
        .reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.job.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Audit(format!(
            "{} of {} jobs failed: {}",
            failed.len(),
            outcome.reports.len(),
            failed.join(", ")
        )))
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    job: &'a str,
    roots: Option<usize>,
    min_gap: Option<f64>,
    degenerate: Option<bool>,
    oracle_agreement: Option<bool>,
    passed: bool,
}

impl<'a> From<&'a dcq_core::intersect::JobReport> for Summary<'a> {
    fn from(r: &'a dcq_core::intersect::JobReport) -> Self {
        Summary {
            job: &r.job,
            roots: r.roots(),
            min_gap: r.report.as_ref().and_then(|x| x.min_gap),
            degenerate: r.report.as_ref().map(|x| x.degenerate),
            oracle_agreement: r.oracle_agreement,
            passed: r.passed,
        }
    }
}
