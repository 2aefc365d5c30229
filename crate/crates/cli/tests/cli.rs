use std::path::Path;
use std::process::{Command, Output};

use dcq_core::geometry::{Manifold, ManifoldFile};

fn dcq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcq"))
        .args(args)
        .env_remove("DCQ_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Second line of a CSV artifact; the first is the config echo.
fn header(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    lines.next().unwrap().to_string()
}

#[test]
fn assoc_writes_csv_with_exact_header() {
    let dir = tempfile::tempdir().unwrap();
    let o = dcq(&[
        "assoc",
        "--seq",
        "ilog:k=1",
        "--r",
        "2:2^40:geometric:36",
        "--jmax",
        "100000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let path = dir.path().join("assoc.csv");
    assert_eq!(header(&path), "r,nu,log_tau,nu_over_ln_r");
    assert_eq!(
        std::fs::read_to_string(&path).unwrap().lines().count(),
        2 + 36
    );
}

#[test]
fn series_coeffs_header_and_env_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dcq"))
        .args(["series-coeffs", "--n", "1..40", "--out", "csv"])
        .env("DCQ_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let path = dir.path().join("series-coeffs.csv");
    assert_eq!(header(&path), "n,log_a_n");
    let text = std::fs::read_to_string(&path).unwrap();
    let row1: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    // a_1 = tau(2)/2 = 1/4
    assert_eq!(row1[0], "1");
    assert!((row1[1].parse::<f64>().unwrap() - 0.25f64.ln()).abs() < 1e-12);
}

#[test]
fn json_output_embeds_config() {
    let o = dcq(&[
        "series-eval",
        "--x",
        "0.3",
        "--deriv",
        "1",
        "--eps",
        "1e-8",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["command"], "series-eval");
    assert_eq!(doc["config"]["deriv"], 1);
    assert!(doc["result"]["error_bound"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn validation_errors_exit_1_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"command":"assoc","intersect":{"disk":{"gird":3}}}"#,
    )
    .unwrap();
    let o = dcq(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("intersect.disk"), "{}", stderr(&o));

    let o = dcq(&["assoc", "--seq", "ilog:k=4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("dcq: seq:"), "{}", stderr(&o));

    let o = dcq(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_corpus_exits_1_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.json");
    std::fs::write(
        &corpus,
        r#"{"jobs":[{"name":"bad","target":{"variant":"hypersurface","n":2},
            "shape":{"kind":"curve","curve":{"components":[
              {"type":"poly","coeffs":[0,1]},{"type":"poly","degree":0,"coeffs":[0.2]}],
              "domain":[0,1]}}}]}"#,
    )
    .unwrap();
    let o = dcq(&["corpus-run", "--corpus", corpus.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("degree"), "{}", stderr(&o));
}

#[test]
fn unachievable_eps_exits_2() {
    let o = dcq(&["series-eval", "--deriv", "5", "--eps", "1e-10"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("eps"));
}

/// A parabola dipping below the hypersurface between two roots 1e-5 apart:
/// both roots are found, and they share one grid cell, so the audit fails.
fn close_pair_corpus(dir: &Path) -> std::path::PathBuf {
    let target = r#"{"variant":"hypersurface","n":2}"#;
    let Manifold::Hypersurface(h) = ManifoldFile::from_json(target).unwrap().build().unwrap()
    else {
        panic!("hypersurface expected")
    };
    let f0 = -h.defining(&[0.0, 0.0]).unwrap();
    let (a, b, k) = (0.5, 0.5 + 1e-5, 1e4);
    let coeffs = [f0 + k * a * b, -k * (a + b), k];
    let text = format!(
        r#"{{"jobs":[{{"name":"close_pair","target":{target},
            "shape":{{"kind":"curve","curve":{{"components":[
              {{"type":"poly","degree":0,"coeffs":[0.0]}},
              {{"type":"poly","degree":2,"coeffs":[{},{},{}]}}],
              "domain":[0,1]}}}}}}]}}"#,
        coeffs[0], coeffs[1], coeffs[2]
    );
    let path = dir.join("close.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn audit_failure_exits_3_after_writing_reports() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = close_pair_corpus(dir.path());
    let out = dir.path().join("out");
    let o = dcq(&[
        "corpus-run",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("close_pair"));
    let job: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("jobs/close_pair.json")).unwrap())
            .unwrap();
    assert_eq!(
        job["report"]["report"]["roots"].as_array().unwrap().len(),
        2
    );
    assert_eq!(job["report"]["oracle_agreement"], true);
    assert_eq!(job["report"]["audit"]["passed"], false);
}

#[test]
fn standard_corpus_run_writes_summary_and_job_reports() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, jobs) in [(&a, "2"), (&b, "1")] {
        let o = dcq(&[
            "corpus-run",
            "--jobs",
            jobs,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let summary = a.path().join("summary.csv");
    assert_eq!(
        header(&summary),
        "job,roots,min_gap,degenerate,oracle_agreement"
    );
    let rows = std::fs::read_to_string(&summary).unwrap().lines().count() - 2;
    let jobs: Vec<_> = std::fs::read_dir(a.path().join("jobs")).unwrap().collect();
    assert_eq!(jobs.len(), rows);
    assert!(rows >= 30);

    // the worker count is echoed, so compare everything below the echo line
    let strip = |p: &Path| {
        let t = std::fs::read_to_string(p).unwrap();
        t.split_once('\n').unwrap().1.to_string()
    };
    assert_eq!(strip(&summary), strip(&b.path().join("summary.csv")));
}
