//! Log-convex weight sequences `M_j` that index Denjoy-Carleman classes.
//!
//! Every value is held as `ln M_j`; no `M_j` is ever materialized as a plain
//! real. The iterated-log family `M_j = (j log_k(j + c_k))^j` uses the shift
//! `c_k = exp^{(k)}(1) - 1`, so that `log_k(1 + c_k) = 1` and `log_k >= 1` for
//! every `j >= 1`.

use std::path::Path;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signed_log::NeumaierSum;

/// Highest index kept in the dense memo table; larger indices are computed on demand.
const CACHE_LIMIT: u64 = 1 << 20;

/// Largest index the iterated-log family accepts (indices are `u64`, values `f64`).
pub const ILOG_INDEX_LIMIT: u64 = 1 << 62;

/// `exp^{(k)}(1)`: 1, e, e^e, e^{e^e}.
fn tower(k: u32) -> f64 {
    let mut e = 1.0f64;
    for _ in 0..k {
        e = e.exp();
    }
    e
}

/// `log_k(x)` with natural logs: `log_1 x = ln x`, `log_k x = log_{k-1}(ln x)`.
pub fn iterated_log(k: u32, x: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "iterated_log order must be positive".into(),
        ));
    }
    let mut y = x;
    for _ in 0..k {
        if !(y > 0.0) {
            return Err(Error::Domain { order: k, x });
        }
        y = y.ln();
    }
    Ok(y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    IteratedLog { order: u32 },
    Custom,
}

/// A log-convex weight sequence with provenance.
#[derive(Debug)]
pub struct WeightSequence {
    kind: SequenceKind,
    shift: f64,
    j_min: u64,
    // custom: ln M_j for j = j_min, j_min + 1, ...
    table: Vec<f64>,
    // iterated-log memo: ln M_j for j = 1..=cache.len()
    cache: RwLock<Vec<f64>>,
}

impl Clone for WeightSequence {
    fn clone(&self) -> Self {
        WeightSequence {
            kind: self.kind.clone(),
            shift: self.shift,
            j_min: self.j_min,
            table: self.table.clone(),
            cache: RwLock::new(self.cache.read().expect("weight cache poisoned").clone()),
        }
    }
}

/// Stable pieces of `log_k(j + c_k)` for the iterated-log family.
///
/// Writing `j + c_k = E_k + u` with `E_k = exp^{(k)}(1)` and `u = j - 1`, one
/// level of `ln` maps `E_i + u` to `E_{i-1} + ln1p(u / E_i)`. After `k` levels
/// `log_k(j + c_k) = 1 + v` with `v >= 0` computed without cancellation; the
/// same recursion carries the forward difference `v(j+1) - v(j)`.
#[derive(Debug, Clone, Copy)]
struct ShiftedLog {
    v: f64,
    dv: f64,
}

fn shifted_log(order: u32, towers: &[f64; 4], j: f64) -> ShiftedLog {
    let mut u = j - 1.0;
    let mut du = 1.0;
    for i in (1..=order as usize).rev() {
        let e = towers[i];
        du = (du / (e + u)).ln_1p();
        u = (u / e).ln_1p();
    }
    ShiftedLog { v: u, dv: du }
}

impl WeightSequence {
    /// `M_j = (j log_k(j + c_k))^j` for `k` in 1..=3, with `j_min = 1`.
    pub fn iterated_log(order: u32) -> Result<Self> {
        match order {
            1..=3 => Ok(WeightSequence {
                kind: SequenceKind::IteratedLog { order },
                shift: tower(order) - 1.0,
                j_min: 1,
                table: Vec::new(),
                cache: RwLock::new(Vec::new()),
            }),
            0 => Err(Error::InvalidArgument(
                "iterated-log order must be positive".into(),
            )),
            k => Err(Error::UnsupportedOrder(k)),
        }
    }

    /// A tabulated sequence: `log_values[i] = ln M_{j_min + i}`.
    pub fn custom(j_min: u64, log_values: Vec<f64>) -> Result<Self> {
        if j_min == 0 {
            return Err(Error::InvalidArgument(
                "custom table must start at j >= 1".into(),
            ));
        }
        if log_values.is_empty() {
            return Err(Error::InvalidArgument("custom table is empty".into()));
        }
        if let Some(i) = log_values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "custom table value at j = {} is not finite",
                j_min + i as u64
            )));
        }
        Ok(WeightSequence {
            kind: SequenceKind::Custom,
            shift: 0.0,
            j_min,
            table: log_values,
            cache: RwLock::new(Vec::new()),
        })
    }

    /// Tabulates `ln M_j = f(j)` for `j` in `j_min..=j_last`.
    pub fn from_fn(j_min: u64, j_last: u64, f: impl Fn(u64) -> f64) -> Result<Self> {
        Self::custom(j_min, (j_min..=j_last).map(f).collect())
    }

    /// Reads a CSV with columns `j, log_M` (an optional header row is skipped).
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut rows: Vec<(u64, f64)> = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            if rec.len() < 2 {
                return Err(Error::Parse(format!(
                    "{}: row {} needs columns j, log_M",
                    path.display(),
                    line + 1
                )));
            }
            let j = rec[0].parse::<u64>();
            let v = rec[1].parse::<f64>();
            match (j, v) {
                (Ok(j), Ok(v)) => rows.push((j, v)),
                _ if line == 0 => continue, // header
                _ => {
                    return Err(Error::Parse(format!(
                        "{}: row {} is not numeric",
                        path.display(),
                        line + 1
                    )))
                }
            }
        }
        let Some(&(j_min, _)) = rows.first() else {
            return Err(Error::Parse(format!("{}: no data rows", path.display())));
        };
        for (i, &(j, _)) in rows.iter().enumerate() {
            if j != j_min + i as u64 {
                return Err(Error::Parse(format!(
                    "{}: indices must be contiguous, found j = {j} at row {}",
                    path.display(),
                    i + 1
                )));
            }
        }
        Self::custom(j_min, rows.into_iter().map(|(_, v)| v).collect())
    }

    /// Parses `ilog:k=<order>`, `custom:@<path>` or `custom:<v1>,<v2>,...` (starting at j = 1).
    pub fn from_spec_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("ilog:") {
            let k = rest
                .strip_prefix("k=")
                .and_then(|s| s.parse::<u32>().ok())
                .ok_or_else(|| {
                    Error::Parse(format!(
                        "bad sequence spec '{spec}', expected ilog:k=<order>"
                    ))
                })?;
            return Self::iterated_log(k);
        }
        if let Some(rest) = spec.strip_prefix("custom:") {
            if let Some(path) = rest.strip_prefix('@') {
                return Self::from_csv(Path::new(path));
            }
            let values = rest
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("bad custom sequence '{spec}': {e}")))?;
            return Self::custom(1, values);
        }
        Err(Error::Parse(format!(
            "unknown sequence spec '{spec}', expected ilog:k=<order> or custom:@<file.csv>"
        )))
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    /// The argument shift `c_k` (zero for custom tables).
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn j_min(&self) -> u64 {
        self.j_min
    }

    /// Last valid index: the table end for custom sequences.
    pub fn j_last(&self) -> u64 {
        match self.kind {
            SequenceKind::IteratedLog { .. } => ILOG_INDEX_LIMIT,
            SequenceKind::Custom => self.j_min + self.table.len() as u64 - 1,
        }
    }

    fn check_index(&self, j: u64) -> Result<()> {
        if j < self.j_min {
            return Err(Error::IndexBelowMin {
                j,
                j_min: self.j_min,
            });
        }
        if j > self.j_last() {
            return Err(Error::IndexBeyondTable {
                j,
                last: self.j_last(),
            });
        }
        Ok(())
    }

    fn towers() -> [f64; 4] {
        [1.0, tower(1), tower(2), tower(3)]
    }

    fn ilog_root(order: u32, j: u64) -> f64 {
        let s = shifted_log(order, &Self::towers(), j as f64);
        (j as f64).ln() + s.v.ln_1p()
    }

    /// `ln M_j`.
    pub fn log_weight(&self, j: u64) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.log_weight_unchecked(j))
    }

    pub(crate) fn log_weight_unchecked(&self, j: u64) -> f64 {
        match self.kind {
            SequenceKind::Custom => self.table[(j - self.j_min) as usize],
            SequenceKind::IteratedLog { order } => {
                if j > CACHE_LIMIT {
                    return j as f64 * Self::ilog_root(order, j);
                }
                let idx = (j - 1) as usize;
                {
                    let cache = self.cache.read().expect("weight cache poisoned");
                    if let Some(&v) = cache.get(idx) {
                        return v;
                    }
                }
                let mut cache = self.cache.write().expect("weight cache poisoned");
                while cache.len() <= idx {
                    let i = cache.len() as u64 + 1;
                    cache.push(i as f64 * Self::ilog_root(order, i));
                }
                cache[idx]
            }
        }
    }

    /// `ln M_j / j`, i.e. `ln(M_j^{1/j})`.
    pub fn log_root(&self, j: u64) -> Result<f64> {
        self.check_index(j)?;
        Ok(match self.kind {
            SequenceKind::Custom => self.log_weight_unchecked(j) / j as f64,
            SequenceKind::IteratedLog { order } => Self::ilog_root(order, j),
        })
    }

    /// `ln M_{j+1} - ln M_j`, computed without cancellation for the iterated-log family.
    pub fn log_increment(&self, j: u64) -> Result<f64> {
        self.check_index(j)?;
        self.check_index(j + 1)?;
        Ok(self.log_increment_unchecked(j))
    }

    pub(crate) fn log_increment_unchecked(&self, j: u64) -> f64 {
        match self.kind {
            SequenceKind::Custom => {
                let i = (j - self.j_min) as usize;
                self.table[i + 1] - self.table[i]
            }
            SequenceKind::IteratedLog { order } => {
                let jf = j as f64;
                let s = shifted_log(order, &Self::towers(), jf);
                let root_step = (1.0 / jf).ln_1p() + (s.dv / (1.0 + s.v)).ln_1p();
                let root_next = Self::ilog_root(order, j + 1);
                root_next + jf * root_step
            }
        }
    }

    /// `ln(M_j / r^j) = ln M_j - j ln r`, the objective behind the associated function.
    pub fn log_weight_over_power(&self, j: u64, ln_r: f64) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.log_weight_over_power_unchecked(j, ln_r))
    }

    pub(crate) fn log_weight_over_power_unchecked(&self, j: u64, ln_r: f64) -> f64 {
        match self.kind {
            SequenceKind::Custom => self.log_weight_unchecked(j) - j as f64 * ln_r,
            // j (ln M_j / j - ln r) keeps the relative error small when the
            // two terms nearly cancel at large j
            SequenceKind::IteratedLog { order } if j > CACHE_LIMIT => {
                j as f64 * (Self::ilog_root(order, j) - ln_r)
            }
            SequenceKind::IteratedLog { .. } => self.log_weight_unchecked(j) - j as f64 * ln_r,
        }
    }

    /// Checks monotonicity, log-convexity and root growth on `[j_lo, j_hi]`.
    pub fn verify(&self, j_lo: u64, j_hi: u64) -> Result<SequenceReport> {
        if j_lo < self.j_min {
            return Err(Error::IndexBelowMin {
                j: j_lo,
                j_min: self.j_min,
            });
        }
        if j_hi < j_lo + 2 {
            return Err(Error::InvalidArgument(format!(
                "verify range [{j_lo}, {j_hi}] must contain at least three indices"
            )));
        }
        self.check_index(j_hi)?;

        let mut increasing = Check::pass();
        let mut log_convex = Check::pass();
        let mut root_growth = Check::pass();
        let lm = |j: u64| self.log_weight_unchecked(j);
        let root = |j: u64| self.log_root(j).expect("index checked");

        for j in j_lo..=j_hi {
            if j < j_hi && !(lm(j + 1) > lm(j)) {
                increasing.fail_at(j + 1);
            }
            if j > j_lo && j < j_hi && lm(j - 1) + lm(j + 1) < 2.0 * lm(j) {
                log_convex.fail_at(j);
            }
            // M_j^{1/j} >= j, with equality only where the shift pins log_k to 1
            if root(j) < (j as f64).ln() {
                root_growth.fail_at(j);
            }
            if j < j_hi && !(root(j + 1) > root(j)) {
                root_growth.fail_at(j + 1);
            }
        }
        Ok(SequenceReport {
            j_lo,
            j_hi,
            increasing,
            log_convex,
            root_growth,
        })
    }
}

/// Outcome of one invariant scan: the first violating index, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub passed: bool,
    pub first_violation: Option<u64>,
}

impl Check {
    fn pass() -> Self {
        Check {
            passed: true,
            first_violation: None,
        }
    }

    fn fail_at(&mut self, j: u64) {
        if self.passed {
            self.passed = false;
            self.first_violation = Some(j);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub j_lo: u64,
    pub j_hi: u64,
    pub increasing: Check,
    pub log_convex: Check,
    pub root_growth: Check,
}

impl SequenceReport {
    pub fn all_passed(&self) -> bool {
        self.increasing.passed && self.log_convex.passed && self.root_growth.passed
    }
}

/// Partial sums `S_J = sum_{j = j_min}^{J} M_j^{-1/j}` at the requested `J`s.
///
/// Divergence of these sums is the Denjoy-Carleman criterion; the profile is a
/// finite-range diagnostic only.
pub fn dc_divergence_profile(seq: &WeightSequence, grid: &[u64]) -> Result<Vec<(u64, f64)>> {
    let mut sorted = grid.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let Some(&last) = sorted.last() else {
        return Ok(Vec::new());
    };
    if sorted[0] < seq.j_min() {
        return Err(Error::IndexBelowMin {
            j: sorted[0],
            j_min: seq.j_min(),
        });
    }
    seq.check_index(last)?;
    let mut out = Vec::with_capacity(sorted.len());
    let mut acc = NeumaierSum::default();
    let mut next = sorted.iter().peekable();
    for j in seq.j_min()..=last {
        acc.add((-seq.log_root(j)?).exp());
        if next.peek() == Some(&&j) {
            out.push((j, acc.total()));
            next.next();
        }
    }
    Ok(out)
}

/// `N_j^{1/j} / M_j^{1/j}` on a grid of indices.
pub fn separation_ratio(
    seq_n: &WeightSequence,
    seq_m: &WeightSequence,
    grid: &[u64],
) -> Result<Vec<(u64, f64)>> {
    grid.iter()
        .map(|&j| Ok((j, (seq_n.log_root(j)? - seq_m.log_root(j)?).exp())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn iterated_log_examples() {
        assert_eq!(iterated_log(1, E).unwrap(), 1.0);
        assert!((iterated_log(2, E.powf(E)).unwrap() - 1.0).abs() < 1e-15);
        // ln(ln 100) = ln(4.605170185988091) = 1.5271796258079011
        assert!((iterated_log(2, 100.0).unwrap() - 1.527_179_625_807_901_1).abs() < 1e-14);
        assert!(matches!(iterated_log(2, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(iterated_log(1, -2.0), Err(Error::Domain { .. })));
        assert!(iterated_log(0, 2.0).is_err());
    }

    #[test]
    fn shifts_match_exponential_tower() {
        let s1 = WeightSequence::iterated_log(1).unwrap();
        let s2 = WeightSequence::iterated_log(2).unwrap();
        let s3 = WeightSequence::iterated_log(3).unwrap();
        assert!((s1.shift() - (E - 1.0)).abs() < 1e-15);
        assert!((s2.shift() - (E.powf(E) - 1.0)).abs() < 1e-12);
        // e^{e^e} - 1 = 3814278.1...
        assert!(
            (s3.shift() - 3_814_278.104_8).abs() < 1e-3,
            "{}",
            s3.shift()
        );
        assert!(matches!(
            WeightSequence::iterated_log(4),
            Err(Error::UnsupportedOrder(4))
        ));
        assert!(WeightSequence::iterated_log(0).is_err());
    }

    #[test]
    fn first_weight_is_one_for_every_order() {
        for k in 1..=3 {
            let s = WeightSequence::iterated_log(k).unwrap();
            assert_eq!(s.log_weight(1).unwrap(), 0.0);
        }
    }

    #[test]
    fn log_weight_matches_direct_formula() {
        let s = WeightSequence::iterated_log(1).unwrap();
        // 2 ln(2 ln(1 + e)) with ln(1 + e) = 1.3132616875182228
        let expect = 2.0 * (2.0 * 1.313_261_687_518_222_8f64).ln();
        assert!((s.log_weight(2).unwrap() - expect).abs() < 1e-14);
        assert!((s.log_weight(2).unwrap() - 1.931_322_1).abs() < 1e-6);
        for k in 1..=3u32 {
            let s = WeightSequence::iterated_log(k).unwrap();
            for j in [2u64, 3, 10, 77, 1000, 123_456] {
                let direct =
                    j as f64 * (j as f64 * iterated_log(k, j as f64 + s.shift()).unwrap()).ln();
                let got = s.log_weight(j).unwrap();
                assert!(
                    (got - direct).abs() <= 1e-12 * direct.abs(),
                    "k={k} j={j}: {got} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn shift_keeps_iterated_log_at_least_one() {
        for k in 1..=3u32 {
            let s = WeightSequence::iterated_log(k).unwrap();
            for j in 1..2000u64 {
                let excess = s.log_root(j).unwrap() - (j as f64).ln();
                assert!(excess >= 0.0, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn increments_match_differences() {
        for k in 1..=3u32 {
            let s = WeightSequence::iterated_log(k).unwrap();
            for j in [1u64, 2, 5, 50, 999, 70_000] {
                let d = s.log_weight(j + 1).unwrap() - s.log_weight(j).unwrap();
                let inc = s.log_increment(j).unwrap();
                assert!(
                    (d - inc).abs() <= 1e-11 * (1.0 + d.abs()),
                    "k={k} j={j}: {d} vs {inc}"
                );
            }
        }
    }

    #[test]
    fn custom_table_lookup_and_bounds() {
        let s = WeightSequence::custom(1, vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(s.log_weight(2).unwrap(), 1.0);
        assert!(matches!(s.log_weight(0), Err(Error::IndexBelowMin { .. })));
        assert!(matches!(
            s.log_weight(4),
            Err(Error::IndexBeyondTable { .. })
        ));
        assert!(WeightSequence::custom(1, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn verify_iterated_log_sequences() {
        for k in 1..=3 {
            let s = WeightSequence::iterated_log(k).unwrap();
            let r = s.verify(1, 1000).unwrap();
            assert!(r.all_passed(), "k={k}: {r:?}");
        }
    }

    #[test]
    fn verify_reports_first_convexity_violation() {
        let s = WeightSequence::custom(1, vec![0.0, 2.0, 2.5]).unwrap();
        let r = s.verify(1, 3).unwrap();
        assert!(!r.log_convex.passed);
        assert_eq!(r.log_convex.first_violation, Some(2));
        assert!(r.increasing.passed);
    }

    #[test]
    fn verify_j_log_j_table_is_increasing() {
        let s = WeightSequence::from_fn(1, 100, |j| j as f64 * (j as f64).ln()).unwrap();
        let r = s.verify(3, 100).unwrap();
        assert!(r.increasing.passed);
        assert!(r.log_convex.passed);
    }

    #[test]
    fn verify_preconditions() {
        let s = WeightSequence::iterated_log(1).unwrap();
        assert!(s.verify(0, 10).is_err());
        assert!(s.verify(5, 6).is_err());
    }

    #[test]
    fn divergence_profile_geometric_closed_form() {
        let s = WeightSequence::from_fn(1, 60, |j| (j * j) as f64).unwrap();
        let prof = dc_divergence_profile(&s, &[10, 50]).unwrap();
        let limit = 1.0 / (E - 1.0);
        assert!((prof[1].1 - limit).abs() < 1e-12);
        assert!(prof[0].1 < prof[1].1);
    }

    #[test]
    fn divergence_profile_grows_for_iterated_logs() {
        let s1 = WeightSequence::iterated_log(1).unwrap();
        let s2 = WeightSequence::iterated_log(2).unwrap();
        let grid = [100u64, 1000, 10_000];
        let p1 = dc_divergence_profile(&s1, &grid).unwrap();
        let p2 = dc_divergence_profile(&s2, &grid).unwrap();
        assert!(p1[2].1 > p1[0].1);
        assert!(p2[2].1 > p1[2].1);
        for j in [10u64, 100, 1000] {
            let pj = dc_divergence_profile(&s1, &[j, 2 * j]).unwrap();
            assert!(pj[1].1 - pj[0].1 > 0.0);
        }
    }

    #[test]
    fn separation_ratio_examples() {
        let s1 = WeightSequence::iterated_log(1).unwrap();
        let same = separation_ratio(&s1, &s1, &[1, 5, 100]).unwrap();
        assert!(same.iter().all(|&(_, r)| r == 1.0));

        let lin = WeightSequence::from_fn(1, 20, |j| j as f64).unwrap();
        let dbl = WeightSequence::from_fn(1, 20, |j| 2.0 * j as f64).unwrap();
        for (_, r) in separation_ratio(&lin, &dbl, &[1, 7, 20]).unwrap() {
            assert!((r - (-1.0f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn separation_ratio_decreases_between_orders() {
        let mut grid: Vec<u64> = (0..=200)
            .map(|i| (10f64 * 1e5f64.powf(i as f64 / 200.0)).round() as u64)
            .collect();
        grid.dedup();
        let s1 = WeightSequence::iterated_log(1).unwrap();
        let s2 = WeightSequence::iterated_log(2).unwrap();
        let s3 = WeightSequence::iterated_log(3).unwrap();
        for (hi, lo) in [(&s2, &s1), (&s3, &s2)] {
            let r = separation_ratio(hi, lo, &grid).unwrap();
            assert!(r.windows(2).all(|w| w[1].1 < w[0].1), "{r:?}");
        }
    }

    #[test]
    fn spec_strings() {
        let s = WeightSequence::from_spec_str("ilog:k=2").unwrap();
        assert_eq!(s.kind(), &SequenceKind::IteratedLog { order: 2 });
        let c = WeightSequence::from_spec_str("custom:0,1,3").unwrap();
        assert_eq!(c.j_last(), 3);
        assert!(WeightSequence::from_spec_str("ilog:k=9").is_err());
        assert!(WeightSequence::from_spec_str("nope").is_err());
    }

    #[test]
    fn csv_tables() {
        let dir = std::env::temp_dir().join(format!("dcq-weights-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("w.csv");
        std::fs::write(&p, "j,log_M\n2,0.5\n3,1.5\n4,3\n").unwrap();
        let s = WeightSequence::from_spec_str(&format!("custom:@{}", p.display())).unwrap();
        assert_eq!(s.j_min(), 2);
        assert_eq!(s.log_weight(4).unwrap(), 3.0);
        std::fs::write(&p, "1,0\n3,1\n").unwrap();
        assert!(WeightSequence::from_csv(&p).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn concurrent_reads_agree() {
        let s = std::sync::Arc::new(WeightSequence::iterated_log(2).unwrap());
        let handles: Vec<_> = (0..4)
            .map(|t| {
                let s = s.clone();
                std::thread::spawn(move || {
                    (1..5000u64)
                        .rev()
                        .step_by(t + 1)
                        .map(|j| (j, s.log_weight(j).unwrap()))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let fresh = WeightSequence::iterated_log(2).unwrap();
        for h in handles {
            for (j, v) in h.join().unwrap() {
                assert_eq!(v, fresh.log_weight(j).unwrap());
            }
        }
    }

    fn orders() -> &'static [WeightSequence] {
        static SEQS: std::sync::OnceLock<Vec<WeightSequence>> = std::sync::OnceLock::new();
        SEQS.get_or_init(|| {
            (1..=3)
                .map(|k| WeightSequence::iterated_log(k).unwrap())
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn increasing_log_convex_and_root_growth(k in 0usize..3, j in 2u64..200_000) {
            let s = &orders()[k];
            prop_assert!(s.log_weight(j).unwrap() > s.log_weight(j - 1).unwrap());
            prop_assert!(s.log_increment(j).unwrap() > s.log_increment(j - 1).unwrap());
            prop_assert!(s.log_root(j + 1).unwrap() > s.log_root(j).unwrap());
            prop_assert!(s.log_root(j).unwrap() > (j as f64).ln());
        }
    }
}
