//! The lacunary cosine series `f_k(x) = sigma * sum_{n >= k} a_n cos(2^n x)` with
//! `a_n = tau(2^n) / 2^n`, evaluated with certified error bounds.
//!
//! Since `tau(2^n) <= M_j 2^{-jn}` for every `j`, the coefficients satisfy
//! `a_n <= M_j 2^{-(j+1) n}`, which drives both the truncation bound and the
//! bound `|f^{(j)}| <= sigma M_j`.

mod fingerprint;
mod fourier;

pub use fingerprint::{
    class_fingerprint, composition_jet, series_fingerprint, FingerprintRow, Jet,
};
pub use fourier::{fourier_extract, fourier_extract_frequency};

use std::f64::consts::LN_2;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::assoc::tau_nu_ln;
use crate::error::{Error, Result};
use crate::signed_log::{NeumaierSum, SignedLogValue};
use crate::weights::WeightSequence;

/// Highest frequency index `n` (frequency `2^n`) the series carries.
pub const MAX_INDEX: u32 = 62;

pub const DEFAULT_DERIVATIVE_CAP: u32 = 60;

const COEFF_SEARCH_BOUND: u64 = 1 << 62;
const U: f64 = f64::EPSILON;
// relative slack on every returned bound
const BOUND_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct Coeff {
    // ln a_n without the scale
    log_a: f64,
    // absolute bound on the rounding error of log_a
    log_err: f64,
}

/// A value with a certified absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedValue {
    pub value: f64,
    pub error_bound: f64,
}

#[derive(Debug)]
pub struct LacunarySeries {
    seq: Arc<WeightSequence>,
    start: u32,
    last: Option<u32>,
    scale: f64,
    derivative_cap: u32,
    coeffs: RwLock<Vec<Coeff>>,
}

impl Clone for LacunarySeries {
    fn clone(&self) -> Self {
        LacunarySeries {
            seq: self.seq.clone(),
            start: self.start,
            last: self.last,
            scale: self.scale,
            derivative_cap: self.derivative_cap,
            coeffs: RwLock::new(
                self.coeffs
                    .read()
                    .expect("coefficient cache poisoned")
                    .clone(),
            ),
        }
    }
}

/// Cosine-derivative phase: `d^j/dθ^j cos θ`.
#[inline]
pub fn derivative_phase(j: u32, theta: f64) -> f64 {
    match j % 4 {
        0 => theta.cos(),
        1 => -theta.sin(),
        2 => -theta.cos(),
        _ => theta.sin(),
    }
}

impl LacunarySeries {
    pub fn new(seq: Arc<WeightSequence>, start: u32, scale: f64) -> Result<Self> {
        if start == 0 || start > MAX_INDEX {
            return Err(Error::InvalidArgument(format!(
                "series start must lie in 1..={MAX_INDEX}, got {start}"
            )));
        }
        if !(scale >= 0.0) || !scale.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "series scale must be finite and >= 0, got {scale}"
            )));
        }
        Ok(LacunarySeries {
            seq,
            start,
            last: None,
            scale,
            derivative_cap: DEFAULT_DERIVATIVE_CAP,
            coeffs: RwLock::new(Vec::new()),
        })
    }

    /// The same series with a different uniform scale; shares the coefficient cache contents.
    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        let mut s = Self::new(self.seq.clone(), self.start, scale)?;
        s.last = self.last;
        s.derivative_cap = self.derivative_cap;
        s.coeffs = RwLock::new(
            self.coeffs
                .read()
                .expect("coefficient cache poisoned")
                .clone(),
        );
        Ok(s)
    }

    /// The partial sum over `start..=last` as a series in its own right.
    pub fn truncated(&self, last: u32) -> Result<Self> {
        if last < self.start {
            return Err(Error::InvalidArgument(format!(
                "truncation index {last} is below the series start {}",
                self.start
            )));
        }
        let mut s = self.clone();
        s.last = Some(last.min(self.last.unwrap_or(MAX_INDEX)));
        Ok(s)
    }

    pub fn with_derivative_cap(mut self, cap: u32) -> Self {
        self.derivative_cap = cap;
        self
    }

    pub fn sequence(&self) -> &Arc<WeightSequence> {
        &self.seq
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn last(&self) -> u32 {
        self.last.unwrap_or(MAX_INDEX)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn derivative_cap(&self) -> u32 {
        self.derivative_cap
    }

    /// Highest `n` whose coefficient is cached.
    pub fn cached_through(&self) -> Option<u32> {
        let len = self
            .coeffs
            .read()
            .expect("coefficient cache poisoned")
            .len() as u32;
        (len > 0).then(|| self.start + len - 1)
    }

    fn compute_coeff(&self, n: u32) -> Result<Coeff> {
        let ln_r = n as f64 * LN_2;
        let bound = COEFF_SEARCH_BOUND.min(self.seq.j_last());
        let res = tau_nu_ln(&self.seq, ln_r, bound)?;
        if !res.attained_interior {
            return Err(Error::NotInterior { ln_r, j_max: bound });
        }
        let lm = self.seq.log_weight_unchecked(res.nu);
        Ok(Coeff {
            log_a: res.log_tau - ln_r,
            log_err: 8.0 * U * (lm.abs() + res.nu as f64 * ln_r + ln_r + 1.0),
        })
    }

    fn coeff(&self, n: u32) -> Result<Coeff> {
        let idx = (n - self.start) as usize;
        {
            let cache = self.coeffs.read().expect("coefficient cache poisoned");
            if let Some(&c) = cache.get(idx) {
                return Ok(c);
            }
        }
        let mut cache = self.coeffs.write().expect("coefficient cache poisoned");
        while cache.len() <= idx {
            let m = self.start + cache.len() as u32;
            cache.push(self.compute_coeff(m)?);
        }
        Ok(cache[idx])
    }

    fn check_n(&self, n: u32) -> Result<()> {
        if n < self.start || n > MAX_INDEX {
            return Err(Error::InvalidArgument(format!(
                "coefficient index {n} outside {}..={MAX_INDEX}",
                self.start
            )));
        }
        Ok(())
    }

    /// `sigma * a_n`; zero past a truncation point.
    pub fn coefficient(&self, n: u32) -> Result<SignedLogValue> {
        self.check_n(n)?;
        if n > self.last() || self.scale == 0.0 {
            return Ok(SignedLogValue::ZERO);
        }
        Ok(SignedLogValue::from_log(
            self.coeff(n)?.log_a + self.scale.ln(),
        ))
    }

    /// `ln a_n` of the unscaled series.
    pub fn log_coefficient_unscaled(&self, n: u32) -> Result<f64> {
        self.check_n(n)?;
        Ok(self.coeff(n)?.log_a)
    }

    /// Natural log of a certified bound on `sum_{n > N} sigma a_n 2^{jn}`; `-inf` when the tail is empty.
    pub fn log_tail_bound(&self, big_n: u32, j: u32) -> f64 {
        if big_n >= self.last() || self.scale == 0.0 {
            return f64::NEG_INFINITY;
        }
        let seq = &*self.seq;
        let c = (big_n as f64 + 1.0) * LN_2;
        let jf = j as f64;
        let lo_idx = (j as u64 + 1).max(seq.j_min());
        let hi_idx = COEFF_SEARCH_BOUND.min(seq.j_last());
        if lo_idx > hi_idx {
            return f64::INFINITY;
        }
        // h(j') = ln M_j' + (j - j' - 1) c - ln(1 - 2^{j - j' - 1}); convex in j'
        let geo = |jp: u64| -(-((jf - jp as f64 - 1.0) * LN_2).exp()).ln_1p();
        let h = |jp: u64| seq.log_weight_over_power_unchecked(jp, c) + (jf - 1.0) * c + geo(jp);
        let dh = |jp: u64| seq.log_increment_unchecked(jp) - c + geo(jp + 1) - geo(jp);
        let (mut lo, mut hi) = (lo_idx, hi_idx);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if dh(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let mut best = lo;
        let mut h_min = h(lo);
        for jp in [lo.saturating_sub(1), lo + 1] {
            if jp >= lo_idx && jp <= hi_idx {
                let v = h(jp);
                if v < h_min {
                    h_min = v;
                    best = jp;
                }
            }
        }
        let bf = best as f64;
        let rounding = 8.0
            * U
            * (bf * (seq.log_root(best).map(f64::abs).unwrap_or(0.0) + c) + (jf + 1.0) * c + 1.0);
        h_min + rounding + self.scale.ln() + BOUND_MARGIN
    }

    /// Certified bound on `sum_{n > N} sigma a_n 2^{jn}`; `+inf` when not representable.
    pub fn tail_bound(&self, big_n: u32, j: u32) -> f64 {
        self.log_tail_bound(big_n, j).exp()
    }

    /// Certified bound on `sup |f^{(j)}| <= sum_n sigma a_n 2^{jn}`.
    pub fn derivative_bound(&self, j: u32) -> Result<f64> {
        if self.scale == 0.0 {
            return Ok(0.0);
        }
        // sum until the tail is negligible against the accumulated value
        let mut acc = Vec::new();
        let mut err = 0.0f64;
        let mut n = self.start;
        loop {
            let c = self.coeff(n)?;
            acc.push(SignedLogValue::from_log(
                c.log_a + j as f64 * n as f64 * LN_2,
            ));
            err = err.max(c.log_err);
            let sum = SignedLogValue::sum(acc.iter().copied());
            let tail = self.log_tail_bound(n, j);
            if n >= self.last() || tail <= sum.log_mag() - 60.0 || n == MAX_INDEX {
                let total = sum + SignedLogValue::from_log(tail);
                let log_b = total.log_mag()
                    + self.scale.ln()
                    + err
                    + 4.0 * U * acc.len() as f64
                    + BOUND_MARGIN;
                return Ok(log_b.exp());
            }
            n += 1;
        }
    }

    /// Prepares a certified evaluator of `f^{(j)}` with total error `<= eps`.
    pub fn plan(&self, j: u32, eps: f64) -> Result<EvalPlan> {
        if j > self.derivative_cap {
            return Err(Error::DerivativeCap {
                j,
                cap: self.derivative_cap,
            });
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "eps must be positive and finite, got {eps}"
            )));
        }
        if self.scale == 0.0 {
            return Ok(EvalPlan::zero(j, eps));
        }
        let log_half = (eps / 2.0).ln();
        let mut last = self.start;
        while self.log_tail_bound(last, j) > log_half {
            if last >= self.last() {
                break;
            }
            last += 1;
        }
        let log_tail = self.log_tail_bound(last, j);
        if log_tail > log_half {
            return Err(Error::EpsUnachievable {
                eps,
                reason: format!("truncation tail of derivative {j} exceeds eps/2 at the highest frequency index"),
            });
        }
        let tail = log_tail.exp();
        let ln_scale = self.scale.ln();
        let mut terms = Vec::with_capacity((last - self.start + 1) as usize);
        for n in self.start..=last {
            let c = self.coeff(n)?;
            let shift = j as f64 * n as f64 * LN_2;
            let log_t = c.log_a + ln_scale + shift;
            let err = c.log_err + 2.0 * U * (shift + ln_scale.abs() + log_t.abs());
            terms.push(Term { n, log_t, err });
        }
        let l_star = terms
            .iter()
            .map(|t| t.log_t)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut weights = Vec::with_capacity(terms.len());
        let mut mag = 0.0;
        let mut mag_err = 0.0;
        for t in &terms {
            let w = (t.log_t - l_star).exp();
            weights.push(w);
            mag += w;
            mag_err += w * (t.err.exp_m1() + 2.0 * U * (t.log_t - l_star).abs() + 4.0 * U);
        }
        let count = terms.len() as f64;
        let sum_round = 2.0 * U * mag + 2.0 * count * U * U * mag;
        let frame = l_star.exp();
        let rounding = 1.5 * frame * (mag_err + sum_round) + 2.0 * U * frame * mag;
        if !rounding.is_finite() {
            return Err(Error::EpsUnachievable {
                eps,
                reason: format!("derivative {j} exceeds the floating-point range"),
            });
        }
        if tail + rounding > eps {
            return Err(Error::EpsUnachievable {
                eps,
                reason: format!(
                    "rounding bound {rounding:e} plus tail {tail:e} exceeds eps for derivative {j}"
                ),
            });
        }
        Ok(EvalPlan {
            j,
            eps,
            last,
            tail,
            rounding,
            l_star,
            freq_weights: terms
                .iter()
                .zip(weights)
                .map(|(t, w)| ((t.n as f64).exp2(), w))
                .collect(),
        })
    }

    /// `f^{(j)}(x)` with certified error `<= eps`.
    pub fn evaluate(&self, x: f64, j: u32, eps: f64) -> Result<CertifiedValue> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("x must be finite, got {x}")));
        }
        Ok(self.plan(j, eps)?.eval(x))
    }

    /// Uncertified partial sum `sum_{n = start}^{last} sigma a_n (2^n)^j phi_n(x)` in plain floating point.
    pub fn partial_sum(&self, x: f64, j: u32, last: u32) -> Result<f64> {
        let mut acc = NeumaierSum::default();
        for n in self.start..=last.min(self.last()) {
            let a = self.coefficient(n)?;
            let f = (n as f64).exp2();
            acc.add(a.to_f64() * f.powi(j as i32) * derivative_phase(j, f * x));
        }
        Ok(acc.total())
    }

    /// Maximum of `|f^{(j)}|` over `grid_size` equispaced points of `[0, 2 pi)`.
    pub fn sup_derivative_scan(&self, j: u32, grid_size: usize, eps: f64) -> Result<SupScan> {
        self.sup_derivative_scan_on(j, grid_size, eps, 0.0, std::f64::consts::TAU)
    }

    /// Maximum of `|f^{(j)}|` over `grid_size` equispaced points of `[lo, hi)`.
    pub fn sup_derivative_scan_on(
        &self,
        j: u32,
        grid_size: usize,
        eps: f64,
        lo: f64,
        hi: f64,
    ) -> Result<SupScan> {
        if grid_size < 2 {
            return Err(Error::InvalidArgument(
                "sup scan needs at least two grid points".into(),
            ));
        }
        if !(hi > lo) {
            return Err(Error::InvalidArgument(format!(
                "empty scan interval [{lo}, {hi}]"
            )));
        }
        let plan = self.plan(j, eps)?;
        let h = (hi - lo) / grid_size as f64;
        let mut best = SupScan {
            j,
            sup: 0.0,
            argmax: lo,
            eps,
            error_bound: plan.error_bound(),
        };
        for i in 0..grid_size {
            let x = lo + i as f64 * h;
            let v = plan.eval(x).value.abs();
            if v > best.sup {
                best.sup = v;
                best.argmax = x;
            }
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    n: u32,
    log_t: f64,
    err: f64,
}

/// A prepared evaluator for one derivative order and tolerance.
#[derive(Debug, Clone)]
pub struct EvalPlan {
    j: u32,
    eps: f64,
    last: u32,
    tail: f64,
    rounding: f64,
    l_star: f64,
    // (2^n, a_n 2^{jn} / exp(l_star))
    freq_weights: Vec<(f64, f64)>,
}

impl EvalPlan {
    fn zero(j: u32, eps: f64) -> Self {
        EvalPlan {
            j,
            eps,
            last: 0,
            tail: 0.0,
            rounding: 0.0,
            l_star: 0.0,
            freq_weights: Vec::new(),
        }
    }

    pub fn derivative(&self) -> u32 {
        self.j
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Highest frequency index summed.
    pub fn last_index(&self) -> u32 {
        self.last
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn error_bound(&self) -> f64 {
        self.tail + self.rounding
    }

    pub fn eval(&self, x: f64) -> CertifiedValue {
        let mut acc = NeumaierSum::default();
        for &(f, w) in &self.freq_weights {
            acc.add(w * derivative_phase(self.j, f * x));
        }
        CertifiedValue {
            value: acc.total() * self.l_star.exp(),
            error_bound: self.error_bound(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupScan {
    pub j: u32,
    pub sup: f64,
    pub argmax: f64,
    pub eps: f64,
    pub error_bound: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn k1() -> LacunarySeries {
        LacunarySeries::new(Arc::new(WeightSequence::iterated_log(1).unwrap()), 1, 1.0).unwrap()
    }

    // a_n <= sigma M_j 2^{-(j+1) n} for every j, minimized over j by brute force
    fn oracle_log_tail(s: &LacunarySeries, big_n: u32, j: u32) -> f64 {
        let seq = s.sequence();
        (j as u64 + 1..2_000_000)
            .map(|jp| {
                let e = (j as f64 - jp as f64 - 1.0) * LN_2;
                seq.log_weight(jp).unwrap() + e * (big_n as f64 + 1.0) - (-(e.exp())).ln_1p()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn first_coefficient_is_one_quarter() {
        let s = k1();
        assert!((s.coefficient(1).unwrap().to_f64() - 0.25).abs() < 1e-16);
    }

    #[test]
    fn coefficients_decrease_and_obey_first_moment_bound() {
        let s = k1();
        let mut prev = f64::INFINITY;
        for n in 1..=MAX_INDEX {
            let la = s.coefficient(n).unwrap().log_mag();
            assert!(la < prev);
            prev = la;
            assert!(la + 2.0 * n as f64 * LN_2 <= 1e-12);
        }
    }

    #[test]
    fn scale_multiplies_coefficients() {
        let s = k1().with_scale(0.125).unwrap();
        assert!((s.coefficient(1).unwrap().to_f64() * 32.0 - 1.0).abs() < 1e-15);
        let z = k1().with_scale(0.0).unwrap();
        assert!(z.coefficient(3).unwrap().is_zero());
        assert_eq!(z.evaluate(0.4, 3, 1e-12).unwrap().value, 0.0);
    }

    #[test]
    fn tail_bound_matches_bruteforce_minimization() {
        let s = k1();
        for (big_n, j) in [(1u32, 0u32), (3, 0), (5, 2), (10, 7), (20, 15)] {
            let got = s.log_tail_bound(big_n, j);
            let want = oracle_log_tail(&s, big_n, j);
            assert!(
                got >= want && got - want < 1e-9 * (1.0 + want.abs()),
                "N={big_n} j={j}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn tail_bound_examples() {
        let s = k1();
        // j = 0 through j' = 1: M_1 2^{-2(N+1)} (4/3), and the minimum can only be smaller
        for big_n in 1..10 {
            let j1 = (4.0 / 3.0) * 2f64.powi(-2 * (big_n as i32 + 1));
            assert!(s.tail_bound(big_n, 0) <= j1 * (1.0 + 1e-11));
        }
        assert!(s.tail_bound(60, 5) < 1e-12);
        let mut prev = f64::INFINITY;
        for big_n in 1..40 {
            let t = s.tail_bound(big_n, 4);
            assert!(t <= prev);
            prev = t;
        }
        assert_eq!(s.truncated(6).unwrap().tail_bound(6, 3), 0.0);
    }

    #[test]
    fn tail_bound_dominates_actual_tail() {
        let s = k1();
        for j in [0u32, 1, 4, 9] {
            for big_n in 1..8u32 {
                let actual: f64 = (big_n + 1..=MAX_INDEX)
                    .map(|n| (s.coefficient(n).unwrap().log_mag() + (j * n) as f64 * LN_2).exp())
                    .sum();
                assert!(actual <= s.tail_bound(big_n, j), "j={j} N={big_n}");
            }
        }
    }

    #[test]
    fn value_at_zero_is_coefficient_sum() {
        let s = k1();
        let v = s.evaluate(0.0, 0, 1e-14).unwrap();
        let direct: f64 = (1..=20).map(|n| s.coefficient(n).unwrap().to_f64()).sum();
        assert!((v.value - direct).abs() <= v.error_bound + 1e-16);
        assert!(v.error_bound <= 1e-14);
        assert!(v.value <= 1.0 / 3.0);
    }

    #[test]
    fn derivative_cap_and_eps_errors() {
        let s = k1();
        assert!(matches!(
            s.evaluate(0.1, 61, 1e-3),
            Err(Error::DerivativeCap { .. })
        ));
        assert!(s.evaluate(0.1, 0, 0.0).is_err());
        assert!(matches!(
            s.evaluate(0.1, 30, 1e-30),
            Err(Error::EpsUnachievable { .. })
        ));
    }

    #[test]
    fn first_derivative_matches_finite_differences() {
        let t = k1().truncated(8).unwrap();
        let h = 1e-5;
        for &x in &[0.1, 0.7, 2.3, 5.9] {
            let d = t.evaluate(x, 1, 1e-13).unwrap().value;
            let fp = t.evaluate(x + h, 0, 1e-14).unwrap().value;
            let fm = t.evaluate(x - h, 0, 1e-14).unwrap().value;
            assert!((d - (fp - fm) / (2.0 * h)).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn partial_sum_agrees_with_certified_value() {
        let s = k1();
        for j in 0..6 {
            let p = s.plan(j, 1e-9).unwrap();
            let ps = s.partial_sum(1.234, j, p.last_index()).unwrap();
            let v = p.eval(1.234);
            assert!((ps - v.value).abs() <= 1e-12 * (1.0 + v.value.abs()));
        }
    }

    #[test]
    fn sup_scan_respects_weight_bound() {
        let s = k1();
        let seq = s.sequence().clone();
        for j in [1u32, 2, 5, 10] {
            let mj = seq.log_weight(j as u64).unwrap().exp();
            let scan = s.sup_derivative_scan(j, 2048, 1e-9 * mj).unwrap();
            assert!(scan.sup <= mj + scan.eps);
        }
        let z = s.sup_derivative_scan(0, 64, 1e-12).unwrap();
        assert!(z.sup >= s.evaluate(0.0, 0, 1e-12).unwrap().value - 1e-12);
    }

    #[test]
    fn shifted_start_has_shorter_period() {
        let seq = Arc::new(WeightSequence::iterated_log(2).unwrap());
        let s = LacunarySeries::new(seq, 3, 1.0).unwrap();
        let eps = 1e-12;
        for &x in &[0.0, 0.3, 1.7] {
            let a = s.evaluate(x, 0, eps).unwrap().value;
            let b = s.evaluate(x + PI / 4.0, 0, eps).unwrap().value;
            assert!((a - b).abs() <= 2.0 * eps);
        }
    }

    #[test]
    fn concurrent_coefficient_fill_is_consistent() {
        let s = Arc::new(k1());
        let handles: Vec<_> = (0..4)
            .map(|t| {
                let s = s.clone();
                std::thread::spawn(move || {
                    (1..=20u32)
                        .map(|n| s.coefficient((n + t) % 20 + 1).unwrap().log_mag())
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let fresh = k1();
        for (t, h) in handles.into_iter().enumerate() {
            for (i, v) in h.join().unwrap().into_iter().enumerate() {
                let n = (i as u32 + 1 + t as u32) % 20 + 1;
                assert_eq!(v, fresh.coefficient(n).unwrap().log_mag());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn tighter_eps_stays_within_certificate(x in -10.0f64..10.0, j in 0u32..=10) {
            let s = k1();
            let mj = s.sequence().log_weight(j.max(1) as u64).unwrap().exp();
            let eps = 1e-10 * mj.max(1.0);
            let a = s.evaluate(x, j, eps).unwrap();
            let b = s.evaluate(x, j, eps / 100.0).unwrap();
            prop_assert!((a.value - b.value).abs() <= eps);
        }

        #[test]
        fn periodic_in_two_pi(x in -20.0f64..20.0, j in 0u32..=1) {
            let s = k1();
            let eps = 1e-12;
            let a = s.evaluate(x, j, eps).unwrap().value;
            let b = s.evaluate(x + TAU, j, eps).unwrap().value;
            prop_assert!((a - b).abs() <= 2.0 * eps);
        }
    }
}
