//! The associated function `tau(r) = inf_j M_j / r^j` and its attaining index.
//!
//! With `g(j) = ln M_j - j ln r`, log-convexity of `M` makes `g` convex, so the
//! forward difference `D(j) = g(j+1) - g(j)` is non-decreasing and the minimum
//! sits at the first `j` with `D(j) >= 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightSequence;

/// Absolute tolerance in the log domain for "largest index attaining the minimum".
pub const TIE_TOL: f64 = 1e-9;

pub const DEFAULT_J_MAX: u64 = 100_000;

// above this magnitude g(j) itself carries more than TIE_TOL of rounding, so
// ties are resolved from summed forward differences instead
const DIRECT_TIE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssocResult {
    /// `ln tau(r)`: the minimum of `g` over the searched range.
    pub log_tau: f64,
    /// Largest index with `g(nu) <= log_tau + TIE_TOL`.
    pub nu: u64,
    /// False when the minimizer is the search bound itself.
    pub attained_interior: bool,
}

fn check_args(seq: &WeightSequence, ln_r: f64, j_max: u64) -> Result<()> {
    if !ln_r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "r must be positive and finite (ln r = {ln_r})"
        )));
    }
    if j_max < seq.j_min() + 2 {
        return Err(Error::InvalidArgument(format!(
            "search bound {j_max} must be at least j_min + 2 = {}",
            seq.j_min() + 2
        )));
    }
    if j_max > seq.j_last() {
        return Err(Error::IndexBeyondTable {
            j: j_max,
            last: seq.j_last(),
        });
    }
    Ok(())
}

fn ln_of(r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "r must be positive and finite, got {r}"
        )));
    }
    Ok(r.ln())
}

/// `tau(r)` and `nu(r)` over `j` in `[j_min, j_max]`.
pub fn tau_nu(seq: &WeightSequence, r: f64, j_max: u64) -> Result<AssocResult> {
    tau_nu_ln(seq, ln_of(r)?, j_max)
}

/// As [`tau_nu`], taking `ln r` directly (so `r` may exceed the `f64` range).
pub fn tau_nu_ln(seq: &WeightSequence, ln_r: f64, j_max: u64) -> Result<AssocResult> {
    check_args(seq, ln_r, j_max)?;
    let g = |j: u64| seq.log_weight_over_power_unchecked(j, ln_r);
    let d = |j: u64| seq.log_increment_unchecked(j) - ln_r;

    // first j in [j_min, j_max - 1] with D(j) >= 0, else j_max
    let (mut lo, mut hi) = (seq.j_min(), j_max);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if d(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let pivot = lo;

    // the rounded profile may disagree with the sign of D by one step
    let mut best = pivot;
    let mut g_min = g(pivot);
    for j in [pivot.saturating_sub(1), pivot + 1] {
        if j >= seq.j_min() && j <= j_max && j != pivot {
            let v = g(j);
            if v < g_min || (v == g_min && j > best) {
                best = j;
                g_min = v;
            }
        }
    }

    let mut nu = best;
    if g_min.abs() <= DIRECT_TIE_LIMIT {
        while nu < j_max && g(nu + 1) <= g_min + TIE_TOL {
            nu += 1;
        }
    } else {
        let mut rise = 0.0;
        while nu < j_max {
            rise += d(nu);
            if rise > TIE_TOL {
                break;
            }
            nu += 1;
        }
    }
    Ok(AssocResult {
        log_tau: g_min,
        nu,
        attained_interior: best < j_max,
    })
}

/// Exhaustive scan with the same contract as [`tau_nu`].
pub fn tau_nu_bruteforce(seq: &WeightSequence, r: f64, j_max: u64) -> Result<AssocResult> {
    let ln_r = ln_of(r)?;
    check_args(seq, ln_r, j_max)?;
    let values: Vec<f64> = (seq.j_min()..=j_max)
        .map(|j| seq.log_weight_over_power_unchecked(j, ln_r))
        .collect();
    let (arg, &g_min) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("range is non-empty");
    let nu_off = values
        .iter()
        .rposition(|&v| v <= g_min + TIE_TOL)
        .expect("the minimum itself qualifies");
    let j_min = seq.j_min();
    Ok(AssocResult {
        log_tau: g_min,
        nu: j_min + nu_off as u64,
        attained_interior: j_min + (arg as u64) < j_max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub r: f64,
    pub ln_r: f64,
    pub nu: u64,
    pub log_tau: f64,
    pub nu_over_ln_r: f64,
    /// Minimum of `nu / ln r` over this row and all earlier rows.
    pub running_min: f64,
    pub attained_interior: bool,
}

/// `nu(r)` and `nu(r) / ln r` along a grid of `ln r` values (all positive).
pub fn nu_growth_profile_ln(
    seq: &WeightSequence,
    ln_r_grid: &[f64],
    j_max: u64,
) -> Result<Vec<GrowthRow>> {
    let mut running_min = f64::INFINITY;
    ln_r_grid
        .iter()
        .map(|&ln_r| {
            if !(ln_r > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "growth profile needs r > 1, got ln r = {ln_r}"
                )));
            }
            let res = tau_nu_ln(seq, ln_r, j_max)?;
            let ratio = res.nu as f64 / ln_r;
            running_min = running_min.min(ratio);
            Ok(GrowthRow {
                r: ln_r.exp(),
                ln_r,
                nu: res.nu,
                log_tau: res.log_tau,
                nu_over_ln_r: ratio,
                running_min,
                attained_interior: res.attained_interior,
            })
        })
        .collect()
}

pub fn nu_growth_profile(
    seq: &WeightSequence,
    r_grid: &[f64],
    j_max: u64,
) -> Result<Vec<GrowthRow>> {
    let ln_grid = r_grid
        .iter()
        .map(|&r| ln_of(r))
        .collect::<Result<Vec<_>>>()?;
    nu_growth_profile_ln(seq, &ln_grid, j_max)
}
