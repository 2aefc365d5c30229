//! Derivative-growth profiles `j -> sup |f^{(j)}|^{1/j}`.
//!
//! A function in `C#{M_j}` has a profile bounded by `C M_j^{1/j}`; plotting a
//! profile against candidate sequences is the finite-range surrogate for class
//! membership. Nothing here decides membership.

use serde::{Deserialize, Serialize};

use super::LacunarySeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FingerprintRow {
    pub j: u32,
    pub sup_abs: f64,
    /// `sup_abs^{1/j}`.
    pub root: f64,
}

fn row(j: u32, sup_abs: f64) -> FingerprintRow {
    FingerprintRow {
        j,
        sup_abs,
        root: sup_abs.powf(1.0 / j as f64),
    }
}

fn check_interval(lo: f64, hi: f64, grid: usize) -> Result<()> {
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "fingerprint interval [{lo}, {hi}] is empty"
        )));
    }
    if grid < 2 {
        return Err(Error::InvalidArgument(
            "fingerprint grid needs at least two points".into(),
        ));
    }
    Ok(())
}

/// Profile of an arbitrary function given as `(x, j) -> f^{(j)}(x)`, sampled on `grid` points of `[lo, hi]`.
pub fn class_fingerprint<F>(
    f: F,
    j_max: u32,
    lo: f64,
    hi: f64,
    grid: usize,
) -> Result<Vec<FingerprintRow>>
where
    F: Fn(f64, u32) -> Result<f64>,
{
    check_interval(lo, hi, grid)?;
    let h = (hi - lo) / (grid - 1) as f64;
    (1..=j_max)
        .map(|j| {
            let mut sup = 0.0f64;
            for i in 0..grid {
                sup = sup.max(f(lo + i as f64 * h, j)?.abs());
            }
            Ok(row(j, sup))
        })
        .collect()
}

/// Profile of a lacunary series on `[lo, hi]`, each order evaluated with
/// tolerance `rel_eps * max(1, sigma M_j)`.
pub fn series_fingerprint(
    series: &LacunarySeries,
    j_max: u32,
    lo: f64,
    hi: f64,
    grid: usize,
    rel_eps: f64,
) -> Result<Vec<FingerprintRow>> {
    if j_max > series.derivative_cap() {
        return Err(Error::DerivativeCap {
            j: j_max,
            cap: series.derivative_cap(),
        });
    }
    check_interval(lo, hi, grid)?;
    let seq = series.sequence();
    let h = (hi - lo) / (grid - 1) as f64;
    (1..=j_max)
        .map(|j| {
            let mj = (seq.log_weight(j as u64)? + series.scale().max(f64::MIN_POSITIVE).ln()).exp();
            let plan = series.plan(j, rel_eps * mj.max(1.0))?;
            let sup = (0..grid)
                .map(|i| plan.eval(lo + i as f64 * h).value.abs())
                .fold(0.0, f64::max);
            Ok(row(j, sup))
        })
        .collect()
}

/// Derivatives `f(x0), f'(x0), ..., f^{(J)}(x0)` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub derivs: Vec<f64>,
}

impl Jet {
    pub fn from_series(series: &LacunarySeries, x0: f64, order: u32, rel_eps: f64) -> Result<Self> {
        let seq = series.sequence();
        let derivs = (0..=order)
            .map(|j| {
                let mj = seq.log_weight(j.max(1) as u64)?.exp() * series.scale();
                Ok(series.evaluate(x0, j, rel_eps * mj.max(1.0))?.value)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Jet { derivs })
    }

    pub fn order(&self) -> usize {
        self.derivs.len().saturating_sub(1)
    }

    /// `|f^{(j)}(x0)|^{1/j}` for `j >= 1`.
    pub fn fingerprint(&self) -> Vec<FingerprintRow> {
        self.derivs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, d)| row(j as u32, d.abs()))
            .collect()
    }
}

/// Jet of `f o g` at `x0`, from the jet of `g` at `x0` and the jet of `f` at `g(x0)`.
///
/// Works on Taylor coefficients: `h(x0 + t) = sum_k f_k (sum_{m >= 1} g_m t^m)^k`
/// truncated at the common order.
pub fn composition_jet(f_at_g: &Jet, g: &Jet) -> Result<Jet> {
    let order = f_at_g.order().min(g.order());
    if f_at_g.derivs.is_empty() || g.derivs.is_empty() {
        return Err(Error::InvalidArgument(
            "composition needs non-empty jets".into(),
        ));
    }
    let mut fact = vec![1.0f64; order + 1];
    for i in 1..=order {
        fact[i] = fact[i - 1] * i as f64;
    }
    let f_t: Vec<f64> = (0..=order).map(|k| f_at_g.derivs[k] / fact[k]).collect();
    let mut g_t: Vec<f64> = (0..=order).map(|k| g.derivs[k] / fact[k]).collect();
    g_t[0] = 0.0;

    let mut h = vec![0.0f64; order + 1];
    let mut power = vec![0.0f64; order + 1];
    power[0] = 1.0;
    for &fk in &f_t {
        for (hi, pi) in h.iter_mut().zip(&power) {
            *hi += fk * pi;
        }
        let mut next = vec![0.0f64; order + 1];
        for (a, &pa) in power.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for b in 1..=order - a {
                next[a + b] += pa * g_t[b];
            }
        }
        power = next;
    }
    Ok(Jet {
        derivs: h.iter().zip(&fact).map(|(c, f)| c * f).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightSequence;
    use std::f64::consts::TAU;
    use std::sync::Arc;

    fn cos_derivative(x: f64, j: u32) -> Result<f64> {
        Ok(super::super::derivative_phase(j, x))
    }

    #[test]
    fn cosine_profile_is_flat() {
        let rows = class_fingerprint(cos_derivative, 12, 0.0, TAU, 4001).unwrap();
        for r in rows {
            assert!((r.root - 1.0).abs() < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn series_profile_below_weight_roots() {
        let seq = Arc::new(WeightSequence::iterated_log(1).unwrap());
        let s = LacunarySeries::new(seq.clone(), 1, 1.0).unwrap();
        let rows = series_fingerprint(&s, 20, 0.0, TAU, 1024, 1e-10).unwrap();
        for r in rows {
            let m_root = seq.log_root(r.j as u64).unwrap().exp();
            assert!(r.root <= m_root * (1.0 + 1e-9), "{r:?} vs {m_root}");
        }
    }

    #[test]
    fn composition_with_identity_and_polynomials() {
        // g(x) = x around 0.3; f(y) = y^3 around 0.3
        let g = Jet {
            derivs: vec![0.3, 1.0, 0.0, 0.0, 0.0],
        };
        let f = Jet {
            derivs: vec![0.027, 0.27, 1.8, 6.0, 0.0],
        };
        assert_eq!(composition_jet(&f, &g).unwrap().derivs, f.derivs);

        // f(y) = e^y at 0, g(x) = 2x: h = e^{2x}, h^{(k)}(0) = 2^k
        let f = Jet {
            derivs: vec![1.0; 7],
        };
        let g = Jet {
            derivs: vec![0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        };
        let h = composition_jet(&f, &g).unwrap();
        for (k, d) in h.derivs.iter().enumerate() {
            assert!((d - 2f64.powi(k as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn composition_of_exponentials_matches_bell_numbers() {
        // f = e^y - 1 at 0 and g = e^x - 1 at 0: h^{(k)}(0) are the Bell numbers minus the k = 0 term
        let mut f = Jet {
            derivs: vec![1.0; 8],
        };
        f.derivs[0] = 0.0;
        let h = composition_jet(&f, &f).unwrap();
        let bell = [0.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0, 877.0];
        for (d, b) in h.derivs.iter().zip(bell) {
            assert!((d - b).abs() < 1e-9);
        }
    }
}
