//! Recovering `a_n` from samples of `f^{(j)}` by periodic quadrature.
//!
//! `(1 / (pi F^j)) int_0^{2pi} f^{(j)}(x) phi(x) dx` with `phi` the `j`-th
//! derivative phase of `cos(F x)` equals `sigma a_n` when `F = 2^n` and vanishes
//! for frequencies off the series support. The `K`-node trapezoid rule is
//! exact for this integrand whenever `K > 2F` and `K` is a power of two, so the
//! only error is arithmetic. The recovered coefficients span dozens of orders
//! of magnitude below `a_start`, hence the sums run in multiprecision.

use std::f64::consts::LN_2;

use astro_float::{BigFloat, Consts, RoundingMode};

use super::LacunarySeries;
use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;
const MAX_NODES: u64 = 1 << 20;
// bits kept below the target term, and omitted-tail headroom
const GUARD_BITS: f64 = 60.0;

/// Extracts `sigma a_n` from `f^{(j)}` with `nodes` quadrature points.
pub fn fourier_extract(series: &LacunarySeries, n: u32, j: u32, nodes: u64) -> Result<f64> {
    if n < series.start() || n > 40 {
        return Err(Error::InvalidArgument(format!(
            "extraction index {n} outside {}..=40",
            series.start()
        )));
    }
    fourier_extract_frequency(series, 1u64 << n, j, nodes)
}

/// The same quadrature at an arbitrary integer frequency.
pub fn fourier_extract_frequency(
    series: &LacunarySeries,
    freq: u64,
    j: u32,
    nodes: u64,
) -> Result<f64> {
    if j > 4 {
        return Err(Error::InvalidArgument(format!(
            "extraction supports derivative orders up to 4, got {j}"
        )));
    }
    if freq == 0 {
        return Err(Error::InvalidArgument(
            "extraction frequency must be positive".into(),
        ));
    }
    let need = freq.saturating_mul(4);
    if nodes < need {
        return Err(Error::InsufficientNodes { need, got: nodes });
    }
    if nodes > MAX_NODES {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_NODES} quadrature nodes are supported"
        )));
    }
    if series.scale() == 0.0 {
        return Ok(0.0);
    }

    let jf = j as f64;
    let log_term =
        |m: u32| -> Result<f64> { Ok(series.log_coefficient_unscaled(m)? + jf * m as f64 * LN_2) };
    let target = (63 - freq.leading_zeros()).clamp(series.start(), series.last());
    let log_target = log_term(target)?;
    let floor = log_target - GUARD_BITS * LN_2;

    // include terms until the omitted tail falls below the floor
    let mut cut = target;
    while cut < series.last() && series.log_tail_bound(cut, j) - series.scale().ln() > floor {
        cut += 1;
    }
    let mut l_star = f64::NEG_INFINITY;
    let mut terms = Vec::new();
    for m in series.start()..=cut {
        let lt = log_term(m)?;
        l_star = l_star.max(lt);
        terms.push((m, lt));
    }
    let range_bits = ((l_star - floor) / LN_2).max(0.0);
    let prec = (64.0 + range_bits + (nodes as f64).log2() + 32.0).ceil() as usize;
    let prec = prec.div_ceil(64) * 64;

    let mut cc = Consts::new()
        .map_err(|e| Error::InvalidArgument(format!("multiprecision constants: {e:?}")))?;
    let (cos_t, sin_t) = unit_roots(nodes, prec, &mut cc);

    let weights: Vec<(u64, BigFloat)> = terms
        .iter()
        .map(|&(m, lt)| {
            (
                (1u64 << m) % nodes,
                BigFloat::from_f64((lt - l_star).exp(), prec),
            )
        })
        .collect();

    // d^j/dθ^j cos θ as (use sine, negate)
    let (use_sin, negate) = match j % 4 {
        0 => (false, false),
        1 => (true, true),
        2 => (false, true),
        _ => (true, false),
    };
    let table = if use_sin { &sin_t } else { &cos_t };
    let accumulate = |acc: BigFloat, x: &BigFloat, idx: u64| {
        let p = x.mul(&table[idx as usize], prec, RM);
        if negate {
            acc.sub(&p, prec, RM)
        } else {
            acc.add(&p, prec, RM)
        }
    };

    let k128 = nodes as u128;
    let freq_mod = freq as u128 % k128;
    let mut total = BigFloat::from_f64(0.0, prec);
    for i in 0..nodes {
        let mut fx = BigFloat::from_f64(0.0, prec);
        for (m_mod, w) in &weights {
            fx = accumulate(fx, w, ((*m_mod as u128 * i as u128) % k128) as u64);
        }
        total = accumulate(total, &fx, ((freq_mod * i as u128) % k128) as u64);
    }
    let normalized = to_f64(&total)?;
    // 2 / (K F^j) * exp(l_star) * sigma
    let log_factor =
        LN_2 - (nodes as f64).ln() - jf * (freq as f64).ln() + l_star + series.scale().ln();
    Ok(normalized * log_factor.exp())
}

/// `cos(2 pi k / K)` and `sin(2 pi k / K)` for `k < K`, by repeated rotation.
fn unit_roots(nodes: u64, prec: usize, cc: &mut Consts) -> (Vec<BigFloat>, Vec<BigFloat>) {
    let two = BigFloat::from_f64(2.0, prec);
    let k = BigFloat::from_u64(nodes, prec);
    let angle = cc.pi(prec, RM).mul(&two, prec, RM).div(&k, prec, RM);
    let (wc, ws) = (angle.cos(prec, RM, cc), angle.sin(prec, RM, cc));
    let mut cos_t = Vec::with_capacity(nodes as usize);
    let mut sin_t = Vec::with_capacity(nodes as usize);
    let (mut c, mut s) = (BigFloat::from_f64(1.0, prec), BigFloat::from_f64(0.0, prec));
    for _ in 0..nodes {
        cos_t.push(c.clone());
        sin_t.push(s.clone());
        let nc = c.mul(&wc, prec, RM).sub(&s.mul(&ws, prec, RM), prec, RM);
        let ns = c.mul(&ws, prec, RM).add(&s.mul(&wc, prec, RM), prec, RM);
        c = nc;
        s = ns;
    }
    (cos_t, sin_t)
}

fn to_f64(x: &BigFloat) -> Result<f64> {
    if x.is_zero() {
        return Ok(0.0);
    }
    format!("{x}")
        .parse::<f64>()
        .map_err(|e| Error::InvalidArgument(format!("multiprecision result not convertible: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightSequence;
    use std::sync::Arc;

    fn series(k: u32, start: u32) -> LacunarySeries {
        LacunarySeries::new(
            Arc::new(WeightSequence::iterated_log(k).unwrap()),
            start,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn recovers_leading_coefficients() {
        let s = series(1, 1);
        for n in 1..=5 {
            let a = s.coefficient(n).unwrap().to_f64();
            let got = fourier_extract(&s, n, 0, 1 << (n + 6)).unwrap();
            assert!(((got - a) / a).abs() < 1e-6, "n={n}: {got} vs {a}");
        }
    }

    #[test]
    fn second_derivative_extraction_agrees() {
        let s = series(2, 2);
        for n in 2..=6 {
            let a = s.coefficient(n).unwrap().to_f64();
            let got = fourier_extract(&s, n, 2, 1 << (n + 6)).unwrap();
            assert!(((got - a) / a).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn off_support_frequency_vanishes() {
        let s = series(1, 1);
        let v = fourier_extract_frequency(&s, 3 * 4, 0, 1 << 10).unwrap();
        assert!(v.abs() < 1e-8, "{v}");
    }

    #[test]
    fn node_count_is_checked() {
        let s = series(1, 1);
        assert!(matches!(
            fourier_extract(&s, 4, 0, 32),
            Err(Error::InsufficientNodes { need: 64, got: 32 })
        ));
        assert!(fourier_extract(&s, 4, 5, 1 << 10).is_err());
    }
}
