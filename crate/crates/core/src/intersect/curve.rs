use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::shapes::AnalyticCurve;
use super::{min_gap, sort_roots, IntersectionReport, Resolution, Root};
use crate::error::{Error, Result};
use crate::geometry::HypersurfaceSpec;

const U: f64 = f64::EPSILON;

/// Roots must satisfy `|Φ| <= noise + RESIDUAL_FACTOR * eps`.
const RESIDUAL_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveOptions {
    /// Initial uniform samples over the domain.
    pub grid: usize,
    /// Cells with `|Φ| < refine_factor * eps` at an endpoint are subdivided.
    pub refine_factor: f64,
    /// Maximum number of halvings of an initial cell.
    pub max_depth: u32,
    /// Evaluations allowed for refinement beyond the initial grid.
    pub refine_budget: usize,
    /// Bisection stops once the bracket is this narrow.
    pub tol: f64,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            grid: 1 << 12,
            refine_factor: 10.0,
            max_depth: 30,
            refine_budget: 1 << 18,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    t: f64,
    v: f64,
    d: f64,
    noise: f64,
}

struct Sampler<F> {
    phi: F,
    evaluations: usize,
}

impl<F: Fn(f64) -> (f64, f64, f64)> Sampler<F> {
    fn at(&mut self, t: f64) -> Sample {
        self.evaluations += 1;
        let (v, d, noise) = (self.phi)(t);
        Sample { t, v, d, noise }
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Finds the roots of a real function on `[lo, hi]`.
///
/// `phi(t)` returns the value, the derivative and a bound on the evaluation error of the value.
/// Roots are sign changes: a derivative sign change inside a cell is located by bisection
/// on the derivative, so two roots sharing a cell are separated. Cells where the value is
/// below `refine_factor * eps` are halved breadth first until the budget runs out.
pub fn intersect_1d<F>(
    phi: F,
    lo: f64,
    hi: f64,
    eps: f64,
    opts: &CurveOptions,
) -> Result<IntersectionReport>
where
    F: Fn(f64) -> (f64, f64, f64),
{
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "curve domain [{lo}, {hi}] is empty"
        )));
    }
    if opts.grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid must have at least 2 points, got {}",
            opts.grid
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bisection tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let mut s = Sampler {
        phi,
        evaluations: 0,
    };
    let g = opts.grid;
    let spacing = (hi - lo) / (g - 1) as f64;
    let grid: Vec<Sample> = (0..g)
        .map(|i| {
            let t = if i + 1 == g {
                hi
            } else {
                lo + spacing * i as f64
            };
            s.at(t)
        })
        .collect();
    let mut noise = grid.iter().map(|p| p.noise).fold(0.0, f64::max);
    let degenerate = grid.iter().all(|p| p.v.abs() <= p.noise + eps);
    let resolution = |noise: f64, evaluations: usize| Resolution {
        eps,
        noise,
        grid: g,
        spacing,
        refine_tol: opts.tol,
        evaluations,
    };
    if degenerate {
        return Ok(IntersectionReport {
            roots: vec![],
            tangential: vec![],
            min_gap: None,
            degenerate: true,
            residual_ok: true,
            singular_seeds: 0,
            seeds: 0,
            resolution: resolution(noise, s.evaluations),
        });
    }

    let small = eps * opts.refine_factor;
    let mut samples = grid.clone();
    let mut queue: VecDeque<(Sample, Sample, u32)> =
        grid.windows(2).map(|w| (w[0], w[1], 0)).collect();
    let budget_end = s.evaluations + opts.refine_budget;
    while let Some((a, b, depth)) = queue.pop_front() {
        if depth >= opts.max_depth || s.evaluations >= budget_end {
            continue;
        }
        if sign(a.d) * sign(b.d) < 0 {
            let c = critical_point(&mut s, a, b, opts, budget_end, &mut samples);
            samples.push(c);
            queue.push_back((a, c, depth + 1));
            queue.push_back((c, b, depth + 1));
        } else if a.v.abs().min(b.v.abs()) < small {
            let m = s.at(a.t + 0.5 * (b.t - a.t));
            samples.push(m);
            queue.push_back((a, m, depth + 1));
            queue.push_back((m, b, depth + 1));
        }
    }
    samples.sort_by(|p, q| p.t.total_cmp(&q.t));
    samples.dedup_by(|p, q| p.t == q.t);
    noise = samples.iter().map(|p| p.noise).fold(noise, f64::max);

    let mut roots = Vec::new();
    let mut prev: Option<Sample> = None;
    for &p in &samples {
        if p.v == 0.0 {
            continue;
        }
        if let Some(q) = prev {
            if sign(q.v) != sign(p.v) {
                roots.push(bisect(&mut s, q, p, eps, opts.tol));
            }
        }
        prev = Some(p);
    }
    let tangential = tangential_minima(&samples, eps);
    sort_roots(&mut roots);
    let residual_ok = roots
        .iter()
        .all(|r| r.residual <= noise + RESIDUAL_FACTOR * eps);
    Ok(IntersectionReport {
        min_gap: min_gap(&roots),
        roots,
        tangential,
        degenerate: false,
        residual_ok,
        singular_seeds: 0,
        seeds: 0,
        resolution: resolution(noise, s.evaluations),
    })
}

/// Bisection on the derivative sign between `a` and `b`; intermediate samples are recorded.
fn critical_point<F: Fn(f64) -> (f64, f64, f64)>(
    s: &mut Sampler<F>,
    mut a: Sample,
    mut b: Sample,
    opts: &CurveOptions,
    budget_end: usize,
    samples: &mut Vec<Sample>,
) -> Sample {
    let da = sign(a.d);
    for _ in 0..opts.max_depth {
        if b.t - a.t <= opts.tol || s.evaluations >= budget_end {
            break;
        }
        let m = s.at(a.t + 0.5 * (b.t - a.t));
        if m.d == 0.0 {
            return m;
        }
        samples.push(m);
        if sign(m.d) == da {
            a = m;
        } else {
            b = m;
        }
    }
    s.at(a.t + 0.5 * (b.t - a.t))
}

fn bisect<F: Fn(f64) -> (f64, f64, f64)>(
    s: &mut Sampler<F>,
    mut a: Sample,
    mut b: Sample,
    eps: f64,
    tol: f64,
) -> Root {
    let sa = sign(a.v);
    // past `tol`, keep halving while the residual is above the acceptance level and floats remain
    for _ in 0..200 {
        let m_t = a.t + 0.5 * (b.t - a.t);
        if m_t <= a.t || m_t >= b.t {
            break;
        }
        let best = if a.v.abs() <= b.v.abs() { a } else { b };
        if b.t - a.t <= tol && best.v.abs() <= best.noise + eps {
            break;
        }
        let m = s.at(m_t);
        if m.v == 0.0 {
            return Root {
                param: vec![m.t],
                residual: 0.0,
                uncertainty: 0.0,
            };
        }
        if sign(m.v) == sa {
            a = m;
        } else {
            b = m;
        }
    }
    let best = if a.v.abs() <= b.v.abs() { a } else { b };
    Root {
        param: vec![best.t],
        residual: best.v.abs(),
        uncertainty: b.t - a.t,
    }
}

/// Local minima of `|Φ|` without a sign change whose value is within the acceptance level.
fn tangential_minima(samples: &[Sample], eps: f64) -> Vec<Root> {
    let mut out: Vec<Root> = Vec::new();
    for w in samples.windows(3) {
        let (l, c, r) = (w[0], w[1], w[2]);
        let level = c.noise + RESIDUAL_FACTOR * eps;
        if c.v.abs() > level || c.v.abs() > l.v.abs() || c.v.abs() > r.v.abs() {
            continue;
        }
        if sign(l.v) == 0 || sign(l.v) != sign(r.v) {
            continue;
        }
        if c.v != 0.0 && sign(c.v) != sign(l.v) {
            continue;
        }
        out.push(Root {
            param: vec![c.t],
            residual: c.v.abs(),
            uncertainty: (r.t - l.t) / 2.0,
        });
    }
    out.dedup_by(|p, q| p.param == q.param);
    out
}

/// `Φ(t) = γ_m(t) - sum_j f_j(γ_j(t))` with derivative and evaluation-error bound.
pub fn curve_residual<'a>(
    curve: &'a AnalyticCurve,
    h: &'a HypersurfaceSpec,
) -> Result<impl Fn(f64) -> (f64, f64, f64) + 'a> {
    let m = h.m();
    if curve.dim() != m {
        return Err(Error::Arity {
            what: "curve components",
            expected: m,
            got: curve.dim(),
        });
    }
    curve.validate()?;
    let dcurve = curve.derivative();
    let base_err = h.defining_error();
    let lipschitz: Vec<f64> = h
        .components()
        .iter()
        .map(|f| f.slope_bound() + f.linear().abs())
        .collect();
    Ok(move |t: f64| {
        let last = &curve.components[m - 1];
        let mut v = last.eval(t);
        let mut d = dcurve.components[m - 1].eval(t);
        let mut mag = v.abs();
        let mut noise = base_err + last.eval_error(t);
        for (j, f) in h.components().iter().enumerate() {
            let x = curve.components[j].eval(t);
            let fx = f.value(x);
            v -= fx;
            d -= f.slope(x) * dcurve.components[j].eval(t);
            mag += fx.abs();
            noise += lipschitz[j] * curve.components[j].eval_error(t);
        }
        noise += 2.0 * m as f64 * U * mag;
        (v, d, noise)
    })
}

/// Intersects `curve` with the hypersurface `x_m = sum f_j(x_j)`.
pub fn curve_hypersurface_intersect(
    curve: &AnalyticCurve,
    h: &HypersurfaceSpec,
    eps: f64,
    opts: &CurveOptions,
) -> Result<IntersectionReport> {
    let floor = h.defining_error();
    if eps < floor {
        return Err(Error::EpsUnachievable {
            eps,
            reason: format!("below the certified evaluation error {floor:e} of the hypersurface"),
        });
    }
    let phi = curve_residual(curve, h)?;
    intersect_1d(phi, curve.domain[0], curve.domain[1], eps, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intersect::Component;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn exact(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> impl Fn(f64) -> (f64, f64, f64) {
        move |t| {
            let v = f(t);
            (v, df(t), 4.0 * U * v.abs().max(1e-300))
        }
    }

    #[test]
    fn sine_roots() {
        let rep = intersect_1d(
            exact(f64::sin, f64::cos),
            0.5,
            10.0,
            1e-12,
            &CurveOptions::default(),
        )
        .unwrap();
        let ts: Vec<f64> = rep.roots.iter().map(|r| r.param[0]).collect();
        assert_eq!(ts.len(), 3);
        for (t, k) in ts.iter().zip(1..) {
            assert!((t - k as f64 * PI).abs() < 1e-11, "{t}");
        }
        assert!(rep.residual_ok);
        assert!(rep.min_gap.unwrap() > 3.0);
    }

    #[test]
    fn two_roots_in_one_cell_are_split() {
        // roots at 0.5 ± 1e-5, far inside a single initial cell
        let c = 1e-10;
        let opts = CurveOptions {
            grid: 16,
            ..CurveOptions::default()
        };
        let rep = intersect_1d(
            exact(|t| (t - 0.5) * (t - 0.5) - c, |t| 2.0 * (t - 0.5)),
            0.0,
            1.0,
            1e-14,
            &opts,
        )
        .unwrap();
        assert_eq!(rep.roots.len(), 2);
        assert!((rep.min_gap.unwrap() - 2e-5).abs() < 1e-9);
    }

    #[test]
    fn even_root_reported_as_tangential() {
        let rep = intersect_1d(
            exact(|t| t * t, |t| 2.0 * t),
            -1.0,
            0.7,
            1e-12,
            &CurveOptions::default(),
        )
        .unwrap();
        assert!(rep.roots.is_empty());
        assert!(!rep.tangential.is_empty());
        assert!(rep.tangential.iter().all(|r| r.param[0].abs() < 1e-5));
    }

    #[test]
    fn constant_zero_is_degenerate() {
        let rep = intersect_1d(
            |_| (0.0, 0.0, 0.0),
            0.0,
            1.0,
            1e-12,
            &CurveOptions::default(),
        )
        .unwrap();
        assert!(rep.degenerate);
        assert!(rep.roots.is_empty());
    }

    #[test]
    fn curve_examples_against_hypersurface() {
        let h = HypersurfaceSpec::standard(2).unwrap();
        let f = &h.components()[0];
        let opts = CurveOptions::default();

        let x0 = 0.3;
        let on = AnalyticCurve::new(
            vec![Component::constant(x0), Component::constant(f.value(x0))],
            [0.0, 1.0],
        )
        .unwrap();
        let rep = curve_hypersurface_intersect(&on, &h, 1e-10, &opts).unwrap();
        assert!(rep.degenerate && rep.roots.is_empty());

        let c = f.value_bound() * 1.01;
        let above = AnalyticCurve::new(
            vec![Component::poly(vec![0.0, 1.0]), Component::constant(c)],
            [-4.0, 4.0],
        )
        .unwrap();
        let rep = curve_hypersurface_intersect(&above, &h, 1e-10, &opts).unwrap();
        assert!(!rep.degenerate && rep.roots.is_empty());

        let mid = AnalyticCurve::new(
            vec![Component::poly(vec![0.0, 1.0]), Component::constant(0.0)],
            [-3.0, 3.0],
        )
        .unwrap();
        let rep = curve_hypersurface_intersect(&mid, &h, 1e-10, &opts).unwrap();
        assert!(rep.roots.len() >= 2 && rep.residual_ok);
        for r in &rep.roots {
            assert!(f.value(r.param[0]).abs() <= rep.resolution.noise + 1e-9);
        }

        let wrong = AnalyticCurve::new(vec![Component::constant(0.0)], [0.0, 1.0]).unwrap();
        assert!(curve_hypersurface_intersect(&wrong, &h, 1e-10, &opts).is_err());
        assert!(matches!(
            curve_hypersurface_intersect(&mid, &h, 1e-30, &opts),
            Err(Error::EpsUnachievable { .. })
        ));
    }

    fn standard_h2() -> &'static HypersurfaceSpec {
        static H: std::sync::OnceLock<HypersurfaceSpec> = std::sync::OnceLock::new();
        H.get_or_init(|| HypersurfaceSpec::standard(2).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn line_crossing_matches_inverted_root(x1 in -3.0f64..3.0, c in -2.0f64..2.0, s in 0.1f64..4.0, flip in any::<bool>()) {
            let h = standard_h2();
            let s = if flip { -s } else { s };
            let level = -h.defining(&[x1, 0.0]).unwrap();
            let t_star = (level - c) / s;
            prop_assume!((t_star - 0.0).abs() > 1e-6 && (t_star - 1.0).abs() > 1e-6);
            let curve = AnalyticCurve::new(
                vec![Component::constant(x1), Component::poly(vec![c, s])],
                [0.0, 1.0],
            )
            .unwrap();
            let rep = curve_hypersurface_intersect(&curve, h, 1e-10, &CurveOptions::default()).unwrap();
            let inside = t_star > 0.0 && t_star < 1.0;
            prop_assert_eq!(rep.root_count(), inside as usize);
            if inside {
                prop_assert!((rep.roots[0].param[0] - t_star).abs() <= 1e-9);
            }
        }
    }
}
