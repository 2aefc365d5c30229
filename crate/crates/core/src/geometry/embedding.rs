use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::torus::TorusMap;
use crate::error::{Error, Result};
use crate::lacunary::{EvalPlan, LacunarySeries};
use crate::weights::WeightSequence;

/// Tolerance for evaluating perturbation functions inside geometric maps,
/// relative to the certified sup of the evaluated derivative (floored at 1e-2).
pub const PERTURBATION_EPS: f64 = 1e-12;

/// Fraction of `a_1` (of 1 for graph manifolds) allotted to `sum_j sup |f_j'|`.
pub const C1_BUDGET: f64 = 0.1;

/// Weight order for the `i`-th component (0-based): 1, 2, 3, 1, 2, 3, ...
pub fn cyclic_order(i: usize) -> u32 {
    (i % 3) as u32 + 1
}

/// How the uniform scale of each perturbation series is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalePolicy {
    /// Split the C¹ budget equally across the series.
    Budget,
    /// Use this scale for every series; rejected if it exceeds the budget.
    Fixed(f64),
}

/// `p(x) = sigma (S(x) - S(0)) + lambda x` for a centered perturbation, `sigma S(x)` otherwise.
#[derive(Debug, Clone)]
pub struct Perturbation {
    series: Arc<LacunarySeries>,
    centered: bool,
    linear: f64,
    offset: f64,
    value_plan: EvalPlan,
    slope_plan: EvalPlan,
    // certified sup |p - lambda x| and sup |p' - lambda|
    value_bound: f64,
    slope_bound: f64,
}

impl Perturbation {
    pub fn new(series: LacunarySeries, centered: bool, linear: f64) -> Result<Self> {
        let sup0 = series.derivative_bound(0)?;
        let slope_bound = series.derivative_bound(1)?;
        let value_plan = series.plan(0, PERTURBATION_EPS * sup0.max(1e-2))?;
        let slope_plan = series.plan(1, PERTURBATION_EPS * slope_bound.max(1e-2))?;
        let offset = if centered {
            value_plan.eval(0.0).value
        } else {
            0.0
        };
        let value_bound = if centered { 2.0 * sup0 } else { sup0 };
        Ok(Perturbation {
            series: Arc::new(series),
            centered,
            linear,
            offset,
            value_plan,
            slope_plan,
            value_bound,
            slope_bound,
        })
    }

    pub fn series(&self) -> &LacunarySeries {
        &self.series
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn linear(&self) -> f64 {
        self.linear
    }

    pub fn value(&self, x: f64) -> f64 {
        self.value_plan.eval(x).value - self.offset + self.linear * x
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.slope_plan.eval(x).value + self.linear
    }

    /// Certified bound on the evaluation error of [`value`](Self::value).
    pub fn value_error(&self) -> f64 {
        if self.centered {
            2.0 * self.value_plan.error_bound()
        } else {
            self.value_plan.error_bound()
        }
    }

    pub fn slope_error(&self) -> f64 {
        self.slope_plan.error_bound()
    }

    /// Certified `sup |p(x) - lambda x|`.
    pub fn value_bound(&self) -> f64 {
        self.value_bound
    }

    /// Certified `sup |p'(x) - lambda|`.
    pub fn slope_bound(&self) -> f64 {
        self.slope_bound
    }
}

/// Parameters of one perturbation series: weight order, first frequency index, optional fixed scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesParams {
    pub order: u32,
    #[serde(default = "default_start")]
    pub start: u32,
    #[serde(default)]
    pub scale: Option<f64>,
}

fn default_start() -> u32 {
    1
}

impl SeriesParams {
    pub fn cyclic(count: usize) -> Vec<SeriesParams> {
        (0..count)
            .map(|i| SeriesParams {
                order: cyclic_order(i),
                start: 1,
                scale: None,
            })
            .collect()
    }

    pub fn build(&self, scale: f64) -> Result<LacunarySeries> {
        let seq = Arc::new(WeightSequence::iterated_log(self.order)?);
        LacunarySeries::new(seq, self.start, scale)
    }
}

/// Scales for a list of series under `policy` with total derivative budget `budget`.
///
/// Per-series overrides in `params` win; the budget is then checked, not assumed.
fn assign_scales(params: &[SeriesParams], policy: ScalePolicy, budget: f64) -> Result<Vec<f64>> {
    let slopes = params
        .iter()
        .map(|p| p.build(1.0)?.derivative_bound(1))
        .collect::<Result<Vec<_>>>()?;
    let count = params.len().max(1) as f64;
    let scales: Vec<f64> = params
        .iter()
        .zip(&slopes)
        .map(|(p, &b)| match (p.scale, policy) {
            (Some(s), _) | (None, ScalePolicy::Fixed(s)) => s,
            (None, ScalePolicy::Budget) => budget / (count * b) * (1.0 - 1e-12),
        })
        .collect();
    if let Some(s) = scales.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "series scale must be finite and >= 0, got {s}"
        )));
    }
    let used: f64 = scales.iter().zip(&slopes).map(|(s, b)| s * b).sum();
    if used > budget {
        return Err(Error::InvalidArgument(format!(
            "sum of scaled derivative bounds {used:e} exceeds the C1 budget {budget:e}"
        )));
    }
    Ok(scales)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "F_perturbed")]
    FPerturbed,
    #[serde(rename = "G_torus")]
    GTorus,
    #[serde(rename = "ThmMe_R")]
    ThmMeR,
}

/// A parametrized `2n-2`-dimensional manifold in `C^n = R^{2n}` with ambient
/// coordinates ordered `(x_1, y_1, ..., x_n, y_n)`.
#[derive(Debug, Clone)]
pub struct EmbeddingSpec {
    variant: Variant,
    n: usize,
    torus: Option<TorusMap>,
    f: Vec<Perturbation>,
    g: Vec<Perturbation>,
    radius: f64,
    convex: Vec<f64>,
}

/// A coordinate slice of the parameter space: listed parameters are pinned, the rest are free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submanifold {
    pub param_dim: usize,
    pub fixed: Vec<(usize, f64)>,
    pub free: Vec<usize>,
}

impl Submanifold {
    /// Full parameter vector from values of the free parameters.
    pub fn embed(&self, free_values: &[f64]) -> Result<Vec<f64>> {
        if free_values.len() != self.free.len() {
            return Err(Error::Arity {
                what: "free parameters",
                expected: self.free.len(),
                got: free_values.len(),
            });
        }
        let mut p = vec![0.0; self.param_dim];
        for &(i, v) in &self.fixed {
            p[i] = v;
        }
        for (&i, &v) in self.free.iter().zip(free_values) {
            p[i] = v;
        }
        Ok(p)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "complex dimension n must be at least 2, got {n}"
        )));
    }
    Ok(())
}

fn check_torus(n: usize, torus: &TorusMap) -> Result<()> {
    if torus.dim() != 2 * n - 2 {
        return Err(Error::Arity {
            what: "torus radii",
            expected: 2 * n - 2,
            got: torus.dim(),
        });
    }
    Ok(())
}

/// `r = 2 sqrt(2n - 1) (A + sum B_j)`: every one of the `2n - 1` coordinates
/// under the root is bounded by `A + sum B_j`, so the radicand stays above `3r²/4`.
pub fn safe_radius(n: usize, radius_sum: f64, perturbation_sup: f64) -> f64 {
    2.0 * ((2 * n - 1) as f64).sqrt() * (radius_sum + perturbation_sup)
}

fn resolve_radius(n: usize, bound: f64, radius: Option<f64>) -> Result<f64> {
    match radius {
        None => Ok(safe_radius(n, bound, 0.0)),
        Some(r) if r.is_finite() && r * r > (2 * n - 1) as f64 * bound * bound => Ok(r),
        Some(r) => Err(Error::InvalidArgument(format!(
            "radius {r} does not exceed the coordinate bound sqrt({}) * {bound}",
            2 * n - 1
        ))),
    }
}

impl EmbeddingSpec {
    /// `x_j, y_j` from the torus, `x_n = T_{2n-1} + sum f_j(θ_j)`, `y_n` on the sphere of radius `r`.
    pub fn make_f(
        n: usize,
        torus: TorusMap,
        series: &[SeriesParams],
        policy: ScalePolicy,
        radius: Option<f64>,
    ) -> Result<Self> {
        check_n(n)?;
        check_torus(n, &torus)?;
        if series.len() != 2 * n - 2 {
            return Err(Error::Arity {
                what: "perturbation series",
                expected: 2 * n - 2,
                got: series.len(),
            });
        }
        let scales = assign_scales(series, policy, C1_BUDGET * torus.radii()[0])?;
        let f = series
            .iter()
            .zip(&scales)
            .map(|(p, &s)| Perturbation::new(p.build(s)?, false, 0.0))
            .collect::<Result<Vec<_>>>()?;
        let sup: f64 = f.iter().map(|p| p.value_bound()).sum();
        let radius = resolve_radius(n, torus.radius_sum() + sup, radius)?;
        Ok(EmbeddingSpec {
            variant: Variant::FPerturbed,
            n,
            torus: Some(torus),
            f,
            g: Vec::new(),
            radius,
            convex: Vec::new(),
        })
    }

    /// The closed-form torus embedding without perturbation.
    pub fn make_g(n: usize, torus: TorusMap, radius: Option<f64>) -> Result<Self> {
        check_n(n)?;
        check_torus(n, &torus)?;
        let radius = resolve_radius(n, torus.radius_sum(), radius)?;
        Ok(EmbeddingSpec {
            variant: Variant::GTorus,
            n,
            torus: Some(torus),
            f: Vec::new(),
            g: Vec::new(),
            radius,
            convex: Vec::new(),
        })
    }

    /// Graph manifold `x_n = sum (f_j(x_j) + g_j(y_j))`, `y_n = sum c_i w_i²` over
    /// `w = (x_1, y_1, ..., x_{n-1}, y_{n-1}, x_n)`.
    ///
    /// All perturbations are centered so they vanish at 0; `f_1` carries the
    /// extra linear term `x` so that `f_1'(0) = 1`, while pure-cosine `g_j` have `g_j'(0) = 0`.
    pub fn make_thm_me_r(
        n: usize,
        f_series: &[SeriesParams],
        g_series: &[SeriesParams],
        policy: ScalePolicy,
        convex: Option<Vec<f64>>,
    ) -> Result<Self> {
        check_n(n)?;
        if f_series.len() != n - 1 {
            return Err(Error::Arity {
                what: "f series",
                expected: n - 1,
                got: f_series.len(),
            });
        }
        if g_series.len() != n - 1 {
            return Err(Error::Arity {
                what: "g series",
                expected: n - 1,
                got: g_series.len(),
            });
        }
        let convex = convex.unwrap_or_else(|| vec![1.0; 2 * n - 1]);
        if convex.len() != 2 * n - 1 {
            return Err(Error::Arity {
                what: "convex coefficients",
                expected: 2 * n - 1,
                got: convex.len(),
            });
        }
        if let Some(c) = convex.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "convex coefficients must be positive, got {c}"
            )));
        }
        let all: Vec<SeriesParams> = f_series.iter().chain(g_series).copied().collect();
        let scales = assign_scales(&all, policy, C1_BUDGET)?;
        let mut perts = all
            .iter()
            .zip(&scales)
            .enumerate()
            .map(|(i, (p, &s))| {
                Perturbation::new(p.build(s)?, true, if i == 0 { 1.0 } else { 0.0 })
            })
            .collect::<Result<Vec<_>>>()?;
        let g = perts.split_off(n - 1);
        Ok(EmbeddingSpec {
            variant: Variant::ThmMeR,
            n,
            torus: None,
            f: perts,
            g,
            radius: f64::NAN,
            convex,
        })
    }

    /// Theorem-1 manifold with radii `3^{i-1}`, cyclic weight orders and the C¹ budget.
    pub fn standard_thm1(n: usize) -> Result<Self> {
        check_n(n)?;
        Self::make_f(
            n,
            TorusMap::standard(2 * n - 2)?,
            &SeriesParams::cyclic(2 * n - 2),
            ScalePolicy::Budget,
            None,
        )
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Complex dimension of the ambient space.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn param_dim(&self) -> usize {
        2 * self.n - 2
    }

    pub fn torus(&self) -> Option<&TorusMap> {
        self.torus.as_ref()
    }

    /// Sphere radius (NaN for graph manifolds).
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn f(&self) -> &[Perturbation] {
        &self.f
    }

    pub fn g(&self) -> &[Perturbation] {
        &self.g
    }

    pub fn convex(&self) -> &[f64] {
        &self.convex
    }

    /// Certified bound on the evaluation error of `x_n` coming from the perturbations.
    pub fn perturbation_error(&self) -> f64 {
        self.f.iter().chain(&self.g).map(|p| p.value_error()).sum()
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_dim() {
            return Err(Error::Arity {
                what: "manifold parameters",
                expected: self.param_dim(),
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(
                "manifold parameters must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Sum of the perturbations `sum_j f_j(θ_j)` for the torus variants.
    pub fn perturbation_sum(&self, thetas: &[f64]) -> f64 {
        self.f.iter().zip(thetas).map(|(p, &t)| p.value(t)).sum()
    }

    fn sphere_height(&self, coords: &[f64]) -> f64 {
        let s: f64 = coords.iter().map(|c| c * c).sum();
        (self.radius * self.radius - s).sqrt()
    }

    fn convex_height(&self, w: &[f64]) -> f64 {
        self.convex.iter().zip(w).map(|(c, v)| c * v * v).sum()
    }

    /// The point of `R^{2n}` with the given parameters.
    pub fn eval(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.check_params(params)?;
        match self.variant {
            Variant::FPerturbed => {
                let mut z = self.torus.as_ref().expect("torus variant").eval(params)?;
                let last = z.len() - 1;
                z[last] += self.perturbation_sum(params);
                let yn = self.sphere_height(&z);
                z.push(yn);
                Ok(z)
            }
            Variant::GTorus => {
                let mut z =
                    g_closed_form(self.torus.as_ref().expect("torus variant").radii(), params);
                let yn = self.sphere_height(&z);
                z.push(yn);
                Ok(z)
            }
            Variant::ThmMeR => {
                let mut z = params.to_vec();
                let xn: f64 = (0..self.n - 1)
                    .map(|j| self.f[j].value(params[2 * j]) + self.g[j].value(params[2 * j + 1]))
                    .sum();
                z.push(xn);
                let yn = self.convex_height(&z);
                z.push(yn);
                Ok(z)
            }
        }
    }

    /// Jacobian with one row per parameter (the tangent vectors), `2n` columns.
    pub fn jacobian(&self, params: &[f64]) -> Result<DMatrix<f64>> {
        self.check_params(params)?;
        let d = self.param_dim();
        let amb = 2 * self.n;
        let mut jac = DMatrix::zeros(d, amb);
        match self.variant {
            Variant::FPerturbed | Variant::GTorus => {
                let (mut z, tj) = self
                    .torus
                    .as_ref()
                    .expect("torus variant")
                    .eval_with_jacobian(params)?;
                for p in 0..d {
                    for c in 0..amb - 1 {
                        jac[(p, c)] = tj[(c, p)];
                    }
                }
                if self.variant == Variant::FPerturbed {
                    let last = amb - 2;
                    z[last] += self.perturbation_sum(params);
                    for p in 0..d {
                        jac[(p, last)] += self.f[p].slope(params[p]);
                    }
                }
                let yn = self.sphere_height(&z);
                if !(yn > 1e-12 * self.radius) {
                    return Err(Error::Singular(format!(
                        "y_n = {yn} vanishes on the sphere chart"
                    )));
                }
                for p in 0..d {
                    let dot: f64 = (0..amb - 1).map(|c| z[c] * jac[(p, c)]).sum();
                    jac[(p, amb - 1)] = -dot / yn;
                }
            }
            Variant::ThmMeR => {
                let z = self.eval(params)?;
                let xn = z[amb - 2];
                let cn = self.convex[amb - 2];
                for j in 0..self.n - 1 {
                    let (px, py) = (2 * j, 2 * j + 1);
                    let sx = self.f[j].slope(params[px]);
                    let sy = self.g[j].slope(params[py]);
                    jac[(px, px)] = 1.0;
                    jac[(py, py)] = 1.0;
                    jac[(px, amb - 2)] = sx;
                    jac[(py, amb - 2)] = sy;
                    jac[(px, amb - 1)] = 2.0 * self.convex[px] * params[px] + 2.0 * cn * xn * sx;
                    jac[(py, amb - 1)] = 2.0 * self.convex[py] * params[py] + 2.0 * cn * xn * sy;
                }
            }
        }
        Ok(jac)
    }

    /// The `n`-dimensional submanifold `M`: `θ_{2j-1} = 0` for `j <= n-2` on the
    /// torus variants, `y_j = 0` for `j >= 2` on the graph variant.
    pub fn submanifold_m(&self) -> Submanifold {
        let d = self.param_dim();
        let fixed: Vec<(usize, f64)> = match self.variant {
            Variant::FPerturbed | Variant::GTorus => {
                (0..self.n - 2).map(|j| (2 * j, 0.0)).collect()
            }
            Variant::ThmMeR => (1..self.n - 1).map(|j| (2 * j + 1, 0.0)).collect(),
        };
        let free = (0..d)
            .filter(|i| !fixed.iter().any(|(f, _)| f == i))
            .collect();
        Submanifold {
            param_dim: d,
            fixed,
            free,
        }
    }

    /// Parameters of the distinguished point: `θ_{2n-2} = π/2` and all other angles 0 on the
    /// torus variants (`P = (0, ..., 0, a, 0, b)` before perturbation), the origin on the graph variant.
    pub fn distinguished_point(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.param_dim()];
        if self.variant != Variant::ThmMeR {
            *p.last_mut().expect("param_dim >= 2") = FRAC_PI_2;
        }
        p
    }

    /// Tangent vectors of `sub` (or of the whole manifold) at `params`.
    pub fn tangent_basis(&self, params: &[f64], sub: Option<&Submanifold>) -> Result<DMatrix<f64>> {
        let jac = self.jacobian(params)?;
        Ok(match sub {
            None => jac,
            Some(s) => jac.select_rows(s.free.iter()),
        })
    }
}

/// `G` written out: `x_j = (sum_{k < 2j-1} a_k cos θ_k ... cos θ_{2j-2} + a_{2j-1}) sin θ_{2j-1}`,
/// the same for `y_j` with `2j`, and `x_n` with the final cosine. Returns the `2n - 1` coordinates before `y_n`.
pub fn g_closed_form(a: &[f64], thetas: &[f64]) -> Vec<f64> {
    let d = a.len();
    // radius multiplying the trigonometric factor of coordinate m (0-based)
    let rho = |m: usize| -> f64 {
        let mut acc = a[m];
        for k in 0..m {
            let prod: f64 = thetas[k..m].iter().map(|t| t.cos()).product();
            acc += a[k] * prod;
        }
        acc
    };
    let mut out: Vec<f64> = (0..d).map(|m| rho(m) * thetas[m].sin()).collect();
    out.push(rho(d - 1) * thetas[d - 1].cos());
    out
}
