use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The nested-circle map `T^k: R^k -> R^{k+1}`.
///
/// With `rho_1 = a_1`: `T_m = rho_m sin θ_m`, `rho_{m+1} = rho_m cos θ_m + a_{m+1}`
/// and `T_{k+1} = rho_k cos θ_k`. The radii condition `a_1 + ... + a_i < a_{i+1}`
/// keeps every `rho_m` positive, which makes the map injective on `[0, 2π)^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusMap {
    a: Vec<f64>,
}

impl TorusMap {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidTorus(
                "at least one radius is required".into(),
            ));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTorus("radii must be finite".into()));
        }
        if !(a[0] > 0.0) {
            return Err(Error::InvalidTorus(format!(
                "a_1 must be positive, got {}",
                a[0]
            )));
        }
        let mut prefix = 0.0;
        for i in 0..a.len() - 1 {
            prefix += a[i];
            if !(prefix < a[i + 1]) {
                return Err(Error::InvalidTorus(format!(
                    "a_1 + ... + a_{} = {prefix} must be below a_{} = {}",
                    i + 1,
                    i + 2,
                    a[i + 1]
                )));
            }
        }
        Ok(TorusMap { a })
    }

    /// Radii `a_i = 3^{i-1}`, the smallest integer progression with the nesting condition and slack.
    pub fn standard(k: usize) -> Result<Self> {
        Self::new((0..k).map(|i| 3f64.powi(i as i32)).collect())
    }

    pub fn radii(&self) -> &[f64] {
        &self.a
    }

    /// Number of angles `k`.
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `a_1 + ... + a_k`, a bound on every coordinate.
    pub fn radius_sum(&self) -> f64 {
        self.a.iter().sum()
    }

    /// Smallest slack `a_{i+1} - (a_1 + ... + a_i)`, together with `a_1`.
    pub fn min_gap(&self) -> f64 {
        let mut prefix = 0.0;
        let mut gap = self.a[0];
        for i in 0..self.a.len() - 1 {
            prefix += self.a[i];
            gap = gap.min(self.a[i + 1] - prefix);
        }
        gap
    }

    fn check_arity(&self, thetas: &[f64]) -> Result<()> {
        if thetas.len() != self.a.len() {
            return Err(Error::Arity {
                what: "torus angles",
                expected: self.a.len(),
                got: thetas.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, thetas: &[f64]) -> Result<Vec<f64>> {
        self.check_arity(thetas)?;
        let k = self.a.len();
        let mut out = Vec::with_capacity(k + 1);
        let mut rho = self.a[0];
        for (m, th) in thetas.iter().enumerate() {
            let (s, c) = th.sin_cos();
            out.push(rho * s);
            if m + 1 < k {
                rho = rho * c + self.a[m + 1];
            } else {
                out.push(rho * c);
            }
        }
        Ok(out)
    }

    /// Point and Jacobian `(k+1) x k`, propagating `d rho` through the recursion.
    pub fn eval_with_jacobian(&self, thetas: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.check_arity(thetas)?;
        let k = self.a.len();
        let mut out = Vec::with_capacity(k + 1);
        let mut jac = DMatrix::zeros(k + 1, k);
        let mut rho = self.a[0];
        let mut drho = vec![0.0; k];
        for m in 0..k {
            let (s, c) = thetas[m].sin_cos();
            out.push(rho * s);
            for p in 0..m {
                jac[(m, p)] = drho[p] * s;
            }
            jac[(m, m)] = rho * c;
            if m + 1 < k {
                for d in drho.iter_mut().take(m) {
                    *d *= c;
                }
                drho[m] = -rho * s;
                rho = rho * c + self.a[m + 1];
            } else {
                out.push(rho * c);
                for p in 0..m {
                    jac[(k, p)] = drho[p] * c;
                }
                jac[(k, m)] = -rho * s;
            }
        }
        Ok((out, jac))
    }

    /// Evaluates on the uniform grid of `[0, 2π)^k` and reports the closest pair of image points.
    pub fn injectivity_scan(&self, grid_per_axis: usize) -> Result<InjectivityReport> {
        let k = self.a.len();
        if grid_per_axis < 4 {
            return Err(Error::InvalidArgument(
                "injectivity scan needs at least 4 points per axis".into(),
            ));
        }
        if k > 4 {
            return Err(Error::InvalidArgument(format!(
                "injectivity scan supports k <= 4, got {k}"
            )));
        }
        let total = grid_per_axis.pow(k as u32);
        let step = std::f64::consts::TAU / grid_per_axis as f64;
        let mut points = Vec::with_capacity(total);
        let mut thetas = vec![0.0; k];
        for idx in 0..total {
            let mut rest = idx;
            for t in thetas.iter_mut() {
                *t = (rest % grid_per_axis) as f64 * step;
                rest /= grid_per_axis;
            }
            points.push(self.eval(&thetas)?);
        }
        let threshold = 1e-9 * self.min_gap();
        let (min_distance, collisions) = closest_pairs(&mut points, threshold);
        Ok(InjectivityReport {
            k,
            grid_per_axis,
            points: total,
            collisions,
            min_distance,
            threshold,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub k: usize,
    pub grid_per_axis: usize,
    pub points: usize,
    /// Pairs of distinct grid parameters whose images lie within `threshold`.
    pub collisions: usize,
    pub min_distance: f64,
    pub threshold: f64,
}

/// Minimum pairwise distance by a sweep along the first coordinate, plus the count of pairs closer than `threshold`.
fn closest_pairs(points: &mut [Vec<f64>], threshold: f64) -> (f64, usize) {
    points.sort_by(|p, q| p[0].total_cmp(&q[0]));
    let dist = |p: &[f64], q: &[f64]| {
        p.iter()
            .zip(q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let mut best = f64::INFINITY;
    let mut collisions = 0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dx = points[j][0] - points[i][0];
            if dx >= best && dx >= threshold {
                break;
            }
            let d = dist(&points[i], &points[j]);
            best = best.min(d);
            if d < threshold {
                collisions += 1;
            }
        }
    }
    (best, collisions)
}
