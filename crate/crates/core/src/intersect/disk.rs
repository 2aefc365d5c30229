use std::f64::consts::PI;

use nalgebra::{Complex, Matrix2};
use serde::{Deserialize, Serialize};

use super::oracle::{scan_grid, solve2};
use super::shapes::AnalyticDisk;
use super::{min_gap, sort_roots, IntersectionReport, Resolution, Root};
use crate::error::{Error, Result};
use crate::geometry::{EmbeddingSpec, Variant};

const U: f64 = f64::EPSILON;

const RESIDUAL_FACTOR: f64 = 10.0;

/// Root uncertainty is capped here when the Jacobian is nearly singular.
const MAX_UNCERTAINTY: f64 = 1e-4;

/// Maximum complex dimension for the torus variants: the branch count is `4^(n-1)`.
const MAX_TORUS_N: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiskOptions {
    /// Grid nodes per axis over the square around the disk.
    pub grid: usize,
    /// Roots closer than this (or than their combined uncertainty) are merged.
    pub dedup: f64,
    /// Step shrink factor of the Newton line search.
    pub damping: f64,
    pub max_iter: usize,
    /// Central-difference step for the Jacobian, relative to `max(1, |ζ|)`.
    pub fd_step: f64,
    /// Bound on the distance between `φ(ζ)` and the manifold point at the recovered parameters.
    pub posterior_tol: f64,
}

impl Default for DiskOptions {
    fn default() -> Self {
        DiskOptions {
            grid: 512,
            dedup: 1e-8,
            damping: 0.5,
            max_iter: 60,
            fd_step: 1e-7,
            posterior_tol: 1e-6,
        }
    }
}

/// The two real equations cutting a codimension-2 manifold out of the image of a disk.
///
/// Torus variants: `(|z|² - r²) / (2r)` and `x_n - X(θ)`, where `θ` is recovered from
/// `x_1, y_1, ..., y_{n-1}` by inverting the torus chart; each angle has two preimages
/// (`asin s` or `π - asin s`), so there is one residual per branch bitmask.
/// Graph variant: `y_n - sum c_i w_i²` and `x_n - sum (f_j(x_j) + g_j(y_j))`, one branch.
pub struct DiskSystem<'a> {
    spec: &'a EmbeddingSpec,
    disk: &'a AnalyticDisk,
    noise: f64,
}

impl<'a> DiskSystem<'a> {
    pub fn new(spec: &'a EmbeddingSpec, disk: &'a AnalyticDisk) -> Result<Self> {
        disk.validate()?;
        if disk.dim() != spec.n() {
            return Err(Error::Arity {
                what: "disk components",
                expected: spec.n(),
                got: disk.dim(),
            });
        }
        if spec.variant() != Variant::ThmMeR && spec.n() > MAX_TORUS_N {
            return Err(Error::InvalidArgument(format!(
                "torus variants support n <= {MAX_TORUS_N} for disk intersection, got {}",
                spec.n()
            )));
        }
        // bound on sum |z_k| over the disk
        let zmax: f64 = disk
            .components
            .iter()
            .map(|c| {
                c.coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a[0].hypot(a[1]) * disk.radius.powi(i as i32))
                    .sum::<f64>()
            })
            .sum();
        let sup: f64 = spec
            .f()
            .iter()
            .chain(spec.g())
            .map(|p| p.value_bound() + p.linear().abs() * zmax)
            .sum();
        let scale = match spec.variant() {
            Variant::ThmMeR => spec.convex().iter().sum::<f64>() * zmax * zmax + zmax + sup,
            _ => {
                let r = spec.radius();
                zmax * zmax / r + r + spec.torus().map_or(0.0, |t| t.radius_sum()) + sup
            }
        };
        let noise = spec.perturbation_error() + 64.0 * U * scale;
        Ok(DiskSystem { spec, disk, noise })
    }

    pub fn branches(&self) -> usize {
        match self.spec.variant() {
            Variant::ThmMeR => 1,
            _ => 1 << (2 * self.spec.n() - 2),
        }
    }

    /// Bound on the evaluation error of one residual component.
    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// Residuals of every branch at `ζ`.
    pub fn residuals(&self, zeta: Complex<f64>, out: &mut [Option<[f64; 2]>]) {
        let z = self.disk.eval_real(zeta);
        match self.spec.variant() {
            Variant::ThmMeR => out[0] = Some(self.graph_residual(&z)),
            _ => {
                let k = 2 * self.spec.n() - 2;
                let sphere = self.sphere_residual(&z);
                let a = self.spec.torus().expect("torus variant").radii();
                self.descend(&z, a, 0, a[0], 0.0, 0, sphere, z[k], out);
            }
        }
    }

    /// Residual of one branch at `ζ`.
    pub fn residual(&self, zeta: Complex<f64>, branch: usize) -> Option<[f64; 2]> {
        let z = self.disk.eval_real(zeta);
        match self.spec.variant() {
            Variant::ThmMeR => Some(self.graph_residual(&z)),
            _ => {
                let thetas = self.angles(&z, branch)?;
                let k = thetas.len();
                let a = self.spec.torus().expect("torus variant").radii();
                let mut rho = a[0];
                for m in 0..k - 1 {
                    rho = rho * thetas[m].cos() + a[m + 1];
                }
                let base = rho * thetas[k - 1].cos();
                Some([
                    self.sphere_residual(&z),
                    z[k] - base - self.spec.perturbation_sum(&thetas),
                ])
            }
        }
    }

    fn sphere_residual(&self, z: &[f64]) -> f64 {
        let r = self.spec.radius();
        let s: f64 = z.iter().map(|c| c * c).sum();
        (s - r * r) / (2.0 * r)
    }

    fn graph_residual(&self, z: &[f64]) -> [f64; 2] {
        let n = self.spec.n();
        let amb = 2 * n;
        let w = &z[..amb - 1];
        let height: f64 = self
            .spec
            .convex()
            .iter()
            .zip(w)
            .map(|(c, v)| c * v * v)
            .sum();
        let sum: f64 = (0..n - 1)
            .map(|j| self.spec.f()[j].value(z[2 * j]) + self.spec.g()[j].value(z[2 * j + 1]))
            .sum();
        [z[amb - 1] - height, z[amb - 2] - sum]
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        z: &[f64],
        a: &[f64],
        m: usize,
        rho: f64,
        psum: f64,
        bits: usize,
        sphere: f64,
        xn: f64,
        out: &mut [Option<[f64; 2]>],
    ) {
        let k = a.len();
        let span = 1 << (k - m);
        let s = z[m] / rho;
        if !(s.abs() <= 1.0) {
            out[bits..bits + span].fill(None);
            return;
        }
        let t = s.asin();
        let c = ((1.0 - s) * (1.0 + s)).sqrt();
        let f = self.spec.f().get(m);
        for (choice, theta, cos) in [(0, t, c), (1, PI - t, -c)] {
            let p = psum + f.map_or(0.0, |f| f.value(theta));
            let b = bits | (choice << (k - 1 - m));
            if m + 1 == k {
                out[b] = Some([sphere, xn - rho * cos - p]);
            } else {
                self.descend(z, a, m + 1, rho * cos + a[m + 1], p, b, sphere, xn, out);
            }
        }
    }

    /// Torus angles of the branch `branch` (bit `k-1-m` selects `π - asin` for angle `m`).
    fn angles(&self, z: &[f64], branch: usize) -> Option<Vec<f64>> {
        let a = self.spec.torus()?.radii();
        let k = a.len();
        let mut rho = a[0];
        let mut thetas = Vec::with_capacity(k);
        for m in 0..k {
            let s = z[m] / rho;
            if !(s.abs() <= 1.0) {
                return None;
            }
            let flip = branch >> (k - 1 - m) & 1 == 1;
            let t = if flip { PI - s.asin() } else { s.asin() };
            thetas.push(t);
            if m + 1 < k {
                let c = ((1.0 - s) * (1.0 + s)).sqrt();
                rho = rho * if flip { -c } else { c } + a[m + 1];
            }
        }
        Some(thetas)
    }

    /// Distance between `φ(ζ)` and the manifold point at the parameters recovered on `branch`.
    pub fn posterior_distance(&self, zeta: Complex<f64>, branch: usize) -> Option<f64> {
        let z = self.disk.eval_real(zeta);
        let params = match self.spec.variant() {
            Variant::ThmMeR => z[..z.len() - 2].to_vec(),
            _ => self.angles(&z, branch)?,
        };
        let p = self.spec.eval(&params).ok()?;
        Some(
            p.iter()
                .zip(&z)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        )
    }
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

struct Polished {
    zeta: Complex<f64>,
    residual: f64,
    sigma_min: f64,
    singular: bool,
}

fn jacobian(
    sys: &DiskSystem,
    zeta: Complex<f64>,
    branch: usize,
    fd: f64,
) -> Option<([f64; 2], [f64; 2])> {
    let h = fd * zeta.norm().max(1.0);
    let px = sys.residual(zeta + h, branch)?;
    let mx = sys.residual(zeta - h, branch)?;
    let py = sys.residual(zeta + Complex::new(0.0, h), branch)?;
    let my = sys.residual(zeta - Complex::new(0.0, h), branch)?;
    Some((
        [(px[0] - mx[0]) / (2.0 * h), (px[1] - mx[1]) / (2.0 * h)],
        [(py[0] - my[0]) / (2.0 * h), (py[1] - my[1]) / (2.0 * h)],
    ))
}

fn polish(
    sys: &DiskSystem,
    start: Complex<f64>,
    branch: usize,
    opts: &DiskOptions,
) -> Option<Polished> {
    let mut zeta = start;
    let mut r = sys.residual(zeta, branch)?;
    for _ in 0..opts.max_iter {
        if norm(r) == 0.0 {
            break;
        }
        let Some((jx, jy)) = jacobian(sys, zeta, branch, opts.fd_step) else {
            break;
        };
        let (dx, dy) = match solve2(jx, jy, r) {
            Some(d) => d,
            None => {
                // Levenberg-Marquardt step with a small ridge
                let m = Matrix2::new(jx[0], jy[0], jx[1], jy[1]);
                let mtm = m.transpose() * m;
                let ridge = 1e-12 * mtm.trace().max(f64::MIN_POSITIVE);
                let rhs = -(m.transpose() * nalgebra::Vector2::new(r[0], r[1]));
                let d = (mtm + Matrix2::identity() * ridge).try_inverse()? * rhs;
                (d[0], d[1])
            }
        };
        let step = Complex::new(dx, dy);
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1e-10 {
            let cand = zeta + step * t;
            if let Some(rc) = sys.residual(cand, branch) {
                if norm(rc) < norm(r) {
                    zeta = cand;
                    r = rc;
                    accepted = true;
                    break;
                }
            }
            t *= opts.damping;
        }
        if !accepted || (step * t).norm() <= 1e-16 * zeta.norm().max(1.0) {
            break;
        }
    }
    let (jx, jy) = jacobian(sys, zeta, branch, opts.fd_step)?;
    let sv = Matrix2::new(jx[0], jy[0], jx[1], jy[1]).singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    Some(Polished {
        zeta,
        residual: norm(r),
        sigma_min: smin,
        singular: !(smin > 1e-10 * smax),
    })
}

/// Intersects the disk with the manifold of `spec`.
pub fn disk_manifold_intersect(
    disk: &AnalyticDisk,
    spec: &EmbeddingSpec,
    eps: f64,
    opts: &DiskOptions,
) -> Result<IntersectionReport> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive and finite, got {eps}"
        )));
    }
    if opts.grid < 3 {
        return Err(Error::InvalidArgument(format!(
            "disk grid must have at least 3 nodes per axis, got {}",
            opts.grid
        )));
    }
    if !(opts.damping > 0.0 && opts.damping < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in (0, 1), got {}",
            opts.damping
        )));
    }
    let sys = DiskSystem::new(spec, disk)?;
    let noise = sys.noise();
    if eps < noise {
        return Err(Error::EpsUnachievable {
            eps,
            reason: format!("below the residual evaluation noise {noise:e}"),
        });
    }
    let accept = noise + RESIDUAL_FACTOR * eps;
    let scan = scan_grid(
        |z, out| sys.residuals(z, out),
        sys.branches(),
        disk.radius,
        opts.grid,
        noise + eps,
    );
    let resolution = |evaluations: usize| Resolution {
        eps,
        noise,
        grid: opts.grid,
        spacing: scan.spacing,
        refine_tol: opts.dedup,
        evaluations,
    };
    if scan.flat_block {
        return Ok(IntersectionReport {
            roots: vec![],
            tangential: vec![],
            min_gap: None,
            degenerate: true,
            residual_ok: true,
            singular_seeds: 0,
            seeds: 0,
            resolution: resolution(scan.evaluations),
        });
    }
    let seeds: Vec<(usize, Complex<f64>)> = scan
        .candidates
        .iter()
        .filter(|c| c.step <= 4.0)
        .map(|c| (c.branch, c.node))
        .chain(scan.sign_cells.iter().copied())
        .collect();
    let mut found: Vec<Root> = Vec::new();
    let mut singular = 0;
    for &(branch, start) in &seeds {
        let Some(p) = polish(&sys, start, branch, opts) else {
            continue;
        };
        if p.singular {
            singular += 1;
        }
        if p.residual > accept || p.zeta.norm() > disk.radius * (1.0 + 1e-12) {
            continue;
        }
        match sys.posterior_distance(p.zeta, branch) {
            Some(d) if d <= opts.posterior_tol => {}
            _ => continue,
        }
        let uncertainty = ((p.residual + noise) / p.sigma_min).min(MAX_UNCERTAINTY);
        found.push(Root {
            param: vec![p.zeta.re, p.zeta.im],
            residual: p.residual,
            uncertainty,
        });
    }
    // greedy clustering, best residual first
    found.sort_by(|a, b| {
        a.residual
            .total_cmp(&b.residual)
            .then(a.param[0].total_cmp(&b.param[0]))
    });
    let mut roots: Vec<Root> = Vec::new();
    for r in found {
        let near = roots.iter().any(|k| {
            let d = (k.param[0] - r.param[0]).hypot(k.param[1] - r.param[1]);
            d <= opts.dedup.max(k.uncertainty + r.uncertainty)
        });
        if !near {
            roots.push(r);
        }
    }
    sort_roots(&mut roots);
    let evaluations = scan.evaluations;
    Ok(IntersectionReport {
        min_gap: min_gap(&roots),
        residual_ok: roots.iter().all(|r| r.residual <= accept),
        roots,
        tangential: vec![],
        degenerate: false,
        singular_seeds: singular,
        seeds: seeds.len(),
        resolution: resolution(evaluations),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intersect::ComplexPoly;

    fn point_disk(z: &[f64], dir: &[Complex<f64>], radius: f64) -> AnalyticDisk {
        let comps = dir
            .iter()
            .enumerate()
            .map(|(k, v)| ComplexPoly::new(vec![Complex::new(z[2 * k], z[2 * k + 1]), *v]))
            .collect();
        AnalyticDisk::new(comps, radius).unwrap()
    }

    #[test]
    fn branch_tree_matches_single_branch() {
        let spec = EmbeddingSpec::standard_thm1(2).unwrap();
        let z0 = spec.eval(&[0.4, 1.1]).unwrap();
        let disk = point_disk(&z0, &[Complex::new(0.3, -0.2), Complex::new(0.1, 0.5)], 0.5);
        let sys = DiskSystem::new(&spec, &disk).unwrap();
        let mut out = vec![None; sys.branches()];
        let zeta = Complex::new(0.1, -0.2);
        sys.residuals(zeta, &mut out);
        for (b, r) in out.iter().enumerate() {
            let single = sys.residual(zeta, b);
            match (r, single) {
                (Some(x), Some(y)) => {
                    assert!((x[0] - y[0]).abs() < 1e-12 && (x[1] - y[1]).abs() < 1e-12)
                }
                (None, None) => {}
                _ => panic!("branch {b} validity differs"),
            }
        }
        // the branch with both angles below π/2 recovers the parameters at ζ = 0
        let r = sys.residual(Complex::new(0.0, 0.0), 0).unwrap();
        assert!(norm(r) < 1e-12);
        assert!(sys.posterior_distance(Complex::new(0.0, 0.0), 0).unwrap() < 1e-12);
    }

    #[test]
    fn line_through_a_point_finds_it() {
        let spec = EmbeddingSpec::standard_thm1(2).unwrap();
        let z0 = spec.eval(&[0.4, 1.1]).unwrap();
        let disk = point_disk(&z0, &[Complex::new(0.3, -0.2), Complex::new(0.1, 0.5)], 0.5);
        let rep = disk_manifold_intersect(&disk, &spec, 1e-10, &DiskOptions::default()).unwrap();
        assert!(!rep.degenerate && rep.residual_ok);
        assert!(
            rep.roots
                .iter()
                .any(|r| r.param[0].hypot(r.param[1]) < 1e-8),
            "{:?}",
            rep.roots
        );
    }

    #[test]
    fn constant_disk_on_the_manifold_is_degenerate() {
        let spec = EmbeddingSpec::standard_thm1(2).unwrap();
        let z0 = spec.eval(&[0.4, 1.1]).unwrap();
        let disk = point_disk(&z0, &[Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)], 0.5);
        let rep = disk_manifold_intersect(
            &disk,
            &spec,
            1e-10,
            &DiskOptions {
                grid: 64,
                ..DiskOptions::default()
            },
        )
        .unwrap();
        assert!(rep.degenerate);
    }

    #[test]
    fn graph_variant_origin() {
        let spec = EmbeddingSpec::make_thm_me_r(
            2,
            &crate::geometry::SeriesParams::cyclic(1),
            &crate::geometry::SeriesParams::cyclic(1),
            crate::geometry::ScalePolicy::Budget,
            None,
        )
        .unwrap();
        // φ(ζ) = (ζ, 2ζ) passes through the origin, which lies on the graph manifold
        let disk = AnalyticDisk::new(
            vec![
                ComplexPoly::new(vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)]),
                ComplexPoly::new(vec![Complex::new(0.0, 0.0), Complex::new(2.0, 0.0)]),
            ],
            0.3,
        )
        .unwrap();
        let rep = disk_manifold_intersect(
            &disk,
            &spec,
            1e-10,
            &DiskOptions {
                grid: 128,
                ..DiskOptions::default()
            },
        )
        .unwrap();
        assert!(
            rep.roots
                .iter()
                .any(|r| r.param[0].hypot(r.param[1]) < 1e-8),
            "{:?}",
            rep.roots
        );
    }

    #[test]
    fn dimension_mismatch() {
        let spec = EmbeddingSpec::standard_thm1(2).unwrap();
        let disk =
            AnalyticDisk::new(vec![ComplexPoly::new(vec![Complex::new(1.0, 0.0)])], 1.0).unwrap();
        assert!(matches!(
            disk_manifold_intersect(&disk, &spec, 1e-10, &DiskOptions::default()),
            Err(Error::Arity { .. })
        ));
    }
}
