use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::curve::curve_residual;
use super::disk::DiskSystem;
use super::shapes::{AnalyticCurve, AnalyticDisk};
use crate::error::{Error, Result};
use crate::geometry::{EmbeddingSpec, HypersurfaceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleOptions {
    /// Samples of the 1-D oracle.
    pub density_1d: usize,
    /// Samples per axis of the 2-D oracle.
    pub density_2d: usize,
    /// A residual minimum counts when the linearized root lies within `threshold` grid
    /// spacings of it. The middle entry is the reference count.
    pub thresholds: Vec<f64>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            density_1d: 1 << 20,
            density_2d: 1024,
            thresholds: vec![1.0, 2.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Oracle1d {
    pub density: usize,
    /// Sign changes between consecutive nonzero samples.
    pub count: usize,
    pub brackets: Vec<[f64; 2]>,
    /// Smallest `|f|` over the samples and where it occurs; exposes roots without a sign change.
    pub min_abs: f64,
    pub argmin: f64,
}

/// Exhaustive sign-change count of `f` on `density` uniform samples of `[lo, hi]`.
pub fn grid_oracle_1d(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    density: usize,
) -> Result<Oracle1d> {
    if density < 2 {
        return Err(Error::InvalidArgument(format!(
            "oracle density must be at least 2, got {density}"
        )));
    }
    if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "oracle domain [{lo}, {hi}] is empty"
        )));
    }
    let h = (hi - lo) / (density - 1) as f64;
    let mut brackets = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let (mut min_abs, mut argmin) = (f64::INFINITY, lo);
    for i in 0..density {
        let t = if i + 1 == density {
            hi
        } else {
            lo + h * i as f64
        };
        let v = f(t);
        if v.abs() < min_abs {
            min_abs = v.abs();
            argmin = t;
        }
        if v == 0.0 {
            continue;
        }
        if let Some((pt, pv)) = prev {
            if (pv < 0.0) != (v < 0.0) {
                brackets.push([pt, t]);
            }
        }
        prev = Some((t, v));
    }
    Ok(Oracle1d {
        density,
        count: brackets.len(),
        brackets,
        min_abs,
        argmin,
    })
}

/// The 1-D oracle on the curve-hypersurface residual.
pub fn curve_oracle(
    curve: &AnalyticCurve,
    h: &HypersurfaceSpec,
    density: usize,
) -> Result<Oracle1d> {
    let phi = curve_residual(curve, h)?;
    grid_oracle_1d(|t| phi(t).0, curve.domain[0], curve.domain[1], density)
}

/// A grid node where the linearized distance to the zero set is locally minimal on some branch.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate {
    pub branch: usize,
    pub node: Complex<f64>,
    /// Node plus the Newton step of the finite-difference linearization.
    pub predicted: Complex<f64>,
    /// Length of that step in grid spacings.
    pub step: f64,
    /// Residual norm at the node.
    pub value: f64,
    /// Some neighbour is off the branch or outside the disk.
    pub edge: bool,
}

pub(crate) struct GridScan {
    pub spacing: f64,
    pub candidates: Vec<Candidate>,
    /// Centers of cells where both residual components change sign, with their branch.
    pub sign_cells: Vec<(usize, Complex<f64>)>,
    /// Some 3x3 block of nodes had every residual norm at or below the flat level.
    pub flat_block: bool,
    pub evaluations: usize,
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

type Row = Vec<Option<[f64; 2]>>;

/// Scans `density x density` nodes of the square around the disk.
///
/// `field(ζ, out)` writes the residual of each branch, `None` where the branch is undefined.
/// Nodes outside the disk are skipped. At each node the Newton step `δ = -J⁻¹ Ψ` is formed
/// from central differences of the neighbours; candidates are local minima of `|δ|`, which
/// near a transverse root is the distance to it regardless of how anisotropic `J` is.
/// Three rows of residuals and three rows of steps are kept in memory.
pub(crate) fn scan_grid<F>(
    field: F,
    branches: usize,
    radius: f64,
    density: usize,
    flat_level: f64,
) -> GridScan
where
    F: Fn(Complex<f64>, &mut [Option<[f64; 2]>]),
{
    let d = density;
    let b_n = branches;
    let h = 2.0 * radius / (d - 1) as f64;
    let coord = |i: usize| {
        if i + 1 == d {
            radius
        } else {
            -radius + h * i as f64
        }
    };
    let mut evaluations = 0;
    let mut eval_row = |j: usize, row: &mut Row| {
        let y = coord(j);
        for i in 0..d {
            let x = coord(i);
            let cell = &mut row[i * b_n..(i + 1) * b_n];
            if x * x + y * y <= radius * radius {
                field(Complex::new(x, y), cell);
                evaluations += 1;
            } else {
                cell.fill(None);
            }
        }
    };
    let mut out = GridScan {
        spacing: h,
        candidates: vec![],
        sign_cells: vec![],
        flat_block: false,
        evaluations: 0,
    };
    // res[0..3] = residual rows j-1, j, j+1; step[0..3] = step rows j-2, j-1, j
    let mut res: [Row; 3] = std::array::from_fn(|_| vec![None; d * b_n]);
    let mut step: [Vec<Option<(f64, f64)>>; 3] = std::array::from_fn(|_| vec![None; d * b_n]);
    let mut value: [Vec<f64>; 3] = std::array::from_fn(|_| vec![f64::INFINITY; d * b_n]);
    let mut edge: [Vec<bool>; 3] = std::array::from_fn(|_| vec![false; d * b_n]);
    eval_row(0, &mut res[1]);
    eval_row(1, &mut res[2]);
    for j in 0..d {
        if j + 1 < d {
            sign_cells(
                &res[1],
                &res[2],
                b_n,
                d,
                |i| Complex::new(coord(i) + h / 2.0, coord(j) + h / 2.0),
                &mut out,
            );
        }
        step.rotate_left(1);
        step[2].fill(None);
        value.rotate_left(1);
        edge.rotate_left(1);
        if j >= 1 && j + 1 < d {
            for i in 1..d - 1 {
                for b in 0..b_n {
                    let at = |r: usize, di: usize| res[r][(i + di - 1) * b_n + b];
                    let Some(c) = at(1, 1) else { continue };
                    let block: [Option<[f64; 2]>; 9] = std::array::from_fn(|k| at(k / 3, k % 3));
                    if block
                        .iter()
                        .all(|v| v.is_some_and(|v| norm(v) <= flat_level))
                    {
                        out.flat_block = true;
                    }
                    // central differences, one-sided where a neighbour is off the branch or outside the disk;
                    // block index 3 = (i-1, j), 5 = (i+1, j), 1 = (i, j-1), 7 = (i, j+1)
                    let diff = |lo: Option<[f64; 2]>, hi: Option<[f64; 2]>| match (lo, hi) {
                        (Some(l), Some(u)) => {
                            Some([(u[0] - l[0]) / (2.0 * h), (u[1] - l[1]) / (2.0 * h)])
                        }
                        (None, Some(u)) => Some([(u[0] - c[0]) / h, (u[1] - c[1]) / h]),
                        (Some(l), None) => Some([(c[0] - l[0]) / h, (c[1] - l[1]) / h]),
                        (None, None) => None,
                    };
                    let (Some(jx), Some(jy)) = (diff(block[3], block[5]), diff(block[1], block[7]))
                    else {
                        continue;
                    };
                    step[2][i * b_n + b] =
                        Some(solve2(jx, jy, c).unwrap_or((f64::INFINITY, f64::INFINITY)));
                    value[2][i * b_n + b] = norm(c);
                    edge[2][i * b_n + b] = block.iter().any(Option::is_none);
                }
            }
        }
        // local minima of |δ| on row j - 1
        if j >= 2 {
            let row = j - 1;
            for i in 1..d - 1 {
                for b in 0..b_n {
                    let len = |r: usize, di: usize| {
                        step[r][(i + di - 1) * b_n + b].map(|(x, y)| x.hypot(y))
                    };
                    let Some((dx, dy)) = step[1][i * b_n + b] else {
                        continue;
                    };
                    let center = dx.hypot(dy);
                    if !center.is_finite() {
                        continue;
                    }
                    let mut minimal = true;
                    let mut near_edge = edge[1][i * b_n + b];
                    for r in 0..3 {
                        for di in 0..3 {
                            if r == 1 && di == 1 {
                                continue;
                            }
                            match len(r, di) {
                                Some(l) if l < center => minimal = false,
                                Some(_) => {}
                                None => near_edge = true,
                            }
                        }
                    }
                    if minimal {
                        let node = Complex::new(coord(i), coord(row));
                        out.candidates.push(Candidate {
                            branch: b,
                            node,
                            predicted: node + Complex::new(dx, dy),
                            step: center / h,
                            value: value[1][i * b_n + b],
                            edge: near_edge,
                        });
                    }
                }
            }
        }
        res.rotate_left(1);
        if j + 2 < d {
            eval_row(j + 2, &mut res[2]);
        } else {
            res[2].fill(None);
        }
    }
    out.evaluations = evaluations;
    out
}

fn sign_cells(
    lower: &[Option<[f64; 2]>],
    upper: &[Option<[f64; 2]>],
    branches: usize,
    d: usize,
    center: impl Fn(usize) -> Complex<f64>,
    out: &mut GridScan,
) {
    for i in 0..d - 1 {
        for b in 0..branches {
            let corners = [
                lower[i * branches + b],
                lower[(i + 1) * branches + b],
                upper[i * branches + b],
                upper[(i + 1) * branches + b],
            ];
            if corners.iter().any(Option::is_none) {
                continue;
            }
            let changes = |k: usize| {
                let vals = corners.iter().map(|c| c.expect("checked")[k]);
                let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
                lo < 0.0 && hi > 0.0
            };
            if changes(0) && changes(1) {
                out.sign_cells.push((b, center(i)));
            }
        }
    }
}

/// Solves `[jx jy] δ = -r` for `δ = (dx, dy)`; columns are the partials in x and y.
pub(crate) fn solve2(jx: [f64; 2], jy: [f64; 2], r: [f64; 2]) -> Option<(f64, f64)> {
    let det = jx[0] * jy[1] - jy[0] * jx[1];
    let scale = (jx[0].abs() + jy[0].abs()) * (jx[1].abs() + jy[1].abs());
    if !(det.abs() > 1e-14 * scale) || !det.is_finite() {
        return None;
    }
    let dx = (-r[0] * jy[1] + jy[0] * r[1]) / det;
    let dy = (-jx[0] * r[1] + jx[1] * r[0]) / det;
    Some((dx, dy))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Oracle2d {
    pub density: usize,
    pub thresholds: Vec<f64>,
    /// Clustered residual minima for each threshold.
    pub counts: Vec<usize>,
    /// The count at the middle threshold.
    pub count: usize,
    /// The counts differ across thresholds.
    pub ambiguous: bool,
    /// Predicted roots at the middle threshold, as `[Re ζ, Im ζ]`.
    pub minima: Vec<[f64; 2]>,
}

/// Residual-minimum oracle over a disk: grid local minima of the Jacobian-normalized
/// residual `|J⁻¹ Ψ|` below a threshold of grid spacings, clustered across branches.
///
/// A minimum counts only if the residual at its linearized root is at most half the
/// residual at the node. Minima with a neighbour off the branch or outside the disk enter
/// only the widest threshold: next to a branch fold the chart inverse has unbounded
/// derivative and the linearization is unreliable, so such roots surface as ambiguity.
pub fn grid_oracle_2d<F>(
    field: F,
    branches: usize,
    radius: f64,
    density: usize,
    thresholds: &[f64],
) -> Result<Oracle2d>
where
    F: Fn(Complex<f64>, &mut [Option<[f64; 2]>]),
{
    if density < 3 {
        return Err(Error::InvalidArgument(format!(
            "2-D oracle density must be at least 3, got {density}"
        )));
    }
    if thresholds.is_empty() || thresholds.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidArgument(
            "oracle thresholds must be positive and non-empty".into(),
        ));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "disk radius must be positive, got {radius}"
        )));
    }
    let scan = scan_grid(&field, branches, radius, density, -1.0);
    let h = scan.spacing;
    let widest = thresholds.iter().copied().fold(0.0, f64::max);
    let mut buf = vec![None; branches];
    let contracting: Vec<&Candidate> = scan
        .candidates
        .iter()
        .filter(|c| c.step <= widest && c.predicted.norm() <= radius)
        .filter(|c| {
            field(c.predicted, &mut buf);
            buf[c.branch].is_some_and(|r| norm(r) <= 0.5 * c.value)
        })
        .collect();
    let cluster = |limit: f64| {
        let mut kept: Vec<Complex<f64>> = Vec::new();
        for c in contracting
            .iter()
            .filter(|c| c.step <= limit && (!c.edge || limit == widest))
        {
            if !kept.iter().any(|k| (k - c.predicted).norm() <= 2.0 * h) {
                kept.push(c.predicted);
            }
        }
        kept
    };
    let counts: Vec<usize> = thresholds.iter().map(|&t| cluster(t).len()).collect();
    let mid = thresholds.len() / 2;
    let minima = cluster(thresholds[mid])
        .iter()
        .map(|z| [z.re, z.im])
        .collect();
    Ok(Oracle2d {
        density,
        thresholds: thresholds.to_vec(),
        count: counts[mid],
        ambiguous: counts.iter().any(|&c| c != counts[0]),
        counts,
        minima,
    })
}

/// The 2-D oracle on the disk-manifold residuals.
pub fn disk_oracle(
    disk: &AnalyticDisk,
    spec: &EmbeddingSpec,
    density: usize,
    thresholds: &[f64],
) -> Result<Oracle2d> {
    let sys = DiskSystem::new(spec, disk)?;
    grid_oracle_2d(
        |z, out| sys.residuals(z, out),
        sys.branches(),
        disk.radius,
        density,
        thresholds,
    )
}
