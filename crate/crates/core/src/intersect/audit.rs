use serde::{Deserialize, Serialize};

use super::{distance, IntersectionReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditOptions {
    /// Widest window, in initial grid spacings.
    pub window_cells: f64,
    /// The window is halved this many times.
    pub levels: u32,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            window_cells: 64.0,
            levels: 6,
        }
    }
}

impl AuditOptions {
    pub fn window_for(&self, report: &IntersectionReport) -> f64 {
        self.window_cells * report.resolution.spacing
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditLevel {
    pub window: f64,
    /// Most roots inside one window centered on a root.
    pub max_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub passed: bool,
    pub min_gap: Option<f64>,
    /// `min_gap` must exceed this: twice the refinement tolerance.
    pub required_gap: f64,
    pub levels: Vec<AuditLevel>,
    pub reason: Option<String>,
}

/// Resolution-stamped discreteness check: a positive gap between roots, and each root
/// alone in its window once the window has shrunk `levels` times.
pub fn discreteness_audit(report: &IntersectionReport, window: f64, levels: u32) -> AuditReport {
    let required_gap = 2.0 * report.resolution.refine_tol;
    let mut out = AuditReport {
        passed: false,
        min_gap: report.min_gap,
        required_gap,
        levels: vec![],
        reason: None,
    };
    if report.degenerate {
        out.reason =
            Some("degenerate report: the defining function vanishes at the noise floor".into());
        return out;
    }
    for l in 0..=levels {
        let w = window / f64::from(1u32 << l.min(31));
        let max_count = report
            .roots
            .iter()
            .map(|r| {
                report
                    .roots
                    .iter()
                    .filter(|q| distance(&r.param, &q.param) <= w / 2.0)
                    .count()
            })
            .max()
            .unwrap_or(0);
        out.levels.push(AuditLevel {
            window: w,
            max_count,
        });
    }
    let finest = out.levels.last().map_or(0, |l| l.max_count);
    if let Some(g) = report.min_gap {
        if !(g > required_gap) {
            out.reason = Some(format!("min_gap {g:e} does not exceed {required_gap:e}"));
            return out;
        }
    }
    if finest > 1 {
        out.reason = Some(format!(
            "{finest} roots share a window of width {:e}: accumulation at this resolution",
            out.levels.last().expect("levels").window
        ));
        return out;
    }
    out.passed = true;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intersect::{grid_oracle_1d, intersect_1d, CurveOptions, Resolution, Root};

    fn report(ts: &[f64]) -> IntersectionReport {
        IntersectionReport {
            roots: ts
                .iter()
                .map(|&t| Root {
                    param: vec![t],
                    residual: 0.0,
                    uncertainty: 0.0,
                })
                .collect(),
            tangential: vec![],
            min_gap: super::super::min_gap(
                &ts.iter()
                    .map(|&t| Root {
                        param: vec![t],
                        residual: 0.0,
                        uncertainty: 0.0,
                    })
                    .collect::<Vec<_>>(),
            ),
            degenerate: false,
            residual_ok: true,
            singular_seeds: 0,
            seeds: 0,
            resolution: Resolution {
                eps: 1e-12,
                noise: 0.0,
                grid: 100,
                spacing: 0.01,
                refine_tol: 1e-12,
                evaluations: 0,
            },
        }
    }

    #[test]
    fn few_roots_pass() {
        assert!(discreteness_audit(&report(&[]), 0.64, 6).passed);
        assert!(discreteness_audit(&report(&[0.3]), 0.64, 6).passed);
        assert!(discreteness_audit(&report(&[0.3, 0.5]), 0.64, 6).passed);
    }

    #[test]
    fn close_pair_fails() {
        let a = discreteness_audit(&report(&[0.3, 0.3 + 1e-3]), 0.64, 6);
        assert!(!a.passed);
        assert_eq!(a.levels[0].max_count, 2);
    }

    #[test]
    fn degenerate_is_not_audited() {
        let mut r = report(&[]);
        r.degenerate = true;
        assert!(!discreteness_audit(&r, 1.0, 6).passed);
    }

    #[test]
    fn accumulating_roots_fail() {
        // roots at t = 1/s accumulate at 0
        let phi = |t: f64| {
            let e = (-1.0 / t).exp();
            let (s, c) = (std::f64::consts::PI / t).sin_cos();
            let v = s * e;
            let d = e * (s - std::f64::consts::PI * c) / (t * t);
            (
                v,
                d,
                8.0 * f64::EPSILON * e * (1.0 + std::f64::consts::PI / t),
            )
        };
        let (lo, hi) = (0.0051, 1.0 - 1e-3);
        let rep = intersect_1d(phi, lo, hi, 1e-12, &CurveOptions::default()).unwrap();
        assert!(!rep.degenerate);
        let oracle = grid_oracle_1d(|t| phi(t).0, lo, hi, 1 << 20).unwrap();
        // s = 2 ..= 196 lie inside
        assert_eq!(oracle.count, 195);
        assert_eq!(rep.roots.len(), 195);
        let audit = discreteness_audit(&rep, AuditOptions::default().window_for(&rep), 6);
        assert!(!audit.passed, "{audit:?}");
        assert!(audit.levels.last().unwrap().max_count > 1);
    }
}
