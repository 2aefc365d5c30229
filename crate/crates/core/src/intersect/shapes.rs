use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const U: f64 = f64::EPSILON;

/// Maximum polynomial degree accepted for disk components.
pub const MAX_DISK_DEGREE: usize = 8;

/// One coordinate of an analytic curve.
///
/// `poly`: `sum_i coeffs[i] t^i` with `coeffs.len() == degree + 1`.
/// `trig`: `c0 + sum_{k=1}^{degree} cos[k-1] cos(k t) + sin[k-1] sin(k t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Component {
    Poly {
        degree: usize,
        coeffs: Vec<f64>,
    },
    Trig {
        degree: usize,
        #[serde(default)]
        c0: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
}

impl Component {
    pub fn poly(coeffs: Vec<f64>) -> Self {
        Component::Poly {
            degree: coeffs.len().saturating_sub(1),
            coeffs,
        }
    }

    pub fn constant(c: f64) -> Self {
        Component::poly(vec![c])
    }

    pub fn trig(c0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        Component::Trig {
            degree: cos.len().max(sin.len()),
            c0,
            cos,
            sin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|c| c.is_finite());
        match self {
            Component::Poly { degree, coeffs } => {
                if coeffs.len() != degree + 1 {
                    return Err(Error::Parse(format!(
                        "poly component: degree {degree} needs {} coefficients, got {}",
                        degree + 1,
                        coeffs.len()
                    )));
                }
                if !finite(coeffs) {
                    return Err(Error::Parse(
                        "poly component: coefficients must be finite".into(),
                    ));
                }
            }
            Component::Trig {
                degree,
                c0,
                cos,
                sin,
            } => {
                if cos.len() != *degree || sin.len() != *degree {
                    return Err(Error::Parse(format!(
                        "trig component: degree {degree} needs {degree} cos and sin coefficients, got {} and {}",
                        cos.len(),
                        sin.len()
                    )));
                }
                if !c0.is_finite() || !finite(cos) || !finite(sin) {
                    return Err(Error::Parse(
                        "trig component: coefficients must be finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Component::Poly { coeffs, .. } => coeffs.iter().skip(1).all(|&c| c == 0.0),
            Component::Trig { cos, sin, .. } => cos.iter().chain(sin).all(|&c| c == 0.0),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Component::Poly { coeffs, .. } => coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c),
            Component::Trig { c0, cos, sin, .. } => {
                let mut acc = *c0;
                for (k, (a, b)) in cos.iter().zip(sin).enumerate() {
                    let (s, c) = ((k + 1) as f64 * t).sin_cos();
                    acc += a * c + b * s;
                }
                acc
            }
        }
    }

    /// The derivative as a component of the same kind.
    pub fn derivative(&self) -> Component {
        match self {
            Component::Poly { coeffs, .. } => {
                if coeffs.len() <= 1 {
                    return Component::constant(0.0);
                }
                Component::poly(
                    coeffs
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(i, &c)| i as f64 * c)
                        .collect(),
                )
            }
            Component::Trig {
                degree, cos, sin, ..
            } => Component::Trig {
                degree: *degree,
                c0: 0.0,
                cos: sin
                    .iter()
                    .enumerate()
                    .map(|(k, &b)| (k + 1) as f64 * b)
                    .collect(),
                sin: cos
                    .iter()
                    .enumerate()
                    .map(|(k, &a)| -((k + 1) as f64) * a)
                    .collect(),
            },
        }
    }

    /// Bound on the rounding error of [`eval`](Self::eval) at `t`.
    pub fn eval_error(&self, t: f64) -> f64 {
        match self {
            Component::Poly { coeffs, .. } => {
                let mag = coeffs
                    .iter()
                    .rev()
                    .fold(0.0, |acc, &c| acc * t.abs() + c.abs());
                2.0 * (coeffs.len() as f64 + 1.0) * U * mag
            }
            Component::Trig { c0, cos, sin, .. } => {
                let mag: f64 = c0.abs() + cos.iter().chain(sin).map(|c| c.abs()).sum::<f64>();
                // the argument k t is rounded, which moves the phase by k |t| u
                let arg = (cos.len() as f64) * t.abs() * U;
                (4.0 * (cos.len() as f64 + 1.0) * U + arg) * mag
            }
        }
    }
}

/// A real analytic curve `γ: [t_lo, t_hi] -> R^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticCurve {
    pub components: Vec<Component>,
    pub domain: [f64; 2],
}

impl AnalyticCurve {
    pub fn new(components: Vec<Component>, domain: [f64; 2]) -> Result<Self> {
        let c = AnalyticCurve { components, domain };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Parse("curve needs at least one component".into()));
        }
        for comp in &self.components {
            comp.validate()?;
        }
        let [lo, hi] = self.domain;
        if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "curve domain [{lo}, {hi}] is empty"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(Component::is_constant)
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.eval(t)).collect()
    }

    pub fn derivative(&self) -> AnalyticCurve {
        AnalyticCurve {
            components: self.components.iter().map(Component::derivative).collect(),
            domain: self.domain,
        }
    }
}

/// One coordinate `sum_i coeffs[i] ζ^i` of an analytic disk; coefficients are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexPoly {
    pub degree: usize,
    pub coeffs: Vec<[f64; 2]>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<Complex<f64>>) -> Self {
        ComplexPoly {
            degree: coeffs.len().saturating_sub(1),
            coeffs: coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.len() != self.degree + 1 {
            return Err(Error::Parse(format!(
                "disk component: degree {} needs {} coefficients, got {}",
                self.degree,
                self.degree + 1,
                self.coeffs.len()
            )));
        }
        if self.degree > MAX_DISK_DEGREE {
            return Err(Error::Parse(format!(
                "disk component: degree {} exceeds {MAX_DISK_DEGREE}",
                self.degree
            )));
        }
        if self.coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Parse(
                "disk component: coefficients must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn eval(&self, z: Complex<f64>) -> Complex<f64> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, c| {
                acc * z + Complex::new(c[0], c[1])
            })
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs
            .iter()
            .skip(1)
            .all(|c| c[0] == 0.0 && c[1] == 0.0)
    }
}

/// A holomorphic polynomial map `φ: {|ζ| <= radius} -> C^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticDisk {
    pub components: Vec<ComplexPoly>,
    pub radius: f64,
}

impl AnalyticDisk {
    pub fn new(components: Vec<ComplexPoly>, radius: f64) -> Result<Self> {
        let d = AnalyticDisk { components, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Parse("disk needs at least one component".into()));
        }
        for c in &self.components {
            c.validate()?;
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "disk radius must be positive, got {}",
                self.radius
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(ComplexPoly::is_constant)
    }

    /// `φ(ζ)` as real coordinates `(x_1, y_1, ..., x_n, y_n)`.
    pub fn eval_real(&self, zeta: Complex<f64>) -> Vec<f64> {
        self.components
            .iter()
            .flat_map(|c| {
                let v = c.eval(zeta);
                [v.re, v.im]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_and_trig_derivatives() {
        let p = Component::poly(vec![1.0, -2.0, 0.5, 3.0]);
        let dp = p.derivative();
        let t = 0.7;
        assert!((dp.eval(t) - (-2.0 + 1.0 * t + 9.0 * t * t)).abs() < 1e-14);
        let tr = Component::trig(0.5, vec![1.0, 0.0], vec![0.0, 2.0]);
        let d = tr.derivative();
        let expect = -(t.sin()) + 4.0 * (2.0 * t).cos();
        assert!((d.eval(t) - expect).abs() < 1e-14);
        assert!(Component::constant(4.0).derivative().is_constant());
    }

    #[test]
    fn json_requires_degree() {
        let ok: Component =
            serde_json::from_str(r#"{"type":"poly","degree":1,"coeffs":[0,1]}"#).unwrap();
        assert!(ok.validate().is_ok());
        let missing = serde_json::from_str::<Component>(r#"{"type":"poly","coeffs":[0,1]}"#);
        assert!(missing.unwrap_err().to_string().contains("degree"));
        let wrong: Component =
            serde_json::from_str(r#"{"type":"poly","degree":2,"coeffs":[0,1]}"#).unwrap();
        assert!(wrong.validate().is_err());
    }

    #[test]
    fn eval_error_covers_cancellation() {
        let p = Component::poly(vec![1.0, -3.0, 3.0, -1.0]); // (1 - t)^3
        let t = 1.0 + 1e-5;
        let exact = -(1e-5f64.powi(3));
        assert!((p.eval(t) - exact).abs() <= p.eval_error(t));
    }

    #[test]
    fn disk_evaluation() {
        let d = AnalyticDisk::new(
            vec![ComplexPoly::new(vec![
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 1.0),
            ])],
            0.5,
        )
        .unwrap();
        assert_eq!(d.eval_real(Complex::new(0.0, 0.5)), vec![0.5, 0.0]);
        assert!(AnalyticDisk::new(vec![], 1.0).is_err());
        assert!(ComplexPoly {
            degree: 9,
            coeffs: vec![[0.0, 0.0]; 10]
        }
        .validate()
        .is_err());
    }
}
