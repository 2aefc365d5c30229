use super::embedding::{Perturbation, SeriesParams};
use crate::error::{Error, Result};

/// The graph hypersurface `x_m = sum_{j < m} f_j(x_j)` in `R^m`, with defining
/// function `D(x) = x_m - sum_j f_j(x_j)`.
#[derive(Debug, Clone)]
pub struct HypersurfaceSpec {
    m: usize,
    components: Vec<Perturbation>,
    params: Vec<SeriesParams>,
}

impl HypersurfaceSpec {
    /// Components are uncentered series with the given scale (default 1).
    pub fn new(m: usize, params: &[SeriesParams]) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!(
                "hypersurface dimension must be at least 2, got {m}"
            )));
        }
        if params.len() != m - 1 {
            return Err(Error::Arity {
                what: "hypersurface components",
                expected: m - 1,
                got: params.len(),
            });
        }
        let components = params
            .iter()
            .map(|p| Perturbation::new(p.build(p.scale.unwrap_or(1.0))?, false, 0.0))
            .collect::<Result<Vec<_>>>()?;
        Ok(HypersurfaceSpec {
            m,
            components,
            params: params.to_vec(),
        })
    }

    /// Orders cycling through 1, 2, 3, start 1, unit scale.
    pub fn standard(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!(
                "hypersurface dimension must be at least 2, got {m}"
            )));
        }
        Self::new(m, &SeriesParams::cyclic(m - 1))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn components(&self) -> &[Perturbation] {
        &self.components
    }

    pub fn params(&self) -> &[SeriesParams] {
        &self.params
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.m {
            return Err(Error::Arity {
                what: "hypersurface point",
                expected: self.m,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `D(x)`.
    pub fn defining(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(x[self.m - 1]
            - self
                .components
                .iter()
                .zip(x)
                .map(|(f, &v)| f.value(v))
                .sum::<f64>())
    }

    /// Gradient of `D`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut g: Vec<f64> = self
            .components
            .iter()
            .zip(x)
            .map(|(f, &v)| -f.slope(v))
            .collect();
        g.push(1.0);
        Ok(g)
    }

    /// Certified bound on the evaluation error of `D`, excluding the error in `x` itself.
    pub fn defining_error(&self) -> f64 {
        self.components.iter().map(|f| f.value_error()).sum()
    }

    /// Certified bound on the evaluation error of the gradient.
    pub fn gradient_error(&self) -> f64 {
        self.components.iter().map(|f| f.slope_error()).sum()
    }

    /// Certified `sup |f_j|` for each component.
    pub fn component_bounds(&self) -> Vec<f64> {
        self.components.iter().map(|f| f.value_bound()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_function_and_gradient() {
        let h = HypersurfaceSpec::standard(3).unwrap();
        let x = [0.4, -1.1, 0.0];
        let d = h.defining(&x).unwrap();
        let f0 = h.components()[0].value(0.4);
        let f1 = h.components()[1].value(-1.1);
        assert!((d + f0 + f1).abs() < 1e-15);
        let on = [0.4, -1.1, f0 + f1];
        assert!(h.defining(&on).unwrap().abs() <= h.defining_error() + 1e-16);
        assert_eq!(h.gradient(&x).unwrap()[2], 1.0);
        assert!(h.defining(&[0.0, 0.0]).is_err());
        assert!(HypersurfaceSpec::standard(1).is_err());
    }
}
