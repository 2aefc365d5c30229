//! JSON manifold descriptions.
//!
//! ```json
//! { "variant": "F_perturbed", "n": 2, "a": [1, 3],
//!   "series": [{ "order": 1 }, { "order": 2, "start": 1 }],
//!   "scale_policy": "budget", "radius": null }
//! ```

use serde::{Deserialize, Serialize};

use super::embedding::{EmbeddingSpec, ScalePolicy, SeriesParams};
use super::hypersurface::HypersurfaceSpec;
use super::torus::TorusMap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldVariant {
    #[serde(rename = "F_perturbed")]
    FPerturbed,
    #[serde(rename = "G_torus")]
    GTorus,
    #[serde(rename = "ThmMe_R")]
    ThmMeR,
    #[serde(rename = "hypersurface")]
    Hypersurface,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldFile {
    pub variant: ManifoldVariant,
    /// Complex dimension for embeddings, real dimension `m` for the hypersurface.
    pub n: usize,
    /// Torus radii; defaults to `3^{i-1}`.
    #[serde(default)]
    pub a: Option<Vec<f64>>,
    /// Perturbation series (the `f_j`); defaults to cyclic orders.
    #[serde(default)]
    pub series: Option<Vec<SeriesParams>>,
    /// The `g_j` of the graph variant.
    #[serde(default)]
    pub g_series: Option<Vec<SeriesParams>>,
    #[serde(default)]
    pub convex: Option<Vec<f64>>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "default_policy")]
    pub scale_policy: ScalePolicy,
}

fn default_policy() -> ScalePolicy {
    ScalePolicy::Budget
}

#[derive(Debug, Clone)]
pub enum Manifold {
    Embedding(EmbeddingSpec),
    Hypersurface(HypersurfaceSpec),
}

impl ManifoldFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("manifold spec: {e}")))
    }

    pub fn build(&self) -> Result<Manifold> {
        let n = self.n;
        let torus = |dim: usize| match &self.a {
            Some(a) => TorusMap::new(a.clone()),
            None => TorusMap::standard(dim),
        };
        let series = |count: usize| {
            self.series
                .clone()
                .unwrap_or_else(|| SeriesParams::cyclic(count))
        };
        match self.variant {
            ManifoldVariant::FPerturbed => {
                if n < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "complex dimension n must be at least 2, got {n}"
                    )));
                }
                let d = 2 * n - 2;
                EmbeddingSpec::make_f(n, torus(d)?, &series(d), self.scale_policy, self.radius)
                    .map(Manifold::Embedding)
            }
            ManifoldVariant::GTorus => {
                if n < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "complex dimension n must be at least 2, got {n}"
                    )));
                }
                EmbeddingSpec::make_g(n, torus(2 * n - 2)?, self.radius).map(Manifold::Embedding)
            }
            ManifoldVariant::ThmMeR => {
                if n < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "complex dimension n must be at least 2, got {n}"
                    )));
                }
                let g = self
                    .g_series
                    .clone()
                    .unwrap_or_else(|| SeriesParams::cyclic(n - 1));
                EmbeddingSpec::make_thm_me_r(
                    n,
                    &series(n - 1),
                    &g,
                    self.scale_policy,
                    self.convex.clone(),
                )
                .map(Manifold::Embedding)
            }
            ManifoldVariant::Hypersurface => {
                if n < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "hypersurface dimension must be at least 2, got {n}"
                    )));
                }
                HypersurfaceSpec::new(n, &series(n - 1)).map(Manifold::Hypersurface)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_builds_each_variant() {
        for (text, dim) in [
            (r#"{"variant":"F_perturbed","n":2,"a":[1,3]}"#, 4),
            (r#"{"variant":"G_torus","n":3}"#, 6),
            (
                r#"{"variant":"ThmMe_R","n":2,"convex":[1,2,3],"scale_policy":{"fixed":0.01}}"#,
                4,
            ),
        ] {
            match ManifoldFile::from_json(text).unwrap().build().unwrap() {
                Manifold::Embedding(e) => assert_eq!(2 * e.n(), dim),
                Manifold::Hypersurface(_) => panic!("expected an embedding"),
            }
        }
        let h = ManifoldFile::from_json(
            r#"{"variant":"hypersurface","n":3,"series":[{"order":1},{"order":2,"scale":0.5}]}"#,
        )
        .unwrap()
        .build()
        .unwrap();
        assert!(matches!(h, Manifold::Hypersurface(ref s) if s.m() == 3));
    }

    #[test]
    fn rejects_unknown_fields_and_bad_shapes() {
        assert!(ManifoldFile::from_json(r#"{"variant":"G_torus","n":2,"colour":1}"#).is_err());
        let bad = ManifoldFile::from_json(r#"{"variant":"F_perturbed","n":2,"a":[1,1]}"#).unwrap();
        assert!(bad.build().is_err());
        let short =
            ManifoldFile::from_json(r#"{"variant":"F_perturbed","n":3,"series":[{"order":1}]}"#)
                .unwrap();
        assert!(short.build().is_err());
    }
}
