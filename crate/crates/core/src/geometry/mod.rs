//! The manifolds built from lacunary series: the graph hypersurface in `R^m`,
//! the nested-circle torus maps, the sphere embeddings `F` (perturbed) and `G`
//! (closed form), the graph manifold over a convex function, and the
//! tangent-space test `T ∩ iT = {0}`.

mod embedding;
mod hypersurface;
mod spec_file;
mod tangent;
mod torus;

pub use embedding::{
    cyclic_order, g_closed_form, safe_radius, EmbeddingSpec, Perturbation, ScalePolicy,
    SeriesParams, Submanifold, Variant, C1_BUDGET, PERTURBATION_EPS,
};
pub use hypersurface::HypersurfaceSpec;
pub use spec_file::{Manifold, ManifoldFile, ManifoldVariant};
pub use tangent::{apply_complex_structure, generating_check, numerical_rank, GeneratingReport};
pub use torus::{InjectivityReport, TorusMap};
