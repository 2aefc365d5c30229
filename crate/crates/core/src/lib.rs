//! Denjoy-Carleman weight sequences, the associated function, lacunary
//! quasianalytic series with certified evaluation, the torus and graph
//! manifolds built from them, and intersection experiments against analytic
//! curves and disks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assoc;
pub mod error;
pub mod geometry;
pub mod intersect;
pub mod lacunary;
pub mod signed_log;
pub mod weights;

pub use error::{Error, Result};
pub use signed_log::{NeumaierSum, Sign, SignedLogValue};
pub use weights::WeightSequence;
