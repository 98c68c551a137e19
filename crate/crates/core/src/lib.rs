//! Error-bounded lossy compression of 2D/3D gridded data by adaptive coarsening of a
//! single-tree mesh ordered along a Morton curve.
//!
//! The pipeline: embed the grid in one refinement tree ([`forest`]), map every point onto
//! its own leaf, then repeatedly replace families of leaves by their mean as long as the
//! accumulated error stays inside the user's bounds ([`criteria`], [`codec`]). The result
//! is a level-wise refinement bit-field plus one value per remaining leaf, written in the
//! [`container`] format.

pub mod codec;
pub mod container;
pub mod criteria;
mod error;
pub mod forest;
pub mod registry;
pub mod sfc;
pub mod synth;

pub use codec::{
    compress, compress_artifact, compress_many, decompress, decompress_artifact, packed_bound,
    Artifact, CompressedVariable, CompressionConfig, CompressionStats, Layout, Mode, Packing,
    ValueKind,
};
pub use container::{read_artifact, write_artifact};
pub use criteria::{Criterion, CriterionKind, ErrorDomain, ErrorSpec};
pub use error::{Error, Result};
pub use forest::{ForestMesh, GridShape};
pub use sfc::{Dim, MortonIndex};
