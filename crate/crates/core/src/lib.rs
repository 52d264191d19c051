//! Boolean functions on slices of the hypercube: affine projection, structured
//! junta recovery, and exhaustive checks of the supporting inequalities.
//!
//! Coordinates are 0-based; a point of `binom([n], k)` is a `u64` word with
//! exactly `k` bits set, bit `i` holding `x_i`.

pub mod affine;
pub mod cube;
pub mod decoder;
pub mod error;
pub mod harness;
pub mod hypergeom;
pub mod numeric;
pub mod slice;

pub use affine::{project_affine, project_affine_with, AffineCoeffs, EstimateConfig, Projection};
pub use decoder::{decode, decode_with, CandidateForm, DecodeConfig, DecodeReport};
pub use error::{Error, Result};
pub use hypergeom::HypergeomParams;
pub use slice::{BoolTable, RealTable, SliceDomain, SliceFunction, SlicePoint};
