//! Typology-grounded phonology toolkit.
//!
//! Four pieces fit together here:
//!
//! - [`typology`] parses PHOIBLE-style inventory databases into an immutable
//!   indexed store of languages, inventories, segments, and ternary
//!   distinctive-feature vectors.
//! - [`contrast`] measures how consistently a feature contrast can be
//!   predicted on held-out languages, from symbolic feature encodings or
//!   from a seeded synthetic realization model standing in for speech.
//! - [`stream`] turns per-feature posterior streams into segment lattices
//!   and decodes best segment sequences by exact dynamic programming,
//!   optionally constrained to a given inventory.
//! - [`induction`] ranks closest languages, pools their segments, scores
//!   candidate inventories with an MDL-style size penalty, and induces an
//!   inventory greedily from streams.
//!
//! Numeric code is generic over the scalar type via [`num::Real`]
//! (`f32` or `f64`); the `*64` aliases below pin the common choice.

// Parameter validations are written as negated comparisons (`!(x >= 0)`)
// so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contrast;
pub mod error;
pub mod induction;
pub mod num;
pub mod rng;
pub mod stream;
pub mod typology;

pub use error::{Error, Result};
pub use num::Real;

pub type FeatureStream64 = stream::FeatureStream<f64>;
pub type SegmentLattice64 = stream::SegmentLattice<f64>;
pub type Alignment64 = stream::Alignment<f64>;
pub type DecodeParams64 = stream::DecodeParams<f64>;
pub type StreamGenParams64 = stream::StreamGenParams<f64>;
pub type Classifier64 = contrast::Classifier<f64>;
pub type Hyper64 = contrast::Hyper<f64>;
pub type RealizationParams64 = contrast::RealizationParams<f64>;
pub type Instance64 = contrast::Instance<f64>;
pub type InductionParams64 = induction::InductionParams<f64>;
pub type InventoryScore64 = induction::InventoryScore<f64>;
