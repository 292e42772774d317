//! Graded numerical intersection rings.
//!
//! Two flavours live here. [`IntersectionRing`] is a threefold ring given by a
//! symmetric triple-intersection tensor, where degree-4 classes are recorded
//! numerically by their pairings against the divisor basis. [`ProductRing`]
//! is a Künneth product of surface and curve rings with an explicit monomial
//! basis; it carries the pull-back, push-forward and diagonal classes needed to
//! evaluate correspondences exactly.

mod linalg;
mod product;
mod threefold;

pub use product::{tensor_product, tensor_product_truncated, FactorRing, ProductElement, ProductRing};
pub use threefold::{integrate, ring_from_spec, IntersectionForm, IntersectionRing, IntersectionRingSpec, RingElement};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChowError {
    #[error("intersection tensor is not symmetric: {left} = {left_value} but {right} = {right_value}")]
    AsymmetricTensor {
        left: String,
        left_value: i64,
        right: String,
        right_value: i64,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("element does not belong to this ring: expected {expected} basis entries, found {found}")]
    RingMismatch { expected: usize, found: usize },
    #[error("truncation degree {requested} exceeds the ring dimension {max}")]
    TruncationTooLarge { requested: usize, max: usize },
    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("Gram matrix has odd self-intersection {value} for `{name}`")]
    OddDiagonal { name: String, value: i64 },
    #[error("factors {first} and {second} are not two copies of the same ring")]
    FactorMismatch { first: usize, second: usize },
    #[error("unknown basis class `{0}`")]
    UnknownClass(String),
    #[error("intersection form is degenerate")]
    DegenerateForm,
    #[error("class has nonzero degree-0 part; exponential is not defined over the rationals")]
    NotNilpotent,
    #[error("class has zero degree-0 part and is not invertible")]
    NotInvertible,
    #[error("numerical degree-4 classes do not determine Künneth classes in this ring")]
    NotFaithful,
}
