//! Exact integer linear algebra for abelian-group computations.
//!
//! Everything here works over `BigInt`: dense matrices, Smith normal form
//! with unimodular transforms, Hermite-reduced lattices, finitely generated
//! abelian groups in invariant-factor form, and stationary colimits of such
//! groups under a single endomorphism.

pub mod colimit;
pub mod group;
pub mod lattice;
pub mod matrix;
pub mod smith;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use colimit::{colimit, induced_ker_coker, ColimitGroup};
pub use group::{cokernel, kernel_basis, kernel_rank, FgGroup, Presentation};
pub use lattice::Lattice;
pub use matrix::IntMatrix;
pub use smith::{smith_normal_form, SmithForm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbelianError {
    #[error("endomorphism does not preserve the relations of the base group")]
    IncompatibleEndo,
    #[error("map is not well defined on the base group or does not commute with its endomorphism")]
    NonCommuting,
    #[error("expected a {}x{} matrix, found {}x{}", expected.0, expected.1, found.0, found.1)]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
}

/// JSON form of an integer: a number when it fits in `i64`, else a string.
#[derive(Clone, Debug)]
pub struct IntValue(pub BigInt);

impl Serialize for IntValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use num_traits::ToPrimitive;
        match self.0.to_i64() {
            Some(x) => s.serialize_i64(x),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}
