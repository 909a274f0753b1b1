//! Rose pre-solenoids, their non-Hausdorff germ quotients, and K-theory.

pub mod dynamics;
pub mod examples;
pub mod germ;
pub mod ktheory;
pub mod point;
pub mod poly;
pub mod substitution;

pub use germ::{Germ, GermError, K0Constant, QuotientPresentation};
pub use point::{PLPoint, YPoint};
pub use substitution::{
    EdgeId, EdgeLabel, Entropy, EntropyError, Orientation, SubstitutionSystem, SystemError,
    ValidationReport, Violation, Word,
};
