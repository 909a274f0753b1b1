//! Exact dynamics of the rose map and of the quotient map.

pub mod expansive;
pub mod periodic;
pub mod solenoid;
pub mod wieler;

use thiserror::Error;

use crate::germ::GermError;

pub use expansive::{forward_expansive_witness, CoverSpec, SeparationReport};
pub use periodic::{fix_count, fix_count_oracle, fix_count_rose, zeta_series, ZetaSeries};
pub use solenoid::{p_map, SolenoidPoint};
pub use wieler::{wieler_axiom_witness, RoseSet, WielerWitness};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("no axiom witness found in the search grid (inconclusive); last violation: {last_violation}")]
    NoWitnessFound { last_violation: String },
    #[error("solenoid point of depth {depth} is shallower than the flattening constant {needed}")]
    DepthTooShallow { needed: usize, depth: usize },
    #[error("solenoid point needs at least one coordinate")]
    EmptyItinerary,
    #[error("coordinate {0} does not map onto its predecessor")]
    IncompatibleItinerary(usize),
    #[error(transparent)]
    Germ(#[from] GermError),
}
