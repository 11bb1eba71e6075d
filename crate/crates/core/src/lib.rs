//! Exact equilibrium analysis for discrete contest games.
//!
//! Players pick one of `Q` review qualities; each quality has an effort
//! level, each player a skill. A player's utility is the payment
//! received minus the skill-effort cost. The crate decides and computes pure
//! Nash equilibria with exact rational arithmetic: brute force, an exact
//! potential for player-invariant oblivious payments, improvement dynamics
//! and graphs, and contiguous enumeration for three-discrete-concave
//! payments.
//!
//! All public indices are zero-based. Text and file formats use one-based
//! qualities and players; see [`QualityVector::from_one_based`] and the
//! [`format`] module.

pub mod concavity;
pub mod contiguous;
pub mod dynamics;
pub mod enumerate;
mod error;
pub mod format;
pub mod game;
pub mod instances;
pub mod normal_form;
pub mod payments;
pub mod potential;
pub mod rational;
pub mod solvers;

pub use enumerate::Limits;
pub use error::{Error, Result};
pub use game::{ContestGame, CostFunction, LoadVector, Participation, QualityVector};
pub use payments::PaymentFunction;
pub use rational::Rational;
