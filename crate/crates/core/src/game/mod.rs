//! The per-UAV game: observations, actions, stage dynamics, utilities,
//! altitude bounds and trajectory checks.

pub mod action;
pub mod altitude;
pub mod dynamics;
pub mod observation;
pub mod trajectory;
pub mod utility;

pub use action::{enumerate_actions, Action, ActionSpace, Move};
pub use altitude::{altitude_bounds, altitude_lower, altitude_upper, AltitudeBounds};
pub use dynamics::{apply_action, apply_actions, feasible_moves};
pub use observation::{observe, Observation};
pub use trajectory::{trajectory_valid, Constraint, Trajectory, Validity, Violation};
pub use utility::{phi, phi_terms, stage_utility, utility, PhiTerms};
