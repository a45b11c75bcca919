//! Generating cycles of perturbed quartic Hamiltonian systems: cycle
//! parametrization, monotonicity checks, polar averaging data, the
//! generating equation and its admissible roots, and direct simulation
//! of the predicted limit cycles and invariant tori.

pub mod avg2;
pub mod error;
pub mod generate;
pub mod model;
pub mod monotone;
pub mod ode;
pub mod orbit;
pub mod presets;
pub mod quad;
pub mod spectral;
pub mod transform;
pub mod verify;

pub use error::{GtsError, Result};
