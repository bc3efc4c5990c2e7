//! Spectral calculus on the Riemann sphere (n = 1).

pub mod field;
pub mod grid;
pub mod model;

pub use field::{FieldArchive, ScalarField};
pub use grid::{coeff_index, SphericalGrid, V_SPHERE};
pub use model::{lambda_l, KahlerPotentialS2, MobiusMap, Sl2Generator, SphereForm, SphereModel};
