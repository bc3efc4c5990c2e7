//! kef-core: numerical laboratory for the energy functionals of Kähler
//! geometry (Aubin I/J, Chen-Tian E_k, Ding F, Futaki characters) and the
//! Monge-Ampère continuity method, on two desk-scale models: the spectral
//! Riemann sphere (n = 1) and torus-invariant CP^n in log coordinates
//! (n = 1, 2, 3).

pub mod error;
pub mod functionals;
pub mod model;
pub mod solvers;
pub mod util;

pub mod sphere;
pub mod toric;

pub use error::{KefError, Result};
