//! Toric log-coordinate calculus on CP^n (n = 1, 2, 3).

pub mod function;
pub mod jet;
pub mod model;

pub use function::{Term, ToricFunction};
pub use jet::{Jet, JetSpace};
pub use model::{
    mixed_discriminant, sym_det, sym_min_eig, BoxGrid, MatrixField, ToricForm, ToricModel,
};
