//! Socle filtrations of modules over `Z/l^n[G]`, bar-resolution cohomology of
//! finite l-groups, and the obstruction map `Psi = delta ∘ d2` deciding which
//! equivariant maps `I -> J_{m-1}` come from elements of `J_m`.

pub mod cli;
pub mod cohomology;
pub mod error;
pub mod fingroup;
pub mod gmodule;
pub mod obstruction;
pub mod zmodlin;

pub use error::{Error, Result};
