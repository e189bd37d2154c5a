//! Pseudo-spectral laboratory for incompressible flow on the periodic box.

pub mod diagnostics;
pub mod el;
pub mod error;
pub mod experiment;
pub mod mollifier;
pub mod solvers;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
pub use mollifier::{Mollifier, MollifierKind};
pub use spectral::{Field, Grid, PhysicalField, Rank};
