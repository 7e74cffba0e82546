pub mod dicke;
pub mod diffusion;
pub mod error;
pub mod field;
pub mod kinetic;
pub mod params;
pub mod quadrature;
pub mod cli;
pub mod ramsey;
pub mod special;
pub mod susceptibility;
pub mod velocity;

pub use error::{Error, Result};
pub use params::{BeamParams, MediumParams, Vec3};
