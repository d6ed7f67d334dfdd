pub mod bath;
pub mod error;
pub mod gutzwiller;
pub mod model;
pub mod numerics;
pub mod perturbation;
pub mod sweep;

pub use error::{Error, Result};
pub use model::ModelParams;
