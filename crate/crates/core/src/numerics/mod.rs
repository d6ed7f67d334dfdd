//! Numerical kernels shared by the model modules.

mod arrowhead;
mod eigen;
mod scalar;

pub use arrowhead::{eig_arrowhead, ArrowheadEigen};
pub use eigen::{eig_complex, eig_symmetric, EigenResult, RESIDUAL_CONTRACT_DIM, RESIDUAL_TOL};
pub use scalar::{find_root, maximize_scalar};
