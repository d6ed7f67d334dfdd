use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("operation requires zero detuning, got delta = {0}")]
    NonzeroDetuning(f64),

    #[error("hopping zkappa = 0 puts chi on its pole")]
    ZeroHopping,

    #[error("mu_tilde = {0} lies outside the n = 1 Mott lobe")]
    OutsideLobe(f64),

    #[error("system is already localized at t = 0 (zkappa = {zkappa} <= {critical})")]
    NeverCritical { zkappa: f64, critical: f64 },

    #[error("no dissipation (gamma = 0): the superfluid never sweeps to the localized state")]
    ZeroGamma,

    #[error("bad bath discretization: {0}")]
    BadDiscretization(String),

    #[error("survival series too short to fit a decay rate: {0}")]
    WindowTooShort(String),

    #[error("numerical Gutzwiller solver only runs in the Hermitian limit (gamma_a = {gamma_a}, gamma_c = {gamma_c})")]
    DissipativeNotSupported { gamma_a: f64, gamma_c: f64 },

    #[error("self-consistency did not converge after {iterations} iterations (last step {last_step:e})")]
    NotConverged { iterations: usize, last_step: f64 },

    #[error("root is not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    BracketInvalid { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigensolver failed: {0}")]
    NoConvergence(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Failures of an iterative numerical kernel, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotConverged { .. } | Error::NoConvergence(_))
    }
}
