//! Physical parameters and the analytic single-site Jaynes-Cummings
//! structure.
//!
//! All rates and energies are measured in units of the atom-cavity coupling
//! `beta`, which defaults to 1. The chemical potential enters only through
//! `mu_tilde = (mu - omega_c) / beta`.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::eig_complex;

/// Cavity frequency used unless stated otherwise; only the commutator
/// defect depends on it.
pub const DEFAULT_OMEGA_C: f64 = 1000.0;
/// `gamma_c / omega_c` at or below which the quasi-boson is treated as
/// bosonic.
pub const HIGH_Q_THRESHOLD: f64 = 1e-3;

const DETUNING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega_c: f64,
    pub omega_a: f64,
    pub beta: f64,
    pub gamma_a: f64,
    pub gamma_c: f64,
    /// (mu - omega_c) / beta
    pub mu_tilde: f64,
    /// nearest-neighbour count
    pub z: u32,
    /// z kappa / beta
    pub zkappa: f64,
}

impl Default for ModelParams {
    /// Resonant, lossless, decoupled sites sitting at the lossless lobe tip.
    fn default() -> Self {
        Self {
            omega_c: DEFAULT_OMEGA_C,
            omega_a: DEFAULT_OMEGA_C,
            beta: 1.0,
            gamma_a: 0.0,
            gamma_c: 0.0,
            mu_tilde: crate::perturbation::lossless_tip_mu_tilde(),
            z: 4,
            zkappa: 0.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.omega_c,
            self.omega_a,
            self.beta,
            self.gamma_a,
            self.gamma_c,
            self.mu_tilde,
            self.zkappa,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.omega_c <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "omega_c must be > 0, got {}",
                self.omega_c
            )));
        }
        if self.beta <= 0.0 {
            return Err(Error::InvalidParams(format!("beta must be > 0, got {}", self.beta)));
        }
        if self.gamma_a < 0.0 || self.gamma_c < 0.0 {
            return Err(Error::InvalidParams(format!(
                "decay rates must be >= 0, got gamma_a = {}, gamma_c = {}",
                self.gamma_a, self.gamma_c
            )));
        }
        if self.zkappa < 0.0 {
            return Err(Error::InvalidParams(format!(
                "zkappa must be >= 0, got {}",
                self.zkappa
            )));
        }
        if self.z < 1 {
            return Err(Error::InvalidParams("z must be >= 1".into()));
        }
        Ok(())
    }

    /// Splits a total decay rate equally between atom and cavity.
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma_a = 0.5 * gamma;
        self.gamma_c = 0.5 * gamma;
        self
    }

    pub fn with_zkappa(mut self, zkappa: f64) -> Self {
        self.zkappa = zkappa;
        self
    }

    pub fn with_mu_tilde(mut self, mu_tilde: f64) -> Self {
        self.mu_tilde = mu_tilde;
        self
    }

    /// Sets the chemical potential from its raw value in frequency units.
    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu_tilde = (mu - self.omega_c) / self.beta;
        self
    }

    /// Sets `omega_a = omega_c - delta`.
    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.omega_a = self.omega_c - delta;
        self
    }

    pub fn detuning(&self) -> f64 {
        self.omega_c - self.omega_a
    }

    /// Combined decay rate `gamma_a + gamma_c`.
    pub fn gamma(&self) -> f64 {
        self.gamma_a + self.gamma_c
    }

    pub fn mu(&self) -> f64 {
        self.omega_c + self.mu_tilde * self.beta
    }

    /// Hopping in frequency units, `z kappa`.
    pub fn hopping(&self) -> f64 {
        self.zkappa * self.beta
    }

    pub(crate) fn require_resonant(&self) -> Result<()> {
        let delta = self.detuning();
        if delta.abs() > DETUNING_TOL * self.omega_c.abs().max(1.0) {
            return Err(Error::NonzeroDetuning(delta));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// A damped dressed level `|branch, n>`. The real part of `energy` is the
/// level position; `-energy.im` is the amplitude decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedLevel {
    pub branch: Branch,
    pub n: u32,
    pub energy: Complex64,
}

/// Bare dressed-state energy `E_{|branch,n>}`; the supplemented ground state
/// `n = 0` has energy 0 regardless of branch.
pub fn jc_energy(params: &ModelParams, n: u32, branch: Branch) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = f64::from(n);
    let delta = params.detuning();
    let split = (nf * params.beta * params.beta + 0.25 * delta * delta).sqrt();
    nf * params.omega_c + branch.sign() * split - 0.5 * delta
}

/// Total decay rate `n (gamma_a + gamma_c)` of an n-excitation dressed
/// state. Only defined on resonance.
pub fn total_decay(params: &ModelParams, n: u32) -> Result<f64> {
    params.require_resonant()?;
    Ok(f64::from(n) * params.gamma())
}

/// Both eigenvalues of the non-Hermitian n-excitation block spanned by
/// `{|n, g>, |n-1, e>}` with complex mode frequencies
/// `omega_c - i gamma_c` and `omega_a - i gamma_a`. Returned as
/// `[minus, plus]`.
pub fn complex_dressed_spectrum(params: &ModelParams, n: u32) -> Result<[DressedLevel; 2]> {
    if n == 0 {
        return Err(Error::InvalidParams("dressed manifolds start at n = 1".into()));
    }
    let nf = f64::from(n);
    let cavity = Complex64::new(params.omega_c, -params.gamma_c);
    let atom = Complex64::new(params.omega_a, -params.gamma_a);
    let coupling = Complex64::new(nf.sqrt() * params.beta, 0.0);
    let block = DMatrix::from_row_slice(2, 2, &[cavity * nf, coupling, coupling, cavity * (nf - 1.0) + atom]);
    let eig = eig_complex(&block)?;
    Ok([
        DressedLevel {
            branch: Branch::Minus,
            n,
            energy: eig.values[0],
        },
        DressedLevel {
            branch: Branch::Plus,
            n,
            energy: eig.values[1],
        },
    ])
}

/// Deviation `gamma_c / omega_c` of the quasi-boson commutator from 1.
pub fn commutator_defect(params: &ModelParams) -> f64 {
    params.gamma_c / params.omega_c
}

/// Whether the commutator defect is small enough to treat the damped mode as
/// a boson.
pub fn is_high_q(params: &ModelParams) -> bool {
    commutator_defect(params) <= HIGH_Q_THRESHOLD
}

/// Open `mu_tilde` interval of the unit-filling Mott lobe, bounded by the
/// zeros of `F1` and `F2`.
pub fn mott_lobe_interval(params: &ModelParams) -> Result<(f64, f64)> {
    params.require_resonant()?;
    Ok((-1.0, 1.0 - SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resonant() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn ground_state_energy() {
        assert_eq!(jc_energy(&resonant(), 0, Branch::Plus), 0.0);
        assert_eq!(jc_energy(&resonant(), 0, Branch::Minus), 0.0);
    }

    #[test]
    fn dressed_energies() {
        let p = resonant();
        assert_eq!(jc_energy(&p, 1, Branch::Minus), 999.0);
        assert_eq!(jc_energy(&p, 1, Branch::Plus), 1001.0);
        assert!((jc_energy(&p, 2, Branch::Minus) - (2000.0 - SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn detuned_energies() {
        let p = resonant().with_detuning(0.6);
        // n=1: omega_c ± sqrt(1 + 0.09) - 0.3
        let s = (1.0f64 + 0.09).sqrt();
        assert!((jc_energy(&p, 1, Branch::Plus) - (1000.0 + s - 0.3)).abs() < 1e-12);
        assert!((jc_energy(&p, 1, Branch::Minus) - (1000.0 - s - 0.3)).abs() < 1e-12);
    }

    #[test]
    fn total_decay_values() {
        let p = resonant().with_gamma(0.01);
        assert!((total_decay(&p, 1).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(total_decay(&resonant(), 3).unwrap(), 0.0);
        let p = ModelParams {
            gamma_a: 0.01,
            gamma_c: 0.02,
            ..resonant()
        };
        assert!((total_decay(&p, 2).unwrap() - 0.06).abs() < 1e-15);
    }

    #[test]
    fn total_decay_needs_resonance() {
        let p = resonant().with_detuning(0.1);
        assert!(matches!(total_decay(&p, 1), Err(Error::NonzeroDetuning(_))));
        assert!(matches!(mott_lobe_interval(&p), Err(Error::NonzeroDetuning(_))));
    }

    #[test]
    fn hermitian_spectrum() {
        let [m, p] = complex_dressed_spectrum(&resonant(), 1).unwrap();
        assert!((m.energy.re - 999.0).abs() < 1e-10);
        assert!((p.energy.re - 1001.0).abs() < 1e-10);
        assert_eq!(m.energy.im, 0.0);
        assert_eq!(p.energy.im, 0.0);
    }

    #[test]
    fn damped_spectrum_widths() {
        let p = resonant().with_gamma(0.01);
        for (n, expected) in [(1, -0.005), (2, -0.01)] {
            let levels = complex_dressed_spectrum(&p, n).unwrap();
            for level in levels {
                assert!((level.energy.im - expected).abs() < 1e-12);
            }
            assert!((levels[1].energy.re - levels[0].energy.re - 2.0 * f64::from(n).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn commutator() {
        assert_eq!(commutator_defect(&resonant()), 0.0);
        let p = ModelParams {
            gamma_c: 0.01,
            ..resonant()
        };
        assert!((commutator_defect(&p) - 1e-5).abs() < 1e-20);
        assert!(is_high_q(&p));
        let p = ModelParams {
            gamma_c: 1.0,
            omega_c: 10.0,
            omega_a: 10.0,
            ..resonant()
        };
        assert!((commutator_defect(&p) - 0.1).abs() < 1e-15);
        assert!(!is_high_q(&p));
    }

    #[test]
    fn lobe_interval() {
        let (lo, hi) = mott_lobe_interval(&resonant()).unwrap();
        assert_eq!(lo, -1.0);
        assert!((hi + 0.414_213_56).abs() < 1e-8);
    }

    #[test]
    fn raw_mu_round_trip() {
        let p = resonant().with_mu(999.25);
        assert_eq!(p.mu_tilde, -0.75);
        assert_eq!(p.mu(), 999.25);
    }

    #[test]
    fn validation() {
        assert!(resonant().validate().is_ok());
        assert!(resonant().with_zkappa(-0.1).validate().is_err());
        assert!(ModelParams {
            gamma_a: -1.0,
            ..resonant()
        }
        .validate()
        .is_err());
        assert!(ModelParams { z: 0, ..resonant() }.validate().is_err());
        assert!(ModelParams {
            omega_c: 0.0,
            ..resonant()
        }
        .validate()
        .is_err());
    }
}
