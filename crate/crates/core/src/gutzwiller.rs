//! Numerical single-site mean-field (Gutzwiller) solver.
//!
//! Works in the Hermitian limit on a photon-number-truncated Jaynes-Cummings
//! site and keeps both dressed branches, so it serves as an independent
//! check on the two-channel perturbative boundary. Also hosts the
//! occupation-fluctuation models used for the time series.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{eig_symmetric, find_root};
use crate::perturbation::perturbed_site_state;

/// Order parameter above which a site counts as superfluid.
pub const ONSET_PSI: f64 = 1e-6;
/// Resolution of [`numeric_boundary`] in `z kappa / beta`.
pub const BOUNDARY_TOL: f64 = 1e-5;

const NORM_TOL: f64 = 1e-10;
/// Relative energy gain below which the ordered branch is not resolved.
const ENERGY_RESOLUTION: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomLevel {
    Ground,
    Excited,
}

/// Photon-number cutoff; states are ordered photon-major with the ground
/// atomic level first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedBasis {
    n_max: usize,
}

impl TruncatedBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidParams(format!("photon cutoff must be >= 2, got {n_max}")));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    pub fn index(&self, photons: usize, atom: AtomLevel) -> usize {
        2 * photons + usize::from(atom == AtomLevel::Excited)
    }

    pub fn states(&self) -> impl Iterator<Item = (usize, AtomLevel)> {
        (0..=self.n_max).flat_map(|n| [(n, AtomLevel::Ground), (n, AtomLevel::Excited)])
    }

    /// Total excitation number of basis state `i`.
    fn excitations(&self, i: usize) -> f64 {
        (i / 2 + i % 2) as f64
    }
}

/// Amplitudes over a [`TruncatedBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct SiteState {
    pub amplitudes: DVector<Complex64>,
}

impl SiteState {
    pub fn from_real(v: &DVector<f64>) -> Self {
        Self {
            amplitudes: v.map(|x| Complex64::new(x, 0.0)),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub n_mean: f64,
    pub n_var: f64,
    /// `<b>`
    pub b_expect: Complex64,
}

impl Observables {
    pub fn dn(&self) -> f64 {
        self.n_var.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldSolution {
    pub psi: f64,
    pub energy: f64,
    pub state: SiteState,
    pub iterations: usize,
    pub converged: bool,
    pub n_mean: f64,
    pub n_var: f64,
}

impl MeanFieldSolution {
    /// Fails with `NotConverged` unless the iteration met its tolerance.
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                last_step: f64::NAN,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub mixing: f64,
    pub psi0: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            mixing: 0.5,
            psi0: 0.1,
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

fn require_hermitian(params: &ModelParams) -> Result<()> {
    if params.gamma_a != 0.0 || params.gamma_c != 0.0 {
        return Err(Error::DissipativeNotSupported {
            gamma_a: params.gamma_a,
            gamma_c: params.gamma_c,
        });
    }
    Ok(())
}

/// Single-site mean-field Hamiltonian (grand canonical, frame rotating with
/// `mu`):
///
/// ```text
/// H = (omega_c - mu) b^dag b + (omega_a - mu) s+ s- + beta (s+ b + h.c.)
///     - z kappa psi (b^dag + b) + z kappa psi^2
/// ```
pub fn build_mf_hamiltonian(params: &ModelParams, psi: f64, basis: &TruncatedBasis) -> Result<DMatrix<f64>> {
    require_hermitian(params)?;
    params.validate()?;

    // omega_c - mu = -mu_tilde beta exactly, independent of omega_c
    let photon = -params.mu_tilde * params.beta;
    let atom = photon - params.detuning();
    let hop = params.hopping();
    let offset = hop * psi * psi;

    let dim = basis.dim();
    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..=basis.n_max() {
        let g = basis.index(n, AtomLevel::Ground);
        let e = basis.index(n, AtomLevel::Excited);
        let nf = n as f64;
        h[(g, g)] = photon * nf + offset;
        h[(e, e)] = photon * nf + atom + offset;
        if n >= 1 {
            // s+ b |n, g> = sqrt(n) |n-1, e>
            let lower_e = basis.index(n - 1, AtomLevel::Excited);
            let c = params.beta * nf.sqrt();
            h[(g, lower_e)] = c;
            h[(lower_e, g)] = c;
        }
        if n < basis.n_max() {
            let amp = -hop * psi * (nf + 1.0).sqrt();
            for level in [AtomLevel::Ground, AtomLevel::Excited] {
                let i = basis.index(n, level);
                let j = basis.index(n + 1, level);
                h[(i, j)] = amp;
                h[(j, i)] = amp;
            }
        }
    }
    Ok(h)
}

/// Ground energy and (real) ground state of the mean-field Hamiltonian.
pub fn ground_state(params: &ModelParams, psi: f64, basis: &TruncatedBasis) -> Result<(f64, DVector<f64>)> {
    let h = build_mf_hamiltonian(params, psi, basis)?;
    let eig = eig_symmetric(&h)?;
    Ok((eig.values[0], eig.vector(0)))
}

fn b_expect_real(v: &DVector<f64>, basis: &TruncatedBasis) -> f64 {
    let mut s = 0.0;
    for n in 1..=basis.n_max() {
        let root = (n as f64).sqrt();
        for level in [AtomLevel::Ground, AtomLevel::Excited] {
            s += v[basis.index(n - 1, level)] * root * v[basis.index(n, level)];
        }
    }
    s
}

/// Excitation-number statistics and `<b>` of a normalized site state.
pub fn observables(state: &SiteState, basis: &TruncatedBasis) -> Result<Observables> {
    if state.amplitudes.len() != basis.dim() {
        return Err(Error::InvalidParams(format!(
            "state has {} amplitudes, basis has {}",
            state.amplitudes.len(),
            basis.dim()
        )));
    }
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let a = &state.amplitudes;
    let (mut n1, mut n2) = (0.0, 0.0);
    for (i, amp) in a.iter().enumerate() {
        let p = amp.norm_sqr();
        let k = basis.excitations(i);
        n1 += p * k;
        n2 += p * k * k;
    }
    let mut b = Complex64::new(0.0, 0.0);
    for n in 1..=basis.n_max() {
        let root = (n as f64).sqrt();
        for level in [AtomLevel::Ground, AtomLevel::Excited] {
            b += a[basis.index(n - 1, level)].conj() * root * a[basis.index(n, level)];
        }
    }
    Ok(Observables {
        n_mean: n1,
        n_var: (n2 - n1 * n1).max(0.0),
        b_expect: b,
    })
}

fn solution_at(
    params: &ModelParams,
    psi: f64,
    basis: &TruncatedBasis,
    iterations: usize,
    converged: bool,
) -> Result<MeanFieldSolution> {
    let (energy, v) = ground_state(params, psi, basis)?;
    let state = SiteState::from_real(&v);
    let obs = observables(&state, basis)?;
    Ok(MeanFieldSolution {
        psi,
        energy,
        state,
        iterations,
        converged,
        n_mean: obs.n_mean,
        n_var: obs.n_var,
    })
}

/// Damped fixed-point iteration `psi <- (1 - m) psi + m Re<b>`, followed by
/// an energy comparison against the `psi = 0` fixed point.
///
/// Returns diagnostics with `converged = false` instead of failing when the
/// iteration cap is hit; see [`MeanFieldSolution::into_converged`].
pub fn solve_self_consistent(
    params: &ModelParams,
    basis: &TruncatedBasis,
    opts: &SolverOptions,
) -> Result<MeanFieldSolution> {
    require_hermitian(params)?;
    if !(opts.mixing > 0.0 && opts.mixing <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "mixing must be in (0, 1], got {}",
            opts.mixing
        )));
    }

    let mut psi = opts.psi0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let (_, v) = ground_state(params, psi, basis)?;
        let next = (1.0 - opts.mixing) * psi + opts.mixing * b_expect_real(&v, basis).abs();
        let step = (next - psi).abs();
        psi = next;
        if step < opts.tol {
            converged = true;
            break;
        }
    }

    let candidate = solution_at(params, psi, basis, iterations, converged)?;
    let mott = solution_at(params, 0.0, basis, iterations, true)?;
    // psi = 0 is always a fixed point; keep it unless the ordered branch is
    // lower in energy
    let resolution = ENERGY_RESOLUTION * mott.energy.abs().max(1.0);
    if candidate.psi > 0.0 && candidate.energy < mott.energy - resolution {
        Ok(candidate)
    } else {
        Ok(mott)
    }
}

/// Critical `z kappa / beta` where the numerical solution first develops
/// `psi > ONSET_PSI`, located by bisection inside `bracket`.
pub fn numeric_boundary(params: &ModelParams, basis: &TruncatedBasis, bracket: (f64, f64)) -> Result<f64> {
    require_hermitian(params)?;
    let (lo, hi) = bracket;
    let invalid = |f_lo: f64, f_hi: f64| Error::BracketInvalid { lo, hi, f_lo, f_hi };

    // the onset must belong to the unit-filling lobe
    let decoupled = solution_at(&params.with_zkappa(0.0), 0.0, basis, 0, true)?;
    if (decoupled.n_mean - 1.0).abs() > 1e-6 || decoupled.n_var > 1e-6 {
        return Err(invalid(f64::NAN, f64::NAN));
    }

    let opts = SolverOptions::default();
    let onset = |zk: f64| -> Result<f64> {
        let sol = solve_self_consistent(&params.with_zkappa(zk), basis, &opts)?;
        Ok(sol.psi - ONSET_PSI)
    };
    let (f_lo, f_hi) = (onset(lo)?, onset(hi)?);
    if !(f_lo <= 0.0 && f_hi > 0.0) {
        return Err(invalid(f_lo, f_hi));
    }

    let (mut a, mut b) = (lo, hi);
    while b - a > BOUNDARY_TOL {
        let mid = 0.5 * (a + b);
        if onset(mid)? > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Critical hopping from the linear instability of `psi = 0`: the smallest
/// `z kappa` at which `d<b>/dpsi` reaches 1. Used to cross-check
/// [`numeric_boundary`].
pub fn linear_instability_boundary(params: &ModelParams, basis: &TruncatedBasis, bracket: (f64, f64)) -> Result<f64> {
    const PROBE: f64 = 1e-6;
    let gain = |zk: f64| -> f64 {
        ground_state(&params.with_zkappa(zk), PROBE, basis)
            .map(|(_, v)| b_expect_real(&v, basis).abs() / PROBE - 1.0)
            .unwrap_or(f64::NAN)
    };
    find_root(gain, bracket, 1e-12)
}

/// Occupation fluctuation from photon loss alone: the excitation survives
/// with probability `exp(-gamma t)`, giving a Bernoulli spread.
pub fn leakage_fluctuation(params: &ModelParams, t: f64) -> Result<f64> {
    params.require_resonant()?;
    let p = (-params.gamma() * t).exp();
    Ok((p * (1.0 - p)).max(0.0).sqrt())
}

/// Hopping and leakage fluctuations combined in quadrature; the hopping part
/// is the number spread of the perturbed site state.
pub fn total_fluctuation(params: &ModelParams, t: f64) -> Result<f64> {
    let leak = leakage_fluctuation(params, t)?;
    let hop_var = if params.zkappa == 0.0 {
        0.0
    } else {
        perturbed_site_state(params, t)?.number_variance()
    };
    Ok((hop_var + leak * leak).sqrt())
}
