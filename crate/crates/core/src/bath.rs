//! Cavity mode coupled to a discretized flat bath, single-excitation sector.
//!
//! With a uniform grid of spacing `delta` and uniform coupling `eta`, the
//! golden-rule decay rate of the bare cavity amplitude is
//! `gamma = pi eta^2 / delta`. Propagating the exact eigen-decomposition and
//! fitting the survival amplitude checks that the cavity behaves as a damped
//! mode of complex frequency `omega_c - i gamma`. Amplitudes are reported in
//! the frame rotating at `omega_c`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{eig_arrowhead, ArrowheadEigen};

pub const MIN_MODES: usize = 101;
/// Required band half-width in units of the target rate.
pub const MIN_HALF_BANDWIDTH_RATES: f64 = 20.0;
/// Fit window, in units of the estimated decay time.
pub const FIT_WINDOW: (f64, f64) = (0.5, 3.0);

#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    pub n_modes: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub spacing: f64,
    pub coupling: f64,
    pub omega_c: f64,
    pub gamma_target: f64,
}

impl BathSpec {
    /// Time after which the discrete spectrum revives the cavity amplitude.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing
    }

    /// Detunings `omega_k - omega_c` of the bath modes.
    pub fn detunings(&self) -> Vec<f64> {
        let centre = (self.n_modes - 1) as f64 / 2.0;
        (0..self.n_modes).map(|k| (k as f64 - centre) * self.spacing).collect()
    }

    /// Same grid with the coupling switched off.
    pub fn decoupled(&self) -> Self {
        Self {
            coupling: 0.0,
            gamma_target: 0.0,
            ..self.clone()
        }
    }
}

/// Builds a symmetric grid of `n_modes` around `omega_c` whose golden-rule
/// rate is `gamma_target`.
pub fn make_bath(gamma_target: f64, n_modes: usize, half_bandwidth: f64, omega_c: f64) -> Result<BathSpec> {
    let bad = |msg: String| Err(Error::BadDiscretization(msg));
    if !(gamma_target > 0.0 && gamma_target.is_finite()) {
        return bad(format!("target rate must be > 0, got {gamma_target}"));
    }
    if n_modes < MIN_MODES || n_modes.is_multiple_of(2) {
        return bad(format!("need an odd number of modes >= {MIN_MODES}, got {n_modes}"));
    }
    if half_bandwidth < MIN_HALF_BANDWIDTH_RATES * gamma_target {
        return bad(format!(
            "half bandwidth {half_bandwidth} is below {MIN_HALF_BANDWIDTH_RATES} x gamma = {}",
            MIN_HALF_BANDWIDTH_RATES * gamma_target
        ));
    }
    let spacing = 2.0 * half_bandwidth / (n_modes - 1) as f64;
    let spec = BathSpec {
        n_modes,
        omega_min: omega_c - half_bandwidth,
        omega_max: omega_c + half_bandwidth,
        spacing,
        coupling: (gamma_target * spacing / PI).sqrt(),
        omega_c,
        gamma_target,
    };
    let half_recurrence = 0.5 * spec.recurrence_time();
    if half_recurrence < 5.0 / gamma_target {
        return bad(format!(
            "half recurrence time {half_recurrence} cannot resolve 5 decay times ({})",
            5.0 / gamma_target
        ));
    }
    Ok(spec)
}

/// Cavity survival amplitude `e_c(t)` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSeries {
    pub times: Vec<f64>,
    pub amplitude: Vec<Complex64>,
}

impl SurvivalSeries {
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitude.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Eigen-decomposition of the single-excitation Hamiltonian, reusable across
/// time grids.
#[derive(Debug, Clone)]
pub struct BathPropagator {
    spec: BathSpec,
    eigen: ArrowheadEigen,
    values: Vec<f64>,
    /// overlap of each eigenvector with the bare cavity excitation
    cavity_weight: Vec<f64>,
}

impl BathPropagator {
    pub fn new(spec: &BathSpec) -> Result<Self> {
        let detunings = spec.detunings();
        let coupling = vec![spec.coupling; spec.n_modes];
        let eigen = eig_arrowhead(0.0, &detunings, &coupling)?;
        let values = eigen.values();
        let cavity_weight = (0..values.len()).map(|i| eigen.component(i, 0)).collect();
        Ok(Self {
            spec: spec.clone(),
            eigen,
            values,
            cavity_weight,
        })
    }

    pub fn spec(&self) -> &BathSpec {
        &self.spec
    }

    /// Cavity amplitude after time `t`, starting from the bare cavity
    /// excitation.
    pub fn cavity_amplitude(&self, t: f64) -> Complex64 {
        self.values
            .iter()
            .zip(&self.cavity_weight)
            .map(|(&lam, &w)| Complex64::from_polar(w * w, -lam * t))
            .sum()
    }

    /// Full state `(e_c, e_1, ..., e_n)` after time `t`.
    pub fn state(&self, t: f64) -> Vec<Complex64> {
        let dim = self.values.len();
        let phases: Vec<Complex64> = self
            .values
            .iter()
            .zip(&self.cavity_weight)
            .map(|(&lam, &w)| Complex64::from_polar(w, -lam * t))
            .collect();
        (0..dim)
            .map(|row| {
                phases
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p * self.eigen.component(i, row))
                    .sum()
            })
            .collect()
    }

    /// `|e_c|^2 + sum_k |e_k|^2` after time `t`.
    pub fn total_norm(&self, t: f64) -> f64 {
        self.state(t).iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Propagates the bare cavity excitation on `n_samples` evenly spaced times
/// in `[0, t_end]`.
pub fn propagate_survival(spec: &BathSpec, t_end: f64, n_samples: usize) -> Result<SurvivalSeries> {
    let half_recurrence = 0.5 * spec.recurrence_time();
    if t_end > half_recurrence {
        return Err(Error::BadDiscretization(format!(
            "t_end = {t_end} runs past half the recurrence time ({half_recurrence})"
        )));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParams("need at least two samples".into()));
    }
    let prop = BathPropagator::new(spec)?;
    Ok(series_from(&prop, t_end, n_samples))
}

pub fn series_from(prop: &BathPropagator, t_end: f64, n_samples: usize) -> SurvivalSeries {
    let times: Vec<f64> = (0..n_samples)
        .map(|i| t_end * i as f64 / (n_samples - 1) as f64)
        .collect();
    let amplitude = times.iter().map(|&t| prop.cavity_amplitude(t)).collect();
    SurvivalSeries { times, amplitude }
}

/// Decay rate from a least-squares line through `ln |e_c|^2` over
/// `[0.5, 3] / gamma_est`, where the estimate is refined self-consistently
/// starting from the `1/e` crossing of the survival probability.
pub fn fit_decay_rate(series: &SurvivalSeries) -> Result<f64> {
    let probs = series.probabilities();
    let t_end = series.times.last().copied().unwrap_or(0.0);
    let crossing = series
        .times
        .iter()
        .zip(&probs)
        .find(|(_, &p)| p <= (-1.0f64).exp())
        .map(|(&t, _)| t)
        .ok_or_else(|| Error::WindowTooShort("survival probability never drops below 1/e".into()))?;
    if crossing <= 0.0 {
        return Err(Error::WindowTooShort("no resolved decay".into()));
    }

    let mut gamma = 0.5 / crossing;
    for _ in 0..8 {
        let (lo, hi) = (FIT_WINDOW.0 / gamma, FIT_WINDOW.1 / gamma);
        if t_end < hi * (1.0 - 1e-9) {
            return Err(Error::WindowTooShort(format!(
                "series ends at {t_end}, fit window needs {hi}"
            )));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = series
            .times
            .iter()
            .zip(&probs)
            .filter(|(&t, &p)| t >= lo && t <= hi && p > 0.0)
            .map(|(&t, &p)| (t, p.ln()))
            .unzip();
        if xs.len() < 3 {
            return Err(Error::WindowTooShort(format!(
                "only {} samples in the fit window",
                xs.len()
            )));
        }
        let slope = least_squares_slope(&xs, &ys);
        let next = -0.5 * slope;
        if !(next > 0.0) {
            return Err(Error::WindowTooShort("fitted slope is not decaying".into()));
        }
        let done = ((next - gamma) / gamma).abs() < 1e-12;
        gamma = next;
        if done {
            break;
        }
    }
    Ok(gamma)
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}
