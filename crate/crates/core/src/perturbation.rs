//! Closed-form dissipative mean-field theory at unit filling and zero
//! detuning.
//!
//! Second-order perturbation in the hopping around the damped dressed state
//! `|-,1>` couples to two channels: the supplemented vacuum `|0>` (through
//! `B`) and `|-,2>` (through `B^dag`). With
//!
//! ```text
//! F1 = omega_c - beta - mu            = -(1 + mu_tilde) beta
//! F2 = -omega_c + (sqrt2 - 1) beta + mu = (mu_tilde + sqrt2 - 1) beta
//! ```
//!
//! the channel weights are `m0^2 = 1/2` and `m2^2 = (3 + 2 sqrt2) / 4`, and
//! every loss rate enters as `F^2 + gamma^2`. The order parameter is
//!
//! ```text
//! psi(t) = exp(-Gamma t) sqrt(-chi / (z kappa Theta))
//! ```
//!
//! where the effective hopping `z kappa exp(-2 gamma t)` carries all of the
//! time dependence of `chi`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{mott_lobe_interval, total_decay, ModelParams};
use crate::numerics::{find_root, maximize_scalar};

/// `<0| B |-,1>`
pub const M0: f64 = FRAC_1_SQRT_2;
/// `<-,2| B^dag |-,1>`
pub const M2: f64 = (1.0 + SQRT_2) / 2.0;
/// `4 M2^2`
const UPPER_WEIGHT: f64 = 3.0 + 2.0 * SQRT_2;

const TIP_TOL: f64 = 1e-8;
/// Relative accuracy demanded of the critical-time root, in units of 1/gamma.
pub const CRITICAL_TIME_TOL: f64 = 1e-8;

/// Terms of the self-consistency function at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiParts {
    pub f1: f64,
    pub f2: f64,
    pub theta: f64,
    pub chi: f64,
    /// `z kappa exp(-2 gamma t)` in frequency units
    pub effective_hopping: f64,
}

impl ChiParts {
    /// Superfluid when `chi < 0`, localized otherwise.
    pub fn is_superfluid(&self) -> bool {
        self.chi < 0.0
    }
}

/// First-order site state on `{|0>, |-,1>, |-,2>}`, unnormalized with
/// `amp1 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedState {
    pub amp0: Complex64,
    pub amp1: Complex64,
    pub amp2: Complex64,
    /// order parameter the state was built from
    pub psi: f64,
}

impl PerturbedState {
    pub fn norm_sqr(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr() + self.amp2.norm_sqr()
    }

    /// `<B>` to first order in the hopping (unnormalized amplitudes).
    pub fn b_expect_linear(&self) -> Complex64 {
        self.amp0.conj() * M0 * self.amp1 + self.amp1.conj() * M2 * self.amp2
    }

    /// `<B>` of the normalized three-level state.
    pub fn b_expect(&self) -> Complex64 {
        self.b_expect_linear() / self.norm_sqr()
    }

    /// Imaginary part of the first-order `<B>`; equals
    /// `z kappa_eff gamma Theta psi` and vanishes without loss.
    pub fn psi_gamma(&self) -> f64 {
        self.b_expect_linear().im
    }

    /// Probabilities of 0, 1 and 2 excitations.
    pub fn populations(&self) -> [f64; 3] {
        let n2 = self.norm_sqr();
        [
            self.amp0.norm_sqr() / n2,
            self.amp1.norm_sqr() / n2,
            self.amp2.norm_sqr() / n2,
        ]
    }

    /// Variance of the excitation number.
    pub fn number_variance(&self) -> f64 {
        let [_, p1, p2] = self.populations();
        let mean = p1 + 2.0 * p2;
        let second = p1 + 4.0 * p2;
        (second - mean * mean).max(0.0)
    }
}

/// Energies `(F1, F2)` bounding the unit-filling lobe.
pub fn big_f(params: &ModelParams) -> Result<(f64, f64)> {
    params.require_resonant()?;
    let f1 = -(1.0 + params.mu_tilde) * params.beta;
    let f2 = (params.mu_tilde + SQRT_2 - 1.0) * params.beta;
    Ok((f1, f2))
}

/// Hopping-independent part of `chi`, i.e. `chi = 1/(z kappa_eff) - lobe_gain`.
fn lobe_gain(f1: f64, f2: f64, gamma: f64) -> f64 {
    -f1 / (2.0 * (f1 * f1 + gamma * gamma)) - UPPER_WEIGHT * f2 / (4.0 * (f2 * f2 + gamma * gamma))
}

fn theta(f1: f64, f2: f64, gamma: f64) -> f64 {
    1.0 / (2.0 * (f1 * f1 + gamma * gamma)) + UPPER_WEIGHT / (4.0 * (f2 * f2 + gamma * gamma))
}

fn effective_hopping(params: &ModelParams, t: f64) -> f64 {
    params.hopping() * (-2.0 * params.gamma() * t).exp()
}

pub fn chi_theta(params: &ModelParams, t: f64) -> Result<ChiParts> {
    let (f1, f2) = big_f(params)?;
    if params.zkappa == 0.0 {
        return Err(Error::ZeroHopping);
    }
    let gamma = params.gamma();
    let hop = effective_hopping(params, t);
    Ok(ChiParts {
        f1,
        f2,
        theta: theta(f1, f2, gamma),
        chi: 1.0 / hop - lobe_gain(f1, f2, gamma),
        effective_hopping: hop,
    })
}

/// Order parameter `psi(t)`, zero whenever `chi >= 0`. Assumes unit filling,
/// so the prefactor rate is `Gamma = gamma_a + gamma_c`.
pub fn order_parameter(params: &ModelParams, t: f64) -> Result<f64> {
    let parts = chi_theta(params, t)?;
    let rate = total_decay(params, 1)?;
    if parts.chi >= 0.0 {
        return Ok(0.0);
    }
    Ok((-rate * t).exp() * (-parts.chi / (params.hopping() * parts.theta)).sqrt())
}

/// Like [`order_parameter`], but defines `psi = 0` on decoupled sites.
pub fn order_parameter_or_zero(params: &ModelParams, t: f64) -> Result<f64> {
    match order_parameter(params, t) {
        Err(Error::ZeroHopping) => Ok(0.0),
        other => other,
    }
}

/// Critical `z kappa / beta` on the `chi = 0` surface at time `t`; the
/// hopping in `params` is ignored. Vanishes on the lossless lobe edges.
pub fn boundary_kappa(params: &ModelParams, t: f64) -> Result<f64> {
    let (f1, f2) = big_f(params)?;
    let (lo, hi) = mott_lobe_interval(params)?;
    if !(lo..=hi).contains(&params.mu_tilde) {
        return Err(Error::OutsideLobe(params.mu_tilde));
    }
    let gamma = params.gamma();
    let pole = 4.0 * f64::EPSILON * params.beta;
    if gamma == 0.0 && (f1.abs() <= pole || f2.abs() <= pole) {
        // chi pole
        return Ok(0.0);
    }
    let gain = lobe_gain(f1, f2, gamma);
    if !(gain > 0.0) {
        return Err(Error::OutsideLobe(params.mu_tilde));
    }
    Ok((2.0 * gamma * t).exp() / (gain * params.beta))
}

/// `mu_tilde` of the lossless lobe tip, where both channel terms of `Theta`
/// are equal.
pub fn lossless_tip_mu_tilde() -> f64 {
    let s = (1.0 + SQRT_2) / SQRT_2;
    (1.0 - SQRT_2 - s) / (1.0 + s)
}

/// Maximum of [`boundary_kappa`] over the lobe: `(mu_tilde*, zkappa*)`.
pub fn lobe_tip(params: &ModelParams, t: f64) -> Result<(f64, f64)> {
    let (lo, hi) = mott_lobe_interval(params)?;
    let f = |mu: f64| boundary_kappa(&params.with_mu_tilde(mu), t).unwrap_or(0.0);
    Ok(maximize_scalar(f, (lo, hi), TIP_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalTime {
    /// root of `chi(t) = 0`; `chi(exact) >= 0`
    pub exact: f64,
    /// `ln(kappa / kappa_c) / (2 gamma)` with the lossless `kappa_c`
    pub estimate: f64,
}

/// Time at which decaying effective hopping crosses the phase boundary.
pub fn critical_time(params: &ModelParams) -> Result<CriticalTime> {
    let gamma = params.gamma();
    let start = chi_theta(params, 0.0)?;
    if gamma == 0.0 {
        return Err(Error::ZeroGamma);
    }
    if !start.is_superfluid() {
        return Err(Error::NeverCritical {
            zkappa: params.zkappa,
            critical: boundary_kappa(params, 0.0)?,
        });
    }

    let chi = |t: f64| chi_theta(params, t).map(|c| c.chi).unwrap_or(f64::NAN);
    let mut hi = 1.0 / gamma;
    while chi(hi) < 0.0 {
        hi *= 2.0;
    }
    // iterate to full precision, then step onto the localized side so that
    // psi(t_c) is exactly zero
    let mut root = find_root(chi, (0.0, hi), 0.0)?;
    debug_assert!((root - find_root(chi, (0.0, hi), CRITICAL_TIME_TOL / gamma)?).abs() <= CRITICAL_TIME_TOL / gamma);
    for _ in 0..64 {
        if chi(root) >= 0.0 {
            break;
        }
        root = next_up(root);
    }

    let lossless = ModelParams {
        gamma_a: 0.0,
        gamma_c: 0.0,
        ..*params
    };
    let kappa_c = boundary_kappa(&lossless, 0.0)?;
    Ok(CriticalTime {
        exact: root,
        estimate: (params.zkappa / kappa_c).ln() / (2.0 * gamma),
    })
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits + 1 } else { bits - 1 })
}

/// First-order site state around `|-,1>` in the mean field `psi(t)`.
///
/// The channel amplitudes are `z kappa_eff psi m / (E_1 - E_m)` with complex
/// level energies, so `Re <B>` reproduces the self-consistency condition and
/// `Im <B> = z kappa_eff gamma Theta psi`.
pub fn perturbed_site_state(params: &ModelParams, t: f64) -> Result<PerturbedState> {
    let parts = chi_theta(params, t)?;
    let psi = order_parameter(params, t)?;
    let gamma = params.gamma();
    let drive = parts.effective_hopping * psi;
    // E_{-,1} - E_0 = F1 - i gamma,  E_{-,1} - E_{-,2} = F2 + i gamma
    let amp0 = -drive * M0 / Complex64::new(parts.f1, -gamma);
    let amp2 = -drive * M2 / Complex64::new(parts.f2, gamma);
    Ok(PerturbedState {
        amp0,
        amp1: Complex64::new(1.0, 0.0),
        amp2,
        psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TIP: f64 = -0.7836;

    fn lossless(mu: f64, zk: f64) -> ModelParams {
        ModelParams::default().with_mu_tilde(mu).with_zkappa(zk)
    }

    /// Independent evaluation straight from the textbook form with F1, F2
    /// written in terms of omega_c and mu.
    fn chi_oracle(omega_c: f64, mu: f64, gamma: f64, zk: f64, t: f64) -> (f64, f64) {
        let f1 = omega_c - 1.0 - mu;
        let f2 = -omega_c + (2f64.sqrt() - 1.0) + mu;
        let c = 3.0 + 2.0 * 2f64.sqrt();
        let theta = 1.0 / (2.0 * f1 * f1 + 2.0 * gamma * gamma) + c / (4.0 * f2 * f2 + 4.0 * gamma * gamma);
        let chi = f1 / (2.0 * f1 * f1 + 2.0 * gamma * gamma)
            + c * f2 / (4.0 * f2 * f2 + 4.0 * gamma * gamma)
            + 1.0 / (zk * (-2.0 * gamma * t).exp());
        (chi, theta)
    }

    #[test]
    fn big_f_poles_and_values() {
        let (f1, _) = big_f(&lossless(-1.0, 0.1)).unwrap();
        assert_eq!(f1, 0.0);
        let (_, f2) = big_f(&lossless(1.0 - SQRT_2, 0.1)).unwrap();
        assert!(f2.abs() < 1e-16);
        let (f1, f2) = big_f(&lossless(TIP, 0.1)).unwrap();
        assert!((f1 + 0.21640).abs() < 1e-12);
        assert!((f2 + 0.369_386_437_6).abs() < 1e-9);
    }

    #[test]
    fn big_f_rejects_detuning() {
        assert!(matches!(
            big_f(&lossless(TIP, 0.1).with_detuning(0.2)),
            Err(Error::NonzeroDetuning(_))
        ));
    }

    #[test]
    fn chi_on_boundary_is_zero() {
        let zk = boundary_kappa(&lossless(TIP, 0.0), 0.0).unwrap();
        assert!((zk - 0.159867).abs() < 1e-6);
        let parts = chi_theta(&lossless(TIP, zk), 0.0).unwrap();
        assert!(parts.chi.abs() < 1e-6);
    }

    #[test]
    fn chi_term_by_term() {
        let parts = chi_theta(&lossless(TIP, 0.3), 0.0).unwrap();
        assert!((parts.chi + 2.92186).abs() < 1e-4, "{}", parts.chi);
        let (chi, theta) = chi_oracle(1000.0, 1000.0 + TIP, 0.0, 0.3, 0.0);
        assert!((parts.chi - chi).abs() < 1e-9);
        assert!((parts.theta - theta).abs() < 1e-9);
    }

    #[test]
    fn chi_matches_oracle_with_loss() {
        for &(g, zk, t) in &[(0.01, 0.3, 0.0), (0.02, 0.2, 12.5), (0.05, 0.5, 4.0)] {
            let p = lossless(TIP, zk).with_gamma(g);
            let parts = chi_theta(&p, t).unwrap();
            let (chi, theta) = chi_oracle(1000.0, 1000.0 + TIP, g, zk, t);
            assert!((parts.chi - chi).abs() < 1e-8 * chi.abs().max(1.0));
            assert!((parts.theta - theta).abs() < 1e-8 * theta);
        }
    }

    #[test]
    fn chi_grows_without_bound() {
        let p = lossless(TIP, 0.3).with_gamma(0.01);
        assert!(chi_theta(&p, 5000.0).unwrap().chi > 1e40);
    }

    #[test]
    fn zero_hopping() {
        assert!(matches!(chi_theta(&lossless(TIP, 0.0), 0.0), Err(Error::ZeroHopping)));
        assert!(matches!(
            order_parameter(&lossless(TIP, 0.0), 0.0),
            Err(Error::ZeroHopping)
        ));
        assert_eq!(order_parameter_or_zero(&lossless(TIP, 0.0), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn psi_superfluid_value() {
        let psi = order_parameter(&lossless(TIP, 0.3), 0.0).unwrap();
        let expected = (2.92186f64 / (0.3 * 21.3563)).sqrt();
        assert!((psi - expected).abs() < 1e-4, "{psi}");
        assert!((psi - 0.6753).abs() < 1e-4);
    }

    #[test]
    fn psi_just_inside_mott() {
        let zk = boundary_kappa(&lossless(TIP, 0.0), 0.0).unwrap();
        assert_eq!(order_parameter(&lossless(TIP, zk * (1.0 - 1e-3)), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn boundary_values() {
        let zk = boundary_kappa(&lossless(-0.70, 0.0), 0.0).unwrap();
        assert!((zk - 0.147814).abs() < 1e-6, "{zk}");
        assert_eq!(boundary_kappa(&lossless(-1.0, 0.0), 0.0).unwrap(), 0.0);
        assert_eq!(boundary_kappa(&lossless(1.0 - SQRT_2, 0.0), 0.0).unwrap(), 0.0);
        assert!(matches!(
            boundary_kappa(&lossless(-2.0, 0.0), 0.0),
            Err(Error::OutsideLobe(_))
        ));
    }

    #[test]
    fn boundary_near_edges_vanishes() {
        for mu in [-1.0 + 1e-9, 1.0 - SQRT_2 - 1e-9] {
            assert!(boundary_kappa(&lossless(mu, 0.0), 0.0).unwrap() < 1e-8);
        }
    }

    #[test]
    fn boundary_time_scaling() {
        let p = lossless(TIP, 0.0).with_gamma(0.05);
        let b0 = boundary_kappa(&p, 0.0).unwrap();
        let b = boundary_kappa(&p, 0.2 / 0.05).unwrap();
        assert!((b / b0 - 0.4f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn tip_lossless() {
        let (mu, zk) = lobe_tip(&ModelParams::default(), 0.0).unwrap();
        assert!((mu + 0.78361).abs() < 1e-5, "{mu}");
        assert!((zk - 0.159867).abs() < 1e-6, "{zk}");
        assert!((mu - lossless_tip_mu_tilde()).abs() < 1e-7);
        let (mu_t, zk_t) = lobe_tip(&ModelParams::default(), 123.0).unwrap();
        assert_eq!((mu, zk), (mu_t, zk_t));
    }

    #[test]
    fn tip_grid_oracle() {
        // brute force over 10^5 points
        let n = 100_000;
        let (lo, hi) = (-1.0, 1.0 - SQRT_2);
        let mut best = (0.0, f64::MIN);
        for i in 1..n {
            let mu = lo + (hi - lo) * i as f64 / n as f64;
            let (f1, f2) = (-(1.0 + mu), mu + SQRT_2 - 1.0);
            let zk = 1.0 / (-1.0 / (2.0 * f1) - (3.0 + 2.0 * SQRT_2) / (4.0 * f2));
            if zk > best.1 {
                best = (mu, zk);
            }
        }
        let (mu, zk) = lobe_tip(&ModelParams::default(), 0.0).unwrap();
        assert!((mu - best.0).abs() < 1e-5);
        assert!((zk - best.1).abs() < 1e-9);
    }

    #[test]
    fn critical_time_doubling() {
        let base = ModelParams::default().with_gamma(0.01);
        let (mu, _) = lobe_tip(&base, 0.0).unwrap();
        let p = base.with_mu_tilde(mu);
        let zc = boundary_kappa(&p, 0.0).unwrap();
        let tc = critical_time(&p.with_zkappa(2.0 * zc)).unwrap();
        let expected = 2f64.ln() / 0.02;
        assert!((tc.exact - expected).abs() < 1e-8 * 100.0);
        assert!((tc.estimate - tc.exact).abs() / tc.exact < 0.01);
        assert_eq!(order_parameter(&p.with_zkappa(2.0 * zc), tc.exact).unwrap(), 0.0);
    }

    #[test]
    fn critical_time_errors() {
        let p = lossless(TIP, 0.1).with_gamma(0.01);
        assert!(matches!(critical_time(&p), Err(Error::NeverCritical { .. })));
        let p = lossless(TIP, 0.3);
        assert!(matches!(critical_time(&p), Err(Error::ZeroGamma)));
    }

    #[test]
    fn mott_state_is_unperturbed() {
        let s = perturbed_site_state(&lossless(TIP, 0.1), 0.0).unwrap();
        assert_eq!(s.psi, 0.0);
        assert_eq!(s.amp0, Complex64::new(0.0, 0.0));
        assert_eq!(s.amp2, Complex64::new(0.0, 0.0));
        assert_eq!(s.number_variance(), 0.0);
    }

    #[test]
    fn self_consistency_near_boundary() {
        // symbolic first-order expansion: Re<B> = zk psi (m0^2/(-F1) + m2^2/(-F2))
        let zc = boundary_kappa(&lossless(TIP, 0.0), 0.0).unwrap();
        for eps in [1e-2, 1e-3, 1e-4] {
            let s = perturbed_site_state(&lossless(TIP, zc * (1.0 + eps)), 0.0).unwrap();
            let ratio = s.b_expect_linear().re / s.psi;
            assert!((ratio - 1.0).abs() < 1.5 * eps, "eps {eps}: {ratio}");
        }
    }

    #[test]
    fn lossy_part_of_b() {
        let p = lossless(TIP, 0.3).with_gamma(0.01);
        let s = perturbed_site_state(&p, 0.0).unwrap();
        let parts = chi_theta(&p, 0.0).unwrap();
        let ratio = s.psi_gamma() / s.psi;
        assert!((ratio - 0.3 * 0.01 * parts.theta).abs() < 1e-14);
        assert!((ratio - 0.064).abs() < 0.001, "{ratio}");
    }
}
