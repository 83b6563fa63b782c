//! Spontaneous four-wave mixing downstream of dispersion: nonlinear
//! coefficient, phase mismatch, joint spectral density, pair probability per
//! pulse, detection-chain rates, material attenuation and the Raman window.

mod jsd;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{DispersionCurve, DispersionError};
use crate::modes::PowerFractions;
use crate::units::{omega_from_um, C};

pub use jsd::{jsd, pgp, pgp_adaptive, JsdAxis, JsdGrid, JsdMeta, JsdSummary, PgpResult, QuadratureOptions};

/// Raman gain peak offset from the pump, Hz.
pub const RAMAN_PEAK_OFFSET: f64 = 15.6e12;
/// Raman gain dip offset from the pump, Hz.
pub const RAMAN_DIP_OFFSET: f64 = 16.2e12;

#[derive(Debug, Error)]
pub enum SfwmError {
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error("{which} filter [{lo:.6e}, {hi:.6e}] rad/s is not inside the grid [{grid_lo:.6e}, {grid_hi:.6e}]")]
    FilterOutsideGrid { which: &'static str, lo: f64, hi: f64, grid_lo: f64, grid_hi: f64 },
    #[error("pair-probability quadrature not converged: pgp {pgp:.4e}, error {error:.2e} at {nodes} nodes per axis")]
    QuadratureNotConverged { pgp: f64, error: f64, nodes: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    #[default]
    Sech,
    /// Only changes how a mean power converts to peak power; the spectral
    /// factors always use the sech kernel with T₀ equal to the duration.
    Gaussian,
}

/// Pump pulse train.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpPulse {
    /// Vacuum wavelength, μm.
    pub wavelength: f64,
    pub shape: PulseShape,
    /// T₀, s.
    pub duration: f64,
    /// Peak power, W.
    pub peak_power: f64,
    /// Repetition rate, Hz.
    pub repetition_rate: f64,
}

impl PumpPulse {
    pub fn new(
        wavelength: f64,
        shape: PulseShape,
        duration: f64,
        peak_power: f64,
        repetition_rate: f64,
    ) -> Result<Self, SfwmError> {
        let p = Self { wavelength, shape, duration, peak_power, repetition_rate };
        p.validate()?;
        Ok(p)
    }

    /// Zero peak power is allowed (it yields a null JSD).
    pub fn validate(&self) -> Result<(), SfwmError> {
        let ok = self.wavelength > 0.0
            && self.duration > 0.0
            && self.peak_power >= 0.0
            && self.peak_power.is_finite()
            && self.repetition_rate > 0.0;
        if ok {
            Ok(())
        } else {
            Err(SfwmError::InvalidParameter(format!("pump pulse {self:?}")))
        }
    }

    /// Pulse energy 2·P_p·T₀, J.
    pub fn energy(&self) -> f64 {
        2.0 * self.peak_power * self.duration
    }

    pub fn omega(&self) -> f64 {
        omega_from_um(self.wavelength)
    }

    pub fn with_peak_power(self, peak_power: f64) -> Self {
        Self { peak_power, ..self }
    }
}

/// Ideal rectangular passband in angular frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// Centre, rad/s.
    pub center: f64,
    /// Full width, rad/s.
    pub bandwidth: f64,
}

impl FilterSpec {
    pub fn new(center: f64, bandwidth: f64) -> Result<Self, SfwmError> {
        if center > 0.0 && bandwidth > 0.0 && bandwidth < 2.0 * center {
            Ok(Self { center, bandwidth })
        } else {
            Err(SfwmError::InvalidParameter(format!("filter centre {center} rad/s, width {bandwidth} rad/s")))
        }
    }

    /// Centre wavelength (μm) and full width in Hz.
    pub fn from_wavelength_hz(center_um: f64, bandwidth_hz: f64) -> Result<Self, SfwmError> {
        Self::new(omega_from_um(center_um), 2.0 * std::f64::consts::PI * bandwidth_hz)
    }

    /// Centre wavelength and wavelength width, both nm.
    pub fn from_nm(center_nm: f64, width_nm: f64) -> Result<Self, SfwmError> {
        let (nu, dnu) = filter_to_frequency(center_nm, width_nm);
        Self::new(2.0 * std::f64::consts::PI * nu * 1e12, 2.0 * std::f64::consts::PI * dnu * 1e12)
    }

    pub fn lo(&self) -> f64 {
        self.center - 0.5 * self.bandwidth
    }

    pub fn hi(&self) -> f64 {
        self.center + 0.5 * self.bandwidth
    }
}

/// Coupling (μ) and detector (η) efficiencies of both arms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionChain {
    pub mu_s: f64,
    pub mu_i: f64,
    pub eta_s: f64,
    pub eta_i: f64,
}

impl DetectionChain {
    pub fn new(mu_s: f64, mu_i: f64, eta_s: f64, eta_i: f64) -> Result<Self, SfwmError> {
        let c = Self { mu_s, mu_i, eta_s, eta_i };
        c.validate()?;
        Ok(c)
    }

    pub fn ideal() -> Self {
        Self { mu_s: 1.0, mu_i: 1.0, eta_s: 1.0, eta_i: 1.0 }
    }

    pub fn validate(&self) -> Result<(), SfwmError> {
        if [self.mu_s, self.mu_i, self.eta_s, self.eta_i].iter().all(|v| (0.0..=1.0).contains(v)) {
            Ok(())
        } else {
            Err(SfwmError::InvalidParameter(format!("efficiencies must lie in [0, 1]: {self:?}")))
        }
    }

    /// Overall transmission μ_s·μ_i·η_s·η_i.
    pub fn factor(&self) -> f64 {
        self.mu_s * self.mu_i * self.eta_s * self.eta_i
    }
}

/// γ = 2π n₂ f / λ_p in W⁻¹m⁻¹ (n₂ in m²/W, f in m⁻², λ_p in μm).
pub fn gamma(n2: f64, f_ppsi: f64, lambda_p: f64) -> f64 {
    2.0 * std::f64::consts::PI * n2 * f_ppsi / (lambda_p * 1e-6)
}

/// Δβ = 2β(ω_p) − β(ω_s) − β(ω_i), rad/m.
pub fn phase_mismatch(curve: &DispersionCurve, wp: f64, ws: f64, wi: f64) -> Result<f64, DispersionError> {
    Ok(2.0 * curve.beta(wp)? - curve.beta(ws)? - curve.beta(wi)?)
}

/// Spectral amplitude prefactor A(ω_s, ω_i), s².
pub fn jsd_factor_a(
    curve: &DispersionCurve,
    gamma: f64,
    length: f64,
    pulse: &PumpPulse,
    ws: f64,
    wi: f64,
) -> Result<f64, DispersionError> {
    let wp = pulse.omega();
    let (ngp, ngs, ngi) = (curve.group_index(wp)?, curve.group_index(ws)?, curve.group_index(wi)?);
    Ok(factor_a(ngp, ngs, ngi, ws, wi, wp, gamma * length * pulse.energy()))
}

pub(crate) fn factor_a(ngp: f64, ngs: f64, ngi: f64, ws: f64, wi: f64, wp: f64, gle: f64) -> f64 {
    let r = ngp * (ngs * ngi).sqrt() / (2.0 * std::f64::consts::PI) * (ws * wi).sqrt() / wp * gle;
    r * r
}

/// Pump-envelope factor G = (u/sinh u)², u = πT₀x/2, x = ω_s + ω_i − 2ω_p.
pub fn jsd_factor_g(pulse: &PumpPulse, ws: f64, wi: f64, wp: f64) -> f64 {
    factor_g(pulse.duration, ws + wi - 2.0 * wp)
}

pub(crate) fn factor_g(t0: f64, x: f64) -> f64 {
    let u = (std::f64::consts::FRAC_PI_2 * t0 * x).abs();
    if u < 1e-4 {
        // u/sinh u = 1 − u²/6 + 7u⁴/360
        let r = 1.0 - u * u / 6.0 + 7.0 * u.powi(4) / 360.0;
        r * r
    } else if u > 700.0 {
        0.0
    } else {
        (u / u.sinh()).powi(2)
    }
}

/// Phase-matching factor F = sinc²[(Δβ + x/v_gp)·L/2].
pub fn jsd_factor_f(curve: &DispersionCurve, length: f64, wp: f64, ws: f64, wi: f64) -> Result<f64, DispersionError> {
    let dbeta = phase_mismatch(curve, wp, ws, wi)?;
    let inv_vgp = curve.beta_prime(wp)?;
    Ok(factor_f((dbeta + (ws + wi - 2.0 * wp) * inv_vgp) * length / 2.0))
}

/// sinc²(u) with the unnormalized sinc.
pub(crate) fn factor_f(u: f64) -> f64 {
    if u.abs() < 1e-6 {
        1.0 - u * u / 3.0
    } else {
        (u.sin() / u).powi(2)
    }
}

/// Pair generation rate PGP·R, s⁻¹.
pub fn pgr(pgp: f64, repetition_rate: f64) -> f64 {
    pgp * repetition_rate
}

/// Detected pair rate after coupling and detection losses, s⁻¹.
pub fn detected_rate(pgr: f64, chain: &DetectionChain) -> f64 {
    pgr * chain.factor()
}

impl PulseShape {
    /// Peak power of pulses with the given mean power: gaussian per
    /// [`peak_power_from_mean`], sech from E = P_mean/R = 2·P_p·T₀.
    pub fn peak_from_mean(self, mean_power: f64, repetition_rate: f64, duration: f64) -> f64 {
        match self {
            PulseShape::Gaussian => peak_power_from_mean(mean_power, repetition_rate, duration),
            PulseShape::Sech => mean_power / (2.0 * repetition_rate * duration),
        }
    }
}

/// Peak power from mean power for a gaussian pulse of duration τ:
/// P_p = 2/(R τ)·√(ln2/π)·P_mean.
pub fn peak_power_from_mean(mean_power: f64, repetition_rate: f64, tau: f64) -> f64 {
    2.0 / (repetition_rate * tau) * (std::f64::consts::LN_2 / std::f64::consts::PI).sqrt() * mean_power
}

/// Power-weighted transmission of the signal through core and silica
/// regions over `length` m (absorption in dB/cm).
pub fn material_attenuation(fractions: &PowerFractions, alpha_si: f64, alpha_silica: f64, length: f64) -> f64 {
    let l_cm = length * 100.0;
    let t = |a: f64| 10f64.powf(-a * l_cm / 10.0);
    fractions.core * t(alpha_si) + (fractions.cladding + fractions.box_) * t(alpha_silica)
}

/// Raman gain peak and dip wavelengths (μm) on the Stokes side of the pump.
pub fn raman_window(lambda_p: f64) -> (f64, f64) {
    let nu = C / (lambda_p * 1e-6);
    let at = |off: f64| C / (nu - off) * 1e6;
    (at(RAMAN_PEAK_OFFSET), at(RAMAN_DIP_OFFSET))
}

/// Filter centre and width in THz from centre and width in nm.
pub fn filter_to_frequency(center_nm: f64, width_nm: f64) -> (f64, f64) {
    let l = center_nm * 1e-9;
    (C / l * 1e-12, C * width_nm * 1e-9 / (l * l) * 1e-12)
}
