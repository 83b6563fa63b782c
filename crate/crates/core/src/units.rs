//! Physical constants and unit conversions shared across the crate.
//!
//! Internally wavelengths are carried in micrometres, angular frequencies in
//! rad/s, propagation constants in rad/m and lengths of waveguides in metres.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;

/// Micrometre in metres.
pub const UM: f64 = 1e-6;

/// Angular frequency (rad/s) of a vacuum wavelength given in μm.
pub fn omega_from_um(lambda_um: f64) -> f64 {
    2.0 * PI * C / (lambda_um * UM)
}

/// Vacuum wavelength (μm) of an angular frequency in rad/s.
pub fn um_from_omega(omega: f64) -> f64 {
    2.0 * PI * C / omega / UM
}

/// Ordinary frequency (Hz) of a vacuum wavelength given in μm.
pub fn hz_from_um(lambda_um: f64) -> f64 {
    C / (lambda_um * UM)
}

/// Vacuum wavelength (μm) of an ordinary frequency in Hz.
pub fn um_from_hz(nu: f64) -> f64 {
    C / nu / UM
}

/// Vacuum wavenumber k₀ = 2π/λ in μm⁻¹.
pub fn k0_per_um(lambda_um: f64) -> f64 {
    2.0 * PI / lambda_um
}

/// Angular-frequency width (rad/s) of an ordinary-frequency width in Hz.
pub fn rad_per_s(hz: f64) -> f64 {
    2.0 * PI * hz
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_frequency_round_trip() {
        for l in [0.5, 1.55, 2.21, 3.905] {
            assert!((um_from_omega(omega_from_um(l)) - l).abs() < 1e-14);
            assert!((um_from_hz(hz_from_um(l)) - l).abs() < 1e-14);
        }
    }
}
