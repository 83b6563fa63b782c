//! Reference designs and the fiber validation setup, with their published
//! figures for comparison.

use crate::design::C_BAND;
use crate::modes::{FiberGeometry, WaveguideGeometry};
use crate::sfwm::{DetectionChain, FilterSpec, PulseShape, PumpPulse};

/// Published characteristics of one SOI design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPreset {
    pub name: &'static str,
    /// Core width a, μm.
    pub core_width: f64,
    /// Core height b, μm.
    pub core_height: f64,
    /// Peak pump power, W.
    pub peak_power: f64,
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
    /// Overlap integral, m⁻².
    pub overlap: f64,
    /// Nonlinear parameter, W⁻¹m⁻¹.
    pub gamma: f64,
    pub loss: LossRow,
}

/// Published signal-loss budget of one design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRow {
    pub wavelength: f64,
    /// dB/cm.
    pub alpha_silica: f64,
    /// dB/cm.
    pub alpha_silicon: f64,
    pub core: f64,
    pub silica: f64,
    pub box_: f64,
    pub a_material: f64,
}

/// Waveguide length of the SOI designs, m.
pub const SOI_LENGTH: f64 = 0.02;
/// Sech pump duration T₀ of the SOI designs, s.
pub const SOI_PULSE_DURATION: f64 = 5e-12;
/// Filter bandwidth of the SOI designs, Hz.
pub const SOI_FILTER_BANDWIDTH: f64 = 1e12;
/// Repetition rate assumed for SOI rate reports, Hz.
pub const SOI_REPETITION_RATE: f64 = 80e6;
/// Target pair probability per pulse of the SOI designs.
pub const SOI_TARGET_PGP: f64 = 0.05;

pub const W_CH4: DesignPreset = DesignPreset {
    name: "wCH4",
    core_width: 2.05,
    core_height: 0.75,
    peak_power: 24.1e-3,
    pump: 2.100,
    signal: 3.265,
    idler: 1.547,
    overlap: 1.05e12,
    gamma: 20.78,
    loss: LossRow {
        wavelength: 3.265,
        alpha_silica: 0.7,
        alpha_silicon: 0.001,
        core: 0.922,
        silica: 0.039,
        box_: 0.039,
        a_material: 0.98,
    },
};

pub const W_NO2: DesignPreset = DesignPreset {
    name: "wNO2",
    core_width: 2.23,
    core_height: 0.75,
    peak_power: 9.2e-3,
    pump: 2.151,
    signal: 3.461,
    idler: 1.560,
    overlap: 2.90e12,
    gamma: 55.74,
    loss: LossRow {
        wavelength: 3.461,
        alpha_silica: 1.0,
        alpha_silicon: 0.001,
        core: 0.913,
        silica: 0.044,
        box_: 0.043,
        a_material: 0.97,
    },
};

pub const W_COM: DesignPreset = DesignPreset {
    name: "wCOM",
    core_width: 2.35,
    core_height: 0.65,
    peak_power: 32.2e-3,
    pump: 2.210,
    signal: 3.905,
    idler: 1.541,
    overlap: 9.69e11,
    gamma: 16.66,
    loss: LossRow {
        wavelength: 3.905,
        alpha_silica: 7.3,
        alpha_silicon: 0.002,
        core: 0.853,
        silica: 0.074,
        box_: 0.073,
        a_material: 0.86,
    },
};

pub const DESIGNS: [DesignPreset; 3] = [W_CH4, W_NO2, W_COM];

pub fn design(name: &str) -> Option<DesignPreset> {
    DESIGNS.iter().copied().find(|d| d.name.eq_ignore_ascii_case(name))
}

impl DesignPreset {
    pub fn geometry(&self) -> WaveguideGeometry {
        WaveguideGeometry { length: SOI_LENGTH, ..WaveguideGeometry::soi(self.core_width, self.core_height) }
    }

    pub fn pulse(&self) -> PumpPulse {
        PumpPulse {
            wavelength: self.pump,
            shape: PulseShape::Sech,
            duration: SOI_PULSE_DURATION,
            peak_power: self.peak_power,
            repetition_rate: SOI_REPETITION_RATE,
        }
    }

    pub fn idler_band(&self) -> (f64, f64) {
        C_BAND
    }
}

/// Fiber validation setup and published rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlibartPreset {
    /// μm.
    pub core_radius: f64,
    /// m.
    pub length: f64,
    /// μm.
    pub pump: f64,
    /// Pulse duration τ, s.
    pub duration: f64,
    /// Hz.
    pub repetition_rate: f64,
    /// (centre nm, width nm).
    pub signal_filter_nm: (f64, f64),
    pub idler_filter_nm: (f64, f64),
    pub chain: DetectionChain,
    /// (mean pump power W, published rate s⁻¹).
    pub rows: [(f64, f64); 5],
}

pub const ALIBART: AlibartPreset = AlibartPreset {
    core_radius: 0.965,
    length: 0.2,
    pump: 0.7084,
    duration: 2e-12,
    repetition_rate: 80e6,
    signal_filter_nm: (570.0, 40.0),
    idler_filter_nm: (880.0, 40.0),
    chain: DetectionChain { mu_s: 0.58, mu_i: 0.44, eta_s: 0.60, eta_i: 0.33 },
    rows: [
        (960e-6, 8.70e6),
        (660e-6, 4.29e6),
        (490e-6, 2.42e6),
        (340e-6, 1.19e6),
        (200e-6, 4.20e5),
    ],
};

impl AlibartPreset {
    pub fn fiber(&self, cladding: &str) -> FiberGeometry {
        FiberGeometry {
            core_radius: self.core_radius,
            core: crate::materials::SILICA.into(),
            cladding: cladding.into(),
            length: self.length,
        }
    }

    pub fn signal_filter(&self) -> FilterSpec {
        FilterSpec::from_nm(self.signal_filter_nm.0, self.signal_filter_nm.1).expect("static filter")
    }

    pub fn idler_filter(&self) -> FilterSpec {
        FilterSpec::from_nm(self.idler_filter_nm.0, self.idler_filter_nm.1).expect("static filter")
    }
}
