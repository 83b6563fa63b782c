//! Shared fixtures for the criterion benchmarks.

use fwmpair_core::dispersion::{build_curve, uniform_grid};
use fwmpair_core::materials::PCF_CLADDING_90;
use fwmpair_core::presets::ALIBART;
use fwmpair_core::{DispersionCurve, Guide, MaterialLibrary, PulseShape, PumpPulse, SolverSettings};

/// Validation fiber with its cladding model.
pub fn fiber_guide() -> Guide {
    Guide::Fiber(ALIBART.fiber(PCF_CLADDING_90))
}

/// Dispersion curve of the validation fiber on a 5 nm grid.
pub fn fiber_curve(lib: &MaterialLibrary) -> DispersionCurve {
    build_curve(&fiber_guide(), &uniform_grid(0.45, 1.10, 0.005), lib, &SolverSettings::default(), None)
        .expect("fiber curve")
}

/// 2 ps sech pump at the validation wavelength.
pub fn fiber_pulse(peak_power: f64) -> PumpPulse {
    PumpPulse::new(ALIBART.pump, PulseShape::Sech, 2e-12, peak_power, 80e6).expect("valid pulse")
}
