//! Design and simulation of spontaneous four-wave-mixing photon-pair sources
//! in silicon-on-insulator waveguides and step-index fibers.
//!
//! The pipeline runs materials → guided modes → dispersion → phase matching →
//! joint spectral density → pair-generation probability and detected rates.

pub mod design;
pub mod dispersion;
pub mod materials;
pub mod modes;
pub mod presets;
pub mod scenario;
pub mod sfwm;
pub mod units;

pub use design::{DesignError, DesignTarget, PhaseMatchPoint};
pub use dispersion::{CurveBuilder, DispersionCurve, DispersionError};
pub use materials::{MaterialError, MaterialLibrary, MaterialModel};
pub use modes::{
    FiberGeometry, Guide, ModeError, ModeField, ModeSolution, PowerFractions, SolverSettings,
    WaveguideGeometry,
};
pub use sfwm::{DetectionChain, FilterSpec, PgpResult, PulseShape, PumpPulse, SfwmError};

/// Pin dense and sparse linear algebra to a single thread so that repeated
/// runs give bit-identical results; parallelism is applied across
/// independent solves instead.
pub fn init_deterministic_linalg() {
    faer::set_global_parallelism(faer::Par::Seq);
}
