//! End-to-end compositions: geometry → dispersion → phase matching → γ →
//! pair probability → rates, and the step-index fiber rate validation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{nearest_root, phase_match_solve, DesignError, PhaseMatchPoint};
use crate::dispersion::{uniform_grid, CurveBuilder, DispersionCurve, DispersionError};
use crate::materials::{pcf_cladding, MaterialError, MaterialLibrary, MixingRule, PCF_CLADDING_90};
use crate::modes::cache::DispersionCache;
use crate::modes::{
    effective_area, overlap_integral, power_fractions, Guide, ModeError, ModeSolution, PowerFractions,
    SolverSettings,
};
use crate::presets::{AlibartPreset, DesignPreset, SOI_FILTER_BANDWIDTH};
use crate::sfwm::{
    self, detected_rate, gamma, material_attenuation, peak_power_from_mean, pgp_adaptive, pgr, raman_window,
    DetectionChain, FilterSpec, PgpResult, PulseShape, PumpPulse, QuadratureOptions, SfwmError,
};
use crate::units::omega_from_um;

/// Version of every JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Sfwm(#[from] SfwmError),
}

/// How f_ppsi is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapMethod {
    /// Four-field overlap of the pump, signal and idler modes.
    #[default]
    Modes,
    /// 1/A_eff of the pump mode.
    EffectiveArea,
}

/// Everything the pipeline needs besides the material library.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub name: String,
    pub guide: Guide,
    pub pulse: PumpPulse,
    /// Picks the phase-matching root closest to this signal wavelength (μm);
    /// the first (shortest-signal) root otherwise.
    pub target_signal: Option<f64>,
    /// Explicit (signal, idler) filters; otherwise centred on the
    /// phase-matched pair with `filter_bandwidth` Hz.
    pub filters: Option<(FilterSpec, FilterSpec)>,
    pub filter_bandwidth: f64,
    pub chain: DetectionChain,
    pub settings: SolverSettings,
    /// Coarse dispersion grid, μm.
    pub grid: Vec<f64>,
    /// Refinement half-width and step around p/s/i, μm; `None` disables it.
    pub refine: Option<(f64, f64)>,
    pub overlap: OverlapMethod,
    /// Overrides the core material n₂ (m²/W).
    pub n2: Option<f64>,
    pub quadrature: QuadratureOptions,
}

impl PipelineConfig {
    /// Configuration reproducing one of the reference designs.
    pub fn from_preset(p: &DesignPreset) -> Self {
        Self {
            name: p.name.into(),
            guide: Guide::Rect(p.geometry()),
            pulse: p.pulse(),
            target_signal: Some(p.signal),
            filters: None,
            filter_bandwidth: SOI_FILTER_BANDWIDTH,
            chain: DetectionChain::ideal(),
            settings: SolverSettings::default(),
            grid: crate::dispersion::default_grid(),
            refine: Some((0.1, 0.01)),
            overlap: OverlapMethod::Modes,
            n2: None,
            quadrature: QuadratureOptions::default(),
        }
    }

    /// Explicit filters, or `filter_bandwidth` passbands centred on `pm`.
    pub fn filters_for(&self, pm: &PhaseMatchPoint) -> Result<(FilterSpec, FilterSpec), SfwmError> {
        match self.filters {
            Some(f) => Ok(f),
            None => {
                let bw = 2.0 * std::f64::consts::PI * self.filter_bandwidth;
                Ok((FilterSpec::new(omega_from_um(pm.signal), bw)?, FilterSpec::new(omega_from_um(pm.idler), bw)?))
            }
        }
    }

    /// Dispersion builder honouring the grid and refinement settings.
    pub fn builder<'a>(&self, lib: &'a MaterialLibrary, cache: Option<DispersionCache>) -> CurveBuilder<'a> {
        let mut b = CurveBuilder::new(lib, self.settings.clone()).with_cache(cache);
        b.grid = self.grid.clone();
        (b.refine_radius, b.refine_step) = self.refine.unwrap_or((0.0, b.refine_step));
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupIndices {
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterReport {
    pub center_thz: f64,
    pub bandwidth_thz: f64,
    pub center_um: f64,
}

impl From<&FilterSpec> for FilterReport {
    fn from(f: &FilterSpec) -> Self {
        let hz = |w: f64| w / (2.0 * std::f64::consts::PI);
        Self {
            center_thz: hz(f.center) * 1e-12,
            bandwidth_thz: hz(f.bandwidth) * 1e-12,
            center_um: crate::units::um_from_omega(f.center),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionReport {
    pub geometry_hash: String,
    /// (λ μm, n_eff).
    pub samples: Vec<(f64, f64)>,
    pub loo_residual: f64,
}

impl From<&DispersionCurve> for DispersionReport {
    fn from(c: &DispersionCurve) -> Self {
        Self { geometry_hash: c.geometry_hash().into(), samples: c.samples().to_vec(), loo_residual: c.loo_residual() }
    }
}

/// Every intermediate of a pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub schema: u32,
    pub name: String,
    pub guide: Guide,
    pub pulse: PumpPulse,
    pub dispersion: DispersionReport,
    pub phase_match: PhaseMatchPoint,
    pub separation_nm: f64,
    pub group_index: GroupIndices,
    pub overlap_method: OverlapMethod,
    /// m⁻².
    pub f_ppsi: f64,
    /// Pump effective area, m².
    pub a_eff_pump: f64,
    /// m²/W.
    pub n2: f64,
    /// W⁻¹m⁻¹.
    pub gamma: f64,
    pub signal_filter: FilterReport,
    pub idler_filter: FilterReport,
    pub pgp: PgpResult,
    pub signal_power_fractions: Option<PowerFractions>,
    pub a_material: Option<f64>,
    /// PGP × A_material: a lower bound including signal absorption.
    pub pgp_min: Option<f64>,
    /// s⁻¹.
    pub pgr: f64,
    /// s⁻¹.
    pub detected_rate: f64,
    /// (peak, dip) μm.
    pub raman_window: (f64, f64),
}

/// Phase-matched point on a refined curve: solve on the coarse curve, refine
/// around the root, solve again.
pub fn locate(
    builder: &CurveBuilder,
    guide: &Guide,
    pump: f64,
    target: Option<f64>,
) -> Result<(DispersionCurve, PhaseMatchPoint), ScenarioError> {
    let pick = |c: &DispersionCurve| -> Result<PhaseMatchPoint, DesignError> {
        match target {
            Some(t) => nearest_root(c, pump, t),
            None => phase_match_solve(c, pump).map(|r| r[0]),
        }
    };
    let coarse = builder.build(guide)?;
    let p0 = pick(&coarse)?;
    let fine = builder.refine(guide, &coarse, &[p0.pump, p0.signal, p0.idler])?;
    let p = pick(&fine)?;
    Ok((fine, p))
}

/// Mode-derived nonlinear quantities at a phase-matched point.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    /// Pump, signal and idler modes.
    pub modes: Vec<ModeSolution>,
    /// m².
    pub a_eff_pump: f64,
    /// m⁻².
    pub f_ppsi: f64,
    /// m²/W.
    pub n2: f64,
    /// W⁻¹m⁻¹.
    pub gamma: f64,
}

/// Solve the three modes of `pm` and derive f_ppsi, n₂ and γ.
pub fn nonlinearity(cfg: &PipelineConfig, lib: &MaterialLibrary, pm: &PhaseMatchPoint) -> Result<Nonlinearity, ScenarioError> {
    let wavelengths = [pm.pump, pm.signal, pm.idler];
    let modes: Vec<ModeSolution> = wavelengths
        .par_iter()
        .map(|&l| cfg.guide.solve(l, lib, &cfg.settings))
        .collect::<Result<_, _>>()?;
    let a_eff_pump = effective_area(&modes[0].field);
    let f_ppsi = match cfg.overlap {
        OverlapMethod::Modes => overlap_integral(&modes[0].field, &modes[1].field, &modes[2].field)?,
        OverlapMethod::EffectiveArea => 1.0 / a_eff_pump,
    };
    let core = match &cfg.guide {
        Guide::Rect(g) => &g.core,
        Guide::Fiber(g) => &g.core,
    };
    let n2 = match cfg.n2 {
        Some(v) => v,
        None => lib.get(core)?.nonlinear_index(pm.pump)?,
    };
    let gamma = gamma(n2, f_ppsi, pm.pump);
    Ok(Nonlinearity { modes, a_eff_pump, f_ppsi, n2, gamma })
}

/// Full pipeline for one configuration.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    lib: &MaterialLibrary,
    cache: Option<DispersionCache>,
) -> Result<PipelineReport, ScenarioError> {
    cfg.guide.validate()?;
    cfg.pulse.validate()?;
    cfg.chain.validate()?;
    let builder = cfg.builder(lib, cache);
    let (curve, pm) = locate(&builder, &cfg.guide, cfg.pulse.wavelength, cfg.target_signal)?;
    let (wp, ws, wi) = (omega_from_um(pm.pump), omega_from_um(pm.signal), omega_from_um(pm.idler));
    let group_index = GroupIndices {
        pump: curve.group_index(wp)?,
        signal: curve.group_index(ws)?,
        idler: curve.group_index(wi)?,
    };

    let nl = nonlinearity(cfg, lib, &pm)?;
    let (sf, idf) = cfg.filters_for(&pm)?;
    let pgp = pgp_adaptive(&curve, nl.gamma, cfg.guide.length(), &cfg.pulse, &sf, &idf, &cfg.quadrature)?;

    let (fractions, a_material) = match &cfg.guide {
        Guide::Rect(geom) => {
            let fr = power_fractions(&nl.modes[1], geom)?;
            let a_core = lib.get(&geom.core)?.absorption(pm.signal)?;
            let a_clad = lib.get(&geom.cladding)?.absorption(pm.signal)?;
            (Some(fr), Some(material_attenuation(&fr, a_core, a_clad, geom.length)))
        }
        Guide::Fiber(_) => (None, None),
    };
    let rate = pgr(pgp.pgp, cfg.pulse.repetition_rate);
    Ok(PipelineReport {
        schema: SCHEMA_VERSION,
        name: cfg.name.clone(),
        guide: cfg.guide.clone(),
        pulse: cfg.pulse,
        dispersion: (&curve).into(),
        phase_match: pm,
        separation_nm: pm.separation_nm(),
        group_index,
        overlap_method: cfg.overlap,
        f_ppsi: nl.f_ppsi,
        a_eff_pump: nl.a_eff_pump,
        n2: nl.n2,
        gamma: nl.gamma,
        signal_filter: (&sf).into(),
        idler_filter: (&idf).into(),
        pgp_min: a_material.map(|a| a * pgp.pgp),
        pgp,
        signal_power_fractions: fractions,
        a_material,
        pgr: rate,
        detected_rate: detected_rate(rate, &cfg.chain),
        raman_window: raman_window(pm.pump),
    })
}

/// Options of the fiber validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlibartOptions {
    /// Air/silica mixing rule of the cladding.
    pub mixing: MixingRule,
    /// Dispersion sampling (start, stop, step), μm.
    pub grid: (f64, f64, f64),
    pub quadrature: QuadratureOptions,
}

impl Default for AlibartOptions {
    fn default() -> Self {
        Self { mixing: MixingRule::Index, grid: (0.45, 1.10, 0.005), quadrature: QuadratureOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlibartRow {
    pub mean_power_w: f64,
    pub peak_power_w: f64,
    pub pgp: f64,
    pub pgp_error: f64,
    pub pgr: f64,
    pub computed_rate: f64,
    pub published_rate: f64,
    /// computed / published.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlibartReport {
    pub schema: u32,
    pub cladding: String,
    pub n_eff_pump: f64,
    /// m².
    pub a_eff_pump: f64,
    /// m⁻².
    pub f_ppsi: f64,
    pub n2: f64,
    pub gamma: f64,
    pub signal_filter: FilterReport,
    pub idler_filter: FilterReport,
    pub chain_factor: f64,
    pub rows: Vec<AlibartRow>,
}

/// Rates of the step-index fiber model against the published rates.
pub fn validate_alibart(
    preset: &AlibartPreset,
    lib: &MaterialLibrary,
    opts: &AlibartOptions,
) -> Result<AlibartReport, ScenarioError> {
    let mut lib = lib.clone();
    let cladding = match opts.mixing {
        MixingRule::Index => PCF_CLADDING_90.to_string(),
        rule => {
            let m = pcf_cladding(0.9, rule);
            let name = m.name.clone();
            lib.insert(m)?;
            name
        }
    };
    let guide = Guide::Fiber(preset.fiber(&cladding));
    let settings = SolverSettings::default();
    let grid = uniform_grid(opts.grid.0, opts.grid.1, opts.grid.2);
    let curve = crate::dispersion::build_curve(&guide, &grid, &lib, &settings, None)?;
    let pump_mode = guide.solve(preset.pump, &lib, &settings)?;
    let a_eff = effective_area(&pump_mode.field);
    let f_ppsi = 1.0 / a_eff;
    let n2 = lib.get(crate::materials::SILICA)?.nonlinear_index(preset.pump)?;
    let g = gamma(n2, f_ppsi, preset.pump);
    let (sf, idf) = (preset.signal_filter(), preset.idler_filter());
    let rows = preset
        .rows
        .iter()
        .map(|&(mean, published)| {
            let peak = peak_power_from_mean(mean, preset.repetition_rate, preset.duration);
            let pulse = PumpPulse::new(preset.pump, PulseShape::Gaussian, preset.duration, peak, preset.repetition_rate)?;
            let r = pgp_adaptive(&curve, g, preset.length, &pulse, &sf, &idf, &opts.quadrature)?;
            let rate = pgr(r.pgp, preset.repetition_rate);
            let computed = sfwm::detected_rate(rate, &preset.chain);
            Ok(AlibartRow {
                mean_power_w: mean,
                peak_power_w: peak,
                pgp: r.pgp,
                pgp_error: r.error,
                pgr: rate,
                computed_rate: computed,
                published_rate: published,
                ratio: computed / published,
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    Ok(AlibartReport {
        schema: SCHEMA_VERSION,
        cladding,
        n_eff_pump: pump_mode.n_eff,
        a_eff_pump: a_eff,
        f_ppsi,
        n2,
        gamma: g,
        signal_filter: (&sf).into(),
        idler_filter: (&idf).into(),
        chain_factor: preset.chain.factor(),
        rows,
    })
}
