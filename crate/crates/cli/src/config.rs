//! Declarative run configuration (TOML) with explicit units.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use fwmpair_core::design::{DesignTarget, C_BAND};
use fwmpair_core::dispersion::{default_grid, uniform_grid};
use fwmpair_core::materials::{IndexModel, MaterialModel, MixingRule, SellmeierModel, Table};
use fwmpair_core::modes::{FiberGeometry, Guide, WaveguideGeometry};
use fwmpair_core::scenario::{OverlapMethod, PipelineConfig};
use fwmpair_core::sfwm::{DetectionChain, FilterSpec, PulseShape, PumpPulse, QuadratureOptions};
use fwmpair_core::{MaterialLibrary, SolverSettings};

use crate::error::CliError;
use crate::quantity::{Attenuation, Frequency, Length, NonlinearIndex, Power, Quantity, Time};

pub type Um = Quantity<Length>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub materials: Vec<MaterialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber: Option<FiberSpec>,
    pub pump: PumpSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filters: Option<FiltersSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compute: Option<ComputeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputsSpec>,
}

/// A user material. `model` selects which of the optional fields apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub name: String,
    pub model: MaterialKind,
    /// Sellmeier terms.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<SellmeierTerm>,
    /// Sellmeier constant offset A.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    /// Sellmeier validity interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validity: Option<[Um; 2]>,
    /// Fixed index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<f64>,
    /// Mixture constituents and fill fraction of `a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<MixingRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<Quantity<NonlinearIndex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorption: Option<Quantity<Attenuation>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialKind {
    Sellmeier,
    Fixed,
    Mixture,
}

/// B λ² / (λ² − λ_r²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierTerm {
    pub b: f64,
    pub resonance: Um,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub core_width: Um,
    pub core_height: Um,
    pub length: Um,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cladding: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_material: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_thickness: Option<Um>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padding: Option<Um>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSpec {
    pub core_radius: Um,
    pub length: Um,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core: Option<String>,
    pub cladding: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSpec {
    pub wavelength: Um,
    pub duration: Quantity<Time>,
    pub repetition_rate: Quantity<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_power: Option<Quantity<Power>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_power: Option<Quantity<Power>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<PulseShape>,
}

/// Either a common bandwidth centred on the phase-matched pair, or explicit
/// signal and idler passbands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltersSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<Quantity<Frequency>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<BandSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idler: Option<BandSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    pub center: Um,
    pub width: Um,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSpec {
    pub mu_s: f64,
    pub mu_i: f64,
    pub eta_s: f64,
    pub eta_i: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: Um,
    pub stop: Um,
    pub step: Um,
}

impl RangeSpec {
    fn values(&self) -> Vec<f64> {
        uniform_grid(self.start.si(), self.stop.si(), self.step.si())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeSpec {
    /// FD mesh step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<Um>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<bool>,
    /// Coarse dispersion sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<RangeSpec>,
    /// Half-width of the local refinement; zero disables it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_radius: Option<Um>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_step: Option<Um>,
    /// Phase-matching root nearest this signal wavelength is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_signal: Option<Um>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlap: Option<OverlapMethod>,
    /// Overrides the core material n₂.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<Quantity<NonlinearIndex>>,
    /// Relative PGP quadrature tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_intervals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache: Option<PathBuf>,
}

/// "c" for the telecom C band, or explicit bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IdlerBand {
    Named(String),
    Range([Um; 2]),
}

impl IdlerBand {
    pub fn resolve(&self) -> Result<(f64, f64), CliError> {
        match self {
            IdlerBand::Named(n) if n.eq_ignore_ascii_case("c") => Ok(C_BAND),
            IdlerBand::Named(n) => Err(CliError::Config(format!("unknown idler band '{n}' (use \"c\" or two lengths)"))),
            IdlerBand::Range([lo, hi]) => Ok((lo.si(), hi.si())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_signal: Option<Um>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idler_band: Option<IdlerBand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<RangeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heights: Option<RangeSpec>,
    /// Pump search range of the geometry search and the phase-matching curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pumps: Option<RangeSpec>,
    /// Perturbation of the tolerance study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Um>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Structural checks that serde cannot express.
    pub fn check(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.into()));
        match (&self.geometry, &self.fiber) {
            (Some(_), Some(_)) => return bad("give exactly one of [geometry] and [fiber], not both"),
            (None, None) => return bad("one of [geometry] or [fiber] is required"),
            _ => {}
        }
        match (&self.pump.peak_power, &self.pump.mean_power) {
            (Some(_), Some(_)) => return bad("give exactly one of pump.peak_power and pump.mean_power, not both"),
            (None, None) => return bad("one of pump.peak_power or pump.mean_power is required"),
            _ => {}
        }
        if let Some(f) = &self.filters {
            if f.signal.is_some() != f.idler.is_some() {
                return bad("explicit filters need both [filters.signal] and [filters.idler]");
            }
            if f.bandwidth.is_some() && f.signal.is_some() {
                return bad("give either filters.bandwidth or explicit passbands, not both");
            }
        }
        if let Some(b) = self.design.as_ref().and_then(|d| d.idler_band.as_ref()) {
            b.resolve()?;
        }
        for m in &self.materials {
            m.check()?;
        }
        Ok(())
    }

    /// Built-in materials plus the declared ones, in declaration order.
    pub fn library(&self) -> Result<MaterialLibrary, CliError> {
        let mut lib = MaterialLibrary::builtin();
        for m in &self.materials {
            let model = m.build(&lib)?;
            lib.insert(model).map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(lib)
    }

    pub fn guide(&self) -> Guide {
        match (&self.geometry, &self.fiber) {
            (Some(g), _) => {
                let base = WaveguideGeometry::soi(g.core_width.si(), g.core_height.si());
                Guide::Rect(WaveguideGeometry {
                    core: g.core.clone().unwrap_or(base.core.clone()),
                    cladding: g.cladding.clone().unwrap_or(base.cladding.clone()),
                    box_material: g.box_material.clone().unwrap_or(base.box_material.clone()),
                    box_thickness: g.box_thickness.map_or(base.box_thickness, |q| q.si()),
                    padding: g.padding.map_or(base.padding, |q| q.si()),
                    length: g.length.si() * 1e-6,
                    ..base
                })
            }
            (None, Some(f)) => Guide::Fiber(FiberGeometry {
                core_radius: f.core_radius.si(),
                core: f.core.clone().unwrap_or_else(|| fwmpair_core::materials::SILICA.into()),
                cladding: f.cladding.clone(),
                length: f.length.si() * 1e-6,
            }),
            (None, None) => unreachable!("checked at load"),
        }
    }

    pub fn pulse(&self) -> Result<PumpPulse, CliError> {
        let p = &self.pump;
        let rate = p.repetition_rate.si();
        let duration = p.duration.si();
        let peak = match (p.peak_power, p.mean_power) {
            (Some(pk), _) => pk.si(),
            (None, Some(m)) => p.shape.unwrap_or_default().peak_from_mean(m.si(), rate, duration),
            (None, None) => unreachable!("checked at load"),
        };
        Ok(PumpPulse::new(p.wavelength.si(), p.shape.unwrap_or_default(), duration, peak, rate)?)
    }

    pub fn compute(&self) -> ComputeSpec {
        self.compute.clone().unwrap_or_default()
    }

    pub fn design_spec(&self) -> DesignSpec {
        self.design.clone().unwrap_or_default()
    }

    pub fn settings(&self) -> SolverSettings {
        let c = self.compute();
        let d = SolverSettings::default();
        SolverSettings {
            grid_step: c.grid_step.map_or(d.grid_step, |q| q.si()),
            symmetry: c.symmetry.unwrap_or(d.symmetry),
            ..d
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        self.compute().dispersion.map_or_else(default_grid, |r| r.values())
    }

    /// (radius, step) of the local dispersion refinement; `None` when disabled.
    pub fn refine(&self) -> Option<(f64, f64)> {
        let c = self.compute();
        let r = c.refine_radius.map_or(0.1, |q| q.si());
        let s = c.refine_step.map_or(0.01, |q| q.si());
        (r > 0.0).then_some((r, s))
    }

    pub fn pipeline(&self) -> Result<PipelineConfig, CliError> {
        let c = self.compute();
        let filters = self.filters.clone().unwrap_or(FiltersSpec { bandwidth: None, signal: None, idler: None });
        let explicit = match (&filters.signal, &filters.idler) {
            (Some(s), Some(i)) => Some((band(s)?, band(i)?)),
            _ => None,
        };
        let quadrature = QuadratureOptions {
            rel_tol: c.rel_tol.unwrap_or(QuadratureOptions::default().rel_tol),
            max_intervals: c.max_intervals.unwrap_or(QuadratureOptions::default().max_intervals),
            ..QuadratureOptions::default()
        };
        Ok(PipelineConfig {
            name: self.name.clone().unwrap_or_else(|| "run".into()),
            guide: self.guide(),
            pulse: self.pulse()?,
            target_signal: c.target_signal.map(|q| q.si()),
            filters: explicit,
            filter_bandwidth: filters.bandwidth.map_or(fwmpair_core::presets::SOI_FILTER_BANDWIDTH, |q| q.si()),
            chain: self.chain()?,
            settings: self.settings(),
            grid: self.grid(),
            refine: self.refine(),
            overlap: c.overlap.unwrap_or_default(),
            n2: c.n2.map(|q| q.si()),
            quadrature,
        })
    }

    pub fn chain(&self) -> Result<DetectionChain, CliError> {
        Ok(match self.detection {
            Some(d) => DetectionChain::new(d.mu_s, d.mu_i, d.eta_s, d.eta_i)?,
            None => DetectionChain::ideal(),
        })
    }

    /// Design target from the [design] section; unset parts use the default search.
    pub fn design_target(&self, signal: f64) -> Result<DesignTarget, CliError> {
        let d = self.design_spec();
        let mut t = DesignTarget::new(signal);
        if let Some(b) = &d.idler_band {
            t.idler_band = b.resolve()?;
        }
        if let Some(r) = &d.widths {
            t.widths = r.values();
        }
        if let Some(r) = &d.heights {
            t.heights = r.values();
        }
        if let Some(r) = &d.pumps {
            t.pump_range = (r.start.si(), r.stop.si());
            t.pump_step = r.step.si();
        }
        Ok(t)
    }

    /// Pump samples for the phase-matching curve.
    pub fn pump_range(&self) -> (f64, f64, f64) {
        match &self.design_spec().pumps {
            Some(r) => (r.start.si(), r.stop.si(), r.step.si()),
            None => {
                let p = self.pump.wavelength.si();
                (p - 0.1, p + 0.1, 0.001)
            }
        }
    }
}

fn band(b: &BandSpec) -> Result<FilterSpec, CliError> {
    Ok(FilterSpec::from_nm(b.center.si() * 1e3, b.width.si() * 1e3)?)
}

impl MaterialSpec {
    fn check(&self) -> Result<(), CliError> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(CliError::Config(format!("material '{}': {what}", self.name)))
            }
        };
        match self.model {
            MaterialKind::Sellmeier => {
                need(!self.terms.is_empty(), "sellmeier needs at least one term")?;
                need(self.validity.is_some(), "sellmeier needs a validity interval")
            }
            MaterialKind::Fixed => need(self.index.is_some_and(|n| n > 0.0), "fixed needs a positive index"),
            MaterialKind::Mixture => need(
                self.a.is_some() && self.b.is_some() && self.fill.is_some(),
                "mixture needs a, b and fill",
            ),
        }
    }

    fn build(&self, lib: &MaterialLibrary) -> Result<MaterialModel, CliError> {
        self.check()?;
        let cfg = |e: fwmpair_core::materials::MaterialError| CliError::Config(e.to_string());
        let mut m = match self.model {
            MaterialKind::Sellmeier => {
                let terms: Vec<(f64, f64)> = self.terms.iter().map(|t| (t.b, t.resonance.si())).collect();
                let [lo, hi] = self.validity.expect("checked");
                let mut s = SellmeierModel::from_resonances(&terms, (lo.si(), hi.si()));
                s.constant_offset = self.offset.unwrap_or(0.0);
                MaterialModel::new(&self.name, IndexModel::Sellmeier(s)).map_err(cfg)?
            }
            MaterialKind::Fixed => MaterialModel::new(&self.name, IndexModel::Fixed(self.index.expect("checked"))).map_err(cfg)?,
            MaterialKind::Mixture => {
                let a = lib.get(self.a.as_deref().expect("checked")).map_err(cfg)?;
                let b = lib.get(self.b.as_deref().expect("checked")).map_err(cfg)?;
                MaterialModel::mixture(&self.name, a, b, self.fill.expect("checked"), self.rule.unwrap_or_default())
                    .map_err(cfg)?
            }
        };
        if let Some(n2) = self.n2 {
            m = m.with_n2(Table::constant(n2.si()));
        }
        if let Some(a) = self.absorption {
            m = m.with_absorption(Table::constant(a.si()));
        }
        Ok(m)
    }
}

