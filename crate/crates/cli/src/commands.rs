//! Command implementations. Each returns a JSON report plus named CSV tables.

use serde::Serialize;

use fwmpair_core::design::{grid_search, phase_match_curve, tolerance_sweep, Candidate, PhaseMatchCurve};
use fwmpair_core::dispersion::{CurveBuilder, DispersionCurve};
use fwmpair_core::MaterialLibrary;
use fwmpair_core::materials::MixingRule;
use fwmpair_core::modes::cache::{CacheEntry, DispersionCache};
use fwmpair_core::modes::{effective_area, power_fractions, Guide, PowerFractions};
use fwmpair_core::presets::ALIBART;
use fwmpair_core::scenario::{
    locate, nonlinearity, run_pipeline, validate_alibart, AlibartOptions, DispersionReport, FilterReport, SCHEMA_VERSION,
};
use fwmpair_core::sfwm::{jsd, pgp, JsdAxis, JsdSummary};
use fwmpair_core::PhaseMatchPoint;

use crate::config::RunConfig;
use crate::error::CliError;

/// Result of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    /// File stem of the JSON report.
    pub stem: &'static str,
    pub json: String,
    /// (file name, contents); the first table is the primary CSV.
    pub tables: Vec<(String, String)>,
}

impl Output {
    fn new<T: Serialize>(stem: &'static str, report: &T, tables: Vec<(String, String)>) -> Self {
        let mut json = serde_json::to_string_pretty(report).expect("reports serialize");
        json.push('\n');
        Self { stem, json, tables }
    }
}

fn builder<'a>(cfg: &RunConfig, lib: &'a MaterialLibrary, cache: Option<DispersionCache>) -> Result<CurveBuilder<'a>, CliError> {
    Ok(cfg.pipeline()?.builder(lib, cache))
}

#[derive(Debug, Serialize)]
struct ModeReport {
    schema: u32,
    name: String,
    wavelength_um: f64,
    n_eff: f64,
    te_fraction: f64,
    a_eff_um2: f64,
    power_fractions: Option<PowerFractions>,
    nx: usize,
    ny: usize,
}

/// Mode at one wavelength; optionally the sampled field as CSV.
pub fn solve_mode(cfg: &RunConfig, wavelength: f64, dump_field: bool) -> Result<Output, CliError> {
    let lib = cfg.library()?;
    let guide = cfg.guide();
    let sol = guide.solve(wavelength, &lib, &cfg.settings())?;
    let fractions = match &guide {
        Guide::Rect(g) => Some(power_fractions(&sol, g)?),
        Guide::Fiber(_) => None,
    };
    let f = &sol.field;
    let report = ModeReport {
        schema: SCHEMA_VERSION,
        name: cfg.name.clone().unwrap_or_default(),
        wavelength_um: wavelength,
        n_eff: sol.n_eff,
        te_fraction: sol.te_fraction,
        a_eff_um2: effective_area(f) * 1e12,
        power_fractions: fractions,
        nx: f.nx,
        ny: f.ny,
    };
    let mut tables = Vec::new();
    if dump_field {
        let mut s = String::from("x_um,y_um,ex_abs2,ey_abs2,ez_abs2,e_abs2\n");
        for j in 0..f.ny {
            for i in 0..f.nx {
                let k = j * f.nx + i;
                let (ex, ey, ez) = (f.ex[k].norm_sqr(), f.ey[k].norm_sqr(), f.ez[k].norm_sqr());
                s.push_str(&format!("{:.6},{:.6},{ex:.9e},{ey:.9e},{ez:.9e},{:.9e}\n", f.x(i), f.y(j), ex + ey + ez));
            }
        }
        tables.push(("field.csv".into(), s));
    }
    Ok(Output::new("mode", &report, tables))
}

/// Full dispersion → phase matching → γ → PGP → rates chain.
pub fn pipeline(cfg: &RunConfig, cache: Option<DispersionCache>) -> Result<Output, CliError> {
    let lib = cfg.library()?;
    let report = run_pipeline(&cfg.pipeline()?, &lib, cache)?;
    let curve = DispersionCurve::from_samples(&report.dispersion.geometry_hash, report.dispersion.samples.clone())?;
    Ok(Output::new("pipeline", &report, vec![("dispersion.csv".into(), curve.to_csv())]))
}

/// Rate reproduction of the fiber source.
pub fn alibart(mixing: MixingRule) -> Result<Output, CliError> {
    let lib = MaterialLibrary::builtin();
    let opts = AlibartOptions { mixing, ..AlibartOptions::default() };
    let report = validate_alibart(&ALIBART, &lib, &opts)?;
    let mut s = String::from("mean_power_w,peak_power_w,pgp,computed_rate_per_s,published_rate_per_s,ratio\n");
    for r in &report.rows {
        s.push_str(&format!(
            "{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.4}\n",
            r.mean_power_w, r.peak_power_w, r.pgp, r.computed_rate, r.published_rate, r.ratio
        ));
    }
    Ok(Output::new("alibart", &report, vec![("alibart.csv".into(), s)]))
}

#[derive(Debug, Serialize)]
struct DesignReport {
    schema: u32,
    target_signal_um: f64,
    idler_band_um: (f64, f64),
    evaluated: usize,
    candidates: Vec<Candidate>,
}

/// Rank core geometries for a target signal.
pub fn design(cfg: &RunConfig, signal: f64, band: Option<(f64, f64)>, top: usize, cache: Option<DispersionCache>) -> Result<Output, CliError> {
    let lib = cfg.library()?;
    let mut target = cfg.design_target(signal)?;
    if let Some(b) = band {
        target.idler_band = b;
    }
    let Guide::Rect(base) = cfg.guide() else {
        return Err(CliError::Config("design needs a [geometry] section".into()));
    };
    let all = grid_search(&target, &base, &builder(cfg, &lib, cache)?)?;
    let mut s = String::from("rank,core_width_um,core_height_um,pump_um,signal_um,idler_um,score_nm\n");
    for (k, c) in all.iter().enumerate() {
        s.push_str(&format!(
            "{},{:.3},{:.3},{:.6},{:.6},{:.6},{:.3}\n",
            k + 1,
            c.core_width,
            c.core_height,
            c.point.pump,
            c.point.signal,
            c.point.idler,
            c.score_nm
        ));
    }
    let report = DesignReport {
        schema: SCHEMA_VERSION,
        target_signal_um: signal,
        idler_band_um: target.idler_band,
        evaluated: all.len(),
        candidates: all.into_iter().take(top).collect(),
    };
    Ok(Output::new("design", &report, vec![("design.csv".into(), s)]))
}

#[derive(Debug, Serialize)]
struct ToleranceOut {
    schema: u32,
    #[serde(flatten)]
    report: fwmpair_core::design::ToleranceReport,
}

/// ±delta core perturbations: drift and re-tuned pump.
pub fn tolerance(cfg: &RunConfig, delta: f64, cache: Option<DispersionCache>) -> Result<Output, CliError> {
    let lib = cfg.library()?;
    let Guide::Rect(geom) = cfg.guide() else {
        return Err(CliError::Config("tolerance needs a [geometry] section".into()));
    };
    let band = match cfg.design_spec().idler_band {
        Some(b) => b.resolve()?,
        None => fwmpair_core::design::C_BAND,
    };
    let select = cfg.compute().target_signal.map(|q| q.si());
    let report = tolerance_sweep(&geom, cfg.pump.wavelength.si(), delta, select, band, &builder(cfg, &lib, cache)?)?;
    let csv = report.to_csv();
    Ok(Output::new("tolerance", &ToleranceOut { schema: SCHEMA_VERSION, report }, vec![("tolerance.csv".into(), csv)]))
}

#[derive(Debug, Serialize)]
struct PmCurveReport {
    schema: u32,
    pump_range_um: (f64, f64),
    pump_step_um: f64,
    points: Vec<PhaseMatchPoint>,
    dispersion: DispersionReport,
}

/// Phase-matched signal/idler versus pump wavelength.
pub fn pm_curve(cfg: &RunConfig, range: (f64, f64, f64), cache: Option<DispersionCache>) -> Result<Output, CliError> {
    let lib = cfg.library()?;
    let curve = builder(cfg, &lib, cache)?.build(&cfg.guide())?;
    let pm: PhaseMatchCurve = phase_match_curve(&curve, range.0, range.1, range.2)?;
    let csv = pm.to_csv();
    let report = PmCurveReport {
        schema: SCHEMA_VERSION,
        pump_range_um: (range.0, range.1),
        pump_step_um: range.2,
        points: pm.points().copied().collect(),
        dispersion: (&curve).into(),
    };
    Ok(Output::new("pm_curve", &report, vec![("pm_curve.csv".into(), csv)]))
}

#[derive(Debug, Serialize)]
struct JsdReport {
    schema: u32,
    phase_match: PhaseMatchPoint,
    gamma: f64,
    signal_filter: FilterReport,
    idler_filter: FilterReport,
    /// Export window half-width in filter bandwidths.
    window_bandwidths: f64,
    #[serde(flatten)]
    summary: JsdSummary,
}

/// Joint spectral density on a window of ±1.5 bandwidths around each filter.
pub fn jsd_grid(cfg: &RunConfig, cells: usize, cache: Option<DispersionCache>) -> Result<Output, CliError> {
    let lib = cfg.library()?;
    let pc = cfg.pipeline()?;
    let (curve, pm) = locate(&pc.builder(&lib, cache), &pc.guide, pc.pulse.wavelength, pc.target_signal)?;
    let nl = nonlinearity(&pc, &lib, &pm)?;
    let (sf, idf) = pc.filters_for(&pm)?;
    let m = cells.div_ceil(6).max(1);
    let grid = jsd(&curve, nl.gamma, pc.guide.length(), &pc.pulse, JsdAxis::around_filter(&sf, m), JsdAxis::around_filter(&idf, m))?;
    let inner = pgp(&grid, &sf, &idf).ok();
    let report = JsdReport {
        schema: SCHEMA_VERSION,
        phase_match: pm,
        gamma: nl.gamma,
        signal_filter: (&sf).into(),
        idler_filter: (&idf).into(),
        window_bandwidths: 1.5,
        summary: grid.summary(inner.as_ref()),
    };
    Ok(Output::new("jsd", &report, vec![("jsd.csv".into(), grid.to_csv())]))
}

#[derive(Debug, Serialize)]
struct CacheReport {
    schema: u32,
    dir: String,
    entries: Vec<CacheEntry>,
    removed: Option<usize>,
}

pub fn cache_list(cache: &DispersionCache) -> Result<Output, CliError> {
    let entries = cache.list()?;
    let mut s = String::from("geometry_hash,samples,path\n");
    for e in &entries {
        s.push_str(&format!("{},{},{}\n", e.geometry_hash, e.samples, e.path.display()));
    }
    let report = CacheReport { schema: SCHEMA_VERSION, dir: cache.dir().display().to_string(), entries, removed: None };
    Ok(Output::new("cache", &report, vec![("cache.csv".into(), s)]))
}

pub fn cache_clear(cache: &DispersionCache) -> Result<Output, CliError> {
    let n = cache.clear()?;
    let report = CacheReport { schema: SCHEMA_VERSION, dir: cache.dir().display().to_string(), entries: Vec::new(), removed: Some(n) };
    Ok(Output::new("cache", &report, vec![("cache.csv".into(), format!("removed\n{n}\n"))]))
}
