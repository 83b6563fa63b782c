//! Smooth spectral functions from sampled effective indices: β(ω), group
//! index and group velocity, via a cubic spline of β in angular frequency.

mod spline;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::materials::MaterialLibrary;
use crate::modes::cache::{CacheError, DispersionCache};
use crate::modes::{Guide, ModeError, SolverSettings};
use crate::units::{omega_from_um, um_from_omega, C};
pub use spline::CubicSpline;

/// Minimum number of samples for a curve.
pub const MIN_SAMPLES: usize = 7;

#[derive(Debug, Error)]
pub enum DispersionError {
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("β is not strictly increasing in ω near {wavelength} um")]
    NonMonotoneBeta { wavelength: f64 },
    #[error("need at least {MIN_SAMPLES} distinct samples, got {0}")]
    TooFewSamples(usize),
    #[error("ω = {omega:.6e} rad/s outside the sampled span [{min:.6e}, {max:.6e}]")]
    OutOfRange { omega: f64, min: f64, max: f64 },
    #[error("invalid wavelength grid: {0}")]
    InvalidGrid(String),
}

/// Sampled n_eff(λ) with a spline of β(ω) = n_eff·ω/c. Immutable once built.
#[derive(Debug, Clone)]
pub struct DispersionCurve {
    geometry_hash: String,
    /// (λ μm, n_eff) sorted by increasing λ.
    samples: Vec<(f64, f64)>,
    spline: CubicSpline,
    loo_residual: f64,
}

/// Row of a dispersion table export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionRow {
    pub wavelength_um: f64,
    pub n_eff: f64,
    pub group_index: Option<f64>,
}

fn spline_of(samples: &[(f64, f64)]) -> Option<CubicSpline> {
    // Ascending ω ⇔ descending λ.
    let (w, b): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .rev()
        .map(|&(l, n)| {
            let w = omega_from_um(l);
            (w, n * w / C)
        })
        .unzip();
    CubicSpline::new(&w, &b)
}

impl DispersionCurve {
    /// Build from raw samples; duplicate wavelengths are rejected.
    pub fn from_samples(geometry_hash: impl Into<String>, mut samples: Vec<(f64, f64)>) -> Result<Self, DispersionError> {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.windows(2).any(|w| w[0].0 == w[1].0) || samples.iter().any(|s| !(s.0 > 0.0 && s.1.is_finite())) {
            return Err(DispersionError::InvalidGrid("duplicate or non-positive wavelengths".into()));
        }
        if samples.len() < MIN_SAMPLES {
            return Err(DispersionError::TooFewSamples(samples.len()));
        }
        // β must be positive and increase with ω (decrease with λ).
        let beta = |&(l, n): &(f64, f64)| n * omega_from_um(l) / C;
        for (k, s) in samples.iter().enumerate() {
            let ok = beta(s) > 0.0 && samples.get(k + 1).is_none_or(|next| beta(next) < beta(s));
            if !ok {
                return Err(DispersionError::NonMonotoneBeta { wavelength: s.0 });
            }
        }
        let spline = spline_of(&samples).ok_or(DispersionError::TooFewSamples(samples.len()))?;
        let mut curve = Self { geometry_hash: geometry_hash.into(), samples, spline, loo_residual: 0.0 };
        curve.loo_residual = curve.leave_one_out();
        Ok(curve)
    }

    /// Largest |Δn_eff| at interior samples when each is predicted from a
    /// spline through all the others.
    fn leave_one_out(&self) -> f64 {
        let n = self.samples.len();
        (1..n - 1)
            .filter_map(|k| {
                let mut rest = self.samples.clone();
                let (l, ne) = rest.remove(k);
                let s = spline_of(&rest)?;
                let w = omega_from_um(l);
                Some((s.eval(w) * C / w - ne).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn geometry_hash(&self) -> &str {
        &self.geometry_hash
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Maximum leave-one-out interpolation error in n_eff.
    pub fn loo_residual(&self) -> f64 {
        self.loo_residual
    }

    /// Sampled angular-frequency span (ω_min, ω_max).
    pub fn omega_span(&self) -> (f64, f64) {
        self.spline.domain()
    }

    /// Sampled wavelength span (λ_min, λ_max) in μm.
    pub fn wavelength_span(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    fn check(&self, omega: f64) -> Result<(), DispersionError> {
        let (min, max) = self.omega_span();
        if omega >= min && omega <= max {
            Ok(())
        } else {
            Err(DispersionError::OutOfRange { omega, min, max })
        }
    }

    /// Propagation constant β(ω) in rad/m.
    pub fn beta(&self, omega: f64) -> Result<f64, DispersionError> {
        self.check(omega)?;
        Ok(self.spline.eval(omega))
    }

    /// dβ/dω in s/m.
    pub fn beta_prime(&self, omega: f64) -> Result<f64, DispersionError> {
        self.check(omega)?;
        Ok(self.spline.derivative(omega))
    }

    /// Group index c·dβ/dω.
    pub fn group_index(&self, omega: f64) -> Result<f64, DispersionError> {
        self.beta_prime(omega).map(|b1| C * b1)
    }

    /// Group velocity c/n_g in m/s.
    pub fn group_velocity(&self, omega: f64) -> Result<f64, DispersionError> {
        self.group_index(omega).map(|ng| C / ng)
    }

    /// Interpolated effective index at λ (μm).
    pub fn n_eff(&self, lambda: f64) -> Result<f64, DispersionError> {
        let w = omega_from_um(lambda);
        self.beta(w).map(|b| b * C / w)
    }

    /// Whether the curve covers [lo, hi] μm with a relative margin on both ends.
    pub fn covers(&self, lo: f64, hi: f64, margin: f64) -> bool {
        let (a, b) = self.wavelength_span();
        let pad = margin * (hi - lo);
        a <= lo - pad && b >= hi + pad
    }

    /// (λ, n_eff, n_g) rows at the samples; n_g is omitted at the span ends.
    pub fn table(&self) -> Vec<DispersionRow> {
        let n = self.samples.len();
        self.samples
            .iter()
            .enumerate()
            .map(|(k, &(l, ne))| DispersionRow {
                wavelength_um: l,
                n_eff: ne,
                group_index: (k > 0 && k + 1 < n)
                    .then(|| self.group_index(omega_from_um(l)).ok())
                    .flatten(),
            })
            .collect()
    }

    /// CSV export with a unit-bearing header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("wavelength_um,n_eff,group_index\n");
        for r in self.table() {
            let ng = r.group_index.map(|v| format!("{v:.10}")).unwrap_or_default();
            s.push_str(&format!("{:.6},{:.12},{}\n", r.wavelength_um, r.n_eff, ng));
        }
        s
    }
}

/// Evenly spaced wavelengths from `start` to `stop` inclusive (μm).
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| round_um(start + k as f64 * step)).collect()
}

/// Round to 10⁻⁹ μm so that grids built by different routes coincide exactly.
fn round_um(l: f64) -> f64 {
    (l * 1e9).round() / 1e9
}

/// Merge `base` with `step`-spaced points within ±`radius` of each centre,
/// clipped to the base span.
pub fn refine_grid(base: &[f64], centres: &[f64], radius: f64, step: f64) -> Vec<f64> {
    let (lo, hi) = match (base.first(), base.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Vec::new(),
    };
    let mut all: Vec<f64> = base.iter().map(|&l| round_um(l)).collect();
    for &c in centres {
        let k0 = ((c - radius) / step).ceil() as i64;
        let k1 = ((c + radius) / step).floor() as i64;
        all.extend((k0..=k1).map(|k| round_um(k as f64 * step)).filter(|&l| l > lo && l < hi));
    }
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// Solve the mode at every wavelength (in parallel, cache-aware) and fit the curve.
pub fn build_curve(
    guide: &Guide,
    grid: &[f64],
    lib: &MaterialLibrary,
    settings: &SolverSettings,
    cache: Option<&DispersionCache>,
) -> Result<DispersionCurve, DispersionError> {
    build_curve_with(guide, grid, &[], lib, settings, cache)
}

/// As [`build_curve`], reusing `known` samples of the same guide.
fn build_curve_with(
    guide: &Guide,
    grid: &[f64],
    known: &[(f64, f64)],
    lib: &MaterialLibrary,
    settings: &SolverSettings,
    cache: Option<&DispersionCache>,
) -> Result<DispersionCurve, DispersionError> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(DispersionError::InvalidGrid("wavelengths must be strictly increasing".into()));
    }
    let hash = guide.hash(lib, settings)?;
    let mut have = match cache {
        Some(c) => c.load(&hash)?,
        None => Vec::new(),
    };
    have.extend_from_slice(known);
    let lookup = |l: f64| have.iter().find(|(x, _)| *x == l).map(|s| s.1);
    let missing: Vec<f64> = grid.iter().copied().filter(|&l| lookup(l).is_none()).collect();
    let solved: Vec<(f64, f64)> = missing
        .par_iter()
        .map(|&l| guide.n_eff(l, lib, settings).map(|n| (l, n)))
        .collect::<Result<_, _>>()?;
    if let (Some(c), false) = (cache, solved.is_empty()) {
        c.store(&hash, &solved)?;
    }
    let samples = grid
        .iter()
        .map(|&l| (l, lookup(l).or_else(|| solved.iter().find(|s| s.0 == l).map(|s| s.1)).expect("solved")))
        .collect();
    DispersionCurve::from_samples(hash, samples)
}

/// Default coarse sampling: 1.40–4.20 μm every 50 nm.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(1.40, 4.20, 0.05)
}

/// Bundles what is needed to turn a guide into a dispersion curve.
#[derive(Debug, Clone)]
pub struct CurveBuilder<'a> {
    pub lib: &'a MaterialLibrary,
    pub settings: SolverSettings,
    /// Coarse wavelength grid, μm.
    pub grid: Vec<f64>,
    /// Half-width (μm) and step (μm) of the local refinement around wavelengths
    /// of interest; a zero radius disables refinement.
    pub refine_radius: f64,
    pub refine_step: f64,
    pub cache: Option<DispersionCache>,
}

impl<'a> CurveBuilder<'a> {
    pub fn new(lib: &'a MaterialLibrary, settings: SolverSettings) -> Self {
        Self { lib, settings, grid: default_grid(), refine_radius: 0.1, refine_step: 0.01, cache: None }
    }

    pub fn with_cache(mut self, cache: Option<DispersionCache>) -> Self {
        self.cache = cache;
        self
    }

    /// Curve on the coarse grid.
    pub fn build(&self, guide: &Guide) -> Result<DispersionCurve, DispersionError> {
        build_curve(guide, &self.grid, self.lib, &self.settings, self.cache.as_ref())
    }

    /// Add fine samples around `centres` (μm) to a curve of the same guide.
    pub fn refine(&self, guide: &Guide, curve: &DispersionCurve, centres: &[f64]) -> Result<DispersionCurve, DispersionError> {
        if !(self.refine_radius > 0.0) {
            return Ok(curve.clone());
        }
        let base: Vec<f64> = curve.samples().iter().map(|s| s.0).collect();
        let grid = refine_grid(&base, centres, self.refine_radius, self.refine_step);
        build_curve_with(guide, &grid, curve.samples(), self.lib, &self.settings, self.cache.as_ref())
    }
}

/// Convenience: λ (μm) of an angular frequency.
pub fn wavelength_of(omega: f64) -> f64 {
    um_from_omega(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::silica;

    #[test]
    fn constant_index_curve() {
        let n0 = 2.5;
        let s: Vec<(f64, f64)> = uniform_grid(1.4, 4.2, 0.2).into_iter().map(|l| (l, n0)).collect();
        let c = DispersionCurve::from_samples("flat", s).unwrap();
        for l in [1.5, 2.0, 3.3, 4.1] {
            let w = omega_from_um(l);
            assert!((c.beta(w).unwrap() / (n0 * w / C) - 1.0).abs() < 1e-13);
            assert!((c.group_index(w).unwrap() - n0).abs() < 1e-9);
            assert!((c.group_velocity(w).unwrap() * c.group_index(w).unwrap() / C - 1.0).abs() < 1e-15);
        }
        assert!(c.loo_residual() < 1e-12);
    }

    #[test]
    fn bulk_silica_group_index() {
        let m = silica();
        let s: Vec<(f64, f64)> = uniform_grid(1.0, 2.0, 0.01)
            .into_iter()
            .map(|l| (l, m.refractive_index(l).unwrap()))
            .collect();
        let c = DispersionCurve::from_samples("silica", s).unwrap();
        for l in [1.1, 1.333, 1.55, 1.9] {
            let n = m.refractive_index(l).unwrap();
            let expected = n - l * m.index_derivative(l).unwrap();
            let got = c.group_index(omega_from_um(l)).unwrap();
            assert!((got - expected).abs() < 1e-5, "{l}: {got} vs {expected}");
        }
    }

    #[test]
    fn knots_exact_and_out_of_range() {
        let s: Vec<(f64, f64)> = uniform_grid(1.4, 2.0, 0.1).into_iter().map(|l| (l, 3.0 - 0.1 * l)).collect();
        let c = DispersionCurve::from_samples("lin", s.clone()).unwrap();
        for (l, n) in s {
            let w = omega_from_um(l);
            assert_eq!(c.beta(w).unwrap(), n * w / C);
        }
        assert!(matches!(c.beta(omega_from_um(1.0)), Err(DispersionError::OutOfRange { .. })));
    }

    #[test]
    fn rejects_non_monotone_beta() {
        // n_eff rising steeply with λ makes β fall with ω.
        let s: Vec<(f64, f64)> = uniform_grid(1.4, 2.0, 0.1).into_iter().map(|l| (l, l * l)).collect();
        assert!(matches!(
            DispersionCurve::from_samples("bad", s),
            Err(DispersionError::NonMonotoneBeta { .. })
        ));
        let few: Vec<(f64, f64)> = vec![(1.4, 2.0), (1.5, 2.0)];
        assert!(matches!(DispersionCurve::from_samples("few", few), Err(DispersionError::TooFewSamples(2))));
    }

    #[test]
    fn grids() {
        let g = uniform_grid(1.40, 4.20, 0.05);
        assert_eq!(g.len(), 57);
        assert_eq!(g[0], 1.4);
        assert_eq!(*g.last().unwrap(), 4.2);
        let r = refine_grid(&g, &[2.21], 0.1, 0.01);
        assert!(r.contains(&2.21) && r.contains(&2.11) && r.contains(&2.31));
        assert!(r.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(r.len(), 57 + 21 - 4);
    }
}
