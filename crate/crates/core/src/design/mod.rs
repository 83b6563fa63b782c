//! Phase-matching roots, phase-matching curves over a pump range, geometry
//! search toward a target signal wavelength, and fabrication-tolerance sweeps
//! with pump re-tuning.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{CurveBuilder, DispersionCurve, DispersionError};
use crate::modes::{Guide, WaveguideGeometry};
use crate::sfwm::phase_mismatch;
use crate::units::{omega_from_um, um_from_omega};

/// Spacing of the signal-frequency scan, Hz.
pub const SCAN_STEP_HZ: f64 = 0.2e12;
/// Half-width of the excluded neighbourhood of the degenerate root, Hz.
pub const DEGENERATE_EXCLUSION_HZ: f64 = 0.1e12;
/// Root acceptance on |Δβ|, rad/m.
pub const ROOT_TOLERANCE: f64 = 0.1;
/// Telecom C-band, μm.
pub const C_BAND: (f64, f64) = (1.530, 1.565);

#[derive(Debug, Error)]
pub enum DesignError {
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error("no nondegenerate phase matching for pump {pump} um")]
    NoRoot { pump: f64 },
    #[error("no pump within ±{window_nm} nm of {guess} um yields signal {target} um")]
    NoRetune { target: f64, guess: f64, window_nm: f64 },
    #[error("no candidate geometry satisfies the idler-band constraint")]
    EmptyResult,
    #[error("invalid design target: {0}")]
    InvalidTarget(String),
}

/// Energy-conserving, phase-matched triple (wavelengths in μm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchPoint {
    pub pump: f64,
    pub signal: f64,
    pub idler: f64,
    /// Δβ at the root, rad/m.
    pub residual: f64,
}

impl PhaseMatchPoint {
    /// Signal–idler separation, nm.
    pub fn separation_nm(&self) -> f64 {
        (self.signal - self.idler) * 1e3
    }

    pub fn idler_in(&self, band: (f64, f64)) -> bool {
        self.idler >= band.0 && self.idler <= band.1
    }
}

/// Idler wavelength fixed by energy conservation, μm.
pub fn idler_from(pump: f64, signal: f64) -> f64 {
    um_from_omega(2.0 * omega_from_um(pump) - omega_from_um(signal))
}

fn pump_omega(curve: &DispersionCurve, pump: f64) -> Result<f64, DesignError> {
    let wp = omega_from_um(pump);
    curve.beta(wp)?;
    Ok(wp)
}

/// All nondegenerate phase-matching roots with λ_s > λ_p at a pump wavelength.
pub fn phase_match_solve(curve: &DispersionCurve, pump: f64) -> Result<Vec<PhaseMatchPoint>, DesignError> {
    let wp = pump_omega(curve, pump)?;
    let (w_min, w_max) = curve.omega_span();
    let lowest = w_min.max(2.0 * wp - w_max);
    let two_pi = 2.0 * std::f64::consts::PI;
    let f = |ws: f64| phase_mismatch(curve, wp, ws, 2.0 * wp - ws);
    // β-relative round-off floor, so a dispersionless curve yields no roots.
    let floor = 64.0 * f64::EPSILON * 2.0 * curve.beta(wp)?.abs();
    let mut roots = Vec::new();
    let mut ws = wp - two_pi * DEGENERATE_EXCLUSION_HZ;
    let mut prev = if ws > lowest { Some((ws, f(ws)?)) } else { None };
    while let Some((w0, f0)) = prev {
        let w1 = (w0 - two_pi * SCAN_STEP_HZ).max(lowest);
        if w1 >= w0 {
            break;
        }
        let f1 = f(w1)?;
        if f0.abs() > floor && f1.abs() > floor && f0.signum() != f1.signum() {
            let (root, res) = bisect(&f, w1, w0, f1)?;
            if res.abs() <= ROOT_TOLERANCE {
                roots.push(PhaseMatchPoint {
                    pump,
                    signal: um_from_omega(root),
                    idler: um_from_omega(2.0 * wp - root),
                    residual: res,
                });
            }
        }
        ws = w1;
        prev = if ws > lowest { Some((w1, f1)) } else { None };
    }
    if roots.is_empty() {
        Err(DesignError::NoRoot { pump })
    } else {
        Ok(roots)
    }
}

/// Bisection on a sign change in [lo, hi]; returns the best end and its value.
fn bisect(
    f: &impl Fn(f64) -> Result<f64, DispersionError>,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
) -> Result<(f64, f64), DesignError> {
    let mut f_hi = f(hi)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    Ok(if f_lo.abs() <= f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) })
}

/// Roots at one pump sample; empty when there is no phase matching.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PumpSample {
    pub pump: f64,
    pub points: Vec<PhaseMatchPoint>,
}

/// Phase-matching diagram over a pump range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseMatchCurve {
    pub samples: Vec<PumpSample>,
}

/// Evenly spaced pump wavelengths in [lo, hi] (μm), endpoints included.
pub fn pump_samples(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if hi <= lo || step <= 0.0 {
        return vec![lo];
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| ((lo + k as f64 * step) * 1e9).round() / 1e9).collect()
}

/// Solve at every pump sample; NoRoot samples are kept with no points.
pub fn phase_match_curve(curve: &DispersionCurve, lo: f64, hi: f64, step: f64) -> Result<PhaseMatchCurve, DesignError> {
    let samples = pump_samples(lo, hi, step)
        .into_iter()
        .map(|pump| match phase_match_solve(curve, pump) {
            Ok(points) => Ok(PumpSample { pump, points }),
            Err(DesignError::NoRoot { .. }) => Ok(PumpSample { pump, points: Vec::new() }),
            Err(e) => Err(e),
        })
        .collect::<Result<_, _>>()?;
    Ok(PhaseMatchCurve { samples })
}

impl PhaseMatchCurve {
    /// Keep only points whose idler lies in `band`.
    pub fn filter_idler_band(&self, band: (f64, f64)) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| PumpSample { pump: s.pump, points: s.points.iter().copied().filter(|p| p.idler_in(band)).collect() })
            .collect();
        Self { samples }
    }

    pub fn points(&self) -> impl Iterator<Item = &PhaseMatchPoint> {
        self.samples.iter().flat_map(|s| s.points.iter())
    }

    /// CSV with one row per root; pumps without roots get empty fields.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("pump_um,signal_um,idler_um,residual_rad_per_m\n");
        for smp in &self.samples {
            if smp.points.is_empty() {
                s.push_str(&format!("{:.6},,,\n", smp.pump));
            }
            for p in &smp.points {
                s.push_str(&format!("{:.6},{:.6},{:.6},{:.3e}\n", p.pump, p.signal, p.idler, p.residual));
            }
        }
        s
    }
}

/// Root at `pump` whose signal is closest to `target`.
pub fn nearest_root(curve: &DispersionCurve, pump: f64, target: f64) -> Result<PhaseMatchPoint, DesignError> {
    let roots = phase_match_solve(curve, pump)?;
    Ok(roots
        .into_iter()
        .min_by(|a, b| (a.signal - target).abs().total_cmp(&(b.signal - target).abs()))
        .expect("non-empty"))
}

/// Pump search half-window of [`pump_retune`], μm.
pub const RETUNE_WINDOW: f64 = 0.025;
/// Pump scan step of [`pump_retune`], μm.
pub const RETUNE_STEP: f64 = 0.001;
/// Required signal accuracy of [`pump_retune`], μm.
pub const RETUNE_TOLERANCE: f64 = 0.0005;

/// Pump wavelength within ±25 nm of `guess` that phase-matches `target`;
/// the bracket closest to the guess wins.
pub fn pump_retune(curve: &DispersionCurve, target: f64, guess: f64) -> Result<PhaseMatchPoint, DesignError> {
    pump_omega(curve, guess)?;
    let miss = || DesignError::NoRetune { target, guess, window_nm: RETUNE_WINDOW * 1e3 };
    let g = |p: f64| -> Option<(f64, PhaseMatchPoint)> {
        nearest_root(curve, p, target).ok().map(|r| (r.signal - target, r))
    };
    if let Some((v, r)) = g(guess) {
        if v.abs() < 1e-6 {
            return Ok(r);
        }
    }
    let n = (RETUNE_WINDOW / RETUNE_STEP).round() as i64;
    let (w_lo, w_hi) = curve.omega_span();
    let pumps: Vec<f64> = (-n..=n)
        .map(|k| guess + k as f64 * RETUNE_STEP)
        .filter(|&p| (w_lo..=w_hi).contains(&omega_from_um(p)))
        .collect();
    let vals: Vec<Option<(f64, PhaseMatchPoint)>> = pumps.iter().map(|&p| g(p)).collect();
    let mut best: Option<(f64, usize)> = None;
    for k in 0..pumps.len().saturating_sub(1) {
        if let (Some((a, _)), Some((b, _))) = (vals[k], vals[k + 1]) {
            if a == 0.0 || a.signum() != b.signum() {
                let d = (0.5 * (pumps[k] + pumps[k + 1]) - guess).abs();
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, k));
                }
            }
        }
    }
    let (_, k) = best.ok_or_else(miss)?;
    let (mut lo, mut hi) = (pumps[k], pumps[k + 1]);
    let (mut glo, mut rlo) = vals[k].expect("bracketed");
    let (mut ghi, mut rhi) = vals[k + 1].expect("bracketed");
    for _ in 0..60 {
        if glo.abs().min(ghi.abs()) < 1e-6 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let Some((gm, rm)) = g(mid) else { break };
        if gm.signum() == glo.signum() {
            (lo, glo, rlo) = (mid, gm, rm);
        } else {
            (hi, ghi, rhi) = (mid, gm, rm);
        }
    }
    let (gv, r) = if glo.abs() <= ghi.abs() { (glo, rlo) } else { (ghi, rhi) };
    if gv.abs() < RETUNE_TOLERANCE {
        Ok(r)
    } else {
        Err(miss())
    }
}

/// Target signal, idler constraint and geometry/pump search grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignTarget {
    /// Target signal wavelength, μm.
    pub signal: f64,
    /// Allowed idler band, μm.
    pub idler_band: (f64, f64),
    /// Pump search range, μm.
    pub pump_range: (f64, f64),
    /// Pump sampling step, μm.
    pub pump_step: f64,
    /// Candidate core widths a, μm.
    pub widths: Vec<f64>,
    /// Candidate core heights b, μm.
    pub heights: Vec<f64>,
}

impl DesignTarget {
    /// Default search: a ∈ [1.80, 2.60], b ∈ [0.60, 0.80] in 10 nm steps,
    /// pump 2.00–2.30 μm, C-band idler.
    pub fn new(signal: f64) -> Self {
        Self {
            signal,
            idler_band: C_BAND,
            pump_range: (2.0, 2.3),
            pump_step: 0.001,
            widths: pump_samples(1.80, 2.60, 0.01),
            heights: pump_samples(0.60, 0.80, 0.01),
        }
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        let bad = |m: &str| Err(DesignError::InvalidTarget(m.into()));
        let (p0, p1) = self.pump_range;
        let (i0, i1) = self.idler_band;
        if !(p0 > 0.0 && p1 >= p0 && i0 > 0.0 && i1 > i0 && self.pump_step > 0.0 && self.signal > 0.0) {
            return bad("ranges must be positive and ordered");
        }
        if (p0..=p1).contains(&self.signal) || (i0..=i1).contains(&self.signal) {
            return bad("target signal lies inside the pump range or idler band");
        }
        if p0 <= i1 && i0 <= p1 {
            return bad("pump range overlaps the idler band");
        }
        if self.widths.is_empty() || self.heights.is_empty() || self.widths.iter().chain(&self.heights).any(|v| *v <= 0.0) {
            return bad("geometry grid must be non-empty and positive");
        }
        Ok(())
    }
}

/// One ranked geometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub core_width: f64,
    pub core_height: f64,
    pub point: PhaseMatchPoint,
    /// |λ_s − target|, nm.
    pub score_nm: f64,
}

/// Best in-band point over the sampled pumps, then re-tuned onto the target
/// when a bracket exists and the idler stays in band.
fn best_point(curve: &DispersionCurve, target: &DesignTarget) -> Option<PhaseMatchPoint> {
    let mut best: Option<PhaseMatchPoint> = None;
    for pump in pump_samples(target.pump_range.0, target.pump_range.1, target.pump_step) {
        let Ok(roots) = phase_match_solve(curve, pump) else { continue };
        for r in roots.into_iter().filter(|r| r.idler_in(target.idler_band)) {
            if best.is_none_or(|b| (r.signal - target.signal).abs() < (b.signal - target.signal).abs()) {
                best = Some(r);
            }
        }
    }
    let b = best?;
    match pump_retune(curve, target.signal, b.pump) {
        Ok(r) if r.idler_in(target.idler_band) && (target.pump_range.0..=target.pump_range.1).contains(&r.pump) => Some(r),
        _ => Some(b),
    }
}

/// Evaluate one geometry: coarse curve, best point, refined curve, best point.
fn evaluate(builder: &CurveBuilder, base: &WaveguideGeometry, a: f64, b: f64, target: &DesignTarget) -> Option<Candidate> {
    let geom = WaveguideGeometry { core_width: a, core_height: b, ..base.clone() };
    let guide = Guide::Rect(geom);
    let coarse = match builder.build(&guide) {
        Ok(c) => c,
        Err(e) => {
            log::warn!("skipping a = {a}, b = {b}: {e}");
            return None;
        }
    };
    let p0 = best_point(&coarse, target)?;
    let fine = builder.refine(&guide, &coarse, &[p0.pump, p0.signal, p0.idler]).ok()?;
    let p = best_point(&fine, target)?;
    Some(Candidate { core_width: a, core_height: b, point: p, score_nm: (p.signal - target.signal).abs() * 1e3 })
}

/// Rank every (a, b) of the search grid by |λ_s − target| with the idler
/// confined to the band. Scores are compared at 0.01 nm resolution and ties
/// broken by (a, b).
pub fn grid_search(target: &DesignTarget, base: &WaveguideGeometry, builder: &CurveBuilder) -> Result<Vec<Candidate>, DesignError> {
    target.validate()?;
    let grid: Vec<(f64, f64)> = target.widths.iter().flat_map(|&a| target.heights.iter().map(move |&b| (a, b))).collect();
    let mut out: Vec<Candidate> = grid.par_iter().filter_map(|&(a, b)| evaluate(builder, base, a, b, target)).collect();
    if out.is_empty() {
        return Err(DesignError::EmptyResult);
    }
    let key = |c: &Candidate| (c.score_nm * 100.0).round() as i64;
    out.sort_by(|x, y| {
        key(x)
            .cmp(&key(y))
            .then(x.core_width.total_cmp(&y.core_width))
            .then(x.core_height.total_cmp(&y.core_height))
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceKind {
    /// Original pump, drifted signal.
    Drift,
    /// Pump re-tuned to restore the target signal.
    Retuned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceRow {
    /// e.g. "a+10nm".
    pub perturbation: String,
    pub kind: ToleranceKind,
    pub core_width: f64,
    pub core_height: f64,
    pub pump: f64,
    pub signal: Option<f64>,
    pub idler: Option<f64>,
    /// Signal shift from the target, nm.
    pub signal_shift_nm: Option<f64>,
    /// Pump shift from the nominal pump, nm.
    pub pump_shift_nm: f64,
    pub idler_in_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceReport {
    pub nominal: PhaseMatchPoint,
    pub target_signal: f64,
    pub delta: f64,
    pub rows: Vec<ToleranceRow>,
}

impl ToleranceReport {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>, p: usize| v.map(|x| format!("{x:.p$}")).unwrap_or_default();
        let mut s = String::from(
            "perturbation,kind,core_width_um,core_height_um,pump_um,signal_um,idler_um,signal_shift_nm,pump_shift_nm,idler_in_band\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:.4},{:.4},{:.6},{},{},{},{:.3},{}\n",
                r.perturbation,
                match r.kind {
                    ToleranceKind::Drift => "drift",
                    ToleranceKind::Retuned => "retuned",
                },
                r.core_width,
                r.core_height,
                r.pump,
                opt(r.signal, 6),
                opt(r.idler, 6),
                opt(r.signal_shift_nm, 3),
                r.pump_shift_nm,
                r.idler_in_band
            ));
        }
        s
    }
}

/// Perturb a and b by ±delta (μm), report the signal drift at the nominal pump
/// and the re-tuned pump restoring the nominal signal. `select` picks the
/// nominal root nearest that signal wavelength; the first root otherwise.
pub fn tolerance_sweep(
    geom: &WaveguideGeometry,
    pump: f64,
    delta: f64,
    select: Option<f64>,
    idler_band: (f64, f64),
    builder: &CurveBuilder,
) -> Result<ToleranceReport, DesignError> {
    let nominal_guide = Guide::Rect(geom.clone());
    let coarse = builder.build(&nominal_guide)?;
    let first = match select {
        Some(t) => nearest_root(&coarse, pump, t)?,
        None => phase_match_solve(&coarse, pump)?[0],
    };
    let curve = builder.refine(&nominal_guide, &coarse, &[pump, first.signal, first.idler])?;
    let nominal = nearest_root(&curve, pump, first.signal)?;
    let target_signal = nominal.signal;
    let dnm = (delta * 1e3).round();
    let cases = [
        (format!("a+{dnm}nm"), delta, 0.0),
        (format!("a-{dnm}nm"), -delta, 0.0),
        (format!("b+{dnm}nm"), 0.0, delta),
        (format!("b-{dnm}nm"), 0.0, -delta),
    ];
    let mut rows = Vec::with_capacity(8);
    for (label, da, db) in cases {
        let g = WaveguideGeometry { core_width: geom.core_width + da, core_height: geom.core_height + db, ..geom.clone() };
        let guide = Guide::Rect(g.clone());
        let coarse = builder.build(&guide)?;
        let drift = nearest_root(&coarse, pump, target_signal).ok();
        let mut centres = vec![pump, nominal.signal, nominal.idler];
        if let Some(d) = drift {
            centres.extend([d.signal, d.idler]);
        }
        let curve = builder.refine(&guide, &coarse, &centres)?;
        let drift = nearest_root(&curve, pump, target_signal).ok();
        rows.push(ToleranceRow {
            perturbation: label.clone(),
            kind: ToleranceKind::Drift,
            core_width: g.core_width,
            core_height: g.core_height,
            pump,
            signal: drift.map(|d| d.signal),
            idler: drift.map(|d| d.idler),
            signal_shift_nm: drift.map(|d| (d.signal - target_signal) * 1e3),
            pump_shift_nm: 0.0,
            idler_in_band: drift.is_some_and(|d| d.idler_in(idler_band)),
        });
        let re = pump_retune(&curve, target_signal, pump)?;
        rows.push(ToleranceRow {
            perturbation: label,
            kind: ToleranceKind::Retuned,
            core_width: g.core_width,
            core_height: g.core_height,
            pump: re.pump,
            signal: Some(re.signal),
            idler: Some(re.idler),
            signal_shift_nm: Some((re.signal - target_signal) * 1e3),
            pump_shift_nm: (re.pump - pump) * 1e3,
            idler_in_band: re.idler_in(idler_band),
        });
    }
    Ok(ToleranceReport { nominal, target_signal, delta, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::uniform_grid;
    use crate::units::C;

    /// β(ω) = b₀ω/c + b₂(ω − ω_c)² + b₄(ω − ω_c)⁴.
    fn quartic_curve(b0: f64, b2: f64, b4: f64, wc: f64) -> DispersionCurve {
        let samples = uniform_grid(1.4, 4.2, 0.01)
            .into_iter()
            .map(|l| {
                let w = omega_from_um(l);
                let d = w - wc;
                let beta = b0 * w / C + b2 * d * d + b4 * d.powi(4);
                (l, beta * C / w)
            })
            .collect();
        DispersionCurve::from_samples("quartic", samples).unwrap()
    }

    #[test]
    fn flat_curve_has_no_root() {
        let s: Vec<(f64, f64)> = uniform_grid(1.4, 4.2, 0.05).into_iter().map(|l| (l, 2.7)).collect();
        let c = DispersionCurve::from_samples("flat", s).unwrap();
        assert!(matches!(phase_match_solve(&c, 2.1), Err(DesignError::NoRoot { .. })));
    }

    #[test]
    fn quartic_root_matches_closed_form() {
        let lp = 2.2;
        let wp = omega_from_um(lp);
        // Expand around the pump: β = b0 ω/c + b2 (ω−ω_p)² + b4 (ω−ω_p)⁴ gives
        // Δβ(δ) = −2b2δ² − 2b4δ⁴, root δ² = −b2/b4.
        let (b2, b4) = (1e-25, -1e-53);
        let c = quartic_curve(3.0, b2, b4, wp);
        let delta = (-b2 / b4).sqrt();
        let roots = phase_match_solve(&c, lp).unwrap();
        assert_eq!(roots.len(), 1);
        let r = roots[0];
        assert!(r.residual.abs() <= ROOT_TOLERANCE);
        let expect = um_from_omega(wp - delta);
        assert!((r.signal - expect).abs() < 1e-4, "{} vs {}", r.signal, expect);
        assert!((1.0 / r.idler - (2.0 / r.pump - 1.0 / r.signal)).abs() < 1e-14);
    }

    #[test]
    fn curve_and_retune_fixed_point() {
        let lp = 2.2;
        let wp = omega_from_um(lp);
        let c = quartic_curve(3.0, 1e-25, -1e-53, wp);
        let single = phase_match_curve(&c, lp, lp, 0.01).unwrap();
        assert_eq!(single.samples.len(), 1);
        assert_eq!(single.samples[0].points, phase_match_solve(&c, lp).unwrap());
        let r0 = single.samples[0].points[0];
        let re = pump_retune(&c, r0.signal, lp).unwrap();
        assert!((re.pump - lp).abs() < 1e-6);
        assert!(matches!(pump_retune(&c, 10.0, lp), Err(DesignError::NoRetune { .. })));
    }

    #[test]
    fn target_validation() {
        let mut t = DesignTarget::new(3.905);
        assert!(t.validate().is_ok());
        t.signal = 2.1;
        assert!(t.validate().is_err());
        assert!((idler_from(2.210, 3.905) - 1.5411).abs() < 1e-4);
    }
}
