//! Joint spectral density on uniform frequency grids and its integral over
//! the filter passbands.

use rayon::prelude::*;
use serde::Serialize;

use super::{factor_a, factor_f, factor_g, FilterSpec, PumpPulse, SfwmError};
use crate::dispersion::DispersionCurve;
use crate::units::um_from_omega;

/// Uniform angular-frequency axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JsdAxis {
    /// First node, rad/s.
    pub start: f64,
    /// Node spacing, rad/s.
    pub step: f64,
    pub len: usize,
}

impl JsdAxis {
    /// `intervals` equal cells spanning [lo, hi].
    pub fn span(lo: f64, hi: f64, intervals: usize) -> Self {
        let intervals = intervals.max(1);
        Self { start: lo, step: (hi - lo) / intervals as f64, len: intervals + 1 }
    }

    /// Export window centre ± 1.5·bandwidth with 6m cells, so the passband
    /// edges fall on nodes 2m and 4m.
    pub fn around_filter(filter: &FilterSpec, m: usize) -> Self {
        let m = m.max(1);
        let half = 1.5 * filter.bandwidth;
        Self::span(filter.center - half, filter.center + half, 6 * m)
    }

    /// Exactly the passband, with `intervals` cells (rounded up to even).
    pub fn over_filter(filter: &FilterSpec, intervals: usize) -> Self {
        let n = intervals.max(2).div_ceil(2) * 2;
        Self::span(filter.lo(), filter.hi(), n)
    }

    pub fn at(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.at(k)).collect()
    }
}

/// Provenance attached to a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsdMeta {
    pub pump_wavelength_um: f64,
    pub pulse_duration_s: f64,
    pub peak_power_w: f64,
    pub gamma_per_w_m: f64,
    pub length_m: f64,
    pub curve_hash: String,
}

/// |ζ₂D(ω_s, ω_i)|² in s², row-major with the signal index outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct JsdGrid {
    pub signal: JsdAxis,
    pub idler: JsdAxis,
    pub values: Vec<f64>,
    pub meta: JsdMeta,
}

/// Headline numbers of a grid, for JSON export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsdSummary {
    pub meta: JsdMeta,
    pub nodes_signal: usize,
    pub nodes_idler: usize,
    pub peak_value_s2: f64,
    pub peak_signal_um: f64,
    pub peak_idler_um: f64,
    pub pgp: Option<f64>,
    pub pgp_error: Option<f64>,
}

/// Pair probability per pulse inside the filter rectangle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PgpResult {
    pub pgp: f64,
    /// Richardson estimate |I_h − I_2h|/3.
    pub error: f64,
    pub nodes_signal: usize,
    pub nodes_idler: usize,
    pub peak_signal_um: f64,
    pub peak_idler_um: f64,
    pub peak_value_s2: f64,
}

impl PgpResult {
    pub fn relative_error(&self) -> f64 {
        if self.pgp == 0.0 {
            0.0
        } else {
            self.error / self.pgp
        }
    }
}

/// Adaptive-refinement controls for [`pgp_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureOptions {
    /// Minimum cells per passband.
    pub min_intervals: usize,
    /// Cells per passband per unit of bandwidth·T₀.
    pub intervals_per_bt: f64,
    pub rel_tol: f64,
    /// Refinement stops with an error beyond this many cells per axis.
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { min_intervals: 64, intervals_per_bt: 4.0, rel_tol: 1e-3, max_intervals: 16384 }
    }
}

struct AxisData {
    w: Vec<f64>,
    beta: Vec<f64>,
    ng: Vec<f64>,
}

impl AxisData {
    fn new(curve: &DispersionCurve, axis: &JsdAxis) -> Result<Self, SfwmError> {
        let w = axis.values();
        let beta = w.iter().map(|&x| curve.beta(x)).collect::<Result<_, _>>()?;
        let ng = w.iter().map(|&x| curve.group_index(x)).collect::<Result<_, _>>()?;
        Ok(Self { w, beta, ng })
    }
}

/// A·G·F with per-axis curve lookups precomputed.
struct Kernel {
    wp: f64,
    two_beta_p: f64,
    inv_vgp: f64,
    ngp: f64,
    gle: f64,
    t0: f64,
    length: f64,
    s: AxisData,
    i: AxisData,
}

impl Kernel {
    fn new(
        curve: &DispersionCurve,
        gamma: f64,
        length: f64,
        pulse: &PumpPulse,
        signal: &JsdAxis,
        idler: &JsdAxis,
    ) -> Result<Self, SfwmError> {
        pulse.validate()?;
        if !(gamma >= 0.0 && length > 0.0) {
            return Err(SfwmError::InvalidParameter(format!("gamma {gamma}, length {length}")));
        }
        let wp = pulse.omega();
        Ok(Self {
            wp,
            two_beta_p: 2.0 * curve.beta(wp)?,
            inv_vgp: curve.beta_prime(wp)?,
            ngp: curve.group_index(wp)?,
            gle: gamma * length * pulse.energy(),
            t0: pulse.duration,
            length,
            s: AxisData::new(curve, signal)?,
            i: AxisData::new(curve, idler)?,
        })
    }

    #[inline]
    fn value(&self, a: usize, b: usize) -> f64 {
        let (ws, wi) = (self.s.w[a], self.i.w[b]);
        let x = ws + wi - 2.0 * self.wp;
        let g = factor_g(self.t0, x);
        if g == 0.0 || self.gle == 0.0 {
            return 0.0;
        }
        let arg = (self.two_beta_p - self.s.beta[a] - self.i.beta[b] + x * self.inv_vgp) * self.length / 2.0;
        factor_a(self.ngp, self.s.ng[a], self.i.ng[b], ws, wi, self.wp, self.gle) * g * factor_f(arg)
    }
}

/// Evaluate the joint spectral density on the given axes.
pub fn jsd(
    curve: &DispersionCurve,
    gamma: f64,
    length: f64,
    pulse: &PumpPulse,
    signal: JsdAxis,
    idler: JsdAxis,
) -> Result<JsdGrid, SfwmError> {
    let k = Kernel::new(curve, gamma, length, pulse, &signal, &idler)?;
    let mut values = vec![0.0; signal.len * idler.len];
    values.par_chunks_mut(idler.len).enumerate().for_each(|(a, row)| {
        for (b, v) in row.iter_mut().enumerate() {
            *v = k.value(a, b);
        }
    });
    Ok(JsdGrid {
        signal,
        idler,
        values,
        meta: JsdMeta {
            pump_wavelength_um: pulse.wavelength,
            pulse_duration_s: pulse.duration,
            peak_power_w: pulse.peak_power,
            gamma_per_w_m: gamma,
            length_m: length,
            curve_hash: curve.geometry_hash().to_string(),
        },
    })
}

impl JsdGrid {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.idler.len + b]
    }

    /// Largest value and its (ω_s, ω_i); first occurrence in row-major order.
    pub fn peak(&self) -> (f64, f64, f64) {
        let (mut best, mut at) = (f64::NEG_INFINITY, 0);
        for (k, &v) in self.values.iter().enumerate() {
            if v > best {
                best = v;
                at = k;
            }
        }
        (self.signal.at(at / self.idler.len), self.idler.at(at % self.idler.len), best)
    }

    /// Same grid with the signal and idler roles exchanged.
    pub fn transpose(&self) -> Self {
        let (ns, ni) = (self.signal.len, self.idler.len);
        let mut values = vec![0.0; ns * ni];
        for a in 0..ns {
            for b in 0..ni {
                values[b * ns + a] = self.values[a * ni + b];
            }
        }
        Self { signal: self.idler, idler: self.signal, values, meta: self.meta.clone() }
    }

    /// Tidy CSV, one row per node.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("omega_s_rad_per_s,omega_i_rad_per_s,jsd_s2\n");
        for a in 0..self.signal.len {
            for b in 0..self.idler.len {
                s.push_str(&format!("{:.9e},{:.9e},{:.9e}\n", self.signal.at(a), self.idler.at(b), self.get(a, b)));
            }
        }
        s
    }

    pub fn summary(&self, pgp: Option<&PgpResult>) -> JsdSummary {
        let (ws, wi, v) = self.peak();
        JsdSummary {
            meta: self.meta.clone(),
            nodes_signal: self.signal.len,
            nodes_idler: self.idler.len,
            peak_value_s2: v,
            peak_signal_um: um_from_omega(ws),
            peak_idler_um: um_from_omega(wi),
            pgp: pgp.map(|p| p.pgp),
            pgp_error: pgp.map(|p| p.error),
        }
    }
}

/// Fractional node coordinate of `x`, snapped to an integer when within
/// rounding distance.
fn node_coord(axis: &JsdAxis, x: f64) -> f64 {
    let t = (x - axis.start) / axis.step;
    if (t - t.round()).abs() < 1e-7 {
        t.round()
    } else {
        t
    }
}

/// ∫ of the piecewise-linear interpolant of nodes `v(k)` (unit spacing)
/// between fractional coordinates ta ≤ tb.
fn pwl_integral(ta: f64, tb: f64, v: impl Fn(usize) -> f64) -> f64 {
    let k0 = ta.floor() as usize;
    let k1 = (tb.ceil() as usize).max(k0 + 1);
    let mut sum = 0.0;
    for k in k0..k1 {
        let s0 = (ta - k as f64).max(0.0);
        let s1 = (tb - k as f64).min(1.0);
        if s1 <= s0 {
            continue;
        }
        let (a, b) = (v(k), v(k + 1));
        sum += a * (s1 - s0) + (b - a) * (s1 * s1 - s0 * s0) / 2.0;
    }
    sum
}

struct Span {
    /// Fine node coordinates of the passband edges.
    ta: f64,
    tb: f64,
}

fn filter_span(axis: &JsdAxis, f: &FilterSpec, which: &'static str) -> Result<Span, SfwmError> {
    let (ta, tb) = (node_coord(axis, f.lo()), node_coord(axis, f.hi()));
    if axis.len < 3 || axis.len % 2 == 0 {
        return Err(SfwmError::InvalidParameter(format!("{which} axis needs an odd node count ≥ 3")));
    }
    if ta < 0.0 || tb > (axis.len - 1) as f64 {
        return Err(SfwmError::FilterOutsideGrid {
            which,
            lo: f.lo(),
            hi: f.hi(),
            grid_lo: axis.start,
            grid_hi: axis.end(),
        });
    }
    Ok(Span { ta, tb })
}

/// Row-parallel 2D integral over the filter rectangle on the fine grid and on
/// every other node, with a deterministic (sequential) outer reduction.
fn integrate(
    signal: &JsdAxis,
    idler: &JsdAxis,
    sf: &FilterSpec,
    idf: &FilterSpec,
    value: impl Fn(usize, usize) -> f64 + Sync,
) -> Result<PgpResult, SfwmError> {
    let s = filter_span(signal, sf, "signal")?;
    let i = filter_span(idler, idf, "idler")?;
    let row_lo = 2 * (s.ta / 2.0).floor() as usize;
    let row_hi = (2 * (s.tb / 2.0).ceil() as usize).min(signal.len - 1);
    let (bi_lo, bi_hi) = (i.ta.floor() as usize, (i.tb.ceil() as usize).min(idler.len - 1));
    // (fine inner, coarse inner, row max, argmax) per row
    let rows: Vec<(f64, f64, f64, usize)> = (row_lo..=row_hi)
        .into_par_iter()
        .map(|a| {
            let vals: Vec<f64> = (0..idler.len)
                .map(|b| if (2 * (bi_lo / 2)..=bi_hi + 1).contains(&b) { value(a, b) } else { 0.0 })
                .collect();
            let fine = pwl_integral(i.ta, i.tb, |k| vals[k]) * idler.step;
            let coarse = pwl_integral(i.ta / 2.0, i.tb / 2.0, |k| vals[2 * k]) * 2.0 * idler.step;
            let (mut best, mut at) = (f64::NEG_INFINITY, 0);
            for (b, &v) in vals.iter().enumerate().take(i.tb.floor() as usize + 1).skip(i.ta.ceil() as usize) {
                if v > best {
                    best = v;
                    at = b;
                }
            }
            (fine, coarse, best, at)
        })
        .collect();
    let row = |a: usize| &rows[a - row_lo];
    let fine = pwl_integral(s.ta, s.tb, |k| row(k).0) * signal.step;
    let coarse = pwl_integral(s.ta / 2.0, s.tb / 2.0, |k| row(2 * k).1) * 2.0 * signal.step;
    let (mut best, mut at) = (f64::NEG_INFINITY, (0, 0));
    for a in (s.ta.ceil() as usize)..=(s.tb.floor() as usize) {
        let r = row(a);
        if r.2 > best {
            best = r.2;
            at = (a, r.3);
        }
    }
    Ok(PgpResult {
        pgp: fine,
        error: (fine - coarse).abs() / 3.0,
        nodes_signal: signal.len,
        nodes_idler: idler.len,
        peak_signal_um: um_from_omega(signal.at(at.0)),
        peak_idler_um: um_from_omega(idler.at(at.1)),
        peak_value_s2: best.max(0.0),
    })
}

/// Integrate a stored grid over the filter rectangle.
pub fn pgp(grid: &JsdGrid, signal_filter: &FilterSpec, idler_filter: &FilterSpec) -> Result<PgpResult, SfwmError> {
    integrate(&grid.signal, &grid.idler, signal_filter, idler_filter, |a, b| grid.get(a, b))
}

/// Pair probability with automatic grid refinement: the passbands are meshed
/// directly and the resolution doubled until the Richardson estimate falls
/// below `rel_tol`.
pub fn pgp_adaptive(
    curve: &DispersionCurve,
    gamma: f64,
    length: f64,
    pulse: &PumpPulse,
    signal_filter: &FilterSpec,
    idler_filter: &FilterSpec,
    opts: &QuadratureOptions,
) -> Result<PgpResult, SfwmError> {
    let bt = signal_filter.bandwidth.max(idler_filter.bandwidth) * pulse.duration;
    let mut n = opts.min_intervals.max((opts.intervals_per_bt * bt).ceil() as usize);
    loop {
        let sa = JsdAxis::over_filter(signal_filter, n);
        let ia = JsdAxis::over_filter(idler_filter, n);
        let k = Kernel::new(curve, gamma, length, pulse, &sa, &ia)?;
        let r = integrate(&sa, &ia, signal_filter, idler_filter, |a, b| k.value(a, b))?;
        log::debug!("pgp {:.6e} ± {:.2e} with {} cells per axis", r.pgp, r.error, n);
        if r.error <= opts.rel_tol * r.pgp || r.pgp == 0.0 {
            return Ok(r);
        }
        if 2 * n > opts.max_intervals {
            return Err(SfwmError::QuadratureNotConverged { pgp: r.pgp, error: r.error, nodes: sa.len });
        }
        n *= 2;
    }
}
