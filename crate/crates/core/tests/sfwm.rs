use std::sync::OnceLock;

use fwmpair_core::design::{idler_from, phase_match_solve, pump_retune};
use fwmpair_core::dispersion::{build_curve, uniform_grid, CubicSpline};
use fwmpair_core::materials::PCF_CLADDING_90;
use fwmpair_core::modes::cache::DispersionCache;
use fwmpair_core::presets::ALIBART;
use fwmpair_core::scenario::{validate_alibart, AlibartOptions};
use fwmpair_core::sfwm::{
    detected_rate, jsd, jsd_factor_f, jsd_factor_g, pgp, pgp_adaptive, pgr, JsdAxis, QuadratureOptions,
};
use fwmpair_core::units::omega_from_um;
use fwmpair_core::{
    DetectionChain, DispersionCurve, FilterSpec, Guide, MaterialLibrary, PulseShape, PumpPulse, SolverSettings,
};
use proptest::prelude::*;

fn curve() -> &'static DispersionCurve {
    static CURVE: OnceLock<DispersionCurve> = OnceLock::new();
    CURVE.get_or_init(|| {
        let lib = MaterialLibrary::builtin();
        let guide = Guide::Fiber(ALIBART.fiber(PCF_CLADDING_90));
        build_curve(&guide, &uniform_grid(0.45, 1.10, 0.005), &lib, &SolverSettings::default(), None).unwrap()
    })
}

fn pulse(peak: f64) -> PumpPulse {
    PumpPulse::new(ALIBART.pump, PulseShape::Sech, ALIBART.duration, peak, ALIBART.repetition_rate).unwrap()
}

const GAMMA: f64 = 0.1;

#[test]
fn spline_interpolates_samples_exactly() {
    let c = curve();
    for &(l, n) in c.samples() {
        assert!((c.n_eff(l).unwrap() - n).abs() < 1e-13);
    }
    assert!(c.loo_residual() < 1e-5, "{}", c.loo_residual());
}

#[test]
fn group_index_matches_finite_difference() {
    let c = curve();
    for l in [0.55, 0.7084, 0.9] {
        let w = omega_from_um(l);
        let h = w * 1e-5;
        let fd = (c.beta(w + h).unwrap() - c.beta(w - h).unwrap()) / (2.0 * h);
        assert!((c.beta_prime(w).unwrap() / fd - 1.0).abs() < 1e-7);
        assert!(c.group_index(w).unwrap() > c.n_eff(l).unwrap());
    }
}

#[test]
fn out_of_span_is_an_error() {
    assert!(curve().beta(omega_from_um(2.0)).is_err());
}

#[test]
fn degenerate_samples_are_rejected() {
    let samples: Vec<(f64, f64)> = (0..10).map(|k| (1.0 + 0.1 * k as f64, 1.5)).collect();
    assert!(DispersionCurve::from_samples("x", samples[..5].to_vec()).is_err());
    let mut dup = samples.clone();
    dup[3].0 = dup[2].0;
    assert!(DispersionCurve::from_samples("x", dup).is_err());
    // β falling with ω.
    let bad: Vec<(f64, f64)> = (0..10).map(|k| (1.0 + 0.1 * k as f64, 0.5 + 0.5 * k as f64)).collect();
    assert!(DispersionCurve::from_samples("x", bad).is_err());
}

#[test]
fn phase_matching_roots_conserve_energy_and_momentum() {
    let c = curve();
    let roots = phase_match_solve(c, ALIBART.pump).unwrap();
    assert!(!roots.is_empty());
    for r in &roots {
        assert!(r.signal > r.pump && r.idler < r.pump);
        let lhs = 2.0 / r.pump;
        assert!((lhs - 1.0 / r.signal - 1.0 / r.idler).abs() < 1e-12);
        assert!(r.residual.abs() <= 0.1);
    }
}

#[test]
fn retune_recovers_a_known_root() {
    let c = curve();
    let target = phase_match_solve(c, 0.710).unwrap()[0].signal;
    let r = pump_retune(c, target, 0.700).unwrap();
    assert!((r.signal - target).abs() < 5e-4);
    assert!((r.pump - 0.710).abs() < 1e-3, "{}", r.pump);
}

fn symmetric_axis() -> JsdAxis {
    let wp = omega_from_um(ALIBART.pump);
    JsdAxis::span(wp - 1e14, wp + 1e14, 60)
}

#[test]
fn jsd_is_symmetric_under_exchange() {
    let ax = symmetric_axis();
    let g = jsd(curve(), GAMMA, ALIBART.length, &pulse(1.0), ax, ax).unwrap();
    let t = g.transpose();
    let peak = g.peak().2;
    assert!(peak > 0.0);
    for (a, b) in g.values.iter().zip(&t.values) {
        assert!((a - b).abs() <= 1e-12 * peak);
    }
}

#[test]
fn transpose_swaps_axes() {
    let c = curve();
    let (s, i) = (ALIBART.signal_filter(), ALIBART.idler_filter());
    let g = jsd(c, GAMMA, ALIBART.length, &pulse(1.0), JsdAxis::around_filter(&s, 4), JsdAxis::around_filter(&i, 5)).unwrap();
    let t = g.transpose();
    assert_eq!(t.signal, g.idler);
    assert_eq!(t.transpose(), g);
    let p = pgp(&g, &s, &i).unwrap();
    let q = pgp(&t, &i, &s).unwrap();
    assert!((p.pgp / q.pgp - 1.0).abs() < 1e-12);
}

fn quad(min: usize) -> QuadratureOptions {
    QuadratureOptions { min_intervals: min, intervals_per_bt: 0.0, ..QuadratureOptions::default() }
}

#[test]
fn pgp_converges_under_refinement() {
    let (s, i) = (ALIBART.signal_filter(), ALIBART.idler_filter());
    let p = pulse(1.0);
    let opts = QuadratureOptions { rel_tol: 1e-2, ..quad(64) };
    let a = pgp_adaptive(curve(), GAMMA, ALIBART.length, &p, &s, &i, &opts).unwrap();
    let b = pgp_adaptive(curve(), GAMMA, ALIBART.length, &p, &s, &i, &quad(2 * (a.nodes_signal - 1))).unwrap();
    assert!(a.relative_error() <= 1e-2);
    assert!((b.pgp / a.pgp - 1.0).abs() < 0.01, "{} vs {}", a.pgp, b.pgp);
}

#[test]
fn stored_grid_and_adaptive_quadrature_agree() {
    let (s, i) = (ALIBART.signal_filter(), ALIBART.idler_filter());
    let p = pulse(1.0);
    let a = pgp_adaptive(curve(), GAMMA, ALIBART.length, &p, &s, &i, &QuadratureOptions::default()).unwrap();
    let g = jsd(curve(), GAMMA, ALIBART.length, &p, JsdAxis::around_filter(&s, 300), JsdAxis::around_filter(&i, 300)).unwrap();
    let b = pgp(&g, &s, &i).unwrap();
    assert!((b.pgp / a.pgp - 1.0).abs() < 0.01, "{} vs {}", a.pgp, b.pgp);
}

#[test]
fn pgp_scales_with_power_squared() {
    let (s, i) = (ALIBART.signal_filter(), ALIBART.idler_filter());
    let q = quad(128);
    let a = pgp_adaptive(curve(), GAMMA, ALIBART.length, &pulse(1.0), &s, &i, &q).unwrap();
    let b = pgp_adaptive(curve(), GAMMA, ALIBART.length, &pulse(2.0), &s, &i, &q).unwrap();
    assert!((b.pgp / a.pgp - 4.0).abs() < 1e-10);
    let z = pgp_adaptive(curve(), GAMMA, ALIBART.length, &pulse(0.0), &s, &i, &q).unwrap();
    assert_eq!(z.pgp, 0.0);
}

#[test]
fn pgp_scales_with_length_squared_when_short() {
    let (s, i) = (ALIBART.signal_filter(), ALIBART.idler_filter());
    let q = quad(64);
    let a = pgp_adaptive(curve(), GAMMA, 1e-6, &pulse(1.0), &s, &i, &q).unwrap();
    let b = pgp_adaptive(curve(), GAMMA, 2e-6, &pulse(1.0), &s, &i, &q).unwrap();
    assert!((b.pgp / a.pgp - 4.0).abs() < 1e-3, "{}", b.pgp / a.pgp);
}

#[test]
fn filter_outside_grid_is_reported() {
    let s = ALIBART.signal_filter();
    let ax = JsdAxis::over_filter(&s, 10);
    let g = jsd(curve(), GAMMA, 0.2, &pulse(1.0), ax, ax).unwrap();
    assert!(pgp(&g, &s, &ALIBART.idler_filter()).is_err());
}

#[test]
fn rerun_is_byte_identical() {
    let lib = MaterialLibrary::builtin();
    let dir = tempfile::tempdir().unwrap();
    let cache = DispersionCache::new(dir.path());
    let guide = Guide::Fiber(ALIBART.fiber(PCF_CLADDING_90));
    let grid = uniform_grid(0.45, 1.10, 0.01);
    let a = build_curve(&guide, &grid, &lib, &SolverSettings::default(), Some(&cache)).unwrap();
    let b = build_curve(&guide, &grid, &lib, &SolverSettings::default(), Some(&cache)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(cache.list().unwrap().len(), 1);

    let opts = AlibartOptions::default();
    let r1 = serde_json::to_string(&validate_alibart(&ALIBART, &lib, &opts).unwrap()).unwrap();
    let r2 = serde_json::to_string(&validate_alibart(&ALIBART, &lib, &opts).unwrap()).unwrap();
    assert_eq!(r1, r2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn g_and_f_are_bounded(ds in -3e14f64..3e14, di in -3e14f64..3e14, l in 1e-4f64..1.0) {
        let wp = omega_from_um(ALIBART.pump);
        let (ws, wi) = (wp + ds, wp + di);
        let g = jsd_factor_g(&pulse(1.0), ws, wi, wp);
        prop_assert!((0.0..=1.0).contains(&g));
        let f = jsd_factor_f(curve(), l, wp, ws, wi).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        // Exchange symmetry of both factors.
        prop_assert_eq!(g, jsd_factor_g(&pulse(1.0), wi, ws, wp));
        let f2 = jsd_factor_f(curve(), l, wp, wi, ws).unwrap();
        prop_assert!((f - f2).abs() <= 1e-12);
    }

    #[test]
    fn g_peaks_on_energy_conservation(ds in -3e14f64..3e14, x in 1e9f64..1e13) {
        let wp = omega_from_um(ALIBART.pump);
        let p = pulse(1.0);
        prop_assert_eq!(jsd_factor_g(&p, wp + ds, wp - ds, wp), 1.0);
        prop_assert!(jsd_factor_g(&p, wp + ds + x, wp - ds, wp) < 1.0);
    }

    #[test]
    fn idler_conserves_energy(pump in 0.5f64..3.0, ratio in 1.05f64..1.9) {
        let signal = pump * ratio;
        let idler = idler_from(pump, signal);
        prop_assert!((2.0 / pump - 1.0 / signal - 1.0 / idler).abs() < 1e-12 / pump);
        prop_assert!(idler < pump);
    }

    #[test]
    fn detected_rate_is_monotone(pgp_v in 0.0f64..1.0, r in 1e6f64..1e9, e in 0.0f64..1.0, de in 0.0f64..0.5) {
        let lo = DetectionChain::new(e * 0.5, 0.5, 0.5, 0.5).unwrap();
        let hi = DetectionChain::new((e + de).min(1.0) * 0.5, 0.5, 0.5, 0.5).unwrap();
        let g = pgr(pgp_v, r);
        prop_assert!(detected_rate(g, &hi) >= detected_rate(g, &lo));
        prop_assert!(detected_rate(g, &DetectionChain::ideal()) >= detected_rate(g, &hi));
        prop_assert!(pgr(pgp_v * 2.0, r) >= g);
    }

    #[test]
    fn not_a_knot_spline_reproduces_cubics(c in prop::array::uniform4(-2.0f64..2.0), n in 4usize..20) {
        let x: Vec<f64> = (0..n).map(|k| k as f64 + 0.3 * ((k * 7) % 5) as f64 / 5.0).collect();
        let p = |t: f64| c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t;
        let y: Vec<f64> = x.iter().map(|&t| p(t)).collect();
        let s = CubicSpline::new(&x, &y).unwrap();
        for k in 0..(10 * (n - 1)) {
            let t = x[0] + (x[n - 1] - x[0]) * k as f64 / (10 * (n - 1)) as f64;
            prop_assert!((s.eval(t) - p(t)).abs() < 1e-9 * (1.0 + p(t).abs()));
            let dp = c[1] + 2.0 * c[2] * t + 3.0 * c[3] * t * t;
            prop_assert!((s.derivative(t) - dp).abs() < 1e-8 * (1.0 + dp.abs()));
        }
    }

    #[test]
    fn filter_round_trip(center in 400.0f64..4000.0, width in 1.0f64..100.0) {
        let f = FilterSpec::from_nm(center, width).unwrap();
        prop_assert!((f.center - omega_from_um(center * 1e-3)).abs() < 1e-9 * f.center);
        prop_assert!(f.lo() < f.center && f.hi() > f.center);
    }
}
