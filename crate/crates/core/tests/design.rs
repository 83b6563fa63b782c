use fwmpair_core::design::{
    grid_search, idler_from, phase_match_curve, phase_match_solve, pump_retune, DesignError, DesignTarget, C_BAND,
};
use fwmpair_core::dispersion::{uniform_grid, CurveBuilder};
use fwmpair_core::units::{omega_from_um, um_from_omega, C};
use fwmpair_core::{DispersionCurve, MaterialLibrary, SolverSettings, WaveguideGeometry};
use proptest::prelude::*;

const B4: f64 = -1e-53;
const CENTRE_UM: f64 = 2.6;

/// β(ω) = 3ω/c + b₂(ω − ω_c)² + b₄(ω − ω_c)⁴ sampled on a 10 nm grid.
fn quartic(b2: f64) -> DispersionCurve {
    let wc = omega_from_um(CENTRE_UM);
    let samples = uniform_grid(1.4, 4.2, 0.01)
        .into_iter()
        .map(|l| {
            let w = omega_from_um(l);
            let d = w - wc;
            (l, (3.0 * w / C + b2 * d * d + B4 * d.powi(4)) * C / w)
        })
        .collect();
    DispersionCurve::from_samples("quartic", samples).unwrap()
}

/// b₂ placing the nondegenerate root at `signal` for `pump`: the even part of
/// the Taylor series gives δ² = −β''(ω_p)/(2b₄), β'' = 2b₂ + 12b₄(ω_p − ω_c)².
fn b2_for(pump: f64, signal: f64) -> f64 {
    let wp = omega_from_um(pump);
    let delta = wp - omega_from_um(signal);
    let off = wp - omega_from_um(CENTRE_UM);
    -B4 * delta * delta - 6.0 * B4 * off * off
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn idler_satisfies_photon_energy_balance(pump in 1.0f64..3.0, ds in 0.05f64..2.0) {
        let signal = pump + ds;
        let idler = idler_from(pump, signal);
        prop_assert!(idler < pump);
        prop_assert!((1.0 / idler - (2.0 / pump - 1.0 / signal)).abs() < 1e-13);
    }

    #[test]
    fn root_matches_closed_form(pump in 2.05f64..2.3, signal in 2.9f64..3.8) {
        let curve = quartic(b2_for(pump, signal));
        let roots = phase_match_solve(&curve, pump).unwrap();
        prop_assert_eq!(roots.len(), 1);
        let r = roots[0];
        prop_assert!((r.signal - signal).abs() < 1e-4, "{} vs {}", r.signal, signal);
        prop_assert!((um_from_omega(2.0 * omega_from_um(pump) - omega_from_um(r.signal)) - r.idler).abs() < 1e-12);
    }

    #[test]
    fn retune_inverts_phase_matching(pump in 2.1f64..2.25, signal in 3.0f64..3.6, offset in -0.01f64..0.01) {
        let curve = quartic(b2_for(pump, signal));
        let r0 = phase_match_solve(&curve, pump).unwrap()[0];
        let r = pump_retune(&curve, r0.signal, pump + offset).unwrap();
        prop_assert!((r.pump - pump).abs() < 1e-5, "{} vs {}", r.pump, pump);
        prop_assert!((r.signal - r0.signal).abs() < 1e-6);
    }
}

#[test]
fn curve_tracks_every_pump() {
    let curve = quartic(b2_for(2.2, 3.3));
    let pm = phase_match_curve(&curve, 2.15, 2.25, 0.01).unwrap();
    assert_eq!(pm.samples.len(), 11);
    for s in &pm.samples {
        assert_eq!(s.points, phase_match_solve(&curve, s.pump).unwrap());
    }
}

#[test]
fn unreachable_target_is_no_retune() {
    let curve = quartic(b2_for(2.2, 3.3));
    assert!(matches!(pump_retune(&curve, 4.1, 2.2), Err(DesignError::NoRetune { .. })));
}

#[test]
fn grid_search_ranks_in_band_candidates() {
    let lib = MaterialLibrary::builtin();
    let settings = SolverSettings { grid_step: 0.05, ..SolverSettings::default() };
    let mut builder = CurveBuilder::new(&lib, settings);
    builder.grid = uniform_grid(1.4, 4.2, 0.1);
    builder.refine_radius = 0.0;
    let target = DesignTarget {
        pump_range: (2.05, 2.2),
        pump_step: 0.005,
        widths: vec![2.0, 2.1],
        heights: vec![0.75],
        ..DesignTarget::new(3.265)
    };
    let ranked = grid_search(&target, &WaveguideGeometry::soi(2.0, 0.75), &builder).unwrap();
    assert!(!ranked.is_empty());
    for w in ranked.windows(2) {
        assert!(w[0].score_nm <= w[1].score_nm + 0.01);
    }
    for c in &ranked {
        assert!(c.point.idler_in(C_BAND), "{c:?}");
        assert!((c.score_nm - (c.point.signal - target.signal).abs() * 1e3).abs() < 1e-9);
    }
}
