use fwmpair_core::materials::{IndexModel, MaterialModel, SILICA};
use fwmpair_core::modes::fd::{FdProblem, Layout, Wall};
use fwmpair_core::modes::{effective_area, fiber_characteristic_residual, fiber_n_eff, power_fractions, solve_slab_mode};
use fwmpair_core::{FiberGeometry, Guide, MaterialLibrary, ModeError, SolverSettings, WaveguideGeometry};
use proptest::prelude::*;
use puruspe::{Jn, Kn};

const N_CORE: f64 = 3.47;
const N_CLAD: f64 = 1.44;
const THICKNESS: f64 = 0.4;
const LAMBDA: f64 = 1.55;

/// FD n_eff of a symmetric slab (layers along y, uniform in x) at mesh step h.
fn fd_slab(h: f64) -> f64 {
    let half = 2.0;
    let (ec, ek) = (N_CORE * N_CORE, N_CLAD * N_CLAD);
    let ny = (2.0 * half / h).round() as usize;
    let pr = FdProblem {
        layout: Layout {
            layers: vec![(-THICKNESS / 2.0, ek), (THICKNESS / 2.0, ec), (f64::INFINITY, ek)],
            rects: vec![],
        },
        wavelength: LAMBDA,
        hx: h,
        hy: h,
        nx: 3,
        ny,
        x_start: 0.0,
        y_start: -half,
        walls: [Wall::Electric, Wall::Electric, Wall::Electric, Wall::Electric],
        shift_index: N_CORE,
    };
    let modes = pr.assemble().modes(2, 30, 1e-10).unwrap();
    modes.iter().filter(|m| m.te_fraction > 0.5).map(|m| m.n_eff).fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn fd_converges_to_slab_oracle() {
    let exact = solve_slab_mode(N_CORE, N_CLAD, THICKNESS, LAMBDA).unwrap();
    // Halving sequence through the default 20 nm step.
    let steps = [0.04, 0.02, 0.01, 0.005];
    let errs: Vec<f64> = steps.iter().map(|&h| (fd_slab(h) - exact).abs()).collect();
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "not monotone: {errs:?}");
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.5, "observed order {order}, errors {errs:?}");
    }
    assert!(errs[3] < 1e-4, "finest error {}", errs[3]);
}

#[test]
fn slab_oracle_satisfies_dispersion_relation() {
    let n = solve_slab_mode(N_CORE, N_CLAD, THICKNESS, LAMBDA).unwrap();
    let k0 = 2.0 * std::f64::consts::PI / LAMBDA;
    let kappa = k0 * (N_CORE * N_CORE - n * n).sqrt();
    let gamma = k0 * (n * n - N_CLAD * N_CLAD).sqrt();
    // tan(κt/2) = γ/κ for the even TE mode.
    assert!(((kappa * THICKNESS / 2.0).tan() - gamma / kappa).abs() < 1e-9);
}

fn fixed_lib(n_core: f64, n_clad: f64) -> MaterialLibrary {
    let mut lib = MaterialLibrary::builtin();
    lib.insert(MaterialModel::new("core_x", IndexModel::Fixed(n_core)).unwrap()).unwrap();
    lib.insert(MaterialModel::new("clad_x", IndexModel::Fixed(n_clad)).unwrap()).unwrap();
    lib
}

fn fiber(radius: f64) -> FiberGeometry {
    FiberGeometry { core_radius: radius, core: "core_x".into(), cladding: "clad_x".into(), length: 1.0 }
}

/// Scalar LP₀₁ equation U J₁(U)/J₀(U) = W K₁(W)/K₀(W), solved by bisection in U.
fn lp01(n_core: f64, n_clad: f64, radius: f64, lambda: f64) -> f64 {
    let k0 = 2.0 * std::f64::consts::PI / lambda;
    let v = radius * k0 * (n_core * n_core - n_clad * n_clad).sqrt();
    let g = |u: f64| {
        let w = (v * v - u * u).sqrt();
        u * Jn(1, u) / Jn(0, u) - w * Kn(1, w) / Kn(0, w)
    };
    let (mut lo, mut hi) = (1e-9, v.min(2.404_825_557_695_773) - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    (n_core * n_core - (u / (k0 * radius)).powi(2)).sqrt()
}

#[test]
fn weak_guidance_matches_lp01() {
    for (nc, nk, a, l) in [(1.46, 1.455, 4.0, 1.55), (1.45, 1.444, 3.0, 1.0), (1.47, 1.46, 2.5, 0.8)] {
        let lib = fixed_lib(nc, nk);
        let he = fiber_n_eff(&fiber(a), l, &lib).unwrap();
        let lp = lp01(nc, nk, a, l);
        assert!((he.n_eff - lp).abs() < 1e-3, "{} vs {}", he.n_eff, lp);
        assert!((he.n_eff - lp).abs() < 1e-5, "weak guidance: {} vs {}", he.n_eff, lp);
    }
}

#[test]
fn large_v_approaches_core_index() {
    let lib = fixed_lib(1.45, 1.0);
    let mut prev = 1.0;
    for a in [0.5, 2.0, 8.0, 32.0] {
        let n = fiber_n_eff(&fiber(a), 1.0, &lib).unwrap().n_eff;
        assert!(n > prev && n < 1.45);
        prev = n;
    }
    assert!(1.45 - prev < 1e-3);
}

#[test]
fn fiber_fields_continuous_at_interface() {
    let lib = fixed_lib(1.45, 1.0);
    let he = fiber_n_eff(&fiber(1.0), 0.8, &lib).unwrap();
    let eps = 1e-9;
    for phi in [0.0f64, 0.4, 1.1, 2.0] {
        let (c, s) = (phi.cos(), phi.sin());
        let inner = he.fields_at((1.0 - eps) * c, (1.0 - eps) * s);
        let outer = he.fields_at((1.0 + eps) * c, (1.0 + eps) * s);
        // Tangential E (E_φ, E_z), all of η₀H, and normal D = n²E_r.
        let e_phi = |f: &[num_complex::Complex64; 6]| -f[0].re * s + f[1].re * c;
        let e_r = |f: &[num_complex::Complex64; 6]| f[0].re * c + f[1].re * s;
        let scale = inner[0].norm().max(1.0);
        assert!((e_phi(&inner) - e_phi(&outer)).abs() < 1e-6 * scale);
        assert!((inner[2] - outer[2]).norm() < 1e-6 * scale);
        for k in 3..6 {
            assert!((inner[k] - outer[k]).norm() < 1e-6 * scale, "H component {k} at φ={phi}");
        }
        assert!((1.45f64.powi(2) * e_r(&inner) - e_r(&outer)).abs() < 1e-6 * scale);
    }
}

#[test]
fn index_inversion_is_no_guided_mode() {
    let lib = fixed_lib(1.2, 1.45);
    assert!(matches!(fiber_n_eff(&fiber(1.0), 1.0, &lib), Err(ModeError::NoGuidedMode { .. })));
}

#[test]
fn rect_mode_is_te_and_confined() {
    let lib = MaterialLibrary::builtin();
    let geom = WaveguideGeometry::soi(2.05, 0.75);
    let settings = SolverSettings { grid_step: 0.05, ..SolverSettings::default() };
    let sol = Guide::Rect(geom.clone()).solve(2.1, &lib, &settings).unwrap();
    let ns = lib.get(SILICA).unwrap().refractive_index(2.1).unwrap();
    assert!(sol.n_eff > ns && sol.n_eff < 3.45, "{}", sol.n_eff);
    assert!(sol.te_fraction > 0.9);
    let fr = power_fractions(&sol, &geom).unwrap();
    assert!((fr.sum() - 1.0).abs() < 1e-9);
    assert!(fr.core > 0.8);
    // Symmetric cladding: equal power above and below.
    assert!((fr.cladding - fr.box_).abs() < 0.01);
    let a = effective_area(&sol.field) * 1e12;
    assert!(a > 0.5 && a < 2.05 * 0.75 * 2.0, "{a}");
}

#[test]
fn rect_solve_is_deterministic() {
    let lib = MaterialLibrary::builtin();
    let guide = Guide::Rect(WaveguideGeometry::soi(2.35, 0.65));
    let settings = SolverSettings { grid_step: 0.05, ..SolverSettings::default() };
    let a = guide.solve(3.0, &lib, &settings).unwrap();
    let b = guide.solve(3.0, &lib, &settings).unwrap();
    assert_eq!(a.n_eff.to_bits(), b.n_eff.to_bits());
    assert_eq!(a.field, b.field);
}

#[test]
fn invalid_geometry_is_rejected() {
    let lib = MaterialLibrary::builtin();
    let mut g = WaveguideGeometry::soi(2.0, 0.7);
    g.core_width = -1.0;
    assert!(matches!(Guide::Rect(g).solve(2.1, &lib, &SolverSettings::default()), Err(ModeError::InvalidGeometry(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fiber_characteristic_residual_is_tiny(
        n_clad in 1.0f64..1.45, dn in 0.002f64..0.5, radius in 0.5f64..5.0, lambda in 0.5f64..1.6,
    ) {
        let n_core = n_clad + dn;
        let v = radius * 2.0 * std::f64::consts::PI / lambda * (n_core * n_core - n_clad * n_clad).sqrt();
        let lib = fixed_lib(n_core, n_clad);
        let he = fiber_n_eff(&fiber(radius), lambda, &lib).unwrap();
        prop_assert!(he.n_eff > n_clad && he.n_eff < n_core);
        let res = |n: f64| fiber_characteristic_residual(n_core, n_clad, radius, lambda, n);
        let r = res(he.n_eff);
        // No neighbouring double does better.
        let up = f64::from_bits(he.n_eff.to_bits() + 1);
        let down = f64::from_bits(he.n_eff.to_bits() - 1);
        prop_assert!(r <= res(up) && r <= res(down), "not ulp-optimal: {} {} {}", res(down), r, res(up));
        // Beyond V ≈ 12 the residual at the nearest double itself exceeds 1e-12.
        if v <= 12.0 {
            prop_assert!(r < 1e-12, "residual {} at V = {}", r, v);
        }
    }

    #[test]
    fn slab_index_bounded_and_monotone(t in 0.05f64..2.0, lambda in 1.0f64..4.0) {
        let n1 = solve_slab_mode(N_CORE, N_CLAD, t, lambda).unwrap();
        let n2 = solve_slab_mode(N_CORE, N_CLAD, t * 1.1, lambda).unwrap();
        prop_assert!(n1 > N_CLAD && n1 < N_CORE);
        prop_assert!(n2 >= n1);
    }
}
