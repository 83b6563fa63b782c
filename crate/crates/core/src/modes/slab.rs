use super::ModeError;

/// Fundamental TE mode index of a symmetric slab of thickness `thickness` (μm)
/// at vacuum wavelength `lambda` (μm).
///
/// Solves κt = 2·atan(γ/κ) with κ = k₀√(n_core² − n²), γ = k₀√(n² − n_clad²)
/// by bisection in n to machine precision.
pub fn solve_slab_mode(n_core: f64, n_clad: f64, thickness: f64, lambda: f64) -> Result<f64, ModeError> {
    if !(n_core > n_clad && n_clad > 0.0 && thickness > 0.0 && lambda > 0.0) {
        return Err(ModeError::InvalidGeometry(format!(
            "slab requires n_core > n_clad > 0 and positive sizes (n_core={n_core}, n_clad={n_clad}, t={thickness})"
        )));
    }
    let k0 = 2.0 * std::f64::consts::PI / lambda;
    let f = |n: f64| {
        let kappa = k0 * (n_core * n_core - n * n).max(0.0).sqrt();
        let gamma = k0 * (n * n - n_clad * n_clad).max(0.0).sqrt();
        kappa * thickness - 2.0 * gamma.atan2(kappa)
    };
    // f > 0 at the cladding index, f = −π at the core index.
    let (mut lo, mut hi) = (n_clad, n_core);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}
