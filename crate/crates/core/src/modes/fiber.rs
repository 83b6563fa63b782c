//! Exact HE₁₁ mode of a step-index fiber.

use num_complex::Complex64 as C64;
use puruspe::{Jn, Kn};

use super::{FiberGeometry, ModeError, ModeField, ModeSolution, Polarization, SolverSettings};
use crate::materials::MaterialLibrary;

/// First zero of J₀.
const J0_ZERO: f64 = 2.404_825_557_695_773;

/// Modal parameters of the HE₁₁ solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct He11 {
    pub n_eff: f64,
    pub n_core: f64,
    pub n_clad: f64,
    /// Core radius, μm.
    pub radius: f64,
    /// Vacuum wavelength, μm.
    pub wavelength: f64,
    pub u: f64,
    pub w: f64,
    pub v: f64,
}

/// η = J₀(U)/(U J₁(U)) and ξ = K₀(W)/(W K₁(W)).
fn eta(u: f64) -> f64 {
    Jn(0, u) / (u * Jn(1, u))
}

fn xi(w: f64) -> f64 {
    Kn(0, w) / (w * Kn(1, w))
}

/// Relative residual of the full-vector characteristic equation
///
/// (J₁'/(UJ₁) + K₁'/(WK₁))·(J₁'/(UJ₁) + (n_cl/n_co)² K₁'/(WK₁))
///   = (1/U² + 1/W²)·(1/U² + (n_cl/n_co)²/W²)
///
/// at the given effective index.
pub fn fiber_characteristic_residual(n_core: f64, n_clad: f64, radius: f64, lambda: f64, n_eff: f64) -> f64 {
    let k0 = 2.0 * std::f64::consts::PI / lambda;
    let u = radius * k0 * (n_core * n_core - n_eff * n_eff).sqrt();
    let w = radius * k0 * (n_eff * n_eff - n_clad * n_clad).sqrt();
    let r = (n_clad / n_core).powi(2);
    let jp = (Jn(0, u) - Jn(2, u)) / 2.0;
    let kp = -(Kn(0, w) + Kn(2, w)) / 2.0;
    let b1 = jp / (u * Jn(1, u));
    let b2 = kp / (w * Kn(1, w));
    let lhs = (b1 + b2) * (b1 + r * b2);
    let rhs = (1.0 / (u * u) + 1.0 / (w * w)) * (1.0 / (u * u) + r / (w * w));
    (lhs - rhs).abs() / rhs.abs()
}

/// Solve the HE₁₁ characteristic equation for given indices.
pub(crate) fn he11(n_core: f64, n_clad: f64, radius: f64, lambda: f64) -> Result<He11, ModeError> {
    if !(n_core > n_clad) {
        return Err(ModeError::NoGuidedMode {
            wavelength: lambda,
            reason: format!("index inversion: core {n_core} not above cladding {n_clad}"),
        });
    }
    let k0 = 2.0 * std::f64::consts::PI / lambda;
    let v = radius * k0 * (n_core * n_core - n_clad * n_clad).sqrt();
    let r = (n_clad / n_core).powi(2);
    // Eliminating the −1/U², −1/W² parts of the logarithmic derivatives turns the
    // characteristic equation into a quadratic in η whose smaller root is HE₁ₘ.
    let g = |u: f64| {
        let w = (v * v - u * u).sqrt();
        let x = xi(w);
        let s = 1.0 / (u * u) + 1.0 / (w * w);
        let t = 1.0 / (u * u) + r / (w * w);
        let b = (1.0 + r) * x + s + t;
        let c = r * x * x + (t + s * r) * x;
        eta(u) - c / (0.5 * b + (0.25 * b * b - c).max(0.0).sqrt())
    };
    let u_max = v.min(J0_ZERO);
    let mut lo = u_max * 1e-6;
    let mut hi = u_max * (1.0 - 1e-14);
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return Err(ModeError::NoGuidedMode {
            wavelength: lambda,
            reason: format!("HE11 root not bracketed (V = {v})"),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    let w = (v * v - u * u).sqrt();
    let n_eff = polish(n_core, n_clad, radius, lambda, (n_core * n_core - (u / (k0 * radius)).powi(2)).sqrt());
    Ok(He11 { n_eff, n_core, n_clad, radius, wavelength: lambda, u, w, v })
}

/// Walk to the neighbouring double with the smallest characteristic residual;
/// the conversion from U loses a few ulps when n_eff is close to n_core.
fn polish(n_core: f64, n_clad: f64, radius: f64, lambda: f64, n_eff: f64) -> f64 {
    let res = |n: f64| fiber_characteristic_residual(n_core, n_clad, radius, lambda, n);
    let (mut best, mut r) = (n_eff, res(n_eff));
    for step in [1i64, -1] {
        for _ in 0..64 {
            let next = f64::from_bits((best.to_bits() as i64 + step) as u64);
            let rn = res(next);
            if !(rn < r) {
                break;
            }
            (best, r) = (next, rn);
        }
    }
    best
}

/// HE₁₁ modal parameters for a fiber geometry.
pub fn fiber_n_eff(geom: &FiberGeometry, lambda: f64, lib: &MaterialLibrary) -> Result<He11, ModeError> {
    geom.validate()?;
    let n_core = lib.get(&geom.core)?.refractive_index(lambda)?;
    let n_clad = lib.get(&geom.cladding)?.refractive_index(lambda)?;
    he11(n_core, n_clad, geom.radius_checked()?, lambda)
}

impl FiberGeometry {
    fn radius_checked(&self) -> Result<f64, ModeError> {
        if self.core_radius > 0.0 {
            Ok(self.core_radius)
        } else {
            Err(ModeError::InvalidGeometry("core radius must be positive".into()))
        }
    }
}

impl He11 {
    /// x-polarized field components (E, η₀H) at Cartesian point (x, y) in μm.
    pub fn fields_at(&self, x: f64, y: f64) -> [C64; 6] {
        let (u, w, v, a) = (self.u, self.w, self.v, self.radius);
        let k0 = 2.0 * std::f64::consts::PI / self.wavelength;
        let beta = k0 * self.n_eff;
        let j1u = Jn(1, u);
        let k1w = Kn(1, w);
        let b1 = (Jn(0, u) - Jn(2, u)) / (2.0 * u * j1u);
        let b2 = -(Kn(0, w) + Kn(2, w)) / (2.0 * w * k1w);
        let f2 = (v / (u * w)).powi(2) / (b1 + b2);
        let a1 = (f2 - 1.0) / 2.0;
        let a2 = (f2 + 1.0) / 2.0;
        let r = x.hypot(y);
        let phi = y.atan2(x);
        let (c1, s1) = (phi.cos(), phi.sin());
        let (c2, s2) = ((2.0 * phi).cos(), (2.0 * phi).sin());
        let ez_scale = u / (a * beta);
        // e = Im(E_z); curl = ∂xE_y − ∂yE_x.
        let (ex, ey, e, dex, dey, curl);
        if r < a {
            let k = u / a;
            let rho = k * r;
            let (j0, j1, j2) = (Jn(0, rho), Jn(1, rho), Jn(2, rho));
            ex = -(a1 * j0 + a2 * j2 * c2) / j1u;
            ey = -a2 * j2 * s2 / j1u;
            e = ez_scale * j1 * c1 / j1u;
            dex = ez_scale * 0.5 * k * (j0 - j2 * c2) / j1u;
            dey = -ez_scale * 0.5 * k * j2 * s2 / j1u;
            curl = -k * f2 * j1 * s1 / j1u;
        } else {
            let k = w / a;
            let rho = k * r;
            let (q0, q1, q2) = (Kn(0, rho), Kn(1, rho), Kn(2, rho));
            ex = -(u / w) * (a1 * q0 - a2 * q2 * c2) / k1w;
            ey = (u / w) * a2 * q2 * s2 / k1w;
            e = ez_scale * q1 * c1 / k1w;
            dex = -ez_scale * 0.5 * k * (q0 + q2 * c2) / k1w;
            dey = -ez_scale * 0.5 * k * q2 * s2 / k1w;
            curl = -(u / a) * f2 * q1 * s1 / k1w;
        }
        // ∇×E = −jk₀(η₀H) with ∂z → −jβ and E_z = j·e.
        let hx = (-dey - beta * ey) / k0;
        let hy = (beta * ex + dex) / k0;
        let hz = C64::new(0.0, curl / k0);
        [
            C64::new(ex, 0.0),
            C64::new(ey, 0.0),
            C64::new(0.0, e),
            C64::new(hx, 0.0),
            C64::new(hy, 0.0),
            hz,
        ]
    }

    /// Rasterize onto a square window of half-width radius + padding.
    pub fn raster(&self, step: f64, padding: f64) -> ModeField {
        let half = self.radius + padding;
        let n = ((2.0 * half / step).round() as usize).max(2);
        let h = 2.0 * half / n as f64;
        let x0 = -half + 0.5 * h;
        let mut f = ModeField::zeros(n, n, h, h, x0, x0);
        for j in 0..n {
            let y = f.y(j);
            for i in 0..n {
                let c = self.fields_at(f.x(i), y);
                let k = j * n + i;
                f.ex[k] = c[0];
                f.ey[k] = c[1];
                f.ez[k] = c[2];
                f.hx[k] = c[3];
                f.hy[k] = c[4];
                f.hz[k] = c[5];
            }
        }
        f.normalize();
        f
    }
}

/// HE₁₁ mode with its fields rasterized to a [`ModeField`].
pub fn solve_fiber_mode(
    geom: &FiberGeometry,
    lambda: f64,
    lib: &MaterialLibrary,
    settings: &SolverSettings,
) -> Result<ModeSolution, ModeError> {
    let m = fiber_n_eff(geom, lambda, lib)?;
    let field = m.raster(settings.fiber_step, settings.fiber_padding);
    let ratio = field.edge_ratio();
    if ratio > settings.leak_threshold {
        return Err(ModeError::BoundaryLeak { wavelength: lambda, ratio });
    }
    Ok(ModeSolution {
        wavelength: lambda,
        n_eff: m.n_eff,
        te_fraction: field.te_fraction(),
        field,
        polarization: Polarization::TeLike,
    })
}
