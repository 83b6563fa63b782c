//! Guided modes: a full-vector finite-difference solver for rectangular
//! silicon-on-insulator cross-sections, exact step-index fiber and slab
//! solvers, and field-derived quantities.

pub mod cache;
pub mod eigen;
pub mod fd;
mod fiber;
mod field;
mod slab;
pub mod sparse;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::materials::{MaterialError, MaterialLibrary};
use eigen::EigenError;
use fd::{FdProblem, Layout, Rect, Wall};

pub use fiber::{fiber_characteristic_residual, fiber_n_eff, solve_fiber_mode, He11};
pub use field::{effective_area, overlap_integral, overlap_integral_vector, ModeField};
pub use slab::solve_slab_mode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModeError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("no guided mode at {wavelength} um: {reason}")]
    NoGuidedMode { wavelength: f64, reason: String },
    #[error("mode solver at {wavelength} um: {source}")]
    NotConverged {
        wavelength: f64,
        #[source]
        source: EigenError,
    },
    #[error("field at the window edge is {ratio:.2e} of peak at {wavelength} um; enlarge the padding")]
    BoundaryLeak { wavelength: f64, ratio: f64 },
    #[error("mode fields are not sampled on identical grids")]
    GridMismatch,
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
}

/// Rectangular channel waveguide: core centred at the origin, cladding above
/// and beside it, buried oxide below the core bottom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideGeometry {
    /// Core width a, μm.
    pub core_width: f64,
    /// Core height b, μm.
    pub core_height: f64,
    pub core: String,
    pub cladding: String,
    pub box_material: String,
    /// BOX thickness, μm. No substrate is modeled: the BOX material fills the
    /// window below the core.
    pub box_thickness: f64,
    /// Simulation window margin around the core on every side, μm.
    pub padding: f64,
    /// Waveguide length L, m.
    pub length: f64,
}

impl WaveguideGeometry {
    /// Silicon core in silica with a silica BOX, 2 μm padding and 2 cm length.
    pub fn soi(core_width: f64, core_height: f64) -> Self {
        Self {
            core_width,
            core_height,
            core: crate::materials::SILICON.into(),
            cladding: crate::materials::SILICA.into(),
            box_material: crate::materials::SILICA.into(),
            box_thickness: 2.0,
            padding: 2.0,
            length: 0.02,
        }
    }

    pub fn validate(&self) -> Result<(), ModeError> {
        let pos = [
            ("core width", self.core_width),
            ("core height", self.core_height),
            ("padding", self.padding),
            ("length", self.length),
            ("box thickness", self.box_thickness),
        ];
        for (what, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModeError::InvalidGeometry(format!("{what} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Step-index fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberGeometry {
    /// Core radius, μm.
    pub core_radius: f64,
    pub core: String,
    pub cladding: String,
    /// Fiber length L, m.
    pub length: f64,
}

impl FiberGeometry {
    pub fn validate(&self) -> Result<(), ModeError> {
        if !(self.core_radius > 0.0 && self.length > 0.0) {
            return Err(ModeError::InvalidGeometry(
                "core radius and length must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Either guiding structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guide {
    Rect(WaveguideGeometry),
    Fiber(FiberGeometry),
}

impl Guide {
    pub fn length(&self) -> f64 {
        match self {
            Guide::Rect(g) => g.length,
            Guide::Fiber(g) => g.length,
        }
    }

    pub fn validate(&self) -> Result<(), ModeError> {
        match self {
            Guide::Rect(g) => g.validate(),
            Guide::Fiber(g) => g.validate(),
        }
    }

    /// Full mode solution at one wavelength.
    pub fn solve(
        &self,
        lambda: f64,
        lib: &MaterialLibrary,
        settings: &SolverSettings,
    ) -> Result<ModeSolution, ModeError> {
        match self {
            Guide::Rect(g) => solve_rect_mode(g, lambda, lib, settings),
            Guide::Fiber(g) => solve_fiber_mode(g, lambda, lib, settings),
        }
    }

    /// Effective index only.
    pub fn n_eff(
        &self,
        lambda: f64,
        lib: &MaterialLibrary,
        settings: &SolverSettings,
    ) -> Result<f64, ModeError> {
        match self {
            Guide::Rect(g) => solve_rect_mode(g, lambda, lib, settings).map(|s| s.n_eff),
            Guide::Fiber(g) => fiber_n_eff(g, lambda, lib).map(|h| h.n_eff),
        }
    }

    /// Content hash identifying the structure, its materials and the solver
    /// settings that influence n_eff.
    pub fn hash(&self, lib: &MaterialLibrary, settings: &SolverSettings) -> Result<String, ModeError> {
        let mut h = Sha256::new();
        h.update(b"fwmpair-mode-v1\n");
        h.update(serde_json::to_vec(self).expect("serializable geometry"));
        let names: Vec<&str> = match self {
            Guide::Rect(g) => vec![&g.core, &g.cladding, &g.box_material],
            Guide::Fiber(g) => vec![&g.core, &g.cladding],
        };
        for n in names {
            h.update(format!("{:?}", lib.get(n)?).as_bytes());
        }
        if let Guide::Rect(_) = self {
            h.update(format!("{:?}", (settings.grid_step, settings.symmetry)).as_bytes());
        }
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Numerical settings for the mode solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Target FD mesh step, μm (adjusted per axis so core edges fall on the mesh).
    pub grid_step: f64,
    /// Exploit the up/down mirror symmetry when cladding and BOX coincide.
    pub symmetry: bool,
    /// Maximum edge-to-peak intensity ratio accepted.
    pub leak_threshold: f64,
    /// Number of candidate eigenpairs examined for mode identification.
    pub n_candidates: usize,
    pub krylov_dim: usize,
    pub eigen_tol: f64,
    /// Raster step for analytic fiber fields, μm.
    pub fiber_step: f64,
    /// Raster window margin beyond the fiber core, μm.
    pub fiber_padding: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            grid_step: 0.02,
            symmetry: true,
            leak_threshold: 1e-6,
            n_candidates: 3,
            krylov_dim: 40,
            eigen_tol: 1e-10,
            fiber_step: 0.01,
            fiber_padding: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    TeLike,
    TmLike,
}

/// One solved mode at one wavelength. Immutable once returned.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    /// Vacuum wavelength, μm.
    pub wavelength: f64,
    pub n_eff: f64,
    pub field: ModeField,
    pub polarization: Polarization,
    pub te_fraction: f64,
}

/// Fractions of guided power in the core, cladding and BOX regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFractions {
    pub core: f64,
    pub cladding: f64,
    #[serde(rename = "box")]
    pub box_: f64,
}

impl PowerFractions {
    pub fn sum(&self) -> f64 {
        self.core + self.cladding + self.box_
    }
}

/// Mesh steps and half-window cell counts for a rectangular geometry.
fn rect_mesh(geom: &WaveguideGeometry, h: f64) -> (f64, f64, usize, usize) {
    let half_a = geom.core_width / 2.0;
    let half_b = geom.core_height / 2.0;
    let na = ((half_a / h).round() as usize).max(1);
    let nb = ((half_b / h).round() as usize).max(1);
    let hx = half_a / na as f64;
    let hy = half_b / nb as f64;
    let px = (geom.padding / hx).round() as usize;
    let py = (geom.padding / hy).round() as usize;
    (hx, hy, na + px, nb + py)
}

/// Fraction of the gap between the effective-index estimate and the core index
/// added to place the shift just above the fundamental mode.
const SHIFT_FRACTION: f64 = 0.1;

/// Eigensolver shift index: an effective-index estimate nudged toward the core
/// index, so the fundamental mode is the eigenvalue nearest the shift.
fn shift_index(geom: &WaveguideGeometry, n_core: f64, n_clad: f64, n_outer: f64, lambda: f64) -> f64 {
    let est = solve_slab_mode(n_core, n_outer, geom.core_height, lambda)
        .and_then(|n1| solve_slab_mode(n1, n_clad, geom.core_width, lambda))
        .unwrap_or(n_core);
    est + SHIFT_FRACTION * (n_core - est)
}

/// Fundamental TE-like mode of a rectangular waveguide.
pub fn solve_rect_mode(
    geom: &WaveguideGeometry,
    lambda: f64,
    lib: &MaterialLibrary,
    settings: &SolverSettings,
) -> Result<ModeSolution, ModeError> {
    geom.validate()?;
    if !(settings.grid_step > 0.0) {
        return Err(ModeError::InvalidGeometry("grid step must be positive".into()));
    }
    let n_core = lib.get(&geom.core)?.refractive_index(lambda)?;
    let n_clad = lib.get(&geom.cladding)?.refractive_index(lambda)?;
    let n_box = lib.get(&geom.box_material)?.refractive_index(lambda)?;
    let n_outer = n_clad.max(n_box);
    if n_core <= n_outer {
        return Err(ModeError::NoGuidedMode {
            wavelength: lambda,
            reason: format!("core index {n_core} not above surrounding index {n_outer}"),
        });
    }
    let (hx, hy, nx, ny_half) = rect_mesh(geom, settings.grid_step);
    let (half_a, half_b) = (geom.core_width / 2.0, geom.core_height / 2.0);
    let layout = Layout {
        layers: vec![(-half_b, n_box * n_box), (f64::INFINITY, n_clad * n_clad)],
        rects: vec![Rect { x0: -half_a, x1: half_a, y0: -half_b, y1: half_b, eps: n_core * n_core }],
    };
    let mirror_y = settings.symmetry && geom.cladding == geom.box_material;
    let (ny, y_start, walls, row) = if mirror_y {
        (ny_half, 0.0, [Wall::Electric, Wall::Electric, Wall::Magnetic, Wall::Electric], 0)
    } else {
        (
            2 * ny_half,
            -(ny_half as f64) * hy,
            [Wall::Electric, Wall::Electric, Wall::Electric, Wall::Electric],
            ny_half,
        )
    };
    let problem = FdProblem {
        layout,
        wavelength: lambda,
        hx,
        hy,
        nx,
        ny,
        x_start: 0.0,
        y_start,
        walls,
        shift_index: shift_index(geom, n_core, n_clad, n_outer, lambda),
    };
    let op = problem.assemble();
    let modes = op
        .modes(settings.n_candidates, settings.krylov_dim, settings.eigen_tol)
        .map_err(|source| ModeError::NotConverged { wavelength: lambda, source })?;
    let mode = modes
        .iter()
        .find(|m| m.te_fraction > 0.5 && op.nodal_counts(m, row) == (0, 0))
        .ok_or_else(|| ModeError::NoGuidedMode {
            wavelength: lambda,
            reason: "no TE-like candidate without nodal lines".into(),
        })?;
    if !(mode.n_eff > n_outer && mode.n_eff < n_core) {
        return Err(ModeError::NoGuidedMode {
            wavelength: lambda,
            reason: format!("n_eff {} outside ({n_outer}, {n_core})", mode.n_eff),
        });
    }
    let field = op.field(mode, true, mirror_y);
    let ratio = field.edge_ratio();
    if ratio > settings.leak_threshold {
        return Err(ModeError::BoundaryLeak { wavelength: lambda, ratio });
    }
    Ok(ModeSolution {
        wavelength: lambda,
        n_eff: mode.n_eff,
        te_fraction: field.te_fraction(),
        field,
        polarization: Polarization::TeLike,
    })
}

/// Power fractions from the longitudinal Poynting flux. Air or any other
/// region above the BOX and outside the core counts as cladding.
pub fn power_fractions(sol: &ModeSolution, geom: &WaveguideGeometry) -> Result<PowerFractions, ModeError> {
    let f = &sol.field;
    let (half_a, half_b) = (geom.core_width / 2.0, geom.core_height / 2.0);
    let aligned = |half: f64, d: f64, origin: f64| {
        let k = (half - (origin - 0.5 * d)) / d;
        (k - k.round()).abs() < 1e-6
    };
    let covers = f.x(0) - 0.5 * f.dx <= -half_a
        && f.x(f.nx - 1) + 0.5 * f.dx >= half_a
        && f.y(0) - 0.5 * f.dy <= -half_b
        && f.y(f.ny - 1) + 0.5 * f.dy >= half_b;
    if !(covers && aligned(half_a, f.dx, f.x0) && aligned(half_b, f.dy, f.y0)) {
        return Err(ModeError::GridMismatch);
    }
    let sz = f.poynting_z();
    let (mut core, mut clad, mut bx) = (0.0, 0.0, 0.0);
    for j in 0..f.ny {
        let y = f.y(j);
        for i in 0..f.nx {
            let x = f.x(i);
            let s = sz[j * f.nx + i];
            if x.abs() < half_a && y.abs() < half_b {
                core += s;
            } else if y < -half_b {
                bx += s;
            } else {
                clad += s;
            }
        }
    }
    let total = core + clad + bx;
    if !(total > 0.0) {
        return Err(ModeError::NoGuidedMode {
            wavelength: sol.wavelength,
            reason: "non-positive total power flux".into(),
        });
    }
    Ok(PowerFractions { core: core / total, cladding: clad / total, box_: bx / total })
}
