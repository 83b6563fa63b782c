//! Full-vector finite-difference eigenmode solver on a staggered (Yee) mesh.
//!
//! Unknowns are the transverse electric fields E_x at (i+½, j) and E_y at
//! (i, j+½). With K = ∂xE_y − ∂yE_x, P = k₀ε_xE_x − ∂yK/k₀,
//! Q = −k₀ε_yE_y − ∂xK/k₀ and D = (∂xP − ∂yQ)/ε_z the eigenproblem reads
//!
//! β²E_x = k₀P + ∂xD/k₀,   β²E_y = −k₀Q + ∂yD/k₀.
//!
//! Walls are perfect electric or magnetic conductors; a symmetry plane is
//! simply a wall of the appropriate kind, which lets the solver work on a
//! quarter or half of the cross-section.

use num_complex::Complex64 as C64;

use super::eigen::{shift_invert, EigenError, ShiftInvert};
use super::field::ModeField;
use super::sparse::Csr;

/// Boundary wall type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wall {
    /// Perfect electric conductor: tangential E vanishes.
    Electric,
    /// Perfect magnetic conductor: tangential H vanishes.
    Magnetic,
}

impl Wall {
    /// Ghost-cell parity applied to tangential H-like quantities.
    fn parity(self) -> f64 {
        match self {
            Wall::Electric => 1.0,
            Wall::Magnetic => -1.0,
        }
    }
}

/// Axis-aligned rectangle of uniform permittivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub eps: f64,
}

/// Piecewise-constant permittivity map: horizontal layers overlaid by rectangles.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    /// (y_top, ε) sorted by y_top; the last layer should use `f64::INFINITY`.
    pub layers: Vec<(f64, f64)>,
    /// Rectangles painted over the layers; later entries win.
    pub rects: Vec<Rect>,
}

impl Layout {
    pub fn permittivity(&self, x: f64, y: f64) -> f64 {
        if let Some(r) = self
            .rects
            .iter()
            .rev()
            .find(|r| x > r.x0 && x < r.x1 && y > r.y0 && y < r.y1)
        {
            return r.eps;
        }
        self.layers
            .iter()
            .find(|&&(top, _)| y < top)
            .or(self.layers.last())
            .map_or(1.0, |&(_, e)| e)
    }

    fn x_breaks(&self) -> Vec<f64> {
        self.rects.iter().flat_map(|r| [r.x0, r.x1]).collect()
    }

    fn y_breaks(&self) -> Vec<f64> {
        self.layers
            .iter()
            .map(|&(t, _)| t)
            .filter(|t| t.is_finite())
            .chain(self.rects.iter().flat_map(|r| [r.y0, r.y1]))
            .collect()
    }
}

#[derive(Clone, Copy)]
enum Avg {
    /// Harmonic across x, arithmetic along y.
    X,
    /// Harmonic across y, arithmetic along x.
    Y,
    /// Arithmetic.
    Z,
}

fn pieces(a: f64, b: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Exact average of ε over a cell using sub-rectangles of uniform material.
fn cell_average(l: &Layout, xb: &[f64], yb: &[f64], x: (f64, f64), y: (f64, f64), avg: Avg) -> f64 {
    let px = pieces(x.0, x.1, xb);
    let py = pieces(y.0, y.1, yb);
    let (w, h) = (x.1 - x.0, y.1 - y.0);
    let eps = |xa: f64, xb: f64, ya: f64, yb: f64| l.permittivity(0.5 * (xa + xb), 0.5 * (ya + yb));
    match avg {
        Avg::X => py
            .iter()
            .map(|&(y0, y1)| {
                let inv: f64 = px.iter().map(|&(x0, x1)| (x1 - x0) / w / eps(x0, x1, y0, y1)).sum();
                (y1 - y0) / h / inv
            })
            .sum(),
        Avg::Y => px
            .iter()
            .map(|&(x0, x1)| {
                let inv: f64 = py.iter().map(|&(y0, y1)| (y1 - y0) / h / eps(x0, x1, y0, y1)).sum();
                (x1 - x0) / w / inv
            })
            .sum(),
        Avg::Z => px
            .iter()
            .flat_map(|&(x0, x1)| {
                py.iter()
                    .map(move |&(y0, y1)| (x1 - x0) * (y1 - y0) / (w * h) * eps(x0, x1, y0, y1))
            })
            .sum(),
    }
}

/// Discretized problem on the rectangle [x_start, x_start + nx·hx] × [y_start, y_start + ny·hy].
#[derive(Debug, Clone)]
pub struct FdProblem {
    pub layout: Layout,
    /// Vacuum wavelength in μm.
    pub wavelength: f64,
    pub hx: f64,
    pub hy: f64,
    pub nx: usize,
    pub ny: usize,
    pub x_start: f64,
    pub y_start: f64,
    /// Walls at (x low, x high, y low, y high).
    pub walls: [Wall; 4],
    /// Index defining the eigensolver shift (k₀n)²; just above the wanted mode.
    pub shift_index: f64,
}

/// One eigenmode of an [`FdProblem`] with its staggered-grid unknowns.
#[derive(Debug, Clone)]
pub struct FdMode {
    pub n_eff: f64,
    /// Full (including zero wall entries) E_x then E_y vector.
    pub e: Vec<f64>,
    pub te_fraction: f64,
    pub residual: f64,
}

/// Assembled operators for one problem.
pub struct FdOperator {
    problem: FdProblem,
    k0: f64,
    /// Reduced eigen-operator on active unknowns.
    a: Csr,
    active: Vec<usize>,
    p: Csr,
    q: Csr,
    d: Csr,
    k: Csr,
}

impl FdProblem {
    fn n_ex(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    fn n_ey(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    /// Assemble the eigen-operator.
    pub fn assemble(&self) -> FdOperator {
        let (nx, ny, hx, hy) = (self.nx, self.ny, self.hx, self.hy);
        let k0 = 2.0 * std::f64::consts::PI / self.wavelength;
        let [sxl, sxh, syl, syh] = self.walls.map(Wall::parity);
        let ex = |i: usize, j: usize| i * (ny + 1) + j;
        let ey = |i: usize, j: usize| i * ny + j;
        let ez = |i: usize, j: usize| i * (ny + 1) + j;
        let hz = |i: usize, j: usize| i * ny + j;
        let (n_ex, n_ey, n_ez, n_hz) = (self.n_ex(), self.n_ey(), (nx + 1) * (ny + 1), nx * ny);

        // Forward differences: integer nodes → half nodes.
        let mut t = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                t.push((hz(i, j), ex(i, j + 1), 1.0 / hy));
                t.push((hz(i, j), ex(i, j), -1.0 / hy));
            }
        }
        let uy_ex = Csr::from_triplets(n_hz, n_ex, t);
        let mut t = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                t.push((hz(i, j), ey(i + 1, j), 1.0 / hx));
                t.push((hz(i, j), ey(i, j), -1.0 / hx));
            }
        }
        let ux_ey = Csr::from_triplets(n_hz, n_ey, t);
        let mut t = Vec::new();
        for i in 0..nx {
            for j in 0..=ny {
                t.push((ex(i, j), ez(i + 1, j), 1.0 / hx));
                t.push((ex(i, j), ez(i, j), -1.0 / hx));
            }
        }
        let ux_d = Csr::from_triplets(n_ex, n_ez, t);
        let mut t = Vec::new();
        for i in 0..=nx {
            for j in 0..ny {
                t.push((ey(i, j), ez(i, j + 1), 1.0 / hy));
                t.push((ey(i, j), ez(i, j), -1.0 / hy));
            }
        }
        let uy_d = Csr::from_triplets(n_ey, n_ez, t);

        // Backward differences: half nodes → integer nodes, with ghost parity at walls.
        // `back(len, lo, hi, h)` yields (node, half-index, weight) for one axis.
        let back = |len: usize, lo: f64, hi: f64, h: f64| {
            let mut w = Vec::new();
            for n in 0..=len {
                if n < len {
                    w.push((n, n, 1.0 / h));
                } else {
                    w.push((n, len - 1, hi / h));
                }
                if n > 0 {
                    w.push((n, n - 1, -1.0 / h));
                } else {
                    w.push((n, 0, -lo / h));
                }
            }
            w
        };
        let by = back(ny, syl, syh, hy);
        let bx = back(nx, sxl, sxh, hx);
        let mut t = Vec::new();
        for i in 0..nx {
            for &(j, jh, w) in &by {
                t.push((ex(i, j), hz(i, jh), w));
            }
        }
        let vy_hz = Csr::from_triplets(n_ex, n_hz, t);
        let mut t = Vec::new();
        for &(i, ih, w) in &bx {
            for j in 0..ny {
                t.push((ey(i, j), hz(ih, j), w));
            }
        }
        let vx_hz = Csr::from_triplets(n_ey, n_hz, t);
        let mut t = Vec::new();
        for &(i, ih, w) in &bx {
            for j in 0..=ny {
                t.push((ez(i, j), ex(ih, j), w));
            }
        }
        let vx_p = Csr::from_triplets(n_ez, n_ex, t);
        let mut t = Vec::new();
        for i in 0..=nx {
            for &(j, jh, w) in &by {
                t.push((ez(i, j), ey(i, jh), w));
            }
        }
        let vy_q = Csr::from_triplets(n_ez, n_ey, t);

        // Averaged permittivities.
        let (xb, yb) = (self.layout.x_breaks(), self.layout.y_breaks());
        let xs = |i: f64| self.x_start + i * hx;
        let ys = |j: f64| self.y_start + j * hy;
        let l = &self.layout;
        let mut eps_x = vec![0.0; n_ex];
        for i in 0..nx {
            for j in 0..=ny {
                let (i, j) = (i as f64, j as f64);
                eps_x[ex(i as usize, j as usize)] =
                    cell_average(l, &xb, &yb, (xs(i), xs(i + 1.0)), (ys(j - 0.5), ys(j + 0.5)), Avg::X);
            }
        }
        let mut eps_y = vec![0.0; n_ey];
        for i in 0..=nx {
            for j in 0..ny {
                let (fi, fj) = (i as f64, j as f64);
                eps_y[ey(i, j)] =
                    cell_average(l, &xb, &yb, (xs(fi - 0.5), xs(fi + 0.5)), (ys(fj), ys(fj + 1.0)), Avg::Y);
            }
        }
        let mut inv_eps_z = vec![0.0; n_ez];
        for i in 0..=nx {
            for j in 0..=ny {
                let (fi, fj) = (i as f64, j as f64);
                inv_eps_z[ez(i, j)] = 1.0
                    / cell_average(
                        l,
                        &xb,
                        &yb,
                        (xs(fi - 0.5), xs(fi + 0.5)),
                        (ys(fj - 0.5), ys(fj + 0.5)),
                        Avg::Z,
                    );
            }
        }

        let k = uy_ex.scale(-1.0).hstack(&ux_ey);
        let p = Csr::diag(&eps_x)
            .scale(k0)
            .hstack(&Csr::zeros(n_ex, n_ey))
            .lin_comb(1.0, &vy_hz.matmul(&k), -1.0 / k0);
        let q = Csr::zeros(n_ey, n_ex)
            .hstack(&Csr::diag(&eps_y).scale(-k0))
            .lin_comb(1.0, &vx_hz.matmul(&k), -1.0 / k0);
        let d = vx_p
            .matmul(&p)
            .lin_comb(1.0, &vy_q.matmul(&q), -1.0)
            .scale_rows(&inv_eps_z);
        let top = p.clone().scale(k0).lin_comb(1.0, &ux_d.matmul(&d), 1.0 / k0);
        let bottom = q.clone().scale(-k0).lin_comb(1.0, &uy_d.matmul(&d), 1.0 / k0);
        let full = top.vstack(&bottom);

        let mut active = Vec::with_capacity(n_ex + n_ey);
        for i in 0..nx {
            for j in 0..=ny {
                let on_wall = (j == 0 && self.walls[2] == Wall::Electric)
                    || (j == ny && self.walls[3] == Wall::Electric);
                if !on_wall {
                    active.push(ex(i, j));
                }
            }
        }
        for i in 0..=nx {
            for j in 0..ny {
                let on_wall = (i == 0 && self.walls[0] == Wall::Electric)
                    || (i == nx && self.walls[1] == Wall::Electric);
                if !on_wall {
                    active.push(n_ex + ey(i, j));
                }
            }
        }
        let a = full.restrict(&active);
        FdOperator { problem: self.clone(), k0, a, active, p, q, d, k }
    }
}

impl FdOperator {
    pub fn dimension(&self) -> usize {
        self.active.len()
    }

    pub fn matrix(&self) -> &Csr {
        &self.a
    }

    /// Eigenmodes nearest the shift, sorted by decreasing n_eff.
    pub fn modes(&self, n_wanted: usize, krylov_dim: usize, tol: f64) -> Result<Vec<FdMode>, EigenError> {
        let sigma = (self.k0 * self.problem.shift_index).powi(2);
        let opts = ShiftInvert { n_wanted, krylov_dim, tol, ..ShiftInvert::new(sigma) };
        let pairs = shift_invert(&self.a, &opts)?;
        let n_ex = self.problem.n_ex();
        let total = n_ex + self.problem.n_ey();
        Ok(pairs
            .into_iter()
            .filter(|p| p.value > 0.0)
            .map(|p| {
                let mut e = vec![0.0; total];
                for (&idx, &v) in self.active.iter().zip(&p.vector) {
                    e[idx] = v;
                }
                let sx: f64 = e[..n_ex].iter().map(|v| v * v).sum();
                let sy: f64 = e[n_ex..].iter().map(|v| v * v).sum();
                FdMode {
                    n_eff: p.value.sqrt() / self.k0,
                    te_fraction: sx / (sx + sy),
                    residual: p.residual,
                    e,
                }
            })
            .collect())
    }

    /// Number of sign changes of E_x along the y = y_row cut and the x = first-column cut,
    /// ignoring samples below 10⁻³ of the cut maximum.
    pub fn nodal_counts(&self, mode: &FdMode, row: usize) -> (usize, usize) {
        let (nx, ny) = (self.problem.nx, self.problem.ny);
        let ex = |i: usize, j: usize| mode.e[i * (ny + 1) + j];
        let count = |v: Vec<f64>| {
            let m = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let sig: Vec<f64> = v.into_iter().filter(|x| x.abs() > 1e-3 * m).collect();
            sig.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
        };
        let along_x = count((0..nx).map(|i| ex(i, row)).collect());
        let along_y = count((0..=ny).map(|j| ex(0, j)).collect());
        (along_x, along_y)
    }

    /// Reconstruct all six components at the cell centres, unfolding mirror
    /// symmetries at the low x / low y walls when requested.
    pub fn field(&self, mode: &FdMode, mirror_x: bool, mirror_y: bool) -> ModeField {
        let pr = &self.problem;
        let (nx, ny) = (pr.nx, pr.ny);
        let n_ex = pr.n_ex();
        let beta = self.k0 * mode.n_eff;
        let pv = self.p.matvec(&mode.e);
        let qv = self.q.matvec(&mode.e);
        let dv = self.d.matvec(&mode.e);
        let kv = self.k.matvec(&mode.e);
        let exv = &mode.e[..n_ex];
        let eyv = &mode.e[n_ex..];
        let ex = |i: usize, j: usize| i * (ny + 1) + j;
        let ey = |i: usize, j: usize| i * ny + j;

        // Cell-centred values on the computational rectangle.
        let cell = |i: usize, j: usize| -> [C64; 6] {
            let r = |v: f64| C64::new(v, 0.0);
            let ex_c = 0.5 * (exv[ex(i, j)] + exv[ex(i, j + 1)]);
            let hy_c = 0.5 * (pv[ex(i, j)] + pv[ex(i, j + 1)]) / beta;
            let ey_c = 0.5 * (eyv[ey(i, j)] + eyv[ey(i + 1, j)]);
            let hx_c = 0.5 * (qv[ey(i, j)] + qv[ey(i + 1, j)]) / beta;
            let dz = 0.25 * (dv[ex(i, j)] + dv[ex(i + 1, j)] + dv[ex(i, j + 1)] + dv[ex(i + 1, j + 1)]);
            let ez_c = C64::new(0.0, -dz / (self.k0 * beta));
            let hz_c = C64::new(0.0, kv[i * ny + j] / self.k0);
            [r(ex_c), r(ey_c), ez_c, r(hx_c), r(hy_c), hz_c]
        };

        // Mirror parities [ex, ey, ez, hx, hy, hz] across an x = const wall and a y = const wall.
        let px: [f64; 6] = match pr.walls[0] {
            Wall::Electric => [1.0, -1.0, -1.0, -1.0, 1.0, 1.0],
            Wall::Magnetic => [-1.0, 1.0, 1.0, 1.0, -1.0, -1.0],
        };
        let py: [f64; 6] = match pr.walls[2] {
            Wall::Electric => [-1.0, 1.0, -1.0, 1.0, -1.0, 1.0],
            Wall::Magnetic => [1.0, -1.0, 1.0, -1.0, 1.0, -1.0],
        };
        let (fnx, fny) = (if mirror_x { 2 * nx } else { nx }, if mirror_y { 2 * ny } else { ny });
        let x0 = if mirror_x { pr.x_start - nx as f64 * pr.hx } else { pr.x_start } + 0.5 * pr.hx;
        let y0 = if mirror_y { pr.y_start - ny as f64 * pr.hy } else { pr.y_start } + 0.5 * pr.hy;
        let mut f = ModeField::zeros(fnx, fny, pr.hx, pr.hy, x0, y0);
        for jj in 0..fny {
            let (j, sy) = if mirror_y {
                if jj < ny { (ny - 1 - jj, true) } else { (jj - ny, false) }
            } else {
                (jj, false)
            };
            for ii in 0..fnx {
                let (i, sx) = if mirror_x {
                    if ii < nx { (nx - 1 - ii, true) } else { (ii - nx, false) }
                } else {
                    (ii, false)
                };
                let mut c = cell(i, j);
                for (k, v) in c.iter_mut().enumerate() {
                    if sx {
                        *v *= px[k];
                    }
                    if sy {
                        *v *= py[k];
                    }
                }
                let idx = jj * fnx + ii;
                f.ex[idx] = c[0];
                f.ey[idx] = c[1];
                f.ez[idx] = c[2];
                f.hx[idx] = c[3];
                f.hy[idx] = c[4];
                f.hz[idx] = c[5];
            }
        }
        f.normalize();
        f
    }
}
