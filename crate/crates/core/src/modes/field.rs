//! Sampled vector mode fields and the integrals derived from them.

use num_complex::Complex64 as C64;

use super::ModeError;

/// Six field components sampled at the centres of a uniform rectangular mesh.
///
/// Storage is row-major with `x` fastest: `idx = j * nx + i`. Coordinates are
/// in μm; magnetic fields are scaled by the vacuum impedance so that E and H
/// carry the same units. Normalization: ∬|E|² dx dy = 1 (μm²).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Centre of cell (0, 0).
    pub x0: f64,
    pub y0: f64,
    pub ex: Vec<C64>,
    pub ey: Vec<C64>,
    pub ez: Vec<C64>,
    pub hx: Vec<C64>,
    pub hy: Vec<C64>,
    pub hz: Vec<C64>,
}

impl ModeField {
    /// All-zero field on the given mesh.
    pub fn zeros(nx: usize, ny: usize, dx: f64, dy: f64, x0: f64, y0: f64) -> Self {
        let z = vec![C64::new(0.0, 0.0); nx * ny];
        Self {
            nx,
            ny,
            dx,
            dy,
            x0,
            y0,
            ex: z.clone(),
            ey: z.clone(),
            ez: z.clone(),
            hx: z.clone(),
            hy: z.clone(),
            hz: z,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    /// Whether two fields share an identical mesh.
    pub fn same_grid(&self, other: &ModeField) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.dx == other.dx
            && self.dy == other.dy
            && self.x0 == other.x0
            && self.y0 == other.y0
    }

    /// |E|² at every cell.
    pub fn intensity(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.ex[k].norm_sqr() + self.ey[k].norm_sqr() + self.ez[k].norm_sqr())
            .collect()
    }

    /// |E_t|² at every cell.
    pub fn transverse_intensity(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.ex[k].norm_sqr() + self.ey[k].norm_sqr())
            .collect()
    }

    /// ∬|E|² dx dy in μm².
    pub fn energy(&self) -> f64 {
        self.intensity().iter().sum::<f64>() * self.cell_area()
    }

    /// Rescale all components so that ∬|E|² = 1.
    pub fn normalize(&mut self) {
        let e = self.energy();
        if e > 0.0 {
            let s = 1.0 / e.sqrt();
            for v in [
                &mut self.ex,
                &mut self.ey,
                &mut self.ez,
                &mut self.hx,
                &mut self.hy,
                &mut self.hz,
            ] {
                v.iter_mut().for_each(|c| *c *= s);
            }
        }
    }

    /// Largest |E|² on the outermost ring of cells divided by the peak |E|².
    pub fn edge_ratio(&self) -> f64 {
        let inten = self.intensity();
        let peak = inten.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let (nx, ny) = (self.nx, self.ny);
        let mut edge: f64 = 0.0;
        for i in 0..nx {
            edge = edge.max(inten[i]).max(inten[(ny - 1) * nx + i]);
        }
        for j in 0..ny {
            edge = edge.max(inten[j * nx]).max(inten[j * nx + nx - 1]);
        }
        edge / peak
    }

    /// ∬|E_x|² / ∬(|E_x|² + |E_y|²)
    pub fn te_fraction(&self) -> f64 {
        let sx: f64 = self.ex.iter().map(|c| c.norm_sqr()).sum();
        let sy: f64 = self.ey.iter().map(|c| c.norm_sqr()).sum();
        if sx + sy == 0.0 {
            0.0
        } else {
            sx / (sx + sy)
        }
    }

    /// Time-averaged longitudinal Poynting flux density Re(E×H*)·ẑ / 2 per cell.
    pub fn poynting_z(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| 0.5 * (self.ex[k] * self.hy[k].conj() - self.ey[k] * self.hx[k].conj()).re)
            .collect()
    }

    /// Dominant transverse component with a sign chosen so that its sum is positive.
    pub(crate) fn dominant(&self) -> Vec<f64> {
        let comp = if self.te_fraction() >= 0.5 { &self.ex } else { &self.ey };
        // Rotate the global phase onto the real axis using the strongest sample.
        let piv = comp
            .iter()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .copied()
            .unwrap_or(C64::new(1.0, 0.0));
        let rot = if piv.norm() > 0.0 { piv.conj() / piv.norm() } else { C64::new(1.0, 0.0) };
        let mut v: Vec<f64> = comp.iter().map(|c| (c * rot).re).collect();
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    }

    fn transverse_real(&self) -> (Vec<f64>, Vec<f64>) {
        let piv = self
            .ex
            .iter()
            .chain(&self.ey)
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .copied()
            .unwrap_or(C64::new(1.0, 0.0));
        let rot = if piv.norm() > 0.0 { piv.conj() / piv.norm() } else { C64::new(1.0, 0.0) };
        let ex: Vec<f64> = self.ex.iter().map(|c| (c * rot).re).collect();
        let ey: Vec<f64> = self.ey.iter().map(|c| (c * rot).re).collect();
        let s = if ex.iter().sum::<f64>() + ey.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        (ex.iter().map(|v| s * v).collect(), ey.iter().map(|v| s * v).collect())
    }
}

/// A_eff = (∬|E_t|²)² / ∬|E_t|⁴, returned in m².
pub fn effective_area(field: &ModeField) -> f64 {
    let it = field.transverse_intensity();
    let s2: f64 = it.iter().sum::<f64>() * field.cell_area();
    let s4: f64 = it.iter().map(|v| v * v).sum::<f64>() * field.cell_area();
    if s4 == 0.0 {
        return 0.0;
    }
    s2 * s2 / s4 * 1e-12
}

fn check_grids(p: &ModeField, s: &ModeField, i: &ModeField) -> Result<(), ModeError> {
    if p.same_grid(s) && p.same_grid(i) {
        Ok(())
    } else {
        Err(ModeError::GridMismatch)
    }
}

/// Four-field overlap using the dominant transverse component of each mode,
///
/// f = ∬ E_p² E_s E_i / (∬E_p² · √(∬E_s² ∬E_i²)),
///
/// returned in m⁻².
pub fn overlap_integral(
    pump: &ModeField,
    signal: &ModeField,
    idler: &ModeField,
) -> Result<f64, ModeError> {
    check_grids(pump, signal, idler)?;
    let (p, s, i) = (pump.dominant(), signal.dominant(), idler.dominant());
    let da = pump.cell_area();
    let num: f64 = (0..p.len()).map(|k| p[k] * p[k] * s[k] * i[k]).sum::<f64>() * da;
    let np: f64 = p.iter().map(|v| v * v).sum::<f64>() * da;
    let ns: f64 = s.iter().map(|v| v * v).sum::<f64>() * da;
    let ni: f64 = i.iter().map(|v| v * v).sum::<f64>() * da;
    if np == 0.0 || ns == 0.0 || ni == 0.0 {
        return Ok(0.0);
    }
    Ok(num / (np * (ns * ni).sqrt()) * 1e12)
}

/// Vector variant of [`overlap_integral`] using full transverse fields:
/// f = ∬ (E_p·E_p)(E_s·E_i) / (∬|E_p|² · √(∬|E_s|² ∬|E_i|²)), in m⁻².
pub fn overlap_integral_vector(
    pump: &ModeField,
    signal: &ModeField,
    idler: &ModeField,
) -> Result<f64, ModeError> {
    check_grids(pump, signal, idler)?;
    let (px, py) = pump.transverse_real();
    let (sx, sy) = signal.transverse_real();
    let (ix, iy) = idler.transverse_real();
    let da = pump.cell_area();
    let num: f64 = (0..px.len())
        .map(|k| (px[k] * px[k] + py[k] * py[k]) * (sx[k] * ix[k] + sy[k] * iy[k]))
        .sum::<f64>()
        * da;
    let n = |x: &[f64], y: &[f64]| -> f64 {
        x.iter().zip(y).map(|(a, b)| a * a + b * b).sum::<f64>() * da
    };
    let (np, ns, ni) = (n(&px, &py), n(&sx, &sy), n(&ix, &iy));
    if np == 0.0 || ns == 0.0 || ni == 0.0 {
        return Ok(0.0);
    }
    Ok(num / (np * (ns * ni).sqrt()) * 1e12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(w: f64, h: f64, half: f64) -> ModeField {
        let n = (2.0 * half / h).round() as usize;
        let x0 = -half + h / 2.0;
        let mut f = ModeField::zeros(n, n, h, h, x0, x0);
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (f.x(i), f.y(j));
                f.ex[j * n + i] = C64::new((-2.0 * (x * x + y * y) / (w * w)).exp(), 0.0);
            }
        }
        f.normalize();
        f
    }

    #[test]
    fn gaussian_effective_area() {
        // Field amplitude exp(−2r²/w²) falls to 1/e² at r = w.
        let w = 1.3;
        let f = gaussian(w, 0.02, 6.0);
        let expected = std::f64::consts::PI * w * w / 2.0 * 1e-12;
        assert!((effective_area(&f) / expected - 1.0).abs() < 1e-6);
    }

    #[test]
    fn uniform_patch_area() {
        let mut f = ModeField::zeros(50, 40, 0.1, 0.1, 0.05, 0.05);
        for j in 10..30 {
            for i in 5..20 {
                f.ey[j * 50 + i] = C64::new(0.0, 2.0);
            }
        }
        let s = 20.0 * 15.0 * 0.01 * 1e-12;
        assert!((effective_area(&f) / s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_fields_overlap_is_inverse_area() {
        let f = gaussian(0.9, 0.03, 4.0);
        let ov = overlap_integral(&f, &f, &f).unwrap();
        assert!((ov * effective_area(&f) - 1.0).abs() < 1e-12);
        let ovv = overlap_integral_vector(&f, &f, &f).unwrap();
        assert!((ovv * effective_area(&f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_requires_identical_grids() {
        let a = gaussian(0.9, 0.03, 4.0);
        let b = gaussian(0.9, 0.04, 4.0);
        assert!(matches!(overlap_integral(&a, &b, &a), Err(ModeError::GridMismatch)));
    }

    #[test]
    fn normalization_and_edges() {
        let f = gaussian(0.5, 0.02, 4.0);
        assert!((f.energy() - 1.0).abs() < 1e-12);
        assert!(f.edge_ratio() < 1e-20);
    }
}
