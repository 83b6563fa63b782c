//! Not-a-knot cubic interpolating spline.

use faer::linalg::solvers::Solve;
use faer::Mat;

/// Cubic spline through (x_k, y_k) with strictly increasing x.
///
/// Abscissae are mapped to [0, 1] internally for conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives with respect to the scaled abscissa.
    m: Vec<f64>,
    x0: f64,
    scale: f64,
}

impl CubicSpline {
    /// Requires at least four strictly increasing, finite abscissae.
    pub fn new(x: &[f64], y: &[f64]) -> Option<Self> {
        let n = x.len();
        if n < 4 || y.len() != n || x.windows(2).any(|w| !(w[1] > w[0])) || y.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let x0 = x[0];
        let scale = x[n - 1] - x[0];
        let t: Vec<f64> = x.iter().map(|v| (v - x0) / scale).collect();
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let mut a = Mat::<f64>::zeros(n, n);
        let mut rhs = Mat::<f64>::zeros(n, 1);
        // Third-derivative continuity at the second and penultimate knots.
        a[(0, 0)] = h[1];
        a[(0, 1)] = -(h[0] + h[1]);
        a[(0, 2)] = h[0];
        for i in 1..n - 1 {
            a[(i, i - 1)] = h[i - 1];
            a[(i, i)] = 2.0 * (h[i - 1] + h[i]);
            a[(i, i + 1)] = h[i];
            rhs[(i, 0)] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        a[(n - 1, n - 3)] = h[n - 2];
        a[(n - 1, n - 2)] = -(h[n - 3] + h[n - 2]);
        a[(n - 1, n - 1)] = h[n - 3];
        let lu = a.partial_piv_lu();
        lu.solve_in_place(rhs.as_mut());
        let m: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
        if m.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(Self { x: x.to_vec(), y: y.to_vec(), m, x0, scale })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.x.len();
        self.x.partition_point(|&v| v <= x).clamp(1, n - 1) - 1
    }

    fn scaled(&self, i: usize) -> (f64, f64) {
        ((self.x[i] - self.x0) / self.scale, (self.x[i + 1] - self.x0) / self.scale)
    }

    /// Value at x (extrapolates the end cubic outside the domain).
    pub fn eval(&self, x: f64) -> f64 {
        if let Ok(k) = self.x.binary_search_by(|v| v.total_cmp(&x)) {
            return self.y[k];
        }
        let i = self.interval(x);
        let (t0, t1) = self.scaled(i);
        let t = (x - self.x0) / self.scale;
        let h = t1 - t0;
        let (a, b) = (t1 - t, t - t0);
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        mi * a * a * a / (6.0 * h)
            + mj * b * b * b / (6.0 * h)
            + (self.y[i] / h - mi * h / 6.0) * a
            + (self.y[i + 1] / h - mj * h / 6.0) * b
    }

    /// First derivative dy/dx.
    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let (t0, t1) = self.scaled(i);
        let t = (x - self.x0) / self.scale;
        let h = t1 - t0;
        let (a, b) = (t1 - t, t - t0);
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        let dt = -mi * a * a / (2.0 * h) + mj * b * b / (2.0 * h) + (self.y[i + 1] - self.y[i]) / h
            - (mj - mi) * h / 6.0;
        dt / self.scale
    }
}
