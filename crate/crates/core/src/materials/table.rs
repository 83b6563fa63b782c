use serde::{Deserialize, Serialize};

use super::MaterialError;

/// Piecewise-linear table in wavelength, clamped (with a warning) outside its knots.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    knots: Vec<(f64, f64)>,
}

impl Table {
    pub fn empty() -> Self {
        Self { knots: Vec::new() }
    }

    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, MaterialError> {
        let finite = knots.iter().all(|(x, y)| x.is_finite() && y.is_finite());
        let increasing = knots.windows(2).all(|w| w[0].0 < w[1].0);
        if !finite || !increasing {
            return Err(MaterialError::NonIncreasingTable);
        }
        Ok(Self { knots })
    }

    /// Single-value table, constant at every wavelength.
    pub fn constant(value: f64) -> Self {
        Self {
            knots: vec![(1.0, value)],
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// Interpolated value, or `None` for an empty table.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let k = &self.knots;
        let (first, last) = (k.first()?, k.last()?);
        if k.len() == 1 {
            return Some(first.1);
        }
        if x <= first.0 {
            if x < first.0 {
                log::warn!("table query {x} below range [{}, {}]; clamped", first.0, last.0);
            }
            return Some(first.1);
        }
        if x >= last.0 {
            if x > last.0 {
                log::warn!("table query {x} above range [{}, {}]; clamped", first.0, last.0);
            }
            return Some(last.1);
        }
        let i = k.partition_point(|&(xk, _)| xk <= x);
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        if x == x0 {
            return Some(y0);
        }
        let t = (x - x0) / (x1 - x0);
        Some(y0 + t * (y1 - y0))
    }
}
