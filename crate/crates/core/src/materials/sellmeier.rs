use serde::{Deserialize, Serialize};

/// n²(λ) = 1 + A + Σ_k B_k λ² / (λ² − C_k), λ in μm, C_k in μm².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierModel {
    /// (B_k, C_k) pairs.
    pub terms: Vec<(f64, f64)>,
    /// Constant offset A.
    pub constant_offset: f64,
    /// Validity interval (λ_min, λ_max) in μm.
    pub validity: (f64, f64),
}

impl SellmeierModel {
    /// Build from resonance wavelengths λ_k (μm) rather than C_k = λ_k².
    pub fn from_resonances(terms: &[(f64, f64)], validity: (f64, f64)) -> Self {
        Self {
            terms: terms.iter().map(|&(b, l)| (b, l * l)).collect(),
            constant_offset: 0.0,
            validity,
        }
    }

    fn n_squared(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        1.0 + self.constant_offset
            + self
                .terms
                .iter()
                .map(|&(b, c)| b * l2 / (l2 - c))
                .sum::<f64>()
    }

    pub(crate) fn index_unchecked(&self, lambda: f64) -> f64 {
        self.n_squared(lambda).sqrt()
    }

    /// dn/dλ = (1/2n)·Σ −2 B C λ / (λ² − C)².
    pub(crate) fn derivative_unchecked(&self, lambda: f64) -> f64 {
        let l2 = lambda * lambda;
        let dn2: f64 = self
            .terms
            .iter()
            .map(|&(b, c)| -2.0 * b * c * lambda / ((l2 - c) * (l2 - c)))
            .sum();
        dn2 / (2.0 * self.index_unchecked(lambda))
    }
}
