//! Dispersive optical materials: refractive index, nonlinear index and
//! absorption versus vacuum wavelength.

mod builtin;
mod sellmeier;
mod table;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

pub use builtin::{
    air, pcf_cladding, silica, silicon, AIR, PCF_CLADDING_90, RESERVED_NAMES, SILICA, SILICON,
};
pub use sellmeier::SellmeierModel;
pub use table::Table;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("{material}: wavelength {wavelength} um outside validity range [{min}, {max}] um")]
    OutOfRange {
        material: String,
        wavelength: f64,
        min: f64,
        max: f64,
    },
    #[error("{material}: no {quantity} data")]
    NoData {
        material: String,
        quantity: &'static str,
    },
    #[error("mixture fill fraction {0} outside [0, 1]")]
    InvalidFill(f64),
    #[error("table knots must be finite and strictly increasing in wavelength")]
    NonIncreasingTable,
    #[error("unknown material '{0}'")]
    Unknown(String),
    #[error("material name '{0}' is reserved for a built-in model")]
    Reserved(String),
}

/// How a two-component mixture combines its constituents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingRule {
    /// n = f·n_a + (1−f)·n_b
    #[default]
    Index,
    /// n² = f·n_a² + (1−f)·n_b²
    Permittivity,
}

/// Linear-index description of a material.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexModel {
    Sellmeier(SellmeierModel),
    Fixed(f64),
    Mixture {
        a: Arc<MaterialModel>,
        b: Arc<MaterialModel>,
        /// Fill fraction of constituent `a`.
        fill: f64,
        rule: MixingRule,
    },
}

/// A named material with index, n₂ and absorption data. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialModel {
    pub name: String,
    pub index: IndexModel,
    /// n₂ (m²/W) versus λ (μm).
    pub n2: Table,
    /// Absorption α (dB/cm) versus λ (μm).
    pub absorption: Table,
}

impl MaterialModel {
    pub fn new(name: impl Into<String>, index: IndexModel) -> Result<Self, MaterialError> {
        if let IndexModel::Mixture { fill, .. } = &index {
            if !(0.0..=1.0).contains(fill) {
                return Err(MaterialError::InvalidFill(*fill));
            }
        }
        Ok(Self {
            name: name.into(),
            index,
            n2: Table::empty(),
            absorption: Table::empty(),
        })
    }

    pub fn with_n2(mut self, n2: Table) -> Self {
        self.n2 = n2;
        self
    }

    pub fn with_absorption(mut self, absorption: Table) -> Self {
        self.absorption = absorption;
        self
    }

    /// Two-component mixture with fill fraction `fill` of `a`.
    pub fn mixture(
        name: impl Into<String>,
        a: Arc<MaterialModel>,
        b: Arc<MaterialModel>,
        fill: f64,
        rule: MixingRule,
    ) -> Result<Self, MaterialError> {
        Self::new(name, IndexModel::Mixture { a, b, fill, rule })
    }

    /// Wavelength interval (μm) over which the index model is valid.
    pub fn validity(&self) -> (f64, f64) {
        match &self.index {
            IndexModel::Sellmeier(s) => s.validity,
            IndexModel::Fixed(_) => (0.0, f64::INFINITY),
            IndexModel::Mixture { a, b, .. } => {
                let (a0, a1) = a.validity();
                let (b0, b1) = b.validity();
                (a0.max(b0), a1.min(b1))
            }
        }
    }

    fn check_range(&self, lambda: f64) -> Result<(), MaterialError> {
        let (min, max) = self.validity();
        if lambda.is_finite() && lambda >= min && lambda <= max && lambda > 0.0 {
            Ok(())
        } else {
            Err(MaterialError::OutOfRange {
                material: self.name.clone(),
                wavelength: lambda,
                min,
                max,
            })
        }
    }

    /// Refractive index at vacuum wavelength `lambda` (μm).
    pub fn refractive_index(&self, lambda: f64) -> Result<f64, MaterialError> {
        self.check_range(lambda)?;
        Ok(match &self.index {
            IndexModel::Sellmeier(s) => s.index_unchecked(lambda),
            IndexModel::Fixed(n) => *n,
            IndexModel::Mixture { a, b, fill, rule } => {
                let na = a.refractive_index(lambda)?;
                let nb = b.refractive_index(lambda)?;
                match rule {
                    MixingRule::Index => fill * na + (1.0 - fill) * nb,
                    MixingRule::Permittivity => (fill * na * na + (1.0 - fill) * nb * nb).sqrt(),
                }
            }
        })
    }

    /// Closed-form dn/dλ in μm⁻¹.
    pub fn index_derivative(&self, lambda: f64) -> Result<f64, MaterialError> {
        self.check_range(lambda)?;
        Ok(match &self.index {
            IndexModel::Sellmeier(s) => s.derivative_unchecked(lambda),
            IndexModel::Fixed(_) => 0.0,
            IndexModel::Mixture { a, b, fill, rule } => {
                let da = a.index_derivative(lambda)?;
                let db = b.index_derivative(lambda)?;
                match rule {
                    MixingRule::Index => fill * da + (1.0 - fill) * db,
                    MixingRule::Permittivity => {
                        let na = a.refractive_index(lambda)?;
                        let nb = b.refractive_index(lambda)?;
                        let n = self.refractive_index(lambda)?;
                        (fill * na * da + (1.0 - fill) * nb * db) / n
                    }
                }
            }
        })
    }

    /// Relative permittivity n².
    pub fn permittivity(&self, lambda: f64) -> Result<f64, MaterialError> {
        self.refractive_index(lambda).map(|n| n * n)
    }

    /// Nonlinear index n₂ in m²/W; linear interpolation, clamped outside the table.
    pub fn nonlinear_index(&self, lambda: f64) -> Result<f64, MaterialError> {
        self.n2.eval(lambda).ok_or_else(|| MaterialError::NoData {
            material: self.name.clone(),
            quantity: "nonlinear index",
        })
    }

    /// Absorption in dB/cm; linear interpolation, clamped outside the table.
    pub fn absorption(&self, lambda: f64) -> Result<f64, MaterialError> {
        self.absorption
            .eval(lambda)
            .map(|a| a.max(0.0))
            .ok_or_else(|| MaterialError::NoData {
                material: self.name.clone(),
                quantity: "absorption",
            })
    }
}

/// Name → material registry. Built-in names are reserved.
#[derive(Debug, Clone)]
pub struct MaterialLibrary {
    models: BTreeMap<String, Arc<MaterialModel>>,
}

impl Default for MaterialLibrary {
    fn default() -> Self {
        Self::builtin()
    }
}

impl MaterialLibrary {
    /// Library containing `silicon`, `silica`, `air` and `pcf_cladding_90`.
    pub fn builtin() -> Self {
        let mut models = BTreeMap::new();
        for m in [silicon(), silica(), air(), pcf_cladding(0.9, MixingRule::Index)] {
            models.insert(m.name.clone(), Arc::new(m));
        }
        Self { models }
    }

    pub fn get(&self, name: &str) -> Result<Arc<MaterialModel>, MaterialError> {
        self.models
            .get(name)
            .cloned()
            .ok_or_else(|| MaterialError::Unknown(name.to_string()))
    }

    /// Register a user material; built-in names cannot be replaced.
    pub fn insert(&mut self, model: MaterialModel) -> Result<(), MaterialError> {
        if RESERVED_NAMES.contains(&model.name.as_str()) {
            return Err(MaterialError::Reserved(model.name));
        }
        self.models.insert(model.name.clone(), Arc::new(model));
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn air_is_unity() {
        assert_eq!(air().refractive_index(1.55).unwrap(), 1.0);
    }

    #[test]
    fn silica_at_telecom() {
        let n = silica().refractive_index(1.55).unwrap();
        assert!((n - 1.4440).abs() < 5e-4, "{n}");
    }

    #[test]
    fn pcf_cladding_is_index_mean() {
        let lib = MaterialLibrary::builtin();
        let clad = lib.get(PCF_CLADDING_90).unwrap();
        let ns = silica().refractive_index(0.7084).unwrap();
        let n = clad.refractive_index(0.7084).unwrap();
        assert!((n - (0.9 + 0.1 * ns)).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_is_error() {
        assert!(matches!(
            silicon().refractive_index(1.0),
            Err(MaterialError::OutOfRange { .. })
        ));
        assert!(silica().refractive_index(f64::NAN).is_err());
    }

    #[test]
    fn reserved_names_rejected() {
        let mut lib = MaterialLibrary::builtin();
        let m = MaterialModel::new(SILICON, IndexModel::Fixed(3.0)).unwrap();
        assert!(matches!(lib.insert(m), Err(MaterialError::Reserved(_))));
        let m = MaterialModel::new("polymer", IndexModel::Fixed(1.5)).unwrap();
        lib.insert(m).unwrap();
        assert_eq!(lib.get("polymer").unwrap().refractive_index(1.0).unwrap(), 1.5);
    }

    #[test]
    fn invalid_fill_rejected() {
        let r = MaterialModel::mixture(
            "bad",
            Arc::new(air()),
            Arc::new(silica()),
            1.5,
            MixingRule::Index,
        );
        assert_eq!(r.unwrap_err(), MaterialError::InvalidFill(1.5));
    }

    #[test]
    fn missing_tables_are_no_data() {
        let bare = MaterialModel::new("bare", IndexModel::Fixed(1.7)).unwrap();
        assert!(matches!(bare.nonlinear_index(1.0), Err(MaterialError::NoData { .. })));
        assert!(matches!(bare.absorption(1.0), Err(MaterialError::NoData { .. })));
        assert_eq!(air().nonlinear_index(1.0).unwrap(), 0.0);
    }
}
