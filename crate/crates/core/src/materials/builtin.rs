use std::sync::Arc;

use super::{IndexModel, MaterialModel, MixingRule, SellmeierModel, Table};

pub const SILICON: &str = "silicon";
pub const SILICA: &str = "silica";
pub const AIR: &str = "air";
pub const PCF_CLADDING_90: &str = "pcf_cladding_90";
pub const RESERVED_NAMES: [&str; 4] = [SILICON, SILICA, AIR, PCF_CLADDING_90];

/// Crystalline silicon, three-term Sellmeier valid over 1.36–11 μm.
///
/// n₂ is calibrated at the three pump wavelengths of the shipped SOI designs;
/// absorption combines the mid-IR signal values with the telecom value.
pub fn silicon() -> MaterialModel {
    let index = SellmeierModel::from_resonances(
        &[
            (10.668_429_3, 0.301_516_485),
            (0.003_043_474_8, 1.134_751_15),
            (1.541_334_08, 1104.0),
        ],
        (1.36, 11.0),
    );
    let n2 = Table::new(vec![
        (2.100, 20.78 * 2.100e-6 / (2.0 * std::f64::consts::PI * 1.05e12)),
        (2.151, 55.74 * 2.151e-6 / (2.0 * std::f64::consts::PI * 2.90e12)),
        (2.210, 16.66 * 2.210e-6 / (2.0 * std::f64::consts::PI * 9.69e11)),
    ])
    .expect("static table");
    let absorption = Table::new(vec![(1.55, 0.1), (3.265, 0.001), (3.461, 0.001), (3.905, 0.002)])
        .expect("static table");
    MaterialModel::new(SILICON, IndexModel::Sellmeier(index))
        .expect("static model")
        .with_n2(n2)
        .with_absorption(absorption)
}

/// Fused silica, three-term Sellmeier; also used for the buried oxide.
///
/// The fit is applied out to 6.7 μm to cover the mid-IR signal band.
pub fn silica() -> MaterialModel {
    let index = SellmeierModel::from_resonances(
        &[
            (0.696_166_3, 0.068_404_3),
            (0.407_942_6, 0.116_241_4),
            (0.897_479_4, 9.896_161),
        ],
        (0.21, 6.7),
    );
    let absorption =
        Table::new(vec![(3.265, 0.7), (3.461, 1.0), (3.905, 7.3)]).expect("static table");
    MaterialModel::new(SILICA, IndexModel::Sellmeier(index))
        .expect("static model")
        .with_n2(Table::constant(2.6e-20))
        .with_absorption(absorption)
}

pub fn air() -> MaterialModel {
    MaterialModel::new(AIR, IndexModel::Fixed(1.0))
        .expect("static model")
        .with_n2(Table::constant(0.0))
        .with_absorption(Table::constant(0.0))
}

/// Air-hole photonic-crystal cladding idealized as a homogeneous air/silica
/// mixture with air fill fraction `air_fill`.
pub fn pcf_cladding(air_fill: f64, rule: MixingRule) -> MaterialModel {
    let name = if air_fill == 0.9 && rule == MixingRule::Index {
        PCF_CLADDING_90.to_string()
    } else {
        format!("pcf_cladding_{}_{:?}", air_fill, rule).to_lowercase()
    };
    let silica = silica();
    let n2 = silica.n2.clone();
    MaterialModel::mixture(name, Arc::new(air()), Arc::new(silica), air_fill, rule)
        .expect("fill fraction in range")
        .with_n2(n2)
}
