//! Run configurations shipped with the binary.

use crate::config::RunConfig;
use crate::error::CliError;

/// (name, TOML source).
pub const PRESETS: [(&str, &str); 4] = [
    ("wCH4", include_str!("../presets/wCH4.toml")),
    ("wNO2", include_str!("../presets/wNO2.toml")),
    ("wCOM", include_str!("../presets/wCOM.toml")),
    ("alibart", include_str!("../presets/alibart.toml")),
];

pub fn source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| n.eq_ignore_ascii_case(name)).map(|p| p.1)
}

pub fn load(name: &str) -> Result<RunConfig, CliError> {
    let text = source(name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
        CliError::Config(format!("unknown preset '{name}' (known: {})", known.join(", ")))
    })?;
    RunConfig::from_toml(text)
}
