//! Scenario presets shipped with the crate.

use super::config::ScenarioConfig;
use super::HarnessError;

pub const NAMES: [&str; 6] = [
    "table1_pdl0",
    "table1_pdl1",
    "table1_pdl3",
    "fig4",
    "fig6",
    "exp_25km",
];

/// Raw TOML text of a preset.
pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "table1_pdl0" => include_str!("../../presets/table1_pdl0.toml"),
        "table1_pdl1" => include_str!("../../presets/table1_pdl1.toml"),
        "table1_pdl3" => include_str!("../../presets/table1_pdl3.toml"),
        "fig4" => include_str!("../../presets/fig4.toml"),
        "fig6" => include_str!("../../presets/fig6.toml"),
        "exp_25km" => include_str!("../../presets/exp_25km.toml"),
        _ => return None,
    })
}

pub fn load(name: &str) -> Result<ScenarioConfig, HarnessError> {
    let text = source(name).ok_or_else(|| {
        HarnessError::Config(format!(
            "unknown preset `{name}` (available: {})",
            NAMES.join(", ")
        ))
    })?;
    ScenarioConfig::from_toml_str(text)
}
