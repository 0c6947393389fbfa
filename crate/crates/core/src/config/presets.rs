//! Built-in scenarios.

use super::{ConfigError, Scenario};

pub const NAMES: [&str; 2] = ["fig2", "ortho_h2"];

/// TOML source of a built-in scenario.
pub fn text(name: &str) -> Result<&'static str, ConfigError> {
    match name {
        "fig2" => Ok(include_str!("../../presets/fig2.toml")),
        "ortho_h2" => Ok(include_str!("../../presets/ortho_h2.toml")),
        _ => Err(ConfigError::UnknownPreset(name.to_string())),
    }
}

pub fn load(name: &str) -> Result<Scenario, ConfigError> {
    Scenario::from_toml(text(name)?)
}
