//! TOML study configurations.

use std::path::Path;

use fvlab_core::consistency::StudyConfig;

/// Reads and validates a configuration file.
pub fn load(path: &Path) -> Result<StudyConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let cfg = parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(cfg)
}

pub fn parse(text: &str) -> Result<StudyConfig, String> {
    let cfg: StudyConfig = toml::from_str(text).map_err(|e| e.to_string())?;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

#[cfg(test)]
pub fn to_toml(cfg: &StudyConfig) -> String {
    toml::to_string(cfg).expect("study configurations serialise to TOML")
}
