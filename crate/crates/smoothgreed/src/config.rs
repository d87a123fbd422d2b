//! Optional TOML defaults for every command. Flags take precedence over the
//! file, and the file over built-in defaults.

use std::path::Path;

use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub design: DesignDefaults,
    #[serde(default)]
    pub generate: GenerateDefaults,
    #[serde(default)]
    pub run: RunDefaults,
    #[serde(default)]
    pub figures: FigureDefaults,
    #[serde(default)]
    pub sweep: SweepDefaults,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignDefaults {
    pub objective: Option<String>,
    pub horizon: Option<f64>,
    pub grid: Option<usize>,
    pub variant: Option<String>,
    pub c: Option<f64>,
    pub tail: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateDefaults {
    pub family: Option<String>,
    pub n: Option<usize>,
    pub phase_len: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub density: Option<f64>,
    pub b: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDefaults {
    pub objective: Option<String>,
    pub smoothing: Option<String>,
    pub algo: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureDefaults {
    pub grid: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDefaults {
    pub family: Option<String>,
    pub n_list: Option<Vec<usize>>,
    pub phase_lens: Option<Vec<usize>>,
    pub algo: Option<String>,
    pub smoothing: Option<String>,
    pub objective: Option<String>,
    pub seeds: Option<u64>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub density: Option<f64>,
    pub b: Option<f64>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        toml::from_str(&text).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))
    }
}
