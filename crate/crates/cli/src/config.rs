//! Run configuration: JSON file plus command-line overrides.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use shellstat_core::{
    EnergyShell, EnergySpectrum, MeasureSpec, SamplerConfig, ScalingParams, WalkConfig,
    DEFAULT_FIT_TOL,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format `{other}` (expected table|json|csv)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Table => "table",
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Energy residual accepted by the inverse-temperature fit.
    pub fit_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fit_tol: DEFAULT_FIT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSettings {
    pub n_min: usize,
    pub n_max: usize,
    pub trials: usize,
    pub energy_quantile: f64,
}

impl Default for ScalingSettings {
    fn default() -> Self {
        Self {
            n_min: 3,
            n_max: 8,
            trials: 30,
            energy_quantile: 0.25,
        }
    }
}

/// Everything a subcommand needs. Every field has a default, so a config file
/// may set any subset; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub levels: Vec<f64>,
    pub total_energy: Option<f64>,
    /// Energy grid for `sweep`.
    pub energies: Vec<f64>,
    pub measure: MeasureSpec,
    pub sampler: SamplerConfig,
    pub walk: WalkConfig,
    pub scaling: ScalingSettings,
    /// Unset means the subcommand's default (table, or csv for sweep/scaling).
    pub output_format: Option<OutputFormat>,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            levels: Vec::new(),
            total_energy: None,
            energies: Vec::new(),
            measure: MeasureSpec::AmplitudeCoordinate,
            sampler: SamplerConfig::default(),
            walk: WalkConfig::default(),
            scaling: ScalingSettings::default(),
            output_format: None,
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn spectrum(&self) -> Result<EnergySpectrum, CliError> {
        if self.levels.is_empty() {
            return Err(CliError::Config("levels are required (--levels or config `levels`)".into()));
        }
        EnergySpectrum::new(self.levels.clone()).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn shell(&self) -> Result<EnergyShell, CliError> {
        let spectrum = self.spectrum()?;
        let energy = self
            .total_energy
            .ok_or_else(|| CliError::Config("total energy is required (--energy or config `total_energy`)".into()))?;
        Ok(EnergyShell::new(spectrum, energy)?)
    }

    pub fn scaling_params(&self) -> ScalingParams {
        ScalingParams {
            n_min: self.scaling.n_min,
            n_max: self.scaling.n_max,
            trials: self.scaling.trials,
            energy_quantile: self.scaling.energy_quantile,
            measure: self.measure,
            sampler: self.sampler.clone(),
            seed: self.sampler.seed,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.sampler.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.tolerances.fit_tol > 0.0) {
            return Err(CliError::Config("fit_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Parses a comma-separated list of reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("`{}`: {e}", t.trim()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_fills_defaults() {
        let c = RunConfig::from_json(r#"{"levels": [0, 5, 8], "total_energy": 2, "sampler": {"seed": 7}}"#).unwrap();
        assert_eq!(c.levels, vec![0.0, 5.0, 8.0]);
        assert_eq!(c.sampler.seed, 7);
        assert_eq!(c.sampler.samples, SamplerConfig::default().samples);
        assert_eq!(c.measure, MeasureSpec::AmplitudeCoordinate);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_json(r#"{"levelz": [0, 1]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"sampler": {"sample": 3}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"walk": {"stepscale": 3}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"measure": "uniform"}"#).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("0, 5,8").unwrap(), vec![0.0, 5.0, 8.0]);
        assert_eq!(parse_list("").unwrap(), Vec::<f64>::new());
        assert!(parse_list("0,x").is_err());
    }

    #[test]
    fn missing_inputs_are_config_errors() {
        let c = RunConfig::default();
        assert!(matches!(c.shell(), Err(CliError::Config(_))));
        let c = RunConfig {
            levels: vec![0.0, 5.0, 8.0],
            ..RunConfig::default()
        };
        assert!(matches!(c.shell(), Err(CliError::Config(_))));
    }
}
