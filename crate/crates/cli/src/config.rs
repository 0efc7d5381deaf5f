//! Run configuration: a strict TOML schema, command-line overrides and
//! validation into core parameter types.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinbattery_core::{DisorderSpec, DisorderTarget, Error as CoreError, ModelParams, OptimizerConfig, StatePrep};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default = "ground")]
    pub state: StatePrep,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSection>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal_map: Option<GridSection>,
    #[serde(default)]
    pub observables: ObservablesSection,
    #[serde(default)]
    pub scaling: ScalingSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn ground() -> StatePrep {
    StatePrep::Ground
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSection::default(),
            sweep: None,
            state: ground(),
            disorder: None,
            optimizer: OptimizerConfig::default(),
            thermal_map: None,
            observables: ObservablesSection::default(),
            scaling: ScalingSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Uniform-coupling chain; `xy_couplings` / `zz_couplings`, when present,
/// replace `j` / `delta` bond by bond.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub n_sites: usize,
    pub field_h: f64,
    pub gamma: f64,
    pub j: f64,
    pub delta: f64,
    pub omega: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xy_couplings: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zz_couplings: Option<Vec<f64>>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            n_sites: 8,
            field_h: 1.0,
            gamma: 0.0,
            j: 0.0,
            delta: 0.0,
            omega: 2.0,
            xy_couplings: None,
            zz_couplings: None,
        }
    }
}

impl ModelSection {
    pub fn params(&self) -> ModelParams {
        let mut p = ModelParams::uniform(self.n_sites, self.gamma, self.j, self.delta)
            .with_field(self.field_h)
            .with_omega(self.omega);
        if let Some(xy) = &self.xy_couplings {
            p.xy_couplings = xy.clone();
        }
        if let Some(zz) = &self.zz_couplings {
            p.zz_couplings = zz.clone();
        }
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SweepParameter {
    J,
    Delta,
    Gamma,
    FieldH,
    Omega,
    Beta,
    Sigma,
    DisorderMean,
}

impl SweepParameter {
    pub fn column(self) -> &'static str {
        match self {
            Self::J => "J_over_h",
            Self::Delta => "Delta_over_h",
            Self::Gamma => "gamma",
            Self::FieldH => "h",
            Self::Omega => "omega_over_h",
            Self::Beta => "beta",
            Self::Sigma => "sigma",
            Self::DisorderMean => "mean_over_h",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            parameter: SweepParameter::J,
            start: -2.0,
            stop: 2.0,
            step: 0.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSection {
    pub target: DisorderTarget,
    pub mean: f64,
    pub sigma: f64,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_realizations() -> usize {
    DisorderSpec::DEFAULT_REALIZATIONS
}

impl DisorderSection {
    pub fn spec(&self) -> DisorderSpec {
        DisorderSpec::new(self.target, self.mean, self.sigma)
            .with_realizations(self.realizations)
            .with_seed(self.seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EvalPoint {
    Initial,
    TStar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BiasChoice {
    None,
    Uniform,
    Staggered,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservablesSection {
    pub bias: BiasChoice,
    pub bias_eps: f64,
    pub delta_j: f64,
    pub at: EvalPoint,
}

impl Default for ObservablesSection {
    fn default() -> Self {
        Self {
            bias: BiasChoice::None,
            bias_eps: spinbattery_core::states::DEFAULT_BIAS_EPS,
            delta_j: spinbattery_core::observables::DEFAULT_DELTA_J,
            at: EvalPoint::Initial,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSection {
    pub sizes: Vec<usize>,
    pub j_c_infinity: f64,
    pub jump_factor: f64,
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self {
            sizes: vec![4, 6, 8, 10],
            j_c_infinity: 1.0,
            jump_factor: spinbattery_core::analysis::DEFAULT_JUMP_FACTOR,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Not recorded in the output header.
    #[serde(skip_serializing)]
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e)))
    }

    pub fn sweep(&self) -> SweepSection {
        self.sweep.unwrap_or_default()
    }

    /// Checks everything a command may touch; field names in messages use
    /// the config-file spelling.
    pub fn validate(&self) -> Result<(), CliError> {
        self.model.params().validate().map_err(|e| prefixed("model", e))?;
        if let Some(s) = &self.sweep {
            check_grid("sweep", s.start, s.stop, s.step)?;
        }
        if let Some(g) = &self.thermal_map {
            check_grid("thermal_map", g.start, g.stop, g.step)?;
            if g.start < 0.0 {
                return Err(field_error("thermal_map.start", "inverse temperature must be non-negative"));
            }
        }
        if let StatePrep::Thermal { beta } = self.state {
            if !(beta >= 0.0 && beta.is_finite()) {
                return Err(field_error("state.beta", format!("{beta} must be finite and non-negative")));
            }
        }
        if let Some(d) = &self.disorder {
            d.spec().validate().map_err(|e| prefixed("disorder", e))?;
        }
        self.optimizer.validate().map_err(|e| prefixed("optimizer", e))?;
        let obs = &self.observables;
        if !(obs.delta_j > 0.0 && obs.delta_j.is_finite()) {
            return Err(field_error("observables.delta_j", format!("{} must be positive", obs.delta_j)));
        }
        if !(obs.bias_eps >= 0.0 && obs.bias_eps.is_finite()) {
            return Err(field_error("observables.bias_eps", format!("{} must be non-negative", obs.bias_eps)));
        }
        let sc = &self.scaling;
        if sc.sizes.len() < 2 || sc.sizes.contains(&0) {
            return Err(field_error("scaling.sizes", "need at least two positive system sizes"));
        }
        if !(sc.jump_factor > 1.0) {
            return Err(field_error("scaling.jump_factor", format!("{} must exceed 1", sc.jump_factor)));
        }
        Ok(())
    }
}

pub fn field_error(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

fn check_grid(section: &str, start: f64, stop: f64, step: f64) -> Result<(), CliError> {
    for (name, v) in [("start", start), ("stop", stop), ("step", step)] {
        if !v.is_finite() {
            return Err(field_error(&format!("{section}.{name}"), format!("{v} is not finite")));
        }
    }
    if !(step > 0.0) {
        return Err(field_error(&format!("{section}.step"), format!("must be positive, got {step}")));
    }
    if !(start < stop) {
        return Err(field_error(
            &format!("{section}.start"),
            format!("must be below {section}.stop ({start} >= {stop})"),
        ));
    }
    Ok(())
}

fn prefixed(section: &str, err: CoreError) -> CliError {
    match err {
        CoreError::InvalidParameter { field, reason } => field_error(&format!("{section}.{}", config_name(field)), reason),
        CoreError::TooManySites { n_sites, max_sites } => field_error(
            &format!("{section}.n_sites"),
            format!("{n_sites} exceeds the supported maximum of {max_sites}"),
        ),
        other => CliError::Config(format!("{section}: {other}")),
    }
}

fn config_name(core_field: &str) -> &str {
    match core_field {
        "anisotropy_gamma" => "gamma",
        "charging_omega" => "omega",
        "n_realizations" => "realizations",
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<RunConfig>("[model]\nn_site = 4\n").unwrap_err();
        assert!(err.to_string().contains("n_site"));
        assert!(toml::from_str::<RunConfig>("[bogus]\n").is_err());
    }

    #[test]
    fn negative_step_names_the_field() {
        let cfg: RunConfig =
            toml::from_str("[sweep]\nparameter = \"j\"\nstart = -2.0\nstop = 2.0\nstep = -0.05\n").unwrap();
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("sweep.step"), "{msg}");
    }

    #[test]
    fn core_field_names_are_translated() {
        let cfg: RunConfig = toml::from_str("[model]\ngamma = 1.5\n").unwrap();
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("model.gamma"), "{msg}");
    }

    #[test]
    fn thermal_state_and_disorder_parse() {
        let cfg: RunConfig = toml::from_str(
            "state = { kind = \"thermal\", beta = 2.0 }\n[disorder]\ntarget = \"zz\"\nmean = 1.0\nsigma = 0.5\nseed = 9\n",
        )
        .unwrap();
        assert_eq!(cfg.state, StatePrep::Thermal { beta: 2.0 });
        let spec = cfg.disorder.unwrap().spec();
        assert_eq!(spec.n_realizations, 5000);
        assert_eq!(spec.master_seed, 9);
    }

    #[test]
    fn resolved_config_round_trips_through_toml() {
        let mut cfg = RunConfig::default();
        cfg.sweep = Some(SweepSection::default());
        cfg.model.xy_couplings = Some(vec![0.5; 7]);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(toml::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
