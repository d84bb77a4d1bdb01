//! Experiment configuration: one TOML (or JSON) file per run.

use std::fmt;
use std::path::{Path, PathBuf};

use bigjump_core::asymptotics::StoppedMode;
use bigjump_core::simulate::SmallJumps;
use bigjump_core::tailmath::DiagnosticThresholds;
use bigjump_core::{HeavyDistribution, ProcessSpec};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Tails,
    Rw,
    Renewal,
    Levy,
    Stopped,
    Bigjump,
    Ruin,
    Willekens,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Tails,
        Scenario::Rw,
        Scenario::Renewal,
        Scenario::Levy,
        Scenario::Stopped,
        Scenario::Bigjump,
        Scenario::Ruin,
        Scenario::Willekens,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Tails => "tails",
            Scenario::Rw => "rw",
            Scenario::Renewal => "renewal",
            Scenario::Levy => "levy",
            Scenario::Stopped => "stopped",
            Scenario::Bigjump => "bigjump",
            Scenario::Ruin => "ruin",
            Scenario::Willekens => "willekens",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::Tails => "convolution, S* and light-long tail diagnostics for `law`",
            Scenario::Rw => "random-walk maximum over n steps vs Monte Carlo",
            Scenario::Renewal => "compound renewal maximum over [0, t] vs Monte Carlo",
            Scenario::Levy => "jump-diffusion maximum over [0, t] vs Monte Carlo",
            Scenario::Stopped => "maximum at an independent random time `tau` vs Monte Carlo",
            Scenario::Bigjump => "probability of a single big jump given a high maximum",
            Scenario::Ruin => "ruin probability with premium rate and claims vs Monte Carlo",
            Scenario::Willekens => "ratio P(M_t > x)/P(X_t > x) at fixed t",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilyConfig {
    Pareto { alpha: f64, xm: f64 },
    Weibull { shape: f64, scale: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
    Deterministic { value: f64 },
}

/// A law `Z − shift`, optionally replaced by its positive part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistConfig {
    #[serde(flatten)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub positive_part: bool,
}

impl DistConfig {
    pub fn build(&self) -> Result<HeavyDistribution> {
        let base = match self.family {
            FamilyConfig::Pareto { alpha, xm } => HeavyDistribution::pareto(alpha, xm),
            FamilyConfig::Weibull { shape, scale } => HeavyDistribution::weibull(shape, scale),
            FamilyConfig::Lognormal { mu, sigma } => HeavyDistribution::lognormal(mu, sigma),
            FamilyConfig::Exponential { rate } => HeavyDistribution::exponential(rate),
            FamilyConfig::Deterministic { value } => HeavyDistribution::deterministic(value),
        }?;
        let d = base.shifted(self.shift)?;
        Ok(if self.positive_part { d.positive_part() } else { d })
    }
}

fn zero() -> f64 {
    0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessConfig {
    RandomWalk {
        jump: DistConfig,
    },
    CompoundPoisson {
        jump: DistConfig,
        lambda: f64,
        #[serde(default = "zero")]
        drift: f64,
    },
    CompoundRenewal {
        jump: DistConfig,
        interarrival: DistConfig,
        #[serde(default = "zero")]
        drift: f64,
    },
    JumpDiffusion {
        jump: DistConfig,
        lambda: f64,
        #[serde(default = "zero")]
        sigma: f64,
        drift: f64,
        #[serde(default)]
        small_jumps: Option<SmallJumps>,
    },
}

impl ProcessConfig {
    pub fn build(&self) -> Result<ProcessSpec> {
        Ok(match self {
            ProcessConfig::RandomWalk { jump } => ProcessSpec::random_walk(jump.build()?)?,
            ProcessConfig::CompoundPoisson { jump, lambda, drift } => {
                ProcessSpec::compound_poisson(jump.build()?, *lambda, *drift)?
            }
            ProcessConfig::CompoundRenewal {
                jump,
                interarrival,
                drift,
            } => ProcessSpec::compound_renewal(jump.build()?, interarrival.build()?, *drift)?,
            ProcessConfig::JumpDiffusion {
                jump,
                lambda,
                sigma,
                drift,
                small_jumps,
            } => {
                let spec = ProcessSpec::jump_diffusion(jump.build()?, *lambda, *sigma, *drift)?;
                match small_jumps {
                    Some(s) => spec.with_small_jumps(s.clone())?,
                    None => spec,
                }
            }
        })
    }
}

/// A time horizon; written as a number or as `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Horizon(pub f64);

impl Serialize for Horizon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Horizon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Horizon(v)),
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Inf" | "∞") => Ok(Horizon(f64::INFINITY)),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("horizon must be a number or \"inf\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub subexponential: f64,
    pub strong_subexponential: f64,
    pub light_long: f64,
    /// Acceptance band for `p̂/asym`.
    pub band: (f64, f64),
    /// Fraction of eligible comparison rows that must pass.
    pub required_fraction: f64,
    /// Allowed shortfall of the big-jump estimate below its bound.
    pub big_jump_slack: f64,
    pub min_conditioning_hits: u64,
    /// Terminal hits needed before a max/terminal ratio is judged.
    pub min_ratio_hits: u64,
}

impl Default for Thresholds {
    fn default() -> Self {
        let d = DiagnosticThresholds::default();
        Thresholds {
            subexponential: d.subexponential,
            strong_subexponential: d.strong_subexponential,
            light_long: d.light_long,
            band: (0.75, 1.25),
            required_fraction: 1.0,
            big_jump_slack: 0.05,
            min_conditioning_hits: 500,
            min_ratio_hits: 100,
        }
    }
}

impl Thresholds {
    pub fn diagnostics(&self) -> DiagnosticThresholds {
        DiagnosticThresholds {
            subexponential: self.subexponential,
            strong_subexponential: self.strong_subexponential,
            light_long: self.light_long,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BigJumpConfig {
    /// Defaults to `0.1·|d|` with `d` the drift per unit time.
    pub epsilon: Option<f64>,
    /// Band offset `A`; calibrated from pilot paths when absent.
    #[serde(rename = "A")]
    pub a_band: Option<f64>,
    /// Pilot coverage used to calibrate `A` (default 0.95).
    pub coverage: Option<f64>,
    pub pilot_paths: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinConfig {
    pub claims: DistConfig,
    /// Premium rate `c`.
    pub premium: f64,
    /// Interarrival law, exponential with rate 1 when absent.
    #[serde(default)]
    pub interarrival: Option<DistConfig>,
    /// Horizon standing in for `t = ∞` in the simulation.
    #[serde(default)]
    pub proxy_horizon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// File stem; the scenario name when absent.
    pub name: Option<String>,
    pub format: OutputFormat,
}

fn default_paths() -> u64 {
    100_000
}

fn default_mode() -> StoppedMode {
    StoppedMode::Mean
}

fn default_ent_paths() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub process: Option<ProcessConfig>,
    /// Law under test in the `tails` scenario.
    #[serde(default)]
    pub law: Option<DistConfig>,
    /// Light-tailed law for the light ⊗ long check.
    #[serde(default)]
    pub light: Option<DistConfig>,
    /// Random horizon in the `stopped` scenario.
    #[serde(default)]
    pub tau: Option<DistConfig>,
    #[serde(default = "default_mode")]
    pub stopped_mode: StoppedMode,
    #[serde(default)]
    pub ruin: Option<RuinConfig>,
    pub x_grid: Vec<f64>,
    #[serde(default)]
    pub t_grid: Vec<Horizon>,
    #[serde(default = "default_paths")]
    pub n_paths: u64,
    /// Paths for `E N_t` when it has no closed form.
    #[serde(default = "default_ent_paths")]
    pub ent_paths: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub bigjump: BigJumpConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl ExperimentConfig {
    /// Reads a config; `.json` files are JSON, everything else TOML.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))
    }

    pub fn t_values(&self) -> Vec<f64> {
        self.t_grid.iter().map(|h| h.0).collect()
    }

    fn require<T>(&self, field: &Option<T>, name: &str) -> Result<()> {
        if field.is_none() {
            return Err(CliError::Schema(format!("scenario {} needs a `{name}` block", self.scenario)));
        }
        Ok(())
    }

    /// Schema checks that do not need any simulation.
    pub fn validate(&self) -> Result<()> {
        let schema = |m: String| Err(CliError::Schema(m));
        if self.x_grid.is_empty() {
            return schema("x_grid must not be empty".into());
        }
        if !self.x_grid.iter().all(|x| x.is_finite()) || !strictly_increasing(&self.x_grid) {
            return schema("x_grid must be finite and strictly increasing".into());
        }
        let ts = self.t_values();
        if !ts.iter().all(|&t| t > 0.0 && !t.is_nan()) || !strictly_increasing(&ts) {
            return schema("t_grid must be positive and strictly increasing".into());
        }
        if self.n_paths == 0 {
            return schema("n_paths must be >= 1".into());
        }
        let b = self.thresholds.band;
        if !(b.0 < b.1) || !(0.0..=1.0).contains(&self.thresholds.required_fraction) {
            return schema("thresholds.band must be increasing and required_fraction in [0, 1]".into());
        }
        let needs_t = !matches!(self.scenario, Scenario::Tails | Scenario::Stopped);
        if needs_t && ts.is_empty() {
            return schema(format!("scenario {} needs a nonempty t_grid", self.scenario));
        }
        let finite_t = !matches!(self.scenario, Scenario::Tails | Scenario::Stopped | Scenario::Ruin);
        if finite_t && ts.iter().any(|t| t.is_infinite()) {
            return schema(format!("scenario {} simulates up to each t; t_grid must be finite", self.scenario));
        }
        match self.scenario {
            Scenario::Tails => self.require(&self.law, "law")?,
            Scenario::Ruin => self.require(&self.ruin, "ruin")?,
            Scenario::Stopped => {
                self.require(&self.process, "process")?;
                self.require(&self.tau, "tau")?;
            }
            _ => self.require(&self.process, "process")?,
        }
        if let Some(p) = &self.process {
            let kind_ok = match self.scenario {
                Scenario::Rw => matches!(p, ProcessConfig::RandomWalk { .. }),
                Scenario::Renewal => {
                    matches!(p, ProcessConfig::CompoundPoisson { .. } | ProcessConfig::CompoundRenewal { .. })
                }
                Scenario::Levy => matches!(p, ProcessConfig::JumpDiffusion { .. }),
                Scenario::Stopped | Scenario::Bigjump => !matches!(p, ProcessConfig::RandomWalk { .. }),
                _ => true,
            };
            if !kind_ok {
                return schema(format!("scenario {} does not accept this process kind", self.scenario));
            }
            if self.scenario == Scenario::Rw && ts.iter().any(|t| t.fract() != 0.0) {
                return schema("random-walk horizons are step counts and must be integers".into());
            }
        }
        if let Some(c) = self.bigjump.coverage {
            if !(c > 0.0 && c < 1.0) {
                return schema(format!("bigjump.coverage must be in (0, 1), got {c}"));
            }
        }
        Ok(())
    }
}
