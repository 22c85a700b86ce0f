//! Run configuration: built-in defaults, then an optional TOML file, then
//! command-line flags.
//!
//! The file is flat; every key is optional:
//!
//! ```toml
//! model = "ball"            # ball | unicycle | scara | arm4dof
//! alg = "sss"               # pfm | sma | ssa | bfm | sss | all
//! human = "passive"         # passive | goal-seeking | interactive | stationary
//! dmin = 1.5
//! k = 1.0
//! c1 = 1.0
//! c2 = 3.0
//! eta = 0.0
//! lambda = -1.0
//! seed = 0
//! count = 40
//! perfect_sensing = false
//! position_sigma = 0.01
//! substeps = 10
//! safety_threshold = 2.0
//! ```

use std::path::Path;

use anyhow::{bail, Context};
use serde::Deserialize;

use safectl::benchmark::{EpisodeSettings, HumanKind, HumanModel};
use safectl::controllers::{Algorithm, ControllerConfig};
use safectl::dynamics::ModelKind;
use safectl::safety_index::SafetyIndexParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmChoice {
    One(Algorithm),
    All,
}

impl AlgorithmChoice {
    pub fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgorithmChoice::One(a) => vec![a],
            AlgorithmChoice::All => Algorithm::ALL.to_vec(),
        }
    }
}

impl std::str::FromStr for AlgorithmChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(AlgorithmChoice::All);
        }
        s.parse().map(AlgorithmChoice::One).map_err(|e: safectl::Error| e.to_string())
    }
}

/// Every overridable setting. `None` means "not given here".
#[derive(Debug, Clone, Default, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Robot model: ball, unicycle, scara or arm4dof.
    #[arg(long)]
    #[serde(default, deserialize_with = "parsed")]
    pub model: Option<ModelKind>,
    /// Safe control law, or `all`.
    #[arg(long)]
    #[serde(default, deserialize_with = "parsed")]
    pub alg: Option<AlgorithmChoice>,
    /// Human model: passive, goal-seeking, interactive or stationary.
    #[arg(long)]
    #[serde(default, deserialize_with = "parsed")]
    pub human: Option<HumanKind>,
    /// Safety margin d_min, meters.
    #[arg(long)]
    pub dmin: Option<f64>,
    /// Weight of d_dot in the safety index.
    #[arg(long)]
    pub k: Option<f64>,
    /// PFM gain (> 0).
    #[arg(long)]
    pub c1: Option<f64>,
    /// SMA gain (> 0).
    #[arg(long)]
    pub c2: Option<f64>,
    /// SSA slack (<= 0).
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// BFM/SSS decay rate (< 0).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Master seed for generated scenarios.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of generated scenarios.
    #[arg(long)]
    pub count: Option<usize>,
    /// Use ground-truth states instead of the Kalman filter.
    #[arg(long, default_missing_value = "true", num_args = 0..=1)]
    pub perfect_sensing: Option<bool>,
    /// Position measurement noise, meters.
    #[arg(long)]
    pub position_sigma: Option<f64>,
    /// Integrator substeps per control frame.
    #[arg(long)]
    pub substeps: Option<usize>,
    /// Safety-score distance threshold, meters.
    #[arg(long)]
    pub safety_threshold: Option<f64>,
}

fn parsed<'de, D, T>(d: D) -> Result<Option<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    let s = String::deserialize(d)?;
    s.parse().map(Some).map_err(serde::de::Error::custom)
}

impl Overrides {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// `other` wins wherever it is set.
    pub fn merged(self, other: Overrides) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { Self { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(model, alg, human, dmin, k, c1, c2, eta, lambda, seed, count, perfect_sensing, position_sigma, substeps, safety_threshold)
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelKind,
    pub algorithms: AlgorithmChoice,
    pub controller: ControllerConfig,
    pub seed: u64,
    pub count: usize,
    pub episode: EpisodeSettings,
    pub safety_threshold: f64,
}

impl RunConfig {
    pub fn resolve(o: &Overrides) -> anyhow::Result<Self> {
        let algorithms = o.alg.unwrap_or(AlgorithmChoice::One(Algorithm::Sss));
        let first = algorithms.algorithms()[0];
        let defaults = ControllerConfig::new(first, SafetyIndexParams::default());
        let safety = SafetyIndexParams::new(
            o.dmin.unwrap_or(defaults.safety.d_min),
            o.k.unwrap_or(defaults.safety.k),
        )?;
        let controller = ControllerConfig {
            c1: o.c1.unwrap_or(defaults.c1),
            c2: o.c2.unwrap_or(defaults.c2),
            eta: o.eta.unwrap_or(defaults.eta),
            lambda: o.lambda.unwrap_or(defaults.lambda),
            ..ControllerConfig::new(first, safety)
        };
        controller.validate()?;

        let mut episode = EpisodeSettings {
            human: HumanModel::new(o.human.unwrap_or(HumanKind::Passive)),
            ..Default::default()
        };
        if let Some(p) = o.perfect_sensing {
            episode.estimation.perfect_sensing = p;
        }
        if let Some(s) = o.position_sigma {
            if !(s >= 0.0 && s.is_finite()) {
                bail!("position_sigma must be non-negative, got {s}");
            }
            episode.estimation.position_sigma = s;
        }
        if let Some(n) = o.substeps {
            if n == 0 {
                bail!("substeps must be at least 1");
            }
            episode.substeps = n;
        }
        let count = o.count.unwrap_or(40);
        if count == 0 {
            bail!("count must be at least 1");
        }
        let safety_threshold = o.safety_threshold.unwrap_or(2.0);
        if !(safety_threshold > 0.0 && safety_threshold.is_finite()) {
            bail!("safety_threshold must be positive, got {safety_threshold}");
        }
        Ok(Self {
            model: o.model.unwrap_or(ModelKind::Ball),
            algorithms,
            controller,
            seed: o.seed.unwrap_or(0),
            count,
            episode,
            safety_threshold,
        })
    }

    /// The controller config for `alg`, sharing every other parameter.
    pub fn controller_for(&self, alg: Algorithm) -> ControllerConfig {
        ControllerConfig {
            algorithm: alg,
            ..self.controller
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file: Overrides = toml::from_str("model = \"scara\"\nalg = \"bfm\"\nlambda = -2.0\ncount = 5").unwrap();
        let flags = Overrides {
            lambda: Some(-0.5),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&file.merged(flags)).unwrap();
        assert_eq!(cfg.model, ModelKind::Scara);
        assert_eq!(cfg.algorithms, AlgorithmChoice::One(Algorithm::Bfm));
        assert_eq!(cfg.controller.lambda, -0.5);
        assert_eq!(cfg.count, 5);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(toml::from_str::<Overrides>("speed = 3").is_err());
        assert!(toml::from_str::<Overrides>("model = \"tank\"").is_err());
        let bad = Overrides {
            eta: Some(0.5),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&bad).is_err());
        let zero = Overrides {
            count: Some(0),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&zero).is_err());
    }
}
