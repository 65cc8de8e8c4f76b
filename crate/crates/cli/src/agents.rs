//! Agent specs (`greedy`, `flatmc:k=8`, `exec:./bot`, ...) and the optional
//! TOML settings file.

use std::path::Path;
use std::time::Duration;

use deskstone_core::agent::{Agent, AgentError, ProcessAgent};
use deskstone_core::baseline::{
    FlatMcAgent, FlatMcConfig, GreedyAgent, HeuristicWeights, PassAgent, RandomAgent, RolloutPolicy,
};
use deskstone_core::engine::{Action, MatchConfig};
use deskstone_core::observation::Observation;
use serde::Deserialize;

/// Contents of a `--config` file. Every table is optional.
///
/// ```toml
/// [match]
/// turn_limit = 50
/// time_budget_ms = 60000
///
/// [weights]
/// own_health = 1.0
///
/// [flat_mc]
/// k = 16
/// depth = 5
/// ```
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    #[serde(rename = "match")]
    pub match_config: MatchConfig,
    pub weights: HeuristicWeights,
    pub flat_mc: FlatMcConfig,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Settings, String> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let s: Settings = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        s.weights
            .validate()
            .map_err(|e| format!("{}: weights: {e}", path.display()))?;
        s.flat_mc
            .validate()
            .map_err(|e| format!("{}: flat_mc: {e}", path.display()))?;
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AgentSpec {
    Pass,
    Random,
    Greedy,
    FlatMc(FlatMcConfig),
    Exec(String),
}

impl AgentSpec {
    /// Parses a spec. `flatmc` parameters override the settings file.
    pub fn parse(spec: &str, settings: &Settings) -> Result<AgentSpec, String> {
        if let Some(cmd) = spec.strip_prefix("exec:") {
            if cmd.trim().is_empty() {
                return Err("exec: needs a command".into());
            }
            return Ok(AgentSpec::Exec(cmd.to_string()));
        }
        let (base, params) = match spec.split_once(':') {
            Some((b, p)) => (b, Some(p)),
            None => (spec, None),
        };
        let spec = match base {
            "pass" => AgentSpec::Pass,
            "random" => AgentSpec::Random,
            "greedy" => AgentSpec::Greedy,
            "flatmc" => {
                let mut cfg = settings.flat_mc;
                for kv in params.unwrap_or("").split(',').filter(|s| !s.is_empty()) {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| format!("flatmc parameter `{kv}` is not key=value"))?;
                    let bad = |e: &dyn std::fmt::Display| format!("flatmc {k}: {e}");
                    match k {
                        "k" => cfg.k = v.parse().map_err(|e| bad(&e))?,
                        "depth" => cfg.depth = v.parse().map_err(|e| bad(&e))?,
                        "leaf_scale" => cfg.leaf_scale = v.parse().map_err(|e| bad(&e))?,
                        "time_fraction" => cfg.time_fraction = v.parse().map_err(|e| bad(&e))?,
                        "policy" => {
                            cfg.rollout_policy = match v {
                                "random" => RolloutPolicy::Random,
                                "aggressive" => RolloutPolicy::AggressiveRandom,
                                _ => return Err(format!("flatmc policy `{v}`: expected random or aggressive")),
                            }
                        }
                        _ => return Err(format!("unknown flatmc parameter `{k}`")),
                    }
                }
                cfg.validate()?;
                return Ok(AgentSpec::FlatMc(cfg));
            }
            _ => {
                return Err(format!(
                    "unknown agent `{spec}` (expected pass, random, greedy, flatmc[:k=..] or exec:CMD)"
                ))
            }
        };
        if params.is_some() {
            return Err(format!("agent `{base}` takes no parameters"));
        }
        Ok(spec)
    }

    /// Default display name.
    pub fn label(&self) -> &'static str {
        match self {
            AgentSpec::Pass => "pass",
            AgentSpec::Random => "random",
            AgentSpec::Greedy => "greedy",
            AgentSpec::FlatMc(_) => "flatmc",
            AgentSpec::Exec(_) => "exec",
        }
    }

    pub fn build(&self, name: &str, weights: &HeuristicWeights) -> Box<dyn Agent> {
        match self {
            AgentSpec::Pass => Box::new(PassAgent),
            AgentSpec::Random => Box::new(RandomAgent::default()),
            AgentSpec::Greedy => Box::new(GreedyAgent::new(*weights)),
            AgentSpec::FlatMc(cfg) => Box::new(FlatMcAgent::new(*cfg, *weights)),
            AgentSpec::Exec(cmd) => match ProcessAgent::spawn(name, cmd) {
                Ok(p) => Box::new(p),
                Err(e) => Box::new(Unstartable(format!("cannot start `{cmd}`: {e}"))),
            },
        }
    }
}

/// Stands in for an agent that failed to launch; reports the failure on
/// initialization.
struct Unstartable(String);

impl Agent for Unstartable {
    fn name(&self) -> String {
        "unstartable".into()
    }

    fn initialize_agent(&mut self) -> Result<(), AgentError> {
        Err(AgentError::Failed(self.0.clone()))
    }

    fn get_move(&mut self, _: &Observation, _: Duration) -> Result<Action, AgentError> {
        Err(AgentError::Failed(self.0.clone()))
    }
}
