//! `key = value` run configuration.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::controller::{ControllerConfig, EpsilonSchedule};
use crate::envs::synthetic::{Edge, SyntheticSpec};
use crate::envs::taxi::{Landmark, TaskSchedule, TaxiParams};
use crate::meta_controller::{BootstrapState, MetaConfig, RewardMode};
use crate::sdrl_loop::{LoopConfig, TerminationPolicy};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Taxi,
    Synthetic,
    MontezumaFixture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: EnvKind,
    pub looping: LoopConfig,
    pub controller: ControllerConfig,
    pub meta: MetaConfig,
    pub seeds: Vec<u64>,
    pub schedule: TaskSchedule,
    pub taxi: TaxiParams,
    pub synthetic: Option<SyntheticSpec>,
    /// Write per-subtask controller and meta logs.
    pub detailed_logs: bool,
}

impl RunConfig {
    /// Settings used for the taxi task sequence.
    pub fn taxi_default() -> Self {
        let schedule = TaskSchedule::default();
        RunConfig {
            env: EnvKind::Taxi,
            looping: LoopConfig {
                explore_prob: 0.02,
                episodes: schedule.total_episodes(),
                max_plan_len: 8,
                inf_default: 50.0,
                termination: TerminationPolicy::Continue,
            },
            controller: ControllerConfig {
                epsilon: EpsilonSchedule { start: 0.3, end: 0.05, decay_steps: 2000 },
                ..ControllerConfig::default()
            },
            meta: MetaConfig { psi: 30.0, alpha: 0.01, beta: 0.2, ..MetaConfig::default() },
            seeds: (1..=10).collect(),
            schedule,
            taxi: TaxiParams::default(),
            synthetic: None,
            detailed_logs: false,
        }
    }

    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError { line: i + 1, message: format!("expected key=value, got `{line}`") })?;
            let k = k.trim().to_string();
            if entries.contains_key(&k) {
                return Err(ConfigError { line: i + 1, message: format!("`{k}` given twice") });
            }
            entries.insert(k, (i + 1, v.trim().to_string()));
        }

        let env = match entries.remove("env") {
            Some((l, v)) => match v.as_str() {
                "taxi" => EnvKind::Taxi,
                "synthetic" => EnvKind::Synthetic,
                "montezuma_fixture" => EnvKind::MontezumaFixture,
                _ => return Err(ConfigError { line: l, message: format!("unknown env `{v}`") }),
            },
            None => return Err(ConfigError { line: 0, message: "missing `env`".into() }),
        };
        let mut cfg = RunConfig::taxi_default();
        cfg.env = env;
        if env != EnvKind::Taxi {
            cfg.looping = LoopConfig { episodes: cfg.looping.episodes, ..LoopConfig::default() };
            cfg.controller = ControllerConfig::default();
            cfg.meta = MetaConfig::default();
        }
        let mut episodes_given = false;

        for (key, (line, value)) in &entries {
            let err = |message: String| ConfigError { line: *line, message };
            let num = |v: &str| -> Result<f64, ConfigError> {
                f64::from_str(v).map_err(|_| err(format!("`{key}` expects a number, got `{v}`")))
            };
            let int = |v: &str| -> Result<usize, ConfigError> {
                usize::from_str(v).map_err(|_| err(format!("`{key}` expects a non-negative integer, got `{v}`")))
            };
            let landmark = |v: &str| Landmark::parse(v).ok_or_else(|| err(format!("`{key}` expects one of R, G, Y, B")));
            let v = value.as_str();
            match key.as_str() {
                "explore_prob" => cfg.looping.explore_prob = num(v)?,
                "episodes" => {
                    cfg.looping.episodes = int(v)?;
                    episodes_given = true;
                }
                "max_plan_len" => cfg.looping.max_plan_len = int(v)?,
                "inf_default" => cfg.looping.inf_default = num(v)?,
                "termination" => {
                    cfg.looping.termination = match v {
                        "stop" => TerminationPolicy::Stop,
                        "continue" => TerminationPolicy::Continue,
                        _ => return Err(err("termination is `stop` or `continue`".into())),
                    }
                }
                "phi" => cfg.controller.phi = num(v)?,
                "alpha_c" => cfg.controller.alpha_c = num(v)?,
                "gamma" => cfg.controller.gamma = num(v)?,
                "max_steps" => cfg.controller.max_steps = int(v)?,
                "epsilon_start" => cfg.controller.epsilon.start = num(v)?,
                "epsilon_end" => cfg.controller.epsilon.end = num(v)?,
                "epsilon_decay_steps" => cfg.controller.epsilon.decay_steps = int(v)? as u64,
                "psi" => cfg.meta.psi = num(v)?,
                "threshold" => cfg.meta.threshold = num(v)?,
                "alpha" => cfg.meta.alpha = num(v)?,
                "beta" => cfg.meta.beta = num(v)?,
                "reward_mode" => {
                    cfg.meta.mode = if v == "env_return" {
                        RewardMode::EnvReturn
                    } else if let Some(c) = v.strip_prefix("constant:") {
                        RewardMode::Constant(num(c.trim())?)
                    } else {
                        return Err(err("reward_mode is `env_return` or `constant:<value>`".into()));
                    }
                }
                "bootstrap" => {
                    cfg.meta.bootstrap = match v {
                        "next" => BootstrapState::Next,
                        "current" => BootstrapState::Current,
                        _ => return Err(err("bootstrap is `next` or `current`".into())),
                    }
                }
                "seeds" => cfg.seeds = parse_seeds(v).map_err(err)?,
                "base_dropoff_reward" => cfg.schedule.base_dropoff_reward = num(v)?,
                "dropoff_decrement" => cfg.schedule.decrement = num(v)?,
                "episodes_per_task" => cfg.schedule.episodes_per_task = int(v)?,
                "num_tasks" => cfg.schedule.num_tasks = int(v)?,
                "pickup_reward" => cfg.taxi.pickup_reward = num(v)?,
                "passenger_source" => cfg.taxi.source = landmark(v)?,
                "passenger_destination" => cfg.taxi.destination = landmark(v)?,
                "detailed_logs" => {
                    cfg.detailed_logs = match v {
                        "true" => true,
                        "false" => false,
                        _ => return Err(err("detailed_logs is `true` or `false`".into())),
                    }
                }
                "synthetic_nodes" | "synthetic_labels" | "synthetic_edges" => {}
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }

        if env == EnvKind::Synthetic {
            let get = |k: &str| entries.get(k).ok_or(ConfigError { line: 0, message: format!("synthetic env needs `{k}`") });
            let (l, nodes) = get("synthetic_nodes")?;
            let nodes = usize::from_str(nodes).map_err(|_| ConfigError { line: *l, message: "bad synthetic_nodes".into() })?;
            let (l, labels) = get("synthetic_labels")?;
            let labels = usize::from_str(labels).map_err(|_| ConfigError { line: *l, message: "bad synthetic_labels".into() })?;
            let (l, edges) = get("synthetic_edges")?;
            let edges = parse_edges(edges).map_err(|message| ConfigError { line: *l, message })?;
            let spec = SyntheticSpec { nodes, labels, edges };
            spec.check().map_err(|e| ConfigError { line: *l, message: e.to_string() })?;
            cfg.synthetic = Some(spec);
        }
        if env == EnvKind::Taxi && !episodes_given {
            cfg.looping.episodes = cfg.schedule.total_episodes();
        }
        cfg.schedule.reset_cell = cfg.taxi.reset_cell;
        cfg.check().map_err(|message| ConfigError { line: 0, message })?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), String> {
        self.looping.check()?;
        self.controller.check()?;
        self.meta.check()?;
        if self.seeds.is_empty() {
            return Err("at least one seed is required".into());
        }
        if self.env == EnvKind::Taxi && self.taxi.source == self.taxi.destination {
            return Err("passenger source and destination must differ".into());
        }
        Ok(())
    }
}

/// `1,2,5` or `1..10` (inclusive).
pub fn parse_seeds(v: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = v.split_once("..") {
        let a = u64::from_str(a.trim()).map_err(|_| format!("bad seed range `{v}`"))?;
        let b = u64::from_str(b.trim()).map_err(|_| format!("bad seed range `{v}`"))?;
        if a > b {
            return Err(format!("empty seed range `{v}`"));
        }
        return Ok((a..=b).collect());
    }
    v.split(',')
        .map(|s| u64::from_str(s.trim()).map_err(|_| format!("bad seed `{s}`")))
        .collect()
}

/// `from:label:to:reward` items separated by commas.
pub fn parse_edges(v: &str) -> Result<Vec<Edge>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let parts: Vec<&str> = item.split(':').map(str::trim).collect();
            let bad = || format!("edge `{item}` is not from:label:to:reward");
            if parts.len() != 4 {
                return Err(bad());
            }
            Ok(Edge {
                from: parts[0].parse().map_err(|_| bad())?,
                label: parts[1].parse().map_err(|_| bad())?,
                to: parts[2].parse().map_err(|_| bad())?,
                reward: parts[3].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}
