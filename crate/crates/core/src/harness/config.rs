//! Flat `key = value` run configuration.
//!
//! One setting per line, `#` starts a comment. The same keys double as
//! `--key value` command-line flags.

use std::fmt::Write as _;

use crate::engine::{AwardRule, EngineConfig, StoneSchedule};
use crate::levy::LevyParams;
use crate::stdp::StdpParams;
use crate::trailmap::TrailParams;

use super::HarnessError;

pub const DEFAULT_CLOISTER_SIZE: usize = 32;
pub const DEFAULT_REPLICATIONS: u64 = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub size: usize,
    pub n_mountains: usize,
    pub world_seed: u64,

    pub lambda: f64,
    pub alpha: f64,
    pub s_min: f64,
    /// `None` caps jumps at the grid diagonal.
    pub s_max: Option<f64>,

    pub decay_factor: f64,
    pub vanish_threshold: f64,

    pub a_plus: f64,
    pub a_minus: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub forget_factor: f64,
    pub w_min: f64,
    pub w_max: f64,
    pub epsilon: f64,
    pub spike_threshold: f64,

    pub award: AwardRule,
    pub tick_budget: Option<u64>,
    pub stones: StoneSchedule,
    pub max_episodes: u32,

    pub seeds: Vec<u64>,
    pub teaching: bool,
    /// Chebyshev distance within which a waypoint counts as matched.
    pub tolerance: f64,
    /// Exploration rate of the evaluation walk.
    pub eval_epsilon: f64,
    /// Evaluation walk budget as a multiple of the ground-truth length.
    pub eval_budget_factor: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let stdp = StdpParams::default();
        let trail = TrailParams::default();
        RunConfig {
            scenario: "cloister".into(),
            size: DEFAULT_CLOISTER_SIZE,
            n_mountains: 6,
            world_seed: 7,
            lambda: crate::levy::DEFAULT_LAMBDA,
            alpha: 1.0,
            s_min: 1.0,
            s_max: None,
            decay_factor: trail.decay_factor(),
            vanish_threshold: trail.vanish_threshold(),
            a_plus: stdp.a_plus,
            a_minus: stdp.a_minus,
            tau_plus: stdp.tau_plus,
            tau_minus: stdp.tau_minus,
            forget_factor: crate::engine::DEFAULT_CRUMB_FORGET_FACTOR,
            w_min: stdp.w_min,
            w_max: stdp.w_max,
            epsilon: crate::engine::DEFAULT_EPSILON,
            spike_threshold: crate::engine::DEFAULT_SPIKE_THRESHOLD,
            award: AwardRule::Infinity,
            tick_budget: None,
            stones: StoneSchedule::FirstEpisode,
            max_episodes: crate::engine::DEFAULT_MAX_EPISODES,
            seeds: (1..=DEFAULT_REPLICATIONS).collect(),
            teaching: true,
            tolerance: 0.0,
            eval_epsilon: 0.0,
            eval_budget_factor: 2.0,
            beta: 1.0,
            gamma: 1.0,
        }
    }
}

/// Every recognised key, in file order.
pub const KEYS: &[&str] = &[
    "scenario",
    "size",
    "n_mountains",
    "world_seed",
    "lambda",
    "alpha",
    "s_min",
    "s_max",
    "decay_factor",
    "vanish_threshold",
    "a_plus",
    "a_minus",
    "tau_plus",
    "tau_minus",
    "forget_factor",
    "w_min",
    "w_max",
    "epsilon",
    "spike_threshold",
    "award",
    "tick_budget",
    "stones",
    "max_episodes",
    "seeds",
    "teaching",
    "tolerance",
    "eval_epsilon",
    "eval_budget_factor",
    "beta",
    "gamma",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .parse()
        .map_err(|_| HarnessError::Config(format!("{key}: cannot parse {value:?}")))
}

/// `inf`/`INF` or a number.
fn parse_extended(key: &str, value: &str) -> Result<f64, HarnessError> {
    match value {
        "inf" | "INF" => Ok(f64::INFINITY),
        _ => parse_num(key, value),
    }
}

/// `auto` or a value.
fn parse_auto<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>, HarnessError> {
    if value == "auto" {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, HarnessError> {
    match value {
        "true" | "on" | "1" | "yes" => Ok(true),
        "false" | "off" | "0" | "no" => Ok(false),
        _ => Err(HarnessError::Config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

/// `a-b` (inclusive range) or a comma-separated list.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>, HarnessError> {
    let bad = || HarnessError::Config(format!("seeds: cannot parse {value:?}"));
    let seeds: Vec<u64> = if let Some((a, b)) = value.split_once('-') {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        value
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(HarnessError::Config("seed list is empty".into()));
    }
    Ok(seeds)
}

fn format_seeds(seeds: &[u64]) -> String {
    let contiguous = seeds.windows(2).all(|w| w[1] == w[0] + 1);
    match (seeds.first(), seeds.last()) {
        (Some(a), Some(b)) if contiguous && seeds.len() > 1 => format!("{a}-{b}"),
        _ => seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
    }
}

fn format_auto<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_owned(), T::to_string)
}

fn format_extended(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_owned()
    } else {
        v.to_string()
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let v = value.trim();
        match key {
            "scenario" => self.scenario = v.to_owned(),
            "size" => self.size = parse_num(key, v)?,
            "n_mountains" => self.n_mountains = parse_num(key, v)?,
            "world_seed" => self.world_seed = parse_num(key, v)?,
            "lambda" => self.lambda = parse_num(key, v)?,
            "alpha" => self.alpha = parse_num(key, v)?,
            "s_min" => self.s_min = parse_num(key, v)?,
            "s_max" => self.s_max = parse_auto(key, v)?,
            "decay_factor" => self.decay_factor = parse_num(key, v)?,
            "vanish_threshold" => self.vanish_threshold = parse_num(key, v)?,
            "a_plus" => self.a_plus = parse_num(key, v)?,
            "a_minus" => self.a_minus = parse_num(key, v)?,
            "tau_plus" => self.tau_plus = parse_num(key, v)?,
            "tau_minus" => self.tau_minus = parse_num(key, v)?,
            "forget_factor" => self.forget_factor = parse_num(key, v)?,
            "w_min" => self.w_min = parse_num(key, v)?,
            "w_max" => self.w_max = parse_num(key, v)?,
            "epsilon" => self.epsilon = parse_num(key, v)?,
            "spike_threshold" => self.spike_threshold = parse_num(key, v)?,
            "award" => self.award = v.parse().map_err(HarnessError::Config)?,
            "tick_budget" => self.tick_budget = parse_auto(key, v)?,
            "stones" => self.stones = v.parse().map_err(HarnessError::Config)?,
            "max_episodes" => self.max_episodes = parse_num(key, v)?,
            "seeds" => self.seeds = parse_seeds(v)?,
            "teaching" => self.teaching = parse_bool(key, v)?,
            "tolerance" => self.tolerance = parse_extended(key, v)?,
            "eval_epsilon" => self.eval_epsilon = parse_num(key, v)?,
            "eval_budget_factor" => self.eval_budget_factor = parse_num(key, v)?,
            "beta" => self.beta = parse_num(key, v)?,
            "gamma" => self.gamma = parse_num(key, v)?,
            _ => return Err(HarnessError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Defaults overridden by every `key = value` line of `text`.
    pub fn parse(text: &str) -> Result<RunConfig, HarnessError> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k.trim(), v)?;
        }
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).expect("listed key"));
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "scenario" => self.scenario.clone(),
            "size" => self.size.to_string(),
            "n_mountains" => self.n_mountains.to_string(),
            "world_seed" => self.world_seed.to_string(),
            "lambda" => self.lambda.to_string(),
            "alpha" => self.alpha.to_string(),
            "s_min" => self.s_min.to_string(),
            "s_max" => format_auto(&self.s_max),
            "decay_factor" => self.decay_factor.to_string(),
            "vanish_threshold" => self.vanish_threshold.to_string(),
            "a_plus" => self.a_plus.to_string(),
            "a_minus" => self.a_minus.to_string(),
            "tau_plus" => self.tau_plus.to_string(),
            "tau_minus" => self.tau_minus.to_string(),
            "forget_factor" => self.forget_factor.to_string(),
            "w_min" => self.w_min.to_string(),
            "w_max" => self.w_max.to_string(),
            "epsilon" => self.epsilon.to_string(),
            "spike_threshold" => self.spike_threshold.to_string(),
            "award" => self.award.to_string(),
            "tick_budget" => format_auto(&self.tick_budget),
            "stones" => self.stones.to_string(),
            "max_episodes" => self.max_episodes.to_string(),
            "seeds" => format_seeds(&self.seeds),
            "teaching" => self.teaching.to_string(),
            "tolerance" => format_extended(self.tolerance),
            "eval_epsilon" => self.eval_epsilon.to_string(),
            "eval_budget_factor" => self.eval_budget_factor.to_string(),
            "beta" => self.beta.to_string(),
            "gamma" => self.gamma.to_string(),
            _ => return None,
        })
    }

    pub fn levy_params(&self) -> Result<LevyParams, HarnessError> {
        let s_max = self.s_max.unwrap_or(self.size as f64 * std::f64::consts::SQRT_2);
        LevyParams::new(self.lambda, self.alpha, self.s_min, s_max).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn stdp_params(&self) -> StdpParams {
        StdpParams {
            a_plus: self.a_plus,
            a_minus: self.a_minus,
            tau_plus: self.tau_plus,
            tau_minus: self.tau_minus,
            w_min: self.w_min,
            w_max: self.w_max,
            forget_factor: self.forget_factor,
        }
    }

    pub fn engine_config(&self, baseline: bool) -> Result<EngineConfig, HarnessError> {
        let trail =
            TrailParams::new(self.decay_factor, self.vanish_threshold).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(EngineConfig {
            levy: self.levy_params()?,
            trail,
            stdp: self.stdp_params(),
            epsilon: self.epsilon,
            spike_threshold: self.spike_threshold,
            award: self.award,
            stones: self.stones,
            tick_budget: self.tick_budget,
            max_episodes: self.max_episodes,
            baseline,
        })
    }

    /// Checks that do not need the world.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.engine_config(false)?;
        self.stdp_params()
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("seed list is empty".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(HarnessError::Config(format!("tolerance must be non-negative, got {}", self.tolerance)));
        }
        if !(0.0..=1.0).contains(&self.eval_epsilon) {
            return Err(HarnessError::Config(format!("eval_epsilon must lie in [0, 1], got {}", self.eval_epsilon)));
        }
        if !(self.eval_budget_factor > 0.0 && self.eval_budget_factor.is_finite()) {
            return Err(HarnessError::Config(format!(
                "eval_budget_factor must be positive, got {}",
                self.eval_budget_factor
            )));
        }
        if !(self.beta.is_finite() && self.gamma.is_finite()) {
            return Err(HarnessError::Config("beta and gamma must be finite".into()));
        }
        Ok(())
    }
}
