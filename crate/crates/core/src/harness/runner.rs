//! Seed replications of the cloister protocol.
//!
//! Per seed: one training episode (scripted along the ground truth when
//! teaching), an evaluation walk from HOME with the frozen policy, then
//! the remaining episodes of the run. Seeds are independent and may run
//! in parallel; results are always reported in seed order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::cost::{cost_to_go, Lagrangian};
use crate::engine::replay::{replay_walk, ReplayPolicy};
use crate::engine::{Engine, RunRecord};
use crate::gridworld::CellCoord;

use super::config::RunConfig;
use super::metrics::{match_trace, mean, std_dev};
use super::scenario::{build_scenario, Scenario};
use super::HarnessError;

/// Rng stream of the evaluation walk, apart from the engine's stream 0.
pub const EVAL_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Execution::Parallel;
        #[cfg(not(feature = "parallel"))]
        Execution::Sequential
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub seed: u64,
    pub match_rate: f64,
    pub err_x: Vec<i64>,
    pub err_y: Vec<i64>,
    pub mean_abs_err_x: f64,
    pub mean_abs_err_y: f64,
    pub cost_to_go: f64,
    pub episodes: u32,
    pub wallet: f64,
    /// The evaluation walk itself.
    pub trace: Vec<CellCoord>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchReport {
    pub runs: Vec<RunMetrics>,
}

impl MatchReport {
    pub fn match_rates(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.match_rate).collect()
    }

    pub fn mean_match_rate(&self) -> f64 {
        mean(&self.match_rates())
    }

    pub fn std_match_rate(&self) -> f64 {
        std_dev(&self.match_rates())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub report: MatchReport,
    pub records: Vec<RunRecord>,
}

/// One replication. `baseline` switches off trail, learning and teaching.
pub fn run_seed(
    scenario: &Scenario,
    cfg: &RunConfig,
    seed: u64,
    baseline: bool,
) -> Result<(RunMetrics, RunRecord), HarnessError> {
    let world = &scenario.world;
    let gt = &scenario.ground_truth;
    let engine_cfg = cfg.engine_config(baseline)?;
    let levy = engine_cfg.levy;
    let mut engine = Engine::init_run(world, engine_cfg, seed)?;

    if cfg.teaching && !baseline {
        engine.teach_episode(gt)?;
    } else {
        engine.run_episode()?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(EVAL_STREAM);
    let policy = if baseline {
        ReplayPolicy::Levy
    } else {
        ReplayPolicy::Learned {
            weights: engine.weights(),
            epsilon: cfg.eval_epsilon,
        }
    };
    let budget = (cfg.eval_budget_factor * gt.len() as f64).ceil() as usize;
    let trace = replay_walk(world, world.home(), policy, &levy, budget, &mut rng);

    while !engine.is_finished() {
        engine.run_episode()?;
    }
    let record = engine.finish();

    let outcome = match_trace(gt, &trace, cfg.tolerance);
    let cost = cost_to_go(
        &trace,
        world,
        &Lagrangian {
            beta: cfg.beta,
            gamma: cfg.gamma,
        },
    );
    let metrics = RunMetrics {
        seed,
        match_rate: outcome.rate(),
        mean_abs_err_x: outcome.mean_abs_err_x(),
        mean_abs_err_y: outcome.mean_abs_err_y(),
        err_x: outcome.err_x,
        err_y: outcome.err_y,
        cost_to_go: cost.value,
        episodes: record.episodes,
        wallet: record.final_wallet,
        trace,
    };
    Ok((metrics, record))
}

fn replicate(cfg: &RunConfig, baseline: bool, exec: Execution) -> Result<Experiment, HarnessError> {
    cfg.validate()?;
    let scenario = build_scenario(cfg)?;
    let one = |&seed: &u64| run_seed(&scenario, cfg, seed, baseline);
    let results: Vec<Result<(RunMetrics, RunRecord), HarnessError>> = match exec {
        Execution::Sequential => cfg.seeds.iter().map(one).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            cfg.seeds.par_iter().map(one).collect()
        }
    };
    let mut experiment = Experiment {
        report: MatchReport::default(),
        records: Vec::with_capacity(results.len()),
    };
    for r in results {
        let (metrics, record) = r?;
        experiment.report.runs.push(metrics);
        experiment.records.push(record);
    }
    Ok(experiment)
}

pub fn run_experiment(cfg: &RunConfig) -> Result<Experiment, HarnessError> {
    run_experiment_with(cfg, Execution::default())
}

pub fn run_experiment_with(cfg: &RunConfig, exec: Execution) -> Result<Experiment, HarnessError> {
    replicate(cfg, false, exec)
}

/// Same protocol with trail, learning and teaching disabled.
pub fn run_baseline(cfg: &RunConfig) -> Result<Experiment, HarnessError> {
    run_baseline_with(cfg, Execution::default())
}

pub fn run_baseline_with(cfg: &RunConfig, exec: Execution) -> Result<Experiment, HarnessError> {
    replicate(cfg, true, exec)
}
