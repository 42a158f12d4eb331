//! The episode state machine.
//!
//! A run is a sequence of episodes. Each episode starts at HOME with the
//! parents present, walks out to the forest by Lévy flight while dropping
//! markers and learning, then tries to come back: first along the trail,
//! then by a learned random walk, and after meeting the ogre by boosted
//! jumps. Reaching the palace pays the award, which ends the run unless
//! the award is zero.

pub mod cost;
pub mod raster;
pub mod record;
pub mod replay;
pub mod window;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gridworld::{CellCoord, CellKind, Direction, GridWorld};
use crate::levy::{self, LevyError, LevyParams};
use crate::stdp::{SpikeEvent, StdpError, StdpParams, SynapseMatrix};
use crate::trailmap::{MarkerKind, TrailError, TrailMap, TrailParams};

pub use record::{Event, EventKind, Phase, RunRecord, TraceEntry};
pub use window::{sense_features, FamilyWindow, Headwear, FEATURE_LEN};

/// Per-episode tick budget is `BUDGET_PER_CELL * size^2` unless overridden.
pub const BUDGET_PER_CELL: u64 = 50;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_SPIKE_THRESHOLD: f64 = 0.5;
/// Weight forgetting per return tick in crumb episodes.
pub const DEFAULT_CRUMB_FORGET_FACTOR: f64 = 0.9;
pub const DEFAULT_MAX_EPISODES: u32 = 3;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Levy(#[from] LevyError),
    #[error(transparent)]
    Stdp(#[from] StdpError),
    #[error(transparent)]
    Trail(#[from] TrailError),
    #[error("script error: {0}")]
    Script(String),
}

/// How the king pays at the palace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AwardRule {
    Infinity,
    Fixed(f64),
    /// Infinity with probability `p`, otherwise `value`.
    Bernoulli { p: f64, value: f64 },
}

impl AwardRule {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            AwardRule::Infinity => f64::INFINITY,
            AwardRule::Fixed(v) => v,
            AwardRule::Bernoulli { p, value } => {
                if rng.gen::<f64>() < p {
                    f64::INFINITY
                } else {
                    value
                }
            }
        }
    }

    fn validate(&self) -> Result<(), EngineError> {
        let ok_value = |v: f64| v.is_finite() && v >= 0.0;
        let ok = match *self {
            AwardRule::Infinity => true,
            AwardRule::Fixed(v) => ok_value(v),
            AwardRule::Bernoulli { p, value } => (0.0..=1.0).contains(&p) && ok_value(value),
        };
        if ok {
            Ok(())
        } else {
            Err(EngineError::Config(format!("invalid award rule {self:?}")))
        }
    }
}

impl std::fmt::Display for AwardRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AwardRule::Infinity => write!(f, "inf"),
            AwardRule::Fixed(v) => write!(f, "fixed:{v}"),
            AwardRule::Bernoulli { p, value } => write!(f, "bernoulli:{p}:{value}"),
        }
    }
}

impl std::str::FromStr for AwardRule {
    type Err = String;

    /// `inf`, `fixed:<v>` or `bernoulli:<p>:<v>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| format!("bad number {t:?} in award rule"));
        match parts.as_slice() {
            ["inf"] | ["INF"] => Ok(AwardRule::Infinity),
            ["fixed", v] => Ok(AwardRule::Fixed(num(v)?)),
            ["bernoulli", p, v] => Ok(AwardRule::Bernoulli { p: num(p)?, value: num(v)? }),
            _ => Err(format!("unknown award rule {s:?}")),
        }
    }
}

/// Which episodes may drop stones; the others drop crumbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoneSchedule {
    FirstEpisode,
    Always,
    Never,
}

impl StoneSchedule {
    pub fn stones_allowed(self, episode: u32) -> bool {
        match self {
            StoneSchedule::FirstEpisode => episode == 1,
            StoneSchedule::Always => true,
            StoneSchedule::Never => false,
        }
    }
}

impl std::fmt::Display for StoneSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StoneSchedule::FirstEpisode => "first",
            StoneSchedule::Always => "always",
            StoneSchedule::Never => "never",
        })
    }
}

impl std::str::FromStr for StoneSchedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first" => Ok(StoneSchedule::FirstEpisode),
            "always" => Ok(StoneSchedule::Always),
            "never" => Ok(StoneSchedule::Never),
            _ => Err(format!("unknown stone schedule {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// `alpha` here is the initial step size of every episode.
    pub levy: LevyParams,
    pub trail: TrailParams,
    /// `forget_factor` applies to crumb episodes; stone episodes never forget.
    pub stdp: StdpParams,
    pub epsilon: f64,
    /// A feature at or above this value emits a pre-synaptic spike.
    pub spike_threshold: f64,
    pub award: AwardRule,
    pub stones: StoneSchedule,
    /// Ticks per episode; `None` means `BUDGET_PER_CELL * size^2`.
    pub tick_budget: Option<u64>,
    pub max_episodes: u32,
    /// Control mode: no markers, no learning, uniform Lévy directions.
    pub baseline: bool,
}

impl EngineConfig {
    pub fn for_grid(size: usize) -> Self {
        EngineConfig {
            levy: LevyParams::for_grid(size),
            trail: TrailParams::default(),
            stdp: StdpParams {
                forget_factor: DEFAULT_CRUMB_FORGET_FACTOR,
                ..StdpParams::default()
            },
            epsilon: DEFAULT_EPSILON,
            spike_threshold: DEFAULT_SPIKE_THRESHOLD,
            award: AwardRule::Infinity,
            stones: StoneSchedule::FirstEpisode,
            tick_budget: None,
            max_episodes: DEFAULT_MAX_EPISODES,
            baseline: false,
        }
    }

    pub fn budget(&self, size: usize) -> u64 {
        self.tick_budget.unwrap_or(BUDGET_PER_CELL * (size * size) as u64)
    }

    pub fn validate(&self, world: &GridWorld) -> Result<(), EngineError> {
        self.stdp.validate()?;
        self.award.validate()?;
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(EngineError::Config(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if !self.spike_threshold.is_finite() {
            return Err(EngineError::Config("spike threshold must be finite".into()));
        }
        if self.budget(world.size()) < 2 {
            return Err(EngineError::Config("tick budget must be at least 2".into()));
        }
        if self.max_episodes == 0 {
            return Err(EngineError::Config("max_episodes must be positive".into()));
        }
        if self.levy.s_min() >= world.size() as f64 {
            return Err(EngineError::Config(format!(
                "s_min {} does not fit a {}x{} world",
                self.levy.s_min(),
                world.size(),
                world.size()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeState {
    pub position: CellCoord,
    /// Zero until the award is paid.
    pub wallet: f64,
    pub alpha: f64,
    pub tick: u64,
    pub phase: Phase,
    pub stones_allowed: bool,
    pub award: Option<f64>,
}

/// How an episode ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpisodeEnd {
    Home,
    /// Palace reached and the award paid.
    Award(f64),
    Timeout,
}

pub struct Engine<'w> {
    world: &'w GridWorld,
    config: EngineConfig,
    rng: ChaCha8Rng,
    window: FamilyWindow,
    trail: TrailMap,
    weights: SynapseMatrix,
    state: EpisodeState,
    trace: Vec<TraceEntry>,
    /// Step size in force at each trace entry.
    alphas: Vec<f64>,
    events: Vec<Event>,
    episodes: u32,
    episode_start: u64,
    budget: u64,
    seq: u64,
}

impl<'w> Engine<'w> {
    /// Fresh run: window at HOME, empty trail, zero weights.
    pub fn init_run(world: &'w GridWorld, config: EngineConfig, seed: u64) -> Result<Self, EngineError> {
        config.validate(world)?;
        let weights = SynapseMatrix::zeros(FEATURE_LEN, Direction::COUNT, config.stdp)?;
        let budget = config.budget(world.size());
        Ok(Engine {
            world,
            rng: ChaCha8Rng::seed_from_u64(seed),
            window: FamilyWindow::new(world.home()),
            trail: TrailMap::new(world.size(), config.trail),
            weights,
            state: EpisodeState {
                position: world.home(),
                wallet: 0.0,
                alpha: config.levy.alpha(),
                tick: 0,
                phase: Phase::Outbound,
                stones_allowed: config.stones.stones_allowed(1),
                award: None,
            },
            trace: Vec::new(),
            alphas: Vec::new(),
            events: Vec::new(),
            episodes: 0,
            episode_start: 0,
            budget,
            seq: 0,
            config,
        })
    }

    /// Resume with weights from an earlier run.
    pub fn with_weights(mut self, weights: SynapseMatrix) -> Result<Self, EngineError> {
        if weights.rows() != FEATURE_LEN || weights.cols() != Direction::COUNT {
            return Err(EngineError::Config(format!(
                "weights are {}x{}, expected {}x{}",
                weights.rows(),
                weights.cols(),
                FEATURE_LEN,
                Direction::COUNT
            )));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn state(&self) -> &EpisodeState {
        &self.state
    }

    pub fn window(&self) -> &FamilyWindow {
        &self.window
    }

    pub fn trail(&self) -> &TrailMap {
        &self.trail
    }

    pub fn weights(&self) -> &SynapseMatrix {
        &self.weights
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn episodes(&self) -> u32 {
        self.episodes
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// The run stops once the wallet is non-empty or the episode cap is hit.
    /// `alpha` after each trace entry's tick, parallel to the trace.
    pub fn alpha_history(&self) -> &[f64] {
        &self.alphas
    }

    pub fn is_finished(&self) -> bool {
        self.state.wallet != 0.0 || self.episodes >= self.config.max_episodes
    }

    fn push_trace(&mut self) {
        self.trace.push(TraceEntry {
            tick: self.state.tick,
            position: self.state.position,
            phase: self.state.phase,
        });
        self.alphas.push(self.state.alpha);
    }

    fn emit(&mut self, kind: EventKind) {
        log::debug!("tick {}: {}", self.state.tick, kind);
        self.events.push(Event {
            tick: self.state.tick,
            kind,
        });
    }

    fn set_phase(&mut self, phase: Phase) {
        debug_assert!(self.state.phase.can_transition_to(phase), "{} -> {}", self.state.phase, phase);
        self.state.phase = phase;
    }

    fn begin_next_episode(&mut self) -> Result<(), EngineError> {
        self.episodes += 1;
        if !self.trace.is_empty() {
            self.state.tick += 1;
        }
        self.episode_start = self.state.tick;
        let home = self.world.home();
        self.state.position = home;
        self.state.phase = Phase::Outbound;
        self.state.alpha = self.config.levy.alpha();
        self.state.stones_allowed = self.config.stones.stones_allowed(self.episodes);
        self.window = FamilyWindow::new(home);
        self.trail.clear();
        self.seq = 0;
        let forget = if self.state.stones_allowed {
            1.0
        } else {
            self.config.stdp.forget_factor
        };
        self.weights.set_forget_factor(forget)?;
        self.push_trace();
        Ok(())
    }

    /// Markers go down as the family leaves a cell, so the window never
    /// senses a stone under Tom's own feet on a first visit.
    fn drop_here(&mut self) -> Result<(), EngineError> {
        if self.config.baseline {
            return Ok(());
        }
        let kind = if self.state.stones_allowed {
            MarkerKind::Stone
        } else {
            MarkerKind::Crumb
        };
        self.trail.drop_marker(self.state.position, kind, self.state.tick, self.seq)?;
        self.seq += 1;
        Ok(())
    }

    fn out_of_budget(&self) -> bool {
        self.state.tick + 1 - self.episode_start >= self.budget
    }

    /// Abort the episode: one closing `DONE` tick in place.
    fn timeout(&mut self) {
        self.state.tick += 1;
        self.state.phase = Phase::Done;
        self.push_trace();
        self.emit(EventKind::Timeout);
    }

    /// Advance one tick onto `to`. Trail decay runs every tick; weights
    /// forget only on the way back.
    fn step_to(&mut self, to: CellCoord) {
        self.state.tick += 1;
        self.state.position = to;
        self.window.set_anchor(to);
        self.push_trace();
        self.trail.decay_tick();
        if self.state.phase.is_return() {
            self.weights.forget_tick();
        }
    }

    fn features(&self) -> Vec<f64> {
        sense_features(&self.window, self.world, &self.trail)
    }

    /// Pre-spikes from the features sensed at the current tick, post-spike
    /// for `dir` on the next one.
    fn learn(&mut self, features: &[f64], dir: Direction) -> Result<(), EngineError> {
        if self.config.baseline {
            return Ok(());
        }
        let t = self.state.tick;
        for (i, &f) in features.iter().enumerate() {
            if f >= self.config.spike_threshold {
                self.weights
                    .apply_pair(SpikeEvent::new(i, t), SpikeEvent::new(dir.index(), t + 1))?;
            }
        }
        Ok(())
    }

    /// Directions whose first cell can be entered.
    fn allowed_directions(&self, from: CellCoord) -> [bool; Direction::COUNT] {
        let mut allowed = [false; Direction::COUNT];
        for d in Direction::ALL {
            allowed[d.index()] = from
                .step(d, self.world.size())
                .is_some_and(|c| self.world.is_passable(c));
        }
        allowed
    }

    fn uniform_allowed(&mut self, allowed: &[bool]) -> Option<Direction> {
        let options: Vec<usize> = (0..Direction::COUNT).filter(|&i| allowed[i]).collect();
        if options.is_empty() {
            None
        } else {
            Direction::from_index(options[self.rng.gen_range(0..options.len())])
        }
    }

    fn jump_length(&mut self, dir: Direction) -> usize {
        let m = levy::sample_magnitude(&self.config.levy, &mut self.rng);
        let step = levy::project_step(dir, self.state.alpha * m, self.config.levy.s_max());
        step.dx.abs().max(step.dy.abs()) as usize
    }

    /// Cells of a straight jump from the current position. Stops before the
    /// first cell outside the world or the first impassable cell; with
    /// `over_mountains` only other obstacles stop it, and it backs off to
    /// its last passable cell.
    fn jump_cells(&self, dir: Direction, len: usize, over_mountains: bool) -> Vec<CellCoord> {
        let size = self.world.size();
        let mut cells = Vec::with_capacity(len.min(size));
        let mut at = self.state.position;
        for _ in 0..len {
            match at.step(dir, size) {
                Some(next)
                    if self.world.is_passable(next)
                        || (over_mountains && self.world.kind(next) == CellKind::Mountain) =>
                {
                    cells.push(next);
                    at = next;
                }
                _ => break,
            }
        }
        if over_mountains {
            while cells.last().is_some_and(|&c| !self.world.is_passable(c)) {
                cells.pop();
            }
        }
        cells
    }

    /// Lévy flight to the forest, dropping a marker and learning on every
    /// traversed cell. Returns `false` on timeout.
    pub fn outbound_walk(&mut self) -> Result<bool, EngineError> {
        debug_assert_eq!(self.state.phase, Phase::Outbound);
        while self.world.kind(self.state.position) != CellKind::Forest {
            let allowed = self.allowed_directions(self.state.position);
            let Some(dir) = self.uniform_allowed(&allowed) else {
                self.timeout();
                return Ok(false);
            };
            let len = self.jump_length(dir);
            if len == 0 {
                // alpha = 0: the family stands still until the budget runs out.
                self.timeout();
                return Ok(false);
            }
            for cell in self.jump_cells(dir, len, false) {
                if self.out_of_budget() {
                    self.timeout();
                    return Ok(false);
                }
                let features = self.features();
                self.learn(&features, dir)?;
                self.drop_here()?;
                self.step_to(cell);
                if self.world.kind(cell) == CellKind::Forest {
                    break;
                }
            }
        }
        self.drop_here()?;
        self.parents_flee();
        Ok(true)
    }

    /// Scripted outbound walk along `script`, which must start at the
    /// current position and move between 8-neighbours. Always lays stones.
    pub fn teach_outbound(&mut self, script: &[CellCoord]) -> Result<bool, EngineError> {
        if script.first() != Some(&self.state.position) {
            return Err(EngineError::Script("script must start at the current position".into()));
        }
        self.state.stones_allowed = true;
        self.weights.set_forget_factor(1.0)?;
        for pair in script.windows(2) {
            let dir = pair[0]
                .direction_to(pair[1])
                .ok_or_else(|| EngineError::Script(format!("{} -> {} is not a single move", pair[0], pair[1])))?;
            if !self.world.is_passable(pair[1]) {
                return Err(EngineError::Script(format!("{} is impassable", pair[1])));
            }
            if self.out_of_budget() {
                self.timeout();
                return Ok(false);
            }
            let features = self.features();
            self.learn(&features, dir)?;
            self.drop_here()?;
            self.step_to(pair[1]);
        }
        self.drop_here()?;
        self.parents_flee();
        Ok(true)
    }

    fn parents_flee(&mut self) {
        self.emit(EventKind::ParentsFlee);
        self.window.zero_parents();
        self.set_phase(Phase::TrailReturn);
    }

    /// Everything after the parents flee, until HOME, the award or timeout.
    pub fn return_walk(&mut self) -> Result<EpisodeEnd, EngineError> {
        loop {
            if self.state.position == self.world.home() {
                self.emit(EventKind::HomeReached);
                return Ok(EpisodeEnd::Home);
            }
            if self.out_of_budget() {
                self.timeout();
                return Ok(EpisodeEnd::Timeout);
            }
            match self.state.phase {
                Phase::TrailReturn => match self.trail.follow_step(self.state.position) {
                    Some(next) => self.step_to(next),
                    None => {
                        self.emit(EventKind::TrailLost);
                        self.set_phase(Phase::RandomReturn);
                    }
                },
                Phase::RandomReturn | Phase::BoostedReturn => {
                    if let Some(end) = self.random_jump()? {
                        return Ok(end);
                    }
                }
                Phase::Outbound | Phase::Done => unreachable!("return walk in phase {}", self.state.phase),
            }
        }
    }

    /// One learned (or, in baseline mode, uniform) jump. Returns the
    /// episode end if the jump reached HOME or the palace.
    fn random_jump(&mut self) -> Result<Option<EpisodeEnd>, EngineError> {
        let boosted = self.state.phase == Phase::BoostedReturn;
        let allowed = if boosted {
            let mut a = [false; Direction::COUNT];
            for d in Direction::ALL {
                a[d.index()] = !self.jump_cells(d, self.world.size(), true).is_empty();
            }
            a
        } else {
            self.allowed_directions(self.state.position)
        };
        let dir = if self.config.baseline {
            self.uniform_allowed(&allowed)
        } else {
            let features = self.features();
            self.weights
                .select_move_masked(&features, self.config.epsilon, &allowed, &mut self.rng)?
                .and_then(Direction::from_index)
        };
        let Some(dir) = dir else {
            // Walled in: wait out the budget.
            self.timeout();
            return Ok(Some(EpisodeEnd::Timeout));
        };
        let len = self.jump_length(dir);
        if len == 0 {
            self.timeout();
            return Ok(Some(EpisodeEnd::Timeout));
        }
        for cell in self.jump_cells(dir, len, boosted) {
            if self.out_of_budget() {
                self.timeout();
                return Ok(Some(EpisodeEnd::Timeout));
            }
            self.step_to(cell);
            match self.world.kind(cell) {
                CellKind::Home => {
                    self.emit(EventKind::HomeReached);
                    return Ok(Some(EpisodeEnd::Home));
                }
                CellKind::Palace => {
                    self.emit(EventKind::PalaceReached);
                    let award = self.award_and_terminate();
                    return Ok(Some(EpisodeEnd::Award(award)));
                }
                CellKind::Ogre if !boosted => {
                    self.emit(EventKind::OgreReached);
                    self.window.set_headwear(Headwear::Crown);
                    self.state.alpha = self.state.alpha.max(self.config.levy.alpha_max());
                    if let Some(last) = self.alphas.last_mut() {
                        *last = self.state.alpha;
                    }
                    self.set_phase(Phase::BoostedReturn);
                    return Ok(None);
                }
                _ => {}
            }
        }
        Ok(None)
    }

    /// The king pays; the family is carried back HOME on a closing tick.
    pub fn award_and_terminate(&mut self) -> f64 {
        let award = self.config.award.draw(&mut self.rng);
        self.state.tick += 1;
        self.state.position = self.world.home();
        self.window.set_anchor(self.world.home());
        self.set_phase(Phase::Done);
        self.push_trace();
        self.emit(EventKind::Award);
        self.state.award = Some(award);
        self.state.wallet = award;
        award
    }

    pub fn run_episode(&mut self) -> Result<EpisodeEnd, EngineError> {
        self.begin_next_episode()?;
        if !self.outbound_walk()? {
            return Ok(EpisodeEnd::Timeout);
        }
        self.return_walk()
    }

    /// An episode whose outbound walk is `script` instead of a Lévy flight.
    /// Baseline engines have no learner to teach and walk normally.
    pub fn teach_episode(&mut self, script: &[CellCoord]) -> Result<EpisodeEnd, EngineError> {
        if self.config.baseline {
            return self.run_episode();
        }
        self.begin_next_episode()?;
        if !self.teach_outbound(script)? {
            return Ok(EpisodeEnd::Timeout);
        }
        self.return_walk()
    }

    pub fn finish(self) -> RunRecord {
        RunRecord {
            trace: self.trace,
            events: self.events,
            episodes: self.episodes,
            final_wallet: self.state.wallet,
        }
    }

    /// Episodes until the wallet fills or the episode cap is reached.
    pub fn run(mut self) -> Result<RunRecord, EngineError> {
        while !self.is_finished() {
            self.run_episode()?;
        }
        Ok(self.finish())
    }
}
