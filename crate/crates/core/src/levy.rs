//! Heavy-tailed step generation.
//!
//! Magnitudes follow a Pareto law with density proportional to `t^-lambda`
//! on `[s_min, inf)`, drawn by inverse CDF and hard-capped at `s_max`.
//! A step scales the magnitude by `alpha` and projects it onto one of the
//! eight compass directions.

use rand::Rng;
use thiserror::Error;

use crate::gridworld::Direction;

/// Default exponent, the conventional foraging value.
pub const DEFAULT_LAMBDA: f64 = 1.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("lambda must lie in (1, 3], got {0}")]
    Lambda(f64),
    #[error("alpha must be finite and non-negative, got {0}")]
    Alpha(f64),
    #[error("need 0 < s_min < s_max, got s_min={s_min}, s_max={s_max}")]
    Bounds { s_min: f64, s_max: f64 },
    #[error("k={k} must satisfy 1 <= k < {n}")]
    OrderStatistic { k: usize, n: usize },
    #[error("tail index needs strictly positive samples, found {0}")]
    NonPositiveSample(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyParams {
    lambda: f64,
    alpha: f64,
    s_min: f64,
    s_max: f64,
}

impl LevyParams {
    pub fn new(lambda: f64, alpha: f64, s_min: f64, s_max: f64) -> Result<Self, LevyError> {
        if !(lambda > 1.0 && lambda <= 3.0) {
            return Err(LevyError::Lambda(lambda));
        }
        // alpha = 0 is accepted as the degenerate "stand still" walker.
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(LevyError::Alpha(alpha));
        }
        if !(s_min > 0.0 && s_min.is_finite() && s_max > s_min) {
            return Err(LevyError::Bounds { s_min, s_max });
        }
        Ok(LevyParams {
            lambda,
            alpha,
            s_min,
            s_max,
        })
    }

    /// No truncation: `s_max = +inf`.
    pub fn untruncated(lambda: f64, alpha: f64, s_min: f64) -> Result<Self, LevyError> {
        Self::new(lambda, alpha, s_min, f64::INFINITY)
    }

    /// Defaults for a grid of side `size`: lambda 1.5, alpha 1, unit minimum
    /// step, cap at the grid diagonal.
    pub fn for_grid(size: usize) -> Self {
        Self::new(DEFAULT_LAMBDA, 1.0, 1.0, size as f64 * std::f64::consts::SQRT_2)
            .expect("default Levy parameters are valid")
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self, LevyError> {
        Self::new(self.lambda, alpha, self.s_min, self.s_max)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Largest useful multiplier under truncation, `s_max / s_min`.
    pub fn alpha_max(&self) -> f64 {
        self.s_max / self.s_min
    }

    /// Inverse CDF before truncation: `s_min * (1 - u)^(-1 / (lambda - 1))`.
    pub fn untruncated_from_uniform(&self, u: f64) -> f64 {
        self.s_min * (1.0 - u).powf(-1.0 / (self.lambda - 1.0))
    }

    /// Inverse CDF followed by the cap at `s_max`.
    pub fn magnitude_from_uniform(&self, u: f64) -> f64 {
        self.untruncated_from_uniform(u).min(self.s_max)
    }
}

/// Integer grid increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Step {
    pub dx: i64,
    pub dy: i64,
}

impl Step {
    pub const ZERO: Step = Step { dx: 0, dy: 0 };

    pub fn is_zero(&self) -> bool {
        self.dx == 0 && self.dy == 0
    }
}

pub fn sample_magnitude<R: Rng + ?Sized>(p: &LevyParams, rng: &mut R) -> f64 {
    p.magnitude_from_uniform(rng.gen::<f64>())
}

pub fn sample_direction<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    Direction::ALL[rng.gen_range(0..Direction::COUNT)]
}

/// Direction and pre-rounding displacement `alpha * magnitude`.
///
/// The direction is drawn first, then the magnitude, so two parameter sets
/// sharing an rng stream see the same uniforms.
pub fn sample_displacement<R: Rng + ?Sized>(p: &LevyParams, rng: &mut R) -> (Direction, f64) {
    let dir = sample_direction(rng);
    let m = sample_magnitude(p, rng);
    (dir, p.alpha * m)
}

/// Round the projection of `displacement` along `dir` half away from zero,
/// clamp each component to `[-s_max, s_max]`, and promote a vanishing
/// result to the unit step in `dir` unless the displacement itself is zero.
pub fn project_step(dir: Direction, displacement: f64, s_max: f64) -> Step {
    if displacement == 0.0 {
        return Step::ZERO;
    }
    let (ux, uy) = dir.offset();
    let scale = if dir.is_diagonal() {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        1.0
    };
    let cap = s_max.min(i32::MAX as f64);
    let component = |u: i64| -> i64 {
        let v = (u as f64 * scale * displacement).round();
        v.clamp(-cap, cap) as i64
    };
    let step = Step {
        dx: component(ux),
        dy: component(uy),
    };
    if step.is_zero() {
        Step { dx: ux, dy: uy }
    } else {
        step
    }
}

pub fn sample_step<R: Rng + ?Sized>(p: &LevyParams, rng: &mut R) -> Step {
    let (dir, displacement) = sample_displacement(p, rng);
    project_step(dir, displacement, p.s_max)
}

/// Result of a Hill tail estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    /// Exponent of the density `t^-lambda`, i.e. one plus the Hill index of
    /// the survival function.
    pub lambda: f64,
    /// Set when all top order statistics coincide and the estimate is `+inf`.
    pub degenerate: bool,
}

/// Hill estimator over the `k` largest order statistics, reported in the
/// density-exponent convention of the sampler (`1 + k / sum ln(X_i / X_(k+1))`).
pub fn estimate_tail_index(samples: &[f64], k: usize) -> Result<TailEstimate, LevyError> {
    let n = samples.len();
    if k == 0 || k >= n {
        return Err(LevyError::OrderStatistic { k, n });
    }
    if let Some(&bad) = samples.iter().find(|&&s| !(s > 0.0)) {
        return Err(LevyError::NonPositiveSample(bad));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let threshold = sorted[k];
    let log_sum: f64 = sorted[..k].iter().map(|&x| (x / threshold).ln()).sum();
    if log_sum <= 0.0 {
        log::warn!("Hill estimator degenerate: top {k} order statistics are equal");
        return Ok(TailEstimate {
            lambda: f64::INFINITY,
            degenerate: true,
        });
    }
    Ok(TailEstimate {
        lambda: 1.0 + k as f64 / log_sum,
        degenerate: false,
    })
}
