//! Statistical self-checks of the samplers and learning rule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gridworld::{CellCoord, Direction};
use crate::levy::{estimate_tail_index, sample_direction, sample_magnitude, LevyParams};
use crate::stdp::{kernel, StdpParams};
use crate::trailmap::{MarkerKind, TrailMap, TrailParams};

pub const SAMPLES: usize = 100_000;
/// Chi-square critical value, 7 degrees of freedom, alpha = 0.001.
pub const CHI2_CRIT_7DF: f64 = 24.322;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

pub fn tail_index_check(lambda: f64, seed: u64) -> Check {
    let p = LevyParams::untruncated(lambda, 1.0, 1.0).expect("valid lambda");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<f64> = (0..SAMPLES).map(|_| sample_magnitude(&p, &mut rng)).collect();
    let est = estimate_tail_index(&samples, SAMPLES / 100).expect("k in range");
    Check::new(
        format!("tail index lambda={lambda}"),
        (est.lambda - lambda).abs() <= 0.15,
        format!("estimate {:.4}", est.lambda),
    )
}

/// Frequencies and Pearson statistic of the eight directions.
pub fn direction_counts(seed: u64) -> ([usize; Direction::COUNT], f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0usize; Direction::COUNT];
    for _ in 0..SAMPLES {
        counts[sample_direction(&mut rng).index()] += 1;
    }
    let expected = SAMPLES as f64 / Direction::COUNT as f64;
    let chi2 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    (counts, chi2)
}

pub fn direction_check(seed: u64) -> Check {
    let (counts, chi2) = direction_counts(seed);
    let within = counts
        .iter()
        .all(|&c| (c as f64 / SAMPLES as f64 - 0.125).abs() <= 0.01);
    Check::new(
        "direction uniformity",
        within && chi2 < CHI2_CRIT_7DF,
        format!("chi2 {chi2:.3}, counts {counts:?}"),
    )
}

pub fn truncation_check(seed: u64) -> Check {
    let p = LevyParams::new(1.5, 1.0, 1.0, 50.0).expect("valid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..SAMPLES).map(|_| sample_magnitude(&p, &mut rng)).collect();
    let clamped = draws.iter().filter(|&&m| m == 50.0).count();
    let in_range = draws.iter().all(|&m| (1.0..=50.0).contains(&m));
    Check::new(
        "truncation at s_max",
        in_range && clamped > 0,
        format!("{clamped} of {SAMPLES} draws clamped"),
    )
}

pub fn kernel_check() -> Check {
    let p = StdpParams::default();
    let plus = kernel(5, &p);
    let minus = kernel(-5, &p);
    let ok = (plus - 0.1 * (-0.25f64).exp()).abs() < 1e-9 && (minus + 0.12 * (-0.25f64).exp()).abs() < 1e-9;
    Check::new("plasticity kernel", ok && kernel(0, &p) == 0.0, format!("{plus:.6} / {minus:.6}"))
}

pub fn trail_check() -> Check {
    let mut t = TrailMap::new(8, TrailParams::default());
    t.drop_marker(CellCoord::new(1, 1), MarkerKind::Stone, 0, 0).expect("in bounds");
    t.drop_marker(CellCoord::new(5, 5), MarkerKind::Crumb, 0, 1).expect("in bounds");
    let mut vanished_at = None;
    for tick in 1..=10_000u64 {
        t.decay_tick();
        if vanished_at.is_none() && t.marker(CellCoord::new(5, 5)).is_none() {
            vanished_at = Some(tick);
        }
    }
    let stone = t.strength(CellCoord::new(1, 1));
    Check::new(
        "trail decay",
        stone == 1.0 && vanished_at == Some(7),
        format!("stone {stone}, crumb gone at {vanished_at:?}"),
    )
}

/// Every suite, in a fixed order.
pub fn run_all(seed: u64) -> Vec<Check> {
    let mut checks: Vec<Check> = [1.5, 2.0, 2.5]
        .into_iter()
        .enumerate()
        .map(|(i, l)| tail_index_check(l, seed.wrapping_add(i as u64)))
        .collect();
    checks.push(direction_check(seed));
    checks.push(truncation_check(seed));
    checks.push(kernel_check());
    checks.push(trail_check());
    checks
}
