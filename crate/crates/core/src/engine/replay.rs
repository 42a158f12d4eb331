//! Evaluation walks from HOME with a frozen policy.
//!
//! The walk senses through a fresh family window (hat on, parents present),
//! lays its own stone trail as it goes, and moves by Lévy jumps whose direction comes
//! either from the learned weights or uniformly at random. It ends on
//! re-entering HOME or when the cell budget runs out.

use rand::Rng;

use super::window::{sense_features, FamilyWindow};
use crate::gridworld::{CellCoord, Direction, GridWorld};
use crate::levy::{self, LevyParams};
use crate::stdp::SynapseMatrix;
use crate::trailmap::{MarkerKind, TrailMap, TrailParams};

#[derive(Debug, Clone, Copy)]
pub enum ReplayPolicy<'a> {
    Learned { weights: &'a SynapseMatrix, epsilon: f64 },
    /// Uniform direction, no learning: the pure Lévy control.
    Levy,
}

/// Positions visited, starting with `start`; at most `budget` moves.
pub fn replay_walk<R: Rng + ?Sized>(
    world: &GridWorld,
    start: CellCoord,
    policy: ReplayPolicy<'_>,
    levy_params: &LevyParams,
    budget: usize,
    rng: &mut R,
) -> Vec<CellCoord> {
    let size = world.size();
    let mut trail = TrailMap::new(size, TrailParams::default());
    let mut window = FamilyWindow::new(start);
    let mut trace = vec![start];
    let mut at = start;
    let mut seq = 0u64;
    let mut lay = |trail: &mut TrailMap, c: CellCoord| {
        trail.drop_marker(c, MarkerKind::Stone, seq, seq).expect("cell is in bounds");
        seq += 1;
    };

    'walk: while trace.len() <= budget {
        let allowed: Vec<bool> = Direction::ALL
            .iter()
            .map(|&d| at.step(d, size).is_some_and(|c| world.is_passable(c)))
            .collect();
        let choice = match policy {
            ReplayPolicy::Learned { weights, epsilon } => {
                window.set_anchor(at);
                let features = sense_features(&window, world, &trail);
                weights
                    .select_move_masked(&features, epsilon, &allowed, rng)
                    .expect("feature length matches the weights")
            }
            ReplayPolicy::Levy => {
                let options: Vec<usize> = (0..Direction::COUNT).filter(|&i| allowed[i]).collect();
                (!options.is_empty()).then(|| options[rng.gen_range(0..options.len())])
            }
        };
        let Some(dir) = choice.and_then(Direction::from_index) else {
            break;
        };
        let m = levy::sample_magnitude(levy_params, rng);
        let step = levy::project_step(dir, levy_params.alpha() * m, levy_params.s_max());
        let len = step.dx.abs().max(step.dy.abs());
        if len == 0 {
            // alpha = 0: the walker never moves.
            break;
        }
        for _ in 0..len {
            match at.step(dir, size) {
                Some(next) if world.is_passable(next) => {
                    lay(&mut trail, at);
                    at = next;
                    trace.push(at);
                    if at == start || trace.len() > budget {
                        break 'walk;
                    }
                }
                _ => break,
            }
        }
    }
    trace
}
