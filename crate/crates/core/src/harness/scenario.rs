//! Scenario registry.
//!
//! The cloister is a square walk around a garden. Low mark-free mountains
//! stand on both sides of every edge, on alternating cells, so the walker
//! sees point features all the way round; the ones just past each corner
//! also stop straight runs from overshooting the turn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gridworld::{add_bump, Bump, CellCoord, CellKind, GridError, GridWorld, NOISE_FLOOR};

use super::config::RunConfig;
use super::HarnessError;

pub const SCENARIOS: &[&str] = &["cloister"];
pub const MIN_CLOISTER_SIZE: usize = 16;
const LANDMARK_HEIGHT: f64 = 0.5;
const LANDMARK_WIDTH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub world: GridWorld,
    /// Waypoints of the reference route, first and last at HOME.
    pub ground_truth: Vec<CellCoord>,
}

pub fn build_scenario(cfg: &RunConfig) -> Result<Scenario, HarnessError> {
    match cfg.scenario.as_str() {
        "cloister" => Ok(scenario_cloister(cfg.size, cfg.world_seed)?),
        other => Err(HarnessError::Config(format!(
            "unknown scenario {other:?} (known: {})",
            SCENARIOS.join(", ")
        ))),
    }
}

/// Corners `(c0, c1)` of the loop: a quarter of the grid in from each side,
/// shrunk by one if needed to make the side length even.
pub fn cloister_corners(size: usize) -> (usize, usize) {
    let c0 = size / 4;
    let mut c1 = size - 1 - c0;
    if (c1 - c0) % 2 == 1 {
        c1 -= 1;
    }
    (c0, c1)
}

/// Clockwise (east, south, west, north) from the top-left corner back to it.
pub fn cloister_path(c0: usize, c1: usize) -> Vec<CellCoord> {
    let mut path = Vec::with_capacity(4 * (c1 - c0) + 1);
    path.extend((c0..c1).map(|x| CellCoord::new(x, c0)));
    path.extend((c0..c1).map(|y| CellCoord::new(c1, y)));
    path.extend((c0 + 1..=c1).rev().map(|x| CellCoord::new(x, c1)));
    path.extend((c0 + 1..=c1).rev().map(|y| CellCoord::new(c0, y)));
    path.push(CellCoord::new(c0, c0));
    path
}

pub fn scenario_cloister(size: usize, seed: u64) -> Result<Scenario, GridError> {
    if size < MIN_CLOISTER_SIZE {
        return Err(GridError::SizeTooSmall(size));
    }
    let (c0, c1) = cloister_corners(size);
    let path = cloister_path(c0, c1);
    let idx = |c: CellCoord| c.y * size + c.x;

    let mut on_path = vec![false; size * size];
    for &c in &path {
        on_path[idx(c)] = true;
    }
    // Landmarks: odd-parity cells touching the path, thinned so that no two
    // are 8-neighbours (each must be a strict local maximum). The caps that
    // end the four straight runs are kept first.
    let caps = [
        CellCoord::new(c1 + 1, c0),
        CellCoord::new(c1, c1 + 1),
        CellCoord::new(c0 - 1, c1),
        CellCoord::new(c0, c0 - 1),
    ];
    let candidates = (0..size * size)
        .map(|i| CellCoord::new(i % size, i / size))
        .filter(|&c| (c.x + c.y) % 2 == 1 && !on_path[idx(c)])
        .filter(|&c| path.iter().any(|&p| p.chebyshev(c) == 1));
    let mut landmarks: Vec<CellCoord> = Vec::new();
    for c in caps.into_iter().chain(candidates) {
        if landmarks.iter().all(|&l| l.chebyshev(c) > 1) {
            landmarks.push(c);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut elevation: Vec<f64> = (0..size * size).map(|_| rng.gen::<f64>() * NOISE_FLOOR).collect();
    for &center in &landmarks {
        add_bump(
            &mut elevation,
            size,
            &Bump {
                center,
                height: LANDMARK_HEIGHT,
                width: LANDMARK_WIDTH,
            },
        );
    }

    let mut kinds = vec![CellKind::Open; size * size];
    for &c in &landmarks {
        kinds[idx(c)] = CellKind::Mountain;
    }
    for y in c1 + 2..size {
        for x in c1 + 2..size {
            kinds[y * size + x] = CellKind::Forest;
        }
    }
    let mid = (c0 + c1) / 2;
    kinds[idx(CellCoord::new(c0, c0))] = CellKind::Home;
    kinds[idx(CellCoord::new(mid, mid))] = CellKind::Palace;
    kinds[idx(CellCoord::new(size - 2, 1))] = CellKind::Ogre;

    let world = GridWorld::from_parts(size, seed, elevation, kinds)?;
    Ok(Scenario {
        world,
        ground_truth: path,
    })
}
