//! Cost-to-go of an executed path.
//!
//! `V = sum_k L(x_k, x_{k+1})` with the per-step Lagrangian
//! `L = |x_{k+1} - x_k| + beta * adjacent(x_{k+1}) - gamma * mark(x_{k+1})`,
//! where `adjacent` is 1 when the destination touches an impassable cell.

use crate::gridworld::{CellCoord, GridWorld};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lagrangian {
    pub beta: f64,
    pub gamma: f64,
}

impl Default for Lagrangian {
    fn default() -> Self {
        Lagrangian { beta: 1.0, gamma: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostToGo {
    pub value: f64,
    /// Fewer than two positions: the sum is empty.
    pub degenerate: bool,
}

/// 1.0 when any in-grid 8-neighbour of `c` is impassable.
pub fn obstacle_adjacency(world: &GridWorld, c: CellCoord) -> f64 {
    if world.neighbors(c).any(|n| !world.kind(n).is_passable()) {
        1.0
    } else {
        0.0
    }
}

pub fn step_cost(world: &GridWorld, from: CellCoord, to: CellCoord, l: &Lagrangian) -> f64 {
    from.euclidean(to) + l.beta * obstacle_adjacency(world, to) - l.gamma * f64::from(world.kind(to).mark_value())
}

pub fn cost_to_go(trace: &[CellCoord], world: &GridWorld, l: &Lagrangian) -> CostToGo {
    if trace.len() < 2 {
        return CostToGo {
            value: 0.0,
            degenerate: true,
        };
    }
    let value = trace.windows(2).map(|w| step_cost(world, w[0], w[1], l)).sum();
    CostToGo {
        value,
        degenerate: false,
    }
}
