//! The 3x3 family window and its sensory encoding.

use crate::gridworld::{CellCoord, GridWorld};
use crate::trailmap::TrailMap;

pub const WINDOW_CELLS: usize = 9;
/// elevation, trail strength, mark value, obstacle flag
pub const FEATURE_CHANNELS: usize = 4;
pub const FEATURE_LEN: usize = WINDOW_CELLS * FEATURE_CHANNELS;
/// Window cell occupied by the parents (top-left).
pub const PARENT_CELL: usize = 0;
/// Window cell occupied by Tom (centre).
pub const TOM_CELL: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Member {
    Empty,
    Parents,
    Tom,
    Brother(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Headwear {
    Hat,
    Crown,
}

impl Headwear {
    pub fn sign(self) -> f64 {
        match self {
            Headwear::Hat => 1.0,
            Headwear::Crown => -1.0,
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Headwear::Hat => 1,
            Headwear::Crown => -1,
        }
    }
}

/// Row-major layout, row 0 facing north.
const LAYOUT: [Member; WINDOW_CELLS] = [
    Member::Parents,
    Member::Brother(1),
    Member::Brother(2),
    Member::Brother(3),
    Member::Tom,
    Member::Brother(5),
    Member::Brother(4),
    Member::Brother(7),
    Member::Brother(6),
];

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyWindow {
    occupancy: [Member; WINDOW_CELLS],
    headwear: Headwear,
    anchor: CellCoord,
}

impl FamilyWindow {
    pub fn new(anchor: CellCoord) -> Self {
        FamilyWindow {
            occupancy: LAYOUT,
            headwear: Headwear::Hat,
            anchor,
        }
    }

    pub fn anchor(&self) -> CellCoord {
        self.anchor
    }

    /// The whole family moves rigidly with its centre.
    pub fn set_anchor(&mut self, anchor: CellCoord) {
        self.anchor = anchor;
    }

    pub fn headwear(&self) -> Headwear {
        self.headwear
    }

    pub fn set_headwear(&mut self, headwear: Headwear) {
        self.headwear = headwear;
    }

    pub fn occupancy(&self) -> &[Member; WINDOW_CELLS] {
        &self.occupancy
    }

    pub fn parent_present(&self) -> bool {
        self.occupancy[PARENT_CELL] == Member::Parents
    }

    /// Parents flee: their cell reads zero from now on.
    pub fn zero_parents(&mut self) {
        self.occupancy[PARENT_CELL] = Member::Empty;
    }

    pub fn restore_parents(&mut self) {
        self.occupancy[PARENT_CELL] = Member::Parents;
    }

    /// Grid offset of window cell `k`.
    pub fn cell_offset(k: usize) -> (i64, i64) {
        ((k % 3) as i64 - 1, (k / 3) as i64 - 1)
    }
}

/// Encode the window as `9 x 4` channels, each multiplied by the headwear
/// sign. Cells beyond the world edge read as obstacles; the parents' cell
/// is silent once they have fled.
pub fn sense_features(window: &FamilyWindow, world: &GridWorld, trail: &TrailMap) -> Vec<f64> {
    let mut out = vec![0.0; FEATURE_LEN];
    let sign = window.headwear.sign();
    for (k, chunk) in out.chunks_exact_mut(FEATURE_CHANNELS).enumerate() {
        if k == PARENT_CELL && !window.parent_present() {
            continue;
        }
        let (dx, dy) = FamilyWindow::cell_offset(k);
        let raw = match window.anchor.offset(dx, dy, world.size()) {
            Some(c) => {
                let kind = world.kind(c);
                [
                    world.normalized_elevation(c),
                    trail.strength(c),
                    f64::from(kind.mark_value()),
                    if kind.is_passable() { 0.0 } else { 1.0 },
                ]
            }
            None => [0.0, 0.0, 0.0, 1.0],
        };
        for (o, r) in chunk.iter_mut().zip(raw) {
            *o = sign * r;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_layout() {
        let w = FamilyWindow::new(CellCoord::new(3, 3));
        assert_eq!(w.occupancy()[PARENT_CELL], Member::Parents);
        assert_eq!(w.occupancy()[TOM_CELL], Member::Tom);
        let brothers = w.occupancy().iter().filter(|m| matches!(m, Member::Brother(_))).count();
        assert_eq!(brothers, 7);
        assert_eq!(FamilyWindow::cell_offset(PARENT_CELL), (-1, -1));
        assert_eq!(FamilyWindow::cell_offset(TOM_CELL), (0, 0));
    }

    #[test]
    fn fleeing_parents_empty_their_cell() {
        let mut w = FamilyWindow::new(CellCoord::new(0, 0));
        w.zero_parents();
        assert!(!w.parent_present());
        assert_eq!(w.occupancy()[PARENT_CELL], Member::Empty);
        assert_eq!(w.occupancy()[TOM_CELL], Member::Tom);
    }
}
