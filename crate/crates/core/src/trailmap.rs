//! Stigmergic trail layer.
//!
//! Stones persist at full strength; crumbs decay multiplicatively each tick
//! and are removed once they fall below the vanish threshold. Markers are
//! ordered by `seq`, the drop order along the outbound walk, and the
//! homeward direction is the reversal of that order.

use thiserror::Error;

use crate::gridworld::{CellCoord, Direction};

pub const DEFAULT_DECAY_FACTOR: f64 = 0.5;
pub const DEFAULT_VANISH_THRESHOLD: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrailError {
    #[error("decay factor must lie in (0, 1), got {0}")]
    DecayFactor(f64),
    #[error("vanish threshold must lie in (0, 1), got {0}")]
    VanishThreshold(f64),
    #[error("coordinate {coord} is outside a {size}x{size} trail map")]
    OutOfBounds { coord: CellCoord, size: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarkerKind {
    Stone,
    Crumb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marker {
    pub kind: MarkerKind,
    pub strength: f64,
    pub drop_tick: u64,
    pub seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrailParams {
    decay_factor: f64,
    vanish_threshold: f64,
}

impl TrailParams {
    pub fn new(decay_factor: f64, vanish_threshold: f64) -> Result<Self, TrailError> {
        if !(decay_factor > 0.0 && decay_factor < 1.0) {
            return Err(TrailError::DecayFactor(decay_factor));
        }
        if !(vanish_threshold > 0.0 && vanish_threshold < 1.0) {
            return Err(TrailError::VanishThreshold(vanish_threshold));
        }
        Ok(TrailParams {
            decay_factor,
            vanish_threshold,
        })
    }

    pub fn decay_factor(&self) -> f64 {
        self.decay_factor
    }

    pub fn vanish_threshold(&self) -> f64 {
        self.vanish_threshold
    }

    /// Ticks until a fresh crumb disappears.
    pub fn crumb_lifetime(&self) -> u64 {
        (self.vanish_threshold.ln() / self.decay_factor.ln()).ceil() as u64
    }
}

impl Default for TrailParams {
    fn default() -> Self {
        TrailParams {
            decay_factor: DEFAULT_DECAY_FACTOR,
            vanish_threshold: DEFAULT_VANISH_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrailMap {
    size: usize,
    params: TrailParams,
    cells: Vec<Option<Marker>>,
}

impl TrailMap {
    pub fn new(size: usize, params: TrailParams) -> Self {
        TrailMap {
            size,
            params,
            cells: vec![None; size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn params(&self) -> TrailParams {
        self.params
    }

    pub fn clear(&mut self) {
        self.cells.iter_mut().for_each(|c| *c = None);
    }

    fn index(&self, c: CellCoord) -> Result<usize, TrailError> {
        if c.x < self.size && c.y < self.size {
            Ok(c.y * self.size + c.x)
        } else {
            Err(TrailError::OutOfBounds {
                coord: c,
                size: self.size,
            })
        }
    }

    pub fn marker(&self, c: CellCoord) -> Option<&Marker> {
        self.index(c).ok().and_then(|i| self.cells[i].as_ref())
    }

    /// Strength at `c`, zero where nothing lies.
    pub fn strength(&self, c: CellCoord) -> f64 {
        self.marker(c).map_or(0.0, |m| m.strength)
    }

    pub fn len(&self) -> usize {
        self.cells.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn markers(&self) -> impl Iterator<Item = (CellCoord, &Marker)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(move |(i, m)| m.as_ref().map(|m| (CellCoord::new(i % self.size, i / self.size), m)))
    }

    /// Place a fresh full-strength marker. A marker already at `c` with a
    /// larger `seq` is kept instead.
    pub fn drop_marker(&mut self, c: CellCoord, kind: MarkerKind, tick: u64, seq: u64) -> Result<(), TrailError> {
        let i = self.index(c)?;
        if matches!(self.cells[i], Some(old) if old.seq > seq) {
            return Ok(());
        }
        self.cells[i] = Some(Marker {
            kind,
            strength: 1.0,
            drop_tick: tick,
            seq,
        });
        Ok(())
    }

    pub fn decay_tick(&mut self) {
        let TrailParams {
            decay_factor,
            vanish_threshold,
        } = self.params;
        for cell in &mut self.cells {
            if let Some(m) = cell {
                if m.kind == MarkerKind::Crumb {
                    m.strength *= decay_factor;
                    if m.strength < vanish_threshold {
                        *cell = None;
                    }
                }
            }
        }
    }

    /// Next homeward cell: the neighbour holding the largest `seq` strictly
    /// below the marker at `c` (any marker when `c` holds none). `None`
    /// means the trail has disappeared.
    pub fn follow_step(&self, c: CellCoord) -> Option<CellCoord> {
        let current = self.marker(c).map(|m| m.seq);
        Direction::ALL
            .into_iter()
            .filter_map(|d| c.step(d, self.size))
            .filter_map(|n| self.marker(n).map(|m| (n, m.seq)))
            .filter(|&(_, seq)| current.is_none_or(|cur| seq < cur))
            .max_by_key(|&(_, seq)| seq)
            .map(|(n, _)| n)
    }

    /// Heatmap as a P5 image: stones 255, crumbs scaled by strength.
    pub fn heatmap_pgm(&self) -> Vec<u8> {
        let pixels: Vec<u8> = self
            .cells
            .iter()
            .map(|m| match m {
                None => 0,
                Some(Marker {
                    kind: MarkerKind::Stone,
                    ..
                }) => 255,
                Some(m) => (m.strength.clamp(0.0, 1.0) * 255.0).round() as u8,
            })
            .collect();
        crate::pgm::encode(self.size, self.size, &pixels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map() -> TrailMap {
        TrailMap::new(8, TrailParams::default())
    }

    #[test]
    fn stones_never_fade() {
        let mut t = map();
        t.drop_marker(CellCoord::new(2, 2), MarkerKind::Stone, 0, 0).unwrap();
        for _ in 0..1000 {
            t.decay_tick();
        }
        assert_eq!(t.strength(CellCoord::new(2, 2)), 1.0);
    }

    #[test]
    fn redrop_keeps_newer_seq() {
        let mut t = map();
        let c = CellCoord::new(1, 1);
        t.drop_marker(c, MarkerKind::Crumb, 0, 3).unwrap();
        t.drop_marker(c, MarkerKind::Crumb, 5, 9).unwrap();
        assert_eq!(t.marker(c).unwrap().seq, 9);
        t.drop_marker(c, MarkerKind::Stone, 6, 4).unwrap();
        assert_eq!(t.marker(c).unwrap().seq, 9);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn crumb_vanishes_on_seventh_tick() {
        let mut t = map();
        let c = CellCoord::new(0, 0);
        t.drop_marker(c, MarkerKind::Crumb, 0, 0).unwrap();
        for _ in 0..6 {
            t.decay_tick();
            assert!(t.marker(c).is_some());
        }
        t.decay_tick();
        assert!(t.marker(c).is_none());
        assert_eq!(TrailParams::default().crumb_lifetime(), 7);
    }

    #[test]
    fn empty_map_decay_is_noop() {
        let mut t = map();
        t.decay_tick();
        assert!(t.is_empty());
    }

    #[test]
    fn lone_marker_has_no_successor() {
        let mut t = map();
        t.drop_marker(CellCoord::new(3, 3), MarkerKind::Stone, 0, 5).unwrap();
        assert_eq!(t.follow_step(CellCoord::new(3, 3)), None);
    }

    #[test]
    fn out_of_bounds_drop() {
        let mut t = map();
        assert!(t.drop_marker(CellCoord::new(8, 0), MarkerKind::Stone, 0, 0).is_err());
    }

    #[test]
    fn params_validated() {
        assert!(TrailParams::new(1.0, 0.01).is_err());
        assert!(TrailParams::new(0.5, 0.0).is_err());
    }
}
