//! Seeded procedural grid environment.
//!
//! The world is an `N x N` metric grid. Elevation is a sum of Gaussian bumps
//! over a small uniform noise floor; each bump centre is tagged `MOUNTAIN`
//! and is guaranteed to be a strict local maximum of its 8-neighbourhood.
//! Coordinates use image convention: `x` grows east, `y` grows south.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Upper bound of the uniform noise floor added to every cell.
pub const NOISE_FLOOR: f64 = 0.01;
/// Placement retries before generation gives up.
pub const MAX_PLACEMENT_RETRIES: usize = 1000;
/// Grid size used when none is configured.
pub const DEFAULT_SIZE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid size {0} is too small (minimum 8)")]
    SizeTooSmall(usize),
    #[error("{n_mountains} mountains exceed the limit of {limit} for a {size}x{size} grid")]
    TooManyMountains {
        n_mountains: usize,
        size: usize,
        limit: usize,
    },
    #[error("generation failed: could not place {0} after {MAX_PLACEMENT_RETRIES} retries")]
    Placement(&'static str),
    #[error("coordinate ({x}, {y}) is outside a {size}x{size} grid")]
    OutOfBounds { x: i64, y: i64, size: usize },
    #[error("invalid world: {0}")]
    Invalid(String),
    #[error("world dump parse error: {0}")]
    Parse(String),
}

/// Cell tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Open,
    Mountain,
    Home,
    Palace,
    Ogre,
    Forest,
    Obstacle,
}

impl CellKind {
    pub const ALL: [CellKind; 7] = [
        CellKind::Open,
        CellKind::Mountain,
        CellKind::Home,
        CellKind::Palace,
        CellKind::Ogre,
        CellKind::Forest,
        CellKind::Obstacle,
    ];

    pub fn glyph(self) -> char {
        match self {
            CellKind::Open => '.',
            CellKind::Mountain => 'M',
            CellKind::Home => 'H',
            CellKind::Palace => 'P',
            CellKind::Ogre => 'O',
            CellKind::Forest => 'F',
            CellKind::Obstacle => '#',
        }
    }

    pub fn from_glyph(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.glyph() == c)
    }

    /// Mountains and obstacles block movement.
    pub fn is_passable(self) -> bool {
        !matches!(self, CellKind::Mountain | CellKind::Obstacle)
    }

    pub fn mark_value(self) -> i8 {
        mark_value(self)
    }
}

/// Sign carried by a cell: the palace is the desired target (+1), the
/// ogre's house is the negative region (-1), everything else is unmarked.
pub fn mark_value(kind: CellKind) -> i8 {
    match kind {
        CellKind::Palace => 1,
        CellKind::Ogre => -1,
        _ => 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellCoord {
    pub x: usize,
    pub y: usize,
}

impl CellCoord {
    pub const fn new(x: usize, y: usize) -> Self {
        CellCoord { x, y }
    }

    /// Neighbour at `(x + dx, y + dy)` if it lies inside a `size` grid.
    pub fn offset(self, dx: i64, dy: i64, size: usize) -> Option<CellCoord> {
        let x = self.x as i64 + dx;
        let y = self.y as i64 + dy;
        if x < 0 || y < 0 || x >= size as i64 || y >= size as i64 {
            None
        } else {
            Some(CellCoord::new(x as usize, y as usize))
        }
    }

    pub fn step(self, dir: Direction, size: usize) -> Option<CellCoord> {
        let (dx, dy) = dir.offset();
        self.offset(dx, dy, size)
    }

    pub fn chebyshev(self, other: CellCoord) -> usize {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }

    pub fn euclidean(self, other: CellCoord) -> f64 {
        let dx = self.x as f64 - other.x as f64;
        let dy = self.y as f64 - other.y as f64;
        dx.hypot(dy)
    }

    /// Direction of a single 8-connected move from `self` to `to`.
    pub fn direction_to(self, to: CellCoord) -> Option<Direction> {
        let dx = to.x as i64 - self.x as i64;
        let dy = to.y as i64 - self.y as i64;
        Direction::from_offset(dx, dy)
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The eight compass moves, indexed counter-clockwise from east.
///
/// The index is the post-synaptic neuron index of the learner and the
/// tie-break order of move selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    East = 0,
    NorthEast = 1,
    North = 2,
    NorthWest = 3,
    West = 4,
    SouthWest = 5,
    South = 6,
    SouthEast = 7,
}

impl Direction {
    pub const COUNT: usize = 8;
    pub const ALL: [Direction; 8] = [
        Direction::East,
        Direction::NorthEast,
        Direction::North,
        Direction::NorthWest,
        Direction::West,
        Direction::SouthWest,
        Direction::South,
        Direction::SouthEast,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Direction> {
        Self::ALL.get(i).copied()
    }

    /// Grid offset, with north being `y - 1`.
    pub fn offset(self) -> (i64, i64) {
        match self {
            Direction::East => (1, 0),
            Direction::NorthEast => (1, -1),
            Direction::North => (0, -1),
            Direction::NorthWest => (-1, -1),
            Direction::West => (-1, 0),
            Direction::SouthWest => (-1, 1),
            Direction::South => (0, 1),
            Direction::SouthEast => (1, 1),
        }
    }

    pub fn from_offset(dx: i64, dy: i64) -> Option<Direction> {
        Self::ALL.into_iter().find(|d| d.offset() == (dx, dy))
    }

    pub fn is_diagonal(self) -> bool {
        self.index() % 2 == 1
    }

    pub fn opposite(self) -> Direction {
        Self::ALL[(self.index() + 4) % 8]
    }
}

/// Immutable seeded environment.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWorld {
    size: usize,
    seed: u64,
    n_mountains: usize,
    elevation: Vec<f64>,
    kinds: Vec<CellKind>,
    home: CellCoord,
    palace: CellCoord,
    ogre: CellCoord,
    elevation_min: f64,
    elevation_max: f64,
}

impl GridWorld {
    /// Assemble a world from explicit layers and check every invariant.
    ///
    /// Used by scenario builders that lay out their own geometry.
    pub fn from_parts(
        size: usize,
        seed: u64,
        elevation: Vec<f64>,
        kinds: Vec<CellKind>,
    ) -> Result<Self, GridError> {
        if size == 0 || elevation.len() != size * size || kinds.len() != size * size {
            return Err(GridError::Invalid(format!(
                "layer lengths {}/{} do not match size {size}",
                elevation.len(),
                kinds.len()
            )));
        }
        if elevation.iter().any(|e| !e.is_finite()) {
            return Err(GridError::Invalid("non-finite elevation".into()));
        }
        let find_unique = |kind: CellKind| -> Result<CellCoord, GridError> {
            let mut found = kinds
                .iter()
                .enumerate()
                .filter(|(_, k)| **k == kind)
                .map(|(i, _)| CellCoord::new(i % size, i / size));
            match (found.next(), found.next()) {
                (Some(c), None) => Ok(c),
                (None, _) => Err(GridError::Invalid(format!("no {kind:?} cell"))),
                (Some(_), Some(_)) => Err(GridError::Invalid(format!("more than one {kind:?} cell"))),
            }
        };
        let home = find_unique(CellKind::Home)?;
        let palace = find_unique(CellKind::Palace)?;
        let ogre = find_unique(CellKind::Ogre)?;
        let (elevation_min, elevation_max) = elevation
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        let world = GridWorld {
            size,
            seed,
            n_mountains: kinds.iter().filter(|k| **k == CellKind::Mountain).count(),
            elevation,
            kinds,
            home,
            palace,
            ogre,
            elevation_min,
            elevation_max,
        };
        if let Some(c) = world.mountains().find(|&c| !world.is_strict_local_max(c)) {
            return Err(GridError::Invalid(format!("mountain at {c} is not a strict local maximum")));
        }
        Ok(world)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_mountains(&self) -> usize {
        self.n_mountains
    }

    pub fn home(&self) -> CellCoord {
        self.home
    }

    pub fn palace(&self) -> CellCoord {
        self.palace
    }

    pub fn ogre(&self) -> CellCoord {
        self.ogre
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        c.x < self.size && c.y < self.size
    }

    fn index(&self, c: CellCoord) -> usize {
        c.y * self.size + c.x
    }

    fn check(&self, c: CellCoord) -> Result<(), GridError> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(GridError::OutOfBounds {
                x: c.x as i64,
                y: c.y as i64,
                size: self.size,
            })
        }
    }

    pub fn cell_kind(&self, c: CellCoord) -> Result<CellKind, GridError> {
        self.check(c)?;
        Ok(self.kinds[self.index(c)])
    }

    /// Unchecked read; panics outside the grid.
    pub fn kind(&self, c: CellCoord) -> CellKind {
        self.kinds[self.index(c)]
    }

    pub fn elevation(&self, c: CellCoord) -> f64 {
        self.elevation[self.index(c)]
    }

    /// Elevation min-max normalised to `[0, 1]`; a flat world reads 0.
    pub fn normalized_elevation(&self, c: CellCoord) -> f64 {
        let span = self.elevation_max - self.elevation_min;
        if span > 0.0 {
            (self.elevation(c) - self.elevation_min) / span
        } else {
            0.0
        }
    }

    pub fn is_passable(&self, c: CellCoord) -> bool {
        self.contains(c) && self.kind(c).is_passable()
    }

    pub fn cells(&self) -> impl Iterator<Item = CellCoord> + '_ {
        (0..self.size * self.size).map(move |i| CellCoord::new(i % self.size, i / self.size))
    }

    pub fn cells_of(&self, kind: CellKind) -> impl Iterator<Item = CellCoord> + '_ {
        self.cells().filter(move |&c| self.kind(c) == kind)
    }

    pub fn mountains(&self) -> impl Iterator<Item = CellCoord> + '_ {
        self.cells_of(CellKind::Mountain)
    }

    pub fn neighbors(&self, c: CellCoord) -> impl Iterator<Item = CellCoord> + '_ {
        Direction::ALL.into_iter().filter_map(move |d| c.step(d, self.size))
    }

    /// True when `c` is strictly higher than every in-grid 8-neighbour.
    pub fn is_strict_local_max(&self, c: CellCoord) -> bool {
        let e = self.elevation(c);
        self.neighbors(c).all(|n| self.elevation(n) < e)
    }

    /// Plain-text dump: header `size seed n_mountains`, then one glyph row
    /// per grid row starting at `y = 0`.
    pub fn render_kinds(&self) -> String {
        let mut out = format!("{} {} {}\n", self.size, self.seed, self.n_mountains);
        for row in self.kinds.chunks(self.size) {
            out.extend(row.iter().map(|k| k.glyph()));
            out.push('\n');
        }
        out
    }

    /// Elevation as a binary greyscale PPM (P5), min-max normalised.
    pub fn elevation_pgm(&self) -> Vec<u8> {
        let pixels: Vec<u8> = self
            .cells()
            .map(|c| (self.normalized_elevation(c) * 255.0).round() as u8)
            .collect();
        crate::pgm::encode(self.size, self.size, &pixels)
    }
}

/// Parsed form of a world dump.
#[derive(Debug, Clone, PartialEq)]
pub struct KindDump {
    pub size: usize,
    pub seed: u64,
    pub n_mountains: usize,
    pub kinds: Vec<CellKind>,
}

pub fn parse_kind_dump(text: &str) -> Result<KindDump, GridError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| GridError::Parse("empty dump".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [size, seed, n_mountains] = fields.as_slice() else {
        return Err(GridError::Parse(format!("bad header {header:?}")));
    };
    let parse_err = |what: &str| GridError::Parse(format!("bad {what} in header {header:?}"));
    let size: usize = size.parse().map_err(|_| parse_err("size"))?;
    let seed: u64 = seed.parse().map_err(|_| parse_err("seed"))?;
    let n_mountains: usize = n_mountains.parse().map_err(|_| parse_err("n_mountains"))?;
    let mut kinds = Vec::with_capacity(size * size);
    for (row, line) in lines.enumerate() {
        if line.chars().count() != size {
            return Err(GridError::Parse(format!("row {row} has width {}", line.len())));
        }
        for ch in line.chars() {
            kinds.push(CellKind::from_glyph(ch).ok_or_else(|| GridError::Parse(format!("unknown glyph {ch:?}")))?);
        }
    }
    if kinds.len() != size * size {
        return Err(GridError::Parse(format!("expected {size} rows")));
    }
    Ok(KindDump {
        size,
        seed,
        n_mountains,
        kinds,
    })
}

/// Isotropic Gaussian bump `height * exp(-d^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: CellCoord,
    pub height: f64,
    pub width: f64,
}

/// Contributions below `1e-12 * height` (beyond about 7.5 widths) are
/// skipped.
pub fn add_bump(elevation: &mut [f64], size: usize, bump: &Bump) {
    let two_var = 2.0 * bump.width * bump.width;
    let reach = (bump.width * 7.5).ceil() as usize;
    let (cx, cy) = (bump.center.x, bump.center.y);
    for y in cy.saturating_sub(reach)..(cy + reach + 1).min(size) {
        for x in cx.saturating_sub(reach)..(cx + reach + 1).min(size) {
            let dx = x as f64 - bump.center.x as f64;
            let dy = y as f64 - bump.center.y as f64;
            elevation[y * size + x] += bump.height * (-(dx * dx + dy * dy) / two_var).exp();
        }
    }
}

/// Build a seeded world: noise floor, `n_mountains` Gaussian peaks, one
/// HOME on the west side, a square FOREST (~10% of the grid) on the east
/// edge, and one PALACE and one OGRE on open cells.
pub fn generate_world(size: usize, n_mountains: usize, seed: u64) -> Result<GridWorld, GridError> {
    if size < 8 {
        return Err(GridError::SizeTooSmall(size));
    }
    let limit = size * size / 16;
    if n_mountains > limit {
        return Err(GridError::TooManyMountains {
            n_mountains,
            size,
            limit,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..size * size).map(|_| rng.gen::<f64>() * NOISE_FLOOR).collect();

    let home = CellCoord::new(rng.gen_range(1..=size / 4), rng.gen_range(1..size - 1));
    let forest_side = ((size as f64 * 0.1f64.sqrt()).round() as usize).max(2);
    let forest_x0 = size - forest_side;
    let forest_y0 = rng.gen_range(0..=size - forest_side);
    let in_forest = |c: CellCoord| c.x >= forest_x0 && c.y >= forest_y0 && c.y < forest_y0 + forest_side;

    let mut candidates: Vec<CellCoord> = (0..size * size)
        .map(|i| CellCoord::new(i % size, i / size))
        .filter(|&c| !in_forest(c) && c.chebyshev(home) >= 2)
        .collect();
    candidates.shuffle(&mut rng);
    // Greedy pass over shuffled candidates: well separated peaks when they
    // fit, merely non-adjacent ones for dense requests. A maximal
    // non-adjacent set always holds at least a ninth of the candidates.
    let mut centers: Vec<CellCoord> = Vec::with_capacity(n_mountains);
    for gap in [3, 2] {
        centers.clear();
        for &c in &candidates {
            if centers.len() == n_mountains {
                break;
            }
            if centers.iter().all(|o| o.chebyshev(c) >= gap) {
                centers.push(c);
            }
        }
        if centers.len() == n_mountains {
            break;
        }
    }
    if centers.len() < n_mountains {
        return Err(GridError::Placement("mountains"));
    }
    let mut bumps: Vec<Bump> = centers
        .iter()
        .map(|&center| Bump {
            center,
            height: rng.gen_range(1.0..2.0),
            width: rng.gen_range(0.6..1.6),
        })
        .collect();

    // Narrow the bumps around any peak that is not strict. Below width 0.4
    // a bump adds under 0.05 to its neighbours, so this terminates.
    let mut elevation = noise.clone();
    let mut placed = false;
    for _ in 0..MAX_PLACEMENT_RETRIES {
        elevation.copy_from_slice(&noise);
        for b in &bumps {
            add_bump(&mut elevation, size, b);
        }
        let broken: Vec<CellCoord> = centers
            .iter()
            .copied()
            .filter(|&c| {
                let e = elevation[c.y * size + c.x];
                Direction::ALL
                    .into_iter()
                    .filter_map(|d| c.step(d, size))
                    .any(|n| elevation[n.y * size + n.x] >= e)
            })
            .collect();
        if broken.is_empty() {
            placed = true;
            break;
        }
        for b in &mut bumps {
            if broken.iter().any(|c| c.chebyshev(b.center) <= 3) {
                b.width *= 0.75;
            }
        }
    }
    if !placed {
        return Err(GridError::Placement("mountains as strict local maxima"));
    }

    let mut kinds = vec![CellKind::Open; size * size];
    for y in forest_y0..forest_y0 + forest_side {
        for x in forest_x0..size {
            kinds[y * size + x] = CellKind::Forest;
        }
    }
    for &c in &centers {
        kinds[c.y * size + c.x] = CellKind::Mountain;
    }
    kinds[home.y * size + home.x] = CellKind::Home;

    for (kind, what) in [(CellKind::Palace, "palace"), (CellKind::Ogre, "ogre's house")] {
        let mut spot = None;
        for _ in 0..MAX_PLACEMENT_RETRIES {
            let c = CellCoord::new(rng.gen_range(0..size), rng.gen_range(0..size));
            if kinds[c.y * size + c.x] == CellKind::Open {
                spot = Some(c);
                break;
            }
        }
        let c = spot.ok_or(GridError::Placement(what))?;
        kinds[c.y * size + c.x] = kind;
    }

    GridWorld::from_parts(size, seed, elevation, kinds)
}
