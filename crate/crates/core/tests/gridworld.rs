use proptest::prelude::*;
use stt::gridworld::{generate_world, mark_value, parse_kind_dump, CellCoord, CellKind, Direction};

#[test]
fn six_mountains_are_strict_local_maxima() {
    let w = generate_world(64, 6, 7).unwrap();
    assert_eq!(w.mountains().count(), 6);
    // Independent scan over every cell and its full neighbourhood.
    let n = w.size();
    for c in w.mountains() {
        let e = w.elevation(c);
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if (dx, dy) == (0, 0) {
                    continue;
                }
                let (x, y) = (c.x as i64 + dx, c.y as i64 + dy);
                if (0..n as i64).contains(&x) && (0..n as i64).contains(&y) {
                    assert!(w.elevation(CellCoord::new(x as usize, y as usize)) < e, "{c} not strict");
                }
            }
        }
    }
}

#[test]
fn same_seed_same_world() {
    let a = generate_world(64, 6, 7).unwrap();
    let b = generate_world(64, 6, 7).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, generate_world(64, 6, 8).unwrap());
}

#[test]
fn flat_world_complement_is_open() {
    let w = generate_world(8, 0, 42).unwrap();
    let placed = [w.home(), w.palace(), w.ogre()];
    for c in w.cells() {
        let k = w.cell_kind(c).unwrap();
        if placed.contains(&c) || k == CellKind::Forest {
            continue;
        }
        assert_eq!(k, CellKind::Open, "{c}");
    }
    assert_eq!(w.cell_kind(w.home()).unwrap(), CellKind::Home);
    assert_eq!(w.cell_kind(w.ogre()).unwrap().mark_value(), -1);
}

#[test]
fn mark_signs_cancel() {
    assert_eq!(mark_value(CellKind::Palace) + mark_value(CellKind::Ogre), 0);
    assert_eq!(mark_value(CellKind::Open), 0);
}

#[test]
fn kind_dump_round_trip() {
    let w = generate_world(16, 3, 5).unwrap();
    let text = w.render_kinds();
    assert!(text.starts_with("16 5 3\n"));
    let dump = parse_kind_dump(&text).unwrap();
    assert_eq!(dump.size, 16);
    let kinds: Vec<CellKind> = w.cells().map(|c| w.kind(c)).collect();
    assert_eq!(dump.kinds, kinds);
}

#[test]
fn elevation_pgm_header_and_range() {
    let w = generate_world(16, 3, 5).unwrap();
    let img = w.elevation_pgm();
    let (width, height, px) = stt::pgm::decode(&img).unwrap();
    assert_eq!((width, height), (16, 16));
    assert_eq!(px.iter().copied().max(), Some(255));
    assert_eq!(px.iter().copied().min(), Some(0));
}

fn forest_is_connected(w: &stt::gridworld::GridWorld) -> bool {
    let forest: Vec<CellCoord> = w.cells_of(CellKind::Forest).collect();
    let Some(&start) = forest.first() else { return false };
    let mut seen = vec![start];
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        for d in Direction::ALL {
            if let Some(n) = c.step(d, w.size()) {
                if w.kind(n) == CellKind::Forest && !seen.contains(&n) {
                    seen.push(n);
                    stack.push(n);
                }
            }
        }
    }
    seen.len() == forest.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_worlds_hold_invariants(size in 8usize..40, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let n_mountains = ((size * size / 16) as f64 * frac * 0.5) as usize;
        let w = generate_world(size, n_mountains, seed).unwrap();
        prop_assert_eq!(w.cells_of(CellKind::Home).count(), 1);
        prop_assert_eq!(w.cells_of(CellKind::Palace).count(), 1);
        prop_assert_eq!(w.cells_of(CellKind::Ogre).count(), 1);
        prop_assert_eq!(w.mountains().count(), n_mountains);
        for c in w.mountains() {
            prop_assert!(w.is_strict_local_max(c));
        }
        let specials = [w.home(), w.palace(), w.ogre()];
        prop_assert!(specials[0] != specials[1] && specials[1] != specials[2] && specials[0] != specials[2]);
        prop_assert!(forest_is_connected(&w));
        prop_assert_eq!(w, generate_world(size, n_mountains, seed).unwrap());
    }
}

#[test]
fn densest_allowed_worlds_generate() {
    for size in [8, 9, 13, 20, 33, 64] {
        for seed in 0..5 {
            let w = generate_world(size, size * size / 16, seed).unwrap();
            assert_eq!(w.mountains().count(), size * size / 16);
            assert!(w.mountains().all(|m| w.is_strict_local_max(m)));
        }
    }
}
