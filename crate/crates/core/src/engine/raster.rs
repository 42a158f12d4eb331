//! Cell-by-cell rasterisation of a jump.

/// Integer points strictly after `(x0, y0)` up to and including
/// `(x0 + dx, y0 + dy)`, 8-connected (Bresenham).
pub fn line_points(x0: i64, y0: i64, dx: i64, dy: i64) -> Vec<(i64, i64)> {
    let n = dx.abs().max(dy.abs());
    let mut out = Vec::with_capacity(n as usize);
    let (ax, ay) = (dx.abs(), dy.abs());
    let (sx, sy) = (dx.signum(), dy.signum());
    let (mut x, mut y) = (x0, y0);
    let mut err = ax - ay;
    for _ in 0..n {
        let e2 = 2 * err;
        if e2 > -ay {
            err -= ay;
            x += sx;
        }
        if e2 < ax {
            err += ax;
            y += sy;
        }
        out.push((x, y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_and_diagonal() {
        assert_eq!(line_points(0, 0, 3, 0), vec![(1, 0), (2, 0), (3, 0)]);
        assert_eq!(line_points(5, 5, -2, -2), vec![(4, 4), (3, 3)]);
        assert!(line_points(1, 1, 0, 0).is_empty());
    }

    #[test]
    fn general_line_is_connected_and_ends_on_target() {
        for &(dx, dy) in &[(5, 2), (-3, 7), (4, -1), (0, -6)] {
            let pts = line_points(0, 0, dx, dy);
            assert_eq!(*pts.last().unwrap(), (dx, dy));
            let mut prev = (0, 0);
            for p in pts {
                assert!((p.0 - prev.0).abs() <= 1 && (p.1 - prev.1).abs() <= 1);
                prev = p;
            }
        }
    }
}
