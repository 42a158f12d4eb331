//! Trace-versus-ground-truth scoring and paired comparison statistics.

use crate::gridworld::CellCoord;

/// Waypoint errors of a trace against the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub matched: usize,
    pub total: usize,
    /// Signed `trace - waypoint` offsets of the nearest trace cell, one per
    /// matched waypoint.
    pub err_x: Vec<i64>,
    pub err_y: Vec<i64>,
}

impl MatchOutcome {
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.matched as f64 / self.total as f64
        }
    }

    pub fn mean_abs_err_x(&self) -> f64 {
        mean_abs(&self.err_x)
    }

    pub fn mean_abs_err_y(&self) -> f64 {
        mean_abs(&self.err_y)
    }
}

fn mean_abs(v: &[i64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().map(|e| e.unsigned_abs() as f64).sum::<f64>() / v.len() as f64
    }
}

/// A waypoint matches when some trace cell lies within `tolerance`
/// (Chebyshev). The nearest such cell, earliest on ties, gives the error.
pub fn match_trace(ground_truth: &[CellCoord], trace: &[CellCoord], tolerance: f64) -> MatchOutcome {
    let mut out = MatchOutcome {
        matched: 0,
        total: ground_truth.len(),
        err_x: Vec::new(),
        err_y: Vec::new(),
    };
    for &w in ground_truth {
        let nearest = trace.iter().min_by_key(|c| c.chebyshev(w));
        if let Some(&c) = nearest {
            if c.chebyshev(w) as f64 <= tolerance {
                out.matched += 1;
                out.err_x.push(c.x as i64 - w.x as i64);
                out.err_y.push(c.y as i64 - w.y as i64);
            }
        }
    }
    out
}

pub fn match_rate(ground_truth: &[CellCoord], trace: &[CellCoord], tolerance: f64) -> f64 {
    match_trace(ground_truth, trace, tolerance).rate()
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Sample standard deviation; zero below two values.
pub fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// One-sided `P(X >= wins)` for `X ~ Binomial(wins + losses, 1/2)`.
    pub p_value: f64,
}

/// Exact one-sided sign test that `a` tends to exceed `b`.
pub fn sign_test(a: &[f64], b: &[f64]) -> SignTest {
    assert_eq!(a.len(), b.len(), "sign test needs paired samples");
    let wins = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let ties = a.len() - wins - losses;
    SignTest {
        wins,
        losses,
        ties,
        p_value: binomial_upper_tail(wins + losses, wins),
    }
}

/// `P(X >= k)` for `X ~ Binomial(n, 1/2)`, summed in log space.
pub fn binomial_upper_tail(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let ln_half_n = n as f64 * 0.5f64.ln();
    let mut ln_choose = 0.0; // ln C(n, 0)
    let mut total = 0.0;
    for i in 0..=n {
        if i > 0 {
            ln_choose += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        if i >= k {
            total += (ln_choose + ln_half_n).exp();
        }
    }
    total.min(1.0)
}
