//! Spike-timing-dependent plasticity learner.
//!
//! Rows are pre-synaptic inputs (window cell x feature channel), columns are
//! post-synaptic move directions. A pair of spikes changes one weight by an
//! exponential asymmetric window:
//!
//! ```text
//! dw(dt) =  a_plus  * exp(-dt / tau_plus)    dt > 0  (pre before post)
//! dw(dt) = -a_minus * exp( dt / tau_minus)   dt < 0
//! dw(0)  = 0
//! ```
//!
//! and the result is clamped to `[w_min, w_max]`.

use std::io::{BufRead, Write};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StdpError {
    #[error("pre-synaptic index {index} out of range (rows = {rows})")]
    PreIndex { index: usize, rows: usize },
    #[error("post-synaptic index {index} out of range (columns = {cols})")]
    PostIndex { index: usize, cols: usize },
    #[error("feature vector has length {got}, expected {expected}")]
    FeatureLength { got: usize, expected: usize },
    #[error("invalid STDP parameter: {0}")]
    Param(String),
    #[error("weight CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StdpParams {
    pub a_plus: f64,
    pub a_minus: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub w_min: f64,
    pub w_max: f64,
    pub forget_factor: f64,
}

impl Default for StdpParams {
    fn default() -> Self {
        StdpParams {
            a_plus: 0.1,
            a_minus: 0.12,
            tau_plus: 20.0,
            tau_minus: 20.0,
            w_min: -1.0,
            w_max: 1.0,
            forget_factor: 1.0,
        }
    }
}

impl StdpParams {
    pub fn validate(&self) -> Result<(), StdpError> {
        let finite = [self.a_plus, self.a_minus, self.tau_plus, self.tau_minus, self.w_min, self.w_max];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(StdpError::Param("non-finite value".into()));
        }
        if self.a_plus <= 0.0 || self.a_minus <= 0.0 {
            return Err(StdpError::Param("amplitudes must be positive".into()));
        }
        if self.tau_plus <= 0.0 || self.tau_minus <= 0.0 {
            return Err(StdpError::Param("time constants must be positive".into()));
        }
        if self.w_min > self.w_max {
            return Err(StdpError::Param(format!("w_min {} > w_max {}", self.w_min, self.w_max)));
        }
        // a fresh matrix starts at zero
        if !(self.w_min <= 0.0 && 0.0 <= self.w_max) {
            return Err(StdpError::Param("weight bounds must bracket zero".into()));
        }
        if !(self.forget_factor > 0.0 && self.forget_factor <= 1.0) {
            return Err(StdpError::Param(format!("forget factor {} not in (0, 1]", self.forget_factor)));
        }
        Ok(())
    }
}

/// Weight change for a spike pair separated by `delta_t = t_post - t_pre`.
pub fn kernel(delta_t: i64, p: &StdpParams) -> f64 {
    let dt = delta_t as f64;
    match delta_t.signum() {
        1 => p.a_plus * (-dt / p.tau_plus).exp(),
        -1 => -p.a_minus * (dt / p.tau_minus).exp(),
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpikeEvent {
    pub neuron: usize,
    pub tick: u64,
}

impl SpikeEvent {
    pub fn new(neuron: usize, tick: u64) -> Self {
        SpikeEvent { neuron, tick }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynapseMatrix {
    rows: usize,
    cols: usize,
    params: StdpParams,
    w: Vec<f64>,
}

impl SynapseMatrix {
    pub fn zeros(rows: usize, cols: usize, params: StdpParams) -> Result<Self, StdpError> {
        params.validate()?;
        Ok(SynapseMatrix {
            rows,
            cols,
            params,
            w: vec![0.0; rows * cols],
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn params(&self) -> &StdpParams {
        &self.params
    }

    pub fn set_forget_factor(&mut self, forget_factor: f64) -> Result<(), StdpError> {
        let mut p = self.params;
        p.forget_factor = forget_factor;
        p.validate()?;
        self.params = p;
        Ok(())
    }

    pub fn weight(&self, pre: usize, post: usize) -> f64 {
        self.w[pre * self.cols + post]
    }

    /// Row-major weights, `pre * cols + post`.
    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    /// Overwrite one weight, clamped to the bounds.
    pub fn set_weight(&mut self, pre: usize, post: usize, value: f64) -> Result<(), StdpError> {
        self.check(pre, post)?;
        self.w[pre * self.cols + post] = value.clamp(self.params.w_min, self.params.w_max);
        Ok(())
    }

    fn check(&self, pre: usize, post: usize) -> Result<(), StdpError> {
        if pre >= self.rows {
            return Err(StdpError::PreIndex {
                index: pre,
                rows: self.rows,
            });
        }
        if post >= self.cols {
            return Err(StdpError::PostIndex {
                index: post,
                cols: self.cols,
            });
        }
        Ok(())
    }

    /// `w_ij <- clamp(w_ij + dw(t_post - t_pre))` for `i = post`, `j = pre`.
    pub fn apply_pair(&mut self, pre: SpikeEvent, post: SpikeEvent) -> Result<(), StdpError> {
        self.check(pre.neuron, post.neuron)?;
        let dt = post.tick as i64 - pre.tick as i64;
        let k = pre.neuron * self.cols + post.neuron;
        self.w[k] = (self.w[k] + kernel(dt, &self.params)).clamp(self.params.w_min, self.params.w_max);
        Ok(())
    }

    /// Multiply every weight by the forget factor.
    pub fn forget_tick(&mut self) {
        let f = self.params.forget_factor;
        if f != 1.0 {
            self.w.iter_mut().for_each(|w| *w *= f);
        }
    }

    /// Per-direction drive `features^T * W`.
    pub fn scores(&self, features: &[f64]) -> Result<Vec<f64>, StdpError> {
        if features.len() != self.rows {
            return Err(StdpError::FeatureLength {
                got: features.len(),
                expected: self.rows,
            });
        }
        let mut out = vec![0.0; self.cols];
        for (row, &f) in self.w.chunks_exact(self.cols).zip(features) {
            if f != 0.0 {
                for (o, &w) in out.iter_mut().zip(row) {
                    *o += f * w;
                }
            }
        }
        Ok(out)
    }

    /// Epsilon-greedy choice: uniform with probability `epsilon`, otherwise
    /// the highest score with ties going to the lowest index.
    pub fn select_move<R: Rng + ?Sized>(&self, features: &[f64], epsilon: f64, rng: &mut R) -> Result<usize, StdpError> {
        let allowed = vec![true; self.cols];
        self.select_move_masked(features, epsilon, &allowed, rng)
            .map(|d| d.expect("all directions allowed"))
    }

    /// As [`select_move`](Self::select_move) restricted to `allowed`
    /// columns. `None` when nothing is allowed.
    pub fn select_move_masked<R: Rng + ?Sized>(
        &self,
        features: &[f64],
        epsilon: f64,
        allowed: &[bool],
        rng: &mut R,
    ) -> Result<Option<usize>, StdpError> {
        let scores = self.scores(features)?;
        let candidates: Vec<usize> = (0..self.cols).filter(|&i| allowed.get(i).copied().unwrap_or(false)).collect();
        if candidates.is_empty() {
            return Ok(None);
        }
        if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
            return Ok(Some(candidates[rng.gen_range(0..candidates.len())]));
        }
        let mut best = candidates[0];
        for &i in &candidates[1..] {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        Ok(Some(best))
    }

    /// CSV with header `pre_index,direction,weight`, one row per weight in
    /// row-major order. Weights use the shortest round-trip decimal form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), StdpError> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["pre_index", "direction", "weight"])
            .map_err(|e| StdpError::Csv(e.to_string()))?;
        for pre in 0..self.rows {
            for post in 0..self.cols {
                wtr.write_record([pre.to_string(), post.to_string(), self.weight(pre, post).to_string()])
                    .map_err(|e| StdpError::Csv(e.to_string()))?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Load weights written by [`write_csv`](Self::write_csv) into a
    /// matrix of the given shape.
    pub fn read_csv<R: BufRead>(input: R, rows: usize, cols: usize, params: StdpParams) -> Result<Self, StdpError> {
        let mut m = Self::zeros(rows, cols, params)?;
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers().map_err(|e| StdpError::Csv(e.to_string()))?;
        if headers != vec!["pre_index", "direction", "weight"] {
            return Err(StdpError::Csv(format!("unexpected header {headers:?}")));
        }
        let mut seen = 0usize;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| StdpError::Csv(e.to_string()))?;
            let field = |i: usize| rec.get(i).ok_or_else(|| StdpError::Csv(format!("short record {rec:?}")));
            let pre: usize = field(0)?.parse().map_err(|_| StdpError::Csv(format!("bad pre index in {rec:?}")))?;
            let post: usize = field(1)?.parse().map_err(|_| StdpError::Csv(format!("bad direction in {rec:?}")))?;
            let w: f64 = field(2)?.parse().map_err(|_| StdpError::Csv(format!("bad weight in {rec:?}")))?;
            m.check(pre, post)?;
            m.w[pre * cols + post] = w;
            seen += 1;
        }
        if seen != rows * cols {
            return Err(StdpError::Csv(format!("expected {} weights, read {seen}", rows * cols)));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kernel_spot_values() {
        let p = StdpParams::default();
        assert_eq!(kernel(0, &p), 0.0);
        assert!((kernel(5, &p) - 0.1 * (-0.25f64).exp()).abs() < 1e-12);
        assert!((kernel(-5, &p) + 0.12 * (-0.25f64).exp()).abs() < 1e-12);
        assert!(kernel(1_000_000, &p) < 1e-20);
    }

    #[test]
    fn clamp_at_w_max() {
        let mut m = SynapseMatrix::zeros(2, 2, StdpParams::default()).unwrap();
        m.set_weight(0, 1, 1.0).unwrap();
        m.apply_pair(SpikeEvent::new(0, 10), SpikeEvent::new(1, 11)).unwrap();
        assert_eq!(m.weight(0, 1), 1.0);
    }

    #[test]
    fn index_errors() {
        let mut m = SynapseMatrix::zeros(3, 2, StdpParams::default()).unwrap();
        assert!(matches!(
            m.apply_pair(SpikeEvent::new(3, 0), SpikeEvent::new(0, 1)),
            Err(StdpError::PreIndex { .. })
        ));
        assert!(matches!(
            m.apply_pair(SpikeEvent::new(0, 0), SpikeEvent::new(2, 1)),
            Err(StdpError::PostIndex { .. })
        ));
    }

    #[test]
    fn forget_in_stone_mode_is_identity() {
        let mut m = SynapseMatrix::zeros(2, 2, StdpParams::default()).unwrap();
        m.set_weight(1, 1, 0.3).unwrap();
        let before = m.clone();
        m.forget_tick();
        assert_eq!(m, before);
    }

    #[test]
    fn zero_matrix_picks_lowest_index() {
        let m = SynapseMatrix::zeros(4, 8, StdpParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(m.select_move(&[0.3, 0.1, 0.0, 1.0], 0.0, &mut rng).unwrap(), 0);
    }

    #[test]
    fn masked_selection_skips_disallowed() {
        let mut m = SynapseMatrix::zeros(1, 3, StdpParams::default()).unwrap();
        m.set_weight(0, 0, 0.9).unwrap();
        m.set_weight(0, 2, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pick = m.select_move_masked(&[1.0], 0.0, &[false, true, true], &mut rng).unwrap();
        assert_eq!(pick, Some(2));
        assert_eq!(m.select_move_masked(&[1.0], 0.0, &[false; 3], &mut rng).unwrap(), None);
    }

    #[test]
    fn feature_length_checked() {
        let m = SynapseMatrix::zeros(4, 8, StdpParams::default()).unwrap();
        assert!(matches!(m.scores(&[1.0]), Err(StdpError::FeatureLength { .. })));
    }

    #[test]
    fn params_rejected() {
        let p = StdpParams {
            forget_factor: 0.0,
            ..StdpParams::default()
        };
        assert!(SynapseMatrix::zeros(1, 1, p).is_err());
    }
}
