//! Stacked leaky-integrator echo-state network with a per-action linear
//! readout trained by temporal-difference updates.

mod checkpoint;

pub use checkpoint::{CheckpointHeader, CHECKPOINT_MAGIC};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scenario::EsnParams;

#[derive(Clone, Debug, PartialEq)]
pub struct EsnLayer {
    /// Input weights: `size x N_U` for the first layer, `size x size_prev`
    /// after that.
    pub w_in: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub leak: f64,
    pub state: DVector<f64>,
}

impl EsnLayer {
    pub fn size(&self) -> usize {
        self.w.nrows()
    }

    fn step(&mut self, input: &DVector<f64>) {
        let pre = &self.w_in * input + &self.w * &self.state;
        let w = self.leak;
        self.state.zip_apply(&pre, |x, p| *x = (1.0 - w) * *x + w * p.tanh());
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeepEsn {
    pub layers: Vec<EsnLayer>,
    /// `|Z| x (N_U + sum of reservoir sizes)`.
    pub w_out: DMatrix<f64>,
    pub spectral_radius_target: f64,
}

/// Largest eigenvalue modulus of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.complex_eigenvalues().iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn uniform_matrix(rows: usize, cols: usize, scale: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..=scale))
}

/// Draws a dense recurrent matrix and rescales it to spectral radius `target`.
/// Degenerate draws with zero spectral radius are redrawn.
pub fn scaled_reservoir(size: usize, target: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    loop {
        let w = uniform_matrix(size, size, 1.0, rng);
        let rho = spectral_radius(&w);
        if rho > 0.0 && rho.is_finite() {
            return w * (target / rho);
        }
    }
}

/// Builds a network with random input and recurrent weights, zero readout and
/// zero states.
pub fn init_esn(
    params: &EsnParams,
    sizes: &[usize],
    n_inputs: usize,
    n_actions: usize,
    rng: &mut impl Rng,
) -> Result<DeepEsn> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::Config("reservoir sizes must be nonempty and positive".into()));
    }
    if params.leak.len() != sizes.len() {
        return Err(Error::Dimension {
            expected: sizes.len(),
            got: params.leak.len(),
        });
    }
    let mut layers = Vec::with_capacity(sizes.len());
    let mut fan_in = n_inputs;
    for (&n, &leak) in sizes.iter().zip(&params.leak) {
        let w_in = uniform_matrix(n, fan_in, params.input_scale, rng);
        let w = scaled_reservoir(n, params.spectral_radius_target, rng);
        layers.push(EsnLayer {
            w_in,
            w,
            leak,
            state: DVector::zeros(n),
        });
        fan_in = n;
    }
    let cols = n_inputs + sizes.iter().sum::<usize>();
    Ok(DeepEsn {
        layers,
        w_out: DMatrix::zeros(n_actions, cols),
        spectral_radius_target: params.spectral_radius_target,
    })
}

impl DeepEsn {
    pub fn n_inputs(&self) -> usize {
        self.layers[0].w_in.ncols()
    }

    pub fn n_actions(&self) -> usize {
        self.w_out.nrows()
    }

    pub fn feature_len(&self) -> usize {
        self.w_out.ncols()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(EsnLayer::size).collect()
    }

    pub fn reset_states(&mut self) {
        for l in &mut self.layers {
            l.state.fill(0.0);
        }
    }

    /// Advances every layer by one step. Layer `n > 1` is driven by the fresh
    /// state of layer `n - 1`.
    pub fn step_states(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.n_inputs() {
            return Err(Error::Dimension {
                expected: self.n_inputs(),
                got: v.len(),
            });
        }
        let mut input = DVector::from_column_slice(v);
        for l in &mut self.layers {
            l.step(&input);
            input = l.state.clone();
        }
        Ok(())
    }

    /// `[v, x1, x2, ...]` for the current states.
    pub fn features(&self, v: &[f64]) -> Vec<f64> {
        let mut f = Vec::with_capacity(self.feature_len());
        f.extend_from_slice(v);
        for l in &self.layers {
            f.extend(l.state.iter());
        }
        f
    }

    /// Steps the reservoir on `v` and returns the resulting feature vector.
    pub fn advance(&mut self, v: &[f64]) -> Result<Vec<f64>> {
        self.step_states(v)?;
        Ok(self.features(v))
    }

    pub fn readout(&self, features: &[f64], action: usize) -> f64 {
        self.w_out.row(action).iter().zip(features).map(|(w, f)| w * f).sum()
    }

    pub fn readouts(&self, features: &[f64]) -> Vec<f64> {
        (0..self.n_actions()).map(|a| self.readout(features, a)).collect()
    }

    /// `row(action) += rate * (r - y) * features`. Returns `|r - y|`.
    pub fn td_update(&mut self, action: usize, features: &[f64], r: f64, y: f64, rate: f64) -> Result<f64> {
        if !r.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite { reward: r, estimate: y });
        }
        if features.len() != self.feature_len() {
            return Err(Error::Dimension {
                expected: self.feature_len(),
                got: features.len(),
            });
        }
        let step = rate * (r - y);
        for (w, f) in self.w_out.row_mut(action).iter_mut().zip(features) {
            *w += step * f;
        }
        Ok(td_error(r, y))
    }
}

pub fn td_error(r: f64, y: f64) -> f64 {
    (r - y).abs()
}
