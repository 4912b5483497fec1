//! Fully connected networks in NTK parameterization:
//! `α̃^{(ℓ+1)} = W^{(ℓ)} α^{(ℓ)} / √n_ℓ + ξ b^{(ℓ)}`, `α^{(ℓ)} = σ(α̃^{(ℓ)})`.
//! The raw network output is the last pre-activation.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use super::activation::Activation;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Every parameter from `N(0, 1)`.
    UnitGaussian,
    /// Every parameter from `N(0, σ²)` with `σ = √(2/N_param)`.
    HeScaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// `n_0, …, n_L` with `n_L = 1`.
    pub widths: Vec<usize>,
    pub xi: f64,
    /// Activations after layers `1..L-1`.
    pub hidden: Vec<Activation>,
    /// Applied to the raw output when predicting (identity or sigmoid).
    pub output: Activation,
    pub init: InitScheme,
}

impl NetworkConfig {
    /// All hidden layers share `activation`; identity output, unit Gaussian init.
    pub fn new(widths: Vec<usize>, xi: f64, activation: Activation) -> Result<Self> {
        let hidden = vec![activation; widths.len().saturating_sub(2)];
        let c = Self { widths, xi, hidden, output: Activation::Identity, init: InitScheme::UnitGaussian };
        c.validate()?;
        Ok(c)
    }

    pub fn with_output(mut self, output: Activation) -> Self {
        self.output = output;
        self
    }

    pub fn with_init(mut self, init: InitScheme) -> Self {
        self.init = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 {
            return Err(Error::Validation("a network needs at least input and output widths".into()));
        }
        if self.widths.contains(&0) {
            return Err(Error::Validation("widths must be positive".into()));
        }
        if *self.widths.last().unwrap() != 1 {
            return Err(Error::Validation("output width must be 1".into()));
        }
        if self.hidden.len() != self.widths.len() - 2 {
            return Err(Error::Validation(format!("{} hidden activations for {} hidden layers", self.hidden.len(), self.widths.len() - 2)));
        }
        if !(self.xi >= 0.0) || !self.xi.is_finite() {
            return Err(Error::Validation(format!("bias coefficient must be non-negative, got {}", self.xi)));
        }
        Ok(())
    }

    /// Number of weight layers `L`.
    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    /// Total trainable parameters, biases included.
    pub fn num_params(&self) -> usize {
        self.widths.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub config: NetworkConfig,
    /// `W^{(ℓ)}` of shape `n_{ℓ+1} × n_ℓ`.
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
    pub seed: u64,
}

/// Intermediate values of a batched forward pass.
struct Tape {
    inputs: Vec<DMatrix<f64>>,
    pre: Vec<DMatrix<f64>>,
}

impl NetworkState {
    pub fn init(config: NetworkConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut r = rng::substream(seed, &[0x4E4E_494E]);
        let sd = match config.init {
            InitScheme::UnitGaussian => 1.0,
            InitScheme::HeScaled => (2.0 / config.num_params() as f64).sqrt(),
        };
        let dist = Normal::new(0.0, sd).expect("finite sd");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in config.widths.windows(2) {
            weights.push(DMatrix::from_fn(w[1], w[0], |_, _| dist.sample(&mut r)));
            biases.push(DVector::from_fn(w[1], |_, _| dist.sample(&mut r)));
        }
        Ok(Self { config, weights, biases, seed })
    }

    /// All-zero parameters.
    pub fn zeros(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let weights = config.widths.windows(2).map(|w| DMatrix::zeros(w[1], w[0])).collect();
        let biases = config.widths.windows(2).map(|w| DVector::zeros(w[1])).collect();
        Ok(Self { config, weights, biases, seed: 0 })
    }

    pub fn num_params(&self) -> usize {
        self.config.num_params()
    }

    /// Flat parameters: per layer, `W` row-major then `b`.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            for i in 0..w.nrows() {
                out.extend(w.row(i).iter());
            }
            out.extend(b.iter());
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.num_params() {
            return Err(Error::Shape(format!("expected {} parameters, got {}", self.num_params(), p.len())));
        }
        let mut off = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let (r, c) = w.shape();
            for i in 0..r {
                for j in 0..c {
                    w[(i, j)] = p[off + i * c + j];
                }
            }
            off += r * c;
            b.copy_from_slice(&p[off..off + r]);
            off += r;
        }
        Ok(())
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.config.input_width() {
            return Err(Error::Shape(format!("input of length {len}, network expects {}", self.config.input_width())));
        }
        Ok(())
    }

    /// Raw output `α̃^{(L)}`.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x.len())?;
        let mut a = DVector::from_column_slice(x);
        let depth = self.config.depth();
        for l in 0..depth {
            let scale = 1.0 / (self.config.widths[l] as f64).sqrt();
            let mut z = &self.weights[l] * &a * scale;
            z.axpy(self.config.xi, &self.biases[l], 1.0);
            if l + 1 == depth {
                return Ok(z[0]);
            }
            let act = self.config.hidden[l];
            a = z.map(|v| act.apply(v));
        }
        unreachable!("depth is at least one")
    }

    /// Output after the configured output activation.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.config.output.apply(self.forward(x)?))
    }

    fn forward_tape(&self, xs: &DMatrix<f64>) -> Tape {
        let depth = self.config.depth();
        let mut inputs = Vec::with_capacity(depth);
        let mut pre = Vec::with_capacity(depth);
        let mut a = xs.clone();
        for l in 0..depth {
            let scale = 1.0 / (self.config.widths[l] as f64).sqrt();
            let mut z = &a * self.weights[l].transpose() * scale;
            let xb = self.config.xi;
            let rows = z.nrows().max(1);
            for (col, b) in z.as_mut_slice().chunks_mut(rows).zip(self.biases[l].iter()) {
                col.iter_mut().for_each(|v| *v += xb * b);
            }
            inputs.push(a);
            if l + 1 < depth {
                let act = self.config.hidden[l];
                a = z.map(|v| act.apply(v));
            } else {
                a = DMatrix::zeros(0, 0);
            }
            pre.push(z);
        }
        Tape { inputs, pre }
    }

    /// Raw outputs for each row of `xs`.
    pub fn forward_batch(&self, xs: &DMatrix<f64>) -> Result<Vec<f64>> {
        self.check_input(xs.ncols())?;
        let tape = self.forward_tape(xs);
        Ok(tape.pre.last().unwrap().column(0).iter().copied().collect())
    }

    /// Gradient of the raw output with respect to every parameter, in
    /// [`params`](Self::params) order, together with the output.
    pub fn gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_input(x.len())?;
        let xs = DMatrix::from_row_slice(1, x.len(), x);
        let tape = self.forward_tape(&xs);
        let out = tape.pre.last().unwrap()[(0, 0)];
        Ok((out, self.backward(&tape, &DMatrix::from_element(1, 1, 1.0))))
    }

    /// `Σ_a w_a ∂f(x_a)/∂θ` for rows of `xs`; also returns the outputs.
    pub fn weighted_gradient(&self, xs: &DMatrix<f64>, weights_fn: impl Fn(&[f64]) -> Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_input(xs.ncols())?;
        let tape = self.forward_tape(xs);
        let out: Vec<f64> = tape.pre.last().unwrap().column(0).iter().copied().collect();
        let w = weights_fn(&out);
        let seed = DMatrix::from_column_slice(w.len(), 1, &w);
        Ok((out, self.backward(&tape, &seed)))
    }

    /// Reverse pass; `delta` is `∂L/∂α̃^{(L)}` per row.
    fn backward(&self, tape: &Tape, delta: &DMatrix<f64>) -> Vec<f64> {
        let depth = self.config.depth();
        let mut grads_w: Vec<DMatrix<f64>> = Vec::with_capacity(depth);
        let mut grads_b: Vec<DVector<f64>> = Vec::with_capacity(depth);
        let mut d = delta.clone();
        for l in (0..depth).rev() {
            let scale = 1.0 / (self.config.widths[l] as f64).sqrt();
            grads_w.push(d.tr_mul(&tape.inputs[l]) * scale);
            let rows = d.nrows().max(1);
            grads_b.push(DVector::from_iterator(d.ncols(), d.as_slice().chunks(rows).map(|c| c.iter().sum::<f64>() * self.config.xi)));
            if l > 0 {
                let act = self.config.hidden[l - 1];
                let mut back = &d * &self.weights[l] * scale;
                let (pre, post) = (tape.pre[l - 1].as_slice(), tape.inputs[l].as_slice());
                for ((g, &z), &a) in back.as_mut_slice().iter_mut().zip(pre).zip(post) {
                    *g *= act.derivative_with_output(z, a);
                }
                d = back;
            }
        }
        grads_w.reverse();
        grads_b.reverse();
        let mut out = Vec::with_capacity(self.num_params());
        for (gw, gb) in grads_w.iter().zip(&grads_b) {
            for i in 0..gw.nrows() {
                out.extend(gw.row(i).iter());
            }
            out.extend(gb.iter());
        }
        out
    }

    /// Per-row gradients as an `N × P` matrix.
    pub fn jacobian(&self, xs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_input(xs.ncols())?;
        let rows: Vec<Vec<f64>> = (0..xs.nrows())
            .into_par_iter()
            .map(|a| {
                let x: Vec<f64> = xs.row(a).iter().copied().collect();
                self.gradient(&x).map(|g| g.1)
            })
            .collect::<Result<_>>()?;
        let p = self.num_params();
        Ok(DMatrix::from_fn(xs.nrows(), p, |a, j| rows[a][j]))
    }

    /// Writes a config header line and one `index,value` row per parameter.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        let cfg = serde_json::to_string(&self.config).map_err(|e| Error::Serde(e.to_string()))?;
        writeln!(w, "# seed={} config={cfg}", self.seed)?;
        writeln!(w, "index,value")?;
        for (i, v) in self.params().iter().enumerate() {
            writeln!(w, "{i},{v}")?;
        }
        Ok(())
    }

    pub fn read_checkpoint<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let head = lines.next().ok_or_else(|| Error::Schema("empty checkpoint".into()))??;
        let rest = head.strip_prefix("# seed=").ok_or_else(|| Error::Schema("missing checkpoint header".into()))?;
        let (seed, cfg) = rest.split_once(" config=").ok_or_else(|| Error::Schema("missing config in header".into()))?;
        let seed: u64 = seed.parse().map_err(|_| Error::Parse { line: 1, msg: "bad seed".into() })?;
        let config: NetworkConfig = serde_json::from_str(cfg).map_err(|e| Error::Serde(e.to_string()))?;
        let mut state = Self::zeros(config)?;
        state.seed = seed;
        let mut params = Vec::new();
        for (i, line) in lines.enumerate().skip(1) {
            let line = line?;
            let (_, v) = line.split_once(',').ok_or_else(|| Error::Parse { line: i + 2, msg: "expected index,value".into() })?;
            params.push(v.trim().parse::<f64>().map_err(|_| Error::Parse { line: i + 2, msg: format!("bad number '{v}'") })?);
        }
        state.set_params(&params)?;
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_network_outputs_zero() {
        let cfg = NetworkConfig::new(vec![3, 5, 1], 1.0, Activation::Relu).unwrap();
        let s = NetworkState::zeros(cfg).unwrap();
        assert_eq!(s.forward(&[1.0, -2.0, 0.5]).unwrap(), 0.0);
        let (_, g) = s.gradient(&[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(*g.last().unwrap(), 1.0);
    }

    #[test]
    fn linear_closed_form() {
        let cfg = NetworkConfig::new(vec![4, 1], 0.7, Activation::Identity).unwrap();
        let s = NetworkState::init(cfg, 3).unwrap();
        let x = [0.3, -1.2, 0.8, 2.0];
        let want = (0..4).map(|k| s.weights[0][(0, k)] * x[k]).sum::<f64>() / 2.0 + 0.7 * s.biases[0][0];
        assert!((s.forward(&x).unwrap() - want).abs() < 1e-15);
        let (_, g) = s.gradient(&x).unwrap();
        for k in 0..4 {
            assert!((g[k] - x[k] / 2.0).abs() < 1e-15);
        }
        assert!((g[4] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn params_round_trip() {
        let cfg = NetworkConfig::new(vec![2, 3, 3, 1], 0.1, Activation::Sigmoid).unwrap();
        let s = NetworkState::init(cfg, 9).unwrap();
        let mut t = NetworkState::zeros(s.config.clone()).unwrap();
        t.set_params(&s.params()).unwrap();
        t.seed = s.seed;
        assert_eq!(s, t);
        let mut buf = Vec::new();
        s.write_checkpoint(&mut buf).unwrap();
        assert_eq!(NetworkState::read_checkpoint(&buf[..]).unwrap(), s);
    }

    #[test]
    fn shape_errors() {
        let cfg = NetworkConfig::new(vec![2, 1], 0.0, Activation::Identity).unwrap();
        let s = NetworkState::init(cfg, 0).unwrap();
        assert!(matches!(s.forward(&[1.0]), Err(Error::Shape(_))));
        assert!(NetworkConfig::new(vec![2, 2], 0.0, Activation::Relu).is_err());
    }
}
