//! A minimal multi-layer perceptron trained by per-sample stochastic gradient
//! descent under a least-squares criterion.
//!
//! The logistic sigmoid is applied on hidden *and* output layers, so outputs
//! can be read as probabilities. Training is strictly sequential: the same
//! seed, configuration, and sample stream reproduce bit-identical weights.
//! A trained [`Mlp`] is immutable and safe to share across threads.

use std::borrow::Borrow;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::num::{cast, Real};
use crate::{Error, Result};

/// Training hyperparameters plus the seed that makes a run reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Step size for plain SGD (no momentum, no schedule).
    pub learning_rate: f64,
    /// Number of passes over the sample stream.
    pub epochs: usize,
    /// Seed for weight initialization.
    pub seed: u64,
    /// Half-width of the uniform weight initialization interval.
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 1,
            seed: 0,
            init_scale: 0.1,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::Config(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if !self.init_scale.is_finite() || self.init_scale < 0.0 {
            return Err(Error::Config(format!(
                "init_scale must be finite and non-negative, got {}",
                self.init_scale
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// One training example: an input vector (in practice two concatenated
/// feature vectors) and a same-class target of 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample<T> {
    pub input: Vec<T>,
    /// Exactly 0 or 1; use the constructors to keep it that way.
    pub target: T,
}

impl<T: Real> PairSample<T> {
    pub fn new(input: Vec<T>, same: bool) -> Self {
        let target = if same { T::one() } else { T::zero() };
        Self { input, target }
    }

    /// Builds the sample by concatenating the two halves of a pair.
    pub fn from_pair(x: &[T], y: &[T], same: bool) -> Self {
        let mut input = Vec::with_capacity(x.len() + y.len());
        input.extend_from_slice(x);
        input.extend_from_slice(y);
        Self::new(input, same)
    }
}

/// Per-parameter gradient with the same shapes as the network's weights and
/// biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    /// Row-major `(out × in)` matrix per weighted layer.
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
}

/// Dense feed-forward network with logistic sigmoid on every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    layer_sizes: Vec<usize>,
    /// Row-major `(out × in)` matrix per weighted layer.
    weights: Vec<Vec<T>>,
    biases: Vec<Vec<T>>,
}

#[inline]
fn sigmoid<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// `out[j] = sigmoid(b[j] + Σ_i w[j·n + i]·input[i])`.
pub(crate) fn affine_sigmoid<T: Real>(weights: &[T], biases: &[T], input: &[T], out: &mut [T]) {
    let n = input.len();
    for (j, o) in out.iter_mut().enumerate() {
        let row = &weights[j * n..(j + 1) * n];
        let mut z = biases[j];
        for (w, x) in row.iter().zip(input.iter()) {
            z = z + *w * *x;
        }
        *o = sigmoid(z);
    }
}

/// Reused per-sample buffers; layer `l` here means the `l`-th weighted layer.
struct Scratch<T> {
    activations: Vec<Vec<T>>,
    deltas: Vec<Vec<T>>,
    /// Indices of nonzero inputs, rebuilt per sample. Zero inputs contribute
    /// nothing to the first layer's sums or weight updates, so they are
    /// skipped; sparse inputs (e.g. vertex presence grids) train much faster.
    active: Vec<usize>,
}

impl<T: Real> Scratch<T> {
    fn for_net(net: &Mlp<T>) -> Self {
        let sizes = &net.layer_sizes[1..];
        Self {
            activations: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            deltas: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            active: Vec::new(),
        }
    }
}

impl<T: Real> Mlp<T> {
    /// Fresh network with weights i.i.d. uniform on
    /// `[-init_scale, +init_scale]` from a generator seeded by `cfg.seed`,
    /// and zero biases.
    pub fn init(layer_sizes: &[usize], cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "need at least an input and an output layer, got {} layer(s)",
                layer_sizes.len()
            )));
        }
        if layer_sizes.iter().any(|&n| n == 0) {
            return Err(Error::Config(format!(
                "all layer sizes must be at least 1, got {layer_sizes:?}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for pair in layer_sizes.windows(2) {
            let (n_in, n_out) = (pair[0], pair[1]);
            let mut w = vec![T::zero(); n_in * n_out];
            if cfg.init_scale > 0.0 {
                for v in &mut w {
                    *v = cast(rng.random_range(-cfg.init_scale..=cfg.init_scale));
                }
            }
            weights.push(w);
            biases.push(vec![T::zero(); n_out]);
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
        })
    }

    /// Assembles a network from explicit parameters (e.g. a loaded archive).
    pub fn from_parts(
        layer_sizes: Vec<usize>,
        weights: Vec<Vec<T>>,
        biases: Vec<Vec<T>>,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.iter().any(|&n| n == 0) {
            return Err(Error::Config(format!(
                "degenerate layer sizes {layer_sizes:?}"
            )));
        }
        let n_layers = layer_sizes.len() - 1;
        if weights.len() != n_layers || biases.len() != n_layers {
            return Err(Error::Shape(format!(
                "expected {} weight/bias matrices, got {}/{}",
                n_layers,
                weights.len(),
                biases.len()
            )));
        }
        for (l, pair) in layer_sizes.windows(2).enumerate() {
            if weights[l].len() != pair[0] * pair[1] {
                return Err(Error::Shape(format!(
                    "weight matrix {l} has {} entries, expected {}×{}",
                    weights[l].len(),
                    pair[1],
                    pair[0]
                )));
            }
            if biases[l].len() != pair[1] {
                return Err(Error::Shape(format!(
                    "bias vector {l} has {} entries, expected {}",
                    biases[l].len(),
                    pair[1]
                )));
            }
        }
        Ok(Self {
            layer_sizes,
            weights,
            biases,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Row-major `(out × in)` weight matrices, one per weighted layer.
    pub fn weights(&self) -> &[Vec<T>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<T>] {
        &self.biases
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.input_size() {
            return Err(Error::Shape(format!(
                "input has {} entries, network expects {}",
                x.len(),
                self.input_size()
            )));
        }
        Ok(())
    }

    /// Full forward pass; every output lies in (0, 1).
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_input(x)?;
        let mut a = x.to_vec();
        let mut next = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            next.clear();
            next.resize(b.len(), T::zero());
            affine_sigmoid(w, b, &a, &mut next);
            std::mem::swap(&mut a, &mut next);
        }
        Ok(a)
    }

    /// Forward pass into scratch buffers, skipping zero inputs on the first
    /// layer. Skipped terms are exact zeros, so the activations match a dense
    /// pass.
    fn forward_scratch(&self, x: &[T], scratch: &mut Scratch<T>) -> Result<()> {
        self.check_input(x)?;
        scratch.active.clear();
        scratch
            .active
            .extend(x.iter().enumerate().filter(|(_, v)| **v != T::zero()).map(|(i, _)| i));

        let n = x.len();
        let (first, rest) = scratch.activations.split_first_mut().unwrap();
        for (j, o) in first.iter_mut().enumerate() {
            let row = &self.weights[0][j * n..(j + 1) * n];
            let mut z = self.biases[0][j];
            for &i in &scratch.active {
                z = z + row[i] * x[i];
            }
            *o = sigmoid(z);
        }
        let mut prev: &[T] = first;
        for (l, out) in rest.iter_mut().enumerate() {
            affine_sigmoid(&self.weights[l + 1], &self.biases[l + 1], prev, out);
            prev = out;
        }
        Ok(())
    }

    /// Fills `scratch.deltas` with ∂loss/∂z per unit and returns the loss.
    fn backward_deltas(&self, target: &[T], scratch: &mut Scratch<T>) -> Result<T> {
        let n_layers = self.weights.len();
        let out = &scratch.activations[n_layers - 1];
        if target.len() != out.len() {
            return Err(Error::Shape(format!(
                "target has {} entries, network emits {}",
                target.len(),
                out.len()
            )));
        }
        let loss = loss(out, target)?;
        let last = &mut scratch.deltas[n_layers - 1];
        for (d, (y, t)) in last.iter_mut().zip(out.iter().zip(target)) {
            *d = (*y - *t) * *y * (T::one() - *y);
        }
        for l in (0..n_layers - 1).rev() {
            let n = self.layer_sizes[l + 1];
            let (lower, upper) = scratch.deltas.split_at_mut(l + 1);
            let delta = &mut lower[l];
            let delta_up = &upper[0];
            delta.iter_mut().for_each(|d| *d = T::zero());
            for (j, &dj) in delta_up.iter().enumerate() {
                let row = &self.weights[l + 1][j * n..(j + 1) * n];
                for (d, w) in delta.iter_mut().zip(row) {
                    *d = *d + *w * dj;
                }
            }
            let act = &scratch.activations[l];
            for (d, a) in delta.iter_mut().zip(act) {
                *d = *d * *a * (T::one() - *a);
            }
        }
        Ok(loss)
    }

    /// Exact backpropagation gradient of `loss(forward(input), target)` with
    /// respect to every weight and bias.
    pub fn gradient(&self, input: &[T], target: &[T]) -> Result<Gradients<T>> {
        let mut scratch = Scratch::for_net(self);
        self.forward_scratch(input, &mut scratch)?;
        self.backward_deltas(target, &mut scratch)?;
        let mut gw = Vec::with_capacity(self.weights.len());
        let mut gb = Vec::with_capacity(self.biases.len());
        for l in 0..self.weights.len() {
            let prev: &[T] = if l == 0 {
                input
            } else {
                &scratch.activations[l - 1]
            };
            let delta = &scratch.deltas[l];
            let mut w = vec![T::zero(); self.weights[l].len()];
            for (j, &dj) in delta.iter().enumerate() {
                let row = &mut w[j * prev.len()..(j + 1) * prev.len()];
                for (g, x) in row.iter_mut().zip(prev) {
                    *g = dj * *x;
                }
            }
            gw.push(w);
            gb.push(delta.clone());
        }
        Ok(Gradients {
            weights: gw,
            biases: gb,
        })
    }

    /// Gradient for a pair sample (target is the single same-class bit).
    pub fn gradient_sample(&self, sample: &PairSample<T>) -> Result<Gradients<T>> {
        self.gradient(&sample.input, std::slice::from_ref(&sample.target))
    }

    /// One fused SGD step: `w ← w − lr·(δ_j·a_i)`, `b ← b − lr·δ_j`.
    /// The per-parameter products match [`Mlp::gradient`] bit for bit.
    fn sgd_step(&mut self, input: &[T], target: &[T], lr: T, scratch: &mut Scratch<T>) -> Result<T> {
        self.forward_scratch(input, scratch)?;
        let loss = self.backward_deltas(target, scratch)?;
        // First layer: only nonzero inputs carry gradient.
        {
            let n = input.len();
            let delta = &scratch.deltas[0];
            for (j, &dj) in delta.iter().enumerate() {
                let row = &mut self.weights[0][j * n..(j + 1) * n];
                for &i in &scratch.active {
                    row[i] = row[i] - lr * (dj * input[i]);
                }
                self.biases[0][j] = self.biases[0][j] - lr * dj;
            }
        }
        for l in 1..self.weights.len() {
            let prev = &scratch.activations[l - 1];
            let delta = &scratch.deltas[l];
            for (j, &dj) in delta.iter().enumerate() {
                let row = &mut self.weights[l][j * prev.len()..(j + 1) * prev.len()];
                for (w, x) in row.iter_mut().zip(prev) {
                    *w = *w - lr * (dj * *x);
                }
                self.biases[l][j] = self.biases[l][j] - lr * dj;
            }
        }
        Ok(loss)
    }

    /// Sequential SGD over `samples`, in order, for `cfg.epochs` passes.
    pub fn train(self, samples: &[PairSample<T>], cfg: &TrainConfig) -> Result<Self> {
        self.train_with(cfg, |_| samples.iter())
    }

    /// Like [`Mlp::train`] but the stream is produced per epoch, so large
    /// sample sets never need to be materialized. The factory must yield the
    /// same stream for every epoch index to match the semantics of
    /// [`Mlp::train`].
    pub fn train_with<F, I, B>(mut self, cfg: &TrainConfig, mut stream: F) -> Result<Self>
    where
        F: FnMut(usize) -> I,
        I: IntoIterator<Item = B>,
        B: Borrow<PairSample<T>>,
    {
        cfg.validate()?;
        let lr = cast::<T>(cfg.learning_rate);
        let mut scratch = Scratch::for_net(&self);
        for epoch in 0..cfg.epochs {
            for (idx, sample) in stream(epoch).into_iter().enumerate() {
                let sample = sample.borrow();
                let loss = self.sgd_step(
                    &sample.input,
                    std::slice::from_ref(&sample.target),
                    lr,
                    &mut scratch,
                )?;
                if !loss.is_finite() {
                    return Err(Error::Diverged {
                        epoch,
                        sample: idx,
                    });
                }
            }
        }
        Ok(self)
    }

    /// Mean of `loss(forward(x), t)` over a sample set.
    pub fn mean_loss(&self, samples: &[PairSample<T>]) -> Result<T> {
        if samples.is_empty() {
            return Ok(T::zero());
        }
        let mut total = T::zero();
        for s in samples {
            let y = self.forward(&s.input)?;
            total = total + loss(&y, std::slice::from_ref(&s.target))?;
        }
        Ok(total / cast(samples.len() as f64))
    }
}

/// Least-squares loss `½·Σ (yᵢ − tᵢ)²`.
pub fn loss<T: Real>(y: &[T], t: &[T]) -> Result<T> {
    if y.len() != t.len() {
        return Err(Error::Shape(format!(
            "loss over vectors of lengths {} and {}",
            y.len(),
            t.len()
        )));
    }
    let mut s = T::zero();
    for (a, b) in y.iter().zip(t) {
        let d = *a - *b;
        s = s + d * d;
    }
    Ok(s * cast(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> TrainConfig {
        TrainConfig {
            seed,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn init_rejects_degenerate_layers() {
        assert!(matches!(
            Mlp::<f64>::init(&[3], &cfg(0)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            Mlp::<f64>::init(&[3, 0, 1], &cfg(0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn init_scale_zero_gives_all_half_outputs() {
        let net = Mlp::<f64>::init(
            &[4, 3, 2],
            &TrainConfig {
                init_scale: 0.0,
                ..cfg(7)
            },
        )
        .unwrap();
        assert!(net.weights.iter().flatten().all(|&w| w == 0.0));
        let y = net.forward(&[0.3, -1.0, 2.0, 0.0]).unwrap();
        assert_eq!(y, vec![0.5, 0.5]);
    }

    #[test]
    fn init_shapes_match_architecture() {
        let net = Mlp::<f64>::init(&[20, 100, 1], &cfg(1)).unwrap();
        assert_eq!(net.weights[0].len(), 100 * 20);
        assert_eq!(net.weights[1].len(), 1 * 100);
        assert_eq!(net.biases[0].len(), 100);
        assert_eq!(net.biases[1].len(), 1);
    }

    #[test]
    fn init_is_deterministic_in_the_seed() {
        let a = Mlp::<f64>::init(&[5, 4, 2], &cfg(42)).unwrap();
        let b = Mlp::<f64>::init(&[5, 4, 2], &cfg(42)).unwrap();
        assert_eq!(a, b);
        let c = Mlp::<f64>::init(&[5, 4, 2], &cfg(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forward_checks_input_length() {
        let net = Mlp::<f64>::init(&[3, 2, 1], &cfg(0)).unwrap();
        assert!(matches!(net.forward(&[1.0, 2.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn forward_two_layer_hand_evaluation() {
        // 1:1:1, all weights 1, biases 0, x = 0:
        // hidden = σ(0) = 0.5, output = σ(0.5).
        let net = Mlp::from_parts(vec![1, 1, 1], vec![vec![1.0], vec![1.0]], vec![vec![0.0], vec![0.0]])
            .unwrap();
        let y = net.forward(&[0.0]).unwrap();
        let expected = 1.0 / (1.0 + (-0.5f64).exp());
        assert!((y[0] - expected).abs() < 1e-15);
        assert!((y[0] - 0.6225).abs() < 1e-4);
    }

    #[test]
    fn forward_output_length_matches_last_layer() {
        let net = Mlp::<f64>::init(&[6, 5, 3], &cfg(9)).unwrap();
        assert_eq!(net.forward(&[0.1; 6]).unwrap().len(), 3);
    }

    #[test]
    fn loss_examples() {
        assert_eq!(loss(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert_eq!(loss(&[0.5], &[1.0]).unwrap(), 0.125);
        assert!(matches!(loss(&[0.5], &[1.0, 0.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn loss_matches_resummation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(1..8usize);
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let t: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut expect = 0.0;
            for i in 0..n {
                expect += (y[i] - t[i]) * (y[i] - t[i]);
            }
            expect *= 0.5;
            assert!((loss(&y, &t).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_zero_at_stationary_target() {
        // With zero weights every output is 0.5; a target of 0.5 makes the
        // output-layer error factor (y − t) vanish, and with it the whole
        // gradient.
        let net = Mlp::<f64>::init(
            &[3, 4, 2],
            &TrainConfig {
                init_scale: 0.0,
                ..cfg(0)
            },
        )
        .unwrap();
        let g = net.gradient(&[0.4, -0.2, 1.0], &[0.5, 0.5]).unwrap();
        assert!(g.weights.iter().flatten().all(|&v| v == 0.0));
        assert!(g.biases.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_zero_input_zero_weights() {
        // Zero input kills the hidden-layer weight gradient (δ·x with x = 0);
        // zero second-layer weights kill the hidden deltas entirely; the
        // output layer still sees (0.5 − t) ≠ 0 through its bias and weights.
        let net = Mlp::<f64>::init(
            &[3, 4, 1],
            &TrainConfig {
                init_scale: 0.0,
                ..cfg(0)
            },
        )
        .unwrap();
        let g = net
            .gradient_sample(&PairSample::new(vec![0.0, 0.0, 0.0], true))
            .unwrap();
        assert!(g.weights[0].iter().all(|&v| v == 0.0));
        assert!(g.biases[0].iter().all(|&v| v == 0.0));
        assert!(g.biases[1][0] != 0.0);
    }

    fn loss_at(net: &Mlp<f64>, x: &[f64], t: &[f64]) -> f64 {
        loss(&net.forward(x).unwrap(), t).unwrap()
    }

    fn max_rel_err_vs_central_differences(net: &Mlp<f64>, x: &[f64], t: &[f64]) -> f64 {
        let h = 1e-5;
        let g = net.gradient(x, t).unwrap();
        let mut worst = 0.0f64;
        let mut check = |analytic: f64, numeric: f64| {
            let denom = analytic.abs().max(numeric.abs()).max(1e-10);
            worst = worst.max((analytic - numeric).abs() / denom);
        };
        for l in 0..net.weights().len() {
            for k in 0..net.weights()[l].len() {
                let mut plus = net.clone();
                plus.weights[l][k] += h;
                let mut minus = net.clone();
                minus.weights[l][k] -= h;
                let numeric = (loss_at(&plus, x, t) - loss_at(&minus, x, t)) / (2.0 * h);
                check(g.weights[l][k], numeric);
            }
            for k in 0..net.biases()[l].len() {
                let mut plus = net.clone();
                plus.biases[l][k] += h;
                let mut minus = net.clone();
                minus.biases[l][k] -= h;
                let numeric = (loss_at(&plus, x, t) - loss_at(&minus, x, t)) / (2.0 * h);
                check(g.biases[l][k], numeric);
            }
        }
        worst
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for round in 0..100 {
            let n_in = rng.random_range(1..6usize);
            let hidden = rng.random_range(1..6usize);
            let layers = if round % 3 == 0 {
                vec![n_in, hidden, rng.random_range(1..4usize), 1]
            } else {
                vec![n_in, hidden, 1]
            };
            let net = Mlp::<f64>::init(
                &layers,
                &TrainConfig {
                    init_scale: 0.8,
                    ..cfg(round)
                },
            )
            .unwrap();
            let x: Vec<f64> = (0..n_in).map(|_| rng.random_range(-1.0..1.0)).collect();
            let t = vec![if rng.random_bool(0.5) { 1.0 } else { 0.0 }];
            let err = max_rel_err_vs_central_differences(&net, &x, &t);
            assert!(err < 1e-4, "round {round}: rel err {err}");
        }
    }

    #[test]
    fn train_with_zero_learning_rate_is_identity() {
        let net = Mlp::<f64>::init(&[2, 3, 1], &cfg(5)).unwrap();
        let samples = vec![PairSample::new(vec![0.2, 0.9], true)];
        let trained = net
            .clone()
            .train(
                &samples,
                &TrainConfig {
                    learning_rate: 0.0,
                    epochs: 3,
                    ..cfg(5)
                },
            )
            .unwrap();
        assert_eq!(net, trained);
    }

    #[test]
    fn one_step_equals_hand_applied_gradient() {
        let net = Mlp::<f64>::init(&[3, 4, 1], &cfg(21)).unwrap();
        let sample = PairSample::new(vec![0.7, 0.0, -0.4], false);
        let lr = 0.3;
        let g = net.gradient_sample(&sample).unwrap();
        let mut expected = net.clone();
        for l in 0..expected.weights.len() {
            for k in 0..expected.weights[l].len() {
                expected.weights[l][k] -= lr * g.weights[l][k];
            }
            for k in 0..expected.biases[l].len() {
                expected.biases[l][k] -= lr * g.biases[l][k];
            }
        }
        let trained = net
            .train(
                std::slice::from_ref(&sample),
                &TrainConfig {
                    learning_rate: lr,
                    epochs: 1,
                    ..cfg(21)
                },
            )
            .unwrap();
        assert_eq!(trained, expected);
    }

    fn xor_samples() -> Vec<PairSample<f64>> {
        vec![
            PairSample::new(vec![0.0, 0.0], false),
            PairSample::new(vec![0.0, 1.0], true),
            PairSample::new(vec![1.0, 0.0], true),
            PairSample::new(vec![1.0, 1.0], false),
        ]
    }

    #[test]
    fn xor_task_trains_below_threshold() {
        let samples = xor_samples();
        let train_cfg = TrainConfig {
            learning_rate: 0.5,
            epochs: 5000,
            seed: 3,
            init_scale: 0.1,
        };
        let net = Mlp::<f64>::init(&[2, 8, 1], &train_cfg).unwrap();
        let net = net.train(&samples, &train_cfg).unwrap();
        let final_loss = net.mean_loss(&samples).unwrap();
        assert!(final_loss < 0.01, "final mean loss {final_loss}");
    }

    #[test]
    fn training_is_deterministic() {
        let samples = xor_samples();
        let train_cfg = TrainConfig {
            learning_rate: 0.4,
            epochs: 200,
            seed: 8,
            init_scale: 0.1,
        };
        let a = Mlp::<f64>::init(&[2, 5, 1], &train_cfg)
            .unwrap()
            .train(&samples, &train_cfg)
            .unwrap();
        let b = Mlp::<f64>::init(&[2, 5, 1], &train_cfg)
            .unwrap()
            .train(&samples, &train_cfg)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divergence_is_reported_with_position() {
        let net = Mlp::from_parts(vec![1, 1], vec![vec![0.0]], vec![vec![0.0]]).unwrap();
        // 0·∞ = NaN in the first affine sum poisons the loss.
        let samples = vec![PairSample::new(vec![f64::INFINITY], true)];
        let err = net
            .train(
                &samples,
                &TrainConfig {
                    learning_rate: 1.0,
                    epochs: 1,
                    ..TrainConfig::default()
                },
            )
            .unwrap_err();
        match err {
            Error::Diverged { epoch, sample } => {
                assert_eq!((epoch, sample), (0, 0));
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}
