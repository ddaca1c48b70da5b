//! Statistical similarity and its relatives.
//!
//! The similarity of two feature vectors is the probability that they belong
//! to the same class, `S(x, x') = Σ_ω P(ω|x) P(ω|x')`. Four interchangeable
//! models live behind [`SimilarityModel`]:
//!
//! - [`ExactSimilarity`]: posteriors are known for a finite set of points, so
//!   `S` can be evaluated exactly;
//! - [`LearnedSimilarity`]: a pair-input [`Mlp`] approximates
//!   `P(same | x, x')` directly;
//! - `Euclidean`: the classic baseline (scored as negative distance);
//! - [`QuadraticForm`]: an adaptive-metric decision rule
//!   `argmin_ω (x−x_ω)ᵀ Σ (x−x_ω)`, equivalent at the argmax level to a
//!   Gaussian similarity model.

use crate::mlp::{affine_sigmoid, Mlp};
use crate::num::{cast, scaled_tol, Real};
use crate::{Error, Result};

/// Class label; posteriors index classes `0..k`.
pub type Label = usize;

/// Probability vector over a finite label set.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior<T> {
    probs: Vec<T>,
}

impl<T: Real> Posterior<T> {
    /// Validates non-negativity and normalization (sum within 1e-9 of one
    /// for `f64`).
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Config("posterior over an empty label set".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < T::zero()) {
            return Err(Error::Config(
                "posterior entries must be finite and non-negative".into(),
            ));
        }
        let sum = probs.iter().fold(T::zero(), |a, &b| a + b);
        let tol = scaled_tol::<T>(1e-9) * cast::<T>(probs.len() as f64);
        if (sum - T::one()).abs() > tol {
            return Err(Error::Config(format!(
                "posterior entries sum to {sum}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// The indicator posterior δ(·, label): an unambiguous assignment.
    pub fn delta(n_classes: usize, label: Label) -> Result<Self> {
        if label >= n_classes {
            return Err(Error::Config(format!(
                "label {label} outside 0..{n_classes}"
            )));
        }
        let mut probs = vec![T::zero(); n_classes];
        probs[label] = T::one();
        Ok(Self { probs })
    }

    pub fn uniform(n_classes: usize) -> Result<Self> {
        if n_classes == 0 {
            return Err(Error::Config("posterior over an empty label set".into()));
        }
        let p = T::one() / cast::<T>(n_classes as f64);
        Ok(Self {
            probs: vec![p; n_classes],
        })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn n_classes(&self) -> usize {
        self.probs.len()
    }

    /// True when some entry is exactly one (so the point is classified
    /// without ambiguity).
    pub fn is_unambiguous(&self) -> bool {
        self.probs.iter().any(|&p| p == T::one())
    }
}

/// `S(x, x') = Σ_ω P(ω|x)·P(ω|x')` for two posteriors over the same label
/// set. Symmetric, and in `[0, 1]`.
pub fn exact_similarity<T: Real>(p: &Posterior<T>, q: &Posterior<T>) -> Result<T> {
    if p.n_classes() != q.n_classes() {
        return Err(Error::Shape(format!(
            "posteriors over label sets of sizes {} and {}",
            p.n_classes(),
            q.n_classes()
        )));
    }
    let mut s = T::zero();
    for (a, b) in p.probs.iter().zip(&q.probs) {
        s = s + *a * *b;
    }
    Ok(s)
}

/// A labeled reference point. For an unambiguous exemplar of class ω the
/// posterior at `point` is the indicator δ(·, ω).
#[derive(Debug, Clone, PartialEq)]
pub struct Exemplar<T> {
    pub point: Vec<T>,
    pub label: Label,
}

impl<T> Exemplar<T> {
    pub fn new(point: Vec<T>, label: Label) -> Self {
        Self { point, label }
    }
}

/// Posterior assignment over a finite point set; similarity is evaluated
/// exactly from the stored posteriors. Points are matched bitwise.
#[derive(Debug, Clone)]
pub struct ExactSimilarity<T> {
    points: Vec<Vec<T>>,
    posteriors: Vec<Posterior<T>>,
}

impl<T: Real> ExactSimilarity<T> {
    pub fn new(entries: Vec<(Vec<T>, Posterior<T>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("empty posterior assignment".into()));
        }
        let n_classes = entries[0].1.n_classes();
        let dim = entries[0].0.len();
        for (point, posterior) in &entries {
            if posterior.n_classes() != n_classes {
                return Err(Error::Shape(
                    "all posteriors must share one label set".into(),
                ));
            }
            if point.len() != dim {
                return Err(Error::Shape("all points must share one dimension".into()));
            }
        }
        let (points, posteriors) = entries.into_iter().unzip();
        Ok(Self { points, posteriors })
    }

    pub fn posterior_of(&self, x: &[T]) -> Result<&Posterior<T>> {
        self.points
            .iter()
            .position(|p| p.as_slice() == x)
            .map(|i| &self.posteriors[i])
            .ok_or_else(|| Error::Config("point has no assigned posterior".into()))
    }

    pub fn similarity(&self, x: &[T], y: &[T]) -> Result<T> {
        exact_similarity(self.posterior_of(x)?, self.posterior_of(y)?)
    }
}

/// Pair-input perceptron as the trained model of `P(same | x, x')`. The two
/// vectors are concatenated; with `symmetrize` set (the default) both input
/// orderings are evaluated and averaged, which restores the symmetry the
/// definition implies at twice the inference cost.
#[derive(Debug, Clone)]
pub struct LearnedSimilarity<T> {
    net: Mlp<T>,
    symmetrize: bool,
}

/// First-layer partial sums for one vector: `left = W₁[:, :h]·v` and
/// `right = W₁[:, h:]·v`. Caching these makes repeated scoring against a
/// fixed reference set cheap (see [`crate::knn`]).
#[derive(Debug, Clone)]
pub struct PairPartials<T> {
    pub left: Vec<T>,
    pub right: Vec<T>,
}

impl<T: Real> LearnedSimilarity<T> {
    pub fn new(net: Mlp<T>) -> Result<Self> {
        Self::with_symmetrize(net, true)
    }

    pub fn with_symmetrize(net: Mlp<T>, symmetrize: bool) -> Result<Self> {
        if net.input_size() % 2 != 0 {
            return Err(Error::Config(format!(
                "pair network needs an even input size, got {}",
                net.input_size()
            )));
        }
        if net.output_size() != 1 {
            return Err(Error::Config(format!(
                "pair network needs a single output, got {}",
                net.output_size()
            )));
        }
        Ok(Self { net, symmetrize })
    }

    pub fn net(&self) -> &Mlp<T> {
        &self.net
    }

    pub fn symmetrize(&self) -> bool {
        self.symmetrize
    }

    /// Length of each half of the pair input.
    pub fn half_size(&self) -> usize {
        self.net.input_size() / 2
    }

    fn check_pair(&self, x: &[T], y: &[T]) -> Result<()> {
        let half = self.half_size();
        if x.len() != half || y.len() != half {
            return Err(Error::Shape(format!(
                "pair halves of lengths {}/{}, network expects {half} each",
                x.len(),
                y.len()
            )));
        }
        Ok(())
    }

    /// `P(same | x, y)` in (0, 1).
    pub fn similarity(&self, x: &[T], y: &[T]) -> Result<T> {
        self.check_pair(x, y)?;
        let mut buf = Vec::with_capacity(x.len() * 2);
        buf.extend_from_slice(x);
        buf.extend_from_slice(y);
        let s1 = self.net.forward(&buf)?[0];
        if !self.symmetrize {
            return Ok(s1);
        }
        buf.clear();
        buf.extend_from_slice(y);
        buf.extend_from_slice(x);
        let s2 = self.net.forward(&buf)?[0];
        Ok((s1 + s2) / cast(2.0))
    }

    /// First-layer partial sums for `v`, reusable across many pairings.
    pub fn partials(&self, v: &[T]) -> Result<PairPartials<T>> {
        let half = self.half_size();
        if v.len() != half {
            return Err(Error::Shape(format!(
                "vector of length {}, network expects half-size {half}",
                v.len()
            )));
        }
        let hidden = self.net.layer_sizes()[1];
        let w = &self.net.weights()[0];
        let n = 2 * half;
        let mut left = vec![T::zero(); hidden];
        let mut right = vec![T::zero(); hidden];
        for j in 0..hidden {
            let row = &w[j * n..(j + 1) * n];
            let mut l = T::zero();
            let mut r = T::zero();
            for (i, &vi) in v.iter().enumerate() {
                if vi != T::zero() {
                    l = l + row[i] * vi;
                    r = r + row[half + i] * vi;
                }
            }
            left[j] = l;
            right[j] = r;
        }
        Ok(PairPartials { left, right })
    }

    /// Similarity from cached partials: the hidden pre-activation for the
    /// pair `(a, b)` is `bias + a.left + b.right`.
    pub fn similarity_from_partials(
        &self,
        a: &PairPartials<T>,
        b: &PairPartials<T>,
    ) -> Result<T> {
        let hidden = self.net.layer_sizes()[1];
        if a.left.len() != hidden || b.left.len() != hidden {
            return Err(Error::Shape("partials do not match the network".into()));
        }
        let s1 = self.tail_from_hidden(|j| a.left[j] + b.right[j])?;
        if !self.symmetrize {
            return Ok(s1);
        }
        let s2 = self.tail_from_hidden(|j| b.left[j] + a.right[j])?;
        Ok((s1 + s2) / cast(2.0))
    }

    fn tail_from_hidden(&self, pair_sum: impl Fn(usize) -> T) -> Result<T> {
        let hidden = self.net.layer_sizes()[1];
        let b1 = &self.net.biases()[0];
        let mut act: Vec<T> = (0..hidden)
            .map(|j| {
                let z = b1[j] + pair_sum(j);
                T::one() / (T::one() + (-z).exp())
            })
            .collect();
        let mut next = Vec::new();
        for l in 1..self.net.weights().len() {
            next.clear();
            next.resize(self.net.layer_sizes()[l + 1], T::zero());
            affine_sigmoid(&self.net.weights()[l], &self.net.biases()[l], &act, &mut next);
            std::mem::swap(&mut act, &mut next);
        }
        Ok(act[0])
    }
}

/// Symmetric positive-definite matrix for the quadratic-form decision rule.
/// Positive definiteness is established by Cholesky factorization at
/// construction; any nonpositive pivot is a matrix error.
#[derive(Debug, Clone)]
pub struct QuadraticForm<T> {
    dim: usize,
    entries: Vec<T>,
}

impl<T: Real> QuadraticForm<T> {
    pub fn new(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Matrix("empty matrix".into()));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("matrix must be square".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            entries.extend_from_slice(r);
        }
        let tol = scaled_tol::<T>(1e-9);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i];
                if (a - b).abs() > tol * (T::one() + a.abs()) {
                    return Err(Error::Matrix(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        cholesky_check(&entries, dim)?;
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(x − y)ᵀ Σ (x − y)`, non-negative for a positive-definite Σ.
    pub fn cost(&self, x: &[T], y: &[T]) -> Result<T> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(Error::Shape(format!(
                "vectors of lengths {}/{}, matrix is {}×{}",
                x.len(),
                y.len(),
                self.dim,
                self.dim
            )));
        }
        let d: Vec<T> = x.iter().zip(y).map(|(a, b)| *a - *b).collect();
        let mut total = T::zero();
        for i in 0..self.dim {
            let row = &self.entries[i * self.dim..(i + 1) * self.dim];
            let mut s = T::zero();
            for (w, v) in row.iter().zip(&d) {
                s = s + *w * *v;
            }
            total = total + d[i] * s;
        }
        Ok(total)
    }
}

/// Cholesky factorization attempt; only the pivots matter here.
fn cholesky_check<T: Real>(a: &[T], n: usize) -> Result<()> {
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= T::zero() {
                    return Err(Error::Matrix(format!(
                        "not positive definite: nonpositive pivot at row {i}"
                    )));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(())
}

/// One interface over the exact, learned, Euclidean, and quadratic-form
/// similarity variants.
#[derive(Debug, Clone)]
pub enum SimilarityModel<T> {
    Exact(ExactSimilarity<T>),
    Learned(LearnedSimilarity<T>),
    Euclidean,
    QuadraticForm(QuadraticForm<T>),
}

impl<T: Real> SimilarityModel<T> {
    /// Comparable score, higher = more alike. Similarities are returned as
    /// is; distances and quadratic costs are negated.
    pub fn score(&self, x: &[T], y: &[T]) -> Result<T> {
        match self {
            SimilarityModel::Exact(m) => m.similarity(x, y),
            SimilarityModel::Learned(m) => m.similarity(x, y),
            SimilarityModel::Euclidean => Ok(-euclidean_distance(x, y)?),
            SimilarityModel::QuadraticForm(q) => Ok(-q.cost(x, y)?),
        }
    }
}

/// Scores a (query, candidate) pair; higher = more alike. Implemented by
/// [`SimilarityModel`] and by test doubles.
pub trait PairScorer<T> {
    fn score(&self, x: &[T], y: &[T]) -> Result<T>;
}

impl<T: Real> PairScorer<T> for SimilarityModel<T> {
    fn score(&self, x: &[T], y: &[T]) -> Result<T> {
        SimilarityModel::score(self, x, y)
    }
}

pub fn euclidean_distance<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "vectors of lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let mut s = T::zero();
    for (a, b) in x.iter().zip(y) {
        let d = *a - *b;
        s = s + d * d;
    }
    Ok(s.sqrt())
}

fn check_unique_labels<T>(exemplars: &[Exemplar<T>]) -> Result<()> {
    for (i, e) in exemplars.iter().enumerate() {
        if exemplars[..i].iter().any(|p| p.label == e.label) {
            return Err(Error::Config(format!(
                "duplicate exemplar label {}",
                e.label
            )));
        }
    }
    Ok(())
}

/// Per-exemplar similarity scores of `x`, one exemplar per label. With the
/// exact variant and unambiguous exemplars the scores reproduce the true
/// posterior of `x` (order follows the exemplar list).
pub fn exemplar_posterior<T: Real>(
    sim: &SimilarityModel<T>,
    x: &[T],
    exemplars: &[Exemplar<T>],
) -> Result<Vec<T>> {
    if exemplars.is_empty() {
        return Err(Error::Config("no exemplars given".into()));
    }
    check_unique_labels(exemplars)?;
    exemplars
        .iter()
        .map(|e| sim.score(x, &e.point))
        .collect()
}

/// Adaptive-metric decision rule: the label of the prototype minimizing
/// `(x − x_ω)ᵀ Σ (x − x_ω)`; ties go to the lowest prototype index. Picking
/// the minimal quadratic cost is the same decision as picking the maximal
/// Gaussian similarity `exp(−½·cost)`.
pub fn gaussian_similarity_decision<T: Real>(
    x: &[T],
    prototypes: &[Exemplar<T>],
    sigma: &QuadraticForm<T>,
) -> Result<Label> {
    if prototypes.is_empty() {
        return Err(Error::Config("at least one prototype is required".into()));
    }
    let mut best = 0usize;
    let mut best_cost = sigma.cost(x, &prototypes[0].point)?;
    for (i, p) in prototypes.iter().enumerate().skip(1) {
        let c = sigma.cost(x, &p.point)?;
        if c < best_cost {
            best = i;
            best_cost = c;
        }
    }
    Ok(prototypes[best].label)
}
