//! Nearest-prototype classification with error-driven prototype selection.
//!
//! Selection streams labeled vectors against a growing reference set: items
//! the current set misclassifies are appended, until the stream ends or the
//! set reaches its cap. Classification returns the label of the
//! highest-scoring prototype under any [`SimilarityModel`]; ties go to the
//! lowest prototype index.

use std::collections::BTreeMap;

use crate::num::Real;
use crate::similarity::{Label, LearnedSimilarity, PairPartials, SimilarityModel};
use crate::{Error, Result};

/// Ordered, capped set of labeled reference vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet<T> {
    items: Vec<(Vec<T>, Label)>,
    cap: usize,
}

impl<T: Real> PrototypeSet<T> {
    pub fn new(cap: usize) -> Result<Self> {
        if cap == 0 {
            return Err(Error::Config("prototype cap must be at least 1".into()));
        }
        Ok(Self {
            items: Vec::new(),
            cap,
        })
    }

    pub fn from_items(items: Vec<(Vec<T>, Label)>, cap: usize) -> Result<Self> {
        if cap == 0 {
            return Err(Error::Config("prototype cap must be at least 1".into()));
        }
        if items.len() > cap {
            return Err(Error::Config(format!(
                "{} prototypes exceed the cap of {cap}",
                items.len()
            )));
        }
        if let Some(dim) = items.first().map(|(v, _)| v.len()) {
            if items.iter().any(|(v, _)| v.len() != dim) {
                return Err(Error::Shape(
                    "all prototypes must share one dimension".into(),
                ));
            }
        }
        Ok(Self { items, cap })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn items(&self) -> &[(Vec<T>, Label)] {
        &self.items
    }

    /// The first `len` prototypes as their own set (same cap).
    pub fn prefix(&self, len: usize) -> Self {
        Self {
            items: self.items[..len.min(self.items.len())].to_vec(),
            cap: self.cap,
        }
    }
}

/// Counts of (true label, predicted label) pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Confusion {
    counts: BTreeMap<(Label, Label), usize>,
}

impl Confusion {
    pub fn record(&mut self, true_label: Label, predicted: Label) {
        *self.counts.entry((true_label, predicted)).or_insert(0) += 1;
    }

    pub fn count(&self, true_label: Label, predicted: Label) -> usize {
        self.counts.get(&(true_label, predicted)).copied().unwrap_or(0)
    }

    /// Number of test items whose true label was `true_label`.
    pub fn row_sum(&self, true_label: Label) -> usize {
        self.counts
            .iter()
            .filter(|((t, _), _)| *t == true_label)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, Label, usize)> + '_ {
        self.counts.iter().map(|(&(t, p), &c)| (t, p, c))
    }

    pub fn merge(&mut self, other: &Confusion) {
        for (t, p, c) in other.iter() {
            *self.counts.entry((t, p)).or_insert(0) += c;
        }
    }
}

/// Outcome of evaluating a frozen classifier on a test sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n_tested: usize,
    pub n_errors: usize,
    /// `n_errors / n_tested` (0 when nothing was tested).
    pub error_rate: f64,
    pub confusion: Confusion,
}

impl EvalReport {
    pub fn from_counts(n_tested: usize, n_errors: usize, confusion: Confusion) -> Self {
        let error_rate = if n_tested == 0 {
            0.0
        } else {
            n_errors as f64 / n_tested as f64
        };
        Self {
            n_tested,
            n_errors,
            error_rate,
            confusion,
        }
    }
}

/// Per-variant scoring state reused across queries. For the learned model
/// the prototypes' first-layer partial sums are cached, which turns each
/// query into one partial computation plus cheap per-prototype tails.
enum ProtoCache<'a, T> {
    Plain,
    Learned {
        model: &'a LearnedSimilarity<T>,
        partials: Vec<PairPartials<T>>,
    },
}

impl<'a, T: Real> ProtoCache<'a, T> {
    fn build(sim: &'a SimilarityModel<T>, items: &[(Vec<T>, Label)]) -> Result<Self> {
        match sim {
            SimilarityModel::Learned(model) => {
                let partials = items
                    .iter()
                    .map(|(v, _)| model.partials(v))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ProtoCache::Learned { model, partials })
            }
            _ => Ok(ProtoCache::Plain),
        }
    }

    fn push(&mut self, v: &[T]) -> Result<()> {
        if let ProtoCache::Learned { model, partials } = self {
            partials.push(model.partials(v)?);
        }
        Ok(())
    }

    fn best_label(
        &self,
        sim: &SimilarityModel<T>,
        x: &[T],
        items: &[(Vec<T>, Label)],
    ) -> Result<Label> {
        if items.is_empty() {
            return Err(Error::State("empty prototype set".into()));
        }
        let mut best = 0usize;
        match self {
            ProtoCache::Learned { model, partials } => {
                let qx = model.partials(x)?;
                let mut best_score = model.similarity_from_partials(&qx, &partials[0])?;
                for (i, p) in partials.iter().enumerate().take(items.len()).skip(1) {
                    let s = model.similarity_from_partials(&qx, p)?;
                    if s > best_score {
                        best_score = s;
                        best = i;
                    }
                }
            }
            ProtoCache::Plain => {
                let mut best_score = sim.score(x, &items[0].0)?;
                for (i, (v, _)) in items.iter().enumerate().skip(1) {
                    let s = sim.score(x, v)?;
                    if s > best_score {
                        best_score = s;
                        best = i;
                    }
                }
            }
        }
        Ok(items[best].1)
    }
}

/// Label of the highest-scoring prototype; ties go to the lowest index.
pub fn classify<T: Real>(
    x: &[T],
    protos: &PrototypeSet<T>,
    sim: &SimilarityModel<T>,
) -> Result<Label> {
    let cache = ProtoCache::build(sim, protos.items())?;
    cache.best_label(sim, x, protos.items())
}

/// Error-driven prototype selection: stream items are classified against the
/// growing set; misclassified items (and the first item) are appended until
/// the cap is reached or the stream ends.
pub fn select_prototypes<T: Real, I>(
    stream: I,
    sim: &SimilarityModel<T>,
    cap: usize,
) -> Result<PrototypeSet<T>>
where
    I: IntoIterator<Item = (Vec<T>, Label)>,
{
    let mut set = PrototypeSet::new(cap)?;
    let mut cache = ProtoCache::build(sim, set.items())?;
    for (x, label) in stream {
        let add = if set.is_empty() {
            true
        } else {
            cache.best_label(sim, &x, set.items())? != label
        };
        if add {
            cache.push(&x)?;
            set.items.push((x, label));
            if set.len() == cap {
                break;
            }
        }
    }
    Ok(set)
}

/// Classifies each test item against a frozen prototype set and counts
/// errors (misclassified items are never added).
pub fn evaluate<T: Real, I>(
    test: I,
    protos: &PrototypeSet<T>,
    sim: &SimilarityModel<T>,
) -> Result<EvalReport>
where
    I: IntoIterator<Item = (Vec<T>, Label)>,
{
    if protos.is_empty() {
        return Err(Error::State("empty prototype set".into()));
    }
    let cache = ProtoCache::build(sim, protos.items())?;
    let mut n_tested = 0;
    let mut n_errors = 0;
    let mut confusion = Confusion::default();
    for (x, label) in test {
        let predicted = cache.best_label(sim, &x, protos.items())?;
        n_tested += 1;
        if predicted != label {
            n_errors += 1;
        }
        confusion.record(label, predicted);
    }
    Ok(EvalReport::from_counts(n_tested, n_errors, confusion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn classify_single_prototype_returns_its_label() {
        let set = PrototypeSet::from_items(vec![(vec![5.0, 5.0], 3)], 10).unwrap();
        let got = classify(&[-100.0, 40.0], &set, &SimilarityModel::Euclidean).unwrap();
        assert_eq!(got, 3);
    }

    #[test]
    fn classify_breaks_ties_toward_lowest_index() {
        let set = PrototypeSet::from_items(vec![(vec![0.0], 0), (vec![2.0], 1)], 10).unwrap();
        // x = 1 is exactly equidistant.
        let got = classify(&[1.0], &set, &SimilarityModel::Euclidean).unwrap();
        assert_eq!(got, 0);
    }

    #[test]
    fn classify_rejects_empty_set() {
        let set = PrototypeSet::<f64>::new(4).unwrap();
        assert!(matches!(
            classify(&[0.0], &set, &SimilarityModel::Euclidean),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn classify_exact_matches_brute_force_scan() {
        use crate::similarity::{ExactSimilarity, Posterior};
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let k = 4;
            let mut entries = Vec::new();
            let mut items = Vec::new();
            for i in 0..5usize {
                let point = vec![i as f64, rng.random_range(-1.0..1.0)];
                let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
                let sum: f64 = raw.iter().sum();
                let posterior =
                    Posterior::new(raw.into_iter().map(|v| v / sum).collect()).unwrap();
                entries.push((point.clone(), posterior));
                items.push((point, i % 3));
            }
            let x = vec![9.0, 9.0];
            let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            entries.push((
                x.clone(),
                Posterior::new(raw.into_iter().map(|v| v / sum).collect()).unwrap(),
            ));
            let exact = ExactSimilarity::new(entries).unwrap();
            let sim = SimilarityModel::Exact(exact.clone());
            let set = PrototypeSet::from_items(items.clone(), 10).unwrap();
            let got = classify(&x, &set, &sim).unwrap();

            let mut best = 0usize;
            let mut best_score = f64::NEG_INFINITY;
            for (i, (v, _)) in items.iter().enumerate() {
                let s = exact.similarity(&x, v).unwrap();
                if s > best_score {
                    best_score = s;
                    best = i;
                }
            }
            assert_eq!(got, items[best].1);
        }
    }

    #[test]
    fn select_collapses_repeated_items() {
        let stream = vec![(vec![1.0, 2.0], 7); 20];
        let set = select_prototypes(stream, &SimilarityModel::Euclidean, 100).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.items()[0].1, 7);
    }

    #[test]
    fn select_two_separated_clusters() {
        // Alternating stream from two well-separated clusters: the first item
        // of each cluster is misclassified (or hits the empty set) and joins;
        // everything after is classified correctly.
        let mut stream = Vec::new();
        for i in 0..10 {
            let j = i as f64 * 0.01;
            stream.push((vec![0.0 + j, 0.0], 0));
            stream.push((vec![100.0 - j, 0.0], 1));
        }
        let set = select_prototypes(stream, &SimilarityModel::Euclidean, 50).unwrap();
        assert_eq!(set.len(), 2);
    }

    #[test]
    fn select_respects_cap_and_replays() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for cap in [1usize, 3, 8, 100] {
            let stream: Vec<(Vec<f64>, Label)> = (0..60)
                .map(|_| {
                    (
                        vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                        rng.random_range(0..3usize),
                    )
                })
                .collect();
            let sim = SimilarityModel::Euclidean;
            let set = select_prototypes(stream.clone(), &sim, cap).unwrap();
            assert!(set.len() <= cap);

            // Replay: simulate the growth decisions against insertion-time
            // prefixes and require the identical set.
            let mut replay_len = 0usize;
            for (x, label) in &stream {
                if replay_len == set.len() && replay_len == cap {
                    break;
                }
                let add = if replay_len == 0 {
                    true
                } else {
                    classify(x, &set.prefix(replay_len), &sim).unwrap() != *label
                };
                if add {
                    assert!(replay_len < set.len(), "unexpected insertion during replay");
                    assert_eq!(set.items()[replay_len], (x.clone(), *label));
                    replay_len += 1;
                }
            }
            assert_eq!(replay_len, set.len());
        }
    }

    #[test]
    fn select_prefix_property_across_caps() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let stream: Vec<(Vec<f64>, Label)> = (0..80)
            .map(|_| {
                (
                    vec![rng.random_range(-1.0..1.0)],
                    rng.random_range(0..4usize),
                )
            })
            .collect();
        let small = select_prototypes(stream.clone(), &SimilarityModel::Euclidean, 4).unwrap();
        let large = select_prototypes(stream, &SimilarityModel::Euclidean, 12).unwrap();
        assert_eq!(small.items(), &large.items()[..small.len()]);
    }

    #[test]
    fn evaluate_on_the_prototypes_themselves_is_error_free() {
        let items = vec![
            (vec![0.0, 0.0], 0),
            (vec![5.0, 1.0], 1),
            (vec![-3.0, 2.0], 2),
        ];
        let set = PrototypeSet::from_items(items.clone(), 10).unwrap();
        let report = evaluate(items, &set, &SimilarityModel::Euclidean).unwrap();
        assert_eq!(report.n_errors, 0);
        assert_eq!(report.error_rate, 0.0);
    }

    #[test]
    fn evaluate_single_prototype_quarter_error() {
        let set = PrototypeSet::from_items(vec![(vec![0.0], 0)], 1).unwrap();
        let test = vec![
            (vec![0.1], 0),
            (vec![0.2], 0),
            (vec![0.3], 0),
            (vec![9.0], 1),
        ];
        let report = evaluate(test, &set, &SimilarityModel::Euclidean).unwrap();
        assert_eq!(report.n_tested, 4);
        assert_eq!(report.n_errors, 1);
        assert_eq!(report.error_rate, 0.25);
    }

    #[test]
    fn evaluate_confusion_recounts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let protos: Vec<(Vec<f64>, Label)> = (0..4)
            .map(|i| (vec![i as f64 * 10.0], i))
            .collect();
        let set = PrototypeSet::from_items(protos, 10).unwrap();
        let test: Vec<(Vec<f64>, Label)> = (0..40)
            .map(|_| {
                (
                    vec![rng.random_range(-5.0..35.0)],
                    rng.random_range(0..4usize),
                )
            })
            .collect();
        let report = evaluate(test.clone(), &set, &SimilarityModel::Euclidean).unwrap();

        // Independent recount.
        let mut errors = 0usize;
        let mut per_label = vec![0usize; 4];
        for (x, label) in &test {
            let predicted = classify(x, &set, &SimilarityModel::Euclidean).unwrap();
            per_label[*label] += 1;
            if predicted != *label {
                errors += 1;
            }
        }
        assert_eq!(report.n_errors, errors);
        assert_eq!(report.error_rate, errors as f64 / 40.0);
        for label in 0..4 {
            assert_eq!(report.confusion.row_sum(label), per_label[label]);
        }
    }
}
