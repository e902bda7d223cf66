use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, Vocabulary};
use super::ModelError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub l2: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    /// Computes per-example gradients on the rayon pool; reduction order is fixed.
    #[serde(default)]
    pub parallel: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { l2: 1e-4, lr: 0.1, epochs: 50, batch: 64, seed: 0, parallel: false }
    }
}

/// Linear softmax classifier over sparse features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SoftmaxHead<T> {
    pub labels: Vec<String>,
    pub dim: usize,
    /// Row-major `labels.len() × dim`.
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

/// Numerically stable softmax in place.
pub fn softmax_in_place<T: Scalar>(logits: &mut [T]) {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for z in logits.iter_mut() {
        *z = (*z - max).exp();
        sum += *z;
    }
    for z in logits.iter_mut() {
        *z /= sum;
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_dim<T: Scalar>(x: &FeatureVector<T>, dim: usize) -> Result<(), ModelError> {
    match x.max_index() {
        Some(i) if i >= dim => Err(ModelError::DimensionMismatch { expected: dim, found: i + 1 }),
        _ => Ok(()),
    }
}

pub(crate) fn distinct_labels(labels: &[usize]) -> usize {
    let mut seen: Vec<usize> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

impl<T: Scalar> SoftmaxHead<T> {
    pub fn zeros(labels: Vec<String>, dim: usize) -> Self {
        let c = labels.len();
        Self { labels, dim, weights: vec![T::zero(); c * dim], bias: vec![T::zero(); c] }
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn weight(&self, class: usize, feature: usize) -> T {
        self.weights[class * self.dim + feature]
    }

    pub fn logits(&self, x: &FeatureVector<T>) -> Result<Vec<T>, ModelError> {
        check_dim(x, self.dim)?;
        Ok(self.logits_unchecked(x, T::one()))
    }

    /// Logits for a dense input of length `dim`.
    pub fn logits_dense(&self, z: &[T]) -> Vec<T> {
        debug_assert_eq!(z.len(), self.dim);
        (0..self.num_classes())
            .map(|c| {
                let row = &self.weights[c * self.dim..(c + 1) * self.dim];
                row.iter().zip(z).map(|(w, v)| *w * *v).sum::<T>() + self.bias[c]
            })
            .collect()
    }

    fn logits_unchecked(&self, x: &FeatureVector<T>, scale: T) -> Vec<T> {
        (0..self.num_classes())
            .map(|c| {
                let row = &self.weights[c * self.dim..(c + 1) * self.dim];
                scale * x.iter().map(|(j, v)| row[j] * v).sum::<T>() + self.bias[c]
            })
            .collect()
    }

    pub fn probabilities(&self, x: &FeatureVector<T>) -> Result<Vec<T>, ModelError> {
        let mut z = self.logits(x)?;
        softmax_in_place(&mut z);
        Ok(z)
    }

    pub fn predict(&self, x: &FeatureVector<T>) -> Result<usize, ModelError> {
        Ok(argmax(&self.logits(x)?))
    }

    pub fn predict_label(&self, x: &FeatureVector<T>) -> Result<&str, ModelError> {
        Ok(&self.labels[self.predict(x)?])
    }

    pub fn label_index(&self, label: &str) -> Result<usize, ModelError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| ModelError::UnknownLabel(label.to_string()))
    }
}

/// Mean cross-entropy plus `l2 / 2 · ‖W‖²` (bias unregularized).
pub fn softmax_objective<T: Scalar>(head: &SoftmaxHead<T>, xs: &[FeatureVector<T>], ys: &[usize], l2: T) -> T {
    let n = T::of_usize(xs.len());
    let data: T = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let mut p = head.logits_unchecked(x, T::one());
            softmax_in_place(&mut p);
            -p[y].ln()
        })
        .sum::<T>()
        / n;
    let reg = head.weights.iter().map(|w| *w * *w).sum::<T>();
    data + l2 * reg / T::of(2.0)
}

/// Gradient of [`softmax_objective`]: dense `(dW, db)`.
pub fn softmax_gradient<T: Scalar>(
    head: &SoftmaxHead<T>,
    xs: &[FeatureVector<T>],
    ys: &[usize],
    l2: T,
) -> (Vec<T>, Vec<T>) {
    let n = T::of_usize(xs.len());
    let mut dw: Vec<T> = head.weights.iter().map(|w| l2 * *w).collect();
    let mut db = vec![T::zero(); head.num_classes()];
    for (x, &y) in xs.iter().zip(ys) {
        let mut p = head.logits_unchecked(x, T::one());
        softmax_in_place(&mut p);
        p[y] -= T::one();
        for (c, pc) in p.iter().enumerate() {
            let g = *pc / n;
            db[c] += g;
            for (j, v) in x.iter() {
                dw[c * head.dim + j] += g * v;
            }
        }
    }
    (dw, db)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Mean mini-batch objective per epoch, measured before each update.
    pub epoch_losses: Vec<f64>,
    pub steps: usize,
}

/// Weights stored as `scale · stored` so that L2 decay costs O(1) per step.
pub(crate) struct ScaledMatrix<T> {
    pub stored: Vec<T>,
    pub scale: T,
    sq: T,
}

impl<T: Scalar> ScaledMatrix<T> {
    pub fn new(values: Vec<T>) -> Self {
        let sq = values.iter().map(|v| *v * *v).sum();
        Self { stored: values, scale: T::one(), sq }
    }

    pub fn squared_norm(&self) -> T {
        self.scale * self.scale * self.sq
    }

    pub fn decay(&mut self, factor: T) {
        self.scale *= factor;
        if self.scale < T::of(1e-6) {
            self.fold();
        }
    }

    /// Adds `delta` to the true value at `i`.
    pub fn add(&mut self, i: usize, delta: T) {
        let old = self.stored[i];
        let new = old + delta / self.scale;
        self.sq += new * new - old * old;
        self.stored[i] = new;
    }

    pub fn fold(&mut self) {
        let s = self.scale;
        self.stored.iter_mut().for_each(|w| *w *= s);
        self.scale = T::one();
        self.sq = self.stored.iter().map(|v| *v * *v).sum();
    }

    pub fn into_values(mut self) -> Vec<T> {
        self.fold();
        self.stored
    }
}

pub(crate) fn shuffled_batches(n: usize, batch: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.chunks(batch.max(1)).map(|c| c.to_vec()).collect()
}

/// Mini-batch gradient descent on cross-entropy with L2, from zero weights.
pub fn train_softmax<T: Scalar>(
    features: &[FeatureVector<T>],
    labels: &[usize],
    label_names: Vec<String>,
    dim: usize,
    config: &TrainConfig,
) -> Result<(SoftmaxHead<T>, TrainingLog), ModelError> {
    if features.len() != labels.len() {
        return Err(ModelError::LengthMismatch { features: features.len(), labels: labels.len() });
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= label_names.len()) {
        return Err(ModelError::UnknownLabel(bad.to_string()));
    }
    if distinct_labels(labels) < 2 {
        return Err(ModelError::DegenerateLabels);
    }
    for x in features {
        check_dim(x, dim)?;
    }
    let c = label_names.len();
    let mut head = SoftmaxHead::zeros(label_names, dim);
    let mut w = ScaledMatrix::new(std::mem::take(&mut head.weights));
    let lr = T::of(config.lr);
    let l2 = T::of(config.l2);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut log = TrainingLog::default();

    for _ in 0..config.epochs {
        let mut epoch_loss = 0.0;
        let batches = shuffled_batches(features.len(), config.batch, &mut rng);
        for batch in &batches {
            let forward = |&i: &usize| {
                let x = &features[i];
                let mut p: Vec<T> = (0..c)
                    .map(|k| {
                        let row = &w.stored[k * dim..(k + 1) * dim];
                        w.scale * x.iter().map(|(j, v)| row[j] * v).sum::<T>() + head.bias[k]
                    })
                    .collect();
                softmax_in_place(&mut p);
                p
            };
            let probs: Vec<Vec<T>> = if config.parallel {
                batch.par_iter().map(forward).collect()
            } else {
                batch.iter().map(forward).collect()
            };
            let m = T::of_usize(batch.len());
            let data_loss: T = batch.iter().zip(&probs).map(|(&i, p)| -p[labels[i]].ln()).sum::<T>() / m;
            epoch_loss += (data_loss + l2 * w.squared_norm() / T::of(2.0)).f64();

            w.decay(T::one() - lr * l2);
            for (&i, p) in batch.iter().zip(&probs) {
                for (k, pk) in p.iter().enumerate() {
                    let g = (*pk - if k == labels[i] { T::one() } else { T::zero() }) / m;
                    head.bias[k] -= lr * g;
                    for (j, v) in features[i].iter() {
                        w.add(k * dim + j, -lr * g * v);
                    }
                }
            }
            log.steps += 1;
        }
        log.epoch_losses.push(epoch_loss / batches.len().max(1) as f64);
    }
    head.weights = w.into_values();
    Ok((head, log))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SalientFeatures<T> {
    pub label: String,
    /// Largest weights first.
    pub positive: Vec<(String, T)>,
    /// Smallest weights first.
    pub negative: Vec<(String, T)>,
}

/// Top-`k` n-grams by signed weight for `label`; ties broken by term.
pub fn salient_features<T: Scalar>(
    head: &SoftmaxHead<T>,
    vocab: &Vocabulary<T>,
    label: &str,
    k: usize,
) -> Result<SalientFeatures<T>, ModelError> {
    let class = head.label_index(label)?;
    if vocab.len() != head.dim {
        return Err(ModelError::DimensionMismatch { expected: head.dim, found: vocab.len() });
    }
    let mut scored: Vec<(String, T)> =
        vocab.terms.iter().enumerate().map(|(j, t)| (t.clone(), head.weight(class, j))).collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
    let positive = scored.iter().take(k).cloned().collect();
    scored.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
    let negative = scored.into_iter().take(k).collect();
    Ok(SalientFeatures { label: label.to_string(), positive, negative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmodels::features::VocabularyConfig;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn zero_head_is_uniform() {
        let head = SoftmaxHead::<f64>::zeros(names(4), 3);
        let x = FeatureVector::new(vec![0, 2], vec![0.6, 0.8]);
        assert_eq!(head.predict(&x).unwrap(), 0);
        let loss = softmax_objective(&head, &[x], &[2], 0.1);
        assert!((loss - 4f64.ln()).abs() < 1e-12);
        let too_big = FeatureVector::new(vec![5], vec![1.0]);
        assert!(matches!(head.predict(&too_big), Err(ModelError::DimensionMismatch { .. })));
    }

    #[test]
    fn favours_weighted_class() {
        let mut head = SoftmaxHead::<f64>::zeros(names(3), 2);
        head.weights[2 * 2 + 1] = 1.0;
        assert_eq!(head.predict(&FeatureVector::new(vec![1], vec![1.0])).unwrap(), 2);
    }

    #[test]
    fn separable_toy_reaches_full_accuracy() {
        let xs: Vec<FeatureVector<f64>> = (0..10)
            .map(|i| if i < 5 { FeatureVector::new(vec![0], vec![1.0]) } else { FeatureVector::new(vec![1], vec![1.0]) })
            .collect();
        let ys: Vec<usize> = (0..10).map(|i| usize::from(i >= 5)).collect();
        let config = TrainConfig { batch: 4, ..TrainConfig::default() };
        let (head, log) = train_softmax(&xs, &ys, names(2), 2, &config).unwrap();
        assert!(xs.iter().zip(&ys).all(|(x, &y)| head.predict(x).unwrap() == y));
        assert!(log.epoch_losses.windows(2).all(|w| w[1] <= w[0] + 1e-6));
        assert!(matches!(train_softmax(&xs, &[0; 10], names(2), 2, &config), Err(ModelError::DegenerateLabels)));
    }

    #[test]
    fn parallel_mode_matches_serial() {
        let xs: Vec<FeatureVector<f64>> =
            (0..40).map(|i| FeatureVector::new(vec![i % 3, 3 + i % 2], vec![0.6, 0.8])).collect();
        let ys: Vec<usize> = (0..40).map(|i| (i % 3) as usize).collect();
        let serial = TrainConfig { epochs: 5, batch: 8, seed: 3, ..TrainConfig::default() };
        let parallel = TrainConfig { parallel: true, ..serial };
        let a = train_softmax(&xs, &ys, names(3), 5, &serial).unwrap();
        let b = train_softmax(&xs, &ys, names(3), 5, &parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lazy_decay_matches_dense_update() {
        let xs = vec![FeatureVector::new(vec![0, 1], vec![0.6, 0.8]), FeatureVector::new(vec![2], vec![1.0])];
        let ys = vec![0, 1];
        let config = TrainConfig { epochs: 1, batch: 2, l2: 0.5, lr: 0.3, ..TrainConfig::default() };
        let (trained, _) = train_softmax(&xs, &ys, names(2), 3, &config).unwrap();
        let zero = SoftmaxHead::<f64>::zeros(names(2), 3);
        let (dw, db) = softmax_gradient(&zero, &xs, &ys, 0.5);
        for (w, g) in trained.weights.iter().zip(&dw) {
            assert!((w + 0.3 * g).abs() < 1e-12);
        }
        for (b, g) in trained.bias.iter().zip(&db) {
            assert!((b + 0.3 * g).abs() < 1e-12);
        }
    }

    #[test]
    fn salient_ordering() {
        let docs: Vec<Vec<String>> = ["a b", "a b", "c"].iter().map(|t| t.split(' ').map(String::from).collect()).collect();
        let vocab = Vocabulary::<f64>::fit(&docs, VocabularyConfig::default()).unwrap();
        let head = SoftmaxHead::zeros(names(2), vocab.len());
        let s = salient_features(&head, &vocab, "c1", 2).unwrap();
        assert_eq!(s.positive, vec![("a".to_string(), 0.0), ("a b".to_string(), 0.0)]);
        assert!(matches!(salient_features(&head, &vocab, "nope", 2), Err(ModelError::UnknownLabel(_))));
    }
}
