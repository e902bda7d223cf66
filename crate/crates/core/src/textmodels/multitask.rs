use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use super::softmax::{argmax, check_dim, distinct_labels, shuffled_batches, softmax_in_place, ScaledMatrix, SoftmaxHead, TrainConfig};
use super::ModelError;
use crate::eval::Task;
use crate::scalar::Scalar;

/// Repeating update pattern: `stance` stance steps, then `policy` policy steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSchedule {
    pub stance: u32,
    pub policy: u32,
}

impl Default for TaskSchedule {
    fn default() -> Self {
        Self { stance: 3, policy: 1 }
    }
}

impl TaskSchedule {
    pub fn new(stance: u32, policy: u32) -> Result<Self, ModelError> {
        if stance == 0 || policy == 0 {
            return Err(ModelError::InvalidRatio(stance, policy));
        }
        Ok(Self { stance, policy })
    }

    /// Task updated at zero-based `step`.
    pub fn task_at(&self, step: usize) -> Task {
        let period = (self.stance + self.policy) as usize;
        if step % period < self.stance as usize {
            Task::Stance
        } else {
            Task::Policy
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiTaskConfig {
    pub train: TrainConfig,
    pub hidden: usize,
    pub schedule: TaskSchedule,
    /// Projection entries start uniform in `±init_scale`.
    pub init_scale: f64,
    /// Stop updating the projection from this epoch on.
    #[serde(default)]
    pub freeze_projection_after: Option<usize>,
    /// Run exactly this many steps instead of `train.epochs` epochs.
    #[serde(default)]
    pub max_steps: Option<usize>,
}

impl Default for MultiTaskConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            hidden: 256,
            schedule: TaskSchedule::default(),
            init_scale: 0.05,
            freeze_projection_after: None,
            max_steps: None,
        }
    }
}

/// Shared linear projection read by a stance head and a policy head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MultiTaskLinearModel<T> {
    pub dim: usize,
    pub hidden: usize,
    /// Row-major `hidden × dim`.
    pub projection: Vec<T>,
    pub stance: SoftmaxHead<T>,
    pub policy: SoftmaxHead<T>,
    pub schedule: TaskSchedule,
}

fn project<T: Scalar>(projection: &[T], scale: T, hidden: usize, dim: usize, x: &FeatureVector<T>) -> Vec<T> {
    (0..hidden)
        .map(|r| {
            let row = &projection[r * dim..(r + 1) * dim];
            scale * x.iter().map(|(j, v)| row[j] * v).sum::<T>()
        })
        .collect()
}

/// Gradient of [`multitask_objective`] for one task.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTaskGradient<T> {
    pub projection: Vec<T>,
    pub head_weights: Vec<T>,
    pub head_bias: Vec<T>,
}

impl<T: Scalar> MultiTaskLinearModel<T> {
    /// Projection drawn from a seeded uniform distribution; heads at zero.
    pub fn init(
        dim: usize,
        hidden: usize,
        stance_labels: Vec<String>,
        policy_labels: Vec<String>,
        schedule: TaskSchedule,
        init_scale: f64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let projection = (0..hidden * dim)
            .map(|_| T::of(if init_scale > 0.0 { rng.random_range(-init_scale..init_scale) } else { 0.0 }))
            .collect();
        Self {
            dim,
            hidden,
            projection,
            stance: SoftmaxHead::zeros(stance_labels, hidden),
            policy: SoftmaxHead::zeros(policy_labels, hidden),
            schedule,
        }
    }

    pub fn head(&self, task: Task) -> &SoftmaxHead<T> {
        match task {
            Task::Stance => &self.stance,
            Task::Policy => &self.policy,
        }
    }

    pub fn head_mut(&mut self, task: Task) -> &mut SoftmaxHead<T> {
        match task {
            Task::Stance => &mut self.stance,
            Task::Policy => &mut self.policy,
        }
    }

    /// Shared representation of `x`.
    pub fn represent(&self, x: &FeatureVector<T>) -> Result<Vec<T>, ModelError> {
        check_dim(x, self.dim)?;
        Ok(project(&self.projection, T::one(), self.hidden, self.dim, x))
    }

    pub fn probabilities(&self, task: Task, x: &FeatureVector<T>) -> Result<Vec<T>, ModelError> {
        let mut p = self.head(task).logits_dense(&self.represent(x)?);
        softmax_in_place(&mut p);
        Ok(p)
    }

    pub fn predict(&self, task: Task, x: &FeatureVector<T>) -> Result<usize, ModelError> {
        Ok(argmax(&self.head(task).logits_dense(&self.represent(x)?)))
    }
}

/// Mean cross-entropy of one task plus `l2 / 2 · (‖W_task‖² + ‖P‖²)`.
pub fn multitask_objective<T: Scalar>(
    model: &MultiTaskLinearModel<T>,
    task: Task,
    xs: &[FeatureVector<T>],
    ys: &[usize],
    l2: T,
) -> T {
    let head = model.head(task);
    let n = T::of_usize(xs.len());
    let data = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = project(&model.projection, T::one(), model.hidden, model.dim, x);
            let mut p = head.logits_dense(&z);
            softmax_in_place(&mut p);
            -p[y].ln()
        })
        .sum::<T>()
        / n;
    let reg = head.weights.iter().chain(&model.projection).map(|w| *w * *w).sum::<T>();
    data + l2 * reg / T::of(2.0)
}

pub fn multitask_gradient<T: Scalar>(
    model: &MultiTaskLinearModel<T>,
    task: Task,
    xs: &[FeatureVector<T>],
    ys: &[usize],
    l2: T,
) -> MultiTaskGradient<T> {
    let head = model.head(task);
    let (h, v) = (model.hidden, model.dim);
    let n = T::of_usize(xs.len());
    let mut grad = MultiTaskGradient {
        projection: model.projection.iter().map(|w| l2 * *w).collect(),
        head_weights: head.weights.iter().map(|w| l2 * *w).collect(),
        head_bias: vec![T::zero(); head.num_classes()],
    };
    for (x, &y) in xs.iter().zip(ys) {
        let z = project(&model.projection, T::one(), h, v, x);
        let mut p = head.logits_dense(&z);
        softmax_in_place(&mut p);
        p[y] -= T::one();
        let mut dz = vec![T::zero(); h];
        for (c, pc) in p.iter().enumerate() {
            let g = *pc / n;
            grad.head_bias[c] += g;
            for r in 0..h {
                grad.head_weights[c * h + r] += g * z[r];
                dz[r] += g * head.weights[c * h + r];
            }
        }
        for (r, dzr) in dz.iter().enumerate() {
            for (j, xj) in x.iter() {
                grad.projection[r * v + j] += *dzr * xj;
            }
        }
    }
    grad
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MultiTaskLog {
    pub stance_updates: usize,
    pub policy_updates: usize,
    pub projection_updates: usize,
    pub stance_losses: Vec<f64>,
    pub policy_losses: Vec<f64>,
}

/// Alternates task updates following the schedule; every step also moves
/// the shared projection unless it is frozen.
pub fn train_multitask<T: Scalar>(
    features: &[FeatureVector<T>],
    stance_labels: &[usize],
    policy_labels: &[usize],
    stance_names: Vec<String>,
    policy_names: Vec<String>,
    dim: usize,
    config: &MultiTaskConfig,
) -> Result<(MultiTaskLinearModel<T>, MultiTaskLog), ModelError> {
    let n = features.len();
    if stance_labels.len() != n || policy_labels.len() != n {
        return Err(ModelError::LengthMismatch { features: n, labels: stance_labels.len().min(policy_labels.len()) });
    }
    if distinct_labels(stance_labels) < 2 || distinct_labels(policy_labels) < 2 {
        return Err(ModelError::DegenerateLabels);
    }
    if stance_labels.iter().any(|&y| y >= stance_names.len()) || policy_labels.iter().any(|&y| y >= policy_names.len()) {
        return Err(ModelError::UnknownLabel("label index out of range".into()));
    }
    let schedule = TaskSchedule::new(config.schedule.stance, config.schedule.policy)?;
    for x in features {
        check_dim(x, dim)?;
    }
    let t = &config.train;
    let mut model = MultiTaskLinearModel::<T>::init(
        dim,
        config.hidden,
        stance_names,
        policy_names,
        schedule,
        config.init_scale,
        t.seed,
    );
    let h = config.hidden;
    let mut proj = ScaledMatrix::new(std::mem::take(&mut model.projection));
    let lr = T::of(t.lr);
    let l2 = T::of(t.l2);
    let mut rng = ChaCha8Rng::seed_from_u64(t.seed.wrapping_add(1));
    let mut log = MultiTaskLog::default();
    let total_steps = config.max_steps.unwrap_or(usize::MAX);
    let mut step = 0;
    let mut epoch = 0;

    while step < total_steps && (config.max_steps.is_some() || epoch < t.epochs) {
        let frozen = config.freeze_projection_after.is_some_and(|e| epoch >= e);
        let (mut s_loss, mut s_n, mut p_loss, mut p_n) = (0.0, 0, 0.0, 0);
        for batch in shuffled_batches(n, t.batch, &mut rng) {
            if step >= total_steps {
                break;
            }
            let task = schedule.task_at(step);
            let labels = match task {
                Task::Stance => stance_labels,
                Task::Policy => policy_labels,
            };
            let head = model.head(task);
            let c = head.num_classes();
            let forward = |&i: &usize| {
                let z = project(&proj.stored, proj.scale, h, dim, &features[i]);
                let mut p = head.logits_dense(&z);
                softmax_in_place(&mut p);
                (z, p)
            };
            let out: Vec<(Vec<T>, Vec<T>)> = if t.parallel {
                batch.par_iter().map(forward).collect()
            } else {
                batch.iter().map(forward).collect()
            };
            let m = T::of_usize(batch.len());
            let data_loss = batch.iter().zip(&out).map(|(&i, (_, p))| -p[labels[i]].ln()).sum::<T>() / m;
            let head_sq = head.weights.iter().map(|w| *w * *w).sum::<T>();
            let loss = (data_loss + l2 * (head_sq + proj.squared_norm()) / T::of(2.0)).f64();

            let mut dw = vec![T::zero(); c * h];
            let mut db = vec![T::zero(); c];
            let mut dzs = Vec::with_capacity(batch.len());
            for (&i, (z, p)) in batch.iter().zip(&out) {
                let mut dz = vec![T::zero(); h];
                for (k, pk) in p.iter().enumerate() {
                    let g = (*pk - if k == labels[i] { T::one() } else { T::zero() }) / m;
                    db[k] += g;
                    for r in 0..h {
                        dw[k * h + r] += g * z[r];
                        dz[r] += g * head.weights[k * h + r];
                    }
                }
                dzs.push(dz);
            }
            if !frozen {
                proj.decay(T::one() - lr * l2);
                for (&i, dz) in batch.iter().zip(&dzs) {
                    for (r, dzr) in dz.iter().enumerate() {
                        for (j, xj) in features[i].iter() {
                            proj.add(r * dim + j, -lr * *dzr * xj);
                        }
                    }
                }
                log.projection_updates += 1;
            }
            let head = model.head_mut(task);
            for (w, g) in head.weights.iter_mut().zip(&dw) {
                *w -= lr * (*g + l2 * *w);
            }
            for (b, g) in head.bias.iter_mut().zip(&db) {
                *b -= lr * *g;
            }
            match task {
                Task::Stance => {
                    log.stance_updates += 1;
                    s_loss += loss;
                    s_n += 1;
                }
                Task::Policy => {
                    log.policy_updates += 1;
                    p_loss += loss;
                    p_n += 1;
                }
            }
            step += 1;
        }
        log.stance_losses.push(if s_n > 0 { s_loss / s_n as f64 } else { f64::NAN });
        log.policy_losses.push(if p_n > 0 { p_loss / p_n as f64 } else { f64::NAN });
        epoch += 1;
        if n == 0 {
            break;
        }
    }
    model.projection = proj.into_values();
    Ok((model, log))
}
