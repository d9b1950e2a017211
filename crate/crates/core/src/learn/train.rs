use std::fmt;
use std::str::FromStr;

use crate::data::{Dataset, Split, Targets};
use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, Rng};
use crate::penalty::{evaluate as evaluate_penalty, PenaltyFamily, PenaltySpec};
use crate::sampler::{draw_masks, IndexCounter, SamplerConfig, SamplerState, SelectionMode};

use super::loss::{loss_ce, loss_mse, loss_projected_ce, LossKind};
use super::metrics::{count_above, MetricsRow, DEFAULT_METRIC_THRESHOLD};
use super::model::Model;
use super::optim::{Optimizer, OptimizerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularizer {
    None,
    L1,
    L2,
    Proposed,
}

impl FromStr for Regularizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Regularizer::None),
            "l1" => Ok(Regularizer::L1),
            "l2" => Ok(Regularizer::L2),
            "proposed" => Ok(Regularizer::Proposed),
            other => Err(Error::InvalidConfig(format!(
                "unknown regularizer `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regularizer::None => "none",
            Regularizer::L1 => "l1",
            Regularizer::L2 => "l2",
            Regularizer::Proposed => "proposed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub reg: Regularizer,
    /// Mask sampler for the projected penalty.
    pub sampler: SamplerConfig,
    /// λ and counter normalization. The family is taken from `reg`, except
    /// that `Proposed` honours a sqrt/squared choice here.
    pub penalty: PenaltySpec,
    /// Carry each sampler's distribution across steps.
    pub momentum: bool,
    /// Class sampler for projected cross entropy.
    pub loss_sampler: SamplerConfig,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub metric_threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: LossKind::CrossEntropy,
            reg: Regularizer::None,
            sampler: SamplerConfig::default(),
            penalty: PenaltySpec::default(),
            momentum: true,
            loss_sampler: SamplerConfig {
                density: 0.3,
                experiments: 1,
                selection: SelectionMode::Sampled,
                ..SamplerConfig::default()
            },
            learning_rate: 0.001,
            batch_size: 32,
            epochs: 20,
            optimizer: OptimizerKind::AdaptiveMoment,
            seed: 0,
            metric_threshold: DEFAULT_METRIC_THRESHOLD,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        if self.metric_threshold.is_nan() || self.metric_threshold < 0.0 {
            return Err(Error::InvalidConfig("metric threshold must be >= 0".into()));
        }
        self.penalty.validate()?;
        if self.reg == Regularizer::Proposed {
            self.sampler.validate()?;
        }
        if self.loss == LossKind::ProjectedCe {
            self.loss_sampler.validate()?;
        }
        self.penalty_spec().map(|_| ())
    }

    /// The penalty actually applied, or `None` without regularization.
    pub fn penalty_spec(&self) -> Result<Option<PenaltySpec>> {
        let family = match self.reg {
            Regularizer::None => return Ok(None),
            Regularizer::L1 => PenaltyFamily::L1,
            Regularizer::L2 => PenaltyFamily::L2,
            Regularizer::Proposed if self.penalty.family.is_projected() => self.penalty.family,
            Regularizer::Proposed => {
                return Err(Error::InvalidConfig(format!(
                    "proposed regularizer needs a projected penalty family, got {}",
                    self.penalty.family
                )))
            }
        };
        Ok(Some(PenaltySpec {
            family,
            ..self.penalty.clone()
        }))
    }
}

/// Loss and accuracy of `model` on `data` without any projection: plain
/// cross entropy for class targets, MSE for regression (where "accuracy" is
/// R² clamped to [0, 1]).
pub fn evaluate_model(model: &Model, data: &Dataset) -> Result<(f64, f64)> {
    const CHUNK: usize = 1024;
    let n = data.len();
    if n == 0 {
        return Err(Error::InvalidConfig(
            "cannot evaluate on an empty dataset".into(),
        ));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    let mut sq_err = 0.0;
    for start in (0..n).step_by(CHUNK) {
        let idx: Vec<usize> = (start..n.min(start + CHUNK)).collect();
        let logits = model.logits(&data.features.select_rows(&idx))?;
        for (r, &i) in idx.iter().enumerate() {
            let out = logits.row(r);
            match &data.targets {
                Targets::Classes(y) => {
                    loss += loss_ce(out, y[i])?.0;
                    if argmax(out) == y[i] {
                        correct += 1;
                    }
                }
                Targets::Regression(y) => {
                    let e = out[0] - y[i];
                    sq_err += e * e;
                }
            }
        }
    }
    let nf = n as f64;
    Ok(match &data.targets {
        Targets::Classes(_) => (loss / nf, correct as f64 / nf),
        Targets::Regression(y) => {
            let mean = y.iter().sum::<f64>() / nf;
            let total: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
            let r2 = if total > 0.0 {
                1.0 - sq_err / total
            } else {
                0.0
            };
            (sq_err / nf, r2.clamp(0.0, 1.0))
        }
    })
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

fn check_task(model: &Model, data: &Dataset, loss: LossKind) -> Result<()> {
    if data.is_empty() {
        return Err(Error::InvalidConfig("training data is empty".into()));
    }
    if data.dim() != model.input_dim() {
        return Err(Error::Dimension(format!(
            "data has {} features, model expects {}",
            data.dim(),
            model.input_dim()
        )));
    }
    match (&data.targets, loss.is_classification()) {
        (Targets::Classes(_), true) => {
            let classes = data.n_classes.unwrap_or(0);
            if classes != model.output_dim() {
                return Err(Error::Dimension(format!(
                    "{classes} classes but the model has {} outputs",
                    model.output_dim()
                )));
            }
        }
        (Targets::Regression(_), false) => {
            if model.output_dim() != 1 {
                return Err(Error::Dimension("regression needs a single output".into()));
            }
        }
        _ => {
            return Err(Error::InvalidConfig(format!(
                "loss {loss} does not fit the dataset's targets"
            )))
        }
    }
    Ok(())
}

/// Mean of per-sample distributions, renormalized.
fn mean_distribution(sum: Vec<f64>) -> Vec<f64> {
    let total: f64 = sum.iter().sum();
    sum.into_iter().map(|v| v / total).collect()
}

fn metrics_row(
    model: &Model,
    iteration: usize,
    split: Split,
    loss: f64,
    accuracy: f64,
    threshold: f64,
) -> MetricsRow {
    let magnitude = model.weight_values().map(f64::abs).sum();
    let kept = count_above(model.weight_values(), threshold);
    let sparsity = 1.0 - kept as f64 / model.weight_count().max(1) as f64;
    MetricsRow {
        iteration,
        split,
        loss,
        accuracy,
        weight_magnitude: magnitude,
        weight_density: 1.0 - sparsity,
    }
}

/// Mini-batch training. Emits a train row and a test row per epoch.
///
/// Independent streams of `Rng::new(cfg.seed)` drive shuffling (1), mask
/// sampling (2) and class sampling (3); stream 0 is left for model
/// initialisation by the caller.
pub fn train(
    model: &mut Model,
    train_data: &Dataset,
    test_data: &Dataset,
    cfg: &TrainConfig,
) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    check_task(model, train_data, cfg.loss)?;
    check_task(model, test_data, cfg.loss)?;
    let penalty = cfg.penalty_spec()?;

    let root = Rng::new(cfg.seed);
    let mut shuffle_rng = root.substream(1);
    let mut mask_rng = root.substream(2);
    let mut class_rng = root.substream(3);

    let n_layers = model.layers.len();
    let mut mask_states = vec![SamplerState::new(); n_layers];
    let mut class_state = SamplerState::new();
    let mut optimizer = Optimizer::new(cfg.optimizer, cfg.learning_rate);

    let n = train_data.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rows = Vec::with_capacity(2 * cfg.epochs);
    let mut step = 0usize;

    for _ in 0..cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            step += 1;
            let x = train_data.features.select_rows(batch);
            let activations = model.forward(&x)?;
            let logits = activations.last().unwrap();
            let b = batch.len() as f64;

            let mut d_logits = DenseMatrix::zeros(logits.rows(), logits.cols());
            let mut batch_loss = 0.0;
            let mut class_dist: Option<Vec<f64>> = None;
            match &train_data.targets {
                Targets::Regression(y) => {
                    let pred: Vec<f64> = (0..batch.len()).map(|r| logits.get(r, 0)).collect();
                    let target: Vec<f64> = batch.iter().map(|&i| y[i]).collect();
                    let (value, grad) = loss_mse(&pred, &target)?;
                    batch_loss = value;
                    d_logits.as_mut_slice().copy_from_slice(&grad);
                }
                Targets::Classes(y) => {
                    for (r, &i) in batch.iter().enumerate() {
                        let out = logits.row(r);
                        let (value, grad) = if cfg.loss == LossKind::ProjectedCe {
                            let state = cfg.momentum.then_some(&class_state);
                            let p = loss_projected_ce(
                                out,
                                y[i],
                                &cfg.loss_sampler,
                                state,
                                &mut class_rng,
                            )?;
                            if let Some(dist) = p.distribution {
                                let acc = class_dist.get_or_insert_with(|| vec![0.0; dist.len()]);
                                acc.iter_mut().zip(&dist).for_each(|(a, d)| *a += d);
                            }
                            (p.value, p.gradient)
                        } else {
                            loss_ce(out, y[i])?
                        };
                        batch_loss += value / b;
                        for (d, g) in d_logits.row_mut(r).iter_mut().zip(&grad) {
                            *d = g / b;
                        }
                    }
                }
            }
            if !batch_loss.is_finite() {
                return Err(Error::Divergence {
                    step,
                    what: "data loss",
                });
            }
            epoch_loss += batch_loss * b;

            let mut grads = model.backward(&activations, d_logits)?;

            if let Some(spec) = &penalty {
                for (l, (layer, grad)) in model.layers.iter().zip(grads.iter_mut()).enumerate() {
                    let w = layer.weights.as_slice();
                    let result = if spec.family.is_projected() {
                        let state = cfg.momentum.then_some(&mask_states[l]);
                        let draw = draw_masks(w, &cfg.sampler, state, &mut mask_rng)?;
                        let r = evaluate_penalty(w, spec, &draw.masks, &draw.counter)?;
                        if cfg.momentum {
                            if let Some(dist) = draw.distribution {
                                mask_states[l].commit(dist)?;
                            }
                        }
                        r
                    } else {
                        evaluate_penalty(w, spec, &[], &IndexCounter::new(w.len()))?
                    };
                    if !result.value.is_finite() {
                        return Err(Error::Divergence {
                            step,
                            what: "penalty",
                        });
                    }
                    for (g, p) in grad.weights.as_mut_slice().iter_mut().zip(&result.gradient) {
                        *g += p;
                    }
                }
            }
            if cfg.momentum {
                if let Some(sum) = class_dist {
                    class_state.commit(mean_distribution(sum))?;
                }
            }

            optimizer.begin_step();
            for (l, (layer, grad)) in model.layers.iter_mut().zip(&grads).enumerate() {
                optimizer.update(2 * l, layer.weights.as_mut_slice(), grad.weights.as_slice());
                optimizer.update(2 * l + 1, &mut layer.bias, &grad.bias);
            }
            if !model.is_finite() {
                return Err(Error::Divergence {
                    step,
                    what: "parameters",
                });
            }
        }

        let (_, train_acc) = evaluate_model(model, train_data)?;
        rows.push(metrics_row(
            model,
            step,
            Split::Train,
            epoch_loss / n as f64,
            train_acc,
            cfg.metric_threshold,
        ));
        let (test_loss, test_acc) = evaluate_model(model, test_data)?;
        rows.push(metrics_row(
            model,
            step,
            Split::Test,
            test_loss,
            test_acc,
            cfg.metric_threshold,
        ));
    }
    Ok(rows)
}
