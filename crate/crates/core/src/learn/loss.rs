//! Data losses. Each returns the value and its gradient with respect to the
//! model output.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{log_sum_exp, Rng};
use crate::sampler::{draw_masks, SamplerConfig, SamplerState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Mse,
    CrossEntropy,
    ProjectedCe,
}

impl LossKind {
    pub fn is_classification(self) -> bool {
        !matches!(self, LossKind::Mse)
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mse" => Ok(LossKind::Mse),
            "ce" => Ok(LossKind::CrossEntropy),
            "projected-ce" => Ok(LossKind::ProjectedCe),
            other => Err(Error::InvalidConfig(format!("unknown loss `{other}`"))),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Mse => "mse",
            LossKind::CrossEntropy => "ce",
            LossKind::ProjectedCe => "projected-ce",
        })
    }
}

/// Mean squared error `Σ(y - ŷ)²/n` and its gradient `2(ŷ - y)/n`.
pub fn loss_mse(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() {
        return Err(Error::LengthMismatch {
            expected: target.len(),
            found: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyVector);
    }
    let n = pred.len() as f64;
    let value = pred
        .iter()
        .zip(target)
        .map(|(p, y)| (y - p) * (y - p))
        .sum::<f64>()
        / n;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(p, y)| 2.0 * (p - y) / n)
        .collect();
    Ok((value, grad))
}

/// Cross entropy restricted to `selection` (which must contain
/// `true_class`): softmax renormalized over the selected logits. Gradient is
/// zero off the selection.
pub fn loss_on_selection(
    logits: &[f64],
    selection: &[usize],
    true_class: usize,
) -> Result<(f64, Vec<f64>)> {
    if true_class >= logits.len() {
        return Err(Error::ClassOutOfRange {
            class: true_class,
            classes: logits.len(),
        });
    }
    if !selection.contains(&true_class) {
        return Err(Error::InvalidConfig(
            "selection must contain the true class".into(),
        ));
    }
    let lse = log_sum_exp(logits, selection);
    let value = lse - logits[true_class];
    let mut grad = vec![0.0; logits.len()];
    for &i in selection {
        grad[i] = (logits[i] - lse).exp();
    }
    grad[true_class] -= 1.0;
    Ok((value, grad))
}

/// `-log softmax(logits)[true_class]`, gradient `softmax - onehot`.
pub fn loss_ce(logits: &[f64], true_class: usize) -> Result<(f64, Vec<f64>)> {
    let all: Vec<usize> = (0..logits.len()).collect();
    loss_on_selection(logits, &all, true_class)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedLoss {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Ascending class indices the loss was computed over.
    pub selection: Vec<usize>,
    /// Distribution to commit to the loss sampler's state (if any).
    pub distribution: Option<Vec<f64>>,
}

/// Cross entropy over the classes picked by the sampler from the logits
/// (union of its masks), always including the true class.
pub fn loss_projected_ce(
    logits: &[f64],
    true_class: usize,
    cfg: &SamplerConfig,
    state: Option<&SamplerState>,
    rng: &mut Rng,
) -> Result<ProjectedLoss> {
    if true_class >= logits.len() {
        return Err(Error::ClassOutOfRange {
            class: true_class,
            classes: logits.len(),
        });
    }
    let draw = draw_masks(logits, cfg, state, rng)?;
    let mut selected = vec![false; logits.len()];
    selected[true_class] = true;
    for mask in &draw.masks {
        for &j in mask.selected() {
            selected[j] = true;
        }
    }
    let selection: Vec<usize> = (0..logits.len()).filter(|&j| selected[j]).collect();
    let (value, gradient) = loss_on_selection(logits, &selection, true_class)?;
    Ok(ProjectedLoss {
        value,
        gradient,
        selection,
        distribution: draw.distribution,
    })
}
