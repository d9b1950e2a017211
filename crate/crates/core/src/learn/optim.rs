use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    /// Adam with the usual decay rates 0.9 / 0.999 and epsilon 1e-8.
    AdaptiveMoment,
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::AdaptiveMoment),
            other => Err(Error::InvalidConfig(format!("unknown optimizer `{other}`"))),
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::AdaptiveMoment => "adam",
        })
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// Per-tensor optimizer state. Tensors are addressed by slot index and must
/// be presented in the same order every step.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    learning_rate: f64,
    step: i32,
    moments: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        Optimizer {
            kind,
            learning_rate,
            step: 0,
            moments: Vec::new(),
        }
    }

    pub fn steps_taken(&self) -> i32 {
        self.step
    }

    /// Starts a new step; call once before the per-tensor [`Optimizer::update`]s.
    pub fn begin_step(&mut self) {
        self.step += 1;
    }

    pub fn update(&mut self, slot: usize, params: &mut [f64], grads: &[f64]) {
        debug_assert_eq!(params.len(), grads.len());
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    let delta = lr * g;
                    if delta != 0.0 {
                        *p -= delta;
                    }
                }
            }
            OptimizerKind::AdaptiveMoment => {
                if self.moments.len() <= slot {
                    self.moments.resize_with(slot + 1, Default::default);
                }
                let (m, v) = &mut self.moments[slot];
                if m.len() != params.len() {
                    *m = vec![0.0; params.len()];
                    *v = vec![0.0; params.len()];
                }
                let c1 = 1.0 - BETA1.powi(self.step);
                let c2 = 1.0 - BETA2.powi(self.step);
                for i in 0..params.len() {
                    let g = grads[i];
                    m[i] = BETA1 * m[i] + (1.0 - BETA1) * g;
                    v[i] = BETA2 * v[i] + (1.0 - BETA2) * g * g;
                    let delta = lr * (m[i] / c1) / ((v[i] / c2).sqrt() + EPSILON);
                    // Skipping zero updates keeps -0.0 and friends untouched.
                    if delta != 0.0 {
                        params[i] -= delta;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_learning_rate_is_bit_exact() {
        for kind in [OptimizerKind::Sgd, OptimizerKind::AdaptiveMoment] {
            let original = vec![0.1, -0.0, 3.5e-300, -7.25];
            let mut params = original.clone();
            let mut opt = Optimizer::new(kind, 0.0);
            for _ in 0..5 {
                opt.begin_step();
                opt.update(0, &mut params, &[1.0, -2.0, 0.5, 1e10]);
            }
            assert_eq!(
                params.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                original.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn sgd_step() {
        let mut p = vec![1.0, 2.0];
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.5);
        opt.begin_step();
        opt.update(0, &mut p, &[2.0, -4.0]);
        assert_eq!(p, vec![0.0, 4.0]);
    }

    #[test]
    fn first_adam_step_moves_by_learning_rate() {
        // Bias correction makes the first step lr·sign(g) up to epsilon.
        let mut p = vec![0.0, 0.0];
        let mut opt = Optimizer::new(OptimizerKind::AdaptiveMoment, 0.001);
        opt.begin_step();
        opt.update(0, &mut p, &[3.0, -0.2]);
        assert!((p[0] + 0.001).abs() < 1e-10);
        assert!((p[1] - 0.001).abs() < 1e-10);
    }

    #[test]
    fn adam_minimizes_quadratic() {
        let mut p = vec![5.0, -3.0];
        let mut opt = Optimizer::new(OptimizerKind::AdaptiveMoment, 0.05);
        for _ in 0..2000 {
            let g: Vec<f64> = p.iter().map(|x| 2.0 * x).collect();
            opt.begin_step();
            opt.update(0, &mut p, &g);
        }
        assert!(p.iter().all(|x| x.abs() < 1e-3), "{p:?}");
    }
}
