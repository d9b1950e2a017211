use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    /// Output layer whose logits feed a softmax inside the loss; identity on
    /// the forward pass.
    SoftmaxOutput,
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            "softmax" => Ok(Activation::SoftmaxOutput),
            other => Err(Error::InvalidConfig(format!(
                "unknown activation `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::SoftmaxOutput => "softmax",
        })
    }
}

/// Affine map `x·W + b` followed by an activation. `weights` is `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(weights: DenseMatrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weights.cols() {
            return Err(Error::LengthMismatch {
                expected: weights.cols(),
                found: bias.len(),
            });
        }
        Ok(Layer {
            weights,
            bias,
            activation,
        })
    }

    pub fn inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub layers: Vec<Layer>,
}

/// Gradients for one layer, shaped like the layer's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
}

impl Model {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig(
                "model needs at least one layer".into(),
            ));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::Dimension(format!(
                    "layer output {} does not feed next layer input {}",
                    pair[0].outputs(),
                    pair[1].inputs()
                )));
            }
        }
        Ok(Model { layers })
    }

    /// Dense network with ReLU hidden layers and Glorot-uniform weights.
    pub fn mlp(
        input: usize,
        hidden: &[usize],
        output: usize,
        output_activation: Activation,
        rng: &mut Rng,
    ) -> Model {
        let sizes: Vec<usize> = std::iter::once(input)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(output))
            .collect();
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, pair)| {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let data = (0..fan_in * fan_out)
                    .map(|_| limit * (2.0 * rng.uniform() - 1.0))
                    .collect();
                let activation = if i + 2 == sizes.len() {
                    output_activation
                } else {
                    Activation::Relu
                };
                Layer {
                    weights: DenseMatrix::new(fan_in, fan_out, data).expect("finite init"),
                    bias: vec![0.0; fan_out],
                    activation,
                }
            })
            .collect();
        Model { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    /// Every layer's activation, starting with the input itself; the last
    /// entry holds the logits.
    pub fn forward(&self, x: &DenseMatrix) -> Result<Vec<DenseMatrix>> {
        if x.cols() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input has {} columns, model expects {}",
                x.cols(),
                self.input_dim()
            )));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.clone());
        for layer in &self.layers {
            let mut z = activations.last().unwrap().matmul(&layer.weights)?;
            for i in 0..z.rows() {
                for (v, b) in z.row_mut(i).iter_mut().zip(&layer.bias) {
                    *v += b;
                    if layer.activation == Activation::Relu && *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            activations.push(z);
        }
        Ok(activations)
    }

    pub fn logits(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(self.forward(x)?.pop().unwrap())
    }

    /// Backpropagates `d_logits` (gradient of the batch loss w.r.t. the
    /// output) through the activations returned by [`Model::forward`].
    pub fn backward(
        &self,
        activations: &[DenseMatrix],
        d_logits: DenseMatrix,
    ) -> Result<Vec<LayerGrad>> {
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = d_logits;
        for (l, layer) in self.layers.iter().enumerate().rev() {
            if layer.activation == Activation::Relu {
                let out = &activations[l + 1];
                for (d, a) in delta.as_mut_slice().iter_mut().zip(out.as_slice()) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let weights = activations[l].t_matmul(&delta)?;
            let mut bias = vec![0.0; layer.outputs()];
            for i in 0..delta.rows() {
                for (b, d) in bias.iter_mut().zip(delta.row(i)) {
                    *b += d;
                }
            }
            if l > 0 {
                delta = delta.matmul_t(&layer.weights)?;
            }
            grads.push(LayerGrad { weights, bias });
        }
        grads.reverse();
        Ok(grads)
    }

    pub fn weight_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.as_slice().iter().copied())
    }

    pub fn weight_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.as_slice().len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.as_slice().iter().all(|v| v.is_finite())
                && l.bias.iter().all(|v| v.is_finite())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_layer_passes_input_through() {
        let w = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let model = Model::new(vec![
            Layer::new(w, vec![0.0, 0.0], Activation::Identity).unwrap()
        ])
        .unwrap();
        let x = DenseMatrix::from_rows(&[vec![3.0, -2.0], vec![0.5, 7.0]]).unwrap();
        assert_eq!(model.logits(&x).unwrap(), x);
    }

    #[test]
    fn affine_arithmetic() {
        let w = DenseMatrix::from_rows(&[vec![2.0]]).unwrap();
        let model =
            Model::new(vec![Layer::new(w, vec![1.0], Activation::Identity).unwrap()]).unwrap();
        let x = DenseMatrix::from_rows(&[vec![3.0]]).unwrap();
        assert_eq!(model.logits(&x).unwrap().as_slice(), &[7.0]);
    }

    #[test]
    fn relu_clamps_negatives() {
        let w = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let model = Model::new(vec![
            Layer::new(w, vec![0.0, 0.0], Activation::Relu).unwrap()
        ])
        .unwrap();
        let x = DenseMatrix::from_rows(&[vec![-1.0, 2.0]]).unwrap();
        assert_eq!(model.logits(&x).unwrap().as_slice(), &[0.0, 2.0]);
    }

    #[test]
    fn dimension_errors() {
        let model = Model::mlp(3, &[4], 2, Activation::SoftmaxOutput, &mut Rng::new(0));
        assert!(model.forward(&DenseMatrix::zeros(1, 2)).is_err());
        let a = Layer::new(DenseMatrix::zeros(3, 4), vec![0.0; 4], Activation::Relu).unwrap();
        let b = Layer::new(DenseMatrix::zeros(5, 2), vec![0.0; 2], Activation::Identity).unwrap();
        assert!(Model::new(vec![a, b]).is_err());
    }

    use crate::learn::loss::{loss_ce, loss_mse, loss_on_selection};
    use crate::numerics::{central_difference, max_relative_error};

    fn params(model: &Model) -> Vec<f64> {
        model
            .layers
            .iter()
            .flat_map(|l| l.weights.as_slice().iter().chain(&l.bias).copied())
            .collect()
    }

    fn with_params(model: &Model, flat: &[f64]) -> Model {
        let mut m = model.clone();
        let mut at = 0;
        for l in &mut m.layers {
            let nw = l.weights.as_slice().len();
            l.weights.as_mut_slice().copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
        m
    }

    type RowLoss<'a> = dyn Fn(&[f64], usize) -> (f64, Vec<f64>) + 'a;

    /// Batch-mean loss and its gradient w.r.t. the logits.
    fn batch_loss(logits: &DenseMatrix, loss: &RowLoss<'_>) -> (f64, DenseMatrix) {
        let b = logits.rows() as f64;
        let mut d = DenseMatrix::zeros(logits.rows(), logits.cols());
        let mut total = 0.0;
        for r in 0..logits.rows() {
            let (v, g) = loss(logits.row(r), r);
            total += v / b;
            d.row_mut(r)
                .iter_mut()
                .zip(&g)
                .for_each(|(d, g)| *d = g / b);
        }
        (total, d)
    }

    fn backprop_error(model: &Model, x: &DenseMatrix, loss: &RowLoss<'_>) -> f64 {
        let acts = model.forward(x).unwrap();
        let (_, d) = batch_loss(acts.last().unwrap(), loss);
        let analytic: Vec<f64> = model
            .backward(&acts, d)
            .unwrap()
            .iter()
            .flat_map(|g| {
                g.weights
                    .as_slice()
                    .iter()
                    .chain(&g.bias)
                    .copied()
                    .collect::<Vec<_>>()
            })
            .collect();
        let f = |flat: &[f64]| batch_loss(&with_params(model, flat).logits(x).unwrap(), loss).0;
        max_relative_error(&analytic, &central_difference(f, &params(model), 1e-6))
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let shapes: [(usize, &[usize], usize); 4] =
            [(3, &[], 4), (4, &[5], 3), (2, &[6, 4], 3), (5, &[3], 1)];
        let mut configs = 0;
        for seed in 0..6u64 {
            for &(input, hidden, output) in &shapes {
                let mut rng = Rng::new(seed);
                let act = if output == 1 {
                    Activation::Identity
                } else {
                    Activation::SoftmaxOutput
                };
                let mut model = Model::mlp(input, hidden, output, act, &mut rng);
                for l in &mut model.layers {
                    l.bias.iter_mut().for_each(|b| *b = 0.1 * rng.normal());
                }
                let x = DenseMatrix::new(4, input, (0..4 * input).map(|_| rng.normal()).collect())
                    .unwrap();
                let y: Vec<usize> = (0..4).map(|_| rng.below(output)).collect();
                let t: Vec<f64> = (0..4).map(|_| rng.normal()).collect();
                let err = if output == 1 {
                    backprop_error(&model, &x, &|out, r| loss_mse(out, &t[r..r + 1]).unwrap())
                } else if seed % 2 == 0 {
                    backprop_error(&model, &x, &|out, r| loss_ce(out, y[r]).unwrap())
                } else {
                    // frozen selection: the true class plus class 0
                    backprop_error(&model, &x, &|out, r| {
                        let mut sel = vec![0, y[r]];
                        sel.dedup();
                        loss_on_selection(out, &sel, y[r]).unwrap()
                    })
                };
                assert!(
                    err < 1e-5,
                    "seed {seed} shape {input}/{hidden:?}/{output}: {err}"
                );
                configs += 1;
            }
        }
        assert!(configs >= 20);
    }
}
