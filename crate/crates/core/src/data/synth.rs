use crate::error::{Error, Result};
use crate::numerics::{ceil_count, DenseMatrix, Rng};

use super::{Dataset, Split, Targets};

/// Shape of a synthetic sparse task.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub d: usize,
    /// Fraction of non-zero entries in the ground-truth weights or class means.
    pub true_density: f64,
    pub noise_std: f64,
    pub n_classes: usize,
    /// Magnitude of the non-zero class-mean entries.
    pub separation: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n: 5000,
            d: 500,
            true_density: 0.02,
            noise_std: 1.0,
            n_classes: 10,
            separation: 1.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidConfig("n and d must be positive".into()));
        }
        if !(self.true_density > 0.0 && self.true_density <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "true density must be in (0, 1], got {}",
                self.true_density
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::InvalidConfig("noise_std must be >= 0".into()));
        }
        Ok(())
    }
}

fn sparse_vector(d: usize, density: f64, rng: &mut Rng) -> Vec<f64> {
    let mut w = vec![0.0; d];
    for j in rng.choose_indices(d, ceil_count(density, d)) {
        w[j] = rng.normal();
    }
    w
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.normal()).collect();
    DenseMatrix::new(rows, cols, data).expect("finite normals")
}

/// Linear task `y = X·w* + noise` with a sparse `w*`.
#[derive(Debug, Clone)]
pub struct SparseRegression {
    pub true_weights: Vec<f64>,
    noise_std: f64,
}

impl SparseRegression {
    pub fn new(spec: &SynthSpec, rng: &mut Rng) -> Result<Self> {
        spec.validate()?;
        Ok(SparseRegression {
            true_weights: sparse_vector(spec.d, spec.true_density, rng),
            noise_std: spec.noise_std,
        })
    }

    pub fn sample(&self, n: usize, split: Split, rng: &mut Rng) -> Dataset {
        let d = self.true_weights.len();
        let x = gaussian_matrix(n, d, rng);
        let y = (0..n)
            .map(|i| {
                let clean: f64 = x
                    .row(i)
                    .iter()
                    .zip(&self.true_weights)
                    .map(|(a, b)| a * b)
                    .sum();
                clean + self.noise_std * rng.normal()
            })
            .collect();
        Dataset::new(x, Targets::Regression(y), None, split).expect("consistent shapes")
    }
}

pub fn gen_sparse_regression(spec: &SynthSpec, rng: &mut Rng) -> Result<(Dataset, Vec<f64>)> {
    let task = SparseRegression::new(spec, rng)?;
    let data = task.sample(spec.n, Split::Train, rng);
    Ok((data, task.true_weights))
}

/// Gaussian clusters around sparse class means.
#[derive(Debug, Clone)]
pub struct SparseClassification {
    pub means: Vec<Vec<f64>>,
    noise_std: f64,
}

impl SparseClassification {
    pub fn new(spec: &SynthSpec, rng: &mut Rng) -> Result<Self> {
        spec.validate()?;
        if spec.n_classes < 2 {
            return Err(Error::InvalidConfig("need at least two classes".into()));
        }
        let k = ceil_count(spec.true_density, spec.d);
        let means = (0..spec.n_classes)
            .map(|_| {
                let mut mean = vec![0.0; spec.d];
                for j in rng.choose_indices(spec.d, k) {
                    let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
                    mean[j] = sign * spec.separation;
                }
                mean
            })
            .collect();
        Ok(SparseClassification {
            means,
            noise_std: spec.noise_std,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.means.len()
    }

    /// `n` samples with labels balanced to within one per class.
    pub fn sample(&self, n: usize, split: Split, rng: &mut Rng) -> Dataset {
        let k = self.n_classes();
        let d = self.means[0].len();
        let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
        rng.shuffle(&mut labels);
        let mut data = Vec::with_capacity(n * d);
        for &c in &labels {
            data.extend(
                self.means[c]
                    .iter()
                    .map(|m| m + self.noise_std * rng.normal()),
            );
        }
        let x = DenseMatrix::new(n, d, data).expect("finite samples");
        Dataset::new(x, Targets::Classes(labels), Some(k), split).expect("consistent shapes")
    }
}

pub fn gen_sparse_classification(spec: &SynthSpec, rng: &mut Rng) -> Result<Dataset> {
    let task = SparseClassification::new(spec, rng)?;
    Ok(task.sample(spec.n, Split::Train, rng))
}
