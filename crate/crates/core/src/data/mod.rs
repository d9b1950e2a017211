//! Datasets: synthetic sparse tasks and IDX image files.

mod idx;
mod synth;

use std::fmt;
use std::io::Write;

pub use idx::{
    dataset_from_idx, decode_idx_images, decode_idx_labels, encode_idx_images, encode_idx_labels,
    load_idx_images, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels,
    IdxImages, IMAGE_MAGIC, LABEL_MAGIC,
};
pub use synth::{
    gen_sparse_classification, gen_sparse_regression, SparseClassification, SparseRegression,
    SynthSpec,
};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Regression(Vec<f64>),
    Classes(Vec<usize>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Regression(v) => v.len(),
            Targets::Classes(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, indices: &[usize]) -> Targets {
        match self {
            Targets::Regression(v) => Targets::Regression(indices.iter().map(|&i| v[i]).collect()),
            Targets::Classes(v) => Targets::Classes(indices.iter().map(|&i| v[i]).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DenseMatrix,
    pub targets: Targets,
    pub n_classes: Option<usize>,
    pub split: Split,
}

impl Dataset {
    pub fn new(
        features: DenseMatrix,
        targets: Targets,
        n_classes: Option<usize>,
        split: Split,
    ) -> Result<Self> {
        if targets.len() != features.rows() {
            return Err(Error::LengthMismatch {
                expected: features.rows(),
                found: targets.len(),
            });
        }
        if let Targets::Classes(labels) = &targets {
            let classes = n_classes
                .ok_or_else(|| Error::InvalidConfig("class targets need a class count".into()))?;
            if let Some(&class) = labels.iter().find(|&&c| c >= classes) {
                return Err(Error::ClassOutOfRange { class, classes });
            }
        }
        Ok(Dataset {
            features,
            targets,
            n_classes,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            targets: self.targets.select(indices),
            n_classes: self.n_classes,
            split: self.split,
        }
    }

    /// CSV with a header row: feature columns `x0..x{d-1}` then `target`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.dim())
            .map(|j| format!("x{j}"))
            .chain(std::iter::once("target".to_string()))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.len() {
            let mut fields: Vec<String> =
                self.features.row(i).iter().map(|v| v.to_string()).collect();
            fields.push(match &self.targets {
                Targets::Regression(y) => y[i].to_string(),
                Targets::Classes(y) => y[i].to_string(),
            });
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_export_has_header_and_rows() {
        let features = DenseMatrix::from_rows(&[vec![0.5, 1.0], vec![2.0, -1.0]]).unwrap();
        let ds = Dataset::new(
            features,
            Targets::Classes(vec![1, 0]),
            Some(2),
            Split::Train,
        )
        .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x0,x1,target\n0.5,1,1\n2,-1,0\n"
        );
    }

    #[test]
    fn labels_checked_against_class_count() {
        let features = DenseMatrix::zeros(2, 1);
        let r = Dataset::new(features, Targets::Classes(vec![0, 3]), Some(3), Split::Test);
        assert!(matches!(
            r,
            Err(Error::ClassOutOfRange {
                class: 3,
                classes: 3
            })
        ));
    }
}
