//! Big-endian IDX files as used by the handwritten-digit benchmarks:
//! unsigned-byte image tensors (`0x00000803`) and label vectors
//! (`0x00000801`).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

use super::{Dataset, Split, Targets};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// Row-major pixels, image after image.
    pub pixels: Vec<u8>,
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Idx {
            offset: offset as u64,
            message: format!("truncated header: file has {} bytes", bytes.len()),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let found = read_u32(bytes, 0)?;
    if found != expected {
        return Err(Error::Idx {
            offset: 0,
            message: format!("bad magic number: expected {expected:#010x}, found {found:#010x}"),
        });
    }
    Ok(())
}

fn payload(bytes: &[u8], offset: usize, len: usize) -> Result<&[u8]> {
    let end = offset + len;
    if bytes.len() < end {
        return Err(Error::Idx {
            offset: bytes.len() as u64,
            message: format!(
                "truncated data: expected {end} bytes, file has {}",
                bytes.len()
            ),
        });
    }
    if bytes.len() > end {
        return Err(Error::Idx {
            offset: end as u64,
            message: format!("{} trailing bytes", bytes.len() - end),
        });
    }
    Ok(&bytes[offset..end])
}

pub fn decode_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let pixels = payload(bytes, 16, count * rows * cols)?.to_vec();
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn decode_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    Ok(payload(bytes, 8, count)?.to_vec())
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [
        IMAGE_MAGIC,
        images.count as u32,
        images.rows as u32,
        images.cols as u32,
    ] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn read_idx_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    decode_idx_images(&read_file(path.as_ref())?)
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    decode_idx_labels(&read_file(path.as_ref())?)
}

pub fn write_idx_images(path: impl AsRef<Path>, images: &IdxImages) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_idx_images(images)).map_err(|e| Error::io(path, e))
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_idx_labels(labels)).map_err(|e| Error::io(path, e))
}

/// Loads an image/label pair, flattening images row-major and scaling pixels
/// to `[0, 1]`. The class count is one past the largest label.
pub fn load_idx_images(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<Dataset> {
    dataset_from_idx(
        &read_idx_images(images_path)?,
        &read_idx_labels(labels_path)?,
    )
}

/// In-memory counterpart of [`load_idx_images`].
pub fn dataset_from_idx(images: &IdxImages, labels: &[u8]) -> Result<Dataset> {
    if labels.len() != images.count {
        return Err(Error::Idx {
            offset: 4,
            message: format!(
                "label count {} does not match image count {}",
                labels.len(),
                images.count
            ),
        });
    }
    let features: Vec<f64> = images
        .pixels
        .iter()
        .map(|&b| f64::from(b) / 255.0)
        .collect();
    let features = DenseMatrix::new(images.count, images.rows * images.cols, features)?;
    let n_classes = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
    let targets = Targets::Classes(labels.iter().map(|&l| l as usize).collect());
    Dataset::new(features, targets, Some(n_classes), Split::Train)
}
