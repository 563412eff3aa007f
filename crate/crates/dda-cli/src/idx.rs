//! Bit-exact IDX (MNIST container) codec: big-endian headers, u8 payloads.
//!
//! Images file: u32 magic 0x00000803, u32 count, u32 rows, u32 cols, then
//! count×rows×cols bytes. Labels file: u32 magic 0x00000801, u32 count,
//! count bytes. Parse errors report the byte offset they tripped on.

use std::fs;
use std::path::Path;

use dda_core::dataset::{Dataset, DomainTag};
use dda_core::fourier::Plane;
use dda_core::image::ImageTensor;
use thiserror::Error;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error)]
pub enum IdxError {
    #[error("bad magic 0x{got:08x} at byte 0 (expected 0x{expected:08x})")]
    BadMagic { got: u32, expected: u32 },
    #[error("truncated payload: need {need} bytes, file ends at byte {len}")]
    Truncated { need: usize, len: usize },
    #[error("count mismatch: images file holds {images}, labels file holds {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("zero dimension in header at byte {offset}")]
    ZeroDim { offset: usize },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Dataset(#[from] dda_core::Error),
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32, IdxError> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(IdxError::Truncated {
            need: end,
            len: bytes.len(),
        });
    }
    Ok(u32::from_be_bytes([
        bytes[offset],
        bytes[offset + 1],
        bytes[offset + 2],
        bytes[offset + 3],
    ]))
}

/// Header of an images file, mostly for `idx-info`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdxHeader {
    pub magic: u32,
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
}

pub fn peek_header(bytes: &[u8]) -> Result<IdxHeader, IdxError> {
    let magic = read_u32(bytes, 0)?;
    match magic {
        IMAGES_MAGIC => Ok(IdxHeader {
            magic,
            count: read_u32(bytes, 4)? as usize,
            rows: read_u32(bytes, 8)? as usize,
            cols: read_u32(bytes, 12)? as usize,
        }),
        LABELS_MAGIC => Ok(IdxHeader {
            magic,
            count: read_u32(bytes, 4)? as usize,
            rows: 1,
            cols: 1,
        }),
        got => Err(IdxError::BadMagic {
            got,
            expected: IMAGES_MAGIC,
        }),
    }
}

/// Raw pixel grids of an images file.
pub fn parse_images(bytes: &[u8]) -> Result<(IdxHeader, Vec<Vec<u8>>), IdxError> {
    let magic = read_u32(bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(IdxError::BadMagic {
            got: magic,
            expected: IMAGES_MAGIC,
        });
    }
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    if count > 0 && (rows == 0 || cols == 0) {
        return Err(IdxError::ZeroDim { offset: 8 });
    }
    let need = 16 + count * rows * cols;
    if bytes.len() < need {
        return Err(IdxError::Truncated {
            need,
            len: bytes.len(),
        });
    }
    let per = rows * cols;
    let grids = (0..count)
        .map(|i| bytes[16 + i * per..16 + (i + 1) * per].to_vec())
        .collect();
    Ok((
        IdxHeader {
            magic,
            count,
            rows,
            cols,
        },
        grids,
    ))
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>, IdxError> {
    let magic = read_u32(bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(IdxError::BadMagic {
            got: magic,
            expected: LABELS_MAGIC,
        });
    }
    let count = read_u32(bytes, 4)? as usize;
    let need = 8 + count;
    if bytes.len() < need {
        return Err(IdxError::Truncated {
            need,
            len: bytes.len(),
        });
    }
    Ok(bytes[8..8 + count].to_vec())
}

/// Loads an images/labels pair into a single-channel dataset with pixels
/// mapped to [0, 1] by /255; the two counts are cross-checked.
pub fn load_idx(
    images_path: &Path,
    labels_path: &Path,
    domain: DomainTag,
    name: &str,
) -> Result<Dataset, IdxError> {
    let (header, grids) = parse_images(&fs::read(images_path)?)?;
    let labels = parse_labels(&fs::read(labels_path)?)?;
    if labels.len() != header.count {
        return Err(IdxError::CountMismatch {
            images: header.count,
            labels: labels.len(),
        });
    }
    let images = grids
        .into_iter()
        .map(|grid| {
            let values: Vec<f64> = grid.iter().map(|&b| b as f64 / 255.0).collect();
            Plane::new(header.rows, header.cols, values)
                .and_then(|p| ImageTensor::new(vec![p]))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset::new(images, labels, domain, name)?)
}

/// Writes a single-channel dataset as an IDX images/labels pair, quantizing
/// pixels with round(v·255).
pub fn write_idx(dataset: &Dataset, images_path: &Path, labels_path: &Path) -> Result<(), IdxError> {
    let (rows, cols, channels) = dataset.geometry()?;
    assert_eq!(channels, 1, "IDX export is defined for grayscale data");
    let mut img_bytes = Vec::with_capacity(16 + dataset.len() * rows * cols);
    img_bytes.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    img_bytes.extend_from_slice(&(dataset.len() as u32).to_be_bytes());
    img_bytes.extend_from_slice(&(rows as u32).to_be_bytes());
    img_bytes.extend_from_slice(&(cols as u32).to_be_bytes());
    for img in dataset.images() {
        for &v in img.plane(0).values() {
            img_bytes.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    fs::write(images_path, img_bytes)?;

    let mut label_bytes = Vec::with_capacity(8 + dataset.len());
    label_bytes.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    label_bytes.extend_from_slice(&(dataset.len() as u32).to_be_bytes());
    label_bytes.extend_from_slice(dataset.labels());
    fs::write(labels_path, label_bytes)?;
    Ok(())
}
