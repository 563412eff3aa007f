//! Directory-based datasets: 3-channel PNG images plus a UTF-8 manifest of
//! "relative/path.png<TAB>label" lines, in manifest order.

use std::fs;
use std::path::Path;

use dda_core::dataset::{Dataset, DomainTag};
use dda_core::image::ImageTensor;
use image::{ImageBuffer, Rgb};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DirError {
    #[error("manifest line {line}: expected \"path<TAB>label\", got {got:?}")]
    BadManifestLine { line: usize, got: String },
    #[error("manifest line {line}: label {label} out of range")]
    BadLabel { line: usize, label: String },
    #[error("{path}: {source}")]
    UnreadableImage {
        path: String,
        source: image::ImageError,
    },
    #[error("{path}: missing file")]
    Missing { path: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Core(#[from] dda_core::Error),
}

/// Reads the manifest and decodes every referenced image to [0, 1] reals.
pub fn load_image_dir(
    dir: &Path,
    manifest: &Path,
    domain: DomainTag,
    name: &str,
) -> Result<Dataset, DirError> {
    let text = fs::read_to_string(manifest)?;
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let (rel, label_str) = line.split_once('\t').ok_or(DirError::BadManifestLine {
            line: lineno + 1,
            got: line.to_string(),
        })?;
        let label: u8 = label_str.parse().map_err(|_| DirError::BadLabel {
            line: lineno + 1,
            label: label_str.to_string(),
        })?;
        let path = dir.join(rel);
        if !path.is_file() {
            return Err(DirError::Missing {
                path: path.display().to_string(),
            });
        }
        let decoded = image::open(&path)
            .map_err(|source| DirError::UnreadableImage {
                path: path.display().to_string(),
                source,
            })?
            .to_rgb8();
        let (w, h) = decoded.dimensions();
        let img = ImageTensor::from_fn(h as usize, w as usize, 3, |ch, r, c| {
            decoded.get_pixel(c as u32, r as u32).0[ch] as f64 / 255.0
        });
        images.push(img);
        labels.push(label);
    }
    Ok(Dataset::new(images, labels, domain, name)?)
}

/// Writes a 3-channel dataset as PNGs plus a manifest in dataset order.
pub fn write_image_dir(data: &Dataset, dir: &Path, manifest: &Path) -> Result<(), DirError> {
    fs::create_dir_all(dir)?;
    let mut lines = String::new();
    for i in 0..data.len() {
        let img = data.image(i);
        let (h, w, _) = img.geometry();
        let buf = ImageBuffer::from_fn(w as u32, h as u32, |c, r| {
            let px = |ch: usize| {
                (img.at(ch, r as usize, c as usize).clamp(0.0, 1.0) * 255.0).round() as u8
            };
            Rgb([px(0), px(1), px(2)])
        });
        let rel = format!("img_{i:05}.png");
        buf.save(dir.join(&rel)).map_err(|source| DirError::UnreadableImage {
            path: dir.join(&rel).display().to_string(),
            source,
        })?;
        lines.push_str(&format!("{rel}\t{}\n", data.label(i)));
    }
    fs::write(manifest, lines)?;
    Ok(())
}
