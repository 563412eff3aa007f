//! DDAMODEL checkpoint: magic, version, architecture descriptor, then every
//! trainable tensor with a shape header and little-endian f64 payload.

use std::fs;
use std::path::Path;

use dda_core::classifier::{Arch, ClassifierKind, ModelParams};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"DDAMODEL";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("bad magic at byte 0 (not a DDAMODEL file)")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u32),
    #[error("unknown classifier kind {0}")]
    BadKind(u32),
    #[error("truncated checkpoint: need {need} bytes, file has {len}")]
    Truncated { need: usize, len: usize },
    #[error("tensor {index} mismatch: stored {stored}, architecture expects {expected}")]
    TensorMismatch {
        index: usize,
        stored: String,
        expected: String,
    },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Core(#[from] dda_core::Error),
}

fn kind_code(kind: ClassifierKind) -> u32 {
    match kind {
        ClassifierKind::Logistic => 0,
        ClassifierKind::TinyCnn => 1,
    }
}

fn kind_from(code: u32) -> Result<ClassifierKind, CheckpointError> {
    match code {
        0 => Ok(ClassifierKind::Logistic),
        1 => Ok(ClassifierKind::TinyCnn),
        other => Err(CheckpointError::BadKind(other)),
    }
}

pub fn encode(model: &ModelParams) -> Vec<u8> {
    let arch = model.arch();
    let specs = arch.tensor_specs();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&kind_code(arch.kind).to_le_bytes());
    for dim in [arch.height, arch.width, arch.channels, arch.classes] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    out.extend_from_slice(&(specs.len() as u32).to_le_bytes());
    for spec in &specs {
        out.extend_from_slice(&(spec.name.len() as u32).to_le_bytes());
        out.extend_from_slice(spec.name.as_bytes());
        out.extend_from_slice(&(spec.dims.len() as u32).to_le_bytes());
        for &d in &spec.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in &model.theta()[spec.offset..spec.offset + spec.len()] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos + n;
        if self.bytes.len() < end {
            return Err(CheckpointError::Truncated {
                need: end,
                len: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<ModelParams, CheckpointError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let kind = kind_from(r.u32()?)?;
    let height = r.u32()? as usize;
    let width = r.u32()? as usize;
    let channels = r.u32()? as usize;
    let classes = r.u32()? as usize;
    let arch = Arch::new(kind, height, width, channels, classes)?;
    let specs = arch.tensor_specs();
    let stored_count = r.u32()? as usize;
    if stored_count != specs.len() {
        return Err(CheckpointError::TensorMismatch {
            index: 0,
            stored: format!("{stored_count} tensors"),
            expected: format!("{} tensors", specs.len()),
        });
    }
    let mut theta = vec![0.0f64; arch.param_len()];
    for (index, spec) in specs.iter().enumerate() {
        let name_len = r.u32()? as usize;
        let name = String::from_utf8_lossy(r.take(name_len)?).into_owned();
        let ndim = r.u32()? as usize;
        let mut dims = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            dims.push(r.u32()? as usize);
        }
        if name != spec.name || dims != spec.dims {
            return Err(CheckpointError::TensorMismatch {
                index,
                stored: format!("{name} {dims:?}"),
                expected: format!("{} {:?}", spec.name, spec.dims),
            });
        }
        let raw = r.take(spec.len() * 8)?;
        for (slot, chunk) in theta[spec.offset..spec.offset + spec.len()]
            .iter_mut()
            .zip(raw.chunks_exact(8))
        {
            *slot = f64::from_le_bytes(chunk.try_into().unwrap());
        }
    }
    Ok(ModelParams::from_theta(arch, theta)?)
}

pub fn write(model: &ModelParams, path: &Path) -> Result<(), CheckpointError> {
    fs::write(path, encode(model))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<ModelParams, CheckpointError> {
    decode(&fs::read(path)?)
}
