//! DDASTATS cache: a flat little-endian binary record of one domain's
//! statistics.
//!
//! Layout: magic "DDASTATS", version u32, height/width/channels u32,
//! seed i64, sample_count u64, mean_pixel (channels × f64), mean_autocorr
//! planes (channels × H·W × f64, row-major).

use std::fs;
use std::path::Path;

use dda_core::dataset::DomainTag;
use dda_core::fourier::Plane;
use dda_core::image::ImageTensor;
use dda_core::transform::DomainStats;
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"DDASTATS";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("bad magic at byte 0 (not a DDASTATS file)")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u32),
    #[error("truncated cache: need {need} bytes, file has {len}")]
    Truncated { need: usize, len: usize },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Core(#[from] dda_core::Error),
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CacheError> {
        let end = self.pos + n;
        if self.bytes.len() < end {
            return Err(CacheError::Truncated {
                need: end,
                len: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn i64(&mut self) -> Result<i64, CacheError> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, CacheError> {
        let raw = self.take(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn encode(stats: &DomainStats) -> Vec<u8> {
    let (h, w, c) = stats.geometry();
    let mut out = Vec::with_capacity(8 + 4 * 4 + 16 + c * 8 + c * h * w * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(c as u32).to_le_bytes());
    out.extend_from_slice(&(stats.seed() as i64).to_le_bytes());
    out.extend_from_slice(&(stats.sample_count() as u64).to_le_bytes());
    for &px in stats.mean_pixel() {
        out.extend_from_slice(&px.to_le_bytes());
    }
    for plane in stats.mean_autocorr().planes() {
        for &v in plane.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// The domain tag is not part of the record; the caller knows which side the
/// file belongs to and supplies it.
pub fn decode(bytes: &[u8], domain: DomainTag) -> Result<DomainStats, CacheError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(CacheError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CacheError::BadVersion(version));
    }
    let h = r.u32()? as usize;
    let w = r.u32()? as usize;
    let c = r.u32()? as usize;
    let seed = r.i64()? as u64;
    let sample_count = r.u64()? as usize;
    let mean_pixel = r.f64s(c)?;
    let mut planes = Vec::with_capacity(c);
    for _ in 0..c {
        planes.push(Plane::new(h, w, r.f64s(h * w)?)?);
    }
    Ok(DomainStats::from_parts(
        ImageTensor::new(planes)?,
        mean_pixel,
        sample_count,
        seed,
        domain,
    )?)
}

pub fn write(stats: &DomainStats, path: &Path) -> Result<(), CacheError> {
    fs::write(path, encode(stats))?;
    Ok(())
}

pub fn read(path: &Path, domain: DomainTag) -> Result<DomainStats, CacheError> {
    decode(&fs::read(path)?, domain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dda_core::dataset::Dataset;

    fn sample_stats() -> DomainStats {
        let images: Vec<ImageTensor> = (0..4)
            .map(|i| {
                ImageTensor::from_fn(4, 4, 3, |ch, r, c| {
                    ((i + ch) as f64 * 0.21 + (r * 4 + c) as f64 * 0.03).sin()
                })
            })
            .collect();
        let data = Dataset::new(images, vec![0; 4], DomainTag::Target, "s").unwrap();
        DomainStats::compute(&data, 99).unwrap()
    }

    #[test]
    fn roundtrip_is_bitwise() {
        let stats = sample_stats();
        let bytes = encode(&stats);
        let back = decode(&bytes, DomainTag::Target).unwrap();
        assert_eq!(back.mean_autocorr(), stats.mean_autocorr());
        assert_eq!(back.mean_pixel(), stats.mean_pixel());
        assert_eq!(back.sample_count(), stats.sample_count());
        assert_eq!(back.seed(), stats.seed());
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn rejects_foreign_bytes() {
        assert!(matches!(
            decode(b"NOTSTATS", DomainTag::Source),
            Err(CacheError::BadMagic)
        ));
        let mut bytes = encode(&sample_stats());
        bytes.truncate(bytes.len() - 1);
        assert!(matches!(
            decode(&bytes, DomainTag::Source),
            Err(CacheError::Truncated { .. })
        ));
    }
}
