//! `ImageTensor`: the H×W×C sample carrier used across the whole pipeline.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fourier::Plane;

/// A real-valued image as a list of equally sized channel planes.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    planes: Vec<Plane>,
}

impl ImageTensor {
    pub fn new(planes: Vec<Plane>) -> Result<Self> {
        if planes.is_empty() {
            return Err(Error::InvalidConfig {
                what: "image needs at least one channel",
            });
        }
        let shape = (planes[0].height(), planes[0].width());
        for p in &planes[1..] {
            if (p.height(), p.width()) != shape {
                return Err(Error::ShapeMismatch {
                    left: shape,
                    right: (p.height(), p.width()),
                });
            }
        }
        Ok(ImageTensor { planes })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let planes = (0..channels)
            .map(|ch| Plane::from_fn(height, width, |r, c| f(ch, r, c)))
            .collect();
        ImageTensor { planes }
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        ImageTensor {
            planes: (0..channels).map(|_| Plane::zeros(height, width)).collect(),
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.planes[0].height()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    /// (height, width, channels)
    pub fn geometry(&self) -> (usize, usize, usize) {
        (self.height(), self.width(), self.channels())
    }

    #[inline]
    pub fn plane(&self, channel: usize) -> &Plane {
        &self.planes[channel]
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<Plane> {
        self.planes
    }

    #[inline]
    pub fn at(&self, channel: usize, row: usize, col: usize) -> f64 {
        self.planes[channel].at(row, col)
    }

    /// Applies a fallible per-channel map, preserving channel order.
    pub fn try_map_planes(&self, mut f: impl FnMut(&Plane) -> Result<Plane>) -> Result<Self> {
        self.try_map_planes_indexed(|_, p| f(p))
    }

    /// As [`Self::try_map_planes`], passing the channel index along.
    pub fn try_map_planes_indexed(
        &self,
        mut f: impl FnMut(usize, &Plane) -> Result<Plane>,
    ) -> Result<Self> {
        let mut planes = Vec::with_capacity(self.planes.len());
        for (ch, p) in self.planes.iter().enumerate() {
            planes.push(f(ch, p)?);
        }
        ImageTensor::new(planes)
    }

    /// Global minimum and maximum over all channels jointly.
    pub fn min_max(&self) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for p in &self.planes {
            for &v in p.values() {
                min = min.min(v);
                max = max.max(v);
            }
        }
        (min, max)
    }

    /// Channel-major row-major flattening, the layout PCA and the classifier
    /// agree on.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.height() * self.width() * self.channels());
        for p in &self.planes {
            out.extend_from_slice(p.values());
        }
        out
    }

    pub fn same_geometry(&self, other: &ImageTensor) -> bool {
        self.geometry() == other.geometry()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_mismatched_planes() {
        let p1 = Plane::zeros(2, 3);
        let p2 = Plane::zeros(3, 2);
        assert!(matches!(
            ImageTensor::new(vec![p1, p2]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn flatten_is_channel_major() {
        let img = ImageTensor::from_fn(2, 2, 2, |ch, r, c| (ch * 100 + r * 10 + c) as f64);
        assert_eq!(
            img.flatten(),
            vec![0.0, 1.0, 10.0, 11.0, 100.0, 101.0, 110.0, 111.0]
        );
    }

    #[test]
    fn min_max_spans_channels() {
        let img = ImageTensor::from_fn(1, 2, 3, |ch, _, c| ch as f64 - c as f64);
        assert_eq!(img.min_max(), (-1.0, 2.0));
    }
}
