//! The reciprocal DDA transforms.
//!
//! Each domain contributes two cached statistics: the per-channel mean
//! auto-correlation of its images and the mean of one randomly drawn pixel
//! per image. The training-side transform scales a source image by pixel
//! values drawn from a donor source image and convolves with the *target*
//! mean auto-correlation; the inference-side transform scales by the input
//! domain's mean pixel and convolves with the *other* domain's mean
//! auto-correlation. Both sides re-normalize into [−1, 1].
//!
//! All ingredients are zero-phase (the auto-correlation spectrum is |F|²,
//! the drawn pixels are placed at the image center), so the transforms
//! rescale spectral magnitudes without moving features spatially. With the
//! centered placement the cross-correlation collapses to a plain per-channel
//! scaling and is computed as such; the literal sparse-kernel path is kept
//! behind `center_kernels = false` so the shift theorem can be checked
//! against it.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, DomainTag};
use crate::error::{Error, Result};
use crate::fourier::{FftPlan, Plane, Spectrum};
use crate::image::ImageTensor;
use crate::rng::{stream, stream_rng};

/// Knobs of the transform pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformConfig {
    /// How many pixels each donor draw takes (they accumulate into one kernel).
    pub pixels_per_draw: usize,
    /// Re-normalize transform outputs into [−1, 1].
    pub renormalize: bool,
    /// Place drawn values at the image center (pure zero-phase scaling).
    pub center_kernels: bool,
    /// Base seed for dataset-level statistics draws.
    pub seed: u64,
}

impl TransformConfig {
    pub fn new(pixels_per_draw: usize, renormalize: bool, center_kernels: bool, seed: u64) -> Result<Self> {
        if pixels_per_draw == 0 {
            return Err(Error::InvalidConfig {
                what: "pixels_per_draw must be at least 1",
            });
        }
        Ok(TransformConfig {
            pixels_per_draw,
            renormalize,
            center_kernels,
            seed,
        })
    }
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            pixels_per_draw: 1,
            renormalize: true,
            center_kernels: true,
            seed: 0,
        }
    }
}

/// Cached per-domain ingredients of the transforms.
#[derive(Debug, Clone)]
pub struct DomainStats {
    mean_autocorr: ImageTensor,
    mean_pixel: Vec<f64>,
    sample_count: usize,
    seed: u64,
    domain: DomainTag,
}

impl DomainStats {
    /// Reduces a whole dataset once: per-channel mean auto-correlation and
    /// mean drawn pixel. Expects the prepared ([−1, 1]) representation.
    pub fn compute(data: &Dataset, seed: u64) -> Result<Self> {
        let mean_autocorr = mean_autocorrelation(data)?;
        let mean_pixel = mean_random_pixel(data, seed)?;
        DomainStats::from_parts(mean_autocorr, mean_pixel, data.len(), seed, data.domain())
    }

    /// Assembles stats from raw parts (cache loading, tests), enforcing the
    /// zero-phase invariant of the kernel.
    pub fn from_parts(
        mean_autocorr: ImageTensor,
        mean_pixel: Vec<f64>,
        sample_count: usize,
        seed: u64,
        domain: DomainTag,
    ) -> Result<Self> {
        if mean_pixel.len() != mean_autocorr.channels() {
            return Err(Error::ChannelMismatch {
                left: mean_autocorr.channels(),
                right: mean_pixel.len(),
            });
        }
        if sample_count == 0 {
            return Err(Error::EmptyDataset);
        }
        let plan = FftPlan::new(mean_autocorr.height(), mean_autocorr.width());
        for plane in mean_autocorr.planes() {
            let spectrum = plan.fft2(plane)?;
            check_zero_phase(&spectrum)?;
        }
        Ok(DomainStats {
            mean_autocorr,
            mean_pixel,
            sample_count,
            seed,
            domain,
        })
    }

    pub fn mean_autocorr(&self) -> &ImageTensor {
        &self.mean_autocorr
    }

    pub fn mean_pixel(&self) -> &[f64] {
        &self.mean_pixel
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn geometry(&self) -> (usize, usize, usize) {
        self.mean_autocorr.geometry()
    }
}

fn check_zero_phase(spectrum: &Spectrum) -> Result<()> {
    let peak = spectrum.peak_magnitude();
    let tol = 1e-9 * (peak + 1.0);
    let mut max_im = 0.0f64;
    let mut min_re = f64::INFINITY;
    for bin in spectrum.bins() {
        max_im = max_im.max(bin.im.abs());
        min_re = min_re.min(bin.re);
    }
    if max_im > tol || min_re < -tol {
        return Err(Error::NotZeroPhase { max_im, min_re });
    }
    Ok(())
}

/// Per channel, (1/N)·Σ autocorrelate(image); zero lag at (0, 0).
pub fn mean_autocorrelation(data: &Dataset) -> Result<ImageTensor> {
    let (height, width, channels) = data.geometry()?;
    let plan = FftPlan::new(height, width);
    let inv_n = 1.0 / data.len() as f64;
    let mut sums: Vec<Vec<f64>> = (0..channels)
        .map(|_| alloc::vec![0.0; height * width])
        .collect();
    for img in data.images() {
        for (ch, sum) in sums.iter_mut().enumerate() {
            let ac = plan.cross_correlate(img.plane(ch), img.plane(ch))?;
            for (acc, v) in sum.iter_mut().zip(ac.values()) {
                *acc += v;
            }
        }
    }
    let planes = sums
        .into_iter()
        .map(|sum| Plane::new(height, width, sum.into_iter().map(|v| v * inv_n).collect()))
        .collect::<Result<Vec<_>>>()?;
    ImageTensor::new(planes)
}

/// For each channel, the mean over images of one uniformly drawn pixel value
/// per image. Image `i` draws from the stream `(seed, MEAN_PIXEL, i)`: first
/// a linear index in `0..H·W`, read in every channel.
pub fn mean_random_pixel(data: &Dataset, seed: u64) -> Result<Vec<f64>> {
    let (height, width, channels) = data.geometry()?;
    let mut acc = alloc::vec![0.0f64; channels];
    for (i, img) in data.images().iter().enumerate() {
        let mut rng = stream_rng(seed, &[stream::MEAN_PIXEL, i as u64]);
        let idx = rng.gen_range(0..height * width);
        let (r, c) = (idx / width, idx % width);
        for (ch, a) in acc.iter_mut().enumerate() {
            *a += img.at(ch, r, c);
        }
    }
    let inv_n = 1.0 / data.len() as f64;
    Ok(acc.into_iter().map(|a| a * inv_n).collect())
}

/// The positions and per-channel values of one donor draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelDraw {
    /// (row, col) per drawn pixel.
    pub positions: Vec<(usize, usize)>,
    /// values[draw][channel]
    pub values: Vec<Vec<f64>>,
}

impl PixelDraw {
    /// Sum of drawn values per channel — the scaling factor the centered
    /// kernel reduces to.
    pub fn channel_sums(&self, channels: usize) -> Vec<f64> {
        let mut sums = alloc::vec![0.0f64; channels];
        for vals in &self.values {
            for (s, v) in sums.iter_mut().zip(vals) {
                *s += v;
            }
        }
        sums
    }
}

/// Draws `count` pixels from the donor via the stream seeded by `seed`
/// directly: each draw takes one linear index in `0..H·W` (uniform, with
/// replacement); the position is shared across channels.
pub fn draw_pixels(donor: &ImageTensor, seed: u64, count: usize) -> PixelDraw {
    let mut rng = stream_rng(seed, &[]);
    draw_pixels_with(donor, &mut rng, count)
}

pub fn draw_pixels_with(donor: &ImageTensor, rng: &mut ChaCha8Rng, count: usize) -> PixelDraw {
    let (height, width, channels) = donor.geometry();
    let mut positions = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let idx = rng.gen_range(0..height * width);
        let (r, c) = (idx / width, idx % width);
        positions.push((r, c));
        values.push((0..channels).map(|ch| donor.at(ch, r, c)).collect());
    }
    PixelDraw { positions, values }
}

/// Cross-correlates `x` with the sparse kernel of drawn donor pixels.
///
/// Centered kernels make the correlation a pure zero-phase scaling (the
/// centering of the kernel and the re-centering of the lag map cancel), so
/// that path multiplies by the summed drawn values directly. Off-center
/// kernels keep the values at their drawn positions and go through the FFT.
pub fn correlate_with_random_pixel(
    x: &ImageTensor,
    donor: &ImageTensor,
    seed: u64,
    cfg: &TransformConfig,
) -> Result<ImageTensor> {
    if !x.same_geometry(donor) {
        return Err(Error::GeometryMismatch {
            expected: x.geometry(),
            got: donor.geometry(),
        });
    }
    let draw = draw_pixels(donor, seed, cfg.pixels_per_draw);
    correlate_with_draw(x, &draw, cfg)
}

pub fn correlate_with_draw(
    x: &ImageTensor,
    draw: &PixelDraw,
    cfg: &TransformConfig,
) -> Result<ImageTensor> {
    let (height, width, channels) = x.geometry();
    if cfg.center_kernels {
        let sums = draw.channel_sums(channels);
        let planes = x
            .planes()
            .iter()
            .zip(&sums)
            .map(|(p, &s)| p.scaled(s))
            .collect();
        return ImageTensor::new(planes);
    }
    let plan = FftPlan::new(height, width);
    x.try_map_planes_indexed(|ch, p| {
        let mut kernel = alloc::vec![0.0f64; height * width];
        for (pos, vals) in draw.positions.iter().zip(&draw.values) {
            kernel[pos.0 * width + pos.1] += vals[ch];
        }
        plan.cross_correlate(p, &Plane::new(height, width, kernel)?)
    })
}

/// Planned transform against one fixed set of other-domain statistics; the
/// kernel spectra are FFT'd once and reused for every image.
pub struct TransformEngine {
    kernel_spectra: Vec<Spectrum>,
    plan: FftPlan,
    geometry: (usize, usize, usize),
    cfg: TransformConfig,
    stats_domain: DomainTag,
}

impl TransformEngine {
    pub fn new(stats: &DomainStats, cfg: TransformConfig) -> Result<Self> {
        let geometry = stats.geometry();
        let plan = FftPlan::new(geometry.0, geometry.1);
        let kernel_spectra = stats
            .mean_autocorr()
            .planes()
            .iter()
            .map(|p| plan.fft2(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(TransformEngine {
            kernel_spectra,
            plan,
            geometry,
            cfg,
            stats_domain: stats.domain(),
        })
    }

    /// Domain the wired statistics were computed from.
    pub fn stats_domain(&self) -> DomainTag {
        self.stats_domain
    }

    pub fn config(&self) -> &TransformConfig {
        &self.cfg
    }

    fn check_geometry(&self, x: &ImageTensor) -> Result<()> {
        if x.geometry() != self.geometry {
            return Err(Error::GeometryMismatch {
                expected: self.geometry,
                got: x.geometry(),
            });
        }
        Ok(())
    }

    /// Training-side transform: scale by donor pixel draws seeded by `seed`,
    /// convolve with the cached mean auto-correlation, optionally renormalize.
    pub fn source(&self, x: &ImageTensor, donor: &ImageTensor, seed: u64) -> Result<ImageTensor> {
        self.check_geometry(x)?;
        self.check_geometry(donor)?;
        let draw = draw_pixels(donor, seed, self.cfg.pixels_per_draw);
        let scaled = correlate_with_draw(x, &draw, &self.cfg)?;
        let convolved = self.convolve_with_kernel(&scaled)?;
        self.finish(convolved)
    }

    /// Inference-side transform: scale by the input domain's mean pixel
    /// (a centered scalar kernel), convolve with the cached mean
    /// auto-correlation of the other domain, optionally renormalize.
    pub fn inference(&self, x: &ImageTensor, own_mean_pixel: &[f64]) -> Result<ImageTensor> {
        self.check_geometry(x)?;
        if own_mean_pixel.len() != self.geometry.2 {
            return Err(Error::ChannelMismatch {
                left: self.geometry.2,
                right: own_mean_pixel.len(),
            });
        }
        let planes = x
            .planes()
            .iter()
            .zip(own_mean_pixel)
            .map(|(p, &s)| p.scaled(s))
            .collect();
        let scaled = ImageTensor::new(planes)?;
        let convolved = self.convolve_with_kernel(&scaled)?;
        self.finish(convolved)
    }

    fn convolve_with_kernel(&self, x: &ImageTensor) -> Result<ImageTensor> {
        x.try_map_planes_indexed(|ch, p| {
            let fx = self.plan.fft2(p)?;
            let bins: Vec<_> = fx
                .bins()
                .iter()
                .zip(self.kernel_spectra[ch].bins())
                .map(|(a, b)| a * b)
                .collect();
            self.plan
                .ifft2(&Spectrum::new(self.geometry.0, self.geometry.1, bins)?)
        })
    }

    fn finish(&self, x: ImageTensor) -> Result<ImageTensor> {
        if self.cfg.renormalize {
            renormalize(&x)
        } else {
            Ok(x)
        }
    }
}

/// Eq. 2 as a one-shot call; hot loops should hold a [`TransformEngine`].
pub fn transform_source(
    x: &ImageTensor,
    donor: &ImageTensor,
    target_stats: &DomainStats,
    seed: u64,
    cfg: &TransformConfig,
) -> Result<ImageTensor> {
    TransformEngine::new(target_stats, cfg.clone())?.source(x, donor, seed)
}

/// Eq. 3 as a one-shot call: the input domain's mean pixel against the other
/// domain's statistics.
pub fn transform_target(
    x: &ImageTensor,
    own_mean_pixel: &[f64],
    other_stats: &DomainStats,
    cfg: &TransformConfig,
) -> Result<ImageTensor> {
    TransformEngine::new(other_stats, cfg.clone())?.inference(x, own_mean_pixel)
}

/// Maps into [−1, 1] with the min/max taken over all channels jointly:
/// `y = 2·(x − min)/(max − min) − 1`. Both endpoints are attained exactly.
/// Constant images are rejected as degenerate rather than epsilon-patched.
pub fn renormalize(x: &ImageTensor) -> Result<ImageTensor> {
    let (min, max) = x.min_max();
    if !(max > min) {
        return Err(Error::DegenerateImage);
    }
    let range = max - min;
    x.try_map_planes(|p| {
        Plane::new(
            p.height(),
            p.width(),
            p.values().iter().map(|&v| 2.0 * ((v - min) / range) - 1.0).collect(),
        )
    })
}
