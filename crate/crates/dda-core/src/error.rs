//! Error type shared by every module in the crate.

use core::fmt;

use crate::dataset::DomainTag;

pub type Result<T> = core::result::Result<T, Error>;

/// All the ways the library rejects inputs or detects internal misuse.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A plane or tensor held a NaN or infinity at the given (row, col).
    NonFinite { row: usize, col: usize, value: f64 },
    /// Two planes that must share a geometry do not.
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    /// Two tensors disagree on channel count.
    ChannelMismatch { left: usize, right: usize },
    /// A buffer length does not match the declared geometry.
    BadLength { expected: usize, got: usize },
    /// `ifft2` saw an imaginary residue too large to discard, which means the
    /// spectrum fed to it was not conjugate-symmetric.
    ResidualImaginary { max_im: f64, bound: f64 },
    /// A dataset-level operation was handed no images.
    EmptyDataset,
    /// Image `index` of a dataset does not share the common geometry.
    ImageGeometry {
        index: usize,
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    /// Cached statistics or a model were built for a different geometry.
    GeometryMismatch {
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    /// Renormalization of a constant image (max == min) is undefined.
    DegenerateImage,
    /// `to_rgb` only accepts single-channel input.
    AlreadyMultiChannel { channels: usize },
    /// A label fell outside `[0, num_classes)`.
    LabelOutOfRange { index: usize, label: u8 },
    /// A class-balanced subsample asked for more members than a class has.
    InsufficientClass {
        label: u8,
        available: usize,
        requested: usize,
    },
    /// Training-side statistics were wired to the wrong domain.
    DomainMismatch { expected: DomainTag, got: DomainTag },
    /// A mean auto-correlation kernel whose spectrum is not real-nonnegative.
    NotZeroPhase { max_im: f64, min_re: f64 },
    /// A gradient coordinate stopped being finite.
    GradientNotFinite { index: usize, value: f64 },
    /// A gradient stopped being finite; training aborts with context.
    NonFiniteGradient { epoch: usize, batch: usize },
    /// More than the tolerated fraction of samples degenerated under the
    /// transform and were dropped.
    TooManyDropped { dropped: usize, total: usize },
    /// PCA was asked for more components than samples/dimensions allow.
    RankExceeded { k: usize, max: usize },
    /// The domain gap needs projections from both domains.
    SingleDomain,
    /// PCA iteration failed to converge (degenerate input).
    NoConvergence { iterations: usize },
    /// A configuration field failed validation.
    InvalidConfig { what: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { row, col, value } => {
                write!(f, "non-finite value {value} at ({row}, {col})")
            }
            Error::ShapeMismatch { left, right } => write!(
                f,
                "shape mismatch: {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::ChannelMismatch { left, right } => {
                write!(f, "channel mismatch: {left} vs {right}")
            }
            Error::BadLength { expected, got } => {
                write!(f, "buffer length {got}, geometry needs {expected}")
            }
            Error::ResidualImaginary { max_im, bound } => write!(
                f,
                "inverse FFT imaginary residue {max_im:e} exceeds {bound:e}: \
                 spectrum is not conjugate-symmetric"
            ),
            Error::EmptyDataset => write!(f, "dataset is empty"),
            Error::ImageGeometry {
                index,
                expected,
                got,
            } => write!(
                f,
                "image {index} has geometry {}x{}x{}, dataset uses {}x{}x{}",
                got.0, got.1, got.2, expected.0, expected.1, expected.2
            ),
            Error::GeometryMismatch { expected, got } => write!(
                f,
                "geometry mismatch: expected {}x{}x{}, got {}x{}x{}",
                expected.0, expected.1, expected.2, got.0, got.1, got.2
            ),
            Error::DegenerateImage => {
                write!(f, "degenerate constant image: renormalization undefined")
            }
            Error::AlreadyMultiChannel { channels } => {
                write!(f, "expected single-channel input, got {channels} channels")
            }
            Error::LabelOutOfRange { index, label } => {
                write!(f, "label {label} at index {index} out of range")
            }
            Error::InsufficientClass {
                label,
                available,
                requested,
            } => write!(
                f,
                "class {label} has {available} members, {requested} requested"
            ),
            Error::DomainMismatch { expected, got } => {
                write!(f, "expected {expected:?}-domain data, got {got:?}")
            }
            Error::NotZeroPhase { max_im, min_re } => write!(
                f,
                "kernel spectrum is not zero-phase (max |im| {max_im:e}, min re {min_re:e})"
            ),
            Error::GradientNotFinite { index, value } => {
                write!(f, "gradient coordinate {index} is {value}")
            }
            Error::NonFiniteGradient { epoch, batch } => {
                write!(f, "non-finite gradient at epoch {epoch}, batch {batch}")
            }
            Error::TooManyDropped { dropped, total } => write!(
                f,
                "{dropped} of {total} samples dropped as degenerate (limit 1%)"
            ),
            Error::RankExceeded { k, max } => {
                write!(f, "k = {k} components requested, data supports at most {max}")
            }
            Error::SingleDomain => write!(f, "projection table holds a single domain"),
            Error::NoConvergence { iterations } => {
                write!(f, "eigensolver failed to converge in {iterations} iterations")
            }
            Error::InvalidConfig { what } => write!(f, "invalid configuration: {what}"),
        }
    }
}

impl core::error::Error for Error {}
