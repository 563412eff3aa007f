//! Direct domain adaptation (DDA) for image classifiers.
//!
//! The crate implements the reciprocal linear transforms that move a
//! classifier's training inputs and its inference inputs toward a shared
//! distribution: every image is scaled by randomly drawn pixel values from
//! its own domain and convolved with the mean auto-correlation of the other
//! domain, entirely in the Fourier domain. Around that sit the supporting
//! pieces for a self-contained desk-scale experiment: dataset synthesis and
//! manipulation, a from-scratch convolutional classifier with Adam, and
//! PCA-based covariate-shift diagnostics.
//!
//! Everything here is pure computation on owned buffers (`no_std` + `alloc`);
//! file formats, the CLI, and anything that touches the OS live in the
//! companion `dda-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod classifier;
pub mod dataset;
pub mod error;
pub mod fourier;
pub mod image;
pub mod pca;
pub mod rng;
pub mod synth;
pub mod transform;

pub use error::{Error, Result};

/// Digit classification throughout the crate is ten-way.
pub const NUM_CLASSES: usize = 10;
