//! Desk-scale supervised classifier trained from scratch: a reduced
//! LeNet-style convnet and a multinomial-logistic baseline, with exact
//! hand-derived gradients, Adam, and the two polarity/shuffle augmentations.

mod adam;
mod augment;
mod net;
mod train;

pub use adam::{adam_step, OptimState};
pub use augment::{augment, augment_image, CHANNEL_PERMS};
pub use net::{forward, loss_and_grad};
pub use train::{
    evaluate, train, Clock, DdaTraining, EpochRow, EvalMode, EvalSpec, NullClock, TrainConfig,
    TrainReport,
};

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream, stream_rng};

/// Which classifier head the harness trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    /// Flatten → dense → softmax.
    Logistic,
    /// conv(8, 5×5) → maxpool2 → ReLU → conv(16, 5×5) → maxpool2 → ReLU
    /// → FC(64) → ReLU → FC(K) → softmax, valid convolutions, stride 1.
    TinyCnn,
}

/// Filter counts and kernel size of the reduced convnet.
pub(crate) const CONV1_FILTERS: usize = 8;
pub(crate) const CONV2_FILTERS: usize = 16;
pub(crate) const KERNEL: usize = 5;
pub(crate) const HIDDEN: usize = 64;

/// Spatial bookkeeping of the convnet for one input geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct CnnDims {
    pub h1: usize,
    pub w1: usize,
    pub hp1: usize,
    pub wp1: usize,
    pub h2: usize,
    pub w2: usize,
    pub hp2: usize,
    pub wp2: usize,
    pub flat: usize,
}

impl CnnDims {
    fn for_input(height: usize, width: usize) -> Result<Self> {
        let conv = |n: usize| -> Result<usize> {
            n.checked_sub(KERNEL - 1).filter(|&m| m >= 2).ok_or(Error::InvalidConfig {
                what: "input too small for the convnet",
            })
        };
        let pool = |n: usize| -> Result<usize> {
            if n % 2 != 0 {
                return Err(Error::InvalidConfig {
                    what: "convnet needs even pre-pool dimensions",
                });
            }
            Ok(n / 2)
        };
        let (h1, w1) = (conv(height)?, conv(width)?);
        let (hp1, wp1) = (pool(h1)?, pool(w1)?);
        let (h2, w2) = (conv(hp1)?, conv(wp1)?);
        let (hp2, wp2) = (pool(h2)?, pool(w2)?);
        Ok(CnnDims {
            h1,
            w1,
            hp1,
            wp1,
            h2,
            w2,
            hp2,
            wp2,
            flat: CONV2_FILTERS * hp2 * wp2,
        })
    }
}

/// Classifier kind plus input/output geometry; fully determines the
/// parameter layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arch {
    pub kind: ClassifierKind,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub classes: usize,
}

/// Shape and placement of one trainable tensor inside the flat parameter
/// vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: &'static str,
    pub offset: usize,
    pub dims: Vec<usize>,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Arch {
    pub fn new(
        kind: ClassifierKind,
        height: usize,
        width: usize,
        channels: usize,
        classes: usize,
    ) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 || classes < 2 {
            return Err(Error::InvalidConfig {
                what: "architecture needs positive geometry and at least 2 classes",
            });
        }
        if kind == ClassifierKind::TinyCnn {
            CnnDims::for_input(height, width)?;
        }
        Ok(Arch {
            kind,
            height,
            width,
            channels,
            classes,
        })
    }

    pub(crate) fn cnn_dims(&self) -> CnnDims {
        CnnDims::for_input(self.height, self.width).expect("validated at construction")
    }

    pub fn input_len(&self) -> usize {
        self.height * self.width * self.channels
    }

    /// The trainable tensors in parameter-vector order.
    pub fn tensor_specs(&self) -> Vec<TensorSpec> {
        let mut specs = Vec::new();
        let mut offset = 0;
        let mut push = |name: &'static str, dims: Vec<usize>| {
            let len: usize = dims.iter().product();
            specs.push(TensorSpec { name, offset, dims });
            offset += len;
        };
        match self.kind {
            ClassifierKind::Logistic => {
                push("fc.w", alloc::vec![self.classes, self.input_len()]);
                push("fc.b", alloc::vec![self.classes]);
            }
            ClassifierKind::TinyCnn => {
                let d = self.cnn_dims();
                push(
                    "conv1.w",
                    alloc::vec![CONV1_FILTERS, self.channels, KERNEL, KERNEL],
                );
                push("conv1.b", alloc::vec![CONV1_FILTERS]);
                push(
                    "conv2.w",
                    alloc::vec![CONV2_FILTERS, CONV1_FILTERS, KERNEL, KERNEL],
                );
                push("conv2.b", alloc::vec![CONV2_FILTERS]);
                push("fc1.w", alloc::vec![HIDDEN, d.flat]);
                push("fc1.b", alloc::vec![HIDDEN]);
                push("fc2.w", alloc::vec![self.classes, HIDDEN]);
                push("fc2.b", alloc::vec![self.classes]);
            }
        }
        specs
    }

    pub fn param_len(&self) -> usize {
        self.tensor_specs().iter().map(TensorSpec::len).sum()
    }
}

/// Flat parameter vector plus the architecture that interprets it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    arch: Arch,
    theta: Vec<f64>,
}

impl ModelParams {
    /// Seeded Glorot-uniform weights (a = sqrt(6/(fan_in+fan_out))), zero
    /// biases. One stream covers the tensors in layout order.
    pub fn init(arch: Arch, seed: u64) -> Self {
        let mut theta = alloc::vec![0.0f64; arch.param_len()];
        let mut rng = stream_rng(seed, &[stream::INIT]);
        for spec in arch.tensor_specs() {
            if spec.name.ends_with(".b") {
                continue;
            }
            let (fan_in, fan_out) = match spec.dims.len() {
                2 => (spec.dims[1], spec.dims[0]),
                4 => (
                    spec.dims[1] * spec.dims[2] * spec.dims[3],
                    spec.dims[0] * spec.dims[2] * spec.dims[3],
                ),
                _ => (spec.len(), spec.len()),
            };
            let a = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
            for slot in &mut theta[spec.offset..spec.offset + spec.len()] {
                *slot = rng.gen_range(-a..a);
            }
        }
        ModelParams { arch, theta }
    }

    pub fn from_theta(arch: Arch, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != arch.param_len() {
            return Err(Error::BadLength {
                expected: arch.param_len(),
                got: theta.len(),
            });
        }
        Ok(ModelParams { arch, theta })
    }

    pub fn arch(&self) -> &Arch {
        &self.arch
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub(crate) fn tensor(&self, spec: &TensorSpec) -> &[f64] {
        &self.theta[spec.offset..spec.offset + spec.len()]
    }
}
