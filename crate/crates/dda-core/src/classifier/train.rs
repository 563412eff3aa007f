//! The training harness: epoch loop with on-the-fly DDA transforms, seeded
//! shuffling, augmentation, Adam updates, and per-epoch evaluation.
//!
//! Inputs are the *prepared* ([−1, 1]-renormalized) datasets; with DDA
//! disabled the loop degrades to plain supervised training and provably
//! never touches domain statistics (`TrainReport::dda_transforms` stays 0).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataset::{Dataset, DomainTag};
use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::rng::{derive_seed, stream, stream_rng};
use crate::transform::{DomainStats, TransformConfig, TransformEngine};
use crate::NUM_CLASSES;

use super::net::argmax;
use super::{adam_step, augment, forward, loss_and_grad, ClassifierKind, ModelParams, OptimState};
use super::Arch;

/// Wall-clock source injected by the caller; the core crate has no OS clock.
pub trait Clock {
    fn seconds(&self) -> f64;
}

/// Reports zero elapsed time; used by deterministic tests.
pub struct NullClock;

impl Clock for NullClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub augment: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 15,
            batch_size: 64,
            learning_rate: 1e-3,
            seed: 0,
            augment: true,
        }
    }
}

/// Wiring for DDA-enabled training: the *target* domain statistics feed the
/// source-side transform.
pub struct DdaTraining<'a> {
    pub target_stats: &'a DomainStats,
    pub cfg: TransformConfig,
}

/// How an evaluation set is preprocessed before the forward pass.
pub enum EvalMode<'a> {
    /// Prepared images go in as they are.
    Raw,
    /// Inference-side DDA: scale by the set's own mean pixel, convolve with
    /// the other domain's statistics.
    Dda {
        own_mean_pixel: &'a [f64],
        other_stats: &'a DomainStats,
        cfg: TransformConfig,
    },
}

/// A named evaluation set reported once per epoch.
pub struct EvalSpec<'a> {
    pub name: &'a str,
    pub data: &'a Dataset,
    pub mode: EvalMode<'a>,
}

/// One epoch of metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub eval_accs: Vec<f64>,
    pub wall_seconds: f64,
}

/// Full training trace plus the instrumentation counters the invariants
/// assert on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub eval_names: Vec<String>,
    pub epochs: Vec<EpochRow>,
    /// How many times the source-side transform (and with it DomainStats)
    /// was touched; exactly 0 when DDA is disabled.
    pub dda_transforms: u64,
    /// Samples dropped because their transform output degenerated.
    pub dropped: u64,
}

impl TrainReport {
    pub fn final_eval_acc(&self, name: &str) -> Option<f64> {
        let idx = self.eval_names.iter().position(|n| n == name)?;
        self.epochs.last().map(|row| row.eval_accs[idx])
    }
}

/// Trains a fresh model on the prepared source set.
pub fn train(
    kind: ClassifierKind,
    source: &Dataset,
    dda: Option<&DdaTraining>,
    cfg: &TrainConfig,
    evals: &[EvalSpec],
    clock: &dyn Clock,
) -> Result<(ModelParams, TrainReport)> {
    if source.domain() != DomainTag::Source {
        return Err(Error::DomainMismatch {
            expected: DomainTag::Source,
            got: source.domain(),
        });
    }
    let (height, width, channels) = source.geometry()?;
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(Error::InvalidConfig {
            what: "epochs and batch_size must be positive",
        });
    }
    let engine = match dda {
        Some(wiring) => {
            if wiring.target_stats.domain() != DomainTag::Target {
                return Err(Error::DomainMismatch {
                    expected: DomainTag::Target,
                    got: wiring.target_stats.domain(),
                });
            }
            if wiring.target_stats.geometry() != (height, width, channels) {
                return Err(Error::GeometryMismatch {
                    expected: (height, width, channels),
                    got: wiring.target_stats.geometry(),
                });
            }
            Some(TransformEngine::new(wiring.target_stats, wiring.cfg.clone())?)
        }
        None => None,
    };

    let arch = Arch::new(kind, height, width, channels, NUM_CLASSES)?;
    let mut params = ModelParams::init(arch, derive_seed(cfg.seed, &[stream::INIT]));
    let mut opt = OptimState::new(arch.param_len(), cfg.learning_rate);

    let n = source.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut report = TrainReport {
        eval_names: evals.iter().map(|e| e.name.to_string()).collect(),
        epochs: Vec::with_capacity(cfg.epochs),
        dda_transforms: 0,
        dropped: 0,
    };

    for epoch in 0..cfg.epochs {
        let t0 = clock.seconds();
        let mut shuffle_rng = stream_rng(cfg.seed, &[stream::SHUFFLE, epoch as u64]);
        order.shuffle(&mut shuffle_rng);

        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        let mut seen = 0usize;

        for (batch_idx, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let mut batch_images: Vec<ImageTensor> = Vec::with_capacity(chunk.len());
            let mut batch_labels: Vec<u8> = Vec::with_capacity(chunk.len());
            for &i in chunk {
                let image = match &engine {
                    Some(engine) => {
                        // Fresh donor per epoch: uniform over the set minus
                        // the sample itself, then the pixel-draw stream.
                        let mut rng =
                            stream_rng(cfg.seed, &[stream::DONOR, epoch as u64, i as u64]);
                        let donor_idx = if n > 1 {
                            let j = rng.gen_range(0..n - 1);
                            if j >= i {
                                j + 1
                            } else {
                                j
                            }
                        } else {
                            i
                        };
                        let pixel_seed: u64 = rng.gen();
                        report.dda_transforms += 1;
                        match engine.source(source.image(i), source.image(donor_idx), pixel_seed) {
                            Ok(img) => img,
                            Err(Error::DegenerateImage) => {
                                report.dropped += 1;
                                continue;
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    None => source.image(i).clone(),
                };
                batch_images.push(image);
                batch_labels.push(source.label(i));
            }
            if batch_images.is_empty() {
                continue;
            }
            if cfg.augment {
                let aug_seed =
                    derive_seed(cfg.seed, &[stream::AUGMENT, epoch as u64, batch_idx as u64]);
                augment(&mut batch_images, aug_seed);
            }
            let refs: Vec<&ImageTensor> = batch_images.iter().collect();
            let (loss, batch_correct, grad) = loss_and_grad(&params, &refs, &batch_labels)?;
            adam_step(&mut params, &grad, &mut opt).map_err(|e| match e {
                Error::GradientNotFinite { .. } => Error::NonFiniteGradient {
                    epoch,
                    batch: batch_idx,
                },
                other => other,
            })?;
            loss_sum += loss * refs.len() as f64;
            correct += batch_correct;
            seen += refs.len();
        }

        if seen == 0 {
            return Err(Error::TooManyDropped {
                dropped: report.dropped as usize,
                total: n,
            });
        }
        let eval_accs = evals
            .iter()
            .map(|spec| evaluate(&params, spec.data, &spec.mode))
            .collect::<Result<Vec<_>>>()?;
        report.epochs.push(EpochRow {
            epoch,
            train_loss: loss_sum / seen as f64,
            train_acc: correct as f64 / seen as f64,
            eval_accs,
            wall_seconds: clock.seconds() - t0,
        });
    }

    let attempted = (n * cfg.epochs) as u64;
    if report.dropped * 100 > attempted {
        return Err(Error::TooManyDropped {
            dropped: report.dropped as usize,
            total: attempted as usize,
        });
    }
    Ok((params, report))
}

/// Argmax accuracy of `m` over a prepared dataset. In DDA mode each image
/// first passes through the inference-side transform; images whose transform
/// degenerates count as misclassified rather than silently vanishing.
pub fn evaluate(m: &ModelParams, data: &Dataset, mode: &EvalMode) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let engine = match mode {
        EvalMode::Raw => None,
        EvalMode::Dda {
            other_stats,
            own_mean_pixel,
            cfg,
        } => {
            if other_stats.domain() == data.domain() {
                return Err(Error::DomainMismatch {
                    expected: match data.domain() {
                        DomainTag::Source => DomainTag::Target,
                        DomainTag::Target => DomainTag::Source,
                    },
                    got: other_stats.domain(),
                });
            }
            if own_mean_pixel.len() != data.geometry()?.2 {
                return Err(Error::ChannelMismatch {
                    left: data.geometry()?.2,
                    right: own_mean_pixel.len(),
                });
            }
            Some(TransformEngine::new(other_stats, cfg.clone())?)
        }
    };
    let mut correct = 0usize;
    for i in 0..data.len() {
        let image = match (&engine, mode) {
            (Some(engine), EvalMode::Dda { own_mean_pixel, .. }) => {
                match engine.inference(data.image(i), own_mean_pixel) {
                    Ok(img) => img,
                    Err(Error::DegenerateImage) => continue,
                    Err(e) => return Err(e),
                }
            }
            _ => data.image(i).clone(),
        };
        let probs = forward(m, &[&image])?;
        if argmax(&probs[0]) == data.label(i) as usize {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}
