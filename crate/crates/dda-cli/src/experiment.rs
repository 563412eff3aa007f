//! Turns an [`ExperimentConfig`] into the four datasets of a run (source and
//! target, train and test partitions), both raw ([0, 1], as loaded) and
//! prepared ([−1, 1], as fed to the transforms, statistics, and classifier).
//!
//! The synthetic target mirrors the MNIST-M construction: the *same* source
//! digits, blended per image with a uniformly drawn background patch.

use dda_core::dataset::{subsample, synthesize_target, to_rgb, Dataset, DomainTag};
use dda_core::rng::derive_seed;
use dda_core::synth::{generate_digits, generate_patch_bank};
use dda_core::transform::renormalize;
use dda_core::Error as CoreError;

use crate::config::{ExperimentConfig, SourceSpec, TargetSpec};
use crate::failure::{Context, Failure, Result};
use crate::idx::load_idx;
use crate::imgdir::load_image_dir;

/// Experiment-level stream tags under the user seed.
pub mod tags {
    pub const SRC_POOL: u64 = 0x0100;
    pub const SRC_TEST: u64 = 0x0101;
    pub const SUBSAMPLE_TRAIN: u64 = 0x0102;
    pub const SUBSAMPLE_TEST: u64 = 0x0103;
    pub const PATCHES: u64 = 0x0104;
    pub const BLEND_TRAIN: u64 = 0x0105;
    pub const BLEND_TEST: u64 = 0x0106;
    pub const STATS_SOURCE: u64 = 0x0107;
    pub const STATS_TARGET: u64 = 0x0108;
    pub const TRAIN: u64 = 0x0109;
    pub const PCA_CAP: u64 = 0x010A;
    pub const PCA_DONOR: u64 = 0x010B;
    pub const EXPORT_DONOR: u64 = 0x010C;
}

pub struct Experiment {
    pub source_train_raw: Dataset,
    pub source_test_raw: Dataset,
    pub target_train_raw: Dataset,
    pub target_test_raw: Dataset,
    pub source_train: Dataset,
    pub source_test: Dataset,
    pub target_train: Dataset,
    pub target_test: Dataset,
    /// Images dropped during preparation because they were constant.
    pub prep_dropped: usize,
}

/// Renormalizes every image into [−1, 1], dropping (and counting) constant
/// images rather than failing the run.
pub fn prepare(d: &Dataset) -> Result<(Dataset, usize)> {
    let mut images = Vec::with_capacity(d.len());
    let mut labels = Vec::with_capacity(d.len());
    let mut dropped = 0usize;
    for i in 0..d.len() {
        match renormalize(d.image(i)) {
            Ok(img) => {
                images.push(img);
                labels.push(d.label(i));
            }
            Err(CoreError::DegenerateImage) => dropped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if images.is_empty() {
        return Err(Failure::data(format!(
            "dataset {:?} lost every image during preparation",
            d.name()
        )));
    }
    let prepared = Dataset::new(images, labels, d.domain(), d.name())?;
    Ok((prepared, dropped))
}

fn maybe_subsample(d: Dataset, per_class: usize, seed: u64) -> Result<Dataset> {
    if per_class == 0 {
        return Ok(d);
    }
    Ok(subsample(&d, per_class, seed)?)
}

/// The grayscale digit partitions of a synthetic source, exactly as the run
/// consumes them; `synth` exports these same sets.
pub fn synth_source_gray(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let seed = cfg.seed;
    let pool = generate_digits(
        cfg.source_pool_per_class,
        cfg.image_size,
        cfg.image_size,
        derive_seed(seed, &[tags::SRC_POOL]),
        "synth-digits-train",
    );
    let train = maybe_subsample(
        pool,
        cfg.train_per_class,
        derive_seed(seed, &[tags::SUBSAMPLE_TRAIN]),
    )?;
    let test_n = if cfg.test_per_class == 0 {
        cfg.source_pool_per_class
    } else {
        cfg.test_per_class
    };
    let test = generate_digits(
        test_n,
        cfg.image_size,
        cfg.image_size,
        derive_seed(seed, &[tags::SRC_TEST]),
        "synth-digits-test",
    );
    Ok((train, test))
}

/// The patch bank of a synthetic target for the given digit geometry.
pub fn synth_bank(cfg: &ExperimentConfig, height: usize, width: usize) -> dda_core::dataset::PatchBank {
    generate_patch_bank(
        cfg.patch_count,
        height,
        width,
        derive_seed(cfg.seed, &[tags::PATCHES]),
    )
}

pub fn build(cfg: &ExperimentConfig) -> Result<Experiment> {
    let seed = cfg.seed;
    let (source_train_rgb, source_test_rgb) = match &cfg.source {
        SourceSpec::Synth => {
            let (train, test) = synth_source_gray(cfg)?;
            (to_rgb(&train)?, to_rgb(&test)?)
        }
        SourceSpec::Idx {
            train_images,
            train_labels,
            test_images,
            test_labels,
        } => {
            let train = load_idx(train_images, train_labels, DomainTag::Source, "idx-train")
                .ctx(train_images.display())?;
            let test = load_idx(test_images, test_labels, DomainTag::Source, "idx-test")
                .ctx(test_images.display())?;
            let train = maybe_subsample(
                train,
                cfg.train_per_class,
                derive_seed(seed, &[tags::SUBSAMPLE_TRAIN]),
            )?;
            let test = maybe_subsample(
                test,
                cfg.test_per_class,
                derive_seed(seed, &[tags::SUBSAMPLE_TEST]),
            )?;
            (to_rgb(&train)?, to_rgb(&test)?)
        }
    };

    let (target_train_raw, target_test_raw) = match &cfg.target {
        TargetSpec::Synth => {
            let (h, w, _) = source_train_rgb.geometry()?;
            let bank = synth_bank(cfg, h, w);
            let train = synthesize_target(
                &source_train_rgb,
                &bank,
                derive_seed(seed, &[tags::BLEND_TRAIN]),
            )?
            .retagged(DomainTag::Target, "synth-target-train");
            let test = synthesize_target(
                &source_test_rgb,
                &bank,
                derive_seed(seed, &[tags::BLEND_TEST]),
            )?
            .retagged(DomainTag::Target, "synth-target-test");
            (train, test)
        }
        TargetSpec::Dir {
            train_dir,
            train_manifest,
            test_dir,
            test_manifest,
        } => {
            let train = load_image_dir(train_dir, train_manifest, DomainTag::Target, "dir-target-train")
                .ctx(train_dir.display())?;
            let test = load_image_dir(test_dir, test_manifest, DomainTag::Target, "dir-target-test")
                .ctx(test_dir.display())?;
            let train = maybe_subsample(
                train,
                cfg.train_per_class,
                derive_seed(seed, &[tags::SUBSAMPLE_TRAIN, 1]),
            )?;
            let test = maybe_subsample(
                test,
                cfg.test_per_class,
                derive_seed(seed, &[tags::SUBSAMPLE_TEST, 1]),
            )?;
            (train, test)
        }
    };

    let src_geom = source_train_rgb.geometry()?;
    for (name, d) in [
        ("source test", &source_test_rgb),
        ("target train", &target_train_raw),
        ("target test", &target_test_raw),
    ] {
        let got = d.geometry()?;
        if got != src_geom {
            return Err(Failure::data(format!(
                "{name} geometry {got:?} does not match source train {src_geom:?}"
            )));
        }
    }

    let mut prep_dropped = 0usize;
    let mut prep = |d: &Dataset| -> Result<Dataset> {
        let (p, dropped) = prepare(d)?;
        prep_dropped += dropped;
        Ok(p)
    };
    let source_train = prep(&source_train_rgb)?;
    let source_test = prep(&source_test_rgb)?;
    let target_train = prep(&target_train_raw)?;
    let target_test = prep(&target_test_raw)?;

    Ok(Experiment {
        source_train_raw: source_train_rgb,
        source_test_raw: source_test_rgb,
        target_train_raw,
        target_test_raw,
        source_train,
        source_test,
        target_train,
        target_test,
        prep_dropped,
    })
}
