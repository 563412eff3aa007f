//! `dda synth`: materialize the run's synthetic datasets — digits as IDX
//! pairs, the patch bank and target sets as image directories with
//! manifests — so they can be inspected or fed back in via the loaders.

use dda_core::dataset::{to_rgb, synthesize_target, Dataset, DomainTag};
use dda_core::rng::derive_seed;

use crate::config::{ExperimentConfig, SourceSpec, TargetSpec};
use crate::experiment::{synth_bank, synth_source_gray, tags};
use crate::failure::{Context, Failure, Result};
use crate::idx::write_idx;
use crate::imgdir::write_image_dir;
use crate::lock::OutDirLock;

pub fn cmd_synth(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.source != SourceSpec::Synth || cfg.target != TargetSpec::Synth {
        return Err(Failure::usage(
            "synth requires source = synth and target = synth",
        ));
    }
    let _lock = OutDirLock::acquire(&cfg.out)?;
    let (train_gray, test_gray) = synth_source_gray(cfg)?;

    write_idx(
        &train_gray,
        &cfg.out.join("digits-train-images.idx"),
        &cfg.out.join("digits-train-labels.idx"),
    )
    .ctx("digits-train")?;
    write_idx(
        &test_gray,
        &cfg.out.join("digits-test-images.idx"),
        &cfg.out.join("digits-test-labels.idx"),
    )
    .ctx("digits-test")?;
    println!(
        "digits: {} train / {} test images of {}x{}",
        train_gray.len(),
        test_gray.len(),
        cfg.image_size,
        cfg.image_size
    );

    let bank = synth_bank(cfg, cfg.image_size, cfg.image_size);
    let bank_ds = Dataset::new(
        bank.patches().to_vec(),
        vec![0; bank.len()],
        DomainTag::Target,
        bank.origin(),
    )?;
    write_image_dir(
        &bank_ds,
        &cfg.out.join("patches"),
        &cfg.out.join("patches.tsv"),
    )
    .ctx("patches")?;
    println!("patch bank: {} patches", bank.len());

    let train_rgb = to_rgb(&train_gray)?;
    let test_rgb = to_rgb(&test_gray)?;
    let target_train = synthesize_target(
        &train_rgb,
        &bank,
        derive_seed(cfg.seed, &[tags::BLEND_TRAIN]),
    )?;
    let target_test = synthesize_target(
        &test_rgb,
        &bank,
        derive_seed(cfg.seed, &[tags::BLEND_TEST]),
    )?;
    write_image_dir(
        &target_train,
        &cfg.out.join("target-train"),
        &cfg.out.join("target-train.tsv"),
    )
    .ctx("target-train")?;
    write_image_dir(
        &target_test,
        &cfg.out.join("target-test"),
        &cfg.out.join("target-test.tsv"),
    )
    .ctx("target-test")?;
    println!(
        "target: {} train / {} test blended images",
        target_train.len(),
        target_test.len()
    );
    Ok(())
}
