//! `dda pca`: the before/after covariate-shift diagnostics, also reused by
//! `dda run`.

use dda_core::dataset::Dataset;
use dda_core::image::ImageTensor;
use dda_core::pca::{domain_gap, fit_pca, project_dataset, ProjectionRow};
use dda_core::rng::{derive_seed, stream_rng};
use dda_core::transform::{DomainStats, TransformEngine};
use dda_core::Error as CoreError;
use rand::Rng;

use crate::config::ExperimentConfig;
use crate::experiment::{self, tags, Experiment};
use crate::failure::{Failure, Result};
use crate::lock::OutDirLock;
use crate::pmap::{pmap, worker_count};
use crate::report::projection_csv;
use crate::svg::scatter_svg;

use super::{compute_stats, write_file};

pub struct PcaArtifacts {
    pub rows_before: Vec<ProjectionRow>,
    pub rows_after: Vec<ProjectionRow>,
    pub gap_before: f64,
    pub gap_after: f64,
    /// Images whose transform degenerated and were skipped in the "after" set.
    pub dropped_after: usize,
}

/// Seeded uniform cap (without replacement), emitted in original order.
fn cap_dataset(d: &Dataset, cap: usize, seed: u64) -> Result<Dataset> {
    if cap == 0 || d.len() <= cap {
        return Ok(d.clone());
    }
    let mut rng = stream_rng(seed, &[]);
    let mut indices: Vec<usize> = (0..d.len()).collect();
    for slot in 0..cap {
        let pick = slot + rng.gen_range(0..indices.len() - slot);
        indices.swap(slot, pick);
    }
    let mut chosen = indices[..cap].to_vec();
    chosen.sort_unstable();
    let images = chosen.iter().map(|&i| d.image(i).clone()).collect();
    let labels = chosen.iter().map(|&i| d.label(i)).collect();
    Ok(Dataset::new(images, labels, d.domain(), d.name())?)
}

/// DDA-transforms a capped dataset the way the classifier would see it:
/// training recipe (seeded donors) for source, inference recipe for target.
fn transformed_copy(
    data: &Dataset,
    engine: &TransformEngine,
    donors: Option<(u64, &Dataset)>,
    mean_pixel: &[f64],
) -> Result<(Dataset, usize)> {
    let n = data.len();
    let outputs: Vec<std::result::Result<ImageTensor, CoreError>> =
        pmap(n, worker_count(), |i| match donors {
            Some((seed, pool)) => {
                let mut rng = stream_rng(seed, &[tags::PCA_DONOR, i as u64]);
                let donor_idx = if pool.len() > 1 {
                    let j = rng.gen_range(0..pool.len() - 1);
                    if j >= i {
                        j + 1
                    } else {
                        j
                    }
                } else {
                    i.min(pool.len() - 1)
                };
                let pixel_seed: u64 = rng.gen();
                engine.source(data.image(i), pool.image(donor_idx), pixel_seed)
            }
            None => engine.inference(data.image(i), mean_pixel),
        });
    let mut images = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut dropped = 0usize;
    for (i, out) in outputs.into_iter().enumerate() {
        match out {
            Ok(img) => {
                images.push(img);
                labels.push(data.label(i));
            }
            Err(CoreError::DegenerateImage) => dropped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if images.is_empty() {
        return Err(Failure::data("every transformed image degenerated"));
    }
    Ok((
        Dataset::new(images, labels, data.domain(), data.name())?,
        dropped,
    ))
}

fn fit_and_project(source: &Dataset, target: &Dataset) -> Result<(Vec<ProjectionRow>, f64)> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(source.len() + target.len());
    rows.extend(source.images().iter().map(|img| img.flatten()));
    rows.extend(target.images().iter().map(|img| img.flatten()));
    let model = fit_pca(&rows, 2)?;
    let mut table = project_dataset(&model, source)?;
    table.extend(project_dataset(&model, target)?);
    let gap = domain_gap(&table)?;
    Ok((table, gap))
}

/// Before/after projections and gaps on the (capped) training partitions.
pub fn diagnostics(
    cfg: &ExperimentConfig,
    exp: &Experiment,
    stats: (&DomainStats, &DomainStats),
) -> Result<PcaArtifacts> {
    let (stats_source, stats_target) = stats;
    let cap_seed = derive_seed(cfg.seed, &[tags::PCA_CAP]);
    let src = cap_dataset(&exp.source_train, cfg.pca_per_domain, cap_seed)?;
    let tgt = cap_dataset(&exp.target_train, cfg.pca_per_domain, derive_seed(cap_seed, &[1]))?;

    let (rows_before, gap_before) = fit_and_project(&src, &tgt)?;

    let engine_for_source = TransformEngine::new(stats_target, cfg.transform_config())?;
    let engine_for_target = TransformEngine::new(stats_source, cfg.transform_config())?;
    let donor_seed = derive_seed(cfg.seed, &[tags::PCA_DONOR]);
    let (src_after, dropped_s) =
        transformed_copy(&src, &engine_for_source, Some((donor_seed, &src)), &[])?;
    let (tgt_after, dropped_t) =
        transformed_copy(&tgt, &engine_for_target, None, stats_target.mean_pixel())?;
    let (rows_after, gap_after) = fit_and_project(&src_after, &tgt_after)?;

    Ok(PcaArtifacts {
        rows_before,
        rows_after,
        gap_before,
        gap_after,
        dropped_after: dropped_s + dropped_t,
    })
}

pub fn write_artifacts(cfg: &ExperimentConfig, art: &PcaArtifacts) -> Result<()> {
    write_file(
        &cfg.out.join("pca_before.csv"),
        projection_csv(&art.rows_before).as_bytes(),
    )?;
    write_file(
        &cfg.out.join("pca_after.csv"),
        projection_csv(&art.rows_after).as_bytes(),
    )?;
    write_file(
        &cfg.out.join("pca_before.svg"),
        scatter_svg(&art.rows_before, "principal components before adaptation").as_bytes(),
    )?;
    write_file(
        &cfg.out.join("pca_after.svg"),
        scatter_svg(&art.rows_after, "principal components after adaptation").as_bytes(),
    )?;
    Ok(())
}

pub fn cmd_pca(cfg: &ExperimentConfig) -> Result<()> {
    let _lock = OutDirLock::acquire(&cfg.out)?;
    let exp = experiment::build(cfg)?;
    let (stats_source, stats_target) = compute_stats(cfg, &exp)?;
    let art = diagnostics(cfg, &exp, (&stats_source, &stats_target))?;
    write_artifacts(cfg, &art)?;
    println!("domain gap before adaptation: {}", art.gap_before);
    println!("domain gap after adaptation:  {}", art.gap_after);
    if art.dropped_after > 0 {
        println!("note: {} transformed images degenerated and were skipped", art.dropped_after);
    }
    Ok(())
}
