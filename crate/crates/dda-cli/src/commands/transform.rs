//! `dda transform`: qualitative transform inspection. Writes, per selected
//! digit and domain, a horizontal PNG strip of the raw composite, the
//! transformed composite, and the three transformed channels; also reports
//! the cross-domain pixel correlation of matched digit pairs before and
//! after adaptation.

use dda_core::dataset::{Dataset, DomainTag};
use dda_core::image::ImageTensor;
use dda_core::rng::{derive_seed, stream_rng};
use dda_core::transform::TransformEngine;
use image::{ImageBuffer, Rgb};
use rand::Rng;

use crate::config::ExperimentConfig;
use crate::experiment::{self, tags};
use crate::failure::{Context, Failure, Result};
use crate::lock::OutDirLock;
use crate::stats_cache;

use super::write_file;

/// Maps [−1, 1] (or any range, renormalized per strip) to display bytes.
fn to_display(v: f64, min: f64, max: f64) -> u8 {
    if !(max > min) {
        return 0;
    }
    (255.0 * (v - min) / (max - min)).round().clamp(0.0, 255.0) as u8
}

fn strip_png(panels: &[&ImageTensor], path: &std::path::Path) -> Result<()> {
    let (h, w, _) = panels[0].geometry();
    let gap = 2usize;
    let total_w = panels.len() * w + (panels.len() - 1) * gap;
    let mut buf = ImageBuffer::from_pixel(total_w as u32, h as u32, Rgb([32u8, 32, 32]));
    for (p, img) in panels.iter().enumerate() {
        let (min, max) = img.min_max();
        let x0 = p * (w + gap);
        for r in 0..h {
            for c in 0..w {
                let px = if img.channels() == 3 {
                    Rgb([
                        to_display(img.at(0, r, c), min, max),
                        to_display(img.at(1, r, c), min, max),
                        to_display(img.at(2, r, c), min, max),
                    ])
                } else {
                    let g = to_display(img.at(0, r, c), min, max);
                    Rgb([g, g, g])
                };
                buf.put_pixel((x0 + c) as u32, r as u32, px);
            }
        }
    }
    buf.save(path).ctx(path.display())
}

fn single_channel(img: &ImageTensor, ch: usize) -> ImageTensor {
    ImageTensor::new(vec![img.plane(ch).clone()]).expect("one plane")
}

/// Pearson correlation over all pixels and channels of two same-shape images.
fn pixel_correlation(a: &ImageTensor, b: &ImageTensor) -> f64 {
    let (xa, xb) = (a.flatten(), b.flatten());
    let n = xa.len() as f64;
    let (ma, mb) = (
        xa.iter().sum::<f64>() / n,
        xb.iter().sum::<f64>() / n,
    );
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in xa.iter().zip(&xb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

/// First index of each digit class, in class order, up to `count` entries.
fn fixture_indices(d: &Dataset, count: usize) -> Vec<(u8, usize)> {
    let mut out = Vec::new();
    for class in 0..dda_core::NUM_CLASSES as u8 {
        if out.len() >= count {
            break;
        }
        if let Some(idx) = d.labels().iter().position(|&l| l == class) {
            out.push((class, idx));
        }
    }
    out
}

pub fn cmd_transform(cfg: &ExperimentConfig) -> Result<()> {
    let _lock = OutDirLock::acquire(&cfg.out)?;
    let stats_source = stats_cache::read(&cfg.out.join("stats_source.bin"), DomainTag::Source)
        .map_err(|e| Failure::data(format!("stats_source.bin (run `dda stats` first): {e}")))?;
    let stats_target = stats_cache::read(&cfg.out.join("stats_target.bin"), DomainTag::Target)
        .map_err(|e| Failure::data(format!("stats_target.bin (run `dda stats` first): {e}")))?;
    let exp = experiment::build(cfg)?;

    let geom = exp.source_train.geometry()?;
    for (name, stats) in [("source", &stats_source), ("target", &stats_target)] {
        if stats.geometry() != geom {
            return Err(Failure::data(format!(
                "stats_{name}.bin geometry {:?} does not match the datasets {:?}",
                stats.geometry(),
                geom
            )));
        }
    }

    let engine_for_source = TransformEngine::new(&stats_target, cfg.transform_config())?;
    let engine_for_target = TransformEngine::new(&stats_source, cfg.transform_config())?;

    let src_fixtures = fixture_indices(&exp.source_train, cfg.transform_count);
    let tgt_fixtures = fixture_indices(&exp.target_train, cfg.transform_count);

    let mut corr_csv = String::from("label,raw_corr,dda_corr,raw_abs_corr,dda_abs_corr\n");
    let donor_seed = derive_seed(cfg.seed, &[tags::EXPORT_DONOR]);
    let mut written = 0usize;

    for &(label, si) in &src_fixtures {
        // Training-style transform for the source sample.
        let mut rng = stream_rng(donor_seed, &[label as u64]);
        let pool = &exp.source_train;
        let donor_idx = if pool.len() > 1 {
            let j = rng.gen_range(0..pool.len() - 1);
            if j >= si {
                j + 1
            } else {
                j
            }
        } else {
            si
        };
        let pixel_seed: u64 = rng.gen();
        let src_raw = exp.source_train_raw.image(si);
        let src_dda = engine_for_source
            .source(exp.source_train.image(si), pool.image(donor_idx), pixel_seed)?;
        strip_png(
            &[
                src_raw,
                &src_dda,
                &single_channel(&src_dda, 0),
                &single_channel(&src_dda, 1),
                &single_channel(&src_dda, 2),
            ],
            &cfg.out.join(format!("transform_src_{label}.png")),
        )?;
        written += 1;

        // Matched target digit, inference-style transform.
        if let Some(&(_, ti)) = tgt_fixtures.iter().find(|&&(l, _)| l == label) {
            let tgt_raw = exp.target_train_raw.image(ti);
            let tgt_dda = engine_for_target
                .inference(exp.target_train.image(ti), stats_target.mean_pixel())?;
            strip_png(
                &[
                    tgt_raw,
                    &tgt_dda,
                    &single_channel(&tgt_dda, 0),
                    &single_channel(&tgt_dda, 1),
                    &single_channel(&tgt_dda, 2),
                ],
                &cfg.out.join(format!("transform_tgt_{label}.png")),
            )?;
            written += 1;

            let raw_corr = pixel_correlation(src_raw, tgt_raw);
            let dda_corr = pixel_correlation(&src_dda, &tgt_dda);
            corr_csv.push_str(&format!(
                "{label},{raw_corr},{dda_corr},{},{}\n",
                raw_corr.abs(),
                dda_corr.abs()
            ));
        }
    }
    write_file(
        &cfg.out.join("transform_correlation.csv"),
        corr_csv.as_bytes(),
    )?;
    println!("wrote {written} transform strips and transform_correlation.csv");
    Ok(())
}
