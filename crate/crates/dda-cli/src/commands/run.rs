//! `dda run`: the full experiment — baseline training, DDA training,
//! evaluation on both test partitions, PCA diagnostics, and the summary.

use dda_core::classifier::{train, DdaTraining, EvalMode, EvalSpec, TrainConfig, TrainReport};
use dda_core::rng::derive_seed;

use crate::checkpoint;
use crate::config::ExperimentConfig;
use crate::experiment::{self, tags};
use crate::failure::{Context, Failure, Result};
use crate::lock::OutDirLock;
use crate::report::{train_report_csv, Summary};
use crate::stats_cache;

use super::{pca, write_file, SystemClock};

const TARGET_MARGIN_PP: f64 = 15.0;
const SOURCE_FIDELITY_PP: f64 = 5.0;

fn final_accs(report: &TrainReport) -> Result<(f64, f64)> {
    let src = report
        .final_eval_acc("source_test")
        .ok_or_else(|| Failure::data("missing source_test evaluation"))?;
    let tgt = report
        .final_eval_acc("target_test")
        .ok_or_else(|| Failure::data("missing target_test evaluation"))?;
    Ok((src, tgt))
}

pub fn cmd_run(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.no_dda && cfg.assert_margins {
        return Err(Failure::usage(
            "--assert-margins needs the DDA branch; drop --no-dda",
        ));
    }
    let _lock = OutDirLock::acquire(&cfg.out)?;
    let exp = experiment::build(cfg)?;
    let tcfg = cfg.transform_config();
    let train_cfg = TrainConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        learning_rate: cfg.learning_rate,
        seed: derive_seed(cfg.seed, &[tags::TRAIN]),
        augment: cfg.augment,
    };
    let clock = SystemClock::new();

    // Baseline: plain supervised training on the prepared source; raw
    // evaluation. No statistics exist on this path at all.
    let baseline_evals = [
        EvalSpec {
            name: "source_test",
            data: &exp.source_test,
            mode: EvalMode::Raw,
        },
        EvalSpec {
            name: "target_test",
            data: &exp.target_test,
            mode: EvalMode::Raw,
        },
    ];
    println!(
        "training baseline ({:?}, {} epochs, {} samples)...",
        cfg.classifier,
        cfg.epochs,
        exp.source_train.len()
    );
    let (model_base, report_base) = train(
        cfg.classifier,
        &exp.source_train,
        None,
        &train_cfg,
        &baseline_evals,
        &clock,
    )?;
    write_file(
        &cfg.out.join("report_baseline.csv"),
        train_report_csv(&report_base).as_bytes(),
    )?;
    checkpoint::write(&model_base, &cfg.out.join("checkpoint_baseline.bin"))
        .ctx("checkpoint_baseline.bin")?;
    let (base_src, base_tgt) = final_accs(&report_base)?;
    println!(
        "baseline: source test {:.4}, target test {:.4}",
        base_src, base_tgt
    );

    let mut summary = Summary::default();
    summary.push("baseline_source_test_acc", base_src);
    summary.push("baseline_target_test_acc", base_tgt);

    let mut margin_failures: Vec<String> = Vec::new();

    if !cfg.no_dda {
        let (stats_source, stats_target) = super::compute_stats(cfg, &exp)?;
        write_file(
            &cfg.out.join("stats_source.bin"),
            &stats_cache::encode(&stats_source),
        )?;
        write_file(
            &cfg.out.join("stats_target.bin"),
            &stats_cache::encode(&stats_target),
        )?;

        let dda_evals = [
            EvalSpec {
                name: "source_test",
                data: &exp.source_test,
                mode: EvalMode::Dda {
                    own_mean_pixel: stats_source.mean_pixel(),
                    other_stats: &stats_target,
                    cfg: tcfg.clone(),
                },
            },
            EvalSpec {
                name: "target_test",
                data: &exp.target_test,
                mode: EvalMode::Dda {
                    own_mean_pixel: stats_target.mean_pixel(),
                    other_stats: &stats_source,
                    cfg: tcfg.clone(),
                },
            },
        ];
        let wiring = DdaTraining {
            target_stats: &stats_target,
            cfg: tcfg.clone(),
        };
        println!("training with DDA...");
        let (model_dda, report_dda) = train(
            cfg.classifier,
            &exp.source_train,
            Some(&wiring),
            &train_cfg,
            &dda_evals,
            &clock,
        )?;
        write_file(
            &cfg.out.join("report_dda.csv"),
            train_report_csv(&report_dda).as_bytes(),
        )?;
        checkpoint::write(&model_dda, &cfg.out.join("checkpoint_dda.bin"))
            .ctx("checkpoint_dda.bin")?;
        let (dda_src, dda_tgt) = final_accs(&report_dda)?;
        let margin_pp = (dda_tgt - base_tgt) * 100.0;
        let fidelity_pp = (dda_src - base_src) * 100.0;
        println!(
            "dda:      source test {:.4}, target test {:.4} (margin {:+.1}pp)",
            dda_src, dda_tgt, margin_pp
        );

        summary.push("dda_source_test_acc", dda_src);
        summary.push("dda_target_test_acc", dda_tgt);
        summary.push("target_margin_pp", margin_pp);
        summary.push("source_fidelity_pp", fidelity_pp);

        let art = pca::diagnostics(cfg, &exp, (&stats_source, &stats_target))?;
        pca::write_artifacts(cfg, &art)?;
        println!(
            "domain gap: {} before, {} after",
            art.gap_before, art.gap_after
        );
        summary.push("domain_gap_before", art.gap_before);
        summary.push("domain_gap_after", art.gap_after);
        summary.push("baseline_dropped", report_base.dropped);
        summary.push("dda_dropped", report_dda.dropped);
        summary.push("dda_transforms", report_dda.dda_transforms);
        summary.push("pca_dropped_after", art.dropped_after);
        summary.push("prep_dropped", exp.prep_dropped);

        if margin_pp < TARGET_MARGIN_PP {
            margin_failures.push(format!(
                "target margin {margin_pp:+.2}pp below the {TARGET_MARGIN_PP}pp requirement"
            ));
        }
        if fidelity_pp.abs() > SOURCE_FIDELITY_PP {
            margin_failures.push(format!(
                "source fidelity {fidelity_pp:+.2}pp outside ±{SOURCE_FIDELITY_PP}pp"
            ));
        }
        if !(art.gap_after < art.gap_before) {
            margin_failures.push(format!(
                "domain gap did not shrink ({} -> {})",
                art.gap_before, art.gap_after
            ));
        }
    } else {
        summary.push("baseline_dropped", report_base.dropped);
        summary.push("prep_dropped", exp.prep_dropped);
    }

    write_file(&cfg.out.join("summary.csv"), summary.to_csv().as_bytes())?;
    for (k, v) in summary.rows() {
        println!("summary {k} = {v}");
    }

    if cfg.assert_margins && !margin_failures.is_empty() {
        return Err(Failure::margin(margin_failures.join("; ")));
    }
    Ok(())
}
