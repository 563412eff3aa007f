//! Finite-difference gradient oracle and training-harness contract tests.

mod common;

use common::*;
use dda_core::classifier::{
    evaluate, forward, loss_and_grad, train, Arch, ClassifierKind, DdaTraining, EvalMode,
    EvalSpec, ModelParams, NullClock, TrainConfig,
};
use dda_core::dataset::{Dataset, DomainTag};
use dda_core::error::Error;
use dda_core::image::ImageTensor;
use dda_core::synth::generate_digits;
use dda_core::transform::{renormalize, DomainStats, TransformConfig};
use dda_core::NUM_CLASSES;
use rand::Rng;

fn rand_image(rng: &mut rand_chacha::ChaCha8Rng, h: usize, w: usize, c: usize) -> ImageTensor {
    let planes = (0..c).map(|_| rand_plane(rng, h, w)).collect();
    ImageTensor::new(planes).unwrap()
}

/// Independent loss definition for the finite-difference oracle: forward()
/// plus the textbook mean cross-entropy.
fn loss_by_forward(m: &ModelParams, batch: &[&ImageTensor], labels: &[u8]) -> f64 {
    let probs = forward(m, batch).unwrap();
    let mut loss = 0.0;
    for (row, &y) in probs.iter().zip(labels) {
        loss -= row[y as usize].ln();
    }
    loss / batch.len() as f64
}

fn check_gradients(kind: ClassifierKind, h: usize, w: usize, c: usize, seed: u64) {
    let arch = Arch::new(kind, h, w, c, NUM_CLASSES).unwrap();
    let params = ModelParams::init(arch, seed);
    let mut rng = seeded(seed ^ 0xF00D);
    let images: Vec<ImageTensor> = (0..4).map(|_| rand_image(&mut rng, h, w, c)).collect();
    let batch: Vec<&ImageTensor> = images.iter().collect();
    let labels: Vec<u8> = (0..4).map(|_| rng.gen_range(0..NUM_CLASSES as u8)).collect();

    let (_, _, grad) = loss_and_grad(&params, &batch, &labels).unwrap();
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for spec in arch.tensor_specs() {
        for i in spec.offset..spec.offset + spec.len() {
            let mut theta = params.theta().to_vec();
            theta[i] += eps;
            let plus = loss_by_forward(
                &ModelParams::from_theta(arch, theta.clone()).unwrap(),
                &batch,
                &labels,
            );
            theta[i] -= 2.0 * eps;
            let minus = loss_by_forward(
                &ModelParams::from_theta(arch, theta).unwrap(),
                &batch,
                &labels,
            );
            let fd = (plus - minus) / (2.0 * eps);
            let g = grad[i];
            let denom = fd.abs().max(g.abs());
            let rel = if denom < 1e-8 {
                0.0
            } else {
                (fd - g).abs() / denom
            };
            worst = worst.max(rel);
            assert!(
                rel < 1e-4,
                "{} coord {}: analytic {g}, finite-diff {fd}, rel {rel}",
                spec.name,
                i - spec.offset
            );
        }
    }
    assert!(worst < 1e-4);
}

#[test]
fn logistic_gradients_match_finite_differences() {
    check_gradients(ClassifierKind::Logistic, 6, 6, 3, 11);
}

#[test]
fn tiny_cnn_gradients_match_finite_differences() {
    check_gradients(ClassifierKind::TinyCnn, 16, 16, 3, 12);
}

fn prepared_digit_set(per_class: usize, seed: u64, domain: DomainTag) -> Dataset {
    let raw = generate_digits(per_class, 16, 16, seed, "digits16");
    let rgb = dda_core::dataset::to_rgb(&raw).unwrap();
    let images = rgb
        .images()
        .iter()
        .map(|img| renormalize(img).unwrap())
        .collect();
    Dataset::new(images, rgb.labels().to_vec(), domain, "digits16").unwrap()
}

#[test]
fn training_reduces_loss_and_replays_bitwise() {
    let source = prepared_digit_set(8, 21, DomainTag::Source);
    let cfg = TrainConfig {
        epochs: 5,
        batch_size: 16,
        seed: 3,
        ..TrainConfig::default()
    };
    let clock = NullClock;
    let (params_a, report_a) =
        train(ClassifierKind::TinyCnn, &source, None, &cfg, &[], &clock).unwrap();
    assert!(report_a.epochs[4].train_loss < report_a.epochs[0].train_loss);
    assert_eq!(report_a.dda_transforms, 0);
    assert_eq!(report_a.dropped, 0);

    let (params_b, report_b) =
        train(ClassifierKind::TinyCnn, &source, None, &cfg, &[], &clock).unwrap();
    assert_eq!(params_a.theta(), params_b.theta());
    assert_eq!(report_a, report_b);
}

#[test]
fn dda_training_touches_stats_and_plain_training_does_not() {
    let source = prepared_digit_set(4, 22, DomainTag::Source);
    let target = prepared_digit_set(4, 23, DomainTag::Target);
    let stats = DomainStats::compute(&target, 7).unwrap();
    let cfg = TrainConfig {
        epochs: 2,
        batch_size: 8,
        seed: 5,
        ..TrainConfig::default()
    };
    let wiring = DdaTraining {
        target_stats: &stats,
        cfg: TransformConfig::default(),
    };
    let (_, with_dda) = train(
        ClassifierKind::Logistic,
        &source,
        Some(&wiring),
        &cfg,
        &[],
        &NullClock,
    )
    .unwrap();
    assert_eq!(with_dda.dda_transforms, (source.len() * 2) as u64);

    let (_, without) =
        train(ClassifierKind::Logistic, &source, None, &cfg, &[], &NullClock).unwrap();
    assert_eq!(without.dda_transforms, 0);
}

#[test]
fn training_rejects_miswired_domains() {
    let source = prepared_digit_set(2, 24, DomainTag::Source);
    let also_source = prepared_digit_set(2, 25, DomainTag::Source);
    let stats = DomainStats::compute(&also_source, 1).unwrap();
    let wiring = DdaTraining {
        target_stats: &stats,
        cfg: TransformConfig::default(),
    };
    let err = train(
        ClassifierKind::Logistic,
        &source,
        Some(&wiring),
        &TrainConfig {
            epochs: 1,
            batch_size: 8,
            seed: 0,
            ..TrainConfig::default()
        },
        &[],
        &NullClock,
    )
    .unwrap_err();
    assert!(matches!(
        err,
        Error::DomainMismatch {
            expected: DomainTag::Target,
            ..
        }
    ));

    // Target-tagged training data is rejected outright.
    let target = prepared_digit_set(2, 26, DomainTag::Target);
    let err = train(
        ClassifierKind::Logistic,
        &target,
        None,
        &TrainConfig::default(),
        &[],
        &NullClock,
    )
    .unwrap_err();
    assert!(matches!(
        err,
        Error::DomainMismatch {
            expected: DomainTag::Source,
            ..
        }
    ));
}

#[test]
fn untrained_zero_model_scores_chance_on_balanced_data() {
    let data = prepared_digit_set(5, 27, DomainTag::Source);
    let arch = Arch::new(ClassifierKind::TinyCnn, 16, 16, 3, NUM_CLASSES).unwrap();
    let m = ModelParams::from_theta(arch, vec![0.0; arch.param_len()]).unwrap();
    let acc = evaluate(&m, &data, &EvalMode::Raw).unwrap();
    assert_eq!(acc, 1.0 / NUM_CLASSES as f64);
}

#[test]
fn memorizing_model_scores_near_one_on_its_training_data() {
    let source = prepared_digit_set(2, 28, DomainTag::Source);
    let cfg = TrainConfig {
        epochs: 60,
        batch_size: 4,
        learning_rate: 3e-3,
        seed: 1,
        augment: false,
    };
    let (params, _) =
        train(ClassifierKind::Logistic, &source, None, &cfg, &[], &NullClock).unwrap();
    let acc = evaluate(&params, &source, &EvalMode::Raw).unwrap();
    assert!(acc >= 0.95, "overfit accuracy only {acc}");
}

#[test]
fn evaluation_modes_enforce_reciprocity() {
    let source = prepared_digit_set(2, 29, DomainTag::Source);
    let target = prepared_digit_set(2, 30, DomainTag::Target);
    let target_stats = DomainStats::compute(&target, 2).unwrap();
    let arch = Arch::new(ClassifierKind::Logistic, 16, 16, 3, NUM_CLASSES).unwrap();
    let m = ModelParams::init(arch, 0);

    // Target data needs *source* stats; handing it target stats must fail.
    let err = evaluate(
        &m,
        &target,
        &EvalMode::Dda {
            own_mean_pixel: &[0.1, 0.1, 0.1],
            other_stats: &target_stats,
            cfg: TransformConfig::default(),
        },
    )
    .unwrap_err();
    assert!(matches!(err, Error::DomainMismatch { .. }));

    // Source data against target stats is the legitimate reciprocal wiring.
    evaluate(
        &m,
        &source,
        &EvalMode::Dda {
            own_mean_pixel: &[0.1, 0.1, 0.1],
            other_stats: &target_stats,
            cfg: TransformConfig::default(),
        },
    )
    .unwrap();
}

#[test]
fn augmentation_never_alters_labels_or_pairing() {
    let source = prepared_digit_set(3, 31, DomainTag::Source);
    let checksum = source.label_checksum();
    let cfg = TrainConfig {
        epochs: 1,
        batch_size: 8,
        seed: 9,
        ..TrainConfig::default()
    };
    let evals = [EvalSpec {
        name: "train",
        data: &source,
        mode: EvalMode::Raw,
    }];
    let (_, report) =
        train(ClassifierKind::Logistic, &source, None, &cfg, &evals, &NullClock).unwrap();
    assert_eq!(source.label_checksum(), checksum);
    assert_eq!(report.eval_names, vec!["train".to_string()]);
    assert_eq!(report.epochs[0].eval_accs.len(), 1);
}
