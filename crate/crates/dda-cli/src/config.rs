//! Experiment configuration: a plain-text key=value file with CLI-flag
//! overrides. The seed is mandatory — nothing in the pipeline falls back to
//! wall-clock entropy.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dda_core::classifier::ClassifierKind;

use crate::failure::{Failure, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    /// Procedural digit synthesis (the self-contained default).
    Synth,
    /// Real IDX files (e.g. MNIST) for train and test partitions.
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    /// Blend the source digits with the procedural patch bank.
    Synth,
    /// Real image directories (e.g. MNIST-M) with manifests.
    Dir {
        train_dir: PathBuf,
        train_manifest: PathBuf,
        test_dir: PathBuf,
        test_manifest: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub source: SourceSpec,
    pub target: TargetSpec,
    pub image_size: usize,
    /// Synth source pool size per class before the class-balanced subsample.
    pub source_pool_per_class: usize,
    /// 0 means "use everything" (set by --full-scale).
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub patch_count: usize,
    pub pixels_per_draw: usize,
    pub renormalize: bool,
    pub center_kernels: bool,
    pub classifier: ClassifierKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub augment: bool,
    pub pca_per_domain: usize,
    pub transform_count: usize,
    pub no_dda: bool,
    pub assert_margins: bool,
    pub full_scale: bool,
}

/// Flag-level overrides applied on top of the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub no_dda: bool,
    pub assert_margins: bool,
    pub full_scale: bool,
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Failure::usage(format!(
            "{key}: expected true or false, got {value:?}"
        ))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Failure::usage(format!("{key}: cannot parse {value:?}")))
}

impl ExperimentConfig {
    /// Parses the key=value text; `base_dir` anchors relative paths.
    pub fn parse(text: &str, base_dir: &Path, overrides: &Overrides) -> Result<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Failure::usage(format!("config line {}: expected key = value", lineno + 1))
            })?;
            kv.insert(key.trim().to_string(), value.trim().to_string());
        }

        let known = [
            "seed",
            "out",
            "source",
            "source_train_images",
            "source_train_labels",
            "source_test_images",
            "source_test_labels",
            "target",
            "target_train_dir",
            "target_train_manifest",
            "target_test_dir",
            "target_test_manifest",
            "image_size",
            "source_pool_per_class",
            "train_per_class",
            "test_per_class",
            "patch_count",
            "pixels_per_draw",
            "renormalize",
            "center_kernels",
            "classifier",
            "epochs",
            "batch_size",
            "learning_rate",
            "augment",
            "pca_per_domain",
            "transform_count",
        ];
        for key in kv.keys() {
            if !known.contains(&key.as_str()) {
                return Err(Failure::usage(format!("unknown config key {key:?}")));
            }
        }

        let get = |key: &str| kv.get(key).map(String::as_str);
        let path_of = |value: &str| -> PathBuf {
            let p = PathBuf::from(value);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        let req_path = |key: &str| -> Result<PathBuf> {
            get(key)
                .map(path_of)
                .ok_or_else(|| Failure::usage(format!("source/target mode requires {key}")))
        };

        let source = match get("source").unwrap_or("synth") {
            "synth" => SourceSpec::Synth,
            "idx" => SourceSpec::Idx {
                train_images: req_path("source_train_images")?,
                train_labels: req_path("source_train_labels")?,
                test_images: req_path("source_test_images")?,
                test_labels: req_path("source_test_labels")?,
            },
            other => return Err(Failure::usage(format!("source: unknown mode {other:?}"))),
        };
        let target = match get("target").unwrap_or("synth") {
            "synth" => TargetSpec::Synth,
            "dir" => TargetSpec::Dir {
                train_dir: req_path("target_train_dir")?,
                train_manifest: req_path("target_train_manifest")?,
                test_dir: req_path("target_test_dir")?,
                test_manifest: req_path("target_test_manifest")?,
            },
            other => return Err(Failure::usage(format!("target: unknown mode {other:?}"))),
        };

        let seed = match (overrides.seed, get("seed")) {
            (Some(s), _) => s,
            (None, Some(v)) => parse_num("seed", v)?,
            (None, None) => {
                return Err(Failure::usage(
                    "seed is mandatory: set it in the config or pass --seed",
                ))
            }
        };
        let out = match (&overrides.out, get("out")) {
            (Some(o), _) => o.clone(),
            (None, Some(v)) => path_of(v),
            (None, None) => {
                return Err(Failure::usage(
                    "output directory is mandatory: set out= or pass --out",
                ))
            }
        };

        let classifier = match get("classifier").unwrap_or("tiny_cnn") {
            "tiny_cnn" => ClassifierKind::TinyCnn,
            "logistic" => ClassifierKind::Logistic,
            other => {
                return Err(Failure::usage(format!(
                    "classifier: expected tiny_cnn or logistic, got {other:?}"
                )))
            }
        };

        let mut cfg = ExperimentConfig {
            seed,
            out,
            source,
            target,
            image_size: parse_num("image_size", get("image_size").unwrap_or("28"))?,
            source_pool_per_class: parse_num(
                "source_pool_per_class",
                get("source_pool_per_class").unwrap_or("250"),
            )?,
            train_per_class: parse_num("train_per_class", get("train_per_class").unwrap_or("200"))?,
            test_per_class: parse_num("test_per_class", get("test_per_class").unwrap_or("50"))?,
            patch_count: parse_num("patch_count", get("patch_count").unwrap_or("64"))?,
            pixels_per_draw: parse_num("pixels_per_draw", get("pixels_per_draw").unwrap_or("1"))?,
            renormalize: parse_bool("renormalize", get("renormalize").unwrap_or("true"))?,
            center_kernels: parse_bool("center_kernels", get("center_kernels").unwrap_or("true"))?,
            classifier,
            epochs: parse_num("epochs", get("epochs").unwrap_or("15"))?,
            batch_size: parse_num("batch_size", get("batch_size").unwrap_or("64"))?,
            learning_rate: parse_num("learning_rate", get("learning_rate").unwrap_or("1e-3"))?,
            augment: parse_bool("augment", get("augment").unwrap_or("true"))?,
            pca_per_domain: parse_num("pca_per_domain", get("pca_per_domain").unwrap_or("2000"))?,
            transform_count: parse_num("transform_count", get("transform_count").unwrap_or("8"))?,
            no_dda: overrides.no_dda,
            assert_margins: overrides.assert_margins,
            full_scale: overrides.full_scale,
        };
        if cfg.full_scale {
            cfg.epochs = 100;
            cfg.batch_size = 128;
            cfg.train_per_class = 0;
            cfg.test_per_class = 0;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, overrides)
    }

    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Failure::usage("epochs and batch_size must be positive"));
        }
        if self.pixels_per_draw == 0 {
            return Err(Failure::usage("pixels_per_draw must be at least 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Failure::usage("learning_rate must be positive"));
        }
        if self.image_size < 16 && self.classifier == ClassifierKind::TinyCnn {
            return Err(Failure::usage("tiny_cnn needs image_size >= 16"));
        }
        if matches!(self.source, SourceSpec::Synth)
            && self.train_per_class > self.source_pool_per_class
        {
            return Err(Failure::usage(
                "train_per_class cannot exceed source_pool_per_class",
            ));
        }
        if self.patch_count == 0 {
            return Err(Failure::usage("patch_count must be at least 1"));
        }
        let mut missing = Vec::new();
        if let SourceSpec::Idx {
            train_images,
            train_labels,
            test_images,
            test_labels,
        } = &self.source
        {
            for p in [train_images, train_labels, test_images, test_labels] {
                if !p.is_file() {
                    missing.push(p.display().to_string());
                }
            }
        }
        if let TargetSpec::Dir {
            train_dir,
            train_manifest,
            test_dir,
            test_manifest,
        } = &self.target
        {
            for p in [train_manifest, test_manifest] {
                if !p.is_file() {
                    missing.push(p.display().to_string());
                }
            }
            for p in [train_dir, test_dir] {
                if !p.is_dir() {
                    missing.push(p.display().to_string());
                }
            }
        }
        if !missing.is_empty() {
            return Err(Failure::usage(format!(
                "referenced paths do not exist: {}",
                missing.join(", ")
            )));
        }
        Ok(())
    }

    /// The TransformConfig every pipeline stage shares.
    pub fn transform_config(&self) -> dda_core::transform::TransformConfig {
        dda_core::transform::TransformConfig {
            pixels_per_draw: self.pixels_per_draw,
            renormalize: self.renormalize,
            center_kernels: self.center_kernels,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ExperimentConfig::parse(
            "seed = 42\nout = run\n",
            Path::new("/tmp"),
            &Overrides::default(),
        )
        .unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.out, PathBuf::from("/tmp/run"));
        assert_eq!(cfg.epochs, 15);
        assert_eq!(cfg.batch_size, 64);
        assert_eq!(cfg.train_per_class, 200);
        assert_eq!(cfg.classifier, ClassifierKind::TinyCnn);
        assert_eq!(cfg.source, SourceSpec::Synth);
    }

    #[test]
    fn seed_is_mandatory() {
        let err = ExperimentConfig::parse("out = run\n", Path::new("."), &Overrides::default())
            .unwrap_err();
        assert!(err.message.contains("seed"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::parse(
            "seed = 1\nout = run\nsped = 2\n",
            Path::new("."),
            &Overrides::default(),
        )
        .unwrap_err();
        assert!(err.message.contains("sped"));
    }

    #[test]
    fn overrides_beat_the_file() {
        let over = Overrides {
            seed: Some(7),
            out: Some(PathBuf::from("/elsewhere")),
            no_dda: true,
            ..Overrides::default()
        };
        let cfg =
            ExperimentConfig::parse("seed = 1\nout = run\n", Path::new("."), &over).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.out, PathBuf::from("/elsewhere"));
        assert!(cfg.no_dda);
    }

    #[test]
    fn idx_mode_requires_existing_files() {
        let text = "seed = 1\nout = run\nsource = idx\n\
                    source_train_images = a\nsource_train_labels = b\n\
                    source_test_images = c\nsource_test_labels = d\n";
        let err =
            ExperimentConfig::parse(text, Path::new("/nonexistent"), &Overrides::default())
                .unwrap_err();
        assert!(err.message.contains("do not exist"));
    }

    #[test]
    fn full_scale_rewrites_the_protocol() {
        let over = Overrides {
            full_scale: true,
            ..Overrides::default()
        };
        let cfg = ExperimentConfig::parse("seed = 1\nout = run\n", Path::new("."), &over).unwrap();
        assert_eq!(cfg.epochs, 100);
        assert_eq!(cfg.batch_size, 128);
        assert_eq!(cfg.train_per_class, 0);
    }
}
