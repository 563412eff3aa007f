//! Subcommand implementations.

mod idx_info;
mod pca;
mod run;
mod stats;
mod synth;
mod transform;

pub use idx_info::cmd_idx_info;
pub use pca::cmd_pca;
pub use run::cmd_run;
pub use stats::cmd_stats;
pub use synth::cmd_synth;
pub use transform::cmd_transform;

use std::path::Path;
use std::time::Instant;

use dda_core::classifier::Clock;
use dda_core::rng::derive_seed;
use dda_core::transform::DomainStats;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::experiment::{tags, Experiment};
use crate::failure::{Context, Result};

pub(crate) struct SystemClock {
    start: Instant,
}

impl SystemClock {
    pub(crate) fn new() -> Self {
        SystemClock {
            start: Instant::now(),
        }
    }
}

impl Clock for SystemClock {
    fn seconds(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Both domains' statistics from the prepared training partitions, with the
/// derivations every command shares (so caches regenerate byte-identically).
pub(crate) fn compute_stats(
    cfg: &ExperimentConfig,
    exp: &Experiment,
) -> Result<(DomainStats, DomainStats)> {
    let source = DomainStats::compute(
        &exp.source_train,
        derive_seed(cfg.seed, &[tags::STATS_SOURCE]),
    )?;
    let target = DomainStats::compute(
        &exp.target_train,
        derive_seed(cfg.seed, &[tags::STATS_TARGET]),
    )?;
    Ok((source, target))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).ctx(path.display())
}
