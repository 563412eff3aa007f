//! `dda stats`: compute and cache both domains' statistics.

use crate::config::ExperimentConfig;
use crate::experiment;
use crate::failure::Result;
use crate::lock::OutDirLock;
use crate::stats_cache;

use super::{compute_stats, sha256_hex, write_file};

pub fn cmd_stats(cfg: &ExperimentConfig) -> Result<()> {
    let _lock = OutDirLock::acquire(&cfg.out)?;
    let exp = experiment::build(cfg)?;
    let (source, target) = compute_stats(cfg, &exp)?;

    for (name, stats) in [("stats_source.bin", &source), ("stats_target.bin", &target)] {
        let path = cfg.out.join(name);
        let bytes = stats_cache::encode(stats);
        write_file(&path, &bytes)?;
        let (h, w, c) = stats.geometry();
        println!(
            "{name}: geometry {h}x{w}x{c}, samples {}, sha256 {}",
            stats.sample_count(),
            sha256_hex(&bytes)
        );
    }
    if exp.prep_dropped > 0 {
        println!("note: {} images dropped as degenerate during preparation", exp.prep_dropped);
    }
    Ok(())
}
