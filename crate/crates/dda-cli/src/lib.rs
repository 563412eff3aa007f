//! IO companion to `dda-core`: binary file formats (IDX, statistics cache,
//! model checkpoint), dataset directories, the experiment configuration, and
//! the subcommand implementations behind the `dda` binary.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod experiment;
pub mod failure;
pub mod idx;
pub mod imgdir;
pub mod lock;
pub mod pmap;
pub mod report;
pub mod stats_cache;
pub mod svg;

pub use failure::{Failure, FailureKind};
