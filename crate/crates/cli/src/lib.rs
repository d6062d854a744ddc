//! File formats, experiment drivers and the `dmpest` command line on top of
//! [`dmpest_core`].

pub mod cli;
pub mod experiments;
pub mod format;
pub mod output;
pub mod parallel;

pub use dmpest_core as core;
