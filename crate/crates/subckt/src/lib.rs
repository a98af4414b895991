//! Filesystem, process and network plumbing around `subckt-core`: the
//! sandboxed script runner, chat providers, pipeline configuration, corpus
//! files and the `subckt` command line.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod provider;
pub mod sandbox;
pub mod store;

pub use sandbox::SubprocessRunner;
