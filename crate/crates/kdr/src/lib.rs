//! Std companion to `kdr-core`: CSV and JSON file formats, a thread-pool
//! [`Executor`](kdr_core::pipeline::Executor), run documents that can be
//! replayed, and the `kdr` command line.

pub mod cli;
pub mod doc;
pub mod error;
pub mod exec;
pub mod io;
pub mod resources;

pub use error::Error;
pub use kdr_core;
