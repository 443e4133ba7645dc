//! File formats, reports, dumps, benchmarks and the command-line front end
//! for [`gbsk_core`].

pub mod bench;
pub mod cli;
pub mod dump;
pub mod io;
pub mod report;

pub use gbsk_core as core;
