//! File formats, bundled datasets, report rendering and the command-line
//! interface for the `ordscore-core` modeling library.

pub mod cli;
pub mod csvio;
pub mod datasets;
pub mod render;
pub mod spec;
