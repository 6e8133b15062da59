//! File formats, parameter sweeps, figure presets and the `spinsurf` command line.

pub mod cli;
pub mod error;
pub mod figures;
pub mod io;
pub mod sweep;

pub use error::{Error, Result};
pub use figures::{compare_frustration, figure, figure_panels, FigureOptions, FrustrationTable};
pub use io::{load_network, network_hash, parse_network, save_network, validation_report};
pub use sweep::{parse_grid, run_sweep, Observable, Parameter, Source, SweepSpec, SweepTable};
