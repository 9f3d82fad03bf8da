//! Configuration, CSV tables, VTK snapshots and the command-line driver.

pub mod cli;
pub mod config;
pub mod csv;
pub mod vtk;

pub use config::{parse_config, Command, ConfigDoc, RunConfig};
pub use csv::{convergence_csv, format_sci, write_convergence_csv, CSV_HEADER};
pub use vtk::{vtk_string, write_vtk};
