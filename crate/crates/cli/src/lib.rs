//! Configuration, structure JSON and report plumbing behind the
//! `gencontact` binary.

pub mod config;
pub mod error;
pub mod structure;

pub use config::{apply_pipeline, load_config, parse_config, Job, RunConfig, Step, Tol};
pub use error::CliError;
pub use structure::{read_structure, write_structure, StructureJson};
