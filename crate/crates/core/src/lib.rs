//! Quality-diversity search over voxelized building masses.
//!
//! A design is an 11 x 14 grid of height levels ([`phenotype::HeightGrid`]).
//! Five genome encodings ([`encodings`]) map genomes to grids; MAP-Elites
//! ([`qd`]) fills an archive binned by built area and number of buildings,
//! optionally with several encodings competing in one archive. [`metrics`]
//! scores archives and compares runs, [`experiment`] runs replicated
//! experiments and hyperparameter sweeps from config files.

pub mod encodings;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod phenotype;
pub mod qd;

pub use error::{Error, Result};
