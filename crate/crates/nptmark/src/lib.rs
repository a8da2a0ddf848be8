//! File formats and the `nptmark` command line on top of `nptmark-core`.
//!
//! Images are read from binary PGM (`P5`, maxval 255), grayscale PFM (`Pf`)
//! or PNG, chosen by the file's magic bytes. Output format follows the file
//! extension: `.pgm` rounds to 8 bits, `.pfm` keeps `f32` samples. Every
//! output is written to a temporary file and renamed into place.

pub mod cli;
pub mod error;
pub mod gallery;
pub mod io;
pub mod pnm;
pub mod sidecar;
pub mod sweep;

pub use error::{Error, Result};
