#![cfg_attr(not(test), no_std)]
//! Natural preserving transform (NPT) watermarking on grayscale images.
//!
//! The NPT operator `psi(alpha) = alpha*I + (1 - alpha)*H` blends the identity
//! with the orthonormal discrete Hartley matrix `H`. Applied on both sides of
//! an image it spreads local content over the whole frame while staying
//! visually close to the original for `alpha` near 1. This crate embeds a logo
//! by replacing part of the host, transforming, and restoring the replaced
//! part; extraction solves the resulting linear system.
//!
//! Modules:
//!
//! - [`transforms`] builds `H` and `psi`, applies the two-sided transform and
//!   inverts it directly or with a Neumann series.
//! - [`embed`] implements bottom-rows, top-left and optimum-block placements.
//! - [`extract`] holds the non-blind and quasi-blind least-squares extractors.
//! - [`metrics`] and [`attacks`] measure quality and degrade images;
//!   [`sweep`] ties them into robustness tables.
//! - [`face`] is the Hartley-coefficient nearest-neighbour face matcher.
//!
//! Everything is `no_std` + `alloc`; file formats and the CLI live in the
//! `nptmark` crate.

extern crate alloc;

pub mod attacks;
pub mod embed;
mod error;
pub mod extract;
pub mod face;
pub mod image;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod sweep;
pub mod synthetic;
pub mod transforms;

pub use error::{Error, Result};
pub use image::{GrayImage, SampleDepth};
pub use matrix::Matrix;
