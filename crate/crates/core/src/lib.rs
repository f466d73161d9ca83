//! Pseudospectral building blocks for the stochastic generalized
//! Camassa-Holm equation on a periodic domain.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod bump;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod exec;
pub mod fft;
pub mod field;
pub mod fit;
pub mod grid;
pub mod instability;
pub mod integrate;
pub mod noise;
pub mod norms;
pub mod product;
pub mod spectral;

pub use error::{Error, Result};
pub use field::Field;
pub use grid::{Grid, GridSpec};
