//! Littlewood-Paley blocks, paraproducts and generalized Taylor remainders
//! on the periodic torus.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod besov;
pub mod calculus;
pub mod error;
pub mod paraproduct;
pub mod spectral;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
