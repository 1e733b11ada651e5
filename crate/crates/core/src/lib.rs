//! eBWT positional clustering of DNA read collections.
//!
//! The crate builds the generalized suffix array, extended Burrows-Wheeler
//! transform and LCP array of one or two read samples, finds positional
//! clusters between LCP local minima, and calls SNPs between the samples
//! without a reference. A uniform-error read simulator and a ground-truth
//! validator close the loop.

pub mod cli;
pub mod clustering;
pub mod error;
pub mod index;
pub mod sequences;
pub mod simulate;
pub mod snpcall;
pub mod stats;
pub mod validate;

pub use error::{Error, Result};
