//! k-times bin packing (kBP): every item is placed into `k` distinct bins.
//!
//! The crate is `no_std` and only needs an allocator. Sizes are stored as
//! integer multiples of a common unit so that every capacity test is exact.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod configlp;
pub mod error;
pub mod exact;
pub mod firstfit;
pub mod gen;
pub mod heuristics;
pub mod kopt;
pub mod model;
pub mod simplex;

pub use error::{Error, Result};
pub use model::{
    replicate, size_classes, validate, volume_of, Bin, Instance, ItemCopy, KPacking, Rational,
    SizeClasses, Violation,
};
