//! Left inverse hulls, partial actions on semilattices and their K-theory data.

#[cfg(feature = "cli")]
pub mod cli;
pub mod hull;
pub mod ktheory;
pub mod orbits;
pub mod paction;
pub mod presentation;
pub mod report;
pub mod smashlab;
pub mod tiling;
