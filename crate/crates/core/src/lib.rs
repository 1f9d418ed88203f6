//! Exact-arithmetic laboratory for two bin packing problems: the price of
//! clustering (offline) and online bin packing with delays.
//!
//! Sizes are exact rationals throughout ([`size::Size`]). The crate provides
//! FF/FFD with structural traces and an exact optimum ([`packing`]), the
//! weight functions used to bound FFD and clustered solutions ([`weights`]),
//! worst-case clustered constructions with certificates ([`construction`],
//! [`clustering`]), the phase-based online algorithm for packing with delays
//! with a brute-force offline optimum ([`delays`]), and a line-based instance
//! format ([`format`]).

pub mod clustering;
pub mod construction;
pub mod delays;
pub mod error;
pub mod format;
pub mod packing;
pub mod rng;
pub mod size;
pub mod weights;

pub use error::{Error, Result};
pub use size::{Size, Q};
