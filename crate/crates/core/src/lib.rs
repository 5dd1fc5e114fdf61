//! Joint law of the first hitting time and hitting place of a sphere by
//! `d`-dimensional Brownian motion, with and without constant drift.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fpt;
pub mod inversion;
pub mod jointdist;
pub mod mcverify;
pub mod quadrature;
mod series;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use series::{SeriesControl, SeriesValue};
