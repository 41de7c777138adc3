// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod beta;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod inverse_transform;
pub mod moments;
pub mod specfun;

pub use beta::Beta;
pub use error::{Error, Result};
