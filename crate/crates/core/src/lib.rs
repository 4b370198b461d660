// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autocorr;
pub mod energy;
pub mod error;
pub mod kernels;
pub mod minimize;
pub mod par;
pub mod patterns;
pub mod quad;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
