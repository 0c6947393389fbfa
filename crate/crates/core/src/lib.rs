//! Guided slow light in a nanofiber surrounded by an electromagnetically
//! induced transparency medium.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bpm;
pub mod config;
pub mod consistency;
pub mod dressed;
pub mod fiber;
pub mod groupvel;
pub mod medium;
pub mod numeric;
pub mod output;
pub mod specfun;
