//! Exact computation and verification of multiplicative Nambu structures on
//! four-dimensional real Lie groups.

pub mod symkernel;
pub mod liealg;
pub mod invfields;
pub mod nambu;
pub mod dynamics;
pub mod tables;
pub mod cli;
