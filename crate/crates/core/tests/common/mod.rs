//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

pub mod dsl;
pub mod gradients;
pub mod oracles;
