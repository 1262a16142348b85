#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub type Vec3 = nalgebra::Vector3<f64>;

pub mod analysis;
pub mod cli;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod hemodynamics;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
