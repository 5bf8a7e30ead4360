//! Non-stationary fractal functions generated by sequences of
//! Read-Bajraktarević operators: exact pointwise backward trajectories,
//! set-valued IFS counterparts, Hausdorff and `L^p` contraction diagnostics,
//! and a catalog of named operators with independent fixed-point oracles.
//!
//! Numerical code is generic over [`real::Real`] (`f32` or `f64`); the
//! aliases below fix the scalar type.

pub mod catalog;
pub mod cli;
pub mod error;
pub mod func;
pub mod ifs;
pub mod lp;
pub mod rb_operator;
pub mod real;
pub mod trajectory;

pub use error::{Error, Result};
pub use real::Real;

pub type AffineMap = func::AffineMap1D<f64>;
pub type PartitionF64 = func::Partition<f64>;
pub type ScalarFunc64 = func::ScalarFunc<f64>;
pub type RbOperator64 = rb_operator::RbOperator<f64>;
pub type Schedule64 = trajectory::OperatorSchedule<f64>;
pub type Sampled64 = trajectory::SampledFunction<f64>;
pub type PointCloud64 = ifs::PointCloud2D<f64>;
pub type SetIfs64 = ifs::SetIfs<f64>;

pub type ScalarFunc32 = func::ScalarFunc<f32>;
pub type RbOperator32 = rb_operator::RbOperator<f32>;
pub type Schedule32 = trajectory::OperatorSchedule<f32>;
