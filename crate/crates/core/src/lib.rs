//! Linearised single-particle model of a lithium-ion cell: impedance
//! transfer function, OCV slope extraction, series-resistance regression,
//! least-squares estimation of the diffusion time constants, and a
//! collocation time-domain solver for cross-validation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimate;
pub mod fixtures;
pub mod impedance;
pub mod io;
pub mod ocv;
pub mod params;
pub mod r0;
pub mod simplex;
pub mod timedomain;

pub use error::{Error, Result};
