#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ao;
pub mod beamforming;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod sdp;
pub mod swarm;
