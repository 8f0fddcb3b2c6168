//! Generative carving of fragmented image files.
//!
//! A BMP is cut at a fixed fraction of its length, a byte-level model predicts
//! the missing tail, and the prediction is judged two ways: by how closely its
//! byte histogram and rendered pixels match the real tail, and by whether it
//! picks the real tail out of a pool of same-length fragments taken from other
//! files.
//!
//! Modules follow that flow: [`bmp`] and [`fragmenter`] build the dataset,
//! [`predictor`] produces continuations, [`metrics`] and [`stats`] score them,
//! [`matcher`] ranks pools, and [`pipeline`] runs it all from a [`config`].

pub mod bmp;
pub mod config;
pub mod digest;
pub mod fragmenter;
pub mod matcher;
pub mod metrics;
pub mod pipeline;
pub mod predictor;
pub mod report;
pub mod rng;
pub mod stats;
pub mod synth;
