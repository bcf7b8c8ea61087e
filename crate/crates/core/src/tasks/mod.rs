//! Experiments built on the network: input streams, MNIST ingestion and
//! pipeline, analysis metrics, the linear readout and the regime sweep.

pub mod analysis;
pub mod mnist;
pub mod pipeline;
pub mod readout;
pub mod stream;
pub mod sweep;
pub mod waves;
