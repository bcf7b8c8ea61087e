//! Self-organizing multi-layer spiking networks.
//!
//! Each layer is a sheet of leaky integrate-and-fire neurons with a
//! homeostatic threshold and a local-excitation / distal-inhibition kernel,
//! which lets traveling activity waves emerge from noise. Layers are stacked
//! through weight matrices that learn by a Hebbian STDP rule, with optional
//! competition rules on each layer's input and output. The whole stack is one
//! dynamical system integrated with fixed-step RK4.
//!
//! * [`layer`]: neuron dynamics and time stepping
//! * [`topology`]: geometry and intra-layer coupling
//! * [`plasticity`]: weights, STDP, competition, activation
//! * [`network`]: the multi-layer step and run loop
//! * [`tasks`]: MNIST pipeline, analysis metrics, readout, regime sweep
//! * [`config`]: JSON experiment files

pub mod config;
pub mod error;
pub mod layer;
pub mod matrix;
pub mod network;
pub mod par;
pub mod plasticity;
pub mod presets;
pub mod record;
pub mod rng;
pub mod tasks;
pub mod topology;

pub use error::{Result, SnnError};
pub use layer::{LayerState, LifParams};
pub use network::{Network, NetworkConfig, NetworkState};
pub use plasticity::{Competition, PlasticityParams, WeightMatrix};
pub use record::SimulationRecord;
pub use topology::{AdjacencyMatrix, KernelParams, LayerGeometry};
