//! Neuroevolution of ant colonies driven by spiking neural networks.
//!
//! Each ant of a colony runs an identical copy of a 36-neuron leaky
//! integrate-and-fire network. The colony forages in a grid world where
//! pheromone diffuses and evaporates; a genetic algorithm tunes the 720
//! synaptic weights and spike delays against the colony's foraging fitness.
//!
//! Module map:
//!
//! - [`snn`]: LIF network with delayed synapses and a fixed topology.
//! - [`world`]: pheromone field, food piles, nest, ant kinematics and events.
//! - [`embodiment`]: sensor encoding, action decoding, per-ant spike logs.
//! - [`evolution`]: genetic operators over [`Genome`]s.
//! - [`fitness`]: colony fitness accumulation.
//! - [`baseline`]: rule-driven reference colony.
//! - [`analysis`]: spike binning, correlations, trend regressions, trial stats.
//! - [`orchestrator`]: configuration, colony simulation, evolution and
//!   evaluation runs, checkpoints and artifact emission.

pub mod analysis;
pub mod baseline;
pub mod embodiment;
pub mod error;
pub mod evolution;
pub mod fitness;
pub mod genome;
pub mod orchestrator;
pub mod rng;
pub mod snn;
pub mod world;

pub use error::{Error, Result};
pub use genome::Genome;
