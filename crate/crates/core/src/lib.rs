//! Gauge-aware learning of Pauli noise on Clifford gate sets, probabilistic
//! error cancellation with the learned models, and overhead minimization
//! over the gauge.

pub mod channel;
pub mod circuit;
pub mod circuits;
pub mod clifford;
pub mod devices;
pub mod error;
pub mod learn;
pub mod linalg;
pub mod mitigate;
pub mod model;
pub mod par;
pub mod pauli;
pub mod ptgraph;
pub mod sim;

pub use channel::PauliChannel;
pub use circuit::{Circuit, Op};
pub use clifford::{Clifford1, CliffordLayer};
pub use error::{Error, Result};
pub use model::{
    ChannelParams, FactorSet, FidelitySource, GateSet, GateSetNoiseModel, GaugeClass, GaugeVector, GeneratorSet, Slot,
};
pub use pauli::Pauli;
