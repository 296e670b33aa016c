//! Cycle-accurate simulator for temporal neural network (TNN) columns and
//! feedforward networks, built from functional models of nine hardware
//! macros, plus an analytical power / computation-time / area estimator.
//!
//! Time is integer aclk ticks inside a gamma cycle ([`temporal`]). The
//! macro models ([`macros`]) compose into a p×q [`column`] with 1-WTA
//! inhibition and STDP learning; columns stack into a [`network`]. The
//! [`ppa`] module rolls per-macro costs up to whole designs, and [`bench`]
//! holds encoders, synthetic datasets and the clustering/classification
//! drivers.

pub mod bench;
pub mod column;
pub mod config;
pub mod designs;
pub mod exec;
pub mod macros;
pub mod network;
pub mod ppa;
pub mod rng;
pub mod temporal;
pub mod trace;

pub use column::{Column, ColumnConfig, ColumnError, ColumnOutput, ColumnState};
pub use exec::Execution;
pub use network::{Fanin, LayerSpec, Network, NetworkError, NetworkSpec};
pub use ppa::{CalibrationConstants, MacroPpa, PpaReport};

pub use temporal::{BinaryTrace, ClockConfig, TemporalValue};
