//! Slot-level system simulator for XR services over a 5G NR network.
//!
//! The crate models stochastic XR traffic sources (video, motion/control,
//! audio+data), Dense-Urban and Indoor-Hotspot deployments, a large-scale
//! radio abstraction with proportional-fair scheduling and HARQ, connected-
//! mode DRX with a relative power ledger, and the satisfied-UE / capacity /
//! power-saving KPIs, all driven by a deterministic seeded slot loop.

pub mod cdrx;
pub mod config;
pub mod deployment;
pub mod engine;
pub mod error;
pub mod kpi;
pub mod mac;
pub mod radio;
pub mod report;
pub mod stochastics;
pub mod sweep;
pub mod traffic;

pub use error::{Result, SimError};
