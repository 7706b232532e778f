//! Scenario configuration and the Monte Carlo runners behind the CLI.

pub mod config;
pub mod modem;
pub mod rng;
pub mod runner;

pub use config::{MetricKind, ScenarioConfig, WaveformKind, WaveformParams};
pub use modem::{build_modem, FrameModem};
pub use runner::{run_ber, run_papr, run_psd, run_scenario};
