//! Experiment harness: spec files, the game runner, statistics, budget
//! calibration, training pipelines and the published-table reproductions.

use std::path::PathBuf;

pub use ris_core;

pub mod assets;
pub mod calibrate;
pub mod config;
pub mod runner;
pub mod stats;
pub mod tables;
pub mod train;

pub use config::{AgentKind, AgentSpec, ExperimentSpec, Mode, PriorKind};
pub use runner::{play_game, run_experiment, GameResult, Resources, ResultSummary};
pub use stats::{summarize, Summary};

#[derive(Debug)]
pub enum Error {
    Config(String),
    Engine(ris_core::EngineError),
    Io(PathBuf, std::io::Error),
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::Config(m) => write!(f, "config: {m}"),
            Error::Engine(e) => write!(f, "{e}"),
            Error::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl std::error::Error for Error {}

impl From<ris_core::EngineError> for Error {
    fn from(e: ris_core::EngineError) -> Self {
        Error::Engine(e)
    }
}

/// Default output directory: `$RIS_OUT` or `./out`.
pub fn output_dir() -> PathBuf {
    std::env::var_os("RIS_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}
