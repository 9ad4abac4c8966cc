//! One module per subcommand. Each owns a config type with defaults and a
//! fixed column list.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{self, Params};
use crate::error::CliError;
use crate::table::{Row, Table};

pub mod evaluate;
pub mod markov;
pub mod mc;
pub mod plan;
pub mod repeater;
pub mod sweep;

pub trait Command: Serialize + DeserializeOwned {
    const NAME: &'static str;
    const COLUMNS: &'static [&'static str];

    /// Fills in anything left to chance, such as a missing seed.
    fn prepare(&mut self) {}

    fn run(&self) -> Result<Vec<Row>, CliError>;
}

/// Resolves, runs and tabulates one command; returns the echoed config too.
pub fn execute<C: Command>(params: Params) -> Result<(Value, Table), CliError> {
    let mut params = params;
    config::take_command(&mut params, C::NAME)?;
    let mut cfg: C = config::parse(C::NAME, params)?;
    cfg.prepare();
    let rows = cfg.run()?;
    let table = Table {
        columns: C::COLUMNS.iter().map(|c| c.to_string()).collect(),
        rows,
    };
    Ok((config::echo(C::NAME, &cfg)?, table))
}

/// Per-gate noise of the finite-depth models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    Ideal,
    Depolarizing,
    AmplitudeDamping,
}

impl NoiseKind {
    pub fn channel(self, strength: f64) -> clifford_distill::mc::GateChannel {
        use clifford_distill::mc::GateChannel;
        match self {
            NoiseKind::Ideal => GateChannel::Ideal,
            NoiseKind::Depolarizing => GateChannel::Depolarizing { lambda: strength },
            NoiseKind::AmplitudeDamping => GateChannel::AmplitudeDamping { gamma: strength },
        }
    }
}
