//! Scenario harness for trained followers: replayed AR rivers, smooth
//! sinusoidal rivers, sampled river profiles with dynamic leaders, platoons
//! and replayed leader trajectories, plus the safety, comfort and
//! string-stability metrics computed from their traces.

mod metrics;
mod river;
mod run;
mod scenario;

pub use metrics::{
    comfort_rms, compute_metrics, string_stability_ratio, write_metrics_toml, FollowerMetrics,
    ScenarioMetrics,
};
pub use river::{RiverProfile, SineChannel, SinusoidalRiver, PROFILE_HEADER};
pub use run::{
    run_scenario, write_traces, write_vessel_trace, ScenarioResult, VesselRow, VESSEL_TRACE_HEADER,
};
pub use scenario::{
    LeaderSpec, ProfileSource, RiverSpec, Scenario, ScenarioKind, SCHEDULE_HEADER,
    TRAJECTORY_HEADER,
};

use std::io::Read;
use std::path::PathBuf;

use thiserror::Error;

use crate::env::Observation;
use crate::rl::DdpgAgent;
use crate::vessel::VesselError;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("position {x:.1} m is outside the river profile [{lo}, {hi}]")]
    ProfileOutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("speed oscillation of the first follower is {0:e} m/s, too small for a ratio")]
    DegenerateOscillation(f64),
    #[error(transparent)]
    Vessel(#[from] VesselError),
}

/// Anything that maps an observation to a power fraction in `[0, 1]`.
pub trait Policy {
    fn action(&self, obs: &Observation) -> f64;
}

impl Policy for DdpgAgent {
    fn action(&self, obs: &Observation) -> f64 {
        self.act_greedy(obs)
    }
}

impl<F: Fn(&Observation) -> f64> Policy for F {
    fn action(&self, obs: &Observation) -> f64 {
        self(obs)
    }
}

/// Reads a CSV of numeric columns with exactly the given header.
fn read_columns<R: Read, const N: usize>(
    input: R,
    header: [&str; N],
) -> Result<Vec<[f64; N]>, ScenarioError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let found = reader.headers().map_err(|e| ScenarioError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if found.iter().collect::<Vec<_>>() != header {
        return Err(ScenarioError::Parse {
            line: 1,
            message: format!("expected header {}", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| ScenarioError::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let mut row = [0.0; N];
        for (c, value) in row.iter_mut().enumerate() {
            let field = rec.get(c).unwrap_or("");
            *value = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ScenarioError::Parse {
                    line,
                    message: format!("{} is not a finite number: {field:?}", header[c]),
                })?;
        }
        rows.push(row);
    }
    Ok(rows)
}

fn open(path: &std::path::Path) -> Result<std::fs::File, ScenarioError> {
    std::fs::File::open(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}
