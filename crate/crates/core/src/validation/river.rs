//! River models used by validation scenarios: sampled longitudinal profiles
//! and smooth sinusoidal rivers.

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{read_columns, ScenarioError};
use crate::env::EnvConfig;
use crate::vessel::RiverConditions;

/// River sampled along the longitudinal axis. `depth` is total water depth;
/// the vessel's draft is subtracted on lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct RiverProfile {
    pub positions: Vec<f64>,
    pub depth: Vec<f64>,
    pub cross_section: Vec<f64>,
    pub stream_speed: Vec<f64>,
}

pub const PROFILE_HEADER: [&str; 4] = ["x_m", "depth_m", "cross_section_m2", "stream_mps"];

impl RiverProfile {
    pub fn new(
        positions: Vec<f64>,
        depth: Vec<f64>,
        cross_section: Vec<f64>,
        stream_speed: Vec<f64>,
    ) -> Result<Self, ScenarioError> {
        let n = positions.len();
        if n < 2 || depth.len() != n || cross_section.len() != n || stream_speed.len() != n {
            return Err(ScenarioError::Invalid(
                "a river profile needs at least two samples with equal-length columns".into(),
            ));
        }
        if positions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ScenarioError::Invalid(
                "profile positions must be strictly increasing".into(),
            ));
        }
        if depth.iter().any(|d| !(*d >= 0.0)) || cross_section.iter().any(|a| !(*a > 0.0)) {
            return Err(ScenarioError::Invalid(
                "profile depths must be >= 0 and cross-sections > 0".into(),
            ));
        }
        Ok(Self {
            positions,
            depth,
            cross_section,
            stream_speed,
        })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.positions[0], *self.positions.last().unwrap())
    }

    /// Piecewise-linear interpolation at `x`; depth below keel is the water
    /// depth minus `draft`, floored at zero.
    pub fn at(&self, x: f64, draft: f64) -> Result<RiverConditions, ScenarioError> {
        let (lo, hi) = self.span();
        if !(x >= lo && x <= hi) {
            return Err(ScenarioError::ProfileOutOfRange { x, lo, hi });
        }
        let i = self
            .positions
            .partition_point(|p| *p <= x)
            .clamp(1, self.positions.len() - 1);
        let (x0, x1) = (self.positions[i - 1], self.positions[i]);
        let w = (x - x0) / (x1 - x0);
        let lerp = |c: &[f64]| c[i - 1] + w * (c[i] - c[i - 1]);
        Ok(RiverConditions::new(
            (lerp(&self.depth) - draft).max(0.0),
            lerp(&self.cross_section),
            lerp(&self.stream_speed),
        ))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, ScenarioError> {
        let rows = read_columns(input, PROFILE_HEADER)?;
        Self::new(
            rows.iter().map(|r| r[0]).collect(),
            rows.iter().map(|r| r[1]).collect(),
            rows.iter().map(|r| r[2]).collect(),
            rows.iter().map(|r| r[3]).collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(PROFILE_HEADER)?;
        for i in 0..self.positions.len() {
            w.write_record([
                self.positions[i].to_string(),
                self.depth[i].to_string(),
                self.cross_section[i].to_string(),
                self.stream_speed[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Deterministic 60 km downstream reach with bends, shoals and a
    /// varying current. A vessel offset laterally by `lateral_offset`
    /// metres from the fairway axis sees shallower water and a weaker
    /// current.
    pub fn synthetic_reach(lateral_offset: f64) -> Self {
        let n = 601;
        let mut profile = Self {
            positions: Vec::with_capacity(n),
            depth: Vec::with_capacity(n),
            cross_section: Vec::with_capacity(n),
            stream_speed: Vec::with_capacity(n),
        };
        let off = lateral_offset.abs();
        for i in 0..n {
            let x = i as f64 * 100.0;
            let s = |wavelength: f64, phase: f64| (2.0 * PI * x / wavelength + phase).sin();
            let depth = 8.1 + 1.6 * s(7300.0, 0.0) + 0.7 * s(2100.0, 1.0) - 0.02 * off;
            let section = 1650.0 + 320.0 * s(11_000.0, 0.5) + 90.0 * s(3300.0, 2.0);
            let stream = (1.3 + 0.45 * s(5300.0, 0.3) + 0.2 * s(1700.0, 1.7)) * (1.0 - 0.004 * off);
            profile.positions.push(x);
            profile.depth.push(depth.max(2.8));
            profile.cross_section.push(section);
            profile.stream_speed.push(stream);
        }
        profile
    }
}

/// One sinusoidal channel `mean + amplitude * sin(2 pi x / period + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineChannel {
    pub mean: f64,
    pub amplitude: f64,
    /// Spatial period, m.
    pub period: f64,
    #[serde(default)]
    pub phase: f64,
}

impl SineChannel {
    pub fn value(&self, x: f64) -> f64 {
        self.mean + self.amplitude * (2.0 * PI * x / self.period + self.phase).sin()
    }
}

/// River whose depth below keel, cross-section and stream vary smoothly
/// along the axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinusoidalRiver {
    pub depth: SineChannel,
    pub cross_section: SineChannel,
    pub stream: SineChannel,
}

impl SinusoidalRiver {
    /// Channels centred on the AR stationary means of `config`.
    pub fn anchored(config: &EnvConfig) -> Self {
        Self {
            depth: SineChannel {
                mean: config.depth.stationary_mean(),
                amplitude: 2.0,
                period: 8000.0,
                phase: 0.0,
            },
            cross_section: SineChannel {
                mean: config.cross_section.stationary_mean(),
                amplitude: 400.0,
                period: 12_000.0,
                phase: 1.0,
            },
            stream: SineChannel {
                mean: config.stream.stationary_mean(),
                amplitude: 0.5,
                period: 10_000.0,
                phase: 2.0,
            },
        }
    }

    /// Amplitudes of non-zero-mean channels may not exceed half the mean;
    /// the zero-mean stream is bounded by its AR stationary spread.
    pub fn validate(&self, config: &EnvConfig) -> Result<(), ScenarioError> {
        for (name, ch) in [("depth", self.depth), ("cross_section", self.cross_section)] {
            if !(ch.amplitude.abs() <= 0.5 * ch.mean.abs()) || !(ch.period > 0.0) {
                return Err(ScenarioError::Invalid(format!(
                    "sinusoid {name}: amplitude must be <= 50% of the mean and period > 0"
                )));
            }
        }
        let stream_spread = config.stream.stationary_variance().sqrt();
        let stream_limit = (0.5 * self.stream.mean.abs()).max(stream_spread);
        if !(self.stream.amplitude.abs() <= stream_limit) || !(self.stream.period > 0.0) {
            return Err(ScenarioError::Invalid(format!(
                "sinusoid stream amplitude must be <= {stream_limit:.3} m/s and period > 0"
            )));
        }
        Ok(())
    }

    /// Conditions at time `t` and position `x`; the channels are stationary
    /// in time.
    pub fn conditions(&self, _t: f64, x: f64) -> RiverConditions {
        RiverConditions::new(
            self.depth.value(x).max(0.0),
            self.cross_section.value(x),
            self.stream.value(x),
        )
    }
}
