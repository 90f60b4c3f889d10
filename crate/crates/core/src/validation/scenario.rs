use std::f64::consts::PI;
use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::river::{RiverProfile, SinusoidalRiver};
use super::{open, read_columns, ScenarioError};
use crate::env::{ArParams, EnvConfig};
use crate::rng::{stream_rng, Stream};

pub const SCHEDULE_HEADER: [&str; 2] = ["t_s", "power_fraction"];
pub const TRAJECTORY_HEADER: [&str; 3] = ["t_s", "x_m", "v_mps"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    ArReplay,
    Sinusoidal,
    RiverProfile,
    Platoon,
    LeaderReplay,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::ArReplay => "ar_replay",
            ScenarioKind::Sinusoidal => "sinusoidal",
            ScenarioKind::RiverProfile => "river_profile",
            ScenarioKind::Platoon => "platoon",
            ScenarioKind::LeaderReplay => "leader_replay",
        }
    }
}

/// How the leading vessel moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LeaderSpec {
    /// Trajectory leader whose speed is an AR(1) process kept at least
    /// `min_rel_speed` above the local stream.
    Ar {
        params: ArParams,
    },
    /// Speed relative to the stream: `base_rel_speed` until `start`, then
    /// raised-cosine swings of height `swing` with the given period.
    SpeedFunction {
        base_rel_speed: f64,
        swing: f64,
        start: f64,
        period: f64,
    },
    /// Dynamic vessel at constant engine power, W.
    ConstantPower {
        power: f64,
    },
    /// Dynamic vessel following `(t_s, power_fraction)` steps; each fraction
    /// holds until the next entry.
    PowerSchedule {
        schedule: Vec<[f64; 2]>,
    },
    ScheduleFile {
        path: PathBuf,
    },
    /// Replays `t_s,x_m,v_mps` samples, linearly interpolated.
    Trajectory {
        path: PathBuf,
    },
}

impl LeaderSpec {
    pub fn is_dynamic(&self) -> bool {
        matches!(
            self,
            LeaderSpec::ConstantPower { .. }
                | LeaderSpec::PowerSchedule { .. }
                | LeaderSpec::ScheduleFile { .. }
        )
    }

    /// Default jump schedule for platoon tests, as fractions of maximum
    /// power. The drop to 0.05 at 2800 s is the hard braking case.
    pub fn jump_schedule() -> Self {
        LeaderSpec::PowerSchedule {
            schedule: vec![
                [0.0, 0.5],
                [700.0, 1.0],
                [1400.0, 0.2],
                [2100.0, 0.8],
                [2800.0, 0.05],
            ],
        }
    }

    pub fn read_schedule(path: &std::path::Path) -> Result<Vec<[f64; 2]>, ScenarioError> {
        read_columns(open(path)?, SCHEDULE_HEADER)
    }

    pub fn read_trajectory(path: &std::path::Path) -> Result<Vec<[f64; 3]>, ScenarioError> {
        read_columns(open(path)?, TRAJECTORY_HEADER)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSource {
    /// Built-in reach seen from a lateral offset, m.
    Synthetic {
        lateral_offset: f64,
    },
    File {
        path: PathBuf,
    },
}

impl ProfileSource {
    pub fn load(&self) -> Result<RiverProfile, ScenarioError> {
        match self {
            ProfileSource::Synthetic { lateral_offset } => {
                Ok(RiverProfile::synthetic_reach(*lateral_offset))
            }
            ProfileSource::File { path } => RiverProfile::read_csv(open(path)?),
        }
    }
}

/// What each vessel experiences from the river.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RiverSpec {
    /// The environment's AR(1) processes, shared by all vessels.
    Ar,
    Sinusoid {
        river: SinusoidalRiver,
    },
    /// `assignment[i]` indexes `sources` for vessel `i` (0 is the leader).
    Profile {
        sources: Vec<ProfileSource>,
        assignment: Vec<usize>,
    },
    Constant {
        depth_below_keel: f64,
        cross_section: f64,
        stream_speed: f64,
    },
}

fn default_followers() -> usize {
    1
}
fn default_gap() -> f64 {
    600.0
}
fn default_true() -> bool {
    true
}
fn default_transient() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    /// Number of steps.
    pub duration: usize,
    #[serde(default = "default_followers")]
    pub followers: usize,
    pub leader: LeaderSpec,
    pub river: RiverSpec,
    /// Initial bow-to-stern gap between consecutive vessels, m.
    #[serde(default = "default_gap")]
    pub initial_gap: f64,
    /// Bow of the first follower at t = 0, m. Ignored for replayed leaders,
    /// where the first follower starts `initial_gap` behind the replay.
    #[serde(default)]
    pub start_position: f64,
    /// Initial follower speed; defaults to the leader's initial speed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub follower_speed: Option<f64>,
    /// Followers start at full power instead of their cruise power.
    #[serde(default = "default_true")]
    pub cold_start: bool,
    /// Steps discarded before steady-state metrics.
    #[serde(default = "default_transient")]
    pub transient: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    pub const BUILTIN: [&'static str; 4] = ["ar_replay", "sinusoidal", "river_profile", "platoon"];

    pub fn builtin(name: &str, config: &EnvConfig, seed: u64) -> Option<Self> {
        match name {
            "ar_replay" => Some(Self::ar_replay(config, seed)),
            "sinusoidal" => Some(Self::sinusoidal(config, seed)),
            "river_profile" => Some(Self::river_profile(seed)),
            "platoon" => Some(Self::platoon(5, seed)),
            _ => None,
        }
    }

    fn base(name: &str, kind: ScenarioKind, leader: LeaderSpec, river: RiverSpec) -> Self {
        Self {
            name: name.into(),
            kind,
            duration: 1500,
            followers: 1,
            leader,
            river,
            initial_gap: 600.0,
            start_position: 0.0,
            follower_speed: None,
            cold_start: true,
            transient: 500,
            seed: 0,
        }
    }

    /// Leader and river driven by the training processes.
    pub fn ar_replay(config: &EnvConfig, seed: u64) -> Self {
        let mut s = Self::base(
            "ar_replay",
            ScenarioKind::ArReplay,
            LeaderSpec::Ar {
                params: config.leader_speed,
            },
            RiverSpec::Ar,
        );
        s.seed = seed;
        s
    }

    /// Smooth river and leader. The seed draws the channel phases.
    pub fn sinusoidal(config: &EnvConfig, seed: u64) -> Self {
        let mut rng = stream_rng(seed, Stream::Scenario);
        let mut river = SinusoidalRiver::anchored(config);
        for ch in [
            &mut river.depth,
            &mut river.cross_section,
            &mut river.stream,
        ] {
            ch.phase = 2.0 * PI * rng.random::<f64>();
        }
        let mut s = Self::base(
            "sinusoidal",
            ScenarioKind::Sinusoidal,
            LeaderSpec::SpeedFunction {
                base_rel_speed: config.min_rel_speed,
                swing: 2.0,
                start: 600.0,
                period: 800.0,
            },
            RiverSpec::Sinusoid { river },
        );
        s.duration = 3000;
        s.seed = seed;
        s
    }

    /// Leader at 0.5 MW on the built-in reach; the follower runs 40 m off
    /// the leader's line and so sees a different river.
    pub fn river_profile(seed: u64) -> Self {
        let mut s = Self::base(
            "river_profile",
            ScenarioKind::RiverProfile,
            LeaderSpec::ConstantPower { power: 0.5e6 },
            RiverSpec::Profile {
                sources: vec![
                    ProfileSource::Synthetic {
                        lateral_offset: 0.0,
                    },
                    ProfileSource::Synthetic {
                        lateral_offset: 40.0,
                    },
                ],
                assignment: vec![0, 1],
            },
        );
        s.duration = 3000;
        s.start_position = 1000.0;
        s.seed = seed;
        s
    }

    /// Leader on the jump schedule followed by `followers` vessels in line.
    pub fn platoon(followers: usize, seed: u64) -> Self {
        let mut s = Self::base(
            "platoon",
            ScenarioKind::Platoon,
            LeaderSpec::jump_schedule(),
            RiverSpec::Profile {
                sources: vec![ProfileSource::Synthetic {
                    lateral_offset: 0.0,
                }],
                assignment: vec![0; followers + 1],
            },
        );
        s.duration = 3500;
        s.followers = followers;
        s.initial_gap = 300.0;
        s.start_position = 4000.0;
        s.cold_start = false;
        s.seed = seed;
        s
    }

    pub fn validate(&self, config: &EnvConfig) -> Result<(), ScenarioError> {
        let fail = |m: String| Err(ScenarioError::Invalid(format!("{}: {m}", self.name)));
        if self.followers == 0 {
            return fail("at least one follower is required".into());
        }
        if self.duration == 0 {
            return fail("duration must be at least one step".into());
        }
        if !(self.initial_gap > 0.0) {
            return fail("initial_gap must be positive".into());
        }
        if self.kind == ScenarioKind::Platoon && !self.leader.is_dynamic() {
            return fail("a platoon needs a dynamic (powered) leader".into());
        }
        if self.kind == ScenarioKind::LeaderReplay
            && !matches!(self.leader, LeaderSpec::Trajectory { .. })
        {
            return fail("leader_replay needs a trajectory leader".into());
        }
        match &self.leader {
            LeaderSpec::Ar { params } if !params.is_stationary() => {
                return fail("leader AR process must be stationary".into())
            }
            LeaderSpec::SpeedFunction { period, .. } if !(*period > 0.0) => {
                return fail("leader period must be positive".into())
            }
            LeaderSpec::ConstantPower { power } if !(*power >= 0.0) => {
                return fail("leader power must be >= 0".into())
            }
            LeaderSpec::PowerSchedule { schedule } => {
                if schedule.is_empty() || schedule[0][0] > 0.0 {
                    return fail("power schedule must start at t = 0".into());
                }
                if schedule.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                    return fail("power schedule times must increase".into());
                }
                if schedule.iter().any(|s| !(0.0..=1.0).contains(&s[1])) {
                    return fail("power fractions must lie in [0, 1]".into());
                }
            }
            _ => {}
        }
        match &self.river {
            RiverSpec::Sinusoid { river } => river.validate(config)?,
            RiverSpec::Profile {
                sources,
                assignment,
            } => {
                if assignment.len() != self.followers + 1 {
                    return fail(format!(
                        "profile assignment needs {} entries (leader + followers)",
                        self.followers + 1
                    ));
                }
                if assignment.iter().any(|i| *i >= sources.len()) {
                    return fail("profile assignment refers to a missing source".into());
                }
            }
            RiverSpec::Constant {
                depth_below_keel,
                cross_section,
                ..
            } => {
                if !(*depth_below_keel >= 0.0 && *cross_section > 0.0) {
                    return fail("constant river needs depth >= 0 and cross-section > 0".into());
                }
            }
            RiverSpec::Ar => {}
        }
        Ok(())
    }
}
