//! Training environment: a follower vessel behind a stochastic leader
//! trajectory on a stochastic river.
//!
//! Leader speed, depth below keel, channel cross-section and stream speed
//! each follow an independent AR(1) process. The agent sets engine power
//! as a fraction of the maximum and is rewarded for holding a time gap near
//! the calibrated lognormal mode while changing power smoothly.

mod ar;
mod reward;
mod trace;

pub use ar::{ArParams, ArProcess};
pub use reward::{
    lognormal_mode, lognormal_pdf, max_safety_reward, reward_comfort, reward_safety, time_gap,
    TIME_GAP_SPEED_FLOOR,
};
pub use trace::{write_trace_csv, TraceRow, TRACE_HEADER};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream_rng, Stream};
use crate::vessel::{self, RiverConditions, VesselError, VesselParams, VesselState};

/// Number of observation components.
pub const OBS_DIM: usize = 7;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("action {0} outside [0, 1]")]
    InvalidAction(f64),
    #[error("environment stepped before reset")]
    NotReset,
    #[error(transparent)]
    Vessel(#[from] VesselError),
}

/// Environment constants: observation scaling, reward calibration and the
/// four AR(1) processes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub v_scale: f64,
    pub g_scale: f64,
    pub h_scale: f64,
    pub a_scale: f64,
    pub dt: f64,
    pub episode_len: usize,
    pub initial_gap: f64,
    /// Uniform range of the initial follower and leader speeds, m/s.
    pub initial_speed_range: [f64; 2],
    pub beta: f64,
    pub mu_t: f64,
    pub sigma_t: f64,
    /// Lower bound of the leader's speed relative to the stream, m/s.
    pub min_rel_speed: f64,
    /// Lower bound on the channel cross-section as a multiple of the
    /// vessel's submerged section.
    pub min_blockage_inverse: f64,
    pub leader_speed: ArParams,
    pub depth: ArParams,
    pub cross_section: ArParams,
    pub stream: ArParams,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            v_scale: 6.0,
            g_scale: 800.0,
            h_scale: 3.0,
            a_scale: 1500.0,
            dt: 1.0,
            episode_len: 500,
            initial_gap: 600.0,
            initial_speed_range: [2.0, 6.0],
            beta: 0.0004,
            mu_t: 5.41,
            sigma_t: 1.06,
            min_rel_speed: 2.0,
            min_blockage_inverse: 4.0,
            leader_speed: ArParams::new(0.010, 0.994, 0.034),
            depth: ArParams::new(0.262, 0.951, 0.381),
            cross_section: ArParams::new(4.992, 0.997, 598.0),
            stream: ArParams::new(0.0, 0.993, 0.030),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("v_scale", self.v_scale),
            ("g_scale", self.g_scale),
            ("h_scale", self.h_scale),
            ("a_scale", self.a_scale),
            ("dt", self.dt),
            ("sigma_t", self.sigma_t),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!("env.{name} must be positive, got {value}"));
            }
        }
        if self.episode_len == 0 {
            return Err("env.episode_len must be at least 1".into());
        }
        let [lo, hi] = self.initial_speed_range;
        if !(lo <= hi) {
            return Err("env.initial_speed_range must be ordered".into());
        }
        for (name, p) in [
            ("leader_speed", self.leader_speed),
            ("depth", self.depth),
            ("cross_section", self.cross_section),
            ("stream", self.stream),
        ] {
            if !(p.sigma2 >= 0.0) {
                return Err(format!("env.{name}.sigma2 must be >= 0"));
            }
            if !p.is_stationary() {
                return Err(format!("env.{name}.phi must satisfy |phi| < 1"));
            }
        }
        Ok(())
    }

    /// Stationary-mean river used to anchor deterministic scenarios.
    pub fn mean_river(&self) -> RiverConditions {
        RiverConditions::new(
            self.depth.stationary_mean(),
            self.cross_section.stationary_mean(),
            self.stream.stationary_mean(),
        )
    }
}

/// The seven normalized quantities the agent sees.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Observation {
    pub speed_n: f64,
    pub power_n: f64,
    pub gap_n: f64,
    pub rel_speed_n: f64,
    pub depth_n: f64,
    pub cross_section_n: f64,
    pub stream_n: f64,
}

/// Physical quantities behind an [`Observation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawObservation {
    pub speed: f64,
    pub power: f64,
    pub gap: f64,
    pub leader_speed: f64,
    pub river: RiverConditions,
}

impl Observation {
    pub fn from_raw(raw: &RawObservation, config: &EnvConfig, max_power: f64) -> Self {
        Self {
            speed_n: raw.speed / config.v_scale,
            power_n: raw.power / max_power,
            gap_n: raw.gap / config.g_scale,
            rel_speed_n: (raw.speed - raw.leader_speed) / config.v_scale,
            depth_n: raw.river.depth_below_keel / config.h_scale,
            cross_section_n: raw.river.cross_section / config.a_scale,
            stream_n: raw.river.stream_speed / config.v_scale,
        }
    }

    pub fn denormalize(&self, config: &EnvConfig, max_power: f64) -> RawObservation {
        let speed = self.speed_n * config.v_scale;
        RawObservation {
            speed,
            power: self.power_n * max_power,
            gap: self.gap_n * config.g_scale,
            leader_speed: speed - self.rel_speed_n * config.v_scale,
            river: RiverConditions::new(
                self.depth_n * config.h_scale,
                self.cross_section_n * config.a_scale,
                self.stream_n * config.v_scale,
            ),
        }
    }

    pub fn to_array(&self) -> [f64; OBS_DIM] {
        [
            self.speed_n,
            self.power_n,
            self.gap_n,
            self.rel_speed_n,
            self.depth_n,
            self.cross_section_n,
            self.stream_n,
        ]
    }

    pub fn from_array(a: [f64; OBS_DIM]) -> Self {
        Self {
            speed_n: a[0],
            power_n: a[1],
            gap_n: a[2],
            rel_speed_n: a[3],
            depth_n: a[4],
            cross_section_n: a[5],
            stream_n: a[6],
        }
    }
}

/// Bow-to-stern gap from bow positions.
pub fn bow_to_stern_gap(leader_position: f64, leader_length: f64, follower_position: f64) -> f64 {
    leader_position - leader_length - follower_position
}

/// Applies the follower dynamics for one step with the ground speed clamped
/// at zero. Position integrates the clamped speed.
pub fn advance_vessel(
    state: &VesselState,
    river: &RiverConditions,
    params: &VesselParams,
    dt: f64,
) -> Result<VesselState, VesselError> {
    let accel = vessel::net_acceleration(state, river, params)?;
    let mut next = vessel::step(state, accel, dt);
    if next.speed < 0.0 {
        next.speed = 0.0;
        next.position = state.position + 0.5 * state.speed * dt;
    }
    Ok(next)
}

/// Mutable state of one training episode, including its own RNG stream.
#[derive(Debug, Clone)]
pub struct EpisodeState {
    pub follower: VesselState,
    pub leader_position: f64,
    pub leader_speed: ArProcess,
    pub depth: ArProcess,
    pub cross_section: ArProcess,
    pub stream: ArProcess,
    pub step_index: usize,
    pub rng_seed: u64,
    rng: ChaCha8Rng,
}

impl EpisodeState {
    pub fn river(&self) -> RiverConditions {
        RiverConditions::new(
            self.depth.current,
            self.cross_section.current,
            self.stream.current,
        )
    }

    pub fn leader_speed(&self) -> f64 {
        self.leader_speed.current
    }

    pub fn gap(&self, leader_length: f64) -> f64 {
        bow_to_stern_gap(self.leader_position, leader_length, self.follower.position)
    }

    pub fn raw_observation(&self, leader_length: f64) -> RawObservation {
        RawObservation {
            speed: self.follower.speed,
            power: self.follower.power,
            gap: self.gap(leader_length),
            leader_speed: self.leader_speed(),
            river: self.river(),
        }
    }

    pub fn observation(&self, config: &EnvConfig, params: &VesselParams) -> Observation {
        Observation::from_raw(
            &self.raw_observation(params.length),
            config,
            params.max_power,
        )
    }
}

/// Fresh episode: zero power, uniform initial speeds, fixed initial gap, river
/// processes at their stationary means.
pub fn reset(config: &EnvConfig, params: &VesselParams, seed: u64) -> (EpisodeState, Observation) {
    let mut rng = stream_rng(seed, Stream::Env);
    let [lo, hi] = config.initial_speed_range;
    let follower_speed = lo + (hi - lo) * rng.random::<f64>();
    let leader_speed = lo + (hi - lo) * rng.random::<f64>();
    let state = EpisodeState {
        follower: VesselState {
            position: 0.0,
            speed: follower_speed,
            power: 0.0,
        },
        leader_position: config.initial_gap + params.length,
        leader_speed: ArProcess::new(config.leader_speed, leader_speed),
        depth: ArProcess::at_stationary_mean(config.depth),
        cross_section: ArProcess::at_stationary_mean(config.cross_section),
        stream: ArProcess::at_stationary_mean(config.stream),
        step_index: 0,
        rng_seed: seed,
        rng,
    };
    let obs = state.observation(config, params);
    (state, obs)
}

/// Advances leader speed and river by one step of their AR(1) processes,
/// applying the manoeuvrability and depth constraints, then moves the
/// leader ballistically.
pub fn advance_environment(state: &mut EpisodeState, config: &EnvConfig, params: &VesselParams) {
    let noise: [f64; 4] = [
        state.rng.sample(StandardNormal),
        state.rng.sample(StandardNormal),
        state.rng.sample(StandardNormal),
        state.rng.sample(StandardNormal),
    ];
    let leader_before = state.leader_speed.current;
    state.leader_speed.step(noise[0]);
    let depth = state.depth.step(noise[1]);
    if depth < 0.0 {
        state.depth.current = 0.0;
    }
    let min_section = config.min_blockage_inverse * params.submerged_section();
    let section = state.cross_section.step(noise[2]);
    if section < min_section {
        state.cross_section.current = min_section;
    }
    let stream = state.stream.step(noise[3]);
    let min_leader = stream + config.min_rel_speed;
    if state.leader_speed.current < min_leader {
        state.leader_speed.current = min_leader;
    }
    state.leader_position += 0.5 * (leader_before + state.leader_speed.current) * config.dt;
}

/// Result of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub collision: bool,
    pub row: TraceRow,
}

/// Applies `action` (fraction of maximum power), advances the river and
/// leader, integrates the follower and scores the new state.
pub fn env_step(
    state: &mut EpisodeState,
    config: &EnvConfig,
    params: &VesselParams,
    action: f64,
) -> Result<StepOutcome, EnvError> {
    if !(0.0..=1.0).contains(&action) {
        return Err(EnvError::InvalidAction(action));
    }
    let power_prev = state.follower.power;
    state.follower.power = params.max_power * action;
    advance_environment(state, config, params);
    let river = state.river();
    state.follower = advance_vessel(&state.follower, &river, params, config.dt)?;
    state.step_index += 1;

    let gap = state.gap(params.length);
    let tg = time_gap(gap, state.follower.speed - river.stream_speed);
    let r_safety = reward_safety(tg, config.mu_t, config.sigma_t);
    let r_comfort = reward_comfort(state.follower.power, power_prev, params.max_power);
    let reward = r_safety + config.beta * r_comfort;
    let collision = gap <= 0.0;
    let done = collision || state.step_index >= config.episode_len;
    let row = TraceRow {
        t: state.step_index as f64 * config.dt,
        x_f: state.follower.position,
        v_f: state.follower.speed,
        power: state.follower.power,
        x_l: state.leader_position,
        v_l: state.leader_speed(),
        gap,
        time_gap: tg,
        h: river.depth_below_keel,
        a_cross: river.cross_section,
        v_str: river.stream_speed,
        r_safety,
        r_comfort,
        reward,
    };
    Ok(StepOutcome {
        observation: state.observation(config, params),
        reward,
        done,
        collision,
        row,
    })
}

/// Convenience wrapper owning the configuration and the current episode.
#[derive(Debug, Clone)]
pub struct RiverEnv {
    pub config: EnvConfig,
    pub params: VesselParams,
    state: Option<EpisodeState>,
}

impl RiverEnv {
    pub fn new(config: EnvConfig, params: VesselParams) -> Self {
        Self {
            config,
            params,
            state: None,
        }
    }

    pub fn reset(&mut self, seed: u64) -> Observation {
        let (state, obs) = reset(&self.config, &self.params, seed);
        self.state = Some(state);
        obs
    }

    pub fn step(&mut self, action: f64) -> Result<StepOutcome, EnvError> {
        let state = self.state.as_mut().ok_or(EnvError::NotReset)?;
        env_step(state, &self.config, &self.params, action)
    }

    pub fn state(&self) -> Option<&EpisodeState> {
        self.state.as_ref()
    }

    pub fn state_mut(&mut self) -> Option<&mut EpisodeState> {
        self.state.as_mut()
    }
}
