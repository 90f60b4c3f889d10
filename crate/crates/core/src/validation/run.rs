use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::metrics::{compute_metrics, ScenarioMetrics};
use super::river::{RiverProfile, SinusoidalRiver};
use super::scenario::{LeaderSpec, RiverSpec, Scenario};
use super::{Policy, ScenarioError};
use crate::env::{
    advance_vessel, bow_to_stern_gap, time_gap, ArProcess, EnvConfig, Observation, RawObservation,
};
use crate::rng::{stream_rng, Stream};
use crate::vessel::{
    equilibrium_power, equilibrium_speed, RiverConditions, VesselParams, VesselState,
};

/// One step of one vessel. The leader has no gap, and kinematic leaders
/// have no power; those fields are NaN and written as empty CSV cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselRow {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub power: f64,
    pub gap: f64,
    pub time_gap: f64,
    pub h: f64,
    pub a_cross: f64,
    pub v_str: f64,
}

pub const VESSEL_TRACE_HEADER: [&str; 9] =
    ["t", "x", "v", "P", "gap", "T", "h", "A_cross", "v_str"];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    /// `traces[0]` is the leader, `traces[k]` follower `k`.
    pub traces: Vec<Vec<VesselRow>>,
    pub metrics: ScenarioMetrics,
}

enum RiverModel {
    Ar {
        depth: ArProcess,
        cross_section: ArProcess,
        stream: ArProcess,
        min_section: f64,
    },
    Sinusoid(SinusoidalRiver),
    Profile {
        profiles: Vec<RiverProfile>,
        assignment: Vec<usize>,
    },
    Constant(RiverConditions),
}

impl RiverModel {
    fn new(
        spec: &RiverSpec,
        config: &EnvConfig,
        params: &VesselParams,
    ) -> Result<Self, ScenarioError> {
        Ok(match spec {
            RiverSpec::Ar => RiverModel::Ar {
                depth: ArProcess::at_stationary_mean(config.depth),
                cross_section: ArProcess::at_stationary_mean(config.cross_section),
                stream: ArProcess::at_stationary_mean(config.stream),
                min_section: config.min_blockage_inverse * params.submerged_section(),
            },
            RiverSpec::Sinusoid { river } => RiverModel::Sinusoid(*river),
            RiverSpec::Profile {
                sources,
                assignment,
            } => RiverModel::Profile {
                profiles: sources.iter().map(|s| s.load()).collect::<Result<_, _>>()?,
                assignment: assignment.clone(),
            },
            RiverSpec::Constant {
                depth_below_keel,
                cross_section,
                stream_speed,
            } => RiverModel::Constant(RiverConditions::new(
                *depth_below_keel,
                *cross_section,
                *stream_speed,
            )),
        })
    }

    fn at(
        &self,
        vessel: usize,
        t: f64,
        x: f64,
        draft: f64,
    ) -> Result<RiverConditions, ScenarioError> {
        match self {
            RiverModel::Ar {
                depth,
                cross_section,
                stream,
                ..
            } => Ok(RiverConditions::new(
                depth.current,
                cross_section.current,
                stream.current,
            )),
            RiverModel::Sinusoid(river) => Ok(river.conditions(t, x)),
            RiverModel::Profile {
                profiles,
                assignment,
            } => profiles[assignment[vessel]].at(x, draft),
            RiverModel::Constant(c) => Ok(*c),
        }
    }

    fn advance(&mut self, rng: &mut ChaCha8Rng) {
        if let RiverModel::Ar {
            depth,
            cross_section,
            stream,
            min_section,
        } = self
        {
            if depth.step(rng.sample(StandardNormal)) < 0.0 {
                depth.current = 0.0;
            }
            if cross_section.step(rng.sample(StandardNormal)) < *min_section {
                cross_section.current = *min_section;
            }
            stream.step(rng.sample(StandardNormal));
        }
    }
}

enum LeaderModel {
    Ar(ArProcess),
    Speed {
        base_rel_speed: f64,
        swing: f64,
        start: f64,
        period: f64,
    },
    Powered(Vec<[f64; 2]>),
    Replay(Vec<[f64; 3]>),
}

impl LeaderModel {
    fn new(spec: &LeaderSpec, params: &VesselParams) -> Result<Self, ScenarioError> {
        Ok(match spec {
            LeaderSpec::Ar { params } => LeaderModel::Ar(ArProcess::at_stationary_mean(*params)),
            LeaderSpec::SpeedFunction {
                base_rel_speed,
                swing,
                start,
                period,
            } => LeaderModel::Speed {
                base_rel_speed: *base_rel_speed,
                swing: *swing,
                start: *start,
                period: *period,
            },
            LeaderSpec::ConstantPower { power } => {
                LeaderModel::Powered(vec![[0.0, power / params.max_power]])
            }
            LeaderSpec::PowerSchedule { schedule } => LeaderModel::Powered(schedule.clone()),
            LeaderSpec::ScheduleFile { path } => {
                LeaderModel::Powered(LeaderSpec::read_schedule(path)?)
            }
            LeaderSpec::Trajectory { path } => {
                let samples = LeaderSpec::read_trajectory(path)?;
                if samples.len() < 2 || samples.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                    return Err(ScenarioError::Invalid(
                        "leader trajectory needs two or more samples with increasing t_s".into(),
                    ));
                }
                LeaderModel::Replay(samples)
            }
        })
    }

    fn power_fraction(schedule: &[[f64; 2]], t: f64) -> f64 {
        let i = schedule.partition_point(|s| s[0] <= t);
        schedule[i.saturating_sub(1)][1]
    }

    fn rel_speed(base: f64, swing: f64, start: f64, period: f64, t: f64) -> f64 {
        if t < start {
            base
        } else {
            base + swing * 0.5 * (1.0 - (2.0 * PI * (t - start) / period).cos())
        }
    }

    /// Position and speed of a replayed leader at `t`; the start time of the
    /// file maps to t = 0.
    fn replay_at(samples: &[[f64; 3]], t: f64) -> Result<(f64, f64), ScenarioError> {
        let t = t + samples[0][0];
        let last = samples[samples.len() - 1][0];
        if t > last + 1e-9 {
            return Err(ScenarioError::Invalid(format!(
                "leader trajectory ends at t = {last} s, scenario needs {t} s"
            )));
        }
        let i = samples
            .partition_point(|s| s[0] <= t)
            .clamp(1, samples.len() - 1);
        let (a, b) = (samples[i - 1], samples[i]);
        let w = ((t - a[0]) / (b[0] - a[0])).min(1.0);
        Ok((a[1] + w * (b[1] - a[1]), a[2] + w * (b[2] - a[2])))
    }
}

fn row(t: f64, s: &VesselState, gap: f64, river: &RiverConditions) -> VesselRow {
    VesselRow {
        t,
        x: s.position,
        v: s.speed,
        power: s.power,
        gap,
        time_gap: if gap.is_nan() {
            f64::NAN
        } else {
            time_gap(gap, s.speed - river.stream_speed)
        },
        h: river.depth_below_keel,
        a_cross: river.cross_section,
        v_str: river.stream_speed,
    }
}

/// Runs `scenario` with every follower steered by `policy` (no exploration).
/// Each follower observes only itself, its immediate predecessor and the
/// river at its own position. All vessels update synchronously. The run
/// stops after the first step with a non-positive gap.
pub fn run_scenario<P: Policy + ?Sized>(
    policy: &P,
    scenario: &Scenario,
    config: &EnvConfig,
    params: &VesselParams,
) -> Result<ScenarioResult, ScenarioError> {
    scenario.validate(config)?;
    let dt = config.dt;
    let n = scenario.followers;
    let draft = params.draft;
    let mut rng = stream_rng(scenario.seed, Stream::Scenario);
    let mut river = RiverModel::new(&scenario.river, config, params)?;
    let mut leader = LeaderModel::new(&scenario.leader, params)?;
    let spacing = scenario.initial_gap + params.length;

    let mut vessels = vec![
        VesselState {
            position: 0.0,
            speed: 0.0,
            power: f64::NAN
        };
        n + 1
    ];
    vessels[0].position = scenario.start_position + spacing;
    if let LeaderModel::Replay(samples) = &leader {
        let (x, v) = LeaderModel::replay_at(samples, 0.0)?;
        vessels[0].position = x;
        vessels[0].speed = v;
    }
    let leader_river = river.at(0, 0.0, vessels[0].position, draft)?;
    match &mut leader {
        LeaderModel::Ar(speed) => {
            let floor = leader_river.stream_speed + config.min_rel_speed;
            speed.current = speed.current.max(floor);
            vessels[0].speed = speed.current;
        }
        LeaderModel::Speed {
            base_rel_speed,
            swing,
            start,
            period,
        } => {
            vessels[0].speed = leader_river.stream_speed
                + LeaderModel::rel_speed(*base_rel_speed, *swing, *start, *period, 0.0);
        }
        LeaderModel::Powered(schedule) => {
            let power = params.max_power * LeaderModel::power_fraction(schedule, 0.0);
            vessels[0].power = power;
            vessels[0].speed = equilibrium_speed(power, &leader_river, params)?;
        }
        LeaderModel::Replay(_) => {}
    }
    for k in 1..=n {
        let position = vessels[0].position - k as f64 * spacing;
        let speed = scenario.follower_speed.unwrap_or(vessels[0].speed);
        let here = river.at(k, 0.0, position, draft)?;
        let power = if scenario.cold_start {
            params.max_power
        } else {
            equilibrium_power(speed, &here, params)?
        };
        vessels[k] = VesselState {
            position,
            speed,
            power,
        };
    }

    let mut traces: Vec<Vec<VesselRow>> = vec![Vec::with_capacity(scenario.duration + 1); n + 1];
    let record =
        |traces: &mut Vec<Vec<VesselRow>>, vessels: &[VesselState], river: &RiverModel, t: f64| {
            let mut collided = false;
            for (k, s) in vessels.iter().enumerate() {
                let here = river.at(k, t, s.position, draft)?;
                let gap = if k == 0 {
                    f64::NAN
                } else {
                    bow_to_stern_gap(vessels[k - 1].position, params.length, s.position)
                };
                collided |= gap <= 0.0;
                traces[k].push(row(t, s, gap, &here));
            }
            Ok::<bool, ScenarioError>(collided)
        };
    let mut collided = record(&mut traces, &vessels, &river, 0.0)?;

    let mut actions = vec![0.0; n + 1];
    let mut step = 0;
    while step < scenario.duration && !collided {
        let t0 = step as f64 * dt;
        let t1 = t0 + dt;
        for k in 1..=n {
            let here = river.at(k, t0, vessels[k].position, draft)?;
            let raw = RawObservation {
                speed: vessels[k].speed,
                power: vessels[k].power,
                gap: bow_to_stern_gap(vessels[k - 1].position, params.length, vessels[k].position),
                leader_speed: vessels[k - 1].speed,
                river: here,
            };
            let obs = Observation::from_raw(&raw, config, params.max_power);
            let a = policy.action(&obs);
            if !(0.0..=1.0).contains(&a) {
                return Err(ScenarioError::Invalid(format!(
                    "policy returned action {a} outside [0, 1]"
                )));
            }
            actions[k] = a;
        }

        let leader_noise: f64 = match leader {
            LeaderModel::Ar(_) => rng.sample(StandardNormal),
            _ => 0.0,
        };
        river.advance(&mut rng);

        let lead = vessels[0];
        let leader_river = river.at(0, t1, lead.position, draft)?;
        vessels[0] = match &mut leader {
            LeaderModel::Ar(speed) => {
                speed.step(leader_noise);
                speed.current = speed
                    .current
                    .max(leader_river.stream_speed + config.min_rel_speed);
                kinematic(&lead, speed.current, dt)
            }
            LeaderModel::Speed {
                base_rel_speed,
                swing,
                start,
                period,
            } => {
                let v = leader_river.stream_speed
                    + LeaderModel::rel_speed(*base_rel_speed, *swing, *start, *period, t1);
                kinematic(&lead, v, dt)
            }
            LeaderModel::Powered(schedule) => {
                let mut s = lead;
                s.power = params.max_power * LeaderModel::power_fraction(schedule, t0);
                advance_vessel(&s, &leader_river, params, dt)?
            }
            LeaderModel::Replay(samples) => {
                let (x, v) = LeaderModel::replay_at(samples, t1)?;
                VesselState {
                    position: x,
                    speed: v,
                    power: f64::NAN,
                }
            }
        };

        for k in 1..=n {
            let mut s = vessels[k];
            s.power = params.max_power * actions[k];
            let here = river.at(k, t1, s.position, draft)?;
            vessels[k] = advance_vessel(&s, &here, params, dt)?;
        }
        step += 1;
        collided = record(&mut traces, &vessels, &river, t1)?;
    }

    let metrics = compute_metrics(
        &scenario.name,
        scenario.kind,
        &traces,
        scenario.transient as f64 * dt,
        params.max_power,
    );
    Ok(ScenarioResult {
        scenario: scenario.clone(),
        traces,
        metrics,
    })
}

fn kinematic(s: &VesselState, v: f64, dt: f64) -> VesselState {
    VesselState {
        position: s.position + 0.5 * (s.speed + v) * dt,
        speed: v,
        power: f64::NAN,
    }
}

fn cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

pub fn write_vessel_trace<W: Write>(out: W, rows: &[VesselRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VESSEL_TRACE_HEADER)?;
    for r in rows {
        w.write_record(
            [
                r.t, r.x, r.v, r.power, r.gap, r.time_gap, r.h, r.a_cross, r.v_str,
            ]
            .map(cell),
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<name>_leader.csv` and `<name>_follower<k>.csv` into `dir` and
/// returns the paths written.
pub fn write_traces(
    dir: &std::path::Path,
    result: &ScenarioResult,
) -> std::io::Result<Vec<std::path::PathBuf>> {
    let mut paths = Vec::with_capacity(result.traces.len());
    for (k, rows) in result.traces.iter().enumerate() {
        let file = if k == 0 {
            format!("{}_leader.csv", result.scenario.name)
        } else {
            format!("{}_follower{k}.csv", result.scenario.name)
        };
        let path = dir.join(file);
        write_vessel_trace(std::fs::File::create(&path)?, rows)?;
        paths.push(path);
    }
    Ok(paths)
}
