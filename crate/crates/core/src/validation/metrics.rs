use std::io::Write;

use serde::Serialize;

use super::run::VesselRow;
use super::scenario::ScenarioKind;
use super::ScenarioError;

/// Below this the first follower's speed is considered constant.
const MIN_OSCILLATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FollowerMetrics {
    pub follower: usize,
    pub min_gap: f64,
    pub min_gap_steady: f64,
    pub mean_time_gap_steady: f64,
    pub comfort_rms: f64,
    pub comfort_rms_steady: f64,
    /// Mean |v_k - v_{k-1}| over the run, m/s.
    pub speed_tracking_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioMetrics {
    pub scenario: String,
    pub kind: ScenarioKind,
    pub steps: usize,
    pub collision: bool,
    pub min_gap: f64,
    pub min_gap_steady: f64,
    pub comfort_rms: f64,
    pub comfort_rms_steady: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub string_stability_ratio: Option<f64>,
    pub followers: Vec<FollowerMetrics>,
}

/// RMS of per-step power changes as a fraction of `max_power`, over steps
/// ending after `from_t`. NaN when there are none.
pub fn comfort_rms(rows: &[VesselRow], max_power: f64, from_t: f64) -> f64 {
    let sq: Vec<f64> = rows
        .windows(2)
        .filter(|w| w[1].t > from_t)
        .map(|w| ((w[1].power - w[0].power) / max_power).powi(2))
        .collect();
    if sq.is_empty() {
        return f64::NAN;
    }
    (sq.iter().sum::<f64>() / sq.len() as f64).sqrt()
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Speed standard deviation of the last follower over that of the first,
/// both over the same post-transient window. Below 1 means oscillations
/// shrink along the platoon.
pub fn string_stability_ratio(first: &[f64], last: &[f64]) -> Result<f64, ScenarioError> {
    if first.is_empty() || last.is_empty() {
        return Err(ScenarioError::Invalid("no post-transient samples".into()));
    }
    let osc_first = std_dev(first);
    if osc_first < MIN_OSCILLATION {
        return Err(ScenarioError::DegenerateOscillation(osc_first));
    }
    Ok(std_dev(last) / osc_first)
}

fn min_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::INFINITY, f64::min)
}

/// Metrics from per-vessel traces (`traces[0]` the leader). Steady-state
/// quantities only use samples with `t >= transient_t`.
pub fn compute_metrics(
    name: &str,
    kind: ScenarioKind,
    traces: &[Vec<VesselRow>],
    transient_t: f64,
    max_power: f64,
) -> ScenarioMetrics {
    let steady = |rows: &[VesselRow]| -> Vec<VesselRow> {
        rows.iter()
            .filter(|r| r.t >= transient_t)
            .copied()
            .collect()
    };
    let followers: Vec<FollowerMetrics> = (1..traces.len())
        .map(|k| {
            let rows = &traces[k];
            let st = steady(rows);
            let tracking = rows
                .iter()
                .zip(&traces[k - 1])
                .map(|(f, l)| (f.v - l.v).abs())
                .sum::<f64>()
                / rows.len() as f64;
            FollowerMetrics {
                follower: k,
                min_gap: min_of(rows.iter().map(|r| r.gap)),
                min_gap_steady: min_of(st.iter().map(|r| r.gap)),
                mean_time_gap_steady: st.iter().map(|r| r.time_gap).sum::<f64>() / st.len() as f64,
                comfort_rms: comfort_rms(rows, max_power, f64::NEG_INFINITY),
                comfort_rms_steady: comfort_rms(rows, max_power, transient_t),
                speed_tracking_error: tracking,
            }
        })
        .collect();

    let string_stability_ratio = if followers.len() >= 2 {
        let speeds = |rows: &[VesselRow]| steady(rows).iter().map(|r| r.v).collect::<Vec<_>>();
        string_stability_ratio(&speeds(&traces[1]), &speeds(&traces[traces.len() - 1])).ok()
    } else {
        None
    };
    let worst = |f: fn(&FollowerMetrics) -> f64| followers.iter().map(f).fold(f64::NAN, f64::max);
    let min_gap = min_of(followers.iter().map(|f| f.min_gap));
    ScenarioMetrics {
        scenario: name.into(),
        kind,
        steps: traces.first().map_or(0, |t| t.len().saturating_sub(1)),
        collision: min_gap <= 0.0,
        min_gap,
        min_gap_steady: min_of(followers.iter().map(|f| f.min_gap_steady)),
        comfort_rms: worst(|f| f.comfort_rms),
        comfort_rms_steady: worst(|f| f.comfort_rms_steady),
        string_stability_ratio,
        followers,
    }
}

/// Key-value metrics summary. Per-follower values appear as `[[followers]]`
/// tables.
pub fn write_metrics_toml<W: Write>(mut out: W, metrics: &ScenarioMetrics) -> std::io::Result<()> {
    let text = toml::to_string(metrics).map_err(std::io::Error::other)?;
    out.write_all(text.as_bytes())
}
