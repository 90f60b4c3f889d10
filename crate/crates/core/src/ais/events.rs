use std::io::Write;

use super::tracks::{Track, TrackPoint};

/// Thresholds and observation window for event extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    /// Maximum |v_follower - v_leader|, m/s (exclusive).
    pub speed_threshold: f64,
    /// Extent of the observation window along the river, m.
    pub window_length: f64,
    /// Extent of the observation window in time, s.
    pub window_duration: f64,
    /// Lower corner `(x, t)` of the window; defaults to the corpus minimum.
    pub window_origin: Option<(f64, f64)>,
    /// Maximum timestamp difference for pairing two reports, s.
    pub alignment_tolerance: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            speed_threshold: 0.2,
            window_length: 60_000.0,
            window_duration: 86_400.0,
            window_origin: None,
            alignment_tolerance: 5.0,
        }
    }
}

/// A follower report whose aligned leader report satisfies both following
/// criteria.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowingEvent {
    pub follower_id: String,
    pub leader_id: String,
    pub timestamp: f64,
    /// Bow-to-stern gap, m.
    pub gap: f64,
    /// Gap over the follower's speed through the water, s.
    pub time_gap: f64,
    /// False when no stream speed was recorded and ground speed was used.
    pub stream_relative: bool,
}

/// Index of the report nearest in time to `t` (earlier wins ties), if within
/// `tolerance`.
pub fn nearest_in_time(points: &[TrackPoint], t: f64, tolerance: f64) -> Option<usize> {
    let idx = points.partition_point(|p| p.timestamp < t);
    let mut best: Option<(usize, f64)> = None;
    for i in [idx.checked_sub(1), Some(idx)].into_iter().flatten() {
        if let Some(p) = points.get(i) {
            let d = (p.timestamp - t).abs();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
    }
    best.filter(|(_, d)| *d <= tolerance).map(|(i, _)| i)
}

/// Applies both following criteria to one aligned pair of reports.
pub fn classify_pair(
    follower: &TrackPoint,
    leader: &TrackPoint,
    speed_threshold: f64,
) -> Option<(f64, f64, bool)> {
    let dir = follower.speed_ground.signum();
    if follower.speed_ground == 0.0 || leader.speed_ground.signum() != dir {
        return None;
    }
    if (follower.speed_ground - leader.speed_ground).abs() >= speed_threshold {
        return None;
    }
    let f_lo = follower.lateral_position - 0.5 * follower.beam;
    let f_hi = follower.lateral_position + 0.5 * follower.beam;
    let l_lo = leader.lateral_position - 0.5 * leader.beam;
    let l_hi = leader.lateral_position + 0.5 * leader.beam;
    if f_lo.max(l_lo) >= f_hi.min(l_hi) {
        return None;
    }
    let gap = dir * (leader.longitudinal_position - follower.longitudinal_position) - leader.length;
    if gap <= 0.0 {
        return None;
    }
    let (v_rel, stream_relative) = match follower.stream_speed {
        Some(s) => (dir * (follower.speed_ground - s), true),
        None => (follower.speed_ground.abs(), false),
    };
    if v_rel <= 0.0 {
        return None;
    }
    Some((gap, gap / v_rel, stream_relative))
}

fn window_origin(tracks: &[Track], opts: &ExtractOptions) -> (f64, f64) {
    opts.window_origin.unwrap_or_else(|| {
        tracks
            .iter()
            .flat_map(|t| &t.points)
            .fold((f64::INFINITY, f64::INFINITY), |(x, t), p| {
                (x.min(p.longitudinal_position), t.min(p.timestamp))
            })
    })
}

fn in_window(p: &TrackPoint, origin: (f64, f64), opts: &ExtractOptions) -> bool {
    let dx = p.longitudinal_position - origin.0;
    let dt = p.timestamp - origin.1;
    (0.0..=opts.window_length).contains(&dx) && (0.0..=opts.window_duration).contains(&dt)
}

/// One event per follower report that pairs with a qualifying leader
/// report. Output is ordered by (follower, leader, timestamp).
pub fn extract_events(tracks: &[Track], opts: &ExtractOptions) -> Vec<FollowingEvent> {
    if tracks.is_empty() {
        return Vec::new();
    }
    let origin = window_origin(tracks, opts);
    let windowed: Vec<Track> = tracks
        .iter()
        .map(|t| Track {
            vessel_id: t.vessel_id.clone(),
            points: t
                .points
                .iter()
                .filter(|p| in_window(p, origin, opts))
                .cloned()
                .collect(),
        })
        .collect();

    let mut events = Vec::new();
    for follower in &windowed {
        for leader in &windowed {
            if follower.vessel_id == leader.vessel_id || leader.points.is_empty() {
                continue;
            }
            for fp in &follower.points {
                let Some(li) =
                    nearest_in_time(&leader.points, fp.timestamp, opts.alignment_tolerance)
                else {
                    continue;
                };
                if let Some((gap, time_gap, stream_relative)) =
                    classify_pair(fp, &leader.points[li], opts.speed_threshold)
                {
                    events.push(FollowingEvent {
                        follower_id: follower.vessel_id.clone(),
                        leader_id: leader.vessel_id.clone(),
                        timestamp: fp.timestamp,
                        gap,
                        time_gap,
                        stream_relative,
                    });
                }
            }
        }
    }
    events.sort_by(|a, b| {
        (&a.follower_id, &a.leader_id)
            .cmp(&(&b.follower_id, &b.leader_id))
            .then(a.timestamp.total_cmp(&b.timestamp))
    });
    events
}

pub fn write_events_csv<W: Write>(out: W, events: &[FollowingEvent]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "follower_id",
        "leader_id",
        "timestamp_s",
        "gap_m",
        "time_gap_s",
        "stream_relative",
    ])?;
    for e in events {
        w.write_record([
            e.follower_id.clone(),
            e.leader_id.clone(),
            e.timestamp.to_string(),
            e.gap.to_string(),
            e.time_gap.to_string(),
            (e.stream_relative as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(id: &str, t: f64, x: f64, y: f64, v: f64) -> TrackPoint {
        TrackPoint {
            vessel_id: id.into(),
            timestamp: t,
            longitudinal_position: x,
            lateral_position: y,
            speed_ground: v,
            length: 100.0,
            beam: 10.0,
            stream_speed: Some(0.5),
        }
    }

    fn pair(dv: f64, lateral: f64) -> Vec<Track> {
        let leader = (0..20)
            .map(|i| point("L", i as f64 * 10.0, 1000.0 + 30.0 * i as f64, 0.0, 3.0))
            .collect();
        let follower = (0..20)
            .map(|i| {
                point(
                    "F",
                    i as f64 * 10.0 + 1.0,
                    30.0 * i as f64,
                    lateral,
                    3.0 + dv,
                )
            })
            .collect();
        vec![
            Track {
                vessel_id: "F".into(),
                points: follower,
            },
            Track {
                vessel_id: "L".into(),
                points: leader,
            },
        ]
    }

    #[test]
    fn parallel_tracks_produce_event_per_sample() {
        let events = extract_events(&pair(0.1, 0.0), &ExtractOptions::default());
        assert_eq!(events.len(), 20);
        assert!(events
            .iter()
            .all(|e| e.follower_id == "F" && e.leader_id == "L"));
        let e = &events[0];
        assert!((e.gap - 900.0).abs() < 1e-9);
        assert!((e.time_gap - 900.0 / 2.6).abs() < 1e-9);
        assert!(e.stream_relative);
    }

    #[test]
    fn speed_difference_above_threshold() {
        assert!(extract_events(&pair(0.3, 0.0), &ExtractOptions::default()).is_empty());
    }

    #[test]
    fn lateral_separation_blocks_events() {
        assert!(extract_events(&pair(0.0, 10.5), &ExtractOptions::default()).is_empty());
        assert_eq!(
            extract_events(&pair(0.0, 9.5), &ExtractOptions::default()).len(),
            20
        );
    }

    #[test]
    fn ground_speed_fallback_is_flagged() {
        let mut tracks = pair(0.0, 0.0);
        for p in &mut tracks[0].points {
            p.stream_speed = None;
        }
        let events = extract_events(&tracks, &ExtractOptions::default());
        assert!(events.iter().all(|e| !e.stream_relative));
        assert!((events[0].time_gap - 300.0).abs() < 1e-9);
    }

    #[test]
    fn nearest_alignment() {
        let pts: Vec<_> = [0.0, 10.0, 20.0]
            .iter()
            .map(|t| point("a", *t, 0.0, 0.0, 1.0))
            .collect();
        assert_eq!(nearest_in_time(&pts, 4.0, 5.0), Some(0));
        assert_eq!(nearest_in_time(&pts, 5.0, 5.0), Some(0));
        assert_eq!(nearest_in_time(&pts, 6.0, 5.0), Some(1));
        assert_eq!(nearest_in_time(&pts, 26.0, 5.0), None);
        assert_eq!(nearest_in_time(&[], 1.0, 5.0), None);
    }

    #[test]
    fn empty_input() {
        assert!(extract_events(&[], &ExtractOptions::default()).is_empty());
    }
}
