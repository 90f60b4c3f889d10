//! Shared fixtures: a random AIS corpus and an exhaustive event oracle that
//! does not reuse the library's pairing code.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vfollow::ais::{ExtractOptions, FollowingEvent, TrackPoint};

/// `vessels` tracks of `points` asynchronous reports. Lanes at y = 0 and
/// y = 8 overlap for an 11.4 m beam, y = 40 does not; speeds cluster so
/// that many pairs fall under the speed threshold.
pub fn random_corpus(vessels: usize, points: usize, seed: u64) -> Vec<TrackPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lanes = [0.0, 8.0, 40.0];
    let mut out = Vec::with_capacity(vessels * points);
    for v in 0..vessels {
        let dir = if rng.random_bool(0.8) { 1.0 } else { -1.0 };
        let lane = lanes[rng.random_range(0..lanes.len())];
        let speed = 3.0 + rng.random_range(-0.25..0.25);
        let length = rng.random_range(80.0..135.0);
        let beam = 11.4;
        let mut t = rng.random_range(0.0..10.0);
        let mut x = rng.random_range(0.0..4000.0);
        for _ in 0..points {
            let v_now = dir * (speed + rng.random_range(-0.05..0.05));
            out.push(TrackPoint {
                vessel_id: format!("V{v:02}"),
                timestamp: t,
                longitudinal_position: x,
                lateral_position: lane + rng.random_range(-0.5..0.5),
                speed_ground: v_now,
                length,
                beam,
                stream_speed: if rng.random_bool(0.9) {
                    Some(rng.random_range(-0.5..1.0))
                } else {
                    None
                },
            });
            let dt = 10.0 + rng.random_range(-3.0..3.0);
            x += v_now * dt;
            t += dt;
        }
    }
    out
}

/// Every (follower report, leader) combination checked by linear scans.
pub fn brute_force_events(points: &[TrackPoint], opts: &ExtractOptions) -> Vec<FollowingEvent> {
    let (x0, t0) = opts.window_origin.unwrap_or_else(|| {
        let x = points
            .iter()
            .map(|p| p.longitudinal_position)
            .fold(f64::INFINITY, f64::min);
        let t = points
            .iter()
            .map(|p| p.timestamp)
            .fold(f64::INFINITY, f64::min);
        (x, t)
    });
    let inside = |p: &TrackPoint| {
        let dx = p.longitudinal_position - x0;
        let dt = p.timestamp - t0;
        dx >= 0.0 && dx <= opts.window_length && dt >= 0.0 && dt <= opts.window_duration
    };
    let mut ids: Vec<&str> = points.iter().map(|p| p.vessel_id.as_str()).collect();
    ids.sort();
    ids.dedup();
    let mut events = Vec::new();
    for f_id in &ids {
        for l_id in &ids {
            if f_id == l_id {
                continue;
            }
            for fp in points.iter().filter(|p| p.vessel_id == *f_id && inside(p)) {
                let mut best: Option<&TrackPoint> = None;
                for lp in points.iter().filter(|p| p.vessel_id == *l_id && inside(p)) {
                    let d = (lp.timestamp - fp.timestamp).abs();
                    if d > opts.alignment_tolerance {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some(b) => {
                            let bd = (b.timestamp - fp.timestamp).abs();
                            d < bd || (d == bd && lp.timestamp < b.timestamp)
                        }
                    };
                    if better {
                        best = Some(lp);
                    }
                }
                let Some(lp) = best else { continue };
                let same_dir = (fp.speed_ground > 0.0 && lp.speed_ground > 0.0)
                    || (fp.speed_ground < 0.0 && lp.speed_ground < 0.0);
                if !same_dir || (fp.speed_ground - lp.speed_ground).abs() >= opts.speed_threshold {
                    continue;
                }
                let overlap = (fp.lateral_position + fp.beam / 2.0)
                    .min(lp.lateral_position + lp.beam / 2.0)
                    - (fp.lateral_position - fp.beam / 2.0)
                        .max(lp.lateral_position - lp.beam / 2.0);
                if overlap <= 0.0 {
                    continue;
                }
                let dir = fp.speed_ground.signum();
                let gap = dir * (lp.longitudinal_position - fp.longitudinal_position) - lp.length;
                if gap <= 0.0 {
                    continue;
                }
                let (v_rel, stream_relative) = match fp.stream_speed {
                    Some(s) => (dir * (fp.speed_ground - s), true),
                    None => (fp.speed_ground.abs(), false),
                };
                if v_rel <= 0.0 {
                    continue;
                }
                events.push(FollowingEvent {
                    follower_id: f_id.to_string(),
                    leader_id: l_id.to_string(),
                    timestamp: fp.timestamp,
                    gap,
                    time_gap: gap / v_rel,
                    stream_relative,
                });
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

/// Number of mismatching positions between two event lists; a length
/// difference counts fully.
pub fn event_mismatches(a: &[FollowingEvent], b: &[FollowingEvent]) -> usize {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0);
    let differing = a
        .iter()
        .zip(b)
        .filter(|(x, y)| {
            x.follower_id != y.follower_id
                || x.leader_id != y.leader_id
                || x.timestamp != y.timestamp
                || x.stream_relative != y.stream_relative
                || !close(x.gap, y.gap)
                || !close(x.time_gap, y.time_gap)
        })
        .count();
    differing + a.len().abs_diff(b.len())
}
