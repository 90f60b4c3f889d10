use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};

use super::tracks::{TrackPoint, STREAM_COLUMN, TRACK_COLUMNS};
use crate::rng::{stream_rng, Stream};

/// Corpus of leader/follower pairs whose time gaps are independent draws
/// from lognormal(`mu`, `sigma`). Each pair sails in its own lane, so the
/// only following events are the `pairs * samples` designed ones and their
/// time gaps reproduce the draws.
pub fn lognormal_pair_corpus(
    pairs: usize,
    samples: usize,
    mu: f64,
    sigma: f64,
    seed: u64,
) -> Vec<TrackPoint> {
    let mut rng = stream_rng(seed, Stream::Scenario);
    let dist = LogNormal::new(mu, sigma).expect("sigma is finite and non-negative");
    let (length, beam) = (110.0, 11.4);
    let mut points = Vec::with_capacity(2 * pairs * samples);
    for p in 0..pairs {
        let lane = 50.0 * p as f64;
        let stream = rng.random_range(-0.5..1.5);
        for i in 0..samples {
            let t = 10.0 * i as f64;
            let v_rel = rng.random_range(1.0..3.0);
            let gap = dist.sample(&mut rng) * v_rel;
            let v = stream + v_rel;
            let point = |id: String, x: f64| TrackPoint {
                vessel_id: id,
                timestamp: t,
                longitudinal_position: x,
                lateral_position: lane,
                speed_ground: v,
                length,
                beam,
                stream_speed: Some(stream),
            };
            points.push(point(format!("F{p:03}"), 0.0));
            points.push(point(format!("L{p:03}"), length + gap));
        }
    }
    points
}

pub fn write_tracks_csv<W: Write>(out: W, points: &[TrackPoint]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = TRACK_COLUMNS.to_vec();
    header.push(STREAM_COLUMN);
    w.write_record(&header)?;
    for p in points {
        w.write_record([
            p.vessel_id.clone(),
            p.timestamp.to_string(),
            p.longitudinal_position.to_string(),
            p.lateral_position.to_string(),
            p.speed_ground.to_string(),
            p.length.to_string(),
            p.beam.to_string(),
            p.stream_speed.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
