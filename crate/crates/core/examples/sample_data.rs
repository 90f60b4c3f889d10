//! Writes the sample inputs under `data/`: a synthetic track corpus, the
//! built-in river reach at two lateral offsets, a leader power schedule and
//! a leader trajectory.
//!
//!     cargo run -p vfollow --example sample_data -- data

use std::fs::File;
use std::path::PathBuf;

use rand::Rng;
use rand_distr::StandardNormal;
use vfollow::ais::{lognormal_pair_corpus, write_tracks_csv};
use vfollow::env::{ArProcess, EnvConfig};
use vfollow::rng::{stream_rng, Stream};
use vfollow::validation::RiverProfile;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir)?;

    let points = lognormal_pair_corpus(20, 100, 5.41, 1.06, 7);
    write_tracks_csv(File::create(dir.join("tracks_synthetic.csv"))?, &points)?;

    RiverProfile::synthetic_reach(0.0).write_csv(File::create(dir.join("reach_axis.csv"))?)?;
    RiverProfile::synthetic_reach(40.0).write_csv(File::create(dir.join("reach_offset40.csv"))?)?;

    std::fs::write(
        dir.join("leader_schedule.csv"),
        "t_s,power_fraction\n0,0.5\n700,1.0\n1400,0.2\n2100,0.8\n2800,0.05\n",
    )?;

    // AR(1) leader on the training processes, kept 2 m/s above the stream.
    let config = EnvConfig::default();
    let mut rng = stream_rng(11, Stream::Scenario);
    let mut speed = ArProcess::new(config.leader_speed, 3.5);
    let mut stream = ArProcess::at_stationary_mean(config.stream);
    let mut x = 710.0;
    let mut csv = format!("t_s,x_m,v_mps\n0,{x},{}\n", speed.current);
    for t in 1..=3000 {
        let before = speed.current;
        speed.step(rng.sample(StandardNormal));
        let floor = stream.step(rng.sample(StandardNormal)) + config.min_rel_speed;
        speed.current = speed.current.max(floor);
        x += 0.5 * (before + speed.current);
        csv += &format!("{t},{x},{}\n", speed.current);
    }
    std::fs::write(dir.join("leader_trajectory.csv"), csv)?;
    Ok(())
}
