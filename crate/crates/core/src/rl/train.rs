use std::io::Write;

use super::agent::DdpgAgent;
use super::replay::Transition;
use super::RlError;
use crate::env::RiverEnv;
use crate::rng::derive_seed;

/// Summary of one training episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeReport {
    pub episode: usize,
    pub steps: usize,
    pub total_reward: f64,
    pub collision: bool,
    pub mean_critic_loss: f64,
    pub final_gap: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingReport {
    pub episodes: Vec<EpisodeReport>,
}

impl TrainingReport {
    pub fn collisions(&self) -> usize {
        self.episodes.iter().filter(|e| e.collision).count()
    }

    /// Mean episode reward over `range` of episode indices (clamped).
    pub fn mean_reward(&self, range: std::ops::Range<usize>) -> f64 {
        let end = range.end.min(self.episodes.len());
        let start = range.start.min(end);
        let slice = &self.episodes[start..end];
        if slice.is_empty() {
            return f64::NAN;
        }
        slice.iter().map(|e| e.total_reward).sum::<f64>() / slice.len() as f64
    }

    /// Per-episode metrics CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "episode",
            "steps",
            "total_reward",
            "collision",
            "mean_critic_loss",
            "final_gap",
        ])?;
        for e in &self.episodes {
            w.write_record([
                e.episode.to_string(),
                e.steps.to_string(),
                e.total_reward.to_string(),
                (e.collision as u8).to_string(),
                e.mean_critic_loss.to_string(),
                e.final_gap.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `episodes` episodes of acting and learning. One gradient step is taken
/// per environment step as soon as the replay buffer holds one batch. The
/// observer is called after every episode (checkpointing, logging).
pub fn train<F>(
    agent: &mut DdpgAgent,
    env: &mut RiverEnv,
    episodes: usize,
    seed: u64,
    mut observer: F,
) -> Result<TrainingReport, RlError>
where
    F: FnMut(&EpisodeReport, &DdpgAgent) -> Result<(), RlError>,
{
    let mut report = TrainingReport::default();
    for episode in 0..episodes {
        agent.noise.reset();
        let mut obs = env.reset(derive_seed(seed, episode as u64));
        let mut total_reward = 0.0;
        let mut loss_sum = 0.0;
        let mut learn_steps = 0usize;
        let mut steps = 0;
        let (collision, final_gap) = loop {
            let action = agent.act(&obs, true);
            let out = env.step(action)?;
            agent.remember(Transition {
                state: obs.to_array(),
                action,
                reward: out.reward,
                next_state: out.observation.to_array(),
                done: out.done,
            });
            if agent.buffer.len() >= agent.config.batch_size {
                loss_sum += agent.learn_step()?.critic_loss;
                learn_steps += 1;
            }
            total_reward += out.reward;
            steps += 1;
            obs = out.observation;
            if out.done {
                break (out.collision, out.row.gap);
            }
        };
        let ep = EpisodeReport {
            episode,
            steps,
            total_reward,
            collision,
            mean_critic_loss: if learn_steps > 0 {
                loss_sum / learn_steps as f64
            } else {
                f64::NAN
            },
            final_gap,
        };
        log::debug!(
            "episode {episode}: reward {total_reward:.5} steps {steps} collision {collision}"
        );
        observer(&ep, agent)?;
        report.episodes.push(ep);
    }
    Ok(report)
}
