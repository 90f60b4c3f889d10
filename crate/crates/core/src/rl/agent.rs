use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::mlp::{soft_update, Activation, Mlp};
use super::noise::OuNoise;
use super::replay::{ReplayBuffer, Transition};
use super::RlError;
use crate::env::{Observation, OBS_DIM};
use crate::rng::{stream_rng, Stream};

/// DDPG hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdpgConfig {
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub ou_theta: f64,
    pub ou_sigma: f64,
    pub hidden: Vec<usize>,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            tau: 0.001,
            batch_size: 32,
            buffer_capacity: 100_000,
            actor_lr: 0.001,
            critic_lr: 0.001,
            ou_theta: 0.15,
            ou_sigma: 0.2,
            hidden: vec![32, 32],
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err("ddpg.gamma must lie in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err("ddpg.tau must lie in [0, 1]".into());
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err("ddpg.batch_size must be positive and fit in the buffer".into());
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err("ddpg.hidden must list positive layer widths".into());
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return Err("ddpg learning rates must be positive".into());
        }
        Ok(())
    }

    pub fn actor_dims(&self) -> Vec<usize> {
        let mut d = vec![OBS_DIM];
        d.extend(&self.hidden);
        d.push(1);
        d
    }

    pub fn critic_dims(&self) -> Vec<usize> {
        let mut d = vec![OBS_DIM + 1];
        d.extend(&self.hidden);
        d.push(1);
        d
    }

    fn adam(&self, n: usize, lr: f64) -> AdamState {
        AdamState::new(n, lr, self.adam_beta1, self.adam_beta2, self.adam_eps)
    }
}

/// Maps a tanh-space actor output (plus noise) to an engine power fraction.
pub fn squash_to_action(y: f64) -> f64 {
    (0.5 * (y + 1.0)).clamp(0.0, 1.0)
}

/// Losses reported by one learning step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LearnStats {
    /// Mean squared TD error before the critic update.
    pub critic_loss: f64,
    /// Mean `Q(s, mu(s))` over the batch after the critic update.
    pub actor_objective: f64,
}

fn critic_input(state: &[f64; OBS_DIM], action: f64) -> [f64; OBS_DIM + 1] {
    let mut x = [0.0; OBS_DIM + 1];
    x[..OBS_DIM].copy_from_slice(state);
    x[OBS_DIM] = action;
    x
}

/// Actor, critic, their slowly tracking targets, optimizers, replay memory
/// and exploration noise.
#[derive(Debug, Clone)]
pub struct DdpgAgent {
    pub config: DdpgConfig,
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    pub actor_opt: AdamState,
    pub critic_opt: AdamState,
    pub buffer: ReplayBuffer,
    pub noise: OuNoise,
    noise_rng: ChaCha8Rng,
    replay_rng: ChaCha8Rng,
}

impl DdpgAgent {
    /// Randomly initialized agent; targets start as exact copies.
    pub fn new(config: DdpgConfig, seed: u64) -> Self {
        let mut init = stream_rng(seed, Stream::Init);
        let actor = Mlp::random(&config.actor_dims(), Activation::Tanh, &mut init);
        let critic = Mlp::random(&config.critic_dims(), Activation::Identity, &mut init);
        Self::from_networks(config, actor, critic, seed)
    }

    pub fn from_networks(config: DdpgConfig, actor: Mlp, critic: Mlp, seed: u64) -> Self {
        let actor_opt = config.adam(actor.params().len(), config.actor_lr);
        let critic_opt = config.adam(critic.params().len(), config.critic_lr);
        Self {
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            actor_opt,
            critic_opt,
            buffer: ReplayBuffer::new(config.buffer_capacity),
            noise: OuNoise::new(config.ou_theta, config.ou_sigma),
            noise_rng: stream_rng(seed, Stream::Noise),
            replay_rng: stream_rng(seed, Stream::Replay),
            config,
        }
    }

    /// Raw tanh-space policy output.
    pub fn policy(&self, obs: &Observation) -> f64 {
        self.actor
            .forward(&obs.to_array())
            .expect("observation width matches actor input")[0]
    }

    /// Power fraction in `[0, 1]`; with `explore` the OU noise is added in
    /// tanh space before mapping.
    pub fn act(&mut self, obs: &Observation, explore: bool) -> f64 {
        let mut y = self.policy(obs);
        if explore {
            y += self.noise.sample(&mut self.noise_rng);
        }
        squash_to_action(y)
    }

    /// Deterministic action, usable through a shared reference.
    pub fn act_greedy(&self, obs: &Observation) -> f64 {
        squash_to_action(self.policy(obs))
    }

    pub fn remember(&mut self, t: Transition) {
        self.buffer.push(t);
    }

    /// Samples a minibatch and performs one critic, actor and target update.
    pub fn learn_step(&mut self) -> Result<LearnStats, RlError> {
        let batch = self
            .buffer
            .sample(self.config.batch_size, &mut self.replay_rng)
            .ok_or(RlError::InsufficientBuffer {
                have: self.buffer.len(),
                need: self.config.batch_size,
            })?;
        self.learn_on_batch(&batch)
    }

    /// TD targets `r + gamma (1 - d) Q'(s', mu'(s'))` from the target networks.
    pub fn td_targets(&self, batch: &[Transition]) -> Result<Vec<f64>, RlError> {
        batch
            .iter()
            .map(|t| {
                if t.done {
                    return Ok(t.reward);
                }
                let next_action = squash_to_action(self.target_actor.forward(&t.next_state)?[0]);
                let q_next = self
                    .target_critic
                    .forward(&critic_input(&t.next_state, next_action))?[0];
                Ok(t.reward + self.config.gamma * q_next)
            })
            .collect()
    }

    /// Critic gradient of the mean squared TD error; returns (grads, loss).
    pub fn critic_gradient(
        &self,
        batch: &[Transition],
        targets: &[f64],
    ) -> Result<(Vec<f64>, f64), RlError> {
        let n = batch.len() as f64;
        let mut grads = vec![0.0; self.critic.params().len()];
        let mut loss = 0.0;
        for (t, y) in batch.iter().zip(targets) {
            let cache = self
                .critic
                .forward_cached(&critic_input(&t.state, t.action))?;
            let err = cache.output()[0] - y;
            loss += err * err / n;
            self.critic
                .backward_accumulate(&cache, &[2.0 * err / n], &mut grads)?;
        }
        Ok((grads, loss))
    }

    /// Gradient of `-mean Q(s, mu(s))` w.r.t. the actor parameters, i.e. the
    /// descent direction for the sampled deterministic policy gradient.
    /// Returns (grads, mean Q).
    pub fn actor_gradient(&self, batch: &[Transition]) -> Result<(Vec<f64>, f64), RlError> {
        let n = batch.len() as f64;
        let mut grads = vec![0.0; self.actor.params().len()];
        let mut scratch = vec![0.0; self.critic.params().len()];
        let mut objective = 0.0;
        for t in batch {
            let actor_cache = self.actor.forward_cached(&t.state)?;
            let y = actor_cache.output()[0];
            let action = 0.5 * (y + 1.0);
            let critic_cache = self
                .critic
                .forward_cached(&critic_input(&t.state, action))?;
            objective += critic_cache.output()[0] / n;
            let dq_dinput = self
                .critic
                .backward_accumulate(&critic_cache, &[1.0], &mut scratch)?;
            let dq_dy = 0.5 * dq_dinput[OBS_DIM];
            self.actor
                .backward_accumulate(&actor_cache, &[-dq_dy / n], &mut grads)?;
        }
        Ok((grads, objective))
    }

    pub fn learn_on_batch(&mut self, batch: &[Transition]) -> Result<LearnStats, RlError> {
        let targets = self.td_targets(batch)?;
        let (critic_grads, critic_loss) = self.critic_gradient(batch, &targets)?;
        self.critic_opt
            .update(self.critic.params_mut(), &critic_grads);

        let (actor_grads, actor_objective) = self.actor_gradient(batch)?;
        self.actor_opt.update(self.actor.params_mut(), &actor_grads);

        self.soft_update_targets();
        Ok(LearnStats {
            critic_loss,
            actor_objective,
        })
    }

    pub fn soft_update_targets(&mut self) {
        soft_update(&mut self.target_critic, &self.critic, self.config.tau);
        soft_update(&mut self.target_actor, &self.actor, self.config.tau);
    }
}
