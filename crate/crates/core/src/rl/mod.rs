//! Deep deterministic policy gradient, written against plain `Vec<f64>`
//! networks: MLPs with hand-written backpropagation, Adam, replay memory,
//! Ornstein-Uhlenbeck exploration and Polyak-averaged target networks.

mod adam;
mod agent;
pub mod checkpoint;
mod mlp;
mod noise;
mod replay;
mod train;

pub use adam::AdamState;
pub use agent::{squash_to_action, DdpgAgent, DdpgConfig, LearnStats};
pub use mlp::{soft_update, Activation, ForwardCache, Mlp};
pub use noise::OuNoise;
pub use replay::{ReplayBuffer, Transition};
pub use train::{train, EpisodeReport, TrainingReport};

use thiserror::Error;

use crate::env::EnvError;

#[derive(Debug, Error)]
pub enum RlError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("replay buffer holds {have} transitions, need {need}")]
    InsufficientBuffer { have: usize, need: usize },
    #[error("corrupt checkpoint: {0}")]
    Checkpoint(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Env(#[from] EnvError),
}
