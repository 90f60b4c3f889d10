//! Binary agent checkpoints. Layout (all integers and floats little-endian):
//!
//! ```text
//! magic        4 bytes  "RFLW"
//! version      u16
//! net_count    u32      (4: actor, critic, target actor, target critic)
//! per network:
//!   activation u32      (0 identity, 1 tanh; output layer only)
//!   layers     u32      number of affine layers L
//!   dims       u32 x (L + 1)
//!   params     f64 x P  per layer: weights (out x in, row-major), then bias
//! opt_count    u32      (2: actor, critic)
//! per optimizer:
//!   step       u64
//!   lr, beta1, beta2, eps   f64 x 4
//!   len        u32
//!   m          f64 x len
//!   v          f64 x len
//! ```

use std::io::{Read, Write};

use super::adam::AdamState;
use super::agent::{DdpgAgent, DdpgConfig};
use super::mlp::{Activation, Mlp};
use super::RlError;

pub const MAGIC: &[u8; 4] = b"RFLW";
pub const VERSION: u16 = 1;

fn corrupt(msg: impl Into<String>) -> RlError {
    RlError::Checkpoint(msg.into())
}

fn write_u32<W: Write>(w: &mut W, v: usize) -> Result<(), RlError> {
    let v = u32::try_from(v).map_err(|_| corrupt("value exceeds u32"))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_f64s<W: Write>(w: &mut W, xs: &[f64]) -> Result<(), RlError> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<usize, RlError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b) as usize)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, RlError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, RlError> {
    Ok(f64::from_bits(read_u64(r)?))
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>, RlError> {
    (0..n).map(|_| read_f64(r)).collect()
}

fn write_net<W: Write>(w: &mut W, net: &Mlp) -> Result<(), RlError> {
    write_u32(w, net.output_activation().code() as usize)?;
    write_u32(w, net.num_layers())?;
    for d in net.dims() {
        write_u32(w, *d)?;
    }
    write_f64s(w, net.params())
}

// Guards allocation sizes when reading untrusted headers.
const MAX_LAYERS: usize = 64;
const MAX_WIDTH: usize = 1 << 16;

fn read_net<R: Read>(r: &mut R) -> Result<Mlp, RlError> {
    let code = read_u32(r)?;
    let activation = Activation::from_code(code as u32)
        .ok_or_else(|| corrupt(format!("unknown activation code {code}")))?;
    let layers = read_u32(r)?;
    if layers == 0 || layers > MAX_LAYERS {
        return Err(corrupt(format!("implausible layer count {layers}")));
    }
    let dims = (0..=layers)
        .map(|_| read_u32(r))
        .collect::<Result<Vec<_>, _>>()?;
    if dims.iter().any(|d| *d == 0 || *d > MAX_WIDTH) {
        return Err(corrupt(format!("implausible dimensions {dims:?}")));
    }
    let n: usize = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    let params = read_f64s(r, n)?;
    Mlp::from_params(&dims, activation, params)
}

fn write_adam<W: Write>(w: &mut W, a: &AdamState) -> Result<(), RlError> {
    w.write_all(&a.step.to_le_bytes())?;
    write_f64s(w, &[a.lr, a.beta1, a.beta2, a.eps])?;
    write_u32(w, a.m.len())?;
    write_f64s(w, &a.m)?;
    write_f64s(w, &a.v)
}

fn read_adam<R: Read>(r: &mut R, expected_len: usize) -> Result<AdamState, RlError> {
    let step = read_u64(r)?;
    let lr = read_f64(r)?;
    let beta1 = read_f64(r)?;
    let beta2 = read_f64(r)?;
    let eps = read_f64(r)?;
    let len = read_u32(r)?;
    if len != expected_len {
        return Err(corrupt(format!(
            "optimizer size {len} does not match network size {expected_len}"
        )));
    }
    let m = read_f64s(r, len)?;
    let v = read_f64s(r, len)?;
    Ok(AdamState {
        lr,
        beta1,
        beta2,
        eps,
        step,
        m,
        v,
    })
}

/// Writes networks and optimizer states. Replay memory and RNG positions are
/// not persisted.
pub fn save<W: Write>(agent: &DdpgAgent, mut w: W) -> Result<(), RlError> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    write_u32(&mut w, 4)?;
    for net in [
        &agent.actor,
        &agent.critic,
        &agent.target_actor,
        &agent.target_critic,
    ] {
        write_net(&mut w, net)?;
    }
    write_u32(&mut w, 2)?;
    write_adam(&mut w, &agent.actor_opt)?;
    write_adam(&mut w, &agent.critic_opt)?;
    w.flush()?;
    Ok(())
}

/// Restores an agent. Hyperparameters not stored in the file come from
/// `config`; `seed` seeds fresh noise and replay streams.
pub fn load<R: Read>(mut r: R, config: DdpgConfig, seed: u64) -> Result<DdpgAgent, RlError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| corrupt("file too short for checkpoint header"))?;
    if &magic != MAGIC {
        return Err(corrupt(format!("bad magic {magic:?}, expected \"RFLW\"")));
    }
    let mut vb = [0u8; 2];
    r.read_exact(&mut vb)?;
    let version = u16::from_le_bytes(vb);
    if version != VERSION {
        return Err(corrupt(format!("unsupported checkpoint version {version}")));
    }
    let nets = read_u32(&mut r)?;
    if nets != 4 {
        return Err(corrupt(format!("expected 4 networks, found {nets}")));
    }
    let actor = read_net(&mut r)?;
    let critic = read_net(&mut r)?;
    let target_actor = read_net(&mut r)?;
    let target_critic = read_net(&mut r)?;
    if actor.dims() != target_actor.dims() || critic.dims() != target_critic.dims() {
        return Err(corrupt("target network shapes differ from online networks"));
    }
    if actor.dims()[0] + 1 != critic.dims()[0] {
        return Err(corrupt("critic input must be actor input plus one action"));
    }
    let opts = read_u32(&mut r)?;
    if opts != 2 {
        return Err(corrupt(format!(
            "expected 2 optimizer states, found {opts}"
        )));
    }
    let actor_opt = read_adam(&mut r, actor.params().len())?;
    let critic_opt = read_adam(&mut r, critic.params().len())?;

    let mut config = config;
    config.hidden = actor.dims()[1..actor.dims().len() - 1].to_vec();
    let mut agent = DdpgAgent::from_networks(config, actor, critic, seed);
    agent.target_actor = target_actor;
    agent.target_critic = target_critic;
    agent.actor_opt = actor_opt;
    agent.critic_opt = critic_opt;
    Ok(agent)
}

pub fn save_to_path(agent: &DdpgAgent, path: &std::path::Path) -> Result<(), RlError> {
    let file = std::fs::File::create(path)?;
    save(agent, std::io::BufWriter::new(file))
}

pub fn load_from_path(
    path: &std::path::Path,
    config: DdpgConfig,
    seed: u64,
) -> Result<DdpgAgent, RlError> {
    let file = std::fs::File::open(path)?;
    load(std::io::BufReader::new(file), config, seed)
}
