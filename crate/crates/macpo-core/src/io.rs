//! Binary episode serialization and debug CSV export.
//!
//! Episode files are little-endian with a 16-byte header:
//!
//! ```text
//! offset 0   magic   8 bytes  "MACPOEPI"
//! offset 8   version u32      currently 1
//! offset 12  flags   u32      reserved, 0
//! ```
//!
//! followed by the shape block (`n_agents`, `n_actions`, `obs_dim`,
//! `state_dim`, `episode_limit`, `length`, all u32) and `length` step
//! records. Each step is: state doubles, per-agent observation doubles,
//! per-agent availability bytes, per-agent action u32s, reward double,
//! terminated byte. Only the filled prefix is stored; files are the
//! canonical (compact) form of an episode.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::types::{Episode, EpisodeShape, JointAction, Transition};

pub const EPISODE_MAGIC: &[u8; 8] = b"MACPOEPI";
pub const EPISODE_VERSION: u32 = 1;

pub fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn read_u8(r: &mut impl Read) -> Result<u8> {
    let mut buf = [0u8; 1];
    r.read_exact(&mut buf)?;
    Ok(buf[0])
}

pub fn write_episode(w: &mut impl Write, episode: &Episode, shape: &EpisodeShape) -> Result<()> {
    episode.validate(shape)?;
    w.write_all(EPISODE_MAGIC)?;
    write_u32(w, EPISODE_VERSION)?;
    write_u32(w, 0)?;
    write_u32(w, shape.n_agents as u32)?;
    write_u32(w, shape.n_actions as u32)?;
    write_u32(w, shape.obs_dim as u32)?;
    write_u32(w, shape.state_dim as u32)?;
    write_u32(w, shape.episode_limit as u32)?;
    write_u32(w, episode.length() as u32)?;
    for step in episode.filled_steps() {
        for &v in &step.state {
            write_f64(w, v)?;
        }
        for obs in &step.obs {
            for &v in obs {
                write_f64(w, v)?;
            }
        }
        for avail in &step.avail {
            for &a in avail {
                w.write_all(&[a as u8])?;
            }
        }
        for &a in &step.joint_action.actions {
            write_u32(w, a as u32)?;
        }
        write_f64(w, step.reward)?;
        w.write_all(&[step.terminated as u8])?;
    }
    Ok(())
}

pub fn read_episode(r: &mut impl Read) -> Result<(Episode, EpisodeShape)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != EPISODE_MAGIC {
        return Err(Error::BadFormat("episode magic mismatch".into()));
    }
    let version = read_u32(r)?;
    if version != EPISODE_VERSION {
        return Err(Error::BadFormat(format!("unsupported episode version {version}")));
    }
    let _flags = read_u32(r)?;
    let shape = EpisodeShape {
        n_agents: read_u32(r)? as usize,
        n_actions: read_u32(r)? as usize,
        obs_dim: read_u32(r)? as usize,
        state_dim: read_u32(r)? as usize,
        episode_limit: read_u32(r)? as usize,
    };
    let length = read_u32(r)? as usize;
    if length > shape.episode_limit {
        return Err(Error::BadFormat(format!(
            "episode length {length} exceeds limit {}",
            shape.episode_limit
        )));
    }
    let mut steps = Vec::with_capacity(length);
    for _ in 0..length {
        let mut state = Vec::with_capacity(shape.state_dim);
        for _ in 0..shape.state_dim {
            state.push(read_f64(r)?);
        }
        let mut obs = Vec::with_capacity(shape.n_agents);
        for _ in 0..shape.n_agents {
            let mut o = Vec::with_capacity(shape.obs_dim);
            for _ in 0..shape.obs_dim {
                o.push(read_f64(r)?);
            }
            obs.push(o);
        }
        let mut avail = Vec::with_capacity(shape.n_agents);
        for _ in 0..shape.n_agents {
            let mut mask = Vec::with_capacity(shape.n_actions);
            for _ in 0..shape.n_actions {
                mask.push(read_u8(r)? != 0);
            }
            avail.push(mask);
        }
        let mut actions = Vec::with_capacity(shape.n_agents);
        for _ in 0..shape.n_agents {
            actions.push(read_u32(r)? as usize);
        }
        let reward = read_f64(r)?;
        let terminated = read_u8(r)? != 0;
        steps.push(Transition {
            state,
            obs,
            avail,
            joint_action: JointAction::new(actions),
            reward,
            terminated,
            filled: true,
        });
    }
    let episode = Episode::new(steps, shape.episode_limit);
    episode.validate(&shape)?;
    Ok((episode, shape))
}

/// Debug CSV of an episode's transitions: one row per step, with the
/// per-agent actions and the state vector semicolon-joined.
pub fn episode_to_csv(w: &mut impl Write, episode: &Episode) -> Result<()> {
    writeln!(w, "step,reward,terminated,filled,actions,state")?;
    for (t, step) in episode.steps.iter().enumerate() {
        let actions = step
            .joint_action
            .actions
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let state = step
            .state
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";");
        writeln!(
            w,
            "{t},{},{},{},{actions},{state}",
            step.reward, step.terminated, step.filled
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn shape() -> EpisodeShape {
        EpisodeShape {
            n_agents: 2,
            n_actions: 3,
            obs_dim: 2,
            state_dim: 3,
            episode_limit: 6,
        }
    }

    fn random_episode(rng: &mut Rng, len: usize) -> Episode {
        let steps = (0..len)
            .map(|t| Transition {
                state: (0..3).map(|_| rng.range(-2.0, 2.0)).collect(),
                obs: (0..2).map(|_| (0..2).map(|_| rng.range(-1.0, 1.0)).collect()).collect(),
                avail: vec![vec![true; 3]; 2],
                joint_action: JointAction::new(vec![rng.index(3), rng.index(3)]),
                reward: rng.range(-5.0, 5.0),
                terminated: t == len - 1,
                filled: true,
            })
            .collect();
        Episode::new(steps, 6)
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let mut rng = Rng::seeded(99);
        for len in 1..=6 {
            let ep = random_episode(&mut rng, len);
            let mut bytes = Vec::new();
            write_episode(&mut bytes, &ep, &shape()).unwrap();
            let (back, back_shape) = read_episode(&mut bytes.as_slice()).unwrap();
            assert_eq!(back_shape, shape());
            assert_eq!(back, ep);
            let mut bytes2 = Vec::new();
            write_episode(&mut bytes2, &back, &shape()).unwrap();
            assert_eq!(bytes, bytes2);
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let mut rng = Rng::seeded(1);
        let ep = random_episode(&mut rng, 2);
        let mut bytes = Vec::new();
        write_episode(&mut bytes, &ep, &shape()).unwrap();
        bytes[0] = b'X';
        assert!(read_episode(&mut bytes.as_slice()).is_err());
    }

    #[test]
    fn csv_export_has_one_row_per_step() {
        let mut rng = Rng::seeded(2);
        let ep = random_episode(&mut rng, 4);
        let mut out = Vec::new();
        episode_to_csv(&mut out, &ep).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 5); // header + 4 steps
        assert!(text.starts_with("step,reward,terminated,filled,actions,state"));
    }
}
