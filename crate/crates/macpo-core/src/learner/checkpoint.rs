//! Checkpoint files: a 16-byte magic+version header, a layer-size manifest,
//! then raw little-endian doubles for every parameter block of the live
//! networks, in a fixed block order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{read_f64, read_u32, read_u64, read_u8, write_f64, write_u32, write_u64};
use crate::learner::{LearnerState, Networks};
use crate::nn::mlp::Layer;
use crate::nn::{Activation, Matrix, Mlp, MonotonicMixer, UnrestrictedMixer};
use crate::types::EpisodeShape;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"MACPOCKP";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckpointMeta {
    pub shape: EpisodeShape,
    pub env_steps: u64,
    pub episodes_seen: u64,
    pub train_steps: u64,
}

fn write_mlp(w: &mut impl Write, mlp: &Mlp) -> Result<()> {
    write_u32(w, mlp.layers.len() as u32)?;
    for layer in &mlp.layers {
        write_u32(w, layer.weights.rows() as u32)?;
        write_u32(w, layer.weights.cols() as u32)?;
        w.write_all(&[layer.activation.tag()])?;
    }
    for layer in &mlp.layers {
        for &v in layer.weights.data() {
            write_f64(w, v)?;
        }
        for &v in &layer.bias {
            write_f64(w, v)?;
        }
    }
    Ok(())
}

fn read_mlp(r: &mut impl Read) -> Result<Mlp> {
    let n_layers = read_u32(r)? as usize;
    if n_layers == 0 || n_layers > 64 {
        return Err(Error::BadFormat(format!("implausible layer count {n_layers}")));
    }
    let mut manifest = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let rows = read_u32(r)? as usize;
        let cols = read_u32(r)? as usize;
        let activation = Activation::from_tag(read_u8(r)?)?;
        manifest.push((rows, cols, activation));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for &(rows, cols, activation) in &manifest {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(read_f64(r)?);
        }
        let mut bias = Vec::with_capacity(cols);
        for _ in 0..cols {
            bias.push(read_f64(r)?);
        }
        layers.push(Layer {
            weights: Matrix::from_vec(rows, cols, data),
            bias,
            activation,
        });
    }
    Ok(Mlp { layers })
}

pub fn save_checkpoint(path: &Path, learner: &LearnerState) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(CHECKPOINT_MAGIC)?;
    write_u32(&mut w, CHECKPOINT_VERSION)?;
    write_u32(&mut w, 0)?;
    let shape = &learner.shape;
    for dim in [
        shape.n_agents,
        shape.n_actions,
        shape.obs_dim,
        shape.state_dim,
        shape.episode_limit,
    ] {
        write_u32(&mut w, dim as u32)?;
    }
    write_u64(&mut w, learner.env_steps)?;
    write_u64(&mut w, learner.episodes_seen)?;
    write_u64(&mut w, learner.train_steps)?;
    write_u32(&mut w, learner.live.mixer.n_agents as u32)?;
    write_u32(&mut w, learner.live.mixer.embed_dim as u32)?;
    write_mlp(&mut w, &learner.live.agent)?;
    write_mlp(&mut w, &learner.live.mixer.hyper_w1)?;
    write_mlp(&mut w, &learner.live.mixer.hyper_b1)?;
    write_mlp(&mut w, &learner.live.mixer.hyper_w2)?;
    write_mlp(&mut w, &learner.live.mixer.hyper_v)?;
    write_mlp(&mut w, &learner.live.qstar.net)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(Networks, CheckpointMeta)> {
    let file = File::open(path)?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::BadFormat("checkpoint magic mismatch".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::BadFormat(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let _flags = read_u32(&mut r)?;
    let shape = EpisodeShape {
        n_agents: read_u32(&mut r)? as usize,
        n_actions: read_u32(&mut r)? as usize,
        obs_dim: read_u32(&mut r)? as usize,
        state_dim: read_u32(&mut r)? as usize,
        episode_limit: read_u32(&mut r)? as usize,
    };
    let env_steps = read_u64(&mut r)?;
    let episodes_seen = read_u64(&mut r)?;
    let train_steps = read_u64(&mut r)?;
    let mixer_agents = read_u32(&mut r)? as usize;
    let embed_dim = read_u32(&mut r)? as usize;
    let agent = read_mlp(&mut r)?;
    let hyper_w1 = read_mlp(&mut r)?;
    let hyper_b1 = read_mlp(&mut r)?;
    let hyper_w2 = read_mlp(&mut r)?;
    let hyper_v = read_mlp(&mut r)?;
    let qstar_net = read_mlp(&mut r)?;
    let networks = Networks {
        agent,
        mixer: MonotonicMixer {
            hyper_w1,
            hyper_b1,
            hyper_w2,
            hyper_v,
            n_agents: mixer_agents,
            embed_dim,
        },
        qstar: UnrestrictedMixer::from_net(qstar_net, mixer_agents),
    };
    Ok((
        networks,
        CheckpointMeta {
            shape,
            env_steps,
            episodes_seen,
            train_steps,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::env::{EnvSpec, MatrixGameSpec};
    use crate::rng::Rng;

    #[test]
    fn checkpoint_round_trip_preserves_parameters_exactly() {
        let spec = MatrixGameSpec::two_agent(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let env = EnvSpec::MatrixGame(spec);
        let cfg = RunConfig {
            env: env.clone(),
            agent_hidden: 8,
            mixing_embed: 4,
            hypernet_hidden: 8,
            qstar_hidden: 8,
            ..RunConfig::default()
        };
        let shape = env.build().unwrap().episode_shape();
        let mut rng = Rng::seeded(42);
        let mut learner = LearnerState::new(cfg, shape, &mut rng);
        learner.env_steps = 123;
        learner.episodes_seen = 45;
        learner.train_steps = 6;

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        save_checkpoint(&path, &learner).unwrap();
        let (networks, meta) = load_checkpoint(&path).unwrap();
        assert_eq!(meta.shape, learner.shape);
        assert_eq!(meta.env_steps, 123);
        assert_eq!(meta.episodes_seen, 45);
        assert_eq!(meta.train_steps, 6);
        assert_eq!(networks.agent, learner.live.agent);
        assert_eq!(networks.mixer, learner.live.mixer);
        assert_eq!(networks.qstar, learner.live.qstar);
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_checkpoint(Path::new("/nonexistent/never.ckpt"));
        assert!(matches!(err, Err(Error::Io(_))));
    }
}
