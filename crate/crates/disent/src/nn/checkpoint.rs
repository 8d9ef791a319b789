//! Flat binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   b"DSNT"            4 bytes
//! version u32                currently 1
//! seed    u64
//! config_hash u64
//! model_config JSON          u32 length + bytes
//! param_count u32
//!   per parameter: group str, name str, rank u32, dims u32..., values
//!                  (f64 bit patterns, u64 each)
//! optimizer flag u8          0 = absent, 1 = present
//!   adam:     step u64, lr/beta1/beta2/eps f64, entry count u32,
//!             per entry: name str, first-moment values, second-moment values
//!   momentum: lr/momentum f64, entry count u32,
//!             per entry: name str, velocity values
//! ```
//!
//! Strings are u32 length + UTF-8. Values are written as raw f64 bits, so a
//! save/load round trip is bit-exact.

use super::params::{ParamGroup, ParamStore};
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use std::io::{self, Read, Write};
use std::path::Path;
use thiserror::Error;

const MAGIC: &[u8; 4] = b"DSNT";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint parameter {name} has shape {found:?}, model expects {expected:?}")]
    ShapeMismatch {
        name: String,
        found: Vec<usize>,
        expected: Vec<usize>,
    },
    #[error("checkpoint is missing parameter {0}")]
    MissingParam(String),
}

/// Serialized optimizer state (both optimizers of the training loop).
#[derive(Clone, Debug, PartialEq)]
pub struct OptimState {
    pub adam_step: u64,
    pub adam_hyper: [f64; 4],
    /// (param name, first moment, second moment)
    pub adam_moments: Vec<(String, Vec<f64>, Vec<f64>)>,
    pub momentum_hyper: [f64; 2],
    /// (param name, velocity)
    pub momentum_velocity: Vec<(String, Vec<f64>)>,
}

/// In-memory form of a checkpoint file.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub seed: u64,
    pub config_hash: u64,
    pub model_config: super::ModelConfig,
    /// (group, name, shape, values) in the store's registration order.
    pub params: Vec<(ParamGroup, String, Vec<usize>, Vec<f64>)>,
    pub optim: Option<OptimState>,
}

impl Checkpoint {
    pub fn from_store<T: Scalar>(
        store: &ParamStore<T>,
        seed: u64,
        config_hash: u64,
        model_config: super::ModelConfig,
        optim: Option<OptimState>,
    ) -> Self {
        let params = store
            .ids()
            .map(|id| {
                let meta = store.meta(id);
                (
                    meta.group,
                    meta.name.clone(),
                    store.value(id).shape().to_vec(),
                    store.value(id).to_f64_vec(),
                )
            })
            .collect();
        Self { seed, config_hash, model_config, params, optim }
    }

    /// Copy parameter values into a store built from the same model config.
    /// Matching is by name; every store parameter must be present with the
    /// right shape.
    pub fn apply_to<T: Scalar>(&self, store: &mut ParamStore<T>) -> Result<(), CheckpointError> {
        for id in store.ids().collect::<Vec<_>>() {
            let meta_name = store.meta(id).name.clone();
            let entry = self
                .params
                .iter()
                .find(|(_, name, _, _)| *name == meta_name)
                .ok_or_else(|| CheckpointError::MissingParam(meta_name.clone()))?;
            if entry.2 != store.value(id).shape() {
                return Err(CheckpointError::ShapeMismatch {
                    name: meta_name,
                    found: entry.2.clone(),
                    expected: store.value(id).shape().to_vec(),
                });
            }
            let tensor = Tensor::from_f64_slice(entry.2.clone(), &entry.3)
                .expect("shape/data length verified");
            store.set_value(id, tensor);
        }
        Ok(())
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), CheckpointError> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    write_u32(&mut buf, VERSION);
    write_u64(&mut buf, ckpt.seed);
    write_u64(&mut buf, ckpt.config_hash);
    let cfg_json = serde_json::to_vec(&ckpt.model_config)
        .map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    write_bytes(&mut buf, &cfg_json);
    write_u32(&mut buf, ckpt.params.len() as u32);
    for (group, name, shape, values) in &ckpt.params {
        write_str(&mut buf, group.as_str());
        write_str(&mut buf, name);
        write_u32(&mut buf, shape.len() as u32);
        for &d in shape {
            write_u32(&mut buf, d as u32);
        }
        for &v in values {
            write_u64(&mut buf, v.to_bits());
        }
    }
    match &ckpt.optim {
        None => buf.push(0),
        Some(o) => {
            buf.push(1);
            write_u64(&mut buf, o.adam_step);
            for &h in &o.adam_hyper {
                write_u64(&mut buf, h.to_bits());
            }
            write_u32(&mut buf, o.adam_moments.len() as u32);
            for (name, m, v) in &o.adam_moments {
                write_str(&mut buf, name);
                write_u32(&mut buf, m.len() as u32);
                for &x in m {
                    write_u64(&mut buf, x.to_bits());
                }
                for &x in v {
                    write_u64(&mut buf, x.to_bits());
                }
            }
            for &h in &o.momentum_hyper {
                write_u64(&mut buf, h.to_bits());
            }
            write_u32(&mut buf, o.momentum_velocity.len() as u32);
            for (name, v) in &o.momentum_velocity {
                write_str(&mut buf, name);
                write_u32(&mut buf, v.len() as u32);
                for &x in v {
                    write_u64(&mut buf, x.to_bits());
                }
            }
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let seed = r.u64()?;
    let config_hash = r.u64()?;
    let cfg_json = r.bytes()?;
    let model_config: super::ModelConfig = serde_json::from_slice(&cfg_json)
        .map_err(|e| CheckpointError::Corrupt(format!("model config: {e}")))?;
    let param_count = r.u32()? as usize;
    let mut params = Vec::with_capacity(param_count);
    for _ in 0..param_count {
        let group_name = r.string()?;
        let group = ParamGroup::from_str_name(&group_name)
            .ok_or_else(|| CheckpointError::Corrupt(format!("unknown group {group_name}")))?;
        let name = r.string()?;
        let rank = r.u32()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32()? as usize);
        }
        let n: usize = shape.iter().product();
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(f64::from_bits(r.u64()?));
        }
        params.push((group, name, shape, values));
    }
    let optim = match r.u8()? {
        0 => None,
        1 => {
            let adam_step = r.u64()?;
            let mut adam_hyper = [0.0; 4];
            for h in &mut adam_hyper {
                *h = f64::from_bits(r.u64()?);
            }
            let n = r.u32()? as usize;
            let mut adam_moments = Vec::with_capacity(n);
            for _ in 0..n {
                let name = r.string()?;
                let len = r.u32()? as usize;
                let mut m = Vec::with_capacity(len);
                for _ in 0..len {
                    m.push(f64::from_bits(r.u64()?));
                }
                let mut v = Vec::with_capacity(len);
                for _ in 0..len {
                    v.push(f64::from_bits(r.u64()?));
                }
                adam_moments.push((name, m, v));
            }
            let mut momentum_hyper = [0.0; 2];
            for h in &mut momentum_hyper {
                *h = f64::from_bits(r.u64()?);
            }
            let n = r.u32()? as usize;
            let mut momentum_velocity = Vec::with_capacity(n);
            for _ in 0..n {
                let name = r.string()?;
                let len = r.u32()? as usize;
                let mut v = Vec::with_capacity(len);
                for _ in 0..len {
                    v.push(f64::from_bits(r.u64()?));
                }
                momentum_velocity.push((name, v));
            }
            Some(OptimState {
                adam_step,
                adam_hyper,
                adam_moments,
                momentum_hyper,
                momentum_velocity,
            })
        }
        other => return Err(CheckpointError::Corrupt(format!("optimizer flag {other}"))),
    };
    Ok(Checkpoint { seed, config_hash, model_config, params, optim })
}

fn write_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn write_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn write_bytes(buf: &mut Vec<u8>, b: &[u8]) {
    write_u32(buf, b.len() as u32);
    buf.extend_from_slice(b);
}

fn write_str(buf: &mut Vec<u8>, s: &str) {
    write_bytes(buf, s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.bytes.len() {
            return Err(CheckpointError::Corrupt("truncated file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn bytes(&mut self) -> Result<Vec<u8>, CheckpointError> {
        let len = self.u32()? as usize;
        Ok(self.take(len)?.to_vec())
    }

    fn string(&mut self) -> Result<String, CheckpointError> {
        String::from_utf8(self.bytes()?)
            .map_err(|_| CheckpointError::Corrupt("non-utf8 string".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{DisentangleModel, ModelConfig};

    #[test]
    fn round_trip_is_bit_exact() {
        let cfg = ModelConfig {
            input_channels: 1,
            channels: vec![2, 4],
            strides: vec![2, 2],
            head_hidden: vec![8],
            classes_a: 2,
            classes_b: 3,
        };
        let (_, mut store) = DisentangleModel::build::<f64>(cfg.clone()).unwrap();
        store.init_he(17);
        let optim = OptimState {
            adam_step: 42,
            adam_hyper: [1e-5, 0.9, 0.999, 1e-8],
            adam_moments: vec![("enc_a.block0.conv1.kernel".into(), vec![0.25; 3], vec![0.5; 3])],
            momentum_hyper: [1e-5, 0.9],
            momentum_velocity: vec![("adv_a.out.weight".into(), vec![-0.125; 4])],
        };
        let ckpt = Checkpoint::from_store(&store, 7, 0xdead_beef, cfg.clone(), Some(optim));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&path, &ckpt).unwrap();

        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.seed, 7);
        assert_eq!(loaded.config_hash, 0xdead_beef);
        assert_eq!(loaded.model_config, cfg);
        assert_eq!(loaded.params, ckpt.params);
        assert_eq!(loaded.optim, ckpt.optim);

        // applying to a fresh store restores every tensor bit-for-bit
        let (_, mut fresh) = DisentangleModel::build::<f64>(cfg).unwrap();
        loaded.apply_to(&mut fresh).unwrap();
        for id in store.ids() {
            assert_eq!(store.value(id).data(), fresh.value(id).data());
        }

        // and the re-saved file is byte-identical
        let path2 = dir.path().join("model2.ckpt");
        save_checkpoint(&path2, &loaded).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn shape_mismatch_is_detected() {
        let cfg_small = ModelConfig {
            channels: vec![2],
            strides: vec![1],
            head_hidden: vec![4],
            ..ModelConfig::default()
        };
        let cfg_big = ModelConfig {
            channels: vec![4],
            strides: vec![1],
            head_hidden: vec![4],
            ..ModelConfig::default()
        };
        let (_, small) = DisentangleModel::build::<f64>(cfg_small.clone()).unwrap();
        let ckpt = Checkpoint::from_store(&small, 0, 0, cfg_small, None);
        let (_, mut big) = DisentangleModel::build::<f64>(cfg_big).unwrap();
        let err = ckpt.apply_to(&mut big).unwrap_err();
        assert!(matches!(err, CheckpointError::ShapeMismatch { .. }));
    }
}
