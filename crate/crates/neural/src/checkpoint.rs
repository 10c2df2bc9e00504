//! Versioned binary checkpoints.
//!
//! Layout: the magic bytes `TSPL`, a little-endian `u32` format version, a
//! little-endian `u64` header length, a JSON header, then every tensor's
//! entries as little-endian `f64` in header order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{EncoderConfig, TrainConfig};
use crate::error::{NeuralError, Result};
use crate::optim::AdamW;
use crate::params::{ModelParams, Tensor};
use crate::tispell::TiSpell;
use crate::vocab::Vocab;

pub const MAGIC: &[u8; 4] = b"TSPL";
pub const VERSION: u32 = 1;

const FIRST: &str = "adam.first.";
const SECOND: &str = "adam.second.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingState {
    pub config: TrainConfig,
    pub epochs_done: usize,
    pub optimizer_step: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    config: EncoderConfig,
    vocab: Vocab,
    training: Option<TrainingState>,
    tensors: Vec<TensorEntry>,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: TiSpell,
    pub training: Option<TrainingState>,
    pub optimizer: Option<AdamW>,
}

fn named<'a>(prefix: &str, p: &'a ModelParams) -> impl Iterator<Item = (String, &'a Tensor)> {
    let prefix = prefix.to_string();
    p.tensors().into_iter().map(move |(n, t)| (format!("{prefix}{n}"), t))
}

pub fn to_bytes(model: &TiSpell, training: Option<(&TrainingState, &AdamW)>) -> Vec<u8> {
    let mut tensors: Vec<(String, &Tensor)> = named("", &model.params).collect();
    if let Some((_, opt)) = training {
        tensors.extend(named(FIRST, &opt.first));
        tensors.extend(named(SECOND, &opt.second));
    }
    let header = Header {
        config: model.config.clone(),
        vocab: model.vocab.clone(),
        training: training.map(|(s, _)| s.clone()),
        tensors: tensors
            .iter()
            .map(|(name, t)| TensorEntry {
                name: name.clone(),
                rows: t.nrows(),
                cols: t.ncols(),
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + json.len() + 8 * model.params.parameter_count() * 3);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for (_, t) in &tensors {
        for v in t.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Writes atomically: a sibling temporary file is renamed over `path`.
pub fn save(path: &Path, model: &TiSpell, training: Option<(&TrainingState, &AdamW)>) -> Result<()> {
    let bytes = to_bytes(model, training);
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| NeuralError::io(path, e))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }
}

pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Checkpoint> {
    let bad = |message: String| NeuralError::Checkpoint {
        path: path.to_path_buf(),
        message,
    };
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4) != Some(MAGIC.as_slice()) {
        return Err(bad("not a checkpoint (bad magic)".into()));
    }
    let version = u32::from_le_bytes(r.take(4).ok_or_else(|| bad("truncated".into()))?.try_into().unwrap());
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let len = u64::from_le_bytes(r.take(8).ok_or_else(|| bad("truncated".into()))?.try_into().unwrap());
    let json = r.take(len as usize).ok_or_else(|| bad("truncated header".into()))?;
    let header: Header = serde_json::from_slice(json).map_err(|e| bad(format!("header: {e}")))?;
    header.config.validate()?;

    let mut model = TiSpell {
        params: ModelParams::init(&header.config, header.vocab.len(), 0),
        config: header.config,
        vocab: header.vocab,
    };
    let mut optimizer = header.training.as_ref().map(|s| {
        let mut o = AdamW::new(&model.params);
        o.step = s.optimizer_step;
        o
    });
    let mut slots: Vec<(String, &mut Tensor)> = model.params.tensors_mut();
    if let Some(o) = optimizer.as_mut() {
        slots.extend(
            o.first
                .tensors_mut()
                .into_iter()
                .map(|(n, t)| (format!("{FIRST}{n}"), t)),
        );
        slots.extend(
            o.second
                .tensors_mut()
                .into_iter()
                .map(|(n, t)| (format!("{SECOND}{n}"), t)),
        );
    }
    if slots.len() != header.tensors.len() {
        return Err(bad(format!(
            "expected {} tensors, header lists {}",
            slots.len(),
            header.tensors.len()
        )));
    }
    for ((name, slot), entry) in slots.into_iter().zip(&header.tensors) {
        if name != entry.name || slot.dim() != (entry.rows, entry.cols) {
            return Err(bad(format!(
                "tensor {} {}x{} does not match expected {name} {:?}",
                entry.name,
                entry.rows,
                entry.cols,
                slot.dim()
            )));
        }
        for v in slot.iter_mut() {
            let b = r.take(8).ok_or_else(|| bad(format!("truncated data in {name}")))?;
            *v = f64::from_le_bytes(b.try_into().unwrap());
            if !v.is_finite() {
                return Err(bad(format!("non-finite value in {name}")));
            }
        }
    }
    if r.pos != bytes.len() {
        return Err(bad(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(Checkpoint {
        model,
        training: header.training,
        optimizer,
    })
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| NeuralError::io(path, e))?;
    from_bytes(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> TiSpell {
        let cfg = EncoderConfig {
            layers: 1,
            heads: 1,
            d_model: 4,
            d_ff: 4,
            max_len: 6,
            head_layers: 1,
            ..EncoderConfig::default()
        };
        TiSpell::new(cfg, Vocab::from_texts(["ཀཁ"]), 9).unwrap()
    }

    #[test]
    fn round_trip_with_and_without_optimizer() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let m = model();
        save(&path, &m, None).unwrap();
        let c = load(&path).unwrap();
        assert_eq!(c.model, m);
        assert!(c.optimizer.is_none());

        let mut opt = AdamW::new(&m.params);
        opt.first.token_embedding[[1, 1]] = 0.25;
        opt.step = 7;
        let state = TrainingState {
            config: TrainConfig::default(),
            epochs_done: 3,
            optimizer_step: 7,
        };
        save(&path, &m, Some((&state, &opt))).unwrap();
        let c = load(&path).unwrap();
        assert_eq!(c.optimizer.unwrap(), opt);
        assert_eq!(c.training.unwrap(), state);
        assert!(!dir.path().join("m.ckpt.tmp").exists());
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let p = Path::new("x");
        let bytes = to_bytes(&model(), None);
        assert!(from_bytes(&bytes[..bytes.len() - 3], p).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(from_bytes(&wrong, p).unwrap_err().to_string().contains("magic"));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(from_bytes(&extra, p).is_err());
        let mut nan = bytes;
        let n = nan.len();
        nan[n - 8..].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(from_bytes(&nan, p).unwrap_err().to_string().contains("non-finite"));
    }
}
