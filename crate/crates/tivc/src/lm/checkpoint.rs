//! Versioned checkpoint container: JSON header (model kind, dims,
//! vocabulary, codec fingerprint) followed by named f64 tensors. Loading is
//! byte-exact; `init_from` implements the scratch/text/tts initialization
//! modes, matching tensors by name and freshly initializing whatever the
//! checkpoint does not provide.

use std::path::Path;

use byteorder::{ByteOrder, LittleEndian};
use ndarray::Array2;

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::instructions::Vocab;

use super::model::{ModelKind, SeqModel};

const MAGIC: &[u8; 8] = b"TIVCCKPT";
const VERSION: u32 = 1;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
struct Header {
    kind: ModelKind,
    model: ModelConfig,
    v_text: usize,
    k: usize,
    vocab: Vocab,
    codec_fingerprint: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub kind: ModelKind,
    pub model: ModelConfig,
    pub v_text: usize,
    pub k: usize,
    pub vocab: Vocab,
    pub codec_fingerprint: Option<String>,
    tensors: Vec<(String, Array2<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    Scratch,
    Text,
    Tts,
}

impl InitMode {
    pub fn parse(s: &str) -> Result<InitMode> {
        match s {
            "scratch" => Ok(InitMode::Scratch),
            "text" => Ok(InitMode::Text),
            "tts" => Ok(InitMode::Tts),
            _ => Err(Error::Config(format!(
                "unknown init mode {s:?} (expected scratch|text|tts)"
            ))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            InitMode::Scratch => "Scratch",
            InitMode::Text => "Text",
            InitMode::Tts => "TTS",
        }
    }
}

impl Checkpoint {
    pub fn from_model(
        model: &SeqModel,
        vocab: &Vocab,
        codec_fingerprint: Option<String>,
    ) -> Checkpoint {
        let tensors = model
            .store
            .names()
            .iter()
            .map(|n| (n.clone(), model.store.by_name(n).unwrap().clone()))
            .collect();
        Checkpoint {
            kind: model.kind,
            model: model.cfg.clone(),
            v_text: model.v_text,
            k: model.k,
            vocab: vocab.clone(),
            codec_fingerprint,
            tensors,
        }
    }

    pub fn tensor(&self, name: &str) -> Option<&Array2<f64>> {
        self.tensors.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            kind: self.kind,
            model: self.model.clone(),
            v_text: self.v_text,
            k: self.k,
            vocab: self.vocab.clone(),
            codec_fingerprint: self.codec_fingerprint.clone(),
        };
        let hjson = serde_json::to_vec(&header)?;
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        let mut b4 = [0u8; 4];
        LittleEndian::write_u32(&mut b4, VERSION);
        out.extend_from_slice(&b4);
        LittleEndian::write_u32(&mut b4, hjson.len() as u32);
        out.extend_from_slice(&b4);
        out.extend_from_slice(&hjson);
        LittleEndian::write_u32(&mut b4, self.tensors.len() as u32);
        out.extend_from_slice(&b4);
        for (name, t) in &self.tensors {
            LittleEndian::write_u32(&mut b4, name.len() as u32);
            out.extend_from_slice(&b4);
            out.extend_from_slice(name.as_bytes());
            LittleEndian::write_u32(&mut b4, t.nrows() as u32);
            out.extend_from_slice(&b4);
            LittleEndian::write_u32(&mut b4, t.ncols() as u32);
            out.extend_from_slice(&b4);
            let mut b8 = [0u8; 8];
            for &v in t.iter() {
                LittleEndian::write_f64(&mut b8, v);
                out.extend_from_slice(&b8);
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
        let err = |m: &str| Error::Checkpoint(m.to_string());
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(err("bad checkpoint magic"));
        }
        let version = LittleEndian::read_u32(&bytes[8..12]);
        if version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {version}"
            )));
        }
        let hlen = LittleEndian::read_u32(&bytes[12..16]) as usize;
        let mut off = 16;
        if bytes.len() < off + hlen + 4 {
            return Err(err("truncated checkpoint header"));
        }
        let header: Header = serde_json::from_slice(&bytes[off..off + hlen])?;
        off += hlen;
        let count = LittleEndian::read_u32(&bytes[off..off + 4]) as usize;
        off += 4;
        let mut tensors = Vec::with_capacity(count);
        for _ in 0..count {
            if bytes.len() < off + 4 {
                return Err(err("truncated tensor record"));
            }
            let nlen = LittleEndian::read_u32(&bytes[off..off + 4]) as usize;
            off += 4;
            let name = std::str::from_utf8(
                bytes
                    .get(off..off + nlen)
                    .ok_or_else(|| err("truncated tensor name"))?,
            )
            .map_err(|_| err("tensor name not utf-8"))?
            .to_string();
            off += nlen;
            if bytes.len() < off + 8 {
                return Err(err("truncated tensor dims"));
            }
            let rows = LittleEndian::read_u32(&bytes[off..off + 4]) as usize;
            let cols = LittleEndian::read_u32(&bytes[off + 4..off + 8]) as usize;
            off += 8;
            let n = rows * cols;
            let end = off + n * 8;
            if bytes.len() < end {
                return Err(err("truncated tensor data"));
            }
            let data: Vec<f64> = bytes[off..end]
                .chunks_exact(8)
                .map(LittleEndian::read_f64)
                .collect();
            off += n * 8;
            tensors.push((name, Array2::from_shape_vec((rows, cols), data).unwrap()));
        }
        if off != bytes.len() {
            return Err(err("trailing bytes after last tensor"));
        }
        let mut vocab = header.vocab;
        vocab.rebuild();
        Ok(Checkpoint {
            kind: header.kind,
            model: header.model,
            v_text: header.v_text,
            k: header.k,
            vocab,
            codec_fingerprint: header.codec_fingerprint,
            tensors,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::from_bytes(&bytes)
    }

    /// Rebuild a runnable model carrying exactly the stored parameters.
    pub fn instantiate(&self) -> Result<SeqModel> {
        let mut model = SeqModel::new(self.kind, &self.model, self.v_text, self.k, 0);
        for name in model.store.names().to_vec() {
            let t = self
                .tensor(&name)
                .ok_or_else(|| Error::Checkpoint(format!("checkpoint is missing tensor {name}")))?;
            if t.raw_dim() != model.store.by_name(&name).unwrap().raw_dim() {
                return Err(Error::Checkpoint(format!("tensor {name} has wrong shape")));
            }
            model.store.by_name_mut(&name).unwrap().assign(t);
        }
        Ok(model)
    }
}

/// Build a model per the pre-training mode. `Scratch` ignores the
/// checkpoint; `Text`/`Tts` load every tensor whose name and shape match the
/// fresh model, leaving the rest (e.g. a code output head absent from a
/// text-pretraining run) at their seeded initialization. Output heads may
/// differ in shape; any other shape mismatch is an architecture conflict.
pub fn init_from(
    kind: ModelKind,
    cfg: &ModelConfig,
    v_text: usize,
    k: usize,
    seed: u64,
    mode: InitMode,
    checkpoint: Option<&Checkpoint>,
) -> Result<SeqModel> {
    let mut model = SeqModel::new(kind, cfg, v_text, k, seed);
    if mode == InitMode::Scratch {
        return Ok(model);
    }
    let ckpt = checkpoint.ok_or_else(|| {
        Error::Checkpoint(format!("init mode {} requires a checkpoint", mode.label()))
    })?;
    if ckpt.kind != kind {
        return Err(Error::Checkpoint(format!(
            "checkpoint holds a {} model, expected {}",
            ckpt.kind.name(),
            kind.name()
        )));
    }
    for name in model.store.names().to_vec() {
        let fresh_shape = model.store.by_name(&name).unwrap().raw_dim();
        match ckpt.tensor(&name) {
            Some(t) if t.raw_dim() == fresh_shape => {
                model.store.by_name_mut(&name).unwrap().assign(t);
            }
            Some(_) if name.starts_with("out_") => {} // head resized: keep fresh rows
            Some(t) => {
                return Err(Error::Checkpoint(format!(
                    "tensor {name}: checkpoint shape {:?} vs model {:?}",
                    t.shape(),
                    fresh_shape
                )));
            }
            None => {} // absent from checkpoint: keep fresh init
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instructions::build_vocab;

    fn tiny_cfg() -> ModelConfig {
        ModelConfig {
            d_model: 16,
            heads: 2,
            enc_layers: 1,
            dec_layers: 1,
            ffn_dim: 32,
            dropout: 0.0,
            max_text_len: 64,
            max_frames: 64,
        }
    }

    fn vocab() -> Vocab {
        build_vocab(["increase the volume of the audio"])
    }

    #[test]
    fn byte_exact_round_trip() {
        let v = vocab();
        let m = SeqModel::new(ModelKind::Ar, &tiny_cfg(), v.size(), 12, 7);
        let ck = Checkpoint::from_model(&m, &v, Some("abc123".into()));
        let bytes = ck.to_bytes().unwrap();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes().unwrap(), bytes);
        assert_eq!(back.codec_fingerprint.as_deref(), Some("abc123"));
    }

    #[test]
    fn instantiate_reproduces_forward_logits() {
        let v = vocab();
        let m = SeqModel::new(ModelKind::Nar, &tiny_cfg(), v.size(), 12, 3);
        let ck = Checkpoint::from_model(&m, &v, None);
        let m2 = ck.instantiate().unwrap();
        let (a, _) = m
            .nar_forward(&[1, 4, 2], &[0, 5], &[1, 2, 3], 4, None)
            .unwrap();
        let (b, _) = m2
            .nar_forward(&[1, 4, 2], &[0, 5], &[1, 2, 3], 4, None)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scratch_init_is_seed_deterministic() {
        let a = init_from(
            ModelKind::Ar,
            &tiny_cfg(),
            20,
            12,
            5,
            InitMode::Scratch,
            None,
        )
        .unwrap();
        let b = init_from(
            ModelKind::Ar,
            &tiny_cfg(),
            20,
            12,
            5,
            InitMode::Scratch,
            None,
        )
        .unwrap();
        for n in a.store.names() {
            assert_eq!(a.store.by_name(n), b.store.by_name(n));
        }
    }

    #[test]
    fn text_init_loads_shared_tensors_and_rejects_dim_mismatch() {
        let v = vocab();
        let src = SeqModel::new(ModelKind::Ar, &tiny_cfg(), v.size(), 12, 1);
        let ck = Checkpoint::from_model(&src, &v, None);
        let m = init_from(
            ModelKind::Ar,
            &tiny_cfg(),
            v.size(),
            12,
            99,
            InitMode::Text,
            Some(&ck),
        )
        .unwrap();
        assert_eq!(m.store.by_name("embed"), src.store.by_name("embed"));

        let mut big = tiny_cfg();
        big.d_model = 32;
        big.heads = 4;
        let err = init_from(
            ModelKind::Ar,
            &big,
            v.size(),
            12,
            0,
            InitMode::Tts,
            Some(&ck),
        );
        assert!(matches!(err, Err(Error::Checkpoint(_))));

        let err = init_from(
            ModelKind::Nar,
            &tiny_cfg(),
            v.size(),
            12,
            0,
            InitMode::Text,
            Some(&ck),
        );
        assert!(matches!(err, Err(Error::Checkpoint(_))));
    }

    #[test]
    fn corrupted_bytes_are_rejected() {
        let v = vocab();
        let m = SeqModel::new(ModelKind::Ar, &tiny_cfg(), v.size(), 12, 7);
        let ck = Checkpoint::from_model(&m, &v, None);
        let mut bytes = ck.to_bytes().unwrap();
        bytes[0] = b'X';
        assert!(Checkpoint::from_bytes(&bytes).is_err());
        let bytes = ck.to_bytes().unwrap();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]).is_err());
    }
}
