//! Run configuration: a single serializable record covering dataset building,
//! codec fitting, model training, sampling, and evaluation. Loaded from a
//! TOML file; individual fields can be overridden from CLI flags. Every run
//! logs its resolved config so results are reproducible from the record.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::EnergyMode;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub dataset: DatasetConfig,
    pub codec: CodecConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub sampling: SamplingConfig,
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    /// Signal-processing-effect pairs in the train split.
    pub spe_train: usize,
    /// Signal-processing-effect pairs in the held-out split.
    pub spe_test: usize,
    /// Instruction-guided style pairs in the train split.
    pub style_train: usize,
    /// Instruction-guided style pairs in the held-out split.
    pub style_test: usize,
    /// Probability that an example's instruction is swapped for a paraphrase.
    pub paraphrase_prob: f64,
    /// Effects to include; empty means all supported effects.
    pub effects: Vec<String>,
    /// Degrees to include; empty means all four.
    pub degrees: Vec<String>,
    /// Source utterance duration range in seconds.
    pub min_duration: f64,
    pub max_duration: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct CodecConfig {
    pub codebook_size: usize,
    /// Synthetic clips used to fit the codebooks.
    pub fit_clips: usize,
    /// Duration of each fitting clip in seconds.
    pub fit_duration: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub d_model: usize,
    pub heads: usize,
    pub enc_layers: usize,
    pub dec_layers: usize,
    pub ffn_dim: usize,
    pub dropout: f64,
    pub max_text_len: usize,
    pub max_frames: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub ar_steps: usize,
    pub nar_steps: usize,
    pub pretrain_steps: usize,
    pub warmup_steps: usize,
    pub log_every: usize,
    /// Loss weight on the AR stop token (relative to code tokens). The stop
    /// decision is one token among dozens per sequence but carries all of
    /// the output-duration supervision, so it is up-weighted.
    pub stop_weight: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub temperature: f64,
    /// Fill residual stages by argmax instead of sampling; stabilizes
    /// evaluation while the first stage stays stochastic.
    pub nar_argmax: bool,
    /// Generated first-stage length is capped at this multiple of the
    /// source frame count.
    pub length_cap_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub energy_mode: EnergyMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: PathBuf::from("runs/default"),
            dataset: DatasetConfig::default(),
            codec: CodecConfig::default(),
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            sampling: SamplingConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            spe_train: 2000,
            spe_test: 200,
            style_train: 2000,
            style_test: 200,
            paraphrase_prob: 0.5,
            effects: Vec::new(),
            degrees: Vec::new(),
            min_duration: 0.6,
            max_duration: 1.0,
        }
    }
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            codebook_size: 256,
            fit_clips: 48,
            fit_duration: 1.0,
        }
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d_model: 128,
            heads: 4,
            enc_layers: 2,
            dec_layers: 2,
            ffn_dim: 512,
            dropout: 0.1,
            max_text_len: 64,
            max_frames: 512,
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-3,
            batch_size: 16,
            ar_steps: 2000,
            nar_steps: 1000,
            pretrain_steps: 500,
            warmup_steps: 100,
            log_every: 50,
            stop_weight: 2.0,
        }
    }
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            temperature: 1.0,
            nar_argmax: true,
            length_cap_ratio: 5.0,
        }
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            energy_mode: EnergyMode::Rms,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.d_model == 0
            || m.heads == 0
            || m.enc_layers == 0
            || m.dec_layers == 0
            || m.ffn_dim == 0
        {
            return Err(Error::Config("model dimensions must be positive".into()));
        }
        if !m.d_model.is_multiple_of(m.heads) {
            return Err(Error::Config(format!(
                "heads ({}) must divide d_model ({})",
                m.heads, m.d_model
            )));
        }
        if !(0.0..1.0).contains(&m.dropout) {
            return Err(Error::Config("dropout must be in [0, 1)".into()));
        }
        if self.dataset.min_duration <= 0.0 || self.dataset.max_duration < self.dataset.min_duration
        {
            return Err(Error::Config("invalid duration range".into()));
        }
        if !(0.0..=1.0).contains(&self.dataset.paraphrase_prob) {
            return Err(Error::Config("paraphrase_prob must be in [0, 1]".into()));
        }
        if self.codec.codebook_size < 2 || self.codec.codebook_size > u16::MAX as usize {
            return Err(Error::Config("codebook_size out of range".into()));
        }
        if self.train.stop_weight <= 0.0 {
            return Err(Error::Config("train.stop_weight must be positive".into()));
        }
        if self.train.batch_size == 0 || self.train.lr <= 0.0 {
            return Err(Error::Config("invalid training settings".into()));
        }
        if self.sampling.temperature <= 0.0 || self.sampling.length_cap_ratio <= 0.0 {
            return Err(Error::Config("invalid sampling settings".into()));
        }
        Ok(())
    }

    /// Serialize the resolved config next to run artifacts.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("serialize config: {e}")))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
