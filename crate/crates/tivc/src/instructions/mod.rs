//! Natural-language instruction rendering, paraphrasing, composition, and
//! tokenization. Every generated instruction carries its machine-readable
//! label; rendering and paraphrasing never alter the label.

mod bank;
mod tokenize;

pub use bank::Bank;
pub use tokenize::{
    build_vocab, tokenize, tokenize_str, TokenIds, Vocab, BOS, EOS, MASK, PAD, UNK,
};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audio::{EmotionProxy, GenderProxy};
use crate::effects::{Degree, EffectSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Template,
    Paraphrase,
    Composite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    Normal,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Normal, Level::High];
}

/// Style factors of the instruct-speech dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StyleSpec {
    pub pitch: Level,
    pub volume: Level,
    pub speed: Level,
    pub emotion: EmotionProxy,
    pub gender: GenderProxy,
}

impl StyleSpec {
    pub fn all_normal(gender: GenderProxy) -> StyleSpec {
        StyleSpec {
            pitch: Level::Normal,
            volume: Level::Normal,
            speed: Level::Normal,
            emotion: EmotionProxy::Neutral,
            gender,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.pitch == Level::Normal
            && self.volume == Level::Normal
            && self.speed == Level::Normal
            && self.emotion == EmotionProxy::Neutral
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstructionLabel {
    Effect(EffectSpec),
    Style {
        spec: StyleSpec,
        degree: Option<Degree>,
    },
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InstructionText {
    pub text: String,
    pub provenance: Provenance,
    pub label: Option<InstructionLabel>,
}

impl InstructionText {
    fn new(text: String, provenance: Provenance, label: Option<InstructionLabel>) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::domain("instruction text must be non-empty"));
        }
        Ok(InstructionText {
            text,
            provenance,
            label,
        })
    }
}

/// Canonical template for an effect spec. Deterministic; the seed only
/// matters for operations that choose among variants.
pub fn render_effect_instruction(spec: &EffectSpec, _rng_seed: u64) -> Result<InstructionText> {
    let bank = Bank::builtin();
    let text = bank.effect_primary(spec)?;
    InstructionText::new(
        text,
        Provenance::Template,
        Some(InstructionLabel::Effect(spec.clone())),
    )
}

/// Sentence mentioning every non-normal factor plus gender and emotion.
pub fn render_style_instruction(
    spec: &StyleSpec,
    degree: Option<Degree>,
    _rng_seed: u64,
) -> Result<InstructionText> {
    let bank = Bank::builtin();
    let text = bank.style_primary(spec, degree);
    InstructionText::new(
        text,
        Provenance::Template,
        Some(InstructionLabel::Style {
            spec: *spec,
            degree,
        }),
    )
}

/// Meaning-preserving rewrite drawn from the hand-built bank. Returns the
/// rewritten instruction plus a `missed` flag: text without a known label
/// comes back unchanged with the flag set.
pub fn paraphrase(t: &InstructionText, rng_seed: u64) -> (InstructionText, bool) {
    let bank = Bank::builtin();
    let variants = match &t.label {
        Some(InstructionLabel::Effect(spec)) => bank.effect_variants(spec).unwrap_or_default(),
        Some(InstructionLabel::Style { spec, degree }) => bank.style_variants(spec, *degree),
        None => Vec::new(),
    };
    if variants.is_empty() {
        return (t.clone(), true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let pick = rng.gen_range(0..variants.len());
    (
        InstructionText {
            text: variants[pick].clone(),
            provenance: Provenance::Paraphrase,
            label: t.label.clone(),
        },
        false,
    )
}

/// Out-of-domain composite: joins two instructions with " and ".
pub fn compose(a: &InstructionText, b: &InstructionText) -> Result<InstructionText> {
    if a.text.trim().is_empty() || b.text.trim().is_empty() {
        return Err(Error::domain("compose requires non-empty instructions"));
    }
    InstructionText::new(
        format!("{} and {}", a.text, b.text),
        Provenance::Composite,
        None,
    )
}
