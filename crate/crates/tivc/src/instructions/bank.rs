//! The template and paraphrase bank, loaded from a versioned TOML file
//! shipped in-repo (`data/instruction_bank.toml`).

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::audio::{EmotionProxy, GenderProxy};
use crate::effects::{Degree, EffectDirection, EffectKind, EffectSpec};
use crate::error::{Error, Result};

use super::{Level, StyleSpec};

const BUILTIN: &str = include_str!("../../data/instruction_bank.toml");

#[derive(Debug, serde::Deserialize)]
struct RawBank {
    version: u32,
    adverbs: BTreeMap<String, String>,
    family: Vec<RawFamily>,
    style: RawStyle,
}

#[derive(Debug, serde::Deserialize)]
struct RawFamily {
    effect: String,
    direction: Option<String>,
    primary: String,
    variants: Vec<String>,
    #[serde(default)]
    overrides: BTreeMap<String, String>,
    #[serde(default)]
    extra: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, serde::Deserialize)]
struct RawStyle {
    neutral_primary: String,
    neutral_variants: Vec<String>,
    primary: String,
    variants: Vec<String>,
    gender: BTreeMap<String, String>,
    emotion: BTreeMap<String, String>,
    factor: BTreeMap<String, String>,
}

pub struct Bank {
    raw: RawBank,
}

impl Bank {
    pub fn builtin() -> &'static Bank {
        static BANK: OnceLock<Bank> = OnceLock::new();
        BANK.get_or_init(|| Bank::parse(BUILTIN).expect("builtin instruction bank parses"))
    }

    pub fn parse(text: &str) -> Result<Bank> {
        let raw: RawBank =
            toml::from_str(text).map_err(|e| Error::Config(format!("instruction bank: {e}")))?;
        if raw.version != 1 {
            return Err(Error::Config(format!(
                "unsupported instruction bank version {}",
                raw.version
            )));
        }
        Ok(Bank { raw })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Bank> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Bank::parse(&text)
    }

    fn adverb(&self, degree: Option<Degree>) -> &str {
        match degree {
            None => "",
            Some(d) => self
                .raw
                .adverbs
                .get(d.name())
                .map(|s| s.as_str())
                .unwrap_or(""),
        }
    }

    fn family(&self, effect: EffectKind, direction: Option<EffectDirection>) -> Result<&RawFamily> {
        let dir_name = direction.map(|d| d.name().to_string());
        self.raw
            .family
            .iter()
            .find(|f| f.effect == effect.name() && f.direction == dir_name)
            .ok_or_else(|| {
                Error::domain(format!(
                    "no instruction template for effect {} direction {:?}",
                    effect.name(),
                    direction.map(|d| d.name())
                ))
            })
    }

    /// Canonical sentence for an effect spec.
    pub fn effect_primary(&self, spec: &EffectSpec) -> Result<String> {
        let fam = self.family(spec.effect, spec.direction)?;
        if let Some(d) = spec.degree {
            if let Some(text) = fam.overrides.get(d.name()) {
                return Ok(text.clone());
            }
        }
        Ok(expand_adv(&fam.primary, self.adverb(spec.degree)))
    }

    /// All paraphrase variants for an effect spec (degree-expanded).
    pub fn effect_variants(&self, spec: &EffectSpec) -> Result<Vec<String>> {
        let fam = self.family(spec.effect, spec.direction)?;
        let adv = self.adverb(spec.degree);
        let mut out: Vec<String> = fam.variants.iter().map(|v| expand_adv(v, adv)).collect();
        if let Some(d) = spec.degree {
            if let Some(extra) = fam.extra.get(d.name()) {
                out.extend(extra.iter().cloned());
            }
        }
        Ok(out)
    }

    pub fn style_primary(&self, spec: &StyleSpec, degree: Option<Degree>) -> String {
        if spec.is_identity() && degree.is_none() {
            return self.raw.style.neutral_primary.clone();
        }
        self.expand_style(&self.raw.style.primary, spec, degree)
    }

    pub fn style_variants(&self, spec: &StyleSpec, degree: Option<Degree>) -> Vec<String> {
        if spec.is_identity() && degree.is_none() {
            return self.raw.style.neutral_variants.clone();
        }
        self.raw
            .style
            .variants
            .iter()
            .map(|v| self.expand_style(v, spec, degree))
            .collect()
    }

    fn expand_style(&self, frame: &str, spec: &StyleSpec, degree: Option<Degree>) -> String {
        let gender = match spec.gender {
            GenderProxy::Male => "male",
            GenderProxy::Female => "female",
        };
        let emotion = match spec.emotion {
            EmotionProxy::Cheerful => "cheerful",
            EmotionProxy::Neutral => "neutral",
            EmotionProxy::Whisper => "whisper",
            EmotionProxy::Sad => "sad",
            EmotionProxy::Shouting => "shouting",
        };
        let mut factors = String::new();
        let factor_phrase = |key: &str| {
            self.raw
                .style
                .factor
                .get(key)
                .map(|s| s.as_str())
                .unwrap_or("")
                .to_string()
        };
        for (name, level) in [
            ("pitch", spec.pitch),
            ("volume", spec.volume),
            ("speed", spec.speed),
        ] {
            match level {
                Level::Normal => {}
                Level::Low => {
                    factors.push_str(&format!(", {}", factor_phrase(&format!("{name}_low"))))
                }
                Level::High => {
                    factors.push_str(&format!(", {}", factor_phrase(&format!("{name}_high"))))
                }
            }
        }

        let text = frame
            .replace(
                "{gender}",
                self.raw
                    .style
                    .gender
                    .get(gender)
                    .map(|s| s.as_str())
                    .unwrap_or(gender),
            )
            .replace(
                "{emotion}",
                self.raw
                    .style
                    .emotion
                    .get(emotion)
                    .map(|s| s.as_str())
                    .unwrap_or(emotion),
            )
            .replace("{adv}", self.adverb(degree))
            .replace("{factors}", &factors);
        fix_articles(&collapse_ws(&text))
    }

    /// Text lines covering every word the bank can emit; the tokenizer vocab
    /// is built over these plus the shipped pre-training text.
    pub fn vocab_corpus(&self) -> Vec<String> {
        let mut out = Vec::new();
        for fam in &self.raw.family {
            for degree in [
                None,
                Some(Degree::Slight),
                Some(Degree::Default),
                Some(Degree::Notable),
                Some(Degree::Extreme),
            ] {
                let adv = self.adverb(degree);
                out.push(expand_adv(&fam.primary, adv));
                for v in &fam.variants {
                    out.push(expand_adv(v, adv));
                }
            }
            out.extend(fam.overrides.values().cloned());
            for extra in fam.extra.values() {
                out.extend(extra.iter().cloned());
            }
        }
        out.push(self.raw.style.neutral_primary.clone());
        out.extend(self.raw.style.neutral_variants.iter().cloned());
        // Style frames: cover slot words individually, then the frame scaffolding.
        out.extend(self.raw.style.gender.values().cloned());
        out.extend(self.raw.style.emotion.values().cloned());
        out.extend(self.raw.style.factor.values().cloned());
        out.extend(self.raw.adverbs.values().cloned());
        out.push("a an and".to_string());
        for frame in std::iter::once(&self.raw.style.primary).chain(&self.raw.style.variants) {
            let stripped = frame
                .replace("{gender}", " ")
                .replace("{emotion}", " ")
                .replace("{adv}", " ")
                .replace("{a}", " ")
                .replace("{factors}", " ");
            out.push(collapse_ws(&stripped));
        }
        out
    }
}

fn expand_adv(template: &str, adv: &str) -> String {
    collapse_ws(&template.replace("{adv}", adv))
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Replace the "{a}" slot with "a" or "an" according to the following word.
fn fix_articles(s: &str) -> String {
    let words: Vec<&str> = s.split(' ').collect();
    let mut out = Vec::with_capacity(words.len());
    for (i, w) in words.iter().enumerate() {
        if *w == "{a}" {
            let next = words.get(i + 1).and_then(|n| n.chars().next());
            let article = match next {
                Some(c) if "aeiou".contains(c.to_ascii_lowercase()) => "an",
                _ => "a",
            };
            out.push(article);
        } else {
            out.push(w);
        }
    }
    out.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_bank_parses() {
        let bank = Bank::builtin();
        assert!(bank.raw.family.len() >= 20);
    }

    #[test]
    fn every_family_has_at_least_five_variants() {
        let bank = Bank::builtin();
        for fam in &bank.raw.family {
            assert!(
                fam.variants.len() >= 5,
                "{} has too few variants",
                fam.effect
            );
        }
        assert!(bank.raw.style.variants.len() >= 5);
        assert!(bank.raw.style.neutral_variants.len() >= 5);
    }

    #[test]
    fn article_agreement() {
        assert_eq!(
            fix_articles("in {a} extremely sad tone"),
            "in an extremely sad tone"
        );
        assert_eq!(fix_articles("in {a} sad tone"), "in a sad tone");
    }

    #[test]
    fn vocab_corpus_has_no_unexpanded_slots() {
        for line in Bank::builtin().vocab_corpus() {
            assert!(!line.contains('{'), "{line}");
        }
    }
}
