//! Word-level closed-vocabulary tokenizer. Lowercase, strip punctuation,
//! whitespace split; reserved ids 0..4 for PAD/BOS/EOS/UNK/MASK.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::InstructionText;

pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const UNK: u32 = 3;
pub const MASK: u32 = 4;
const NUM_SPECIALS: u32 = 5;

/// Hard cap on tokenized instruction length (BOS and EOS included).
pub const MAX_TEXT_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Vocab {
    words: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Vocab {
    fn build_index(&mut self) {
        self.index = self
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32 + NUM_SPECIALS))
            .collect();
    }

    pub fn size(&self) -> usize {
        self.words.len() + NUM_SPECIALS as usize
    }

    pub fn id_of(&self, word: &str) -> u32 {
        self.index.get(word).copied().unwrap_or(UNK)
    }

    pub fn word_of(&self, id: u32) -> Option<&str> {
        if id < NUM_SPECIALS {
            return Some(match id {
                PAD => "<pad>",
                BOS => "<bos>",
                EOS => "<eos>",
                UNK => "<unk>",
                _ => "<mask>",
            });
        }
        self.words
            .get((id - NUM_SPECIALS) as usize)
            .map(|s| s.as_str())
    }

    /// Restore the word index after deserialization.
    pub fn rebuild(&mut self) {
        self.build_index();
    }
}

/// Lowercase, strip punctuation to spaces, split on whitespace.
pub fn normalize_words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .map(|s| s.to_string())
        .collect()
}

/// Closed vocabulary over a training corpus; word order is sorted and
/// deterministic.
pub fn build_vocab<'a>(corpus: impl IntoIterator<Item = &'a str>) -> Vocab {
    let mut words: Vec<String> = corpus.into_iter().flat_map(normalize_words).collect();
    words.sort();
    words.dedup();
    let mut v = Vocab {
        words,
        index: HashMap::new(),
    };
    v.build_index();
    v
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenIds {
    pub ids: Vec<u32>,
    pub vocab_size: usize,
    pub truncated: bool,
}

/// BOS ... EOS token ids; unknown words map to UNK, over-long instructions
/// truncate with a flag.
pub fn tokenize(t: &InstructionText, vocab: &Vocab) -> Result<TokenIds> {
    if t.text.trim().is_empty() {
        return Err(Error::domain("cannot tokenize empty instruction"));
    }
    tokenize_str(&t.text, vocab)
}

pub fn tokenize_str(text: &str, vocab: &Vocab) -> Result<TokenIds> {
    let words = normalize_words(text);
    let mut ids = vec![BOS];
    let mut truncated = false;
    for w in &words {
        if ids.len() >= MAX_TEXT_LEN - 1 {
            truncated = true;
            break;
        }
        ids.push(vocab.id_of(w));
    }
    ids.push(EOS);
    Ok(TokenIds {
        ids,
        vocab_size: vocab.size(),
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instructions::{InstructionText, Provenance};

    fn it(text: &str) -> InstructionText {
        InstructionText {
            text: text.into(),
            provenance: Provenance::Template,
            label: None,
        }
    }

    #[test]
    fn known_sentence_has_no_unk() {
        let vocab = build_vocab(["decrease the speed of the audio"]);
        let toks = tokenize(&it("Decrease the speed, of the audio!"), &vocab).unwrap();
        assert_eq!(toks.ids[0], BOS);
        assert_eq!(*toks.ids.last().unwrap(), EOS);
        assert!(!toks.ids.contains(&UNK));
    }

    #[test]
    fn unknown_word_maps_to_unk() {
        let vocab = build_vocab(["decrease the speed"]);
        let toks = tokenize(&it("decrease the zebra"), &vocab).unwrap();
        assert_eq!(toks.ids[3], UNK);
    }

    #[test]
    fn over_long_truncates_with_flag() {
        let vocab = build_vocab(["word"]);
        let long = vec!["word"; 200].join(" ");
        let toks = tokenize(&it(&long), &vocab).unwrap();
        assert!(toks.truncated);
        assert_eq!(toks.ids.len(), MAX_TEXT_LEN);
        assert_eq!(*toks.ids.last().unwrap(), EOS);
    }

    #[test]
    fn empty_rejected() {
        let vocab = build_vocab([]);
        assert!(tokenize(&it("   "), &vocab).is_err());
    }

    #[test]
    fn compose_token_arithmetic() {
        use crate::instructions::compose;
        let vocab = build_vocab(["add reverberation to the audio say in a whispering style and"]);
        let a = it("add reverberation to the audio");
        let b = it("say in a whispering style");
        let c = compose(&a, &b).unwrap();
        let ta = tokenize(&a, &vocab).unwrap().ids.len() - 2;
        let tb = tokenize(&b, &vocab).unwrap().ids.len() - 2;
        let tc = tokenize(&c, &vocab).unwrap().ids.len() - 2;
        assert_eq!(tc, ta + tb + 1);
    }

    #[test]
    fn vocab_serde_round_trip() {
        let vocab = build_vocab(["alpha beta gamma"]);
        let json = serde_json::to_string(&vocab).unwrap();
        let mut back: Vocab = serde_json::from_str(&json).unwrap();
        back.rebuild();
        assert_eq!(vocab, back);
        assert_eq!(back.id_of("beta"), vocab.id_of("beta"));
    }

    #[test]
    fn deterministic_and_injective_on_bank() {
        use crate::instructions::Bank;
        let corpus = Bank::builtin().vocab_corpus();
        let vocab = build_vocab(corpus.iter().map(|s| s.as_str()));
        let mut seen = std::collections::HashMap::new();
        for line in &corpus {
            let toks = tokenize_str(line, &vocab).unwrap();
            assert!(!toks.ids.contains(&UNK), "UNK in bank line: {line}");
            let key = normalize_words(line).join(" ");
            if let Some(prev) = seen.insert(toks.ids.clone(), key.clone()) {
                assert_eq!(prev, key, "two distinct normalized lines share ids");
            }
        }
    }
}
