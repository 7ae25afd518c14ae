//! Training loops for the three tasks: conversion (`vc`), span-mask text
//! denoising (`text_pretrain`), and text-to-speech (`tts_pretrain`, encoder
//! sees the instruction only). One optimizer step accumulates per-example
//! gradients over a batch; losses stream to a CSV log.

use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::{CodeGrid, CodecModel};
use crate::config::TrainConfig;
use crate::dataset::{load_codes, Manifest, Split};
use crate::error::{Error, Result};
use crate::instructions::{tokenize_str, Bank, Vocab, MASK};

use super::model::{Head, ModelKind, SeqModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Vc,
    TextPretrain,
    TtsPretrain,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Vc => "vc",
            Task::TextPretrain => "text_pretrain",
            Task::TtsPretrain => "tts_pretrain",
        }
    }

    pub fn parse(s: &str) -> Result<Task> {
        match s {
            "vc" => Ok(Task::Vc),
            "text" | "text_pretrain" => Ok(Task::TextPretrain),
            "tts" | "tts_pretrain" => Ok(Task::TtsPretrain),
            _ => Err(Error::Config(format!("unknown task {s:?}"))),
        }
    }
}

/// One training example with pre-extracted codes.
#[derive(Debug, Clone)]
pub struct CodePair {
    pub text: Vec<u32>,
    pub src: CodeGrid,
    pub tgt: CodeGrid,
}

pub enum TrainData<'a> {
    Pairs(&'a [CodePair]),
    Text(&'a [Vec<u32>]),
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// (step, batch loss) at every logging interval.
    pub losses: Vec<(usize, f64)>,
    pub final_loss: f64,
}

/// Tokenize instructions and pull cached code grids for one split.
pub fn load_code_pairs(
    manifest: &Manifest,
    dir: impl AsRef<std::path::Path>,
    codec: &CodecModel,
    vocab: &Vocab,
    split: Split,
) -> Result<Vec<CodePair>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for ex in manifest.split(split) {
        let (src_rel, tgt_rel) = match (&ex.source_codes, &ex.target_codes) {
            (Some(s), Some(t)) => (s, t),
            _ => {
                return Err(Error::StaleCache(format!(
                    "example {} has no cached codes; run code pre-extraction first",
                    ex.id
                )))
            }
        };
        let toks = tokenize_str(&ex.instruction.text, vocab)?;
        out.push(CodePair {
            text: toks.ids,
            src: load_codes(manifest, src_rel, codec, dir)?,
            tgt: load_codes(manifest, tgt_rel, codec, dir)?,
        });
    }
    Ok(out)
}

/// Sentences for text pre-training: every instruction the bank can produce
/// plus the plain-text file shipped with the crate.
pub fn text_corpus() -> Vec<String> {
    let mut lines = Bank::builtin().vocab_corpus();
    lines.extend(
        include_str!("../../data/pretrain_text.txt")
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.to_string()),
    );
    lines
}

/// The default closed vocabulary shared by every model in a run.
pub fn build_default_vocab() -> Vocab {
    let corpus = text_corpus();
    crate::instructions::build_vocab(corpus.iter().map(|s| s.as_str()))
}

/// Replace ~`rate` of the tokens with MASK in geometric spans (mean length
/// `mean_span`). BOS/EOS positions are never masked.
pub fn span_mask(ids: &[u32], rate: f64, mean_span: f64, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut out = ids.to_vec();
    if ids.len() <= 2 {
        return out;
    }
    let inner = ids.len() - 2;
    let budget = (inner as f64 * rate).round() as usize;
    let mut masked = 0usize;
    let p_end = 1.0 / mean_span.max(1.0);
    let mut guard = 0;
    while masked < budget && guard < 100 {
        guard += 1;
        let start = 1 + rng.gen_range(0..inner);
        let mut pos = start;
        loop {
            if pos >= ids.len() - 1 {
                break;
            }
            if out[pos] != MASK {
                out[pos] = MASK;
                masked += 1;
            }
            pos += 1;
            if masked >= budget || rng.gen_bool(p_end) {
                break;
            }
        }
    }
    out
}

fn step_seed(seed: u64, step: u64) -> u64 {
    let mut z = seed ^ step.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct ExampleBatchItem {
    enc: Vec<usize>,
    dec: Vec<usize>,
    stage: Option<usize>,
    head: Head,
    targets: Vec<usize>,
    /// Index of the stop-token target, when this item ends with one.
    stop_index: Option<usize>,
    /// Source code length backing the AR progress embedding.
    src_frames: Option<usize>,
}

fn make_item(
    model: &SeqModel,
    task: Task,
    data: &TrainData,
    idx: usize,
    stage_j: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ExampleBatchItem> {
    match (task, data) {
        (Task::Vc | Task::TtsPretrain, TrainData::Pairs(pairs)) => {
            let pair = &pairs[idx];
            match model.kind {
                ModelKind::Ar => {
                    let cx1 = pair.src.stage(0);
                    let cy1 = pair.tgt.stage(0);
                    let enc = if task == Task::TtsPretrain {
                        pair.text.iter().map(|&t| t as usize).collect()
                    } else {
                        model.vc_enc_ids(&pair.text, &cx1)
                    };
                    let dec = model.dec_ids_from_codes(&cy1);
                    let mut targets: Vec<usize> = cy1.iter().map(|&c| c as usize).collect();
                    targets.push(model.code_eos());
                    let stop_index = Some(targets.len() - 1);
                    let src_frames = (task == Task::Vc).then(|| cx1.len().max(1));
                    Ok(ExampleBatchItem {
                        enc,
                        dec,
                        stage: None,
                        head: Head::Code,
                        targets,
                        stop_index,
                        src_frames,
                    })
                }
                ModelKind::Nar => {
                    let j = stage_j;
                    let cxj = pair.src.stage(j - 1);
                    let prev = pair.tgt.stage(j - 2);
                    let cur = pair.tgt.stage(j - 1);
                    let enc = if task == Task::TtsPretrain {
                        pair.text.iter().map(|&t| t as usize).collect()
                    } else {
                        model.vc_enc_ids(&pair.text, &cxj)
                    };
                    let dec: Vec<usize> = prev.iter().map(|&c| model.code_token(c)).collect();
                    Ok(ExampleBatchItem {
                        enc,
                        dec,
                        stage: Some(j - 2),
                        head: Head::Code,
                        targets: cur.iter().map(|&c| c as usize).collect(),
                        stop_index: None,
                        src_frames: None,
                    })
                }
            }
        }
        (Task::TextPretrain, TrainData::Text(lines)) => {
            let s = &lines[idx];
            let masked = span_mask(s, 0.3, 3.0, rng);
            let enc: Vec<usize> = masked.iter().map(|&t| t as usize).collect();
            match model.kind {
                ModelKind::Ar => {
                    let dec: Vec<usize> = s[..s.len() - 1].iter().map(|&t| t as usize).collect();
                    let targets: Vec<usize> = s[1..].iter().map(|&t| t as usize).collect();
                    Ok(ExampleBatchItem {
                        enc,
                        dec,
                        stage: None,
                        head: Head::Text,
                        targets,
                        stop_index: None,
                        src_frames: None,
                    })
                }
                ModelKind::Nar => Ok(ExampleBatchItem {
                    enc: enc.clone(),
                    dec: enc,
                    stage: None,
                    head: Head::Text,
                    targets: s.iter().map(|&t| t as usize).collect(),
                    stop_index: None,
                    src_frames: None,
                }),
            }
        }
        _ => Err(Error::config(format!(
            "task {} does not match the provided training data",
            task.name()
        ))),
    }
}

/// Run `steps` optimizer steps. Deterministic given (model state, seed).
pub fn train(
    model: &mut SeqModel,
    task: Task,
    data: &TrainData,
    steps: usize,
    tc: &TrainConfig,
    seed: u64,
    mut log: Option<&mut dyn Write>,
) -> Result<TrainReport> {
    let n = match data {
        TrainData::Pairs(p) => p.len(),
        TrainData::Text(t) => t.len(),
    };
    if n == 0 {
        return Err(Error::config("training data is empty"));
    }
    if let Some(w) = log.as_deref_mut() {
        writeln!(w, "step,task,loss").map_err(|e| Error::io("log", e))?;
    }
    let mut losses = Vec::new();
    let mut final_loss = f64::NAN;
    for step in 0..steps {
        let mut rng = ChaCha8Rng::seed_from_u64(step_seed(seed, step as u64));
        let stage_j = 2 + (rng.gen_range(0..7usize)); // one stage per batch
        model.store.zero_grads();
        let mut batch_loss = 0.0;
        for _ in 0..tc.batch_size {
            let idx = rng.gen_range(0..n);
            let item = make_item(model, task, data, idx, stage_j, &mut rng)?;
            let (logits, cache) = model.forward(
                &item.enc,
                &item.dec,
                item.stage,
                item.src_frames,
                item.head,
                Some(&mut rng),
            )?;
            let (loss, mut dlogits) = match item.stop_index {
                Some(si) if tc.stop_weight != 1.0 => {
                    let mut w = vec![1.0; item.targets.len()];
                    w[si] = tc.stop_weight;
                    super::ops::softmax_xent_weighted(&logits, &item.targets, &w)
                }
                _ => super::ops::softmax_xent(&logits, &item.targets),
            };
            dlogits.mapv_inplace(|v| v / tc.batch_size as f64);
            model.backward(&cache, &dlogits);
            batch_loss += loss / tc.batch_size as f64;
        }
        model.store.clip_grads(1.0);
        // Linear warmup, then cosine decay to 10% of the peak rate.
        let warm = (tc.warmup_steps.max(1)) as f64;
        let lr = if (step as f64) < warm - 1.0 {
            tc.lr * (step as f64 + 1.0) / warm
        } else {
            let span = (steps as f64 - warm).max(1.0);
            let frac = ((step as f64 + 1.0 - warm) / span).clamp(0.0, 1.0);
            let floor = 0.1;
            tc.lr * (floor + (1.0 - floor) * 0.5 * (1.0 + (std::f64::consts::PI * frac).cos()))
        };
        model.store.adam_step(lr);
        final_loss = batch_loss;
        if step % tc.log_every.max(1) == 0 || step + 1 == steps {
            losses.push((step, batch_loss));
            if let Some(w) = log.as_deref_mut() {
                writeln!(w, "{step},{},{batch_loss}", task.name())
                    .map_err(|e| Error::io("log", e))?;
            }
        }
    }
    Ok(TrainReport { losses, final_loss })
}

/// Fraction of masked positions the model reconstructs correctly
/// (teacher-forced, evaluation mode).
pub fn masked_accuracy(model: &SeqModel, lines: &[Vec<u32>], seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut correct = 0usize;
    let mut total = 0usize;
    for s in lines {
        let masked = span_mask(s, 0.3, 3.0, &mut rng);
        let enc: Vec<usize> = masked.iter().map(|&t| t as usize).collect();
        let (logits, positions): (ndarray::Array2<f64>, Vec<(usize, u32)>) = match model.kind {
            ModelKind::Ar => {
                let dec: Vec<usize> = s[..s.len() - 1].iter().map(|&t| t as usize).collect();
                let (lg, _) = model.forward(&enc, &dec, None, None, Head::Text, None)?;
                // Output row t predicts s[t+1]; masked position p is predicted
                // by row p-1.
                let pos = (1..s.len() - 1)
                    .filter(|&p| masked[p] == MASK)
                    .map(|p| (p - 1, s[p]))
                    .collect();
                (lg, pos)
            }
            ModelKind::Nar => {
                let (lg, _) = model.forward(&enc, &enc, None, None, Head::Text, None)?;
                let pos = (1..s.len() - 1)
                    .filter(|&p| masked[p] == MASK)
                    .map(|p| (p, s[p]))
                    .collect();
                (lg, pos)
            }
        };
        for (row, want) in positions {
            let r = logits.row(row);
            let mut best = 0usize;
            let mut bv = f64::NEG_INFINITY;
            for (i, &v) in r.iter().enumerate() {
                if v > bv {
                    bv = v;
                    best = i;
                }
            }
            total += 1;
            if best == want as usize {
                correct += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::domain("no masked positions sampled"));
    }
    Ok(correct as f64 / total as f64)
}
