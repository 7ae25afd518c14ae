//! Acceptance gates for the whole pipeline. Each test checks one numbered
//! criterion and prints a single `criterion N (<name>): pass|fail` line.
//! Criteria 5 and 6 share one end-to-end toy training run (default model and
//! training config on a 2,000-pair tempo+volume dataset) and together take
//! roughly 45 minutes on one core; everything else finishes in minutes.

use std::sync::OnceLock;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tivc::audio::{synth_utterance, tone, GenderProxy, SynthSpec, Waveform};
use tivc::codec::{fit_codec, snr_db, CodecModel, NUM_STAGES};
use tivc::config::{DatasetConfig, ModelConfig, TrainConfig};
use tivc::dataset::{build_spe_dataset, precompute_codes, Manifest, Split};
use tivc::effects::{apply_effect, Degree, EffectDirection, EffectKind, EffectSpec};
use tivc::error::Result;
use tivc::eval::{accuracy, adverb_report, estimate_f0, EnergyMode, Factor};
use tivc::instructions::{tokenize_str, InstructionLabel, InstructionText, Vocab};
use tivc::lm::ops::{softmax_rows, softmax_xent};
use tivc::lm::{
    build_default_vocab, init_from, load_code_pairs, sample_convert, train, Checkpoint, Head,
    InitMode, ModelKind, SeqModel, Task, TrainData,
};

fn criterion(n: usize, name: &str, body: impl FnOnce() -> std::result::Result<(), String>) {
    match body() {
        Ok(()) => println!("criterion {n} ({name}): pass"),
        Err(e) => {
            println!("criterion {n} ({name}): fail — {e}");
            panic!("criterion {n} ({name}) failed: {e}");
        }
    }
}

fn check(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn synth_corpus(seed: u64, clips: usize, duration: f64) -> Vec<Waveform> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..clips)
        .map(|_| {
            synth_utterance(&SynthSpec {
                base_f0: rng.gen_range(100.0..240.0),
                rms: rng.gen_range(0.05..0.15),
                duration,
                gender_proxy: if rng.gen_bool(0.5) {
                    GenderProxy::Male
                } else {
                    GenderProxy::Female
                },
                seed: rng.gen(),
                ..SynthSpec::default()
            })
            .unwrap()
        })
        .collect()
}

// ------------------------------------------------------------------ 1

#[test]
fn criterion_1_effects_oracle_suite() {
    criterion(1, "effects oracle suite", || {
        let w = synth_utterance(&SynthSpec::default()).map_err(|e| e.to_string())?;

        // Volume: exact RMS scaling.
        let spec = EffectSpec::ungraded(EffectKind::Volume, &[("gain", 0.37)]);
        let out = apply_effect(&w, &spec).map_err(|e| e.to_string())?;
        let rel = (out.rms() / w.rms() - 0.37).abs() / 0.37;
        check(rel <= 1e-6, format!("volume rms scaling off by {rel:.2e}"))?;

        // Reverse is an involution.
        let spec = EffectSpec::ungraded(EffectKind::Reverse, &[]);
        let twice = apply_effect(&apply_effect(&w, &spec).unwrap(), &spec).unwrap();
        check(
            twice.samples == w.samples,
            "reverse twice is not the identity",
        )?;

        // Tempo: output length tracks n / factor.
        for f in [0.6, 0.8, 1.25, 1.5] {
            let spec = EffectSpec::ungraded(EffectKind::Tempo, &[("factor", f)]);
            let out = apply_effect(&w, &spec).unwrap();
            let expect = (w.len() as f64 / f).round();
            check(
                (out.len() as f64 - expect).abs() <= 256.0,
                format!("tempo {f}: len {} vs {expect}", out.len()),
            )?;
        }

        // Pitch +12 semitones doubles measured F0 on a pure tone.
        let t = tone(220.0, 1.0, 0.3, 16_000).unwrap();
        let spec = EffectSpec::ungraded(EffectKind::Pitch, &[("semitones", 12.0)]);
        let shifted = apply_effect(&t, &spec).unwrap();
        let (_, m) = estimate_f0(&shifted).map_err(|e| e.to_string())?;
        let f0 = m.mean_f0.ok_or("shifted tone unvoiced")?;
        check(
            (f0 - 440.0).abs() / 440.0 <= 0.03,
            format!("pitch +12 st: measured {f0:.1} Hz, want 440 ± 3%"),
        )?;

        // Repeat appends k exact copies.
        let spec = EffectSpec::ungraded(EffectKind::Repeat, &[("count", 2.0)]);
        let out = apply_effect(&w, &spec).unwrap();
        check(out.len() == 3 * w.len(), "repeat(2) length is not 3n")?;
        Ok(())
    });
}

// ------------------------------------------------------------------ 2

#[test]
fn criterion_2_codec_gates() {
    criterion(2, "codec gates", || {
        let corpus = synth_corpus(11, 48, 1.0);
        let codec = fit_codec(&corpus, 256, 11).map_err(|e| e.to_string())?;

        // Residual energy non-increasing across all 8 stages, every frame,
        // over 60 s of synthetic speech.
        let probe = synth_corpus(12, 60, 1.0);
        for w in &probe {
            let profile = codec
                .residual_energy_profile(w)
                .map_err(|e| e.to_string())?;
            check(profile.len() == NUM_STAGES + 1, "bad profile length")?;
            for s in 0..NUM_STAGES {
                for (f, (cur, prev)) in profile[s + 1].iter().zip(&profile[s]).enumerate() {
                    check(
                        *cur <= prev + 1e-9,
                        format!("residual energy grew at stage {}, frame {f}", s + 1),
                    )?;
                }
            }
        }

        // Round-trip SNR on in-corpus material.
        let hop = 256;
        let mut worst = f64::INFINITY;
        for w in corpus.iter().take(8) {
            let rec = codec.decode(&codec.encode(w).unwrap()).unwrap();
            let n = w.len().min(rec.len());
            worst = worst.min(snr_db(&w.samples[..n], &rec.samples[..n], hop));
        }
        check(
            worst >= 20.0,
            format!("round-trip SNR {worst:.2} dB < 20 dB"),
        )?;

        // Silence encodes to the all-zero grid.
        let grid = codec.encode(&Waveform::silence(1.0, 16_000)).unwrap();
        check(
            grid.is_all_zero(),
            "silence did not encode to the zero grid",
        )?;
        Ok(())
    });
}

// ------------------------------------------------------------------ 3

fn oracle_system(instr: &InstructionText, src: &Waveform) -> Result<Waveform> {
    match instr.label.as_ref() {
        Some(InstructionLabel::Effect(spec)) => Ok(apply_effect(src, spec)?.quantized()),
        _ => Err(tivc::Error::domain("oracle needs an effect label")),
    }
}

#[test]
fn criterion_3_metric_correctness_gate() {
    criterion(3, "metric-correctness gate", || {
        let dir = tempfile::tempdir().unwrap();
        let cfg = DatasetConfig {
            spe_train: 0,
            spe_test: 200,
            style_train: 0,
            style_test: 0,
            effects: vec!["tempo".into(), "volume".into(), "pitch".into()],
            min_duration: 0.4,
            max_duration: 0.7,
            ..DatasetConfig::default()
        };
        let m = build_spe_dataset(&cfg, 21, dir.path()).map_err(|e| e.to_string())?;

        let r = accuracy("Oracle", &m, dir.path(), EnergyMode::Rms, oracle_system)
            .map_err(|e| e.to_string())?;
        check(r.factors.len() == 3, "a factor had no test cases")?;
        for fa in &r.factors {
            check(
                fa.successes == fa.total,
                format!("oracle {}: {}/{}", fa.factor.name(), fa.successes, fa.total),
            )?;
        }

        let r = accuracy("Identity", &m, dir.path(), EnergyMode::Rms, |_, src| {
            Ok(src.clone())
        })
        .map_err(|e| e.to_string())?;
        for fa in &r.factors {
            check(
                fa.successes == 0,
                format!(
                    "identity {} scored {}/{}",
                    fa.factor.name(),
                    fa.successes,
                    fa.total
                ),
            )?;
        }
        Ok(())
    });
}

// ------------------------------------------------------------------ 4

fn tiny_model_cfg() -> ModelConfig {
    ModelConfig {
        d_model: 8,
        heads: 2,
        enc_layers: 1,
        dec_layers: 1,
        ffn_dim: 16,
        dropout: 0.0,
        max_text_len: 64,
        max_frames: 64,
    }
}

#[test]
fn criterion_4_model_numerics() {
    criterion(4, "model numerics", || {
        // Softmax rows sum to 1.
        let logits = Array2::from_shape_fn((5, 9), |(i, j)| (i as f64 - j as f64) * 0.7);
        for row in softmax_rows(&logits).rows() {
            check((row.sum() - 1.0).abs() <= 1e-5, "softmax row sum off")?;
        }

        let k = 12usize;
        let ar = SeqModel::new(ModelKind::Ar, &tiny_model_cfg(), 20, k, 3);
        let z = [1u32, 5, 2];
        let cx1: Vec<u16> = (0..10).map(|t| (t % k) as u16).collect();

        // Causal-mask exactness: changing a later decoder token leaves
        // earlier logits bit-identical.
        let a = ar.ar_forward(&z, &cx1, &[1, 2, 3, 4], None).unwrap().0;
        let b = ar.ar_forward(&z, &cx1, &[1, 2, 3, 9], None).unwrap().0;
        for t in 0..3 {
            check(a.row(t) == b.row(t), "causal mask leaks future tokens")?;
        }

        // Initial loss ≈ ln(K+1) with the small-head init.
        let targets: Vec<usize> = vec![0, 3, 7, 11, 12];
        let (loss, _) = softmax_xent(&a, &targets[..a.nrows()]);
        let expect = ((k + 1) as f64).ln();
        check(
            (loss - expect).abs() / expect <= 0.10,
            format!("initial loss {loss:.3} vs ln(K+1)={expect:.3}"),
        )?;

        // Analytic gradient vs central finite differences on a d_model=8
        // model, spot-checked across every parameter tensor.
        let mut m = SeqModel::new(ModelKind::Nar, &tiny_model_cfg(), 20, k, 5);
        let enc: Vec<usize> = vec![1, 5, 2, 25, 28];
        let dec: Vec<usize> = vec![21, 24, 27];
        let tg: Vec<usize> = vec![2, 7, 0];
        let loss_of = |m: &SeqModel| {
            let (lg, _) = m
                .forward(&enc, &dec, Some(3), None, Head::Code, None)
                .unwrap();
            softmax_xent(&lg, &tg).0
        };
        {
            let (lg, cache) = m
                .forward(&enc, &dec, Some(3), None, Head::Code, None)
                .unwrap();
            let (_, dlg) = softmax_xent(&lg, &tg);
            m.store.zero_grads();
            m.backward(&cache, &dlg);
        }
        let names: Vec<String> = m.store.names().to_vec();
        let eps = 1e-5;
        for name in names {
            let (r, c) = {
                let t = m.store.by_name(&name).unwrap();
                (t.nrows() / 2, t.ncols() / 2)
            };
            let analytic = m.store.grad(m.store.id(&name))[(r, c)];
            let orig = m.store.by_name(&name).unwrap()[(r, c)];
            m.store.by_name_mut(&name).unwrap()[(r, c)] = orig + eps;
            let lp = loss_of(&m);
            m.store.by_name_mut(&name).unwrap()[(r, c)] = orig - eps;
            let lm = loss_of(&m);
            m.store.by_name_mut(&name).unwrap()[(r, c)] = orig;
            let numeric = (lp - lm) / (2.0 * eps);
            let denom = analytic.abs().max(numeric.abs()).max(1e-8);
            check(
                (analytic - numeric).abs() / denom <= 1e-4,
                format!("gradient mismatch in {name}: {analytic:.3e} vs {numeric:.3e}"),
            )?;
        }

        // Single-batch overfit: < 0.1 nats/token within 2,000 steps.
        let mut ar = SeqModel::new(ModelKind::Ar, &tiny_model_cfg(), 20, k, 7);
        let cy1: Vec<u16> = vec![3, 1, 4, 1, 5];
        let mut tg: Vec<usize> = cy1.iter().map(|&c| c as usize).collect();
        tg.push(k); // end-of-sequence
        let tc = TrainConfig {
            lr: 3e-3,
            warmup_steps: 20,
            ..TrainConfig::default()
        };
        let mut last = f64::INFINITY;
        for step in 0..2000 {
            let (lg, cache) = ar.ar_forward(&z, &cx1, &cy1, None).unwrap();
            let (loss, dlg) = softmax_xent(&lg, &tg);
            last = loss;
            if loss < 0.05 {
                break;
            }
            ar.store.zero_grads();
            ar.backward(&cache, &dlg);
            ar.store.clip_grads(1.0);
            let lr = tc.lr * ((step as f64 + 1.0) / tc.warmup_steps as f64).min(1.0);
            ar.store.adam_step(lr);
        }
        check(last < 0.1, format!("overfit stalled at {last:.3} nats"))?;
        Ok(())
    });
}

// ------------------------------------------------------------------ 5 & 6 (shared toy run)

struct Toy {
    dir: tempfile::TempDir,
    codec: CodecModel,
    manifest: Manifest,
    vocab: Vocab,
    ar: SeqModel,
    nar: SeqModel,
}

/// A deterministic conversion system over the toy models; each call draws a
/// fresh sampling seed from the call counter.
struct ToySystem<'a> {
    toy: &'a Toy,
    calls: u64,
}

impl<'a> ToySystem<'a> {
    fn convert(&mut self, instr: &InstructionText, src: &Waveform) -> Result<Waveform> {
        let z = tokenize_str(&instr.text, &self.toy.vocab)?;
        let cx = self.toy.codec.encode(src)?;
        let seed = 0x5eed_0000 + self.calls;
        self.calls += 1;
        let out = sample_convert(
            &self.toy.ar,
            &self.toy.nar,
            &cx,
            &z.ids,
            1.0,
            seed,
            5.0,
            None,
        )?;
        self.toy.codec.decode(&out.grid)
    }
}

static TOY: OnceLock<std::result::Result<Toy, String>> = OnceLock::new();

fn toy() -> &'static Toy {
    TOY.get_or_init(|| build_toy().map_err(|e| e.to_string()))
        .as_ref()
        .unwrap_or_else(|e| panic!("toy pipeline failed: {e}"))
}

fn build_toy() -> Result<Toy> {
    let seed = 7u64;
    let dir = tempfile::tempdir().unwrap();
    eprintln!("[toy] fitting codec");
    let codec = fit_codec(&synth_corpus(seed ^ 0xc0de, 48, 1.0), 256, seed)?;
    eprintln!("[toy] building 2000/200 tempo+volume dataset");
    let dcfg = DatasetConfig {
        effects: vec!["tempo".into(), "volume".into()],
        ..DatasetConfig::default()
    };
    let mut manifest = build_spe_dataset(&dcfg, seed, dir.path())?;
    precompute_codes(&mut manifest, &codec, dir.path())?;
    let vocab = build_default_vocab();
    let pairs = load_code_pairs(&manifest, dir.path(), &codec, &vocab, Split::Train)?;

    let mcfg = ModelConfig::default();
    let tc = TrainConfig::default();
    let mut ar = init_from(
        ModelKind::Ar,
        &mcfg,
        vocab.size(),
        256,
        seed,
        InitMode::Scratch,
        None,
    )?;
    eprintln!("[toy] training AR from scratch for {} steps", tc.ar_steps);
    let rep = train(
        &mut ar,
        Task::Vc,
        &TrainData::Pairs(&pairs),
        tc.ar_steps,
        &tc,
        seed,
        None,
    )?;
    eprintln!("[toy] AR final loss {:.4}", rep.final_loss);
    let mut nar = init_from(
        ModelKind::Nar,
        &mcfg,
        vocab.size(),
        256,
        seed ^ 1,
        InitMode::Scratch,
        None,
    )?;
    eprintln!("[toy] training NAR from scratch for {} steps", tc.nar_steps);
    let rep = train(
        &mut nar,
        Task::Vc,
        &TrainData::Pairs(&pairs),
        tc.nar_steps,
        &tc,
        seed ^ 1,
        None,
    )?;
    eprintln!("[toy] NAR final loss {:.4}", rep.final_loss);
    Ok(Toy {
        dir,
        codec,
        manifest,
        vocab,
        ar,
        nar,
    })
}

#[test]
fn criterion_5_end_to_end_toy_training() {
    criterion(5, "end-to-end toy training ≥ 70%", || {
        let toy = toy();
        let mut sys = ToySystem { toy, calls: 0 };
        let report = accuracy(
            "Scratch-Scratch",
            &toy.manifest,
            toy.dir.path(),
            EnergyMode::Rms,
            |i, w| sys.convert(i, w),
        )
        .map_err(|e| e.to_string())?;
        print!("{}", report.to_text());
        for factor in [Factor::Speed, Factor::Volume] {
            let fa = report
                .factor(factor)
                .ok_or_else(|| format!("no {} cases in the test split", factor.name()))?;
            check(
                fa.percent() >= 70.0,
                format!("{} accuracy {:.2}% < 70%", factor.name(), fa.percent()),
            )?;
        }
        Ok(())
    });
}

#[test]
fn criterion_6_adverb_monotonicity() {
    criterion(6, "adverb-degree duration ordering", || {
        let toy = toy();
        let mut sys = ToySystem {
            toy,
            calls: 1_000_000,
        };
        let report = adverb_report(
            EffectKind::Tempo,
            EffectDirection::Decrease,
            20,
            77,
            |i: &InstructionText, w: &Waveform| sys.convert(i, w),
        )
        .map_err(|e| e.to_string())?;
        print!("{}", report.to_text());
        check(report.rows.len() == Degree::ALL.len(), "missing degrees")?;
        check(
            report.per_degree >= 20,
            "fewer than 20 conversions per degree",
        )?;
        let mut prev = report.source_mean;
        for &(deg, mean) in &report.rows {
            check(
                mean > prev,
                format!("durations not strictly increasing at {}", deg.name()),
            )?;
            prev = mean;
        }
        check(report.monotonic, "monotonicity verdict is fail")?;
        Ok(())
    });
}

// ------------------------------------------------------------------ 7

#[test]
fn criterion_7_pretraining_matrix() {
    criterion(7, "nine AR×NAR init combinations", || {
        let seed = 31u64;
        let dir = tempfile::tempdir().unwrap();
        let codec = fit_codec(&synth_corpus(seed, 6, 0.8), 32, seed).map_err(|e| e.to_string())?;
        let dcfg = DatasetConfig {
            spe_train: 12,
            spe_test: 4,
            style_train: 0,
            style_test: 0,
            effects: vec!["tempo".into(), "volume".into()],
            min_duration: 0.4,
            max_duration: 0.6,
            ..DatasetConfig::default()
        };
        let mut manifest = build_spe_dataset(&dcfg, seed, dir.path()).map_err(|e| e.to_string())?;
        precompute_codes(&mut manifest, &codec, dir.path()).map_err(|e| e.to_string())?;
        let vocab = build_default_vocab();
        let pairs = load_code_pairs(&manifest, dir.path(), &codec, &vocab, Split::Train)
            .map_err(|e| e.to_string())?;
        let mcfg = ModelConfig {
            d_model: 32,
            heads: 2,
            enc_layers: 1,
            dec_layers: 1,
            ffn_dim: 64,
            dropout: 0.0,
            max_text_len: 64,
            max_frames: 128,
        };
        let tc = TrainConfig {
            batch_size: 4,
            warmup_steps: 2,
            ..TrainConfig::default()
        };
        let k = 32usize;

        // Pre-train text and tts checkpoints for both model kinds.
        let lines: Vec<Vec<u32>> = tivc::lm::text_corpus()
            .iter()
            .map(|l| tokenize_str(l, &vocab).unwrap().ids)
            .collect();
        let mut ckpts: Vec<(ModelKind, InitMode, Checkpoint)> = Vec::new();
        for kind in [ModelKind::Ar, ModelKind::Nar] {
            let mut m = init_from(kind, &mcfg, vocab.size(), k, seed, InitMode::Scratch, None)
                .map_err(|e| e.to_string())?;
            train(
                &mut m,
                Task::TextPretrain,
                &TrainData::Text(&lines),
                4,
                &tc,
                seed,
                None,
            )
            .map_err(|e| e.to_string())?;
            let text_ckpt = Checkpoint::from_model(&m, &vocab, None);
            let mut t = init_from(
                kind,
                &mcfg,
                vocab.size(),
                k,
                seed,
                InitMode::Text,
                Some(&text_ckpt),
            )
            .map_err(|e| e.to_string())?;
            train(
                &mut t,
                Task::TtsPretrain,
                &TrainData::Pairs(&pairs),
                4,
                &tc,
                seed,
                None,
            )
            .map_err(|e| e.to_string())?;
            ckpts.push((kind, InitMode::Text, text_ckpt));
            ckpts.push((
                kind,
                InitMode::Tts,
                Checkpoint::from_model(&t, &vocab, Some(codec.fingerprint())),
            ));
        }
        let get = |kind: ModelKind, mode: InitMode| {
            ckpts
                .iter()
                .find(|(ki, mo, _)| *ki == kind && *mo == mode)
                .map(|(_, _, c)| c)
        };

        let modes = [InitMode::Scratch, InitMode::Text, InitMode::Tts];
        for ar_mode in modes {
            for nar_mode in modes {
                let name = format!("{}-{}", ar_mode.label(), nar_mode.label());
                let mut ar = init_from(
                    ModelKind::Ar,
                    &mcfg,
                    vocab.size(),
                    k,
                    seed ^ 2,
                    ar_mode,
                    get(ModelKind::Ar, ar_mode),
                )
                .map_err(|e| format!("{name}: {e}"))?;
                let mut nar = init_from(
                    ModelKind::Nar,
                    &mcfg,
                    vocab.size(),
                    k,
                    seed ^ 3,
                    nar_mode,
                    get(ModelKind::Nar, nar_mode),
                )
                .map_err(|e| format!("{name}: {e}"))?;
                // One epoch over the 12 training pairs per model.
                for (m, s) in [(&mut ar, 10u64), (&mut nar, 11u64)] {
                    train(
                        m,
                        Task::Vc,
                        &TrainData::Pairs(&pairs),
                        3,
                        &tc,
                        seed ^ s,
                        None,
                    )
                    .map_err(|e| format!("{name}: {e}"))?;
                }

                // One evaluation pass over the held-out split.
                let mut calls = 0u64;
                accuracy(&name, &manifest, dir.path(), EnergyMode::Rms, |i, w| {
                    let z = tokenize_str(&i.text, &vocab)?;
                    let cx = codec.encode(w)?;
                    calls += 1;
                    let out = sample_convert(&ar, &nar, &cx, &z.ids, 1.0, calls, 5.0, None)?;
                    codec.decode(&out.grid)
                })
                .map_err(|e| format!("{name}: evaluation failed: {e}"))?;

                // Checkpoint interchangeability: save/load reproduces the
                // forward pass bit-exactly.
                let probe_z = [1u32, 4, 2];
                let probe_cx: Vec<u16> = (0..8).map(|t| (t % k) as u16).collect();
                let before = ar
                    .ar_forward(&probe_z, &probe_cx, &[1, 2], None)
                    .map_err(|e| e.to_string())?
                    .0;
                let bytes = Checkpoint::from_model(&ar, &vocab, Some(codec.fingerprint()))
                    .to_bytes()
                    .map_err(|e| e.to_string())?;
                let reloaded = Checkpoint::from_bytes(&bytes)
                    .and_then(|c| c.instantiate())
                    .map_err(|e| e.to_string())?;
                let after = reloaded
                    .ar_forward(&probe_z, &probe_cx, &[1, 2], None)
                    .map_err(|e| e.to_string())?
                    .0;
                check(
                    before == after,
                    format!("{name}: reload changed the forward pass"),
                )?;
            }
        }
        Ok(())
    });
}

// ------------------------------------------------------------------ 8

#[test]
fn criterion_8_determinism() {
    criterion(8, "bit-identical reruns", || {
        let dcfg = DatasetConfig {
            spe_train: 8,
            spe_test: 4,
            style_train: 0,
            style_test: 0,
            min_duration: 0.4,
            max_duration: 0.6,
            ..DatasetConfig::default()
        };
        // Dataset builds: identical manifest bytes across directories.
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let m1 = build_spe_dataset(&dcfg, 5, d1.path()).map_err(|e| e.to_string())?;
        let m2 = build_spe_dataset(&dcfg, 5, d2.path()).map_err(|e| e.to_string())?;
        check(
            m1.to_jsonl().unwrap() == m2.to_jsonl().unwrap(),
            "manifests differ between identical builds",
        )?;
        let b1 = std::fs::read(d1.path().join("manifest.jsonl")).unwrap();
        let b2 = std::fs::read(d2.path().join("manifest.jsonl")).unwrap();
        check(b1 == b2, "manifest files differ on disk")?;

        // Codec fits: identical serialized bytes.
        let corpus = synth_corpus(3, 6, 0.8);
        let c1 = fit_codec(&corpus, 32, 9).map_err(|e| e.to_string())?;
        let c2 = fit_codec(&corpus, 32, 9).map_err(|e| e.to_string())?;
        check(c1.to_bytes() == c2.to_bytes(), "codec bytes differ")?;
        check(c1.fingerprint() == c2.fingerprint(), "fingerprints differ")?;

        // Sampling: identical code grids for a fixed seed.
        let mcfg = ModelConfig {
            d_model: 16,
            heads: 2,
            enc_layers: 1,
            dec_layers: 1,
            ffn_dim: 32,
            dropout: 0.0,
            max_text_len: 64,
            max_frames: 64,
        };
        let ar = SeqModel::new(ModelKind::Ar, &mcfg, 20, 32, 1);
        let nar = SeqModel::new(ModelKind::Nar, &mcfg, 20, 32, 2);
        let cx = c1.encode(&corpus[0]).map_err(|e| e.to_string())?;
        let z = [1u32, 6, 3, 2];
        let g1 =
            sample_convert(&ar, &nar, &cx, &z, 1.0, 99, 2.0, None).map_err(|e| e.to_string())?;
        let g2 =
            sample_convert(&ar, &nar, &cx, &z, 1.0, 99, 2.0, None).map_err(|e| e.to_string())?;
        check(g1.grid.raw() == g2.grid.raw(), "sampled grids differ")?;
        Ok(())
    });
}
