//! Command-line entry point orchestrating the full pipeline: dataset
//! building, codec fitting, model pre-training and training, conversion,
//! and evaluation. Every subcommand is deterministic given --seed and
//! --config, and logs its resolved configuration into the output directory.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use tivc::audio::{load_wav, save_wav, synth_utterance, GenderProxy, SynthSpec, Waveform};
use tivc::codec::{fit_codec, CodecModel};
use tivc::config::RunConfig;
use tivc::dataset::{
    build_instructspeech_dataset, build_spe_dataset, precompute_codes, Manifest, Split,
};
use tivc::effects::{apply_effect, EffectDirection, EffectKind};
use tivc::error::{Error, Result};
use tivc::eval::{accuracy, adverb_report};
use tivc::instructions::{tokenize_str, InstructionLabel, InstructionText, Vocab};
use tivc::lm::{
    build_default_vocab, init_from, load_code_pairs, sample_convert, text_corpus, train,
    Checkpoint, InitMode, ModelKind, SeqModel, Task, TrainData,
};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "tivc",
    version,
    about = "Text-instruction-guided voice conversion"
)]
struct Cli {
    /// TOML run configuration; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Artifact directory; overrides the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DatasetKind {
    /// Targets made by applying a labeled signal-processing effect.
    Spe,
    /// Source/target re-synthesized with instructed style factors.
    Style,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemKind {
    /// The trained AR+NAR conversion models.
    Model,
    /// Re-apply the true labeled effect (metric-correctness reference).
    Oracle,
    /// Return the source unchanged (floor reference).
    Identity,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an instruction-paired dataset and, when a codec is available,
    /// pre-extract its code grids.
    BuildDataset {
        #[arg(long, value_enum, default_value = "spe")]
        kind: DatasetKind,
        /// Dataset directory (default: <out>/data/<kind>).
        #[arg(long)]
        dir: Option<PathBuf>,
        /// Codec for code pre-extraction (default: <out>/codec.bin if present).
        #[arg(long)]
        codec: Option<PathBuf>,
    },
    /// Fit the residual-vector-quantized codec on synthetic speech.
    TrainCodec,
    /// Pre-train one model on span-mask text denoising or text-to-speech.
    Pretrain {
        /// ar | nar
        #[arg(long)]
        model: String,
        /// text | tts
        #[arg(long)]
        mode: String,
        /// Dataset directory for tts mode (default: <out>/data/spe).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Override train.pretrain_steps.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Train the AR and NAR conversion models on paired data.
    TrainLm {
        /// scratch | text | tts
        #[arg(long, default_value = "scratch")]
        ar_init: String,
        /// scratch | text | tts
        #[arg(long, default_value = "scratch")]
        nar_init: String,
        /// Dataset directory (default: <out>/data/spe).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Convert one WAV file under a text instruction.
    Convert {
        #[arg(long, value_name = "WAV")]
        input: PathBuf,
        #[arg(long)]
        instruction: String,
        #[arg(long, value_name = "WAV")]
        output: PathBuf,
        /// Checkpoint pair name, e.g. Scratch-Scratch (default).
        #[arg(long)]
        setting: Option<String>,
        #[arg(long)]
        ar: Option<PathBuf>,
        #[arg(long)]
        nar: Option<PathBuf>,
        #[arg(long)]
        codec: Option<PathBuf>,
    },
    /// Per-factor conversion-success accuracy over the test split.
    Evaluate {
        /// Checkpoint pair name, e.g. Scratch-Scratch (default).
        #[arg(long)]
        setting: Option<String>,
        #[arg(long, value_enum, default_value = "model")]
        system: SystemKind,
        /// Dataset directory (default: <out>/data/spe).
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        ar: Option<PathBuf>,
        #[arg(long)]
        nar: Option<PathBuf>,
        #[arg(long)]
        codec: Option<PathBuf>,
    },
    /// Mean measured quantity per adverb degree with a monotonicity verdict.
    AdverbReport {
        /// Graded effect family: tempo | volume | pitch | loudness.
        #[arg(long, default_value = "tempo")]
        effect: String,
        /// increase | decrease
        #[arg(long, default_value = "decrease")]
        direction: String,
        #[arg(long, default_value_t = 20)]
        per_degree: usize,
        #[arg(long, value_enum, default_value = "model")]
        system: SystemKind,
        #[arg(long)]
        setting: Option<String>,
        #[arg(long)]
        ar: Option<PathBuf>,
        #[arg(long)]
        nar: Option<PathBuf>,
        #[arg(long)]
        codec: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    cfg.save(cfg.out_dir.join("resolved-config.toml"))?;

    match cli.cmd {
        Cmd::BuildDataset { kind, dir, codec } => build_dataset(&cfg, kind, dir, codec),
        Cmd::TrainCodec => train_codec(&cfg),
        Cmd::Pretrain {
            model,
            mode,
            data,
            steps,
        } => pretrain(&cfg, &model, &mode, data, steps),
        Cmd::TrainLm {
            ar_init,
            nar_init,
            data,
        } => train_lm(&cfg, &ar_init, &nar_init, data),
        Cmd::Convert {
            input,
            instruction,
            output,
            setting,
            ar,
            nar,
            codec,
        } => convert(&cfg, &input, &instruction, &output, setting, ar, nar, codec),
        Cmd::Evaluate {
            setting,
            system,
            data,
            ar,
            nar,
            codec,
        } => evaluate(&cfg, setting, system, data, ar, nar, codec),
        Cmd::AdverbReport {
            effect,
            direction,
            per_degree,
            system,
            setting,
            ar,
            nar,
            codec,
        } => adverb(
            &cfg, &effect, &direction, per_degree, system, setting, ar, nar, codec,
        ),
    }
}

// ---------------------------------------------------------------- paths

fn codec_path(cfg: &RunConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.unwrap_or_else(|| cfg.out_dir.join("codec.bin"))
}

fn data_dir(cfg: &RunConfig, flag: Option<PathBuf>, kind: &str) -> PathBuf {
    flag.unwrap_or_else(|| cfg.out_dir.join("data").join(kind))
}

fn ckpt_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir.join("ckpt")
}

fn pretrain_ckpt_path(cfg: &RunConfig, kind: ModelKind, mode: InitMode) -> PathBuf {
    ckpt_dir(cfg).join(format!(
        "{}-{}.ckpt",
        kind.name(),
        mode.label().to_lowercase()
    ))
}

fn setting_ckpt_path(cfg: &RunConfig, setting: &str, kind: ModelKind) -> PathBuf {
    ckpt_dir(cfg).join(format!("{setting}.{}.ckpt", kind.name()))
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    if !path.exists() {
        return Err(Error::Checkpoint(format!(
            "checkpoint {} not found; run the corresponding training subcommand first",
            path.display()
        )));
    }
    Checkpoint::load(path)
}

fn load_codec(path: &Path) -> Result<CodecModel> {
    if !path.exists() {
        return Err(Error::Checkpoint(format!(
            "codec {} not found; run train-codec first",
            path.display()
        )));
    }
    CodecModel::load(path)
}

// ---------------------------------------------------------------- subcommands

fn build_dataset(
    cfg: &RunConfig,
    kind: DatasetKind,
    dir: Option<PathBuf>,
    codec_flag: Option<PathBuf>,
) -> Result<()> {
    let (name, builder): (_, fn(_, _, &Path) -> Result<Manifest>) = match kind {
        DatasetKind::Spe => ("spe", |c, s, d: &Path| build_spe_dataset(c, s, d)),
        DatasetKind::Style => ("style", |c, s, d: &Path| {
            build_instructspeech_dataset(c, s, d)
        }),
    };
    let dir = data_dir(cfg, dir, name);
    eprintln!("building {name} dataset in {}", dir.display());
    let mut manifest = builder(&cfg.dataset, cfg.seed, &dir)?;
    let default_codec = cfg.out_dir.join("codec.bin");
    let codec_path = match codec_flag {
        Some(p) => Some(p),
        None if default_codec.exists() => Some(default_codec),
        None => None,
    };
    match codec_path {
        Some(p) => {
            let codec = load_codec(&p)?;
            eprintln!(
                "pre-extracting code grids with codec {}",
                codec.fingerprint()
            );
            precompute_codes(&mut manifest, &codec, &dir)?;
        }
        None => eprintln!("no codec available; skipping code pre-extraction"),
    }
    println!(
        "dataset {name}: {} train / {} test examples, manifest hash {}",
        manifest.split(Split::Train).count(),
        manifest.split(Split::Test).count(),
        manifest.content_hash()?
    );
    Ok(())
}

/// Deterministic synthetic fitting corpus for the codec.
fn codec_corpus(cfg: &RunConfig) -> Result<Vec<Waveform>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xc0de_c0de);
    (0..cfg.codec.fit_clips)
        .map(|_| {
            synth_utterance(&SynthSpec {
                base_f0: rng.gen_range(100.0..240.0),
                rms: rng.gen_range(0.05..0.15),
                duration: cfg.codec.fit_duration,
                gender_proxy: if rng.gen_bool(0.5) {
                    GenderProxy::Male
                } else {
                    GenderProxy::Female
                },
                seed: rng.gen(),
                ..SynthSpec::default()
            })
        })
        .collect()
}

fn train_codec(cfg: &RunConfig) -> Result<()> {
    eprintln!(
        "fitting codec: {} clips x {:.2} s, K={}",
        cfg.codec.fit_clips, cfg.codec.fit_duration, cfg.codec.codebook_size
    );
    let corpus = codec_corpus(cfg)?;
    let codec = fit_codec(&corpus, cfg.codec.codebook_size, cfg.seed)?;
    let path = cfg.out_dir.join("codec.bin");
    codec.save(&path)?;
    println!(
        "codec saved to {} (fingerprint {})",
        path.display(),
        codec.fingerprint()
    );
    Ok(())
}

fn parse_model_kind(s: &str) -> Result<ModelKind> {
    match s {
        "ar" => Ok(ModelKind::Ar),
        "nar" => Ok(ModelKind::Nar),
        _ => Err(Error::Config(format!(
            "unknown model {s:?} (expected ar|nar)"
        ))),
    }
}

fn tokenize_lines(lines: &[String], vocab: &Vocab) -> Result<Vec<Vec<u32>>> {
    lines
        .iter()
        .map(|l| tokenize_str(l, vocab).map(|t| t.ids))
        .collect()
}

fn pretrain(
    cfg: &RunConfig,
    model_s: &str,
    mode_s: &str,
    data: Option<PathBuf>,
    steps: Option<usize>,
) -> Result<()> {
    let kind = parse_model_kind(model_s)?;
    let mode = InitMode::parse(mode_s)?;
    let vocab = build_default_vocab();
    let v_text = vocab.size();
    let k = cfg.codec.codebook_size;
    let steps = steps.unwrap_or(cfg.train.pretrain_steps);
    let dir = ckpt_dir(cfg);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let log_dir = cfg.out_dir.join("logs");
    std::fs::create_dir_all(&log_dir).map_err(|e| Error::io(&log_dir, e))?;

    let (mut model, task, report, fingerprint);
    match mode {
        InitMode::Text => {
            model = init_from(
                kind,
                &cfg.model,
                v_text,
                k,
                cfg.seed,
                InitMode::Scratch,
                None,
            )?;
            task = Task::TextPretrain;
            let lines = tokenize_lines(&text_corpus(), &vocab)?;
            let log_path = log_dir.join(format!("{}-text.csv", kind.name()));
            let mut log = std::fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
            eprintln!("text pre-training {} for {steps} steps", kind.name());
            report = train(
                &mut model,
                task,
                &TrainData::Text(&lines),
                steps,
                &cfg.train,
                cfg.seed,
                Some(&mut log),
            )?;
            fingerprint = None;
        }
        InitMode::Tts => {
            let data_dir = data_dir(cfg, data, "spe");
            let manifest = Manifest::load(&data_dir)?;
            let codec = load_codec(&codec_path(cfg, None))?;
            // The TTS regime continues from the text-denoising checkpoint
            // when one exists; otherwise it starts from scratch.
            let text_ckpt = pretrain_ckpt_path(cfg, kind, InitMode::Text);
            model = if text_ckpt.exists() {
                eprintln!("initializing from {}", text_ckpt.display());
                let ckpt = Checkpoint::load(&text_ckpt)?;
                init_from(
                    kind,
                    &cfg.model,
                    v_text,
                    k,
                    cfg.seed,
                    InitMode::Text,
                    Some(&ckpt),
                )?
            } else {
                eprintln!("no text checkpoint found; tts pre-training from scratch");
                init_from(
                    kind,
                    &cfg.model,
                    v_text,
                    k,
                    cfg.seed,
                    InitMode::Scratch,
                    None,
                )?
            };
            task = Task::TtsPretrain;
            let pairs = load_code_pairs(&manifest, &data_dir, &codec, &vocab, Split::Train)?;
            let log_path = log_dir.join(format!("{}-tts.csv", kind.name()));
            let mut log = std::fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
            eprintln!("tts pre-training {} for {steps} steps", kind.name());
            report = train(
                &mut model,
                task,
                &TrainData::Pairs(&pairs),
                steps,
                &cfg.train,
                cfg.seed,
                Some(&mut log),
            )?;
            fingerprint = Some(codec.fingerprint());
        }
        InitMode::Scratch => {
            return Err(Error::Config(
                "pretrain mode must be text or tts; scratch needs no pre-training".into(),
            ))
        }
    }
    let path = pretrain_ckpt_path(cfg, kind, mode);
    Checkpoint::from_model(&model, &vocab, fingerprint).save(&path)?;
    println!(
        "{} {} pre-training done: final loss {:.4}, checkpoint {}",
        kind.name(),
        task.name(),
        report.final_loss,
        path.display()
    );
    Ok(())
}

fn init_with_mode(
    cfg: &RunConfig,
    kind: ModelKind,
    mode: InitMode,
    vocab: &Vocab,
    seed: u64,
) -> Result<SeqModel> {
    let v_text = vocab.size();
    let k = cfg.codec.codebook_size;
    match mode {
        InitMode::Scratch => init_from(kind, &cfg.model, v_text, k, seed, mode, None),
        InitMode::Text | InitMode::Tts => {
            let path = pretrain_ckpt_path(cfg, kind, mode);
            let ckpt = load_checkpoint(&path)?;
            init_from(kind, &cfg.model, v_text, k, seed, mode, Some(&ckpt))
        }
    }
}

fn train_lm(cfg: &RunConfig, ar_init: &str, nar_init: &str, data: Option<PathBuf>) -> Result<()> {
    let ar_mode = InitMode::parse(ar_init)?;
    let nar_mode = InitMode::parse(nar_init)?;
    let setting = format!("{}-{}", ar_mode.label(), nar_mode.label());
    let data_dir = data_dir(cfg, data, "spe");
    let manifest = Manifest::load(&data_dir)?;
    let codec = load_codec(&codec_path(cfg, None))?;
    let vocab = build_default_vocab();
    eprintln!("loading cached code grids from {}", data_dir.display());
    let pairs = load_code_pairs(&manifest, &data_dir, &codec, &vocab, Split::Train)?;
    let dir = ckpt_dir(cfg);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let log_dir = cfg.out_dir.join("logs");
    std::fs::create_dir_all(&log_dir).map_err(|e| Error::io(&log_dir, e))?;

    for (kind, mode, steps, seed_salt) in [
        (ModelKind::Ar, ar_mode, cfg.train.ar_steps, 0x0a),
        (ModelKind::Nar, nar_mode, cfg.train.nar_steps, 0x0b),
    ] {
        let mut model = init_with_mode(cfg, kind, mode, &vocab, cfg.seed ^ seed_salt)?;
        let log_path = log_dir.join(format!("{setting}.{}.csv", kind.name()));
        let mut log = std::fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
        eprintln!(
            "training {} ({} init) for {steps} steps on {} pairs",
            kind.name(),
            mode.label(),
            pairs.len()
        );
        let report = train(
            &mut model,
            Task::Vc,
            &TrainData::Pairs(&pairs),
            steps,
            &cfg.train,
            cfg.seed ^ seed_salt,
            Some(&mut log),
        )?;
        let path = setting_ckpt_path(cfg, &setting, kind);
        Checkpoint::from_model(&model, &vocab, Some(codec.fingerprint())).save(&path)?;
        println!(
            "{} trained: final loss {:.4}, checkpoint {}",
            kind.name(),
            report.final_loss,
            path.display()
        );
    }
    Ok(())
}

/// The trained conversion system behind convert/evaluate/adverb-report.
struct ModelSystem {
    codec: CodecModel,
    ar: SeqModel,
    nar: SeqModel,
    vocab: Vocab,
    temperature: f64,
    nar_temperature: Option<f64>,
    cap_ratio: f64,
    seed: u64,
    calls: u64,
}

impl ModelSystem {
    fn load(
        cfg: &RunConfig,
        setting: Option<String>,
        ar: Option<PathBuf>,
        nar: Option<PathBuf>,
        codec: Option<PathBuf>,
    ) -> Result<ModelSystem> {
        let setting = setting.unwrap_or_else(|| "Scratch-Scratch".into());
        let ar_path = ar.unwrap_or_else(|| setting_ckpt_path(cfg, &setting, ModelKind::Ar));
        let nar_path = nar.unwrap_or_else(|| setting_ckpt_path(cfg, &setting, ModelKind::Nar));
        let codec = load_codec(&codec_path(cfg, codec))?;
        let ar_ckpt = load_checkpoint(&ar_path)?;
        let nar_ckpt = load_checkpoint(&nar_path)?;
        for (ckpt, path) in [(&ar_ckpt, &ar_path), (&nar_ckpt, &nar_path)] {
            if let Some(fp) = &ckpt.codec_fingerprint {
                if *fp != codec.fingerprint() {
                    return Err(Error::StaleCache(format!(
                        "checkpoint {} was trained with a different codec",
                        path.display()
                    )));
                }
            }
        }
        let vocab = ar_ckpt.vocab.clone();
        Ok(ModelSystem {
            codec,
            ar: ar_ckpt.instantiate()?,
            nar: nar_ckpt.instantiate()?,
            vocab,
            temperature: cfg.sampling.temperature,
            nar_temperature: if cfg.sampling.nar_argmax {
                None
            } else {
                Some(cfg.sampling.temperature)
            },
            cap_ratio: cfg.sampling.length_cap_ratio,
            seed: cfg.seed,
            calls: 0,
        })
    }

    fn convert(&mut self, instruction: &str, source: &Waveform) -> Result<Waveform> {
        let z = tokenize_str(instruction, &self.vocab)?;
        let cx = self.codec.encode(source)?;
        if cx.frames() > self.ar.cfg.max_frames {
            return Err(Error::domain(format!(
                "input is {} frames, model supports at most {}",
                cx.frames(),
                self.ar.cfg.max_frames
            )));
        }
        // Stable per-call sampling seed so repeated runs are bit-identical.
        let seed = self
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add(self.calls);
        self.calls += 1;
        let out = sample_convert(
            &self.ar,
            &self.nar,
            &cx,
            &z.ids,
            self.temperature,
            seed,
            self.cap_ratio,
            self.nar_temperature,
        )?;
        self.codec.decode(&out.grid)
    }
}

#[allow(clippy::too_many_arguments)]
fn convert(
    cfg: &RunConfig,
    input: &Path,
    instruction: &str,
    output: &Path,
    setting: Option<String>,
    ar: Option<PathBuf>,
    nar: Option<PathBuf>,
    codec: Option<PathBuf>,
) -> Result<()> {
    let mut system = ModelSystem::load(cfg, setting, ar, nar, codec)?;
    let source = load_wav(input)?;
    let converted = system.convert(instruction, &source)?;
    save_wav(&converted, output)?;
    println!(
        "converted {} ({:.2} s) -> {} ({:.2} s)",
        input.display(),
        source.duration(),
        output.display(),
        converted.duration()
    );
    Ok(())
}

/// The uniform conversion-system closure the evaluation harness drives.
type System<'a> = Box<dyn FnMut(&InstructionText, &Waveform) -> Result<Waveform> + 'a>;

/// Box the chosen system as a uniform closure for the evaluation harness.
fn make_system<'a>(kind: SystemKind, model: Option<&'a mut ModelSystem>) -> System<'a> {
    match kind {
        SystemKind::Identity => Box::new(|_, src| Ok(src.clone())),
        SystemKind::Oracle => Box::new(|instr, src| match instr.label.as_ref() {
            Some(InstructionLabel::Effect(spec)) => Ok(apply_effect(src, spec)?.quantized()),
            _ => Err(Error::domain(
                "oracle system needs an effect-labeled instruction",
            )),
        }),
        SystemKind::Model => {
            let m = model.expect("model system requested without checkpoints");
            Box::new(move |instr, src| m.convert(&instr.text, src))
        }
    }
}

fn system_label(kind: SystemKind, setting: &Option<String>) -> String {
    match kind {
        SystemKind::Model => setting.clone().unwrap_or_else(|| "Scratch-Scratch".into()),
        SystemKind::Oracle => "Oracle".into(),
        SystemKind::Identity => "Identity".into(),
    }
}

fn evaluate(
    cfg: &RunConfig,
    setting: Option<String>,
    system: SystemKind,
    data: Option<PathBuf>,
    ar: Option<PathBuf>,
    nar: Option<PathBuf>,
    codec: Option<PathBuf>,
) -> Result<()> {
    let data_dir = data_dir(cfg, data, "spe");
    let manifest = Manifest::load(&data_dir)?;
    let label = system_label(system, &setting);
    let mut model = match system {
        SystemKind::Model => Some(ModelSystem::load(cfg, setting, ar, nar, codec)?),
        _ => None,
    };
    eprintln!(
        "evaluating {label} on {} test examples",
        manifest.split(Split::Test).count()
    );
    let report = {
        let sys = make_system(system, model.as_mut());
        accuracy(&label, &manifest, &data_dir, cfg.eval.energy_mode, sys)?
    };
    let dir = cfg.out_dir.join("reports");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let txt = dir.join(format!("{label}.txt"));
    std::fs::write(&txt, report.to_text()).map_err(|e| Error::io(&txt, e))?;
    let csv = dir.join(format!("{label}.csv"));
    std::fs::write(&csv, report.to_csv()).map_err(|e| Error::io(&csv, e))?;
    print!("{}", report.to_text());
    println!("report written to {}", txt.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn adverb(
    cfg: &RunConfig,
    effect: &str,
    direction: &str,
    per_degree: usize,
    system: SystemKind,
    setting: Option<String>,
    ar: Option<PathBuf>,
    nar: Option<PathBuf>,
    codec: Option<PathBuf>,
) -> Result<()> {
    let effect = EffectKind::from_name(effect)
        .ok_or_else(|| Error::Config(format!("unknown effect {effect:?}")))?;
    let direction = match direction {
        "increase" => EffectDirection::Increase,
        "decrease" => EffectDirection::Decrease,
        other => {
            return Err(Error::Config(format!(
                "unknown direction {other:?} (expected increase|decrease)"
            )))
        }
    };
    let label = system_label(system, &setting);
    let mut model = match system {
        SystemKind::Model => Some(ModelSystem::load(cfg, setting, ar, nar, codec)?),
        _ => None,
    };
    let report = {
        let sys = make_system(system, model.as_mut());
        adverb_report(effect, direction, per_degree, cfg.seed, sys)?
    };
    let dir = cfg.out_dir.join("reports");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let stem = format!("adverb-{label}-{}-{}", effect.name(), direction.name());
    let txt = dir.join(format!("{stem}.txt"));
    std::fs::write(&txt, report.to_text()).map_err(|e| Error::io(&txt, e))?;
    let csv = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv, report.to_csv()).map_err(|e| Error::io(&csv, e))?;
    print!("{}", report.to_text());
    println!("report written to {}", txt.display());
    Ok(())
}
