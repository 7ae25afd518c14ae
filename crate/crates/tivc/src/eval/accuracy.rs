//! Per-factor conversion-success accuracy tables and the adverb-degree
//! report. Both drive an arbitrary "system": a closure from (instruction,
//! source waveform) to converted waveform, so the same harness evaluates the
//! trained models, the oracle (re-applying the labeled effect), and the
//! identity baseline.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audio::{load_wav, synth_utterance, SynthSpec, Waveform};
use crate::dataset::{Manifest, Split};
use crate::effects::{Degree, EffectDirection, EffectKind, EffectSpec};
use crate::error::{Error, Result};
use crate::instructions::{
    render_effect_instruction, InstructionLabel, InstructionText, Level, StyleSpec,
};

use super::{judge, measure_with, Direction, EnergyMode, Factor};

pub const FACTOR_ORDER: [Factor; 3] = [Factor::Pitch, Factor::Volume, Factor::Speed];
/// Minimum conversions per degree in the adverb report.
pub const MIN_PER_DEGREE: usize = 20;

impl Factor {
    pub fn name(self) -> &'static str {
        match self {
            Factor::Pitch => "pitch",
            Factor::Volume => "volume",
            Factor::Speed => "speed",
        }
    }
}

/// Success tally for one prosody factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FactorAccuracy {
    pub factor: Factor,
    pub successes: usize,
    pub total: usize,
}

impl FactorAccuracy {
    /// Accuracy in percent; unjudgeable cases stay in the denominator.
    pub fn percent(&self) -> f64 {
        100.0 * self.successes as f64 / self.total as f64
    }
}

/// One evaluated setting: per-factor accuracies plus their mean.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AccuracyReport {
    pub setting: String,
    /// Factors with at least one applicable test case, in pitch/volume/speed
    /// order. Factors with no cases are omitted and noted in `warnings`.
    pub factors: Vec<FactorAccuracy>,
    pub warnings: Vec<String>,
}

impl AccuracyReport {
    pub fn factor(&self, f: Factor) -> Option<&FactorAccuracy> {
        self.factors.iter().find(|fa| fa.factor == f)
    }

    /// Mean of the per-factor accuracies; `None` when no factor applied.
    pub fn mean(&self) -> Option<f64> {
        if self.factors.is_empty() {
            return None;
        }
        Some(self.factors.iter().map(|f| f.percent()).sum::<f64>() / self.factors.len() as f64)
    }

    fn cell(&self, f: Factor) -> String {
        match self.factor(f) {
            Some(fa) => format!("{:.2}", fa.percent()),
            None => "-".into(),
        }
    }

    /// Plain-text table: one row of Pitch/Volume/Speed/Mean percentages.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<16} {:>8} {:>8} {:>8} {:>8}\n",
            "Setting", "Pitch", "Volume", "Speed", "Mean"
        );
        out.push_str(&format!(
            "{:<16} {:>8} {:>8} {:>8} {:>8}\n",
            self.setting,
            self.cell(Factor::Pitch),
            self.cell(Factor::Volume),
            self.cell(Factor::Speed),
            self.mean().map_or("-".into(), |m| format!("{m:.2}")),
        ));
        for w in &self.warnings {
            out.push_str(&format!("# {w}\n"));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("setting,pitch,volume,speed,mean\n");
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            self.setting,
            self.cell(Factor::Pitch),
            self.cell(Factor::Volume),
            self.cell(Factor::Speed),
            self.mean().map_or("-".into(), |m| format!("{m:.2}")),
        ));
        out
    }
}

/// The directional test cases implied by a label; empty when the label does
/// not touch pitch, volume, or speed.
pub fn label_cases(label: &InstructionLabel) -> Vec<(Factor, Direction)> {
    match label {
        InstructionLabel::Effect(spec) => effect_cases(spec),
        InstructionLabel::Style { spec, .. } => style_cases(spec),
    }
}

fn effect_cases(spec: &EffectSpec) -> Vec<(Factor, Direction)> {
    let Some(direction) = spec.direction else {
        return Vec::new();
    };
    let up = direction == EffectDirection::Increase;
    let case = |f: Factor| vec![(f, if up { Direction::Up } else { Direction::Down })];
    match spec.effect {
        EffectKind::Pitch => case(Factor::Pitch),
        EffectKind::Volume | EffectKind::Loudness => case(Factor::Volume),
        // Tempo increase plays faster, i.e. the clip gets shorter.
        EffectKind::Tempo => case(Factor::Speed),
        _ => Vec::new(),
    }
}

fn style_cases(spec: &StyleSpec) -> Vec<(Factor, Direction)> {
    let dir = |level: Level| match level {
        Level::Low => Some(Direction::Down),
        Level::Normal => None,
        Level::High => Some(Direction::Up),
    };
    let mut cases = Vec::new();
    if let Some(d) = dir(spec.pitch) {
        cases.push((Factor::Pitch, d));
    }
    if let Some(d) = dir(spec.volume) {
        cases.push((Factor::Volume, d));
    }
    if let Some(d) = dir(spec.speed) {
        cases.push((Factor::Speed, d));
    }
    cases
}

/// Run `system` over every test-split example whose label touches pitch,
/// volume, or speed, and tally directional successes per factor. A system or
/// measurement error on an example counts as failure for all of its cases.
pub fn accuracy<F>(
    setting: &str,
    manifest: &Manifest,
    dir: impl AsRef<Path>,
    energy: EnergyMode,
    mut system: F,
) -> Result<AccuracyReport>
where
    F: FnMut(&InstructionText, &Waveform) -> Result<Waveform>,
{
    let dir = dir.as_ref();
    let mut tallies: Vec<FactorAccuracy> = FACTOR_ORDER
        .iter()
        .map(|&factor| FactorAccuracy {
            factor,
            successes: 0,
            total: 0,
        })
        .collect();
    let mut applicable = 0usize;
    for ex in manifest.split(Split::Test) {
        let cases = label_cases(&ex.label);
        if cases.is_empty() {
            continue;
        }
        applicable += 1;
        let source = load_wav(dir.join(&ex.source_path))?;
        let judged = system(&ex.instruction, &source).and_then(|converted| {
            let s = measure_with(&source, energy)?;
            let c = measure_with(&converted, energy)?;
            Ok((s, c))
        });
        for (factor, direction) in cases {
            let tally = tallies.iter_mut().find(|t| t.factor == factor).unwrap();
            tally.total += 1;
            if let Ok((s, c)) = &judged {
                if judge(s, c, factor, direction)?.success {
                    tally.successes += 1;
                }
            }
        }
    }
    if applicable == 0 {
        return Err(Error::domain(
            "no test example touches pitch, volume, or speed",
        ));
    }
    let mut warnings = Vec::new();
    let factors: Vec<FactorAccuracy> = tallies
        .into_iter()
        .filter(|t| {
            if t.total == 0 {
                warnings.push(format!(
                    "factor {} omitted: no applicable test cases",
                    t.factor.name()
                ));
            }
            t.total > 0
        })
        .collect();
    Ok(AccuracyReport {
        setting: setting.into(),
        factors,
        warnings,
    })
}

/// Mean measured quantity per adverb degree for one graded effect family.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdverbReport {
    pub effect: EffectKind,
    pub direction: EffectDirection,
    pub factor: Factor,
    /// Conversions behind each per-degree mean.
    pub per_degree: usize,
    /// Mean quantity of the unconverted sources, for reference.
    pub source_mean: f64,
    /// (degree, mean measured quantity), ordered slight → extreme.
    pub rows: Vec<(Degree, f64)>,
    /// True iff the per-degree means move strictly monotonically in the
    /// instructed direction as the degree strengthens (slight through
    /// extreme). The source mean is reported for reference but is not part
    /// of the ordering check.
    pub monotonic: bool,
}

impl AdverbReport {
    fn quantity_name(&self) -> &'static str {
        match self.factor {
            Factor::Pitch => "mean_f0_hz",
            Factor::Volume => "mean_rms",
            Factor::Speed => "duration_s",
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} ({} conversions per degree, {})\n",
            self.effect.name(),
            self.direction.name(),
            self.per_degree,
            self.quantity_name(),
        );
        out.push_str(&format!("{:<10} {:>12}\n", "degree", "mean"));
        out.push_str(&format!("{:<10} {:>12.4}\n", "source", self.source_mean));
        for (degree, mean) in &self.rows {
            out.push_str(&format!("{:<10} {:>12.4}\n", degree.name(), mean));
        }
        out.push_str(&format!(
            "monotonicity: {}\n",
            if self.monotonic { "pass" } else { "fail" }
        ));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("degree,{}\n", self.quantity_name());
        out.push_str(&format!("source,{:.6}\n", self.source_mean));
        for (degree, mean) in &self.rows {
            out.push_str(&format!("{},{mean:.6}\n", degree.name()));
        }
        out
    }
}

/// Which measured quantity an effect family's degree should move, and
/// whether stronger degrees should push it up or down.
fn adverb_family(effect: EffectKind, direction: EffectDirection) -> Result<(Factor, bool)> {
    let up = direction == EffectDirection::Increase;
    match effect {
        EffectKind::Pitch => Ok((Factor::Pitch, up)),
        EffectKind::Volume | EffectKind::Loudness => Ok((Factor::Volume, up)),
        // A stronger tempo increase shortens the clip further.
        EffectKind::Tempo => Ok((Factor::Speed, !up)),
        _ => Err(Error::config(format!(
            "effect {} has no prosody quantity to grade",
            effect.name()
        ))),
    }
}

fn quantity(m: &super::ProsodyMeasurement, factor: Factor) -> Option<f64> {
    match factor {
        Factor::Pitch => m.mean_f0,
        Factor::Volume => Some(m.mean_rms),
        Factor::Speed => Some(m.duration),
    }
}

/// Convert a fixed pool of synthetic sources under each degree of one graded
/// effect family and report the per-degree mean of the affected quantity,
/// with a strict-monotonicity verdict. At least [`MIN_PER_DEGREE`]
/// conversions back each mean.
pub fn adverb_report<F>(
    effect: EffectKind,
    direction: EffectDirection,
    per_degree: usize,
    seed: u64,
    mut system: F,
) -> Result<AdverbReport>
where
    F: FnMut(&InstructionText, &Waveform) -> Result<Waveform>,
{
    let (factor, quantity_up) = adverb_family(effect, direction)?;
    let per_degree = per_degree.max(MIN_PER_DEGREE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources: Vec<Waveform> = (0..per_degree)
        .map(|_| {
            synth_utterance(&SynthSpec {
                base_f0: rng.gen_range(110.0..150.0),
                rms: rng.gen_range(0.06..0.12),
                duration: rng.gen_range(0.5..0.8),
                seed: rng.gen(),
                ..SynthSpec::default()
            })
            .map(|w| w.quantized())
        })
        .collect::<Result<_>>()?;

    let mean_of = |values: &[f64]| -> Result<f64> {
        if values.is_empty() {
            return Err(Error::domain("no judgeable conversions for a degree"));
        }
        Ok(values.iter().sum::<f64>() / values.len() as f64)
    };
    let source_vals: Vec<f64> = sources
        .iter()
        .map(|w| measure_with(w, EnergyMode::Rms).map(|m| quantity(&m, factor)))
        .filter_map(Result::transpose)
        .collect::<Result<_>>()?;
    let source_mean = mean_of(&source_vals)?;

    let mut rows = Vec::with_capacity(Degree::ALL.len());
    for degree in Degree::ALL {
        let spec = EffectSpec::graded(effect, direction, degree)?;
        let instruction = render_effect_instruction(&spec, 0)?;
        let mut vals = Vec::with_capacity(per_degree);
        for src in &sources {
            let converted = system(&instruction, src)?;
            let m = measure_with(&converted, EnergyMode::Rms)?;
            if let Some(v) = quantity(&m, factor) {
                vals.push(v);
            }
        }
        rows.push((degree, mean_of(&vals)?));
    }

    let mut monotonic = true;
    for pair in rows.windows(2) {
        let (prev, mean) = (pair[0].1, pair[1].1);
        monotonic &= if quantity_up {
            mean > prev
        } else {
            mean < prev
        };
    }
    Ok(AdverbReport {
        effect,
        direction,
        factor,
        per_degree,
        source_mean,
        rows,
        monotonic,
    })
}
