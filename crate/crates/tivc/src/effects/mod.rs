//! The 14 effect families used to build the signal-processing-effect dataset,
//! each deterministic, with fixed degree-parameter grids for the graded ones.

mod dsp;

use std::collections::BTreeMap;

use crate::audio::Waveform;
use crate::error::{Error, Result};

/// Graded modifier strength; `Default` is the adverb-free form.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Degree {
    Slight,
    Default,
    Notable,
    Extreme,
}

impl Degree {
    pub const ALL: [Degree; 4] = [
        Degree::Slight,
        Degree::Default,
        Degree::Notable,
        Degree::Extreme,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Degree::Slight => "slight",
            Degree::Default => "default",
            Degree::Notable => "notable",
            Degree::Extreme => "extreme",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectDirection {
    Increase,
    Decrease,
}

impl EffectDirection {
    pub fn name(self) -> &'static str {
        match self {
            EffectDirection::Increase => "increase",
            EffectDirection::Decrease => "decrease",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectKind {
    Bass,
    Treble,
    Chorus,
    Delay,
    Echo,
    Fade,
    Loudness,
    Repeat,
    Reverb,
    Reverse,
    Tempo,
    Volume,
    Pitch,
    Contrast,
}

impl EffectKind {
    pub const ALL: [EffectKind; 14] = [
        EffectKind::Bass,
        EffectKind::Treble,
        EffectKind::Chorus,
        EffectKind::Delay,
        EffectKind::Echo,
        EffectKind::Fade,
        EffectKind::Loudness,
        EffectKind::Repeat,
        EffectKind::Reverb,
        EffectKind::Reverse,
        EffectKind::Tempo,
        EffectKind::Volume,
        EffectKind::Pitch,
        EffectKind::Contrast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EffectKind::Bass => "bass",
            EffectKind::Treble => "treble",
            EffectKind::Chorus => "chorus",
            EffectKind::Delay => "delay",
            EffectKind::Echo => "echo",
            EffectKind::Fade => "fade",
            EffectKind::Loudness => "loudness",
            EffectKind::Repeat => "repeat",
            EffectKind::Reverb => "reverb",
            EffectKind::Reverse => "reverse",
            EffectKind::Tempo => "tempo",
            EffectKind::Volume => "volume",
            EffectKind::Pitch => "pitch",
            EffectKind::Contrast => "contrast",
        }
    }

    pub fn from_name(s: &str) -> Option<EffectKind> {
        EffectKind::ALL.iter().copied().find(|e| e.name() == s)
    }

    /// Directions for which a degree grid exists. Empty for ungraded effects.
    pub fn graded_directions(self) -> &'static [EffectDirection] {
        use EffectDirection::*;
        match self {
            EffectKind::Tempo
            | EffectKind::Volume
            | EffectKind::Pitch
            | EffectKind::Bass
            | EffectKind::Treble
            | EffectKind::Loudness => &[Increase, Decrease],
            EffectKind::Echo
            | EffectKind::Reverb
            | EffectKind::Fade
            | EffectKind::Repeat
            | EffectKind::Contrast => &[Increase],
            EffectKind::Reverse | EffectKind::Chorus | EffectKind::Delay => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EffectSpec {
    pub effect: EffectKind,
    pub params: BTreeMap<String, f64>,
    pub direction: Option<EffectDirection>,
    pub degree: Option<Degree>,
}

impl EffectSpec {
    pub fn ungraded(effect: EffectKind, params: &[(&str, f64)]) -> EffectSpec {
        EffectSpec {
            effect,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            direction: None,
            degree: None,
        }
    }

    /// Spec from the fixed degree grid for a graded effect.
    pub fn graded(
        effect: EffectKind,
        direction: EffectDirection,
        degree: Degree,
    ) -> Result<EffectSpec> {
        let params = degree_params(effect, direction, degree)?;
        Ok(EffectSpec {
            effect,
            params,
            direction: Some(direction),
            degree: Some(degree),
        })
    }

    pub fn param(&self, name: &str) -> Result<f64> {
        self.params.get(name).copied().ok_or_else(|| {
            Error::domain(format!(
                "{} effect missing parameter '{name}'",
                self.effect.name()
            ))
        })
    }
}

/// Fixed degree grid entry for a graded effect. The grids are strictly
/// monotone in each effect's principal parameter.
pub fn degree_params(
    effect: EffectKind,
    direction: EffectDirection,
    degree: Degree,
) -> Result<BTreeMap<String, f64>> {
    use Degree::*;
    use EffectDirection::*;
    let idx = match degree {
        Slight => 0,
        Default => 1,
        Notable => 2,
        Extreme => 3,
    };
    let mut params = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        params.insert(k.to_string(), v);
    };
    match (effect, direction) {
        (EffectKind::Tempo, Decrease) => put("factor", [0.8, 0.6, 0.4, 0.25][idx]),
        (EffectKind::Tempo, Increase) => put("factor", [1.25, 1.5, 2.0, 3.0][idx]),
        (EffectKind::Volume, Decrease) => put("gain", [0.75, 0.5, 0.3, 0.15][idx]),
        (EffectKind::Volume, Increase) => put("gain", [1.25, 1.5, 2.0, 3.0][idx]),
        (EffectKind::Pitch, Increase) => put("semitones", [2.0, 4.0, 7.0, 12.0][idx]),
        (EffectKind::Pitch, Decrease) => put("semitones", [-2.0, -4.0, -7.0, -12.0][idx]),
        (EffectKind::Bass, Increase) => put("gain_db", [3.0, 6.0, 9.0, 15.0][idx]),
        (EffectKind::Bass, Decrease) => put("gain_db", [-3.0, -6.0, -9.0, -15.0][idx]),
        (EffectKind::Treble, Increase) => put("gain_db", [3.0, 6.0, 9.0, 15.0][idx]),
        (EffectKind::Treble, Decrease) => put("gain_db", [-3.0, -6.0, -9.0, -15.0][idx]),
        (EffectKind::Loudness, Increase) => put("gain_db", [2.0, 4.0, 8.0, 12.0][idx]),
        (EffectKind::Loudness, Decrease) => put("gain_db", [-2.0, -4.0, -8.0, -12.0][idx]),
        (EffectKind::Echo, Increase) => {
            put("delay_ms", 120.0);
            put("decay", [0.2, 0.35, 0.5, 0.7][idx]);
        }
        (EffectKind::Reverb, Increase) => put("room", [0.25, 0.4, 0.6, 0.85][idx]),
        (EffectKind::Fade, Increase) => {
            let t = [0.05, 0.1, 0.25, 0.5][idx];
            put("fade_in_s", t);
            put("fade_out_s", t);
        }
        (EffectKind::Repeat, Increase) => put("count", [1.0, 2.0, 3.0, 5.0][idx]),
        (EffectKind::Contrast, Increase) => put("amount", [20.0, 40.0, 60.0, 85.0][idx]),
        _ => {
            return Err(Error::domain(format!(
                "effect {} has no degree grid for direction {}",
                effect.name(),
                direction.name()
            )))
        }
    }
    Ok(params)
}

/// Apply one effect; pure function of (samples, spec).
pub fn apply_effect(w: &Waveform, spec: &EffectSpec) -> Result<Waveform> {
    if w.is_empty() {
        return Err(Error::domain("apply_effect on empty waveform"));
    }
    match spec.effect {
        EffectKind::Volume => {
            let gain = spec.param("gain")?;
            check_range("gain", gain, 0.0, 10.0)?;
            let mut out = w.clone();
            out.scale(gain);
            Ok(out)
        }
        EffectKind::Reverse => {
            let mut out = w.clone();
            out.samples.reverse();
            Ok(out)
        }
        EffectKind::Repeat => {
            let count = spec.param("count")?;
            if !(1.0..=10.0).contains(&count) || count.fract() != 0.0 {
                return Err(Error::domain(format!(
                    "repeat count {count} not an integer in [1, 10]"
                )));
            }
            let k = count as usize;
            let mut samples = Vec::with_capacity(w.len() * (k + 1));
            for _ in 0..=k {
                samples.extend_from_slice(&w.samples);
            }
            Ok(Waveform::new(samples, w.sample_rate))
        }
        EffectKind::Tempo => {
            let factor = spec.param("factor")?;
            check_range("factor", factor, 0.1, 10.0)?;
            Ok(dsp::tempo(w, factor))
        }
        EffectKind::Pitch => {
            let st = spec.param("semitones")?;
            check_range("semitones", st, -24.0, 24.0)?;
            Ok(dsp::pitch_shift(w, st))
        }
        EffectKind::Echo => {
            let delay_ms = spec.param("delay_ms")?;
            let decay = spec.param("decay")?;
            check_range("delay_ms", delay_ms, 1.0, 1000.0)?;
            check_range("decay", decay, 0.0, 0.99)?;
            Ok(dsp::echo(w, delay_ms, decay))
        }
        EffectKind::Delay => {
            let delay_ms = spec.param("delay_ms")?;
            check_range("delay_ms", delay_ms, 1.0, 1000.0)?;
            Ok(dsp::delay(w, delay_ms))
        }
        EffectKind::Reverb => {
            let room = spec.param("room")?;
            check_range("room", room, 0.05, 1.0)?;
            Ok(dsp::reverb(w, room))
        }
        EffectKind::Fade => {
            let t_in = spec.param("fade_in_s")?;
            let t_out = spec.param("fade_out_s")?;
            check_range("fade_in_s", t_in, 0.0, w.duration())?;
            check_range("fade_out_s", t_out, 0.0, w.duration())?;
            Ok(dsp::fade(w, t_in, t_out))
        }
        EffectKind::Bass => {
            let db = spec.param("gain_db")?;
            check_range("gain_db", db, -30.0, 30.0)?;
            Ok(dsp::shelf(w, 300.0, db, dsp::ShelfKind::Low))
        }
        EffectKind::Treble => {
            let db = spec.param("gain_db")?;
            check_range("gain_db", db, -30.0, 30.0)?;
            Ok(dsp::shelf(w, 3000.0, db, dsp::ShelfKind::High))
        }
        EffectKind::Loudness => {
            let db = spec.param("gain_db")?;
            check_range("gain_db", db, -30.0, 30.0)?;
            Ok(dsp::loudness(w, db))
        }
        EffectKind::Chorus => {
            let delay_ms = spec.param("delay_ms").unwrap_or(25.0);
            let depth_ms = spec.param("depth_ms").unwrap_or(2.0);
            let rate_hz = spec.param("rate_hz").unwrap_or(0.8);
            let mix = spec.param("mix").unwrap_or(0.4);
            check_range("delay_ms", delay_ms, 5.0, 100.0)?;
            check_range("depth_ms", depth_ms, 0.1, 10.0)?;
            check_range("rate_hz", rate_hz, 0.05, 5.0)?;
            check_range("mix", mix, 0.0, 1.0)?;
            Ok(dsp::chorus(w, delay_ms, depth_ms, rate_hz, mix))
        }
        EffectKind::Contrast => {
            let amount = spec.param("amount")?;
            check_range("amount", amount, 0.0, 100.0)?;
            Ok(dsp::contrast(w, amount))
        }
    }
}

fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if !v.is_finite() || v < lo || v > hi {
        return Err(Error::domain(format!(
            "parameter {name}={v} outside [{lo}, {hi}]"
        )));
    }
    Ok(())
}
