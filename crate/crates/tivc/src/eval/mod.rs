//! Signal-processing metric suite: F0 estimation, prosody measurement,
//! directional conversion judging, per-factor accuracy tables, and the
//! adverb-degree report.

mod accuracy;

pub use accuracy::{accuracy, adverb_report, AccuracyReport, AdverbReport, FactorAccuracy};

use crate::audio::Waveform;
use crate::error::{Error, Result};

pub const F0_MIN_HZ: f64 = 60.0;
pub const F0_MAX_HZ: f64 = 500.0;
pub const FRAME_SECS: f64 = 0.025;
pub const HOP_SECS: f64 = 0.010;
/// Frames with normalized autocorrelation below this are unvoiced.
pub const VOICING_THRESHOLD: f64 = 0.5;
/// Below this voiced ratio the mean F0 is unjudgeable.
pub const MIN_VOICED_RATIO: f64 = 0.1;

/// How "average energy" is computed; either satisfies the directional test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMode {
    #[default]
    Rms,
    MeanSquare,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProsodyMeasurement {
    /// Mean F0 over voiced frames; `None` when the voiced ratio is below
    /// [`MIN_VOICED_RATIO`] (unjudgeable).
    pub mean_f0: Option<f64>,
    pub voiced_ratio: f64,
    pub mean_rms: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Pitch,
    Volume,
    Speed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionJudgment {
    pub factor: Factor,
    pub expected_direction: Direction,
    pub success: bool,
    pub unjudgeable: bool,
}

/// Per-frame F0 track plus summary prosody. Autocorrelation peak search in
/// [60, 500] Hz with parabolic lag interpolation; 25 ms frames, 10 ms hop.
pub fn estimate_f0(w: &Waveform) -> Result<(Vec<Option<f64>>, ProsodyMeasurement)> {
    if w.is_empty() {
        return Err(Error::domain("estimate_f0 on empty waveform"));
    }
    let sr = w.sample_rate as f64;
    let frame = (FRAME_SECS * sr).round() as usize;
    let hop = (HOP_SECS * sr).round() as usize;
    let tau_min = (sr / F0_MAX_HZ).floor() as usize;
    let tau_max = ((sr / F0_MIN_HZ).ceil() as usize).min(frame.saturating_sub(8));

    let mut track = Vec::new();
    let mut i = 0;
    while i + frame <= w.len() {
        let x = &w.samples[i..i + frame];
        track.push(frame_f0(x, sr, tau_min, tau_max));
        i += hop;
    }
    if track.is_empty() {
        // Shorter than one frame: analyze the whole clip as a single frame.
        let tmax = tau_max.min(w.len().saturating_sub(8));
        if tmax > tau_min {
            track.push(frame_f0(&w.samples, sr, tau_min, tmax));
        } else {
            track.push(None);
        }
    }

    let voiced: Vec<f64> = track.iter().filter_map(|f| *f).collect();
    let voiced_ratio = voiced.len() as f64 / track.len() as f64;
    let mean_f0 = if voiced_ratio > MIN_VOICED_RATIO {
        Some(voiced.iter().sum::<f64>() / voiced.len() as f64)
    } else {
        None
    };
    let m = ProsodyMeasurement {
        mean_f0,
        voiced_ratio,
        mean_rms: w.rms(),
        duration: w.duration(),
    };
    Ok((track, m))
}

/// Single-frame pitch decision via normalized cross-correlation. Prefers the
/// smallest lag within 5% of the best score, which suppresses subharmonic
/// (octave-down) picks on harmonic-rich signals.
fn frame_f0(x: &[f64], sr: f64, tau_min: usize, tau_max: usize) -> Option<f64> {
    let n = x.len();
    if tau_max <= tau_min || tau_max >= n {
        return None;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = x.iter().map(|v| v - mean).collect();

    let ncc = |tau: usize| -> f64 {
        let m = n - tau;
        let mut num = 0.0;
        let mut e0 = 0.0;
        let mut e1 = 0.0;
        for i in 0..m {
            num += x[i] * x[i + tau];
            e0 += x[i] * x[i];
            e1 += x[i + tau] * x[i + tau];
        }
        if e0 <= 1e-12 || e1 <= 1e-12 {
            return 0.0;
        }
        num / (e0 * e1).sqrt()
    };

    let scores: Vec<f64> = (tau_min..=tau_max).map(ncc).collect();
    let best = scores.iter().cloned().fold(f64::MIN, f64::max);
    if best < VOICING_THRESHOLD {
        return None;
    }
    // Smallest local-maximum lag within 5% of the best score.
    let mut pick = None;
    for (k, &s) in scores.iter().enumerate() {
        let left = if k == 0 { f64::MIN } else { scores[k - 1] };
        let right = if k + 1 == scores.len() {
            f64::MIN
        } else {
            scores[k + 1]
        };
        if s >= 0.95 * best && s >= left && s >= right {
            pick = Some(k);
            break;
        }
    }
    let k = pick?;
    let tau = (tau_min + k) as f64 + parabolic_offset(&scores, k);
    Some(sr / tau)
}

fn parabolic_offset(scores: &[f64], k: usize) -> f64 {
    if k == 0 || k + 1 >= scores.len() {
        return 0.0;
    }
    let (a, b, c) = (scores[k - 1], scores[k], scores[k + 1]);
    let denom = a - 2.0 * b + c;
    if denom.abs() < 1e-12 {
        return 0.0;
    }
    (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
}

/// Global prosody summary without the F0 track.
pub fn measure(w: &Waveform) -> Result<ProsodyMeasurement> {
    measure_with(w, EnergyMode::Rms)
}

pub fn measure_with(w: &Waveform, energy: EnergyMode) -> Result<ProsodyMeasurement> {
    if w.is_empty() {
        return Err(Error::domain("measure on empty waveform"));
    }
    let (_, mut m) = estimate_f0(w)?;
    if energy == EnergyMode::MeanSquare {
        m.mean_rms = m.mean_rms * m.mean_rms;
    }
    Ok(m)
}

/// Strict directional comparison between source and converted prosody.
pub fn judge(
    source: &ProsodyMeasurement,
    converted: &ProsodyMeasurement,
    factor: Factor,
    expected_direction: Direction,
) -> Result<ConversionJudgment> {
    if expected_direction == Direction::None {
        return Err(Error::domain("judge requires an up/down direction"));
    }
    let mut unjudgeable = false;
    let success = match factor {
        Factor::Pitch => match (source.mean_f0, converted.mean_f0) {
            (Some(a), Some(b)) => match expected_direction {
                Direction::Up => b > a,
                Direction::Down => b < a,
                Direction::None => unreachable!(),
            },
            _ => {
                unjudgeable = true;
                false
            }
        },
        Factor::Volume => match expected_direction {
            Direction::Up => converted.mean_rms > source.mean_rms,
            Direction::Down => converted.mean_rms < source.mean_rms,
            Direction::None => unreachable!(),
        },
        // Speed up means the clip gets shorter.
        Factor::Speed => match expected_direction {
            Direction::Up => converted.duration < source.duration,
            Direction::Down => converted.duration > source.duration,
            Direction::None => unreachable!(),
        },
    };
    Ok(ConversionJudgment {
        factor,
        expected_direction,
        success,
        unjudgeable,
    })
}
