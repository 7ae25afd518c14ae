//! Parametric harmonic-plus-noise utterance synthesizer.
//!
//! Voiced spans are sums of harmonics under a slowly modulated F0 contour,
//! unvoiced spans are shaped noise. Emotion proxies map to a fixed
//! (f0 variance multiplier, noise mix, attack time) table so the synthesized
//! prosody is controllable ground truth for the metric suite.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Waveform, DEFAULT_SAMPLE_RATE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionProxy {
    Cheerful,
    Neutral,
    Whisper,
    Sad,
    Shouting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderProxy {
    Male,
    Female,
}

/// Emotion proxy table: (f0 variance multiplier, noise mix, attack seconds).
/// Whisper additionally forces the voiced fraction to zero.
fn emotion_row(e: EmotionProxy) -> (f64, f64, f64) {
    match e {
        EmotionProxy::Cheerful => (1.8, 0.06, 0.005),
        EmotionProxy::Neutral => (1.0, 0.02, 0.020),
        EmotionProxy::Whisper => (0.0, 1.00, 0.020),
        EmotionProxy::Sad => (0.4, 0.10, 0.050),
        EmotionProxy::Shouting => (1.5, 0.12, 0.003),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthSpec {
    pub base_f0: f64,
    pub f0_contour_depth: f64,
    pub rms: f64,
    pub duration: f64,
    pub voiced_fraction: f64,
    pub emotion_proxy: EmotionProxy,
    pub gender_proxy: GenderProxy,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            base_f0: 140.0,
            f0_contour_depth: 0.05,
            rms: 0.1,
            duration: 1.0,
            voiced_fraction: 0.85,
            emotion_proxy: EmotionProxy::Neutral,
            gender_proxy: GenderProxy::Male,
            seed: 0,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if !(60.0..=500.0).contains(&self.base_f0) {
            return Err(Error::domain(format!(
                "base_f0 {} outside [60, 500]",
                self.base_f0
            )));
        }
        // `>=` on the negation also rejects NaN durations.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.duration > 0.0) {
            return Err(Error::domain("duration must be positive"));
        }
        if !(self.rms > 0.0 && self.rms <= 1.0) {
            return Err(Error::domain("rms must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.voiced_fraction) {
            return Err(Error::domain("voiced_fraction must lie in [0, 1]"));
        }
        Ok(())
    }

    /// F0 actually synthesized: the female proxy sits 1.6x above the male
    /// default.
    pub fn effective_f0(&self) -> f64 {
        match self.gender_proxy {
            GenderProxy::Male => self.base_f0,
            GenderProxy::Female => self.base_f0 * 1.6,
        }
    }
}

/// Deterministic given the spec (including seed). Output RMS equals
/// `spec.rms` exactly; mean F0 of voiced frames stays within 5% of the
/// effective F0; length is `round(duration * sample_rate)` samples.
pub fn synth_utterance(spec: &SynthSpec) -> Result<Waveform> {
    spec.validate()?;
    let sr = DEFAULT_SAMPLE_RATE;
    let n = (spec.duration * sr as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let (f0_var_mult, noise_mix, attack) = emotion_row(spec.emotion_proxy);
    let voiced_fraction = if spec.emotion_proxy == EmotionProxy::Whisper {
        0.0
    } else {
        spec.voiced_fraction
    };
    let f0 = spec.effective_f0();
    // Contour excursion capped at +/-4% so the mean-F0 contract holds for any
    // spec the invariants admit.
    let excursion = (spec.f0_contour_depth * f0_var_mult).min(0.04);

    // Slow F0 modulation: two incommensurate sinusoids with random phases.
    let mod_rate_a = rng.gen_range(1.5..3.0);
    let mod_rate_b = rng.gen_range(3.5..5.5);
    let mod_phase_a = rng.gen_range(0.0..std::f64::consts::TAU);
    let mod_phase_b = rng.gen_range(0.0..std::f64::consts::TAU);

    let mut samples = vec![0.0f64; n];
    let nyquist = sr as f64 / 2.0;

    // Syllable-like cycle: a voiced span followed by an unvoiced remainder.
    let mut t0 = 0usize;
    while t0 < n {
        let cycle = (rng.gen_range(0.18..0.30) * sr as f64) as usize;
        let cycle = cycle.min(n - t0);
        let voiced_len = (cycle as f64 * voiced_fraction).round() as usize;

        if voiced_len > 0 {
            let n_harm = ((nyquist * 0.9 / f0).floor() as usize).clamp(1, 6);
            // Harmonic phases are locked to one running pitch phase plus a
            // fixed Schroeder-style offset pattern (flattens the crest), so a
            // voiced span is fully described by (F0 contour, start phase,
            // envelope) — a compact, vocoder-like waveform family.
            let phi0 = rng.gen_range(0.0..std::f64::consts::TAU);
            let mut phases: Vec<f64> = (0..n_harm)
                .map(|h| {
                    let hf = (h + 1) as f64;
                    hf * phi0 + std::f64::consts::PI * hf * hf / n_harm as f64
                })
                .collect();
            let release = 0.020;
            for i in 0..voiced_len {
                let t = (t0 + i) as f64 / sr as f64;
                let inst_f0 = f0
                    * (1.0
                        + excursion
                            * 0.5
                            * ((std::f64::consts::TAU * mod_rate_a * t + mod_phase_a).sin()
                                + (std::f64::consts::TAU * mod_rate_b * t + mod_phase_b).sin()));
                let local = i as f64 / sr as f64;
                let remain = (voiced_len - i) as f64 / sr as f64;
                let env = (local / attack).min(1.0) * (remain / release).min(1.0);
                let mut v = 0.0;
                for (h, phase) in phases.iter_mut().enumerate() {
                    let hf = (h + 1) as f64;
                    *phase += std::f64::consts::TAU * inst_f0 * hf / sr as f64;
                    // Gentle spectral rolloff keeps low harmonics dominant.
                    v += phase.sin() / (hf * hf);
                }
                let noise: f64 = rng.gen_range(-1.0..1.0);
                samples[t0 + i] = env * (v + noise_mix * noise);
            }
        }
        // Unvoiced remainder: low-level shaped noise (simple one-pole lowpass).
        let mut lp = 0.0;
        for i in voiced_len..cycle {
            let white: f64 = rng.gen_range(-1.0..1.0);
            lp += 0.25 * (white - lp);
            samples[t0 + i] = 0.12 * lp;
        }
        t0 += cycle;
    }

    // Exact RMS normalization.
    let e: f64 = samples.iter().map(|s| s * s).sum();
    let cur = (e / n.max(1) as f64).sqrt();
    if cur > 0.0 {
        let g = spec.rms / cur;
        for s in &mut samples {
            *s *= g;
        }
    }

    Ok(Waveform::new(samples, sr))
}
