//! Waveform representation, WAV I/O, tone generation, and the parametric
//! utterance synthesizer used as the source-speech pool.

mod synth;
mod wav;

pub use synth::{synth_utterance, EmotionProxy, GenderProxy, SynthSpec};
pub(crate) use wav::f64_to_i16;
pub use wav::{load_wav, save_wav};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;

/// Mono audio, samples nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        Waveform {
            samples,
            sample_rate,
        }
    }

    pub fn silence(duration: f64, sample_rate: u32) -> Self {
        let n = (duration * sample_rate as f64).round() as usize;
        Waveform::new(vec![0.0; n], sample_rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let e: f64 = self.samples.iter().map(|s| s * s).sum();
        (e / self.samples.len() as f64).sqrt()
    }

    /// Scale every sample by `gain` in place.
    pub fn scale(&mut self, gain: f64) {
        for s in &mut self.samples {
            *s *= gain;
        }
    }

    /// Simulate a save/load cycle: clip to [-1, 1] and quantize to 16-bit.
    /// Dataset targets are built from quantized sources so that re-applying a
    /// labelled effect to the stored source reproduces the stored target
    /// sample-exactly.
    pub fn quantized(&self) -> Waveform {
        let samples = self
            .samples
            .iter()
            .map(|&s| wav::i16_to_f64(wav::f64_to_i16(s)))
            .collect();
        Waveform::new(samples, self.sample_rate)
    }
}

/// Pure sinusoid; `freq` must lie strictly inside the Nyquist range.
pub fn tone(freq: f64, duration: f64, amplitude: f64, sample_rate: u32) -> Result<Waveform> {
    if !(freq > 0.0 && freq < sample_rate as f64 / 2.0) {
        return Err(Error::domain(format!(
            "tone frequency {freq} Hz outside (0, {})",
            sample_rate as f64 / 2.0
        )));
    }
    let n = (duration * sample_rate as f64).round() as usize;
    let w = 2.0 * std::f64::consts::PI * freq / sample_rate as f64;
    let samples = (0..n).map(|i| amplitude * (w * i as f64).sin()).collect();
    Ok(Waveform::new(samples, sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tone_rms_matches_sine_identity() {
        let w = tone(220.0, 1.0, 0.5, 16_000).unwrap();
        assert!((w.rms() - 0.5 / 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn tone_zero_amplitude_is_silent() {
        let w = tone(220.0, 1.0, 0.0, 16_000).unwrap();
        assert!(w.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn tone_rejects_out_of_nyquist() {
        assert!(tone(9000.0, 1.0, 0.5, 16_000).is_err());
        assert!(tone(0.0, 1.0, 0.5, 16_000).is_err());
    }

    #[test]
    fn silence_length() {
        let w = Waveform::silence(1.0, 16_000);
        assert_eq!(w.len(), 16_000);
        assert_eq!(w.rms(), 0.0);
    }
}
