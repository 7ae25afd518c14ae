//! DSP kernels behind the effect families.

use crate::audio::Waveform;

pub const TEMPO_WINDOW: usize = 512;
pub const TEMPO_HOP: usize = 256;
/// WSOLA alignment search half-width in samples.
const TEMPO_SEARCH: usize = 100;

/// Time-scale by `factor` with waveform-similarity overlap-add; pitch is
/// preserved and the output length is exactly `round(n / factor)`.
pub fn tempo(w: &Waveform, factor: f64) -> Waveform {
    let n = w.len();
    let out_len = (n as f64 / factor).round() as usize;
    if n <= TEMPO_WINDOW || out_len <= TEMPO_WINDOW {
        // Degenerate clip: nearest-sample resample of the time axis.
        let samples = (0..out_len)
            .map(|i| {
                let src = ((i as f64 * factor).round() as usize).min(n.saturating_sub(1));
                w.samples[src]
            })
            .collect();
        return Waveform::new(samples, w.sample_rate);
    }

    let window: Vec<f64> = (0..TEMPO_WINDOW)
        .map(|i| {
            let x = std::f64::consts::PI * i as f64 / TEMPO_WINDOW as f64;
            x.sin() * x.sin() // Hann; sums to 1 at 50% overlap
        })
        .collect();

    let mut acc = vec![0.0f64; out_len + TEMPO_WINDOW];
    let mut wsum = vec![0.0f64; out_len + TEMPO_WINDOW];

    // Natural continuation of the previously copied frame; the WSOLA search
    // aligns each new frame against it.
    let mut prev_analysis: Option<usize> = None;
    let mut p = 0usize;
    while p < out_len {
        let nominal = ((p as f64 * factor).round() as usize).min(n - TEMPO_WINDOW);
        let analysis = match prev_analysis {
            None => nominal,
            Some(prev) => {
                let target = prev + TEMPO_HOP; // where the previous frame "wants" to continue
                let lo = nominal.saturating_sub(TEMPO_SEARCH);
                let hi = (nominal + TEMPO_SEARCH).min(n - TEMPO_WINDOW);
                let mut best = nominal;
                let mut best_score = f64::MIN;
                if target + TEMPO_HOP <= n {
                    for cand in lo..=hi {
                        let mut score = 0.0;
                        for i in 0..TEMPO_HOP {
                            score += w.samples[cand + i] * w.samples[target + i];
                        }
                        if score > best_score {
                            best_score = score;
                            best = cand;
                        }
                    }
                }
                best
            }
        };
        for i in 0..TEMPO_WINDOW {
            acc[p + i] += window[i] * w.samples[analysis + i];
            wsum[p + i] += window[i];
        }
        prev_analysis = Some(analysis);
        p += TEMPO_HOP;
    }

    let samples = (0..out_len)
        .map(|i| {
            if wsum[i] > 1e-6 {
                acc[i] / wsum[i]
            } else {
                0.0
            }
        })
        .collect();
    Waveform::new(samples, w.sample_rate)
}

/// Shift pitch by `semitones` while preserving duration: resample by the
/// pitch ratio, then time-scale back with `tempo`.
pub fn pitch_shift(w: &Waveform, semitones: f64) -> Waveform {
    let ratio = 2f64.powf(semitones / 12.0);
    let resampled = resample_linear(w, ratio);
    tempo(&resampled, 1.0 / ratio)
}

/// Playback-speed resampling by `ratio` (ratio > 1 shortens and raises pitch).
fn resample_linear(w: &Waveform, ratio: f64) -> Waveform {
    let n = w.len();
    let out_len = ((n as f64) / ratio).round() as usize;
    let samples = (0..out_len)
        .map(|i| {
            let pos = i as f64 * ratio;
            let k = pos.floor() as usize;
            if k + 1 >= n {
                w.samples[n - 1]
            } else {
                let frac = pos - k as f64;
                w.samples[k] * (1.0 - frac) + w.samples[k + 1] * frac
            }
        })
        .collect();
    Waveform::new(samples, w.sample_rate)
}

/// y[t] = x[t] + decay * x[t - d]; length unchanged.
pub fn echo(w: &Waveform, delay_ms: f64, decay: f64) -> Waveform {
    let d = (delay_ms / 1000.0 * w.sample_rate as f64).round() as usize;
    let samples = (0..w.len())
        .map(|t| {
            w.samples[t]
                + if t >= d {
                    decay * w.samples[t - d]
                } else {
                    0.0
                }
        })
        .collect();
    Waveform::new(samples, w.sample_rate)
}

/// Pure offset: the whole signal shifted later by the delay.
pub fn delay(w: &Waveform, delay_ms: f64) -> Waveform {
    let d = (delay_ms / 1000.0 * w.sample_rate as f64).round() as usize;
    let mut samples = vec![0.0; d];
    samples.extend_from_slice(&w.samples);
    Waveform::new(samples, w.sample_rate)
}

/// Schroeder reverberator: four parallel feedback combs into two series
/// all-pass filters. `room` in (0, 1] scales feedback and wet mix.
pub fn reverb(w: &Waveform, room: f64) -> Waveform {
    let sr = w.sample_rate as f64;
    let scale = sr / 44_100.0;
    let comb_delays: Vec<usize> = [1116usize, 1188, 1277, 1356]
        .iter()
        .map(|&d| ((d as f64 * scale).round() as usize).max(1))
        .collect();
    let allpass_delays: Vec<usize> = [225usize, 556]
        .iter()
        .map(|&d| ((d as f64 * scale).round() as usize).max(1))
        .collect();
    let feedback = (0.70 + 0.28 * room).min(0.98);
    let wet = 0.25 + 0.45 * room;

    let n = w.len();
    let mut wet_sig = vec![0.0f64; n];
    for &cd in &comb_delays {
        let mut buf = vec![0.0f64; cd];
        for (t, wet) in wet_sig.iter_mut().enumerate() {
            let idx = t % cd;
            let out = buf[idx];
            buf[idx] = w.samples[t] + feedback * out;
            *wet += out / comb_delays.len() as f64;
        }
    }
    for &ad in &allpass_delays {
        let g = 0.5;
        let mut buf = vec![0.0f64; ad];
        for (t, wet) in wet_sig.iter_mut().enumerate() {
            let idx = t % ad;
            let delayed = buf[idx];
            buf[idx] = *wet + g * delayed;
            *wet = delayed - g * buf[idx];
        }
    }

    let samples = (0..n).map(|t| w.samples[t] + wet * wet_sig[t]).collect();
    Waveform::new(samples, w.sample_rate)
}

/// Linear amplitude ramps at both ends.
pub fn fade(w: &Waveform, fade_in_s: f64, fade_out_s: f64) -> Waveform {
    let n = w.len();
    let n_in = (fade_in_s * w.sample_rate as f64).round() as usize;
    let n_out = (fade_out_s * w.sample_rate as f64).round() as usize;
    let samples = (0..n)
        .map(|t| {
            let mut g = 1.0;
            if n_in > 0 && t < n_in {
                g *= t as f64 / n_in as f64;
            }
            if n_out > 0 && t >= n - n_out.min(n) {
                g *= (n - 1 - t) as f64 / n_out as f64;
            }
            w.samples[t] * g.clamp(0.0, 1.0)
        })
        .collect();
    Waveform::new(samples, w.sample_rate)
}

pub enum ShelfKind {
    Low,
    High,
}

/// Biquad shelving filter (audio EQ cookbook, shelf slope 1).
pub fn shelf(w: &Waveform, freq: f64, gain_db: f64, kind: ShelfKind) -> Waveform {
    let a = 10f64.powf(gain_db / 40.0);
    let w0 = 2.0 * std::f64::consts::PI * freq / w.sample_rate as f64;
    let (cos_w0, sin_w0) = (w0.cos(), w0.sin());
    let alpha = sin_w0 / 2.0 * 2f64.sqrt();
    let two_sqrt_a_alpha = 2.0 * a.sqrt() * alpha;

    let (b0, b1, b2, a0, a1, a2) = match kind {
        ShelfKind::Low => (
            a * ((a + 1.0) - (a - 1.0) * cos_w0 + two_sqrt_a_alpha),
            2.0 * a * ((a - 1.0) - (a + 1.0) * cos_w0),
            a * ((a + 1.0) - (a - 1.0) * cos_w0 - two_sqrt_a_alpha),
            (a + 1.0) + (a - 1.0) * cos_w0 + two_sqrt_a_alpha,
            -2.0 * ((a - 1.0) + (a + 1.0) * cos_w0),
            (a + 1.0) + (a - 1.0) * cos_w0 - two_sqrt_a_alpha,
        ),
        ShelfKind::High => (
            a * ((a + 1.0) + (a - 1.0) * cos_w0 + two_sqrt_a_alpha),
            -2.0 * a * ((a - 1.0) + (a + 1.0) * cos_w0),
            a * ((a + 1.0) + (a - 1.0) * cos_w0 - two_sqrt_a_alpha),
            (a + 1.0) - (a - 1.0) * cos_w0 + two_sqrt_a_alpha,
            2.0 * ((a - 1.0) - (a + 1.0) * cos_w0),
            (a + 1.0) - (a - 1.0) * cos_w0 - two_sqrt_a_alpha,
        ),
    };

    let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
    let samples = w
        .samples
        .iter()
        .map(|&x| {
            let y = (b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2) / a0;
            x2 = x1;
            x1 = x;
            y2 = y1;
            y1 = y;
            y
        })
        .collect();
    Waveform::new(samples, w.sample_rate)
}

/// Gain with low-frequency emphasis: a broadband gain plus a low shelf at
/// 1 kHz carrying half the gain again, approximating equal-loudness weighting.
pub fn loudness(w: &Waveform, gain_db: f64) -> Waveform {
    let shelved = shelf(w, 1000.0, gain_db * 0.5, ShelfKind::Low);
    let g = 10f64.powf(gain_db / 20.0);
    let mut out = shelved;
    out.scale(g);
    out
}

/// Delayed copy with sinusoidally modulated delay, mixed onto the dry signal.
pub fn chorus(w: &Waveform, delay_ms: f64, depth_ms: f64, rate_hz: f64, mix: f64) -> Waveform {
    let sr = w.sample_rate as f64;
    let d0 = delay_ms / 1000.0 * sr;
    let depth = depth_ms / 1000.0 * sr;
    let n = w.len();
    let samples = (0..n)
        .map(|t| {
            let lfo = (2.0 * std::f64::consts::PI * rate_hz * t as f64 / sr).sin();
            let d = d0 + depth * lfo;
            let pos = t as f64 - d;
            let tap = if pos < 0.0 {
                0.0
            } else {
                let k = pos.floor() as usize;
                if k + 1 >= n {
                    w.samples[n - 1]
                } else {
                    let frac = pos - k as f64;
                    w.samples[k] * (1.0 - frac) + w.samples[k + 1] * frac
                }
            };
            w.samples[t] + mix * tap
        })
        .collect();
    Waveform::new(samples, w.sample_rate)
}

/// Soft-knee waveshaping compression: y = tanh(k x) / tanh(k) with the knee
/// hardness k rising with `amount`.
pub fn contrast(w: &Waveform, amount: f64) -> Waveform {
    let k = 1.0 + amount / 20.0;
    let norm = k.tanh();
    let samples = w.samples.iter().map(|&x| (k * x).tanh() / norm).collect();
    Waveform::new(samples, w.sample_rate)
}
