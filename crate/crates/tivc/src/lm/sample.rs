//! Conversion inference: stage 1 sampled autoregressively with multinomial
//! sampling, residual stages filled by the NAR model (argmax by default).

use ndarray::ArrayView1;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::{CodeGrid, NUM_STAGES};
use crate::error::{Error, Result};

use super::model::{ModelKind, SeqModel};

#[derive(Debug, Clone)]
pub struct SampleOutcome {
    pub grid: CodeGrid,
    /// Set when stage 1 hit the length cap before emitting EOS.
    pub truncated: bool,
}

/// Multinomial draw over softmax(logits / temperature).
pub fn multinomial_row(logits: &ArrayView1<f64>, temperature: f64, rng: &mut ChaCha8Rng) -> usize {
    let t = temperature.max(1e-6);
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|&v| ((v - max) / t).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen_range(0.0..1.0) * total;
    for (i, &w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Convert a source code grid under an instruction. Stage-1 length is capped
/// at `cap_ratio` times the source frame count; `nar_temperature = None`
/// fills residual stages deterministically by argmax.
#[allow(clippy::too_many_arguments)]
pub fn sample_convert(
    ar: &SeqModel,
    nar: &SeqModel,
    cx: &CodeGrid,
    z: &[u32],
    temperature: f64,
    seed: u64,
    cap_ratio: f64,
    nar_temperature: Option<f64>,
) -> Result<SampleOutcome> {
    if ar.kind != ModelKind::Ar || nar.kind != ModelKind::Nar {
        return Err(Error::config(
            "sample_convert needs (AR, NAR) in that order",
        ));
    }
    if ar.k != nar.k {
        return Err(Error::config(
            "AR and NAR models use different codebook sizes",
        ));
    }
    if cx.frames() == 0 {
        return Err(Error::domain("cannot convert an empty code grid"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = ((cx.frames() as f64 * cap_ratio).round() as usize).clamp(1, ar.cfg.max_frames);
    let cx1 = cx.stage(0);
    let eos = ar.code_eos();

    let mut cy1: Vec<u16> = Vec::new();
    let mut truncated = true;
    while cy1.len() < cap {
        let (logits, _) = ar.ar_forward(z, &cx1, &cy1, None)?;
        let last = logits.row(logits.nrows() - 1);
        let pick = multinomial_row(&last, temperature, &mut rng);
        if pick == eos {
            truncated = false;
            break;
        }
        cy1.push(pick as u16);
    }
    if cy1.is_empty() {
        // An immediate EOS produces no frames; emit one frame of the zero
        // code so downstream decoding stays well-formed.
        cy1.push(0);
    }

    let mut grid = CodeGrid::new(cy1.len(), ar.k);
    for (t, &c) in cy1.iter().enumerate() {
        grid.set(t, 0, c);
    }
    match nar_temperature {
        Some(tau) => nar.nar_fill(z, cx, &mut grid, Some((tau, &mut rng)))?,
        None => nar.nar_fill(z, cx, &mut grid, None)?,
    }
    debug_assert!(grid.raw().iter().all(|&c| (c as usize) < ar.k));
    let _ = NUM_STAGES;
    Ok(SampleOutcome { grid, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;
    use ndarray::Array1;

    fn tiny_cfg() -> ModelConfig {
        ModelConfig {
            d_model: 16,
            heads: 2,
            enc_layers: 1,
            dec_layers: 1,
            ffn_dim: 32,
            dropout: 0.0,
            max_text_len: 64,
            max_frames: 64,
        }
    }

    fn models() -> (SeqModel, SeqModel) {
        (
            SeqModel::new(ModelKind::Ar, &tiny_cfg(), 20, 12, 0),
            SeqModel::new(ModelKind::Nar, &tiny_cfg(), 20, 12, 1),
        )
    }

    fn source_grid() -> CodeGrid {
        let mut g = CodeGrid::new(6, 12);
        for t in 0..6 {
            for s in 0..NUM_STAGES {
                g.set(t, s, ((t + s) % 12) as u16);
            }
        }
        g
    }

    #[test]
    fn multinomial_is_exhaustive_and_greedy_at_low_temperature() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let logits = Array1::from(vec![0.0, 5.0, 1.0]);
        for _ in 0..50 {
            let p = multinomial_row(&logits.view(), 1e-9, &mut rng);
            assert_eq!(p, 1);
        }
        // High temperature visits every index eventually.
        let mut seen = [false; 3];
        for _ in 0..500 {
            seen[multinomial_row(&logits.view(), 50.0, &mut rng)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn same_seed_gives_identical_grid() {
        let (ar, nar) = models();
        let cx = source_grid();
        let z = [1u32, 3, 2];
        let a = sample_convert(&ar, &nar, &cx, &z, 1.0, 42, 5.0, None).unwrap();
        let b = sample_convert(&ar, &nar, &cx, &z, 1.0, 42, 5.0, None).unwrap();
        assert_eq!(a.grid.raw(), b.grid.raw());
        assert_eq!(a.truncated, b.truncated);
    }

    #[test]
    fn output_respects_cap_and_code_range() {
        let (ar, nar) = models();
        let cx = source_grid();
        let z = [1u32, 2];
        for seed in 0..5 {
            let out = sample_convert(&ar, &nar, &cx, &z, 2.0, seed, 5.0, None).unwrap();
            assert!(out.grid.frames() <= 30);
            assert!(out.grid.raw().iter().all(|&c| c < 12));
        }
    }

    #[test]
    fn swapped_models_are_rejected() {
        let (ar, nar) = models();
        let cx = source_grid();
        assert!(sample_convert(&nar, &ar, &cx, &[1], 1.0, 0, 5.0, None).is_err());
    }
}
