//! Invertible-transform residual-vector-quantization codec with the code-grid
//! contract: encode waveform -> (frames x 8) integer grid, decode back.
//!
//! MDCT frames (window 512, hop 256) are scale-normalized per coefficient
//! band and quantized by 8 sequential k-means codebooks; stage j quantizes
//! the residual left by stages 1..j-1. Index 0 of every codebook is pinned to
//! the zero vector, so residual energy is non-increasing across stages and
//! silence encodes to the all-zero grid.

mod kmeans;
mod mdct;

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::{Array1, Array2, Axis};
use sha2::{Digest, Sha256};

use crate::audio::Waveform;
use crate::error::{Error, Result};

pub const NUM_STAGES: usize = 8;
pub const FRAME_SIZE: usize = 512;
pub const HOP: usize = 256;
pub const DEFAULT_CODEBOOK_SIZE: usize = 256;

const MAGIC: &[u8; 8] = b"TIVCCODC";
const VERSION: u32 = 1;

/// Band-scale floor as a fraction of the corpus global RMS.
const BAND_SCALE_FLOOR: f64 = 0.5;

/// Integer code matrix, (frames x 8 stages), entries in [0, K).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeGrid {
    codes: Vec<u16>,
    frames: usize,
    pub codebook_size: usize,
}

impl CodeGrid {
    pub fn new(frames: usize, codebook_size: usize) -> CodeGrid {
        CodeGrid {
            codes: vec![0; frames * NUM_STAGES],
            frames,
            codebook_size,
        }
    }

    pub fn from_rows(rows: Vec<[u16; NUM_STAGES]>, codebook_size: usize) -> CodeGrid {
        let frames = rows.len();
        let mut codes = Vec::with_capacity(frames * NUM_STAGES);
        for r in rows {
            codes.extend_from_slice(&r);
        }
        CodeGrid {
            codes,
            frames,
            codebook_size,
        }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn get(&self, frame: usize, stage: usize) -> u16 {
        self.codes[frame * NUM_STAGES + stage]
    }

    pub fn set(&mut self, frame: usize, stage: usize, code: u16) {
        self.codes[frame * NUM_STAGES + stage] = code;
    }

    /// Codes of one stage (column), in frame order.
    pub fn stage(&self, stage: usize) -> Vec<u16> {
        (0..self.frames).map(|f| self.get(f, stage)).collect()
    }

    pub fn is_all_zero(&self) -> bool {
        self.codes.iter().all(|&c| c == 0)
    }

    pub fn raw(&self) -> &[u16] {
        &self.codes
    }
}

/// Fitted codec: per-band normalization scale plus 8 residual codebooks.
#[derive(Debug, Clone, PartialEq)]
pub struct CodecModel {
    pub frame_size: usize,
    pub hop: usize,
    pub codebook_size: usize,
    /// Per-band RMS scale over the fit corpus, floored at a fraction of the
    /// global RMS. Scale-only (no mean subtraction) so silence stays at the
    /// exact zero vector.
    pub band_scale: Array1<f64>,
    /// 8 codebooks, each (K x D); row 0 is pinned to zero.
    pub codebooks: Vec<Array2<f64>>,
    /// Mean residual energy per stage boundary measured during fit
    /// (index 0 = before quantization, index j = after stage j).
    pub fit_residual_energy: Vec<f64>,
}

/// Fit the codec on a corpus. Deterministic given the seed.
pub fn fit_codec(corpus: &[Waveform], k: usize, seed: u64) -> Result<CodecModel> {
    if corpus.is_empty() {
        return Err(Error::domain("fit_codec on empty corpus"));
    }
    if k < 2 {
        return Err(Error::domain("codebook size must be at least 2"));
    }
    if k > u16::MAX as usize + 1 {
        return Err(Error::domain("codebook size exceeds u16 code range"));
    }
    let transform = mdct::Mdct::new(FRAME_SIZE);
    let mut all = Vec::new();
    for w in corpus {
        if w.len() >= FRAME_SIZE {
            let frames = mdct::frame_signal(&w.samples, FRAME_SIZE, HOP);
            all.push(transform.forward(&frames));
        }
    }
    if all.is_empty() {
        return Err(Error::domain(
            "no waveform in corpus is at least one frame long",
        ));
    }
    let views: Vec<_> = all.iter().map(|a| a.view()).collect();
    let coeffs = ndarray::concatenate(Axis(0), &views).expect("shape");
    let d = coeffs.ncols();

    // Per-band RMS scale, floored at a fraction of the global RMS. Whitening
    // the active bands makes spectral shape (rather than raw energy) the
    // salient dimension of the first-stage codes, which the sequence models
    // need; the floor keeps near-silent high bands from being boosted into
    // noise that would waste codebook capacity and destroy round-trip SNR.
    let global_ms = coeffs.iter().map(|v| v * v).sum::<f64>() / coeffs.len().max(1) as f64;
    let floor = BAND_SCALE_FLOOR * global_ms.sqrt().max(1e-6);
    let band_ms = coeffs.map_axis(Axis(0), |col| {
        col.iter().map(|v| v * v).sum::<f64>() / col.len().max(1) as f64
    });
    let band_scale = band_ms.mapv(|ms| ms.sqrt().max(floor));
    let mut residuals = &coeffs / &band_scale;

    // Each frame is weighted by the inverse mean energy of its clip, so the
    // codebooks minimize *relative* error: quiet clips would otherwise be
    // drowned out by loud ones and reconstruct poorly.
    let mut weights = Vec::with_capacity(residuals.nrows());
    let global_floor = 0.01 * mean_energy(&residuals) / d as f64;
    for a in &all {
        let scaled = a / &band_scale;
        let clip_ms = mean_energy(&scaled) / d as f64;
        let w = 1.0 / clip_ms.max(global_floor).max(1e-12);
        weights.extend(std::iter::repeat_n(w, a.nrows()));
    }

    let mut codebooks = Vec::with_capacity(NUM_STAGES);
    let mut fit_residual_energy = Vec::with_capacity(NUM_STAGES + 1);
    fit_residual_energy.push(mean_energy(&residuals));
    for stage in 0..NUM_STAGES {
        let mut centroids =
            kmeans::kmeans_weighted(&residuals, &weights, k, seed.wrapping_add(stage as u64));
        centroids.row_mut(0).fill(0.0);
        let codes = kmeans::assign_codes(&residuals, &centroids);
        for (i, &c) in codes.iter().enumerate() {
            let c = non_expanding_code(&residuals.row(i), &centroids, c);
            let centroid = centroids.row(c).to_owned();
            let mut row = residuals.row_mut(i);
            row -= &centroid;
        }
        fit_residual_energy.push(mean_energy(&residuals));
        codebooks.push(centroids);
    }

    Ok(CodecModel {
        frame_size: FRAME_SIZE,
        hop: HOP,
        codebook_size: k,
        band_scale,
        codebooks,
        fit_residual_energy,
    })
}

fn mean_energy(m: &Array2<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.iter().map(|v| v * v).sum::<f64>() / m.nrows() as f64
}

/// Quantization must never increase a frame's residual energy; if the
/// chosen centroid would, fall back to the pinned zero code. With
/// nearest-centroid assignment this is a no-op safety net (the zero row is
/// always a candidate), but it keeps the invariant explicit.
fn non_expanding_code(
    residual: &ndarray::ArrayView1<f64>,
    centroids: &Array2<f64>,
    code: usize,
) -> usize {
    let c = centroids.row(code);
    // |r - c|^2 <= |r|^2  <=>  2 r.c >= |c|^2
    if 2.0 * residual.dot(&c) >= c.dot(&c) {
        code
    } else {
        0
    }
}

impl CodecModel {
    /// Encode a waveform to its code grid;
    /// frames = floor((n - frame_size)/hop) + 1.
    pub fn encode(&self, w: &Waveform) -> Result<CodeGrid> {
        if w.len() < self.frame_size {
            return Err(Error::domain(format!(
                "waveform of {} samples shorter than one frame ({})",
                w.len(),
                self.frame_size
            )));
        }
        let n_frames = (w.len() - self.frame_size) / self.hop + 1;
        let mut grid = CodeGrid::new(n_frames, self.codebook_size);
        self.quantize(w, |stage, f, c| grid.set(f, stage, c as u16))?;
        Ok(grid)
    }

    /// Run the full stage loop, reporting each assigned code to `on_code`
    /// as (stage, frame, code). Returns the per-frame residual energy
    /// after each stage boundary (index 0 = before quantization).
    fn quantize(
        &self,
        w: &Waveform,
        mut on_code: impl FnMut(usize, usize, usize),
    ) -> Result<Vec<Vec<f64>>> {
        let transform = mdct::Mdct::new(self.frame_size);
        let frames = mdct::frame_signal(&w.samples, self.frame_size, self.hop);
        let coeffs = transform.forward(&frames);
        let mut residuals = &coeffs / &self.band_scale;
        let per_frame =
            |m: &Array2<f64>| -> Vec<f64> { m.axis_iter(Axis(0)).map(|r| r.dot(&r)).collect() };
        let mut profile = Vec::with_capacity(NUM_STAGES + 1);
        profile.push(per_frame(&residuals));
        for stage in 0..NUM_STAGES {
            let codes = kmeans::assign_codes(&residuals, &self.codebooks[stage]);
            for (f, &c) in codes.iter().enumerate() {
                let c = non_expanding_code(&residuals.row(f), &self.codebooks[stage], c);
                on_code(stage, f, c);
                let centroid = self.codebooks[stage].row(c).to_owned();
                let mut row = residuals.row_mut(f);
                row -= &centroid;
            }
            profile.push(per_frame(&residuals));
        }
        Ok(profile)
    }

    /// Per-frame residual energy after each stage, for the monotonicity gate.
    pub fn residual_energy_profile(&self, w: &Waveform) -> Result<Vec<Vec<f64>>> {
        if w.len() < self.frame_size {
            return Err(Error::domain("waveform shorter than one frame"));
        }
        self.quantize(w, |_, _, _| {})
    }

    /// Decode a grid; output length = (frames - 1) * hop + frame_size.
    pub fn decode(&self, grid: &CodeGrid) -> Result<Waveform> {
        self.decode_stages(grid, NUM_STAGES)
    }

    /// Decode using only the first `stages` codebooks (the rest contribute
    /// nothing); `stages = 8` is the full decode.
    pub fn decode_stages(&self, grid: &CodeGrid, stages: usize) -> Result<Waveform> {
        if grid.frames() == 0 {
            return Ok(Waveform::new(Vec::new(), crate::audio::DEFAULT_SAMPLE_RATE));
        }
        let d = self.frame_size / 2;
        let mut coeffs = Array2::zeros((grid.frames(), d));
        for f in 0..grid.frames() {
            for stage in 0..stages.min(NUM_STAGES) {
                let c = grid.get(f, stage) as usize;
                if c >= self.codebook_size {
                    return Err(Error::domain(format!(
                        "code {c} out of range for codebook size {}",
                        self.codebook_size
                    )));
                }
                let centroid = self.codebooks[stage].row(c);
                let mut row = coeffs.row_mut(f);
                row += &centroid;
            }
        }
        let coeffs = &coeffs * &self.band_scale;
        let transform = mdct::Mdct::new(self.frame_size);
        let frames = transform.inverse(&coeffs);
        let samples = mdct::overlap_add(&frames, self.hop);
        Ok(Waveform::new(samples, crate::audio::DEFAULT_SAMPLE_RATE))
    }

    /// Expected code-grid frame count for a waveform of `n` samples.
    pub fn frames_for_len(&self, n: usize) -> usize {
        if n < self.frame_size {
            0
        } else {
            (n - self.frame_size) / self.hop + 1
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.to_bytes();
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CodecModel> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        CodecModel::from_bytes(&bytes)
            .map_err(|e| Error::Checkpoint(format!("codec file {path:?}: {e}")))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.write_all(MAGIC).unwrap();
        out.write_u32::<LittleEndian>(VERSION).unwrap();
        out.write_u32::<LittleEndian>(self.frame_size as u32)
            .unwrap();
        out.write_u32::<LittleEndian>(self.hop as u32).unwrap();
        out.write_u32::<LittleEndian>(self.codebook_size as u32)
            .unwrap();
        let d = self.frame_size / 2;
        out.write_u32::<LittleEndian>(d as u32).unwrap();
        for &v in self.band_scale.iter() {
            out.write_f64::<LittleEndian>(v).unwrap();
        }
        for cb in &self.codebooks {
            for &v in cb.iter() {
                out.write_f64::<LittleEndian>(v).unwrap();
            }
        }
        for &v in &self.fit_residual_energy {
            out.write_f64::<LittleEndian>(v).unwrap();
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<CodecModel> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| Error::Checkpoint("truncated codec file".into()))?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("bad codec magic header".into()));
        }
        let bad = |_| Error::Checkpoint("truncated codec file".into());
        let version = r.read_u32::<LittleEndian>().map_err(bad)?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported codec version {version}"
            )));
        }
        let frame_size = r.read_u32::<LittleEndian>().map_err(bad)? as usize;
        let hop = r.read_u32::<LittleEndian>().map_err(bad)? as usize;
        let k = r.read_u32::<LittleEndian>().map_err(bad)? as usize;
        let d = r.read_u32::<LittleEndian>().map_err(bad)? as usize;
        let mut read_f64s = |count: usize| -> Result<Vec<f64>> {
            let mut v = Vec::with_capacity(count);
            for _ in 0..count {
                v.push(
                    r.read_f64::<LittleEndian>()
                        .map_err(|_| Error::Checkpoint("truncated codec file".into()))?,
                );
            }
            Ok(v)
        };
        let band_scale = Array1::from_vec(read_f64s(d)?);
        let mut codebooks = Vec::with_capacity(NUM_STAGES);
        for _ in 0..NUM_STAGES {
            let data = read_f64s(k * d)?;
            codebooks.push(Array2::from_shape_vec((k, d), data).expect("shape"));
        }
        let fit_residual_energy = read_f64s(NUM_STAGES + 1)?;
        Ok(CodecModel {
            frame_size,
            hop,
            codebook_size: k,
            band_scale,
            codebooks,
            fit_residual_energy,
        })
    }

    /// Hash of the serialized model; manifests and checkpoints pin this.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_bytes());
        hex_string(&h.finalize())
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Signal-to-noise ratio of `rec` against `orig` in dB, skipping `skip`
/// samples at each end (MDCT edge aliasing).
pub fn snr_db(orig: &[f64], rec: &[f64], skip: usize) -> f64 {
    let n = orig.len().min(rec.len());
    if n <= 2 * skip {
        return f64::NEG_INFINITY;
    }
    let mut sig = 0.0;
    let mut err = 0.0;
    for i in skip..n - skip {
        sig += orig[i] * orig[i];
        let e = orig[i] - rec[i];
        err += e * e;
    }
    if err <= 1e-300 {
        return f64::INFINITY;
    }
    10.0 * (sig / err).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{synth_utterance, SynthSpec, Waveform};

    fn small_corpus() -> Vec<Waveform> {
        (0..6)
            .map(|i| {
                synth_utterance(&SynthSpec {
                    base_f0: 100.0 + 20.0 * i as f64,
                    duration: 1.0,
                    seed: i,
                    ..SynthSpec::default()
                })
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn shape_arithmetic() {
        let corpus = small_corpus();
        let model = fit_codec(&corpus, 64, 0).unwrap();
        let g = model.encode(&corpus[0]).unwrap();
        assert_eq!(g.frames(), 61); // 1 s at 16 kHz, frame 512 / hop 256
    }

    #[test]
    fn silence_encodes_to_zero_grid_and_decodes_to_silence() {
        let corpus = small_corpus();
        let model = fit_codec(&corpus, 64, 0).unwrap();
        let silence = Waveform::silence(1.0, 16_000);
        let g = model.encode(&silence).unwrap();
        assert!(g.is_all_zero());
        let out = model.decode(&g).unwrap();
        assert!(out.rms() < 1e-3);
    }

    #[test]
    fn silence_corpus_fits_with_zero_residuals() {
        let corpus = vec![Waveform::silence(2.0, 16_000)];
        let model = fit_codec(&corpus, 8, 0).unwrap();
        assert!(model.fit_residual_energy.iter().all(|&e| e < 1e-12));
    }

    #[test]
    fn fit_is_deterministic() {
        let corpus = small_corpus();
        let a = fit_codec(&corpus, 32, 7).unwrap();
        let b = fit_codec(&corpus, 32, 7).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
    }

    #[test]
    fn residual_energy_non_increasing_per_frame() {
        let corpus = small_corpus();
        let model = fit_codec(&corpus, 32, 0).unwrap();
        let profile = model.residual_energy_profile(&corpus[1]).unwrap();
        for stage in 1..profile.len() {
            for (f, (cur, prev)) in profile[stage].iter().zip(&profile[stage - 1]).enumerate() {
                assert!(*cur <= prev + 1e-12, "frame {f} stage {stage}");
            }
        }
    }

    #[test]
    fn encode_is_idempotent_through_decode() {
        let corpus = small_corpus();
        let model = fit_codec(&corpus, 64, 0).unwrap();
        let g1 = model.encode(&corpus[2]).unwrap();
        let rec = model.decode(&g1).unwrap();
        let g2 = model.encode(&rec).unwrap();
        // Quantizer idempotence: most frames re-encode to the same codes.
        let same = (0..g1.frames().min(g2.frames()))
            .filter(|&f| (0..NUM_STAGES).all(|s| g1.get(f, s) == g2.get(f, s)))
            .count();
        assert!(same * 10 >= g1.frames() * 8, "{same}/{}", g1.frames());
    }

    #[test]
    fn stage_truncation_hurts_snr() {
        let corpus = small_corpus();
        let model = fit_codec(&corpus, 64, 0).unwrap();
        let w = &corpus[3];
        let g = model.encode(w).unwrap();
        let full = model.decode(&g).unwrap();
        let stage1 = model.decode_stages(&g, 1).unwrap();
        let snr_full = snr_db(&w.samples, &full.samples, HOP);
        let snr_1 = snr_db(&w.samples, &stage1.samples, HOP);
        assert!(snr_full > snr_1, "full {snr_full} vs stage1 {snr_1}");
    }

    #[test]
    fn serialization_round_trip() {
        let corpus = small_corpus();
        let model = fit_codec(&corpus, 32, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("codec.bin");
        model.save(&p).unwrap();
        let loaded = CodecModel::load(&p).unwrap();
        assert_eq!(model, loaded);
        assert_eq!(model.fingerprint(), loaded.fingerprint());
    }

    #[test]
    fn decode_rejects_out_of_range_code() {
        let corpus = small_corpus();
        let model = fit_codec(&corpus, 32, 0).unwrap();
        let mut g = CodeGrid::new(4, 32);
        g.set(1, 3, 200);
        assert!(model.decode(&g).is_err());
    }

    #[test]
    fn too_short_waveform_rejected() {
        let corpus = small_corpus();
        let model = fit_codec(&corpus, 32, 0).unwrap();
        let w = Waveform::new(vec![0.0; 100], 16_000);
        assert!(model.encode(&w).is_err());
    }
}
