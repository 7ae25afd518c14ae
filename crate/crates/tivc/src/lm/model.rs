//! The encoder-decoder backbone shared by the autoregressive (stage-1) and
//! non-autoregressive (stages 2..8) models, with full manual backprop.
//!
//! Token space: one joint embedding covers text ids `[0, v_text)` followed by
//! code ids `[v_text, v_text + k)`. Two output heads exist on every model: a
//! text head (`out_text`, used by span-denoising pre-training) and a code
//! head (`out_code`, k+1 wide on the AR model where index k is EOS, k wide on
//! the NAR model). Checkpoint loading matches tensors by name, so a
//! text-pretrained checkpoint leaves the code head freshly initialized.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::CodeGrid;
use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::instructions::BOS;

use super::ops::{
    attn_bwd, attn_fwd, dropout_bwd, dropout_fwd, embed_bwd, embed_fwd, gelu_bwd, gelu_fwd,
    layernorm_bwd, layernorm_fwd, linear_bwd, linear_fwd, positional_encoding, AttnCache, AttnMask,
    AttnParams, DropoutCache, EmbedCache, GeluCache, LayerNormCache, LinearCache,
};
use super::store::{ParamId, ParamStore};

pub const NAR_STAGES: usize = 7;

/// Resolution of the AR decoder's source-relative progress embedding:
/// decoder position t maps to row (t * PROGRESS_BINS) / source_frames,
/// clamped to the table. One source length spans PROGRESS_BINS rows; the
/// table covers outputs up to the 5x source-length sampling cap.
pub const PROGRESS_BINS: usize = 16;
pub const PROGRESS_ROWS: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ar,
    Nar,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ar => "ar",
            ModelKind::Nar => "nar",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    Text,
    Code,
}

#[derive(Debug, Clone)]
pub struct SeqModel {
    pub kind: ModelKind,
    pub cfg: ModelConfig,
    /// Text vocabulary size including the reserved special ids.
    pub v_text: usize,
    /// Codebook size per stage.
    pub k: usize,
    pub store: ParamStore,
}

struct LnIds {
    g: ParamId,
    b: ParamId,
}

fn ln_ids(ps: &ParamStore, prefix: &str) -> LnIds {
    LnIds {
        g: ps.id(&format!("{prefix}.g")),
        b: ps.id(&format!("{prefix}.b")),
    }
}

struct FfnIds {
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
}

fn ffn_ids(ps: &ParamStore, prefix: &str) -> FfnIds {
    FfnIds {
        w1: ps.id(&format!("{prefix}.w1")),
        b1: ps.id(&format!("{prefix}.b1")),
        w2: ps.id(&format!("{prefix}.w2")),
        b2: ps.id(&format!("{prefix}.b2")),
    }
}

// Per-sublayer caches.
struct AttnBlockCache {
    ln: LayerNormCache,
    attn: AttnCache,
    drop: DropoutCache,
}

struct FfnBlockCache {
    ln: LayerNormCache,
    lin1: LinearCache,
    gelu: GeluCache,
    lin2: LinearCache,
    drop: DropoutCache,
}

struct EncLayerCache {
    att: AttnBlockCache,
    ffn: FfnBlockCache,
}

struct DecLayerCache {
    selfa: AttnBlockCache,
    cross: AttnBlockCache,
    ffn: FfnBlockCache,
}

pub struct ForwardCache {
    enc_embed: EmbedCache,
    enc_drop: DropoutCache,
    enc_layers: Vec<EncLayerCache>,
    enc_ln: LayerNormCache,
    enc_out: Array2<f64>,
    dec_embed: EmbedCache,
    dec_drop: DropoutCache,
    stage_row: Option<usize>,
    /// Progress-table row used at each decoder position (AR with a source).
    progress_rows: Option<Vec<usize>>,
    dec_layers: Vec<DecLayerCache>,
    dec_ln: LayerNormCache,
    head_cache: LinearCache,
    head: Head,
    dec_len: usize,
}

impl SeqModel {
    pub fn new(kind: ModelKind, cfg: &ModelConfig, v_text: usize, k: usize, seed: u64) -> SeqModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ps = ParamStore::new();
        let d = cfg.d_model;
        let v_joint = v_text + k;
        let w_scale = 1.0 / (d as f64).sqrt();
        ps.add("embed", v_joint, d, &mut rng, 0.02);
        if kind == ModelKind::Nar {
            ps.add("stage", NAR_STAGES, d, &mut rng, 0.02);
        }
        if kind == ModelKind::Ar {
            // How far through the source the decoder has advanced; output
            // length relative to the source is then a direct function of
            // this embedding rather than arithmetic over absolute positions.
            ps.add("progress", PROGRESS_ROWS, d, &mut rng, 0.02);
        }
        let add_attn = |ps: &mut ParamStore, rng: &mut ChaCha8Rng, prefix: &str| {
            for n in ["wq", "wk", "wv", "wo"] {
                ps.add(format!("{prefix}.{n}"), d, d, rng, w_scale);
            }
            for n in ["bq", "bk", "bv", "bo"] {
                ps.add_zeros(format!("{prefix}.{n}"), 1, d);
            }
        };
        let add_ln = |ps: &mut ParamStore, prefix: &str| {
            ps.add_ones(format!("{prefix}.g"), 1, d);
            ps.add_zeros(format!("{prefix}.b"), 1, d);
        };
        let add_ffn = |ps: &mut ParamStore, rng: &mut ChaCha8Rng, prefix: &str| {
            ps.add(format!("{prefix}.w1"), d, cfg.ffn_dim, rng, w_scale);
            ps.add_zeros(format!("{prefix}.b1"), 1, cfg.ffn_dim);
            ps.add(
                format!("{prefix}.w2"),
                cfg.ffn_dim,
                d,
                rng,
                1.0 / (cfg.ffn_dim as f64).sqrt(),
            );
            ps.add_zeros(format!("{prefix}.b2"), 1, d);
        };
        for l in 0..cfg.enc_layers {
            add_ln(&mut ps, &format!("enc.l{l}.ln1"));
            add_attn(&mut ps, &mut rng, &format!("enc.l{l}.att"));
            add_ln(&mut ps, &format!("enc.l{l}.ln2"));
            add_ffn(&mut ps, &mut rng, &format!("enc.l{l}.ffn"));
        }
        add_ln(&mut ps, "enc.ln");
        for l in 0..cfg.dec_layers {
            add_ln(&mut ps, &format!("dec.l{l}.ln1"));
            add_attn(&mut ps, &mut rng, &format!("dec.l{l}.self"));
            add_ln(&mut ps, &format!("dec.l{l}.ln2"));
            add_attn(&mut ps, &mut rng, &format!("dec.l{l}.cross"));
            add_ln(&mut ps, &format!("dec.l{l}.ln3"));
            add_ffn(&mut ps, &mut rng, &format!("dec.l{l}.ffn"));
        }
        add_ln(&mut ps, "dec.ln");
        // Small head init keeps the initial predictive distribution near
        // uniform (initial loss ~ ln(vocab)).
        ps.add("out_text.w", d, v_text, &mut rng, 0.01);
        ps.add_zeros("out_text.b", 1, v_text);
        let code_out = match kind {
            ModelKind::Ar => k + 1,
            ModelKind::Nar => k,
        };
        ps.add("out_code.w", d, code_out, &mut rng, 0.01);
        ps.add_zeros("out_code.b", 1, code_out);

        SeqModel {
            kind,
            cfg: cfg.clone(),
            v_text,
            k,
            store: ps,
        }
    }

    pub fn v_joint(&self) -> usize {
        self.v_text + self.k
    }

    /// EOS id in the AR code head.
    pub fn code_eos(&self) -> usize {
        self.k
    }

    pub fn code_token(&self, code: u16) -> usize {
        self.v_text + code as usize
    }

    fn max_enc_len(&self) -> usize {
        self.cfg.max_text_len + self.cfg.max_frames
    }

    fn max_dec_len(&self) -> usize {
        self.cfg.max_frames + 1
    }

    fn check_ids(&self, ids: &[usize], limit: usize, what: &str) -> Result<()> {
        if ids.is_empty() {
            return Err(Error::domain(format!("{what} sequence is empty")));
        }
        if ids.len() > limit {
            return Err(Error::domain(format!(
                "{what} length {} exceeds cap {limit}",
                ids.len()
            )));
        }
        if let Some(&bad) = ids.iter().find(|&&i| i >= self.v_joint()) {
            return Err(Error::domain(format!(
                "{what} token id {bad} outside joint vocabulary {}",
                self.v_joint()
            )));
        }
        Ok(())
    }

    fn attn_block_fwd(
        &self,
        x: &Array2<f64>,
        kv: Option<&Array2<f64>>,
        ln: &LnIds,
        attn_prefix: &str,
        mask: AttnMask,
        rng: &mut Option<&mut ChaCha8Rng>,
    ) -> (Array2<f64>, AttnBlockCache) {
        let ps = &self.store;
        let (h, ln_c) = layernorm_fwd(ps, ln.g, ln.b, x);
        let p = AttnParams::resolve(ps, attn_prefix);
        let kv_in = kv.unwrap_or(&h);
        let (a, attn_c) = attn_fwd(ps, &p, &h, kv_in, self.cfg.heads, mask);
        let (a, drop_c) = dropout_fwd(&a, self.cfg.dropout, rng.as_deref_mut());
        (
            x + &a,
            AttnBlockCache {
                ln: ln_c,
                attn: attn_c,
                drop: drop_c,
            },
        )
    }

    /// Returns (dx, d_kv) where d_kv is Some only for cross-attention.
    fn attn_block_bwd(
        &mut self,
        cache: &AttnBlockCache,
        ln_name: &str,
        attn_prefix: &str,
        cross: bool,
        dy: &Array2<f64>,
    ) -> (Array2<f64>, Option<Array2<f64>>) {
        let ln = ln_ids(&self.store, ln_name);
        let p = AttnParams::resolve(&self.store, attn_prefix);
        let da = dropout_bwd(&cache.drop, dy);
        let (dq, dkv) = attn_bwd(&mut self.store, &p, &cache.attn, &da);
        if cross {
            let dx_ln = layernorm_bwd(&mut self.store, ln.g, ln.b, &cache.ln, &dq);
            (dy + &dx_ln, Some(dkv))
        } else {
            let dh = dq + dkv;
            let dx_ln = layernorm_bwd(&mut self.store, ln.g, ln.b, &cache.ln, &dh);
            (dy + &dx_ln, None)
        }
    }

    fn ffn_block_fwd(
        &self,
        x: &Array2<f64>,
        ln: &LnIds,
        ffn_prefix: &str,
        rng: &mut Option<&mut ChaCha8Rng>,
    ) -> (Array2<f64>, FfnBlockCache) {
        let ps = &self.store;
        let ids = ffn_ids(ps, ffn_prefix);
        let (h, ln_c) = layernorm_fwd(ps, ln.g, ln.b, x);
        let (h1, lin1_c) = linear_fwd(ps, ids.w1, ids.b1, &h);
        let (h2, gelu_c) = gelu_fwd(&h1);
        let (h3, lin2_c) = linear_fwd(ps, ids.w2, ids.b2, &h2);
        let (h3, drop_c) = dropout_fwd(&h3, self.cfg.dropout, rng.as_deref_mut());
        (
            x + &h3,
            FfnBlockCache {
                ln: ln_c,
                lin1: lin1_c,
                gelu: gelu_c,
                lin2: lin2_c,
                drop: drop_c,
            },
        )
    }

    fn ffn_block_bwd(
        &mut self,
        cache: &FfnBlockCache,
        ln_name: &str,
        ffn_prefix: &str,
        dy: &Array2<f64>,
    ) -> Array2<f64> {
        let ln = ln_ids(&self.store, ln_name);
        let ids = ffn_ids(&self.store, ffn_prefix);
        let dh3 = dropout_bwd(&cache.drop, dy);
        let dh2 = linear_bwd(&mut self.store, ids.w2, ids.b2, &cache.lin2, &dh3);
        let dh1 = gelu_bwd(&cache.gelu, &dh2);
        let dh = linear_bwd(&mut self.store, ids.w1, ids.b1, &cache.lin1, &dh1);
        let dx_ln = layernorm_bwd(&mut self.store, ln.g, ln.b, &cache.ln, &dh);
        dy + &dx_ln
    }

    /// Full forward pass. `stage` (0-based row into the stage table) is only
    /// valid on the NAR model; `src_frames` (source code length backing the
    /// decoder progress embedding) only on the AR model. `rng` enables
    /// dropout (training mode).
    pub fn forward(
        &self,
        enc_ids: &[usize],
        dec_ids: &[usize],
        stage: Option<usize>,
        src_frames: Option<usize>,
        head: Head,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Array2<f64>, ForwardCache)> {
        self.check_ids(enc_ids, self.max_enc_len(), "encoder")?;
        self.check_ids(dec_ids, self.max_dec_len(), "decoder")?;
        if let Some(s) = stage {
            if self.kind != ModelKind::Nar {
                return Err(Error::config(
                    "stage embedding only exists on the NAR model",
                ));
            }
            if s >= NAR_STAGES {
                return Err(Error::domain(format!("stage row {s} out of range")));
            }
        }
        if src_frames.is_some() && self.kind != ModelKind::Ar {
            return Err(Error::config(
                "progress embedding only exists on the AR model",
            ));
        }
        if src_frames == Some(0) {
            return Err(Error::domain("progress embedding needs source frames"));
        }
        let ps = &self.store;
        let d = self.cfg.d_model;
        let embed = ps.id("embed");

        // Encoder.
        let (mut x, enc_embed) = embed_fwd(ps, embed, enc_ids);
        x += &positional_encoding(enc_ids.len(), d);
        let (mut x, enc_drop) = dropout_fwd(&x, self.cfg.dropout, rng.as_deref_mut());
        let mut enc_layers = Vec::with_capacity(self.cfg.enc_layers);
        for l in 0..self.cfg.enc_layers {
            let ln1 = ln_ids(ps, &format!("enc.l{l}.ln1"));
            let (x1, att) = self.attn_block_fwd(
                &x,
                None,
                &ln1,
                &format!("enc.l{l}.att"),
                AttnMask::Full,
                &mut rng,
            );
            let ln2 = ln_ids(ps, &format!("enc.l{l}.ln2"));
            let (x2, ffn) = self.ffn_block_fwd(&x1, &ln2, &format!("enc.l{l}.ffn"), &mut rng);
            x = x2;
            enc_layers.push(EncLayerCache { att, ffn });
        }
        let enc_ln_ids = ln_ids(ps, "enc.ln");
        let (enc_out, enc_ln) = layernorm_fwd(ps, enc_ln_ids.g, enc_ln_ids.b, &x);

        // Decoder.
        let (mut y, dec_embed) = embed_fwd(ps, embed, dec_ids);
        y += &positional_encoding(dec_ids.len(), d);
        if let Some(s) = stage {
            let stage_table = ps.get(ps.id("stage"));
            let row = stage_table.row(s);
            for mut r in y.rows_mut() {
                r += &row;
            }
        }
        let progress_rows = src_frames.map(|n| {
            let table = ps.get(ps.id("progress"));
            let rows: Vec<usize> = (0..dec_ids.len())
                .map(|t| ((t * PROGRESS_BINS) / n).min(PROGRESS_ROWS - 1))
                .collect();
            for (t, mut r) in y.rows_mut().into_iter().enumerate() {
                r += &table.row(rows[t]);
            }
            rows
        });
        let (mut y, dec_drop) = dropout_fwd(&y, self.cfg.dropout, rng.as_deref_mut());
        let self_mask = match self.kind {
            ModelKind::Ar => AttnMask::Causal,
            ModelKind::Nar => AttnMask::Full,
        };
        let mut dec_layers = Vec::with_capacity(self.cfg.dec_layers);
        for l in 0..self.cfg.dec_layers {
            let ln1 = ln_ids(ps, &format!("dec.l{l}.ln1"));
            let (y1, selfa) = self.attn_block_fwd(
                &y,
                None,
                &ln1,
                &format!("dec.l{l}.self"),
                self_mask,
                &mut rng,
            );
            let ln2 = ln_ids(ps, &format!("dec.l{l}.ln2"));
            let (y2, cross) = self.attn_block_fwd(
                &y1,
                Some(&enc_out),
                &ln2,
                &format!("dec.l{l}.cross"),
                AttnMask::Full,
                &mut rng,
            );
            let ln3 = ln_ids(ps, &format!("dec.l{l}.ln3"));
            let (y3, ffn) = self.ffn_block_fwd(&y2, &ln3, &format!("dec.l{l}.ffn"), &mut rng);
            y = y3;
            dec_layers.push(DecLayerCache { selfa, cross, ffn });
        }
        let dec_ln_ids = ln_ids(ps, "dec.ln");
        let (yn, dec_ln) = layernorm_fwd(ps, dec_ln_ids.g, dec_ln_ids.b, &y);
        let (hw, hb) = match head {
            Head::Text => (ps.id("out_text.w"), ps.id("out_text.b")),
            Head::Code => (ps.id("out_code.w"), ps.id("out_code.b")),
        };
        let (logits, head_cache) = linear_fwd(ps, hw, hb, &yn);

        Ok((
            logits,
            ForwardCache {
                enc_embed,
                enc_drop,
                enc_layers,
                enc_ln,
                enc_out,
                dec_embed,
                dec_drop,
                stage_row: stage,
                progress_rows,
                dec_layers,
                dec_ln,
                head_cache,
                head,
                dec_len: dec_ids.len(),
            },
        ))
    }

    /// Backward pass from d(logits); accumulates into the store's gradients.
    pub fn backward(&mut self, cache: &ForwardCache, dlogits: &Array2<f64>) {
        let (hw, hb) = match cache.head {
            Head::Text => (self.store.id("out_text.w"), self.store.id("out_text.b")),
            Head::Code => (self.store.id("out_code.w"), self.store.id("out_code.b")),
        };
        let dyn_ = linear_bwd(&mut self.store, hw, hb, &cache.head_cache, dlogits);
        let dec_ln = ln_ids(&self.store, "dec.ln");
        let mut dy = layernorm_bwd(&mut self.store, dec_ln.g, dec_ln.b, &cache.dec_ln, &dyn_);

        let mut d_enc_out: Array2<f64> = Array2::zeros(cache.enc_out.raw_dim());
        for l in (0..self.cfg.dec_layers).rev() {
            let lc = &cache.dec_layers[l];
            dy = self.ffn_block_bwd(
                &lc.ffn,
                &format!("dec.l{l}.ln3"),
                &format!("dec.l{l}.ffn"),
                &dy,
            );
            let (dy2, dkv) = self.attn_block_bwd(
                &lc.cross,
                &format!("dec.l{l}.ln2"),
                &format!("dec.l{l}.cross"),
                true,
                &dy,
            );
            d_enc_out += &dkv.unwrap();
            let (dy1, _) = self.attn_block_bwd(
                &lc.selfa,
                &format!("dec.l{l}.ln1"),
                &format!("dec.l{l}.self"),
                false,
                &dy2,
            );
            dy = dy1;
        }
        let dy = dropout_bwd(&cache.dec_drop, &dy);
        if let Some(rows) = &cache.progress_rows {
            let progress = self.store.id("progress");
            let g = self.store.grad_mut(progress);
            for (t, &r) in rows.iter().enumerate() {
                let mut row = g.row_mut(r);
                row += &dy.row(t);
            }
        }
        if let Some(s) = cache.stage_row {
            let total = dy.sum_axis(ndarray::Axis(0));
            let stage = self.store.id("stage");
            let g = self.store.grad_mut(stage);
            let mut row = g.row_mut(s);
            row += &total;
        }
        let embed = self.store.id("embed");
        embed_bwd(&mut self.store, embed, &cache.dec_embed, &dy);

        // Encoder backward.
        let enc_ln = ln_ids(&self.store, "enc.ln");
        let mut dx = layernorm_bwd(
            &mut self.store,
            enc_ln.g,
            enc_ln.b,
            &cache.enc_ln,
            &d_enc_out,
        );
        for l in (0..self.cfg.enc_layers).rev() {
            let lc = &cache.enc_layers[l];
            dx = self.ffn_block_bwd(
                &lc.ffn,
                &format!("enc.l{l}.ln2"),
                &format!("enc.l{l}.ffn"),
                &dx,
            );
            let (dx1, _) = self.attn_block_bwd(
                &lc.att,
                &format!("enc.l{l}.ln1"),
                &format!("enc.l{l}.att"),
                false,
                &dx,
            );
            dx = dx1;
        }
        let dx = dropout_bwd(&cache.enc_drop, &dx);
        embed_bwd(&mut self.store, embed, &cache.enc_embed, &dx);
        debug_assert_eq!(dlogits.nrows(), cache.dec_len);
    }

    // ------------------------------------------------------ task plumbing ---

    /// Encoder ids for conversion: instruction tokens then stage codes.
    pub fn vc_enc_ids(&self, z: &[u32], cx_stage: &[u16]) -> Vec<usize> {
        let mut ids: Vec<usize> = z.iter().map(|&t| t as usize).collect();
        ids.extend(cx_stage.iter().map(|&c| self.code_token(c)));
        ids
    }

    /// Decoder input: BOS then the code prefix.
    pub fn dec_ids_from_codes(&self, prefix: &[u16]) -> Vec<usize> {
        let mut ids = Vec::with_capacity(prefix.len() + 1);
        ids.push(BOS as usize);
        ids.extend(prefix.iter().map(|&c| self.code_token(c)));
        ids
    }

    /// AR teacher-forced forward: logits (len(cy1)+1) × (k+1).
    pub fn ar_forward(
        &self,
        z: &[u32],
        cx1: &[u16],
        cy1_prefix: &[u16],
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Array2<f64>, ForwardCache)> {
        if self.kind != ModelKind::Ar {
            return Err(Error::config("ar_forward called on a NAR model"));
        }
        let enc = self.vc_enc_ids(z, cx1);
        let dec = self.dec_ids_from_codes(cy1_prefix);
        self.forward(&enc, &dec, None, Some(cx1.len().max(1)), Head::Code, rng)
    }

    /// NAR forward for stage `j` in [2, 8]: logits len(cy_prev) × k.
    pub fn nar_forward(
        &self,
        z: &[u32],
        cxj: &[u16],
        cy_prev: &[u16],
        j: usize,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Array2<f64>, ForwardCache)> {
        if self.kind != ModelKind::Nar {
            return Err(Error::config("nar_forward called on an AR model"));
        }
        if !(2..=8).contains(&j) {
            return Err(Error::domain(format!("NAR stage {j} outside [2, 8]")));
        }
        if cy_prev.is_empty() {
            return Err(Error::domain("NAR needs a non-empty previous stage"));
        }
        let enc = self.vc_enc_ids(z, cxj);
        let dec: Vec<usize> = cy_prev.iter().map(|&c| self.code_token(c)).collect();
        self.forward(&enc, &dec, Some(j - 2), None, Head::Code, rng)
    }

    /// Fill stages 2..8 of `grid` from its stage-1 row using argmax (or
    /// multinomial when `temperature` is Some).
    pub fn nar_fill(
        &self,
        z: &[u32],
        cx: &CodeGrid,
        grid: &mut CodeGrid,
        temperature: Option<(f64, &mut ChaCha8Rng)>,
    ) -> Result<()> {
        let mut temp = temperature;
        for j in 2..=8usize {
            let cxj = cx.stage(j - 1);
            let prev: Vec<u16> = grid.stage(j - 2);
            let (logits, _) = self.nar_forward(z, &cxj, &prev, j, None)?;
            for t in 0..logits.nrows() {
                let row = logits.row(t);
                let pick = match &mut temp {
                    Some((tau, rng)) => super::sample::multinomial_row(&row, *tau, rng),
                    None => {
                        let mut best = 0usize;
                        let mut bv = f64::NEG_INFINITY;
                        for (i, &v) in row.iter().enumerate() {
                            if v > bv {
                                bv = v;
                                best = i;
                            }
                        }
                        best
                    }
                };
                grid.set(t, j - 1, pick as u16);
            }
        }
        Ok(())
    }
}
