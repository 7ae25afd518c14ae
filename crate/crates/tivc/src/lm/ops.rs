//! Differentiable building blocks. Each op returns its output plus a cache;
//! the matching backward consumes the cache, accumulates parameter gradients
//! into the store, and returns input gradients. Everything is f64 so the
//! finite-difference oracle in the tests can use tight tolerances.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::store::{ParamId, ParamStore};

// ---------------------------------------------------------------- linear ---

pub struct LinearCache {
    x: Array2<f64>,
}

/// y = x · W + b, with W: (in × out) and b: (1 × out).
pub fn linear_fwd(
    ps: &ParamStore,
    w: ParamId,
    b: ParamId,
    x: &Array2<f64>,
) -> (Array2<f64>, LinearCache) {
    let y = x.dot(ps.get(w)) + ps.get(b);
    (y, LinearCache { x: x.clone() })
}

pub fn linear_bwd(
    ps: &mut ParamStore,
    w: ParamId,
    b: ParamId,
    cache: &LinearCache,
    dy: &Array2<f64>,
) -> Array2<f64> {
    let dw = cache.x.t().dot(dy);
    let db = dy.sum_axis(Axis(0)).insert_axis(Axis(0));
    *ps.grad_mut(w) += &dw;
    *ps.grad_mut(b) += &db;
    dy.dot(&ps.get(w).t())
}

// ------------------------------------------------------------- layernorm ---

pub struct LayerNormCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
}

const LN_EPS: f64 = 1e-5;

/// Row-wise layer normalization with gain g and bias b (both 1 × d).
pub fn layernorm_fwd(
    ps: &ParamStore,
    g: ParamId,
    b: ParamId,
    x: &Array2<f64>,
) -> (Array2<f64>, LayerNormCache) {
    let d = x.ncols() as f64;
    let mean = x.mean_axis(Axis(1)).unwrap();
    let mut xhat = x.clone();
    let mut inv_std = Array1::zeros(x.nrows());
    for (i, mut row) in xhat.rows_mut().into_iter().enumerate() {
        row.mapv_inplace(|v| v - mean[i]);
        let var = row.iter().map(|v| v * v).sum::<f64>() / d;
        let is = 1.0 / (var + LN_EPS).sqrt();
        inv_std[i] = is;
        row.mapv_inplace(|v| v * is);
    }
    let y = &xhat * ps.get(g) + ps.get(b);
    (y, LayerNormCache { xhat, inv_std })
}

pub fn layernorm_bwd(
    ps: &mut ParamStore,
    g: ParamId,
    b: ParamId,
    cache: &LayerNormCache,
    dy: &Array2<f64>,
) -> Array2<f64> {
    let d = dy.ncols() as f64;
    let dg = (dy * &cache.xhat).sum_axis(Axis(0)).insert_axis(Axis(0));
    let db = dy.sum_axis(Axis(0)).insert_axis(Axis(0));
    let gain = ps.get(g).clone();
    let dxhat = dy * &gain;
    // dx = inv_std * (dxhat - mean(dxhat) - xhat * mean(dxhat * xhat))
    let mut dx = dxhat.clone();
    for (i, mut row) in dx.rows_mut().into_iter().enumerate() {
        let drow = dxhat.row(i);
        let xrow = cache.xhat.row(i);
        let m1 = drow.sum() / d;
        let m2 = drow
            .iter()
            .zip(xrow.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / d;
        for (j, v) in row.iter_mut().enumerate() {
            *v = cache.inv_std[i] * (drow[j] - m1 - xrow[j] * m2);
        }
    }
    *ps.grad_mut(g) += &dg;
    *ps.grad_mut(b) += &db;
    dx
}

// ------------------------------------------------------------------ gelu ---

pub struct GeluCache {
    x: Array2<f64>,
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044715;

fn gelu_scalar(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_grad_scalar(x: f64) -> f64 {
    let u = GELU_C * (x + GELU_A * x * x * x);
    let t = u.tanh();
    let sech2 = 1.0 - t * t;
    0.5 * (1.0 + t) + 0.5 * x * sech2 * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

pub fn gelu_fwd(x: &Array2<f64>) -> (Array2<f64>, GeluCache) {
    (x.mapv(gelu_scalar), GeluCache { x: x.clone() })
}

pub fn gelu_bwd(cache: &GeluCache, dy: &Array2<f64>) -> Array2<f64> {
    dy * &cache.x.mapv(gelu_grad_scalar)
}

// --------------------------------------------------------------- dropout ---

pub struct DropoutCache {
    mask: Option<Array2<f64>>,
}

/// Inverted dropout; `rng = None` (evaluation) is the identity.
pub fn dropout_fwd(
    x: &Array2<f64>,
    p: f64,
    rng: Option<&mut ChaCha8Rng>,
) -> (Array2<f64>, DropoutCache) {
    match rng {
        Some(rng) if p > 0.0 => {
            let keep = 1.0 - p;
            let mask = Array2::from_shape_fn(x.raw_dim(), |_| {
                if rng.gen_bool(keep) {
                    1.0 / keep
                } else {
                    0.0
                }
            });
            (x * &mask, DropoutCache { mask: Some(mask) })
        }
        _ => (x.clone(), DropoutCache { mask: None }),
    }
}

pub fn dropout_bwd(cache: &DropoutCache, dy: &Array2<f64>) -> Array2<f64> {
    match &cache.mask {
        Some(m) => dy * m,
        None => dy.clone(),
    }
}

// ------------------------------------------------------------- attention ---

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttnMask {
    Full,
    Causal,
}

pub struct AttnCache {
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    /// Softmax weights, one (Lq × Lk) matrix per head.
    probs: Vec<Array2<f64>>,
    cat: Array2<f64>,
    xq: LinearCache,
    xkv: LinearCache,
    heads: usize,
}

pub struct AttnParams {
    pub wq: ParamId,
    pub bq: ParamId,
    pub wk: ParamId,
    pub bk: ParamId,
    pub wv: ParamId,
    pub bv: ParamId,
    pub wo: ParamId,
    pub bo: ParamId,
}

impl AttnParams {
    pub fn resolve(ps: &ParamStore, prefix: &str) -> AttnParams {
        AttnParams {
            wq: ps.id(&format!("{prefix}.wq")),
            bq: ps.id(&format!("{prefix}.bq")),
            wk: ps.id(&format!("{prefix}.wk")),
            bk: ps.id(&format!("{prefix}.bk")),
            wv: ps.id(&format!("{prefix}.wv")),
            bv: ps.id(&format!("{prefix}.bv")),
            wo: ps.id(&format!("{prefix}.wo")),
            bo: ps.id(&format!("{prefix}.bo")),
        }
    }
}

/// Multi-head scaled dot-product attention. Queries come from `xq`
/// (Lq × d), keys/values from `xkv` (Lk × d); masking is exact (-inf before
/// softmax, implemented by skipping masked keys entirely).
pub fn attn_fwd(
    ps: &ParamStore,
    p: &AttnParams,
    xq: &Array2<f64>,
    xkv: &Array2<f64>,
    heads: usize,
    mask: AttnMask,
) -> (Array2<f64>, AttnCache) {
    let d = xq.ncols();
    assert_eq!(d % heads, 0);
    let dh = d / heads;
    let q = xq.dot(ps.get(p.wq)) + ps.get(p.bq);
    let k = xkv.dot(ps.get(p.wk)) + ps.get(p.bk);
    let v = xkv.dot(ps.get(p.wv)) + ps.get(p.bv);
    let (lq, lk) = (q.nrows(), k.nrows());
    let scale = 1.0 / (dh as f64).sqrt();

    let mut cat = Array2::zeros((lq, d));
    let mut probs = Vec::with_capacity(heads);
    for h in 0..heads {
        let qs = q.slice(ndarray::s![.., h * dh..(h + 1) * dh]);
        let ks = k.slice(ndarray::s![.., h * dh..(h + 1) * dh]);
        let vs = v.slice(ndarray::s![.., h * dh..(h + 1) * dh]);
        let mut scores = qs.dot(&ks.t());
        scores.mapv_inplace(|s| s * scale);
        let mut pmat = Array2::zeros((lq, lk));
        for i in 0..lq {
            let limit = match mask {
                AttnMask::Full => lk,
                AttnMask::Causal => (i + 1).min(lk),
            };
            let row = scores.row(i);
            let max = row
                .iter()
                .take(limit)
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            let mut denom = 0.0;
            for j in 0..limit {
                let e = (row[j] - max).exp();
                pmat[[i, j]] = e;
                denom += e;
            }
            for j in 0..limit {
                pmat[[i, j]] /= denom;
            }
        }
        let out = pmat.dot(&vs);
        cat.slice_mut(ndarray::s![.., h * dh..(h + 1) * dh])
            .assign(&out);
        probs.push(pmat);
    }
    let y = cat.dot(ps.get(p.wo)) + ps.get(p.bo);
    let cache = AttnCache {
        q,
        k,
        v,
        probs,
        cat,
        xq: LinearCache { x: xq.clone() },
        xkv: LinearCache { x: xkv.clone() },
        heads,
    };
    (y, cache)
}

/// Returns (dxq, dxkv); caller adds them into the residual stream. For
/// self-attention the two gradients refer to the same input and must be
/// summed.
pub fn attn_bwd(
    ps: &mut ParamStore,
    p: &AttnParams,
    cache: &AttnCache,
    dy: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>) {
    let d = cache.q.ncols();
    let heads = cache.heads;
    let dh = d / heads;
    let scale = 1.0 / (dh as f64).sqrt();

    // Output projection.
    let dwo = cache.cat.t().dot(dy);
    let dbo = dy.sum_axis(Axis(0)).insert_axis(Axis(0));
    let dcat = dy.dot(&ps.get(p.wo).t());
    *ps.grad_mut(p.wo) += &dwo;
    *ps.grad_mut(p.bo) += &dbo;

    let mut dq = Array2::zeros(cache.q.raw_dim());
    let mut dk = Array2::zeros(cache.k.raw_dim());
    let mut dv = Array2::zeros(cache.v.raw_dim());
    for h in 0..heads {
        let cols = ndarray::s![.., h * dh..(h + 1) * dh];
        let qs = cache.q.slice(cols);
        let ks = cache.k.slice(cols);
        let vs = cache.v.slice(cols);
        let pmat = &cache.probs[h];
        let dout = dcat.slice(cols);

        let dp = dout.dot(&vs.t());
        dv.slice_mut(cols).assign(&pmat.t().dot(&dout));
        // Softmax backward per row; masked entries have p = 0 so they drop
        // out of both terms automatically.
        let mut dscores = Array2::zeros(pmat.raw_dim());
        for i in 0..pmat.nrows() {
            let prow = pmat.row(i);
            let drow = dp.row(i);
            let dot = prow
                .iter()
                .zip(drow.iter())
                .map(|(a, b)| a * b)
                .sum::<f64>();
            for j in 0..pmat.ncols() {
                dscores[[i, j]] = prow[j] * (drow[j] - dot) * scale;
            }
        }
        dq.slice_mut(cols).assign(&dscores.dot(&ks));
        dk.slice_mut(cols).assign(&dscores.t().dot(&qs));
    }

    let dwq = cache.xq.x.t().dot(&dq);
    let dwk = cache.xkv.x.t().dot(&dk);
    let dwv = cache.xkv.x.t().dot(&dv);
    *ps.grad_mut(p.wq) += &dwq;
    *ps.grad_mut(p.wk) += &dwk;
    *ps.grad_mut(p.wv) += &dwv;
    *ps.grad_mut(p.bq) += &dq.sum_axis(Axis(0)).insert_axis(Axis(0));
    *ps.grad_mut(p.bk) += &dk.sum_axis(Axis(0)).insert_axis(Axis(0));
    *ps.grad_mut(p.bv) += &dv.sum_axis(Axis(0)).insert_axis(Axis(0));

    let dxq = dq.dot(&ps.get(p.wq).t());
    let dxkv = dk.dot(&ps.get(p.wk).t()) + dv.dot(&ps.get(p.wv).t());
    (dxq, dxkv)
}

// ------------------------------------------------------------- embedding ---

pub struct EmbedCache {
    ids: Vec<usize>,
}

pub fn embed_fwd(ps: &ParamStore, table: ParamId, ids: &[usize]) -> (Array2<f64>, EmbedCache) {
    let t = ps.get(table);
    let mut y = Array2::zeros((ids.len(), t.ncols()));
    for (i, &id) in ids.iter().enumerate() {
        y.row_mut(i).assign(&t.row(id));
    }
    (y, EmbedCache { ids: ids.to_vec() })
}

pub fn embed_bwd(ps: &mut ParamStore, table: ParamId, cache: &EmbedCache, dy: &Array2<f64>) {
    let g = ps.grad_mut(table);
    for (i, &id) in cache.ids.iter().enumerate() {
        let mut row = g.row_mut(id);
        row += &dy.row(i);
    }
}

// -------------------------------------------------- softmax cross-entropy ---

/// Mean cross-entropy over rows and its gradient w.r.t. the logits.
/// Rows whose target is `usize::MAX` are ignored (padding).
pub fn softmax_xent(logits: &Array2<f64>, targets: &[usize]) -> (f64, Array2<f64>) {
    assert_eq!(logits.nrows(), targets.len());
    let mut dlogits = Array2::zeros(logits.raw_dim());
    let mut loss = 0.0;
    let mut count = 0usize;
    for (i, &t) in targets.iter().enumerate() {
        if t == usize::MAX {
            continue;
        }
        count += 1;
        let row = logits.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = row.iter().map(|&v| (v - max).exp()).sum();
        let log_denom = denom.ln() + max;
        loss += log_denom - row[t];
        for j in 0..row.len() {
            dlogits[[i, j]] = (row[j] - max).exp() / denom;
        }
        dlogits[[i, t]] -= 1.0;
    }
    let n = count.max(1) as f64;
    dlogits.mapv_inplace(|v| v / n);
    (loss / n, dlogits)
}

/// Cross-entropy with per-row weights (padding rows = usize::MAX are
/// skipped). Weights are renormalized to mean 1 over counted rows, so the
/// loss scale matches the unweighted version and only the *relative*
/// emphasis changes.
pub fn softmax_xent_weighted(
    logits: &Array2<f64>,
    targets: &[usize],
    weights: &[f64],
) -> (f64, Array2<f64>) {
    assert_eq!(logits.nrows(), targets.len());
    assert_eq!(weights.len(), targets.len());
    let wsum: f64 = targets
        .iter()
        .zip(weights)
        .filter(|(&t, _)| t != usize::MAX)
        .map(|(_, &w)| w)
        .sum();
    let mut dlogits = Array2::zeros(logits.raw_dim());
    let mut loss = 0.0;
    for (i, &t) in targets.iter().enumerate() {
        if t == usize::MAX {
            continue;
        }
        let w = weights[i];
        let row = logits.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = row.iter().map(|&v| (v - max).exp()).sum();
        let log_denom = denom.ln() + max;
        loss += w * (log_denom - row[t]);
        for j in 0..row.len() {
            dlogits[[i, j]] = w * (row[j] - max).exp() / denom;
        }
        dlogits[[i, t]] -= w;
    }
    let n = wsum.max(1e-12);
    dlogits.mapv_inplace(|v| v / n);
    (loss / n, dlogits)
}

/// Row-wise softmax (inference helper).
pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    out
}

/// Sinusoidal position encodings (len × d), fixed, never trained.
pub fn positional_encoding(len: usize, d: usize) -> Array2<f64> {
    let mut pe = Array2::zeros((len, d));
    for pos in 0..len {
        for i in 0..d / 2 {
            let freq = 1.0 / 10000f64.powf(2.0 * i as f64 / d as f64);
            pe[[pos, 2 * i]] = (pos as f64 * freq).sin();
            pe[[pos, 2 * i + 1]] = (pos as f64 * freq).cos();
        }
    }
    pe
}
