//! Primitive layer operations, each as an explicit forward/backward pair.
//! Forward returns the activation cache its backward needs; backward
//! accumulates parameter gradients into a mirror [`ModelParams`] structure
//! and returns the gradient with respect to the input.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::{Attention, FeedForward, LayerNorm, Linear};

pub const LN_EPS: f64 = 1e-5;

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

pub struct LinearCache {
    x: Array2<f64>,
}

pub fn linear_fwd(lin: &Linear, x: &Array2<f64>) -> (Array2<f64>, LinearCache) {
    let y = x.dot(&lin.w) + &lin.b;
    (y, LinearCache { x: x.clone() })
}

pub fn linear_bwd(
    lin: &Linear,
    cache: &LinearCache,
    dy: &Array2<f64>,
    grad: &mut Linear,
) -> Array2<f64> {
    grad.w += &cache.x.t().dot(dy);
    grad.b += &dy.sum_axis(Axis(0));
    dy.dot(&lin.w.t())
}

// ---------------------------------------------------------------------------
// Layer norm (rows normalized over the feature axis)
// ---------------------------------------------------------------------------

pub struct LayerNormCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
}

pub fn layernorm_fwd(ln: &LayerNorm, x: &Array2<f64>) -> (Array2<f64>, LayerNormCache) {
    let d = x.ncols() as f64;
    let mean = x.mean_axis(Axis(1)).expect("non-empty rows");
    let centered = x - &mean.view().insert_axis(Axis(1));
    let var = centered.mapv(|v| v * v).mean_axis(Axis(1)).expect("non-empty rows");
    let inv_std = var.mapv(|v| 1.0 / (v + LN_EPS).sqrt());
    let xhat = &centered * &inv_std.view().insert_axis(Axis(1));
    let y = &xhat * &ln.g + &ln.b;
    let _ = d;
    (y, LayerNormCache { xhat, inv_std })
}

pub fn layernorm_bwd(
    ln: &LayerNorm,
    cache: &LayerNormCache,
    dy: &Array2<f64>,
    grad: &mut LayerNorm,
) -> Array2<f64> {
    let d = dy.ncols() as f64;
    grad.g += &(dy * &cache.xhat).sum_axis(Axis(0));
    grad.b += &dy.sum_axis(Axis(0));
    let dxhat = dy * &ln.g;
    let mean_dxhat = dxhat.mean_axis(Axis(1)).expect("non-empty rows");
    let mean_dxhat_xhat =
        (&dxhat * &cache.xhat).mean_axis(Axis(1)).expect("non-empty rows");
    let _ = d;
    let term = &dxhat
        - &mean_dxhat.view().insert_axis(Axis(1))
        - &(&cache.xhat * &mean_dxhat_xhat.view().insert_axis(Axis(1)));
    term * &cache.inv_std.view().insert_axis(Axis(1))
}

// ---------------------------------------------------------------------------
// GELU (tanh approximation)
// ---------------------------------------------------------------------------

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044715;

pub struct GeluCache {
    x: Array2<f64>,
}

pub fn gelu_fwd(x: &Array2<f64>) -> (Array2<f64>, GeluCache) {
    let y = x.mapv(|v| 0.5 * v * (1.0 + (GELU_C * (v + GELU_A * v * v * v)).tanh()));
    (y, GeluCache { x: x.clone() })
}

pub fn gelu_bwd(cache: &GeluCache, dy: &Array2<f64>) -> Array2<f64> {
    let dgelu = cache.x.mapv(|v| {
        let t = (GELU_C * (v + GELU_A * v * v * v)).tanh();
        0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * v * v)
    });
    dy * &dgelu
}

// ---------------------------------------------------------------------------
// Multi-head attention
// ---------------------------------------------------------------------------

pub struct AttnCache {
    xq: Array2<f64>,
    xkv: Array2<f64>,
    q: Array2<f64>,
    k: Array2<f64>,
    v: Array2<f64>,
    /// Softmax probabilities per head: [heads] of [Lq, Lk].
    probs: Vec<Array2<f64>>,
    concat: Array2<f64>,
}

/// Multi-head scaled dot-product attention. Queries come from `xq`, keys and
/// values from `xkv` (the same array for self-attention). `key_mask[j]` false
/// blocks key j for every query; `causal` additionally blocks keys j > i for
/// query i (meaningful only when `xq` and `xkv` index the same positions).
pub fn attention_fwd(
    attn: &Attention,
    n_heads: usize,
    xq: &Array2<f64>,
    xkv: &Array2<f64>,
    key_mask: &[bool],
    causal: bool,
) -> (Array2<f64>, AttnCache) {
    let d = xq.ncols();
    let dh = d / n_heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let q = xq.dot(&attn.q.w) + &attn.q.b;
    let k = xkv.dot(&attn.k.w) + &attn.k.b;
    let v = xkv.dot(&attn.v.w) + &attn.v.b;

    let lq = xq.nrows();
    let mut concat = Array2::zeros((lq, d));
    let mut probs = Vec::with_capacity(n_heads);
    for h in 0..n_heads {
        let cols = h * dh..(h + 1) * dh;
        let qh = q.slice(ndarray::s![.., cols.clone()]);
        let kh = k.slice(ndarray::s![.., cols.clone()]);
        let vh = v.slice(ndarray::s![.., cols.clone()]);
        let mut scores = qh.dot(&kh.t());
        scores *= scale;
        for ((i, j), s) in scores.indexed_iter_mut() {
            if !key_mask[j] || (causal && j > i) {
                *s = f64::NEG_INFINITY;
            }
        }
        let p = softmax_rows(&scores);
        concat.slice_mut(ndarray::s![.., cols]).assign(&p.dot(&vh));
        probs.push(p);
    }
    let out = concat.dot(&attn.o.w) + &attn.o.b;
    let cache = AttnCache { xq: xq.clone(), xkv: xkv.clone(), q, k, v, probs, concat };
    (out, cache)
}

/// Backward of [`attention_fwd`]; returns (d_xq, d_xkv). For self-attention
/// the caller adds them together.
pub fn attention_bwd(
    attn: &Attention,
    n_heads: usize,
    cache: &AttnCache,
    dy: &Array2<f64>,
    grad: &mut Attention,
) -> (Array2<f64>, Array2<f64>) {
    let d = cache.xq.ncols();
    let dh = d / n_heads;
    let scale = 1.0 / (dh as f64).sqrt();

    // Output projection.
    grad.o.w += &cache.concat.t().dot(dy);
    grad.o.b += &dy.sum_axis(Axis(0));
    let dconcat = dy.dot(&attn.o.w.t());

    let mut dq = Array2::zeros(cache.q.raw_dim());
    let mut dk = Array2::zeros(cache.k.raw_dim());
    let mut dv = Array2::zeros(cache.v.raw_dim());
    for h in 0..n_heads {
        let cols = h * dh..(h + 1) * dh;
        let p = &cache.probs[h];
        let do_h = dconcat.slice(ndarray::s![.., cols.clone()]);
        let vh = cache.v.slice(ndarray::s![.., cols.clone()]);
        let kh = cache.k.slice(ndarray::s![.., cols.clone()]);
        let qh = cache.q.slice(ndarray::s![.., cols.clone()]);

        let dp = do_h.dot(&vh.t());
        dv.slice_mut(ndarray::s![.., cols.clone()]).assign(&p.t().dot(&do_h));
        // Softmax backward per row; masked entries have p = 0 so ds = 0.
        let row_dot = (&dp * p).sum_axis(Axis(1));
        let ds = p * &(&dp - &row_dot.view().insert_axis(Axis(1)));
        dq.slice_mut(ndarray::s![.., cols.clone()]).assign(&(ds.dot(&kh) * scale));
        dk.slice_mut(ndarray::s![.., cols]).assign(&(ds.t().dot(&qh) * scale));
    }

    grad.q.w += &cache.xq.t().dot(&dq);
    grad.q.b += &dq.sum_axis(Axis(0));
    grad.k.w += &cache.xkv.t().dot(&dk);
    grad.k.b += &dk.sum_axis(Axis(0));
    grad.v.w += &cache.xkv.t().dot(&dv);
    grad.v.b += &dv.sum_axis(Axis(0));

    let dxq = dq.dot(&attn.q.w.t());
    let dxkv = dk.dot(&attn.k.w.t()) + dv.dot(&attn.v.w.t());
    (dxq, dxkv)
}

pub fn softmax_rows(scores: &Array2<f64>) -> Array2<f64> {
    let mut out = scores.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            row.fill(0.0);
            continue;
        }
        row.mapv_inplace(|v| (v - max).exp());
        let sum: f64 = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

// ---------------------------------------------------------------------------
// Feed-forward block
// ---------------------------------------------------------------------------

pub struct FfnCache {
    lin1: LinearCache,
    gelu: GeluCache,
    lin2: LinearCache,
}

pub fn ffn_fwd(ffn: &FeedForward, x: &Array2<f64>) -> (Array2<f64>, FfnCache) {
    let (h, lin1) = linear_fwd(&ffn.w1, x);
    let (a, gelu) = gelu_fwd(&h);
    let (y, lin2) = linear_fwd(&ffn.w2, &a);
    (y, FfnCache { lin1, gelu, lin2 })
}

pub fn ffn_bwd(
    ffn: &FeedForward,
    cache: &FfnCache,
    dy: &Array2<f64>,
    grad: &mut FeedForward,
) -> Array2<f64> {
    let da = linear_bwd(&ffn.w2, &cache.lin2, dy, &mut grad.w2);
    let dh = gelu_bwd(&cache.gelu, &da);
    linear_bwd(&ffn.w1, &cache.lin1, &dh, &mut grad.w1)
}

// ---------------------------------------------------------------------------
// Dropout (inverted scaling; identity when inactive)
// ---------------------------------------------------------------------------

pub struct DropoutCache {
    mask: Option<Array2<f64>>,
}

pub fn dropout_fwd(
    x: Array2<f64>,
    p: f64,
    rng: Option<&mut ChaCha8Rng>,
) -> (Array2<f64>, DropoutCache) {
    let Some(rng) = rng else {
        return (x, DropoutCache { mask: None });
    };
    if p == 0.0 {
        return (x, DropoutCache { mask: None });
    }
    let keep = 1.0 - p;
    let mask = Array2::from_shape_fn(x.raw_dim(), |_| {
        if rng.gen::<f64>() < keep {
            1.0 / keep
        } else {
            0.0
        }
    });
    (&x * &mask, DropoutCache { mask: Some(mask) })
}

pub fn dropout_bwd(cache: &DropoutCache, dy: Array2<f64>) -> Array2<f64> {
    match &cache.mask {
        Some(mask) => dy * mask,
        None => dy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array;
    use rand::SeedableRng;

    /// Central-difference gradient of `f` with respect to `x`.
    fn numeric_grad(x: &mut Array2<f64>, mut f: impl FnMut(&Array2<f64>) -> f64) -> Array2<f64> {
        let eps = 1e-6;
        let mut g = Array2::zeros(x.raw_dim());
        for idx in ndarray::indices(x.raw_dim()) {
            let orig = x[idx];
            x[idx] = orig + eps;
            let up = f(x);
            x[idx] = orig - eps;
            let down = f(x);
            x[idx] = orig;
            g[idx] = (up - down) / (2.0 * eps);
        }
        g
    }

    fn assert_close(a: &Array2<f64>, b: &Array2<f64>, tol: f64) {
        for (x, y) in a.iter().zip(b.iter()) {
            let rel = (x - y).abs() / x.abs().max(y.abs()).max(1e-6);
            assert!(rel < tol, "gradient mismatch: {x} vs {y}");
        }
    }

    fn sample(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array::from_shape_fn((rows, cols), |_| rng.gen::<f64>() - 0.5)
    }

    /// Weighted sum makes a scalar loss with distinct per-entry gradients.
    fn weighted_sum(y: &Array2<f64>) -> f64 {
        y.indexed_iter().map(|((i, j), v)| v * ((i + 1) as f64 + 0.1 * j as f64)).sum()
    }

    fn weights_like(y: &Array2<f64>) -> Array2<f64> {
        Array2::from_shape_fn(y.raw_dim(), |(i, j)| (i + 1) as f64 + 0.1 * j as f64)
    }

    #[test]
    fn linear_gradients_match_finite_differences() {
        let lin = Linear { w: sample(4, 3, 1), b: sample(1, 3, 2).row(0).to_owned() };
        let mut x = sample(5, 4, 3);
        let (y, cache) = linear_fwd(&lin, &x);
        let mut grad = Linear { w: Array2::zeros((4, 3)), b: Array1::zeros(3) };
        let dx = linear_bwd(&lin, &cache, &weights_like(&y), &mut grad);
        let num = numeric_grad(&mut x, |x| weighted_sum(&linear_fwd(&lin, x).0));
        assert_close(&dx, &num, 1e-6);
    }

    #[test]
    fn layernorm_gradients_match_finite_differences() {
        let ln = LayerNorm { g: sample(1, 6, 4).row(0).to_owned(), b: sample(1, 6, 5).row(0).to_owned() };
        let mut x = sample(3, 6, 6);
        let (y, cache) = layernorm_fwd(&ln, &x);
        let mut grad = LayerNorm { g: Array1::zeros(6), b: Array1::zeros(6) };
        let dx = layernorm_bwd(&ln, &cache, &weights_like(&y), &mut grad);
        let num = numeric_grad(&mut x, |x| weighted_sum(&layernorm_fwd(&ln, x).0));
        assert_close(&dx, &num, 1e-5);
        // Parameter gradients too.
        let mut g_param = ln.g.clone().insert_axis(Axis(0));
        let num_g = numeric_grad(&mut g_param, |g| {
            let ln2 = LayerNorm { g: g.row(0).to_owned(), b: ln.b.clone() };
            weighted_sum(&layernorm_fwd(&ln2, &x).0)
        });
        assert_close(&grad.g.clone().insert_axis(Axis(0)), &num_g, 1e-5);
    }

    #[test]
    fn gelu_gradient_matches_finite_differences() {
        let mut x = sample(4, 5, 7);
        let (y, cache) = gelu_fwd(&x);
        let dx = gelu_bwd(&cache, &weights_like(&y));
        let num = numeric_grad(&mut x, |x| weighted_sum(&gelu_fwd(x).0));
        assert_close(&dx, &num, 1e-6);
    }

    #[test]
    fn attention_gradients_match_finite_differences() {
        let d = 6;
        let attn = Attention {
            q: Linear { w: sample(d, d, 10), b: sample(1, d, 11).row(0).to_owned() },
            k: Linear { w: sample(d, d, 12), b: sample(1, d, 13).row(0).to_owned() },
            v: Linear { w: sample(d, d, 14), b: sample(1, d, 15).row(0).to_owned() },
            o: Linear { w: sample(d, d, 16), b: sample(1, d, 17).row(0).to_owned() },
        };
        let mask = vec![true, true, true, false];
        for causal in [false, true] {
            let mut x = sample(4, d, 18);
            let (y, cache) = attention_fwd(&attn, 2, &x, &x, &mask, causal);
            let mut grad = Attention {
                q: Linear { w: Array2::zeros((d, d)), b: Array1::zeros(d) },
                k: Linear { w: Array2::zeros((d, d)), b: Array1::zeros(d) },
                v: Linear { w: Array2::zeros((d, d)), b: Array1::zeros(d) },
                o: Linear { w: Array2::zeros((d, d)), b: Array1::zeros(d) },
            };
            let (dxq, dxkv) = attention_bwd(&attn, 2, &cache, &weights_like(&y), &mut grad);
            let dx = dxq + dxkv;
            let num = numeric_grad(&mut x, |x| {
                weighted_sum(&attention_fwd(&attn, 2, x, x, &mask, causal).0)
            });
            assert_close(&dx, &num, 1e-5);
        }
    }

    #[test]
    fn ffn_gradients_match_finite_differences() {
        let ffn = FeedForward {
            w1: Linear { w: sample(4, 8, 20), b: sample(1, 8, 21).row(0).to_owned() },
            w2: Linear { w: sample(8, 4, 22), b: sample(1, 4, 23).row(0).to_owned() },
        };
        let mut x = sample(3, 4, 24);
        let (y, cache) = ffn_fwd(&ffn, &x);
        let mut grad = FeedForward {
            w1: Linear { w: Array2::zeros((4, 8)), b: Array1::zeros(8) },
            w2: Linear { w: Array2::zeros((8, 4)), b: Array1::zeros(4) },
        };
        let dx = ffn_bwd(&ffn, &cache, &weights_like(&y), &mut grad);
        let num = numeric_grad(&mut x, |x| weighted_sum(&ffn_fwd(&ffn, x).0));
        assert_close(&dx, &num, 1e-5);
    }

    #[test]
    fn dropout_scales_and_masks() {
        let x = Array2::ones((100, 100));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (y, cache) = dropout_fwd(x.clone(), 0.25, Some(&mut rng));
        let mean = y.mean().unwrap();
        assert!((mean - 1.0).abs() < 0.02, "inverted dropout keeps the mean, got {mean}");
        let dy = Array2::ones((100, 100));
        let dx = dropout_bwd(&cache, dy);
        for (a, b) in y.iter().zip(dx.iter()) {
            assert_eq!(a, b); // same mask applied
        }
        let (y_eval, _) = dropout_fwd(x.clone(), 0.25, None);
        assert_eq!(y_eval, x);
    }

    #[test]
    fn masked_keys_get_zero_probability() {
        let d = 4;
        let attn = Attention {
            q: Linear { w: sample(d, d, 30), b: Array1::zeros(d) },
            k: Linear { w: sample(d, d, 31), b: Array1::zeros(d) },
            v: Linear { w: sample(d, d, 32), b: Array1::zeros(d) },
            o: Linear { w: sample(d, d, 33), b: Array1::zeros(d) },
        };
        let x = sample(3, d, 34);
        let mask = vec![true, false, true];
        let (_, cache) = attention_fwd(&attn, 2, &x, &x, &mask, false);
        for p in &cache.probs {
            for row in p.rows() {
                assert_eq!(row[1], 0.0);
                assert!((row.sum() - 1.0).abs() < 1e-12);
            }
        }
    }
}
