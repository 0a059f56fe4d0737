//! The learnable parameter store: typed layer structs plus flat named
//! access for the optimizer, checkpointing, and weight transfer.
//!
//! Initialization draws every weight matrix and embedding from a normal
//! with standard deviation `d_model^(-1/2)`; biases start at zero, layer
//! norm gains at one. The draw order is the fixed named-array order, so a
//! (config, seed) pair always produces bit-identical parameters.

use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{ModelConfig, ModelError, ModelKind};

/// Decoder input alphabet: the class ids plus one BOS row.
pub const BOS_LABEL: i64 = crate::arabic::NUM_CLASSES as i64;

#[derive(Debug, Clone)]
pub struct Linear {
    pub w: Array2<f64>, // [in, out]
    pub b: Array1<f64>, // [out]
}

impl Linear {
    fn zeros(d_in: usize, d_out: usize) -> Self {
        Self { w: Array2::zeros((d_in, d_out)), b: Array1::zeros(d_out) }
    }
}

#[derive(Debug, Clone)]
pub struct LayerNorm {
    pub g: Array1<f64>,
    pub b: Array1<f64>,
}

impl LayerNorm {
    fn zeros(d: usize) -> Self {
        Self { g: Array1::zeros(d), b: Array1::zeros(d) }
    }
}

#[derive(Debug, Clone)]
pub struct Attention {
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
    pub o: Linear,
}

impl Attention {
    fn zeros(d: usize) -> Self {
        Self {
            q: Linear::zeros(d, d),
            k: Linear::zeros(d, d),
            v: Linear::zeros(d, d),
            o: Linear::zeros(d, d),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeedForward {
    pub w1: Linear, // [d, ffn]
    pub w2: Linear, // [ffn, d]
}

impl FeedForward {
    fn zeros(d: usize, ffn: usize) -> Self {
        Self { w1: Linear::zeros(d, ffn), w2: Linear::zeros(ffn, d) }
    }
}

/// Pre-norm encoder layer: x += attn(ln1(x)); x += ffn(ln2(x)).
#[derive(Debug, Clone)]
pub struct EncoderLayer {
    pub ln1: LayerNorm,
    pub attn: Attention,
    pub ln2: LayerNorm,
    pub ffn: FeedForward,
}

impl EncoderLayer {
    fn zeros(cfg: &ModelConfig) -> Self {
        Self {
            ln1: LayerNorm::zeros(cfg.d_model),
            attn: Attention::zeros(cfg.d_model),
            ln2: LayerNorm::zeros(cfg.d_model),
            ffn: FeedForward::zeros(cfg.d_model, cfg.ffn_dim),
        }
    }
}

/// Pre-norm decoder layer with causal self-attention and cross-attention
/// over the encoder states.
#[derive(Debug, Clone)]
pub struct DecoderLayer {
    pub ln1: LayerNorm,
    pub self_attn: Attention,
    pub ln_cross: LayerNorm,
    pub cross_attn: Attention,
    pub ln2: LayerNorm,
    pub ffn: FeedForward,
}

impl DecoderLayer {
    fn zeros(cfg: &ModelConfig) -> Self {
        Self {
            ln1: LayerNorm::zeros(cfg.d_model),
            self_attn: Attention::zeros(cfg.d_model),
            ln_cross: LayerNorm::zeros(cfg.d_model),
            cross_attn: Attention::zeros(cfg.d_model),
            ln2: LayerNorm::zeros(cfg.d_model),
            ffn: FeedForward::zeros(cfg.d_model, cfg.ffn_dim),
        }
    }
}

/// All learnable arrays of one model. Also used as the container for
/// gradients and optimizer moments (same shapes, zero-initialized).
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub kind: ModelKind,
    pub tok_embed: Array2<f64>, // [vocab, d]
    pub pos_embed: Array2<f64>, // [max_len, d]
    pub encoder: Vec<EncoderLayer>,
    pub enc_norm: LayerNorm,
    /// Decoder-only parts (encoder-decoder kind).
    pub label_embed: Option<Array2<f64>>, // [n_classes + 1, d]
    pub decoder: Vec<DecoderLayer>,
    pub dec_norm: Option<LayerNorm>,
    /// Vocabulary projection (masked-pretraining kind).
    pub mlm_head: Option<Linear>,
    /// Class head (encoder-only and encoder-decoder kinds).
    pub cls_head: Option<Linear>,
}

impl ModelParams {
    /// Allocate all arrays at zero, shaped by (config, kind).
    pub fn zeros(config: &ModelConfig, kind: ModelKind) -> Result<Self, ModelError> {
        config.validate()?;
        let d = config.d_model;
        let is_ed = matches!(kind, ModelKind::Ed);
        if is_ed && config.n_layers_decoder == 0 {
            return Err(ModelError::InvalidConfig("encoder-decoder needs decoder layers".into()));
        }
        if !is_ed && config.n_layers_decoder != 0 {
            return Err(ModelError::InvalidConfig("decoder layers on an encoder-only kind".into()));
        }
        Ok(Self {
            config: config.clone(),
            kind,
            tok_embed: Array2::zeros((config.vocab_size, d)),
            pos_embed: Array2::zeros((config.max_len, d)),
            encoder: (0..config.n_layers_encoder).map(|_| EncoderLayer::zeros(config)).collect(),
            enc_norm: LayerNorm::zeros(d),
            label_embed: is_ed.then(|| Array2::zeros((config.n_classes + 1, d))),
            decoder: (0..config.n_layers_decoder).map(|_| DecoderLayer::zeros(config)).collect(),
            dec_norm: is_ed.then(|| LayerNorm::zeros(d)),
            mlm_head: matches!(kind, ModelKind::Mlm).then(|| Linear::zeros(d, config.vocab_size)),
            cls_head: (!matches!(kind, ModelKind::Mlm))
                .then(|| Linear::zeros(d, config.n_classes)),
        })
    }

    /// A zero-filled copy with the same shapes (gradient / moment buffers).
    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.config, self.kind).expect("existing params imply a valid config")
    }

    /// Seeded random initialization.
    pub fn init(config: &ModelConfig, kind: ModelKind, seed: u64) -> Result<Self, ModelError> {
        let mut params = Self::zeros(config, kind)?;
        let std = (config.d_model as f64).powf(-0.5);
        let normal = Normal::new(0.0, std).expect("positive std");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (name, mut array) in params.named_arrays_mut() {
            if name.ends_with(".g") {
                array.fill(1.0);
            } else if name.ends_with(".b") && !name.ends_with("embed.b") {
                // biases and layer-norm offsets stay zero
            } else {
                for x in array.iter_mut() {
                    *x = normal.sample(&mut rng);
                }
            }
        }
        Ok(params)
    }

    pub fn param_count(&self) -> usize {
        self.named_arrays().iter().map(|(_, a)| a.len()).sum()
    }

    /// Flat named views in a fixed order. Keep in sync with
    /// [`ModelParams::named_arrays_mut`]; a unit test asserts the orders match.
    pub fn named_arrays(&self) -> Vec<(String, ArrayViewD<'_, f64>)> {
        let mut out: Vec<(String, ArrayViewD<'_, f64>)> = Vec::new();
        out.push(("tok_embed".into(), self.tok_embed.view().into_dyn()));
        out.push(("pos_embed".into(), self.pos_embed.view().into_dyn()));
        for (i, layer) in self.encoder.iter().enumerate() {
            let p = format!("enc{i}");
            push_ln(&mut out, &format!("{p}.ln1"), &layer.ln1);
            push_attn(&mut out, &format!("{p}.attn"), &layer.attn);
            push_ln(&mut out, &format!("{p}.ln2"), &layer.ln2);
            push_ffn(&mut out, &format!("{p}.ffn"), &layer.ffn);
        }
        push_ln(&mut out, "enc_norm", &self.enc_norm);
        if let Some(le) = &self.label_embed {
            out.push(("label_embed".into(), le.view().into_dyn()));
        }
        for (i, layer) in self.decoder.iter().enumerate() {
            let p = format!("dec{i}");
            push_ln(&mut out, &format!("{p}.ln1"), &layer.ln1);
            push_attn(&mut out, &format!("{p}.self_attn"), &layer.self_attn);
            push_ln(&mut out, &format!("{p}.ln_cross"), &layer.ln_cross);
            push_attn(&mut out, &format!("{p}.cross_attn"), &layer.cross_attn);
            push_ln(&mut out, &format!("{p}.ln2"), &layer.ln2);
            push_ffn(&mut out, &format!("{p}.ffn"), &layer.ffn);
        }
        if let Some(ln) = &self.dec_norm {
            push_ln(&mut out, "dec_norm", ln);
        }
        if let Some(head) = &self.mlm_head {
            push_linear(&mut out, "mlm_head", head);
        }
        if let Some(head) = &self.cls_head {
            push_linear(&mut out, "cls_head", head);
        }
        out
    }

    /// Mutable counterpart of [`ModelParams::named_arrays`], same order.
    pub fn named_arrays_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, f64>)> {
        let mut out: Vec<(String, ArrayViewMutD<'_, f64>)> = Vec::new();
        out.push(("tok_embed".into(), self.tok_embed.view_mut().into_dyn()));
        out.push(("pos_embed".into(), self.pos_embed.view_mut().into_dyn()));
        for (i, layer) in self.encoder.iter_mut().enumerate() {
            let p = format!("enc{i}");
            push_ln_mut(&mut out, &format!("{p}.ln1"), &mut layer.ln1);
            push_attn_mut(&mut out, &format!("{p}.attn"), &mut layer.attn);
            push_ln_mut(&mut out, &format!("{p}.ln2"), &mut layer.ln2);
            push_ffn_mut(&mut out, &format!("{p}.ffn"), &mut layer.ffn);
        }
        push_ln_mut(&mut out, "enc_norm", &mut self.enc_norm);
        if let Some(le) = &mut self.label_embed {
            out.push(("label_embed".into(), le.view_mut().into_dyn()));
        }
        for (i, layer) in self.decoder.iter_mut().enumerate() {
            let p = format!("dec{i}");
            push_ln_mut(&mut out, &format!("{p}.ln1"), &mut layer.ln1);
            push_attn_mut(&mut out, &format!("{p}.self_attn"), &mut layer.self_attn);
            push_ln_mut(&mut out, &format!("{p}.ln_cross"), &mut layer.ln_cross);
            push_attn_mut(&mut out, &format!("{p}.cross_attn"), &mut layer.cross_attn);
            push_ln_mut(&mut out, &format!("{p}.ln2"), &mut layer.ln2);
            push_ffn_mut(&mut out, &format!("{p}.ffn"), &mut layer.ffn);
        }
        if let Some(ln) = &mut self.dec_norm {
            push_ln_mut(&mut out, "dec_norm", ln);
        }
        if let Some(head) = &mut self.mlm_head {
            push_linear_mut(&mut out, "mlm_head", head);
        }
        if let Some(head) = &mut self.cls_head {
            push_linear_mut(&mut out, "cls_head", head);
        }
        out
    }

    /// SHA-256 over the flat little-endian 32-bit serialization of all
    /// arrays, in named order.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for (name, array) in self.named_arrays() {
            hasher.update(name.as_bytes());
            for &x in array.iter() {
                hasher.update((x as f32).to_le_bytes());
            }
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn push_linear<'a>(out: &mut Vec<(String, ArrayViewD<'a, f64>)>, p: &str, lin: &'a Linear) {
    out.push((format!("{p}.w"), lin.w.view().into_dyn()));
    out.push((format!("{p}.b"), lin.b.view().into_dyn()));
}

fn push_ln<'a>(out: &mut Vec<(String, ArrayViewD<'a, f64>)>, p: &str, ln: &'a LayerNorm) {
    out.push((format!("{p}.g"), ln.g.view().into_dyn()));
    out.push((format!("{p}.b"), ln.b.view().into_dyn()));
}

fn push_attn<'a>(out: &mut Vec<(String, ArrayViewD<'a, f64>)>, p: &str, attn: &'a Attention) {
    push_linear(out, &format!("{p}.q"), &attn.q);
    push_linear(out, &format!("{p}.k"), &attn.k);
    push_linear(out, &format!("{p}.v"), &attn.v);
    push_linear(out, &format!("{p}.o"), &attn.o);
}

fn push_ffn<'a>(out: &mut Vec<(String, ArrayViewD<'a, f64>)>, p: &str, ffn: &'a FeedForward) {
    push_linear(out, &format!("{p}.w1"), &ffn.w1);
    push_linear(out, &format!("{p}.w2"), &ffn.w2);
}

fn push_linear_mut<'a>(
    out: &mut Vec<(String, ArrayViewMutD<'a, f64>)>,
    p: &str,
    lin: &'a mut Linear,
) {
    out.push((format!("{p}.w"), lin.w.view_mut().into_dyn()));
    out.push((format!("{p}.b"), lin.b.view_mut().into_dyn()));
}

fn push_ln_mut<'a>(
    out: &mut Vec<(String, ArrayViewMutD<'a, f64>)>,
    p: &str,
    ln: &'a mut LayerNorm,
) {
    out.push((format!("{p}.g"), ln.g.view_mut().into_dyn()));
    out.push((format!("{p}.b"), ln.b.view_mut().into_dyn()));
}

fn push_attn_mut<'a>(
    out: &mut Vec<(String, ArrayViewMutD<'a, f64>)>,
    p: &str,
    attn: &'a mut Attention,
) {
    push_linear_mut(out, &format!("{p}.q"), &mut attn.q);
    push_linear_mut(out, &format!("{p}.k"), &mut attn.k);
    push_linear_mut(out, &format!("{p}.v"), &mut attn.v);
    push_linear_mut(out, &format!("{p}.o"), &mut attn.o);
}

fn push_ffn_mut<'a>(
    out: &mut Vec<(String, ArrayViewMutD<'a, f64>)>,
    p: &str,
    ffn: &'a mut FeedForward,
) {
    push_linear_mut(out, &format!("{p}.w1"), &mut ffn.w1);
    push_linear_mut(out, &format!("{p}.w2"), &mut ffn.w2);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_ed() -> ModelParams {
        let cfg = ModelConfig::tiny(ModelKind::Ed, 12);
        ModelParams::init(&cfg, ModelKind::Ed, 1).unwrap()
    }

    #[test]
    fn named_orders_match_between_const_and_mut() {
        let mut p = tiny_ed();
        let names: Vec<String> = p.named_arrays().into_iter().map(|(n, _)| n).collect();
        let names_mut: Vec<String> = p.named_arrays_mut().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, names_mut);
        // Names are unique.
        let mut dedup = names.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), names.len());
    }

    #[test]
    fn init_is_deterministic() {
        let cfg = ModelConfig::tiny(ModelKind::Eo, 12);
        let a = ModelParams::init(&cfg, ModelKind::Eo, 7).unwrap();
        let b = ModelParams::init(&cfg, ModelKind::Eo, 7).unwrap();
        for ((_, x), (_, y)) in a.named_arrays().iter().zip(b.named_arrays().iter()) {
            assert_eq!(x, y);
        }
        let c = ModelParams::init(&cfg, ModelKind::Eo, 8).unwrap();
        assert_ne!(a.tok_embed, c.tok_embed);
    }

    #[test]
    fn layer_norms_start_at_identity_and_biases_at_zero() {
        let p = tiny_ed();
        assert!(p.enc_norm.g.iter().all(|&x| x == 1.0));
        assert!(p.enc_norm.b.iter().all(|&x| x == 0.0));
        assert!(p.encoder[0].attn.q.b.iter().all(|&x| x == 0.0));
        assert!(p.cls_head.as_ref().unwrap().b.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn projection_std_matches_scheme() {
        // d_model = 64 -> std 0.125; check over >= 1e5 entries.
        let cfg = ModelConfig { vocab_size: 64, ..ModelConfig::desk(ModelKind::Eo, 64) };
        let p = ModelParams::init(&cfg, ModelKind::Eo, 3).unwrap();
        let mut values: Vec<f64> = Vec::new();
        for layer in &p.encoder {
            values.extend(layer.ffn.w1.w.iter());
            values.extend(layer.ffn.w2.w.iter());
            values.extend(layer.attn.q.w.iter());
            values.extend(layer.attn.k.w.iter());
            values.extend(layer.attn.v.w.iter());
            values.extend(layer.attn.o.w.iter());
        }
        assert!(values.len() >= 100_000, "got {}", values.len());
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / values.len() as f64;
        let target = (cfg.d_model as f64).powf(-0.5);
        assert!((var.sqrt() - target).abs() / target < 0.10);
    }

    #[test]
    fn kind_gates_heads() {
        let cfg = ModelConfig::tiny(ModelKind::Mlm, 12);
        let p = ModelParams::zeros(&cfg, ModelKind::Mlm).unwrap();
        assert!(p.mlm_head.is_some());
        assert!(p.cls_head.is_none());
        assert!(p.label_embed.is_none());

        let cfg = ModelConfig::tiny(ModelKind::Ed, 12);
        let p = ModelParams::zeros(&cfg, ModelKind::Ed).unwrap();
        assert!(p.label_embed.is_some());
        assert_eq!(p.label_embed.as_ref().unwrap().nrows(), 16);
    }
}
