//! The full network: strided-conv frontend, LoRA-adapted transformer
//! encoder, point-wise conv, temporal mean pooling, and a DNN classifier
//! head — plus the transfer initialization and freeze policy used when a
//! dialect-pretrained checkpoint seeds impairment fine-tuning.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{
    add_positional_encoding, conv_out_len, gelu, gelu_backward, relu, relu_backward,
    softmax_cross_entropy, Conv1dS2, EncoderBlock, Linear, ParamMut, Scalar,
};
use crate::seed::rng_from;

fn default_d_model() -> usize {
    64
}
fn default_n_blocks() -> usize {
    2
}
fn default_n_heads() -> usize {
    4
}
fn default_ffn_mult() -> usize {
    4
}
fn default_lora_rank() -> usize {
    8
}
fn default_lora_alpha() -> f64 {
    16.0
}
fn default_n_mels() -> usize {
    80
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ModelConfig {
    #[serde(default = "default_d_model")]
    pub d_model: usize,
    #[serde(default = "default_n_blocks")]
    pub n_blocks: usize,
    #[serde(default = "default_n_heads")]
    pub n_heads: usize,
    #[serde(default = "default_ffn_mult")]
    pub ffn_mult: usize,
    #[serde(default = "default_lora_rank")]
    pub lora_rank: usize,
    #[serde(default = "default_lora_alpha")]
    pub lora_alpha: f64,
    #[serde(default = "default_n_mels")]
    pub n_mels: usize,
    #[serde(default = "default_n_classes")]
    pub n_classes: usize,
}

fn default_n_classes() -> usize {
    2
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::with_classes(default_n_classes())
    }
}

impl ModelConfig {
    pub fn with_classes(n_classes: usize) -> Self {
        ModelConfig {
            d_model: 64,
            n_blocks: 2,
            n_heads: 4,
            ffn_mult: 4,
            lora_rank: 8,
            lora_alpha: 16.0,
            n_mels: 80,
            n_classes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_model == 0 || self.d_model % self.n_heads != 0 {
            return Err(Error::Config(format!(
                "d_model {} must be positive and divisible by n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if self.n_classes < 2 {
            return Err(Error::Config("n_classes must be >= 2".into()));
        }
        if self.n_blocks == 0 || self.ffn_mult == 0 || self.lora_rank == 0 || self.n_mels == 0 {
            return Err(Error::Config("model dimensions must be positive".into()));
        }
        if self.lora_alpha <= 0.0 {
            return Err(Error::Config("lora_alpha must be positive".into()));
        }
        Ok(())
    }
}

/// Training stage, which determines the freeze policy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Pretrain,
    Finetune,
}

/// In the fine-tuning stage only LoRA adapters, the point-wise conv, and
/// the classifier head are trainable; frontend and encoder base weights
/// stay frozen.
pub fn is_finetune_trainable(name: &str) -> bool {
    name.contains(".lora_") || name.starts_with("pwconv.") || name.starts_with("head.")
}

#[derive(Debug, Clone)]
pub struct Model<S> {
    pub cfg: ModelConfig,
    pub conv1: Conv1dS2<S>,
    pub conv2: Conv1dS2<S>,
    pub blocks: Vec<EncoderBlock<S>>,
    pub pwconv: Linear<S>,
    pub head1: Linear<S>,
    pub head2: Linear<S>,
}

pub struct ForwardCache<S> {
    x0: Array2<S>,
    cols1: Array2<S>,
    c1: Array2<S>,
    a1: Array2<S>,
    cols2: Array2<S>,
    c2: Array2<S>,
    enc_in: Array2<S>,
    block_caches: Vec<crate::nn::BlockCache<S>>,
    z: Array2<S>,
    pw: Array2<S>,
    pooled: Array2<S>,
    h1: Array2<S>,
}

impl<S: Scalar> Model<S> {
    /// Deterministic seeded construction: Gaussian fan-in weights, zero
    /// biases, LoRA B zero so adapters contribute nothing at step 0.
    pub fn build(cfg: &ModelConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = rng_from(seed);
        let conv1 = Conv1dS2::init(&mut rng, cfg.d_model, cfg.n_mels);
        let conv2 = Conv1dS2::init(&mut rng, cfg.d_model, cfg.d_model);
        let blocks = (0..cfg.n_blocks)
            .map(|_| {
                EncoderBlock::init(
                    &mut rng,
                    cfg.d_model,
                    cfg.n_heads,
                    cfg.ffn_mult,
                    cfg.lora_rank,
                    cfg.lora_alpha,
                )
            })
            .collect();
        let pwconv = Linear::init(&mut rng, cfg.d_model, cfg.d_model);
        let head1 = Linear::init(&mut rng, cfg.d_model, cfg.d_model);
        let head2 = Linear::init(&mut rng, cfg.n_classes, cfg.d_model);
        Ok(Model { cfg: *cfg, conv1, conv2, blocks, pwconv, head1, head2 })
    }

    /// Number of encoder frames produced for `n_frames` input feature frames.
    pub fn frontend_out_len(n_frames: usize) -> usize {
        conv_out_len(conv_out_len(n_frames))
    }

    /// Forward pass with cached intermediates for the backward pass.
    pub fn forward_cached(&self, feat: &Array2<S>) -> Result<(Array1<S>, ForwardCache<S>)> {
        if feat.nrows() != self.cfg.n_mels {
            return Err(Error::ShapeMismatch(format!(
                "feature matrix has {} mel rows, model expects {}",
                feat.nrows(),
                self.cfg.n_mels
            )));
        }
        let x0 = feat.t().to_owned(); // [T, n_mels]
        let (c1, cols1) = self.conv1.forward(&x0);
        let a1 = gelu(&c1);
        let (c2, cols2) = self.conv2.forward(&a1);
        let a2 = gelu(&c2);

        let mut enc_in = a2;
        add_positional_encoding(&mut enc_in);

        let mut x = enc_in.clone();
        let mut block_caches = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let (y, cache) = block.forward(&x);
            x = y;
            block_caches.push(cache);
        }
        let z = x;

        let pw = self.pwconv.forward(&z);
        let pw_act = relu(&pw);
        let t = pw_act.nrows();
        let pooled = (pw_act.sum_axis(Axis(0)) * S::from_f64(1.0 / t as f64))
            .insert_axis(Axis(0)); // [1, d]

        let h1 = self.head1.forward(&pooled);
        let h1a = relu(&h1);
        let logits = self.head2.forward(&h1a).row(0).to_owned();
        Ok((
            logits,
            ForwardCache {
                x0,
                cols1,
                c1,
                a1,
                cols2,
                c2,
                enc_in,
                block_caches,
                z,
                pw,
                pooled,
                h1,
            },
        ))
    }

    /// Inference-only forward pass.
    pub fn forward(&self, feat: &Array2<S>) -> Result<Array1<S>> {
        Ok(self.forward_cached(feat)?.0)
    }

    /// Reverse-mode pass from dL/dlogits; accumulates gradients on every
    /// trainable parameter.
    pub fn backward(&mut self, cache: &ForwardCache<S>, dlogits: &Array1<S>) {
        let dl = dlogits.clone().insert_axis(Axis(0)); // [1, C]
        let h1a = relu(&cache.h1);
        let dh1a = self.head2.backward(&h1a, &dl);
        let dh1 = relu_backward(&cache.h1, &dh1a);
        let dpooled = self.head1.backward(&cache.pooled, &dh1);

        let t = cache.pw.nrows();
        let inv_t = S::from_f64(1.0 / t as f64);
        let dpooled_row = dpooled.row(0);
        let mut dpw_act = Array2::zeros(cache.pw.raw_dim());
        for mut row in dpw_act.rows_mut() {
            for (dst, &src) in row.iter_mut().zip(dpooled_row.iter()) {
                *dst = src * inv_t;
            }
        }
        let dpw = relu_backward(&cache.pw, &dpw_act);
        let mut dx = self.pwconv.backward(&cache.z, &dpw);

        for (block, bcache) in
            self.blocks.iter_mut().zip(cache.block_caches.iter()).rev()
        {
            dx = block.backward(bcache, &dx);
        }
        let _ = &cache.enc_in; // positional encoding is additive: gradient passes through

        let dc2 = gelu_backward(&cache.c2, &dx);
        let da1 = self.conv2.backward(&cache.cols2, &dc2, cache.a1.nrows());
        let dc1 = gelu_backward(&cache.c1, &da1);
        let _dx0 = self.conv1.backward(&cache.cols1, &dc1, cache.x0.nrows());
    }

    /// Loss + gradient accumulation for one (features, label) example.
    pub fn train_example(&mut self, feat: &Array2<S>, target: usize, loss_scale: S) -> Result<S> {
        let (logits, cache) = self.forward_cached(feat)?;
        let (loss, mut dlogits) = softmax_cross_entropy(&logits, target)?;
        dlogits.mapv_inplace(|d| d * loss_scale);
        self.backward(&cache, &dlogits);
        Ok(loss * loss_scale)
    }

    /// Named views of every parameter, in a fixed order. Names are stable
    /// and unique; they key the checkpoint format and the optimizer state.
    pub fn params_mut(&mut self) -> Vec<(String, ParamMut<'_, S>)> {
        let mut out: Vec<(String, ParamMut<'_, S>)> = Vec::new();
        out.push(("frontend.conv1.w".into(), ParamMut::M(&mut self.conv1.w)));
        out.push(("frontend.conv1.b".into(), ParamMut::V(&mut self.conv1.b)));
        out.push(("frontend.conv2.w".into(), ParamMut::M(&mut self.conv2.w)));
        out.push(("frontend.conv2.b".into(), ParamMut::V(&mut self.conv2.b)));
        for (i, b) in self.blocks.iter_mut().enumerate() {
            let p = format!("enc.{}.", i);
            out.push((format!("{p}ln1.gamma"), ParamMut::V(&mut b.ln1.gamma)));
            out.push((format!("{p}ln1.beta"), ParamMut::V(&mut b.ln1.beta)));
            out.push((format!("{p}attn.q.w"), ParamMut::M(&mut b.q.base.w)));
            out.push((format!("{p}attn.q.b"), ParamMut::V(&mut b.q.base.b)));
            out.push((format!("{p}attn.q.lora_a"), ParamMut::M(&mut b.q.a)));
            out.push((format!("{p}attn.q.lora_b"), ParamMut::M(&mut b.q.b)));
            out.push((format!("{p}attn.k.w"), ParamMut::M(&mut b.k.w)));
            out.push((format!("{p}attn.v.w"), ParamMut::M(&mut b.v.base.w)));
            out.push((format!("{p}attn.v.b"), ParamMut::V(&mut b.v.base.b)));
            out.push((format!("{p}attn.v.lora_a"), ParamMut::M(&mut b.v.a)));
            out.push((format!("{p}attn.v.lora_b"), ParamMut::M(&mut b.v.b)));
            out.push((format!("{p}attn.o.w"), ParamMut::M(&mut b.o.w)));
            out.push((format!("{p}attn.o.b"), ParamMut::V(&mut b.o.b)));
            out.push((format!("{p}ln2.gamma"), ParamMut::V(&mut b.ln2.gamma)));
            out.push((format!("{p}ln2.beta"), ParamMut::V(&mut b.ln2.beta)));
            out.push((format!("{p}ffn.w1.w"), ParamMut::M(&mut b.ff1.w)));
            out.push((format!("{p}ffn.w1.b"), ParamMut::V(&mut b.ff1.b)));
            out.push((format!("{p}ffn.w2.w"), ParamMut::M(&mut b.ff2.w)));
            out.push((format!("{p}ffn.w2.b"), ParamMut::V(&mut b.ff2.b)));
        }
        out.push(("pwconv.w".into(), ParamMut::M(&mut self.pwconv.w)));
        out.push(("pwconv.b".into(), ParamMut::V(&mut self.pwconv.b)));
        out.push(("head.fc1.w".into(), ParamMut::M(&mut self.head1.w)));
        out.push(("head.fc1.b".into(), ParamMut::V(&mut self.head1.b)));
        out.push(("head.fc2.w".into(), ParamMut::M(&mut self.head2.w)));
        out.push(("head.fc2.b".into(), ParamMut::V(&mut self.head2.b)));
        out
    }

    /// Exported tensors (name, shape, values) in registry order.
    pub fn export_tensors(&mut self) -> Vec<(String, Vec<usize>, Vec<S>)> {
        self.params_mut()
            .into_iter()
            .map(|(name, p)| {
                let shape = p.shape();
                let values = p.values();
                (name, shape, values)
            })
            .collect()
    }

    pub fn zero_grads(&mut self) {
        for (_, mut p) in self.params_mut() {
            p.grad_slice().fill(S::zero());
        }
    }

    /// Set trainable flags for the given stage: everything trains during
    /// pretraining; fine-tuning freezes frontend and encoder base weights.
    pub fn apply_freeze_policy(&mut self, stage: Stage) {
        for (name, mut p) in self.params_mut() {
            let trainable = match stage {
                Stage::Pretrain => true,
                Stage::Finetune => is_finetune_trainable(&name),
            };
            p.set_trainable(trainable);
        }
    }

    pub fn trainable_names(&mut self) -> Vec<String> {
        self.params_mut()
            .into_iter()
            .filter(|(_, p)| p.trainable())
            .map(|(n, _)| n)
            .collect()
    }

    /// Sum of gradient accumulations from another model with identical
    /// layout, reduced in registry order.
    pub fn add_grads_from(&mut self, other: &mut Model<S>) {
        let mut theirs = other.params_mut();
        for ((_, mut mine), (_, their)) in self.params_mut().into_iter().zip(theirs.iter_mut()) {
            let src = their.grad_slice();
            for (d, s) in mine.grad_slice().iter_mut().zip(src.iter()) {
                *d = *d + *s;
            }
        }
    }
}

/// Build a model from a pretraining checkpoint: frontend, encoder (base and
/// LoRA), and point-wise conv are copied; the head is rebuilt for the
/// downstream class count with seeded random init; the fine-tuning freeze
/// policy is applied.
pub fn transfer_init(
    source: &mut Model<f32>,
    source_stage: Stage,
    n_classes_downstream: usize,
    seed: u64,
) -> Result<Model<f32>> {
    if source_stage != Stage::Pretrain {
        return Err(Error::Checkpoint(
            "transfer_init requires a stage=pretrain checkpoint".into(),
        ));
    }
    let cfg = ModelConfig { n_classes: n_classes_downstream, ..source.cfg };
    let mut model = Model::build(&cfg, seed)?;
    let mut src_params = source.params_mut();
    for (name, mut dst) in model.params_mut() {
        if name.starts_with("head.") {
            continue;
        }
        let (src_name, src) = src_params
            .iter_mut()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Checkpoint(format!("source model lacks tensor {}", name)))?;
        if src.shape() != dst.shape() {
            return Err(Error::Checkpoint(format!(
                "tensor {} shape mismatch: {:?} vs {:?}",
                src_name,
                src.shape(),
                dst.shape()
            )));
        }
        let values = src.values();
        dst.value_slice().copy_from_slice(&values);
    }
    model.apply_freeze_policy(Stage::Finetune);
    Ok(model)
}

/// Central finite differences against the analytic gradients, in 64-bit.
/// Returns the max relative error over all trainable scalars, with
/// denominator max(|analytic|, |numeric|, 1e-8). Frozen parameters are
/// skipped.
pub fn finite_difference_check(
    model: &mut Model<f64>,
    feat: &Array2<f64>,
    target: usize,
    eps: f64,
) -> Result<f64> {
    model.zero_grads();
    let (logits, cache) = model.forward_cached(feat)?;
    let (_, dlogits) = softmax_cross_entropy(&logits, target)?;
    model.backward(&cache, &dlogits);

    let analytic: Vec<(String, Vec<f64>)> = model
        .params_mut()
        .into_iter()
        .map(|(n, mut p)| (n, p.grad_slice().to_vec()))
        .collect();

    let loss_of = |m: &mut Model<f64>| -> Result<f64> {
        let logits = m.forward(feat)?;
        let (loss, _) = softmax_cross_entropy(&logits, target)?;
        Ok(loss)
    };

    let mut max_rel = 0.0f64;
    let n_params = analytic.len();
    for pi in 0..n_params {
        let (trainable, len) = {
            let params = model.params_mut();
            (params[pi].1.trainable(), analytic[pi].1.len())
        };
        if !trainable {
            continue;
        }
        for i in 0..len {
            let orig = {
                let mut params = model.params_mut();
                let v = params[pi].1.value_slice()[i];
                params[pi].1.value_slice()[i] = v + eps;
                v
            };
            let lp = loss_of(model)?;
            {
                let mut params = model.params_mut();
                params[pi].1.value_slice()[i] = orig - eps;
            }
            let lm = loss_of(model)?;
            {
                let mut params = model.params_mut();
                params[pi].1.value_slice()[i] = orig;
            }
            let numeric = (lp - lm) / (2.0 * eps);
            let a = analytic[pi].1[i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    Ok(max_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gaussian_matrix;

    fn tiny_cfg() -> ModelConfig {
        ModelConfig {
            d_model: 8,
            n_blocks: 1,
            n_heads: 2,
            ffn_mult: 2,
            lora_rank: 2,
            lora_alpha: 4.0,
            n_mels: 6,
            n_classes: 3,
        }
    }

    fn random_features(seed: u64, n_mels: usize, t: usize) -> Array2<f64> {
        let mut rng = rng_from(seed);
        gaussian_matrix::<f64>(&mut rng, n_mels, t, 1.0)
    }

    #[test]
    fn build_is_deterministic() {
        let cfg = tiny_cfg();
        let mut a = Model::<f32>::build(&cfg, 5).unwrap();
        let mut b = Model::<f32>::build(&cfg, 5).unwrap();
        assert_eq!(a.export_tensors(), b.export_tensors());
        let mut c = Model::<f32>::build(&cfg, 6).unwrap();
        assert_ne!(a.export_tensors(), c.export_tensors());
    }

    #[test]
    fn forward_output_width_and_determinism() {
        let mut cfg = tiny_cfg();
        cfg.n_classes = 4;
        let model = Model::<f32>::build(&cfg, 1).unwrap();
        let feat = random_features(2, cfg.n_mels, 20).mapv(|v| v as f32);
        let l1 = model.forward(&feat).unwrap();
        let l2 = model.forward(&feat).unwrap();
        assert_eq!(l1.len(), 4);
        assert_eq!(l1, l2);
        assert!(l1.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn frontend_shape_oracle() {
        assert_eq!(Model::<f32>::frontend_out_len(1498), 375);
        let cfg = ModelConfig::with_classes(2);
        let model = Model::<f32>::build(&cfg, 0).unwrap();
        let feat = Array2::<f32>::zeros((80, 1498));
        let (_, cache) = model.forward_cached(&feat).unwrap();
        assert_eq!(cache.z.nrows(), 375);
    }

    #[test]
    fn constant_input_yields_equal_interior_frame_embeddings() {
        // for a time-constant input every interior frontend frame sees the
        // same receptive field, so all frame embeddings entering the
        // encoder (before positional encoding) are identical; only the two
        // zero-padded boundary frames differ
        let cfg = tiny_cfg();
        let model = Model::<f64>::build(&cfg, 3).unwrap();
        let feat = Array2::<f64>::from_elem((cfg.n_mels, 81), 0.37);
        let x0 = feat.t().to_owned();
        let (c1, _) = model.conv1.forward(&x0);
        let a1 = crate::nn::gelu(&c1);
        let (c2, _) = model.conv2.forward(&a1);
        let a2 = crate::nn::gelu(&c2);
        let t = a2.nrows();
        assert!(t > 4);
        let reference = a2.row(2).to_owned();
        for i in 2..t - 2 {
            let diff = a2
                .row(i)
                .iter()
                .zip(reference.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(diff < 1e-14, "row {} differs by {}", i, diff);
        }
    }

    #[test]
    fn lora_zero_contribution_at_init() {
        let cfg = ModelConfig::with_classes(2);
        let model = Model::<f32>::build(&cfg, 9).unwrap();
        let mut no_adapter = model.clone();
        for block in &mut no_adapter.blocks {
            block.q.a.v.fill(0.0);
            block.v.a.v.fill(0.0);
        }
        let feat = random_features(4, 80, 60).mapv(|v| v as f32);
        let a = model.forward(&feat).unwrap();
        let b = no_adapter.forward(&feat).unwrap();
        let max_diff =
            a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0f32, f32::max);
        assert!(max_diff <= 1e-6, "max diff {}", max_diff);
    }

    #[test]
    fn gradcheck_tiny_model() {
        let cfg = tiny_cfg();
        let mut model = Model::<f64>::build(&cfg, 11).unwrap();
        let feat = random_features(12, cfg.n_mels, 16);
        let err = finite_difference_check(&mut model, &feat, 1, 1e-4).unwrap();
        assert!(err <= 1e-4, "max relative error {}", err);
    }

    #[test]
    fn gradcheck_skips_frozen() {
        let cfg = tiny_cfg();
        let mut model = Model::<f64>::build(&cfg, 11).unwrap();
        model.apply_freeze_policy(Stage::Finetune);
        let feat = random_features(12, cfg.n_mels, 16);
        let err = finite_difference_check(&mut model, &feat, 0, 1e-4).unwrap();
        assert!(err <= 1e-4, "max relative error {}", err);
    }

    #[test]
    fn finetune_trainable_set_is_exact() {
        let cfg = ModelConfig::with_classes(2);
        let mut model = Model::<f32>::build(&cfg, 0).unwrap();
        model.apply_freeze_policy(Stage::Finetune);
        let trainable = model.trainable_names();
        for name in &trainable {
            assert!(
                name.contains(".lora_") || name.starts_with("pwconv.") || name.starts_with("head."),
                "unexpected trainable tensor {}",
                name
            );
        }
        // every lora/pwconv/head tensor is trainable
        let all: Vec<String> = model.params_mut().into_iter().map(|(n, _)| n).collect();
        for name in all {
            if is_finetune_trainable(&name) {
                assert!(trainable.contains(&name), "missing trainable tensor {}", name);
            }
        }
        // count: 2 blocks x 4 lora tensors + pwconv w/b + head 2x(w/b)
        assert_eq!(trainable.len(), 2 * 4 + 2 + 4);
    }

    #[test]
    fn transfer_init_copies_base_and_rebuilds_head() {
        let cfg = ModelConfig { n_classes: 4, ..ModelConfig::with_classes(4) };
        let mut pre = Model::<f32>::build(&cfg, 21).unwrap();
        // make LoRA B nonzero so the copy is observable
        pre.blocks[0].q.b.v.fill(0.01);
        let mut transferred = transfer_init(&mut pre, Stage::Pretrain, 4, 99).unwrap();
        let pre_tensors = pre.export_tensors();
        let new_tensors = transferred.export_tensors();
        for ((name, _, a), (_, _, b)) in pre_tensors.iter().zip(new_tensors.iter()) {
            if name.starts_with("head.fc") && name.ends_with(".w") {
                assert_ne!(a, b, "head tensor {} should be reinitialized", name);
            } else if !name.starts_with("head.") {
                assert_eq!(a, b, "tensor {} should be copied bitwise", name);
            }
        }
        assert!(transfer_init(&mut pre, Stage::Finetune, 2, 0).is_err());
    }

    #[test]
    fn rejects_bad_config_and_bad_geometry() {
        let mut cfg = tiny_cfg();
        cfg.n_heads = 3; // 8 % 3 != 0
        assert!(Model::<f32>::build(&cfg, 0).is_err());
        let cfg = tiny_cfg();
        let model = Model::<f32>::build(&cfg, 0).unwrap();
        let feat = Array2::<f32>::zeros((cfg.n_mels + 1, 10));
        assert!(model.forward(&feat).is_err());
    }
}
