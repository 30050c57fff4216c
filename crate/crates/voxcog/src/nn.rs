//! Dense numerical core: layers with explicit reverse-mode backward passes,
//! LoRA adaptation, and the Adam optimizer.
//!
//! Everything is generic over the element type: training runs in f32,
//! gradient checking in f64. All forward/backward passes are deterministic
//! functions of (weights, input).

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, Axis, LinalgScalar, ScalarOperand};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Element type for tensors: f32 for training, f64 for gradient checks.
pub trait Scalar:
    LinalgScalar + ScalarOperand + num_traits::Float + Send + Sync + std::fmt::Debug + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// Matrix parameter with its gradient accumulator and trainable flag.
#[derive(Debug, Clone)]
pub struct Mat<S> {
    pub v: Array2<S>,
    pub g: Array2<S>,
    pub trainable: bool,
}

impl<S: Scalar> Mat<S> {
    pub fn new(v: Array2<S>) -> Self {
        let g = Array2::zeros(v.raw_dim());
        Mat { v, g, trainable: true }
    }

    pub fn zero_grad(&mut self) {
        self.g.fill(S::zero());
    }
}

/// Vector parameter (biases, layer-norm scales).
#[derive(Debug, Clone)]
pub struct Vect<S> {
    pub v: Array1<S>,
    pub g: Array1<S>,
    pub trainable: bool,
}

impl<S: Scalar> Vect<S> {
    pub fn new(v: Array1<S>) -> Self {
        let g = Array1::zeros(v.raw_dim());
        Vect { v, g, trainable: true }
    }

    pub fn zero_grad(&mut self) {
        self.g.fill(S::zero());
    }
}

/// Borrowed view of a parameter, used by the optimizer, the checkpoint
/// writer, and the gradient checker.
pub enum ParamMut<'a, S> {
    M(&'a mut Mat<S>),
    V(&'a mut Vect<S>),
}

impl<'a, S: Scalar> ParamMut<'a, S> {
    pub fn shape(&self) -> Vec<usize> {
        match self {
            ParamMut::M(m) => m.v.shape().to_vec(),
            ParamMut::V(v) => v.v.shape().to_vec(),
        }
    }

    pub fn trainable(&self) -> bool {
        match self {
            ParamMut::M(m) => m.trainable,
            ParamMut::V(v) => v.trainable,
        }
    }

    pub fn set_trainable(&mut self, t: bool) {
        match self {
            ParamMut::M(m) => m.trainable = t,
            ParamMut::V(v) => v.trainable = t,
        }
    }

    pub fn value_slice(&mut self) -> &mut [S] {
        match self {
            ParamMut::M(m) => m.v.as_slice_mut().expect("standard layout"),
            ParamMut::V(v) => v.v.as_slice_mut().expect("standard layout"),
        }
    }

    pub fn grad_slice(&mut self) -> &mut [S] {
        match self {
            ParamMut::M(m) => m.g.as_slice_mut().expect("standard layout"),
            ParamMut::V(v) => v.g.as_slice_mut().expect("standard layout"),
        }
    }

    pub fn values(&self) -> Vec<S> {
        match self {
            ParamMut::M(m) => m.v.iter().copied().collect(),
            ParamMut::V(v) => v.v.iter().copied().collect(),
        }
    }
}

pub fn gaussian_matrix<S: Scalar>(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    std: f64,
) -> Array2<S> {
    let dist = Normal::new(0.0, std).expect("valid std");
    Array2::from_shape_fn((rows, cols), |_| S::from_f64(dist.sample(rng)))
}

/// Affine map y = x W^T + b for x of shape [T, d_in], W of [d_out, d_in].
#[derive(Debug, Clone)]
pub struct Linear<S> {
    pub w: Mat<S>,
    pub b: Vect<S>,
}

impl<S: Scalar> Linear<S> {
    /// Fan-in scaled Gaussian init, zero bias.
    pub fn init(rng: &mut ChaCha8Rng, d_out: usize, d_in: usize) -> Self {
        let std = 1.0 / (d_in as f64).sqrt();
        Linear {
            w: Mat::new(gaussian_matrix(rng, d_out, d_in, std)),
            b: Vect::new(Array1::zeros(d_out)),
        }
    }

    /// Bias-free variant. The attention key projection uses this: a key
    /// bias shifts every score in a row equally, which softmax cancels.
    pub fn init_no_bias(rng: &mut ChaCha8Rng, d_out: usize, d_in: usize) -> Self {
        let mut l = Self::init(rng, d_out, d_in);
        l.b = Vect::new(Array1::zeros(0));
        l.b.trainable = false;
        l
    }

    pub fn has_bias(&self) -> bool {
        !self.b.v.is_empty()
    }

    pub fn forward(&self, x: &Array2<S>) -> Array2<S> {
        let y = x.dot(&self.w.v.t());
        if self.has_bias() {
            y + &self.b.v
        } else {
            y
        }
    }

    /// Accumulates parameter gradients (unless frozen) and returns dx.
    pub fn backward(&mut self, x: &Array2<S>, dy: &Array2<S>) -> Array2<S> {
        if self.w.trainable {
            self.w.g.scaled_add(S::one(), &dy.t().dot(x));
        }
        if self.has_bias() && self.b.trainable {
            self.b.g.scaled_add(S::one(), &dy.sum_axis(Axis(0)));
        }
        dy.dot(&self.w.v)
    }
}

/// Linear layer with a low-rank adapter: y = x W^T + b + (alpha/r) (x A^T) B^T.
///
/// A is Gaussian(0, 0.02), B starts at zero, so a fresh adapter contributes
/// exactly nothing. The base term and the adapter term are computed
/// separately; the dense update (alpha/r) B A is never materialized.
#[derive(Debug, Clone)]
pub struct LoraLinear<S> {
    pub base: Linear<S>,
    /// [r, d_in]
    pub a: Mat<S>,
    /// [d_out, r]
    pub b: Mat<S>,
    pub rank: usize,
    pub alpha: f64,
}

impl<S: Scalar> LoraLinear<S> {
    pub fn init(
        rng: &mut ChaCha8Rng,
        d_out: usize,
        d_in: usize,
        rank: usize,
        alpha: f64,
    ) -> Self {
        let base = Linear::init(rng, d_out, d_in);
        let a = Mat::new(gaussian_matrix(rng, rank, d_in, 0.02));
        let b = Mat::new(Array2::zeros((d_out, rank)));
        LoraLinear { base, a, b, rank, alpha }
    }

    fn scale(&self) -> S {
        S::from_f64(self.alpha / self.rank as f64)
    }

    /// Returns (y, h) where h = x A^T is cached for the backward pass.
    pub fn forward(&self, x: &Array2<S>) -> (Array2<S>, Array2<S>) {
        let h = x.dot(&self.a.v.t());
        let mut y = self.base.forward(x);
        y.scaled_add(self.scale(), &h.dot(&self.b.v.t()));
        (y, h)
    }

    pub fn backward(&mut self, x: &Array2<S>, h: &Array2<S>, dy: &Array2<S>) -> Array2<S> {
        let s = self.scale();
        let dh = dy.dot(&self.b.v) * s;
        if self.b.trainable {
            self.b.g.scaled_add(s, &dy.t().dot(h));
        }
        if self.a.trainable {
            self.a.g.scaled_add(S::one(), &dh.t().dot(x));
        }
        let mut dx = self.base.backward(x, dy);
        dx.scaled_add(S::one(), &dh.dot(&self.a.v));
        dx
    }
}

/// Layer normalization over the feature axis of [T, d] inputs.
#[derive(Debug, Clone)]
pub struct LayerNorm<S> {
    pub gamma: Vect<S>,
    pub beta: Vect<S>,
    pub eps: f64,
}

pub struct LayerNormCache<S> {
    xhat: Array2<S>,
    inv_std: Array1<S>,
}

impl<S: Scalar> LayerNorm<S> {
    pub fn init(d: usize) -> Self {
        LayerNorm {
            gamma: Vect::new(Array1::from_elem(d, S::one())),
            beta: Vect::new(Array1::zeros(d)),
            eps: 1e-5,
        }
    }

    pub fn forward(&self, x: &Array2<S>) -> (Array2<S>, LayerNormCache<S>) {
        let d = x.ncols();
        let inv_d = S::from_f64(1.0 / d as f64);
        let mut xhat = x.clone();
        let mut inv_std = Array1::zeros(x.nrows());
        for (mut row, is) in xhat.rows_mut().into_iter().zip(inv_std.iter_mut()) {
            let mean = row.iter().fold(S::zero(), |a, &b| a + b) * inv_d;
            let var = row.iter().fold(S::zero(), |a, &b| a + (b - mean) * (b - mean)) * inv_d;
            let inv = S::one() / (var + S::from_f64(self.eps)).sqrt();
            row.mapv_inplace(|v| (v - mean) * inv);
            *is = inv;
        }
        let y = &xhat * &self.gamma.v + &self.beta.v;
        (y, LayerNormCache { xhat, inv_std })
    }

    pub fn backward(&mut self, cache: &LayerNormCache<S>, dy: &Array2<S>) -> Array2<S> {
        let d = dy.ncols();
        let inv_d = S::from_f64(1.0 / d as f64);
        if self.gamma.trainable {
            self.gamma.g.scaled_add(S::one(), &(dy * &cache.xhat).sum_axis(Axis(0)));
        }
        if self.beta.trainable {
            self.beta.g.scaled_add(S::one(), &dy.sum_axis(Axis(0)));
        }
        let dxhat = dy * &self.gamma.v;
        let mut dx = Array2::zeros(dy.raw_dim());
        for t in 0..dy.nrows() {
            let xh = cache.xhat.row(t);
            let dxh = dxhat.row(t);
            let sum_dxh = dxh.iter().fold(S::zero(), |a, &b| a + b);
            let sum_dxh_xh =
                dxh.iter().zip(xh.iter()).fold(S::zero(), |a, (&p, &q)| a + p * q);
            let inv = cache.inv_std[t];
            for i in 0..d {
                dx[[t, i]] =
                    inv * (dxh[i] - inv_d * sum_dxh - inv_d * xh[i] * sum_dxh_xh);
            }
        }
        dx
    }
}

const GELU_C: f64 = 0.7978845608028654; // sqrt(2/pi)
const GELU_K: f64 = 0.044715;

/// Tanh-approximation GELU, elementwise.
pub fn gelu<S: Scalar>(x: &Array2<S>) -> Array2<S> {
    let c = S::from_f64(GELU_C);
    let k = S::from_f64(GELU_K);
    let half = S::from_f64(0.5);
    x.mapv(|v| half * v * (S::one() + (c * (v + k * v * v * v)).tanh()))
}

pub fn gelu_backward<S: Scalar>(x: &Array2<S>, dy: &Array2<S>) -> Array2<S> {
    let c = S::from_f64(GELU_C);
    let k = S::from_f64(GELU_K);
    let k3 = S::from_f64(3.0 * GELU_K);
    let half = S::from_f64(0.5);
    let mut dx = x.clone();
    dx.zip_mut_with(dy, |v, &d| {
        let u = c * (*v + k * *v * *v * *v);
        let t = u.tanh();
        let grad = half * (S::one() + t)
            + half * *v * (S::one() - t * t) * c * (S::one() + k3 * *v * *v);
        *v = d * grad;
    });
    dx
}

pub fn relu<S: Scalar>(x: &Array2<S>) -> Array2<S> {
    x.mapv(|v| if v > S::zero() { v } else { S::zero() })
}

pub fn relu_backward<S: Scalar>(x: &Array2<S>, dy: &Array2<S>) -> Array2<S> {
    let mut dx = x.clone();
    dx.zip_mut_with(dy, |v, &d| *v = if *v > S::zero() { d } else { S::zero() });
    dx
}

/// 1D convolution over time with kernel 3, stride 2, padding 1, operating
/// on [T, d_in] inputs. Implemented as im2col plus one matrix multiply.
#[derive(Debug, Clone)]
pub struct Conv1dS2<S> {
    /// [d_out, 3 * d_in]
    pub w: Mat<S>,
    pub b: Vect<S>,
    pub d_in: usize,
    pub d_out: usize,
}

pub const CONV_KERNEL: usize = 3;
pub const CONV_STRIDE: usize = 2;
pub const CONV_PAD: usize = 1;

/// Output length of one stride-2 conv layer.
pub fn conv_out_len(t: usize) -> usize {
    if t + 2 * CONV_PAD < CONV_KERNEL {
        0
    } else {
        (t + 2 * CONV_PAD - CONV_KERNEL) / CONV_STRIDE + 1
    }
}

impl<S: Scalar> Conv1dS2<S> {
    pub fn init(rng: &mut ChaCha8Rng, d_out: usize, d_in: usize) -> Self {
        let fan_in = (CONV_KERNEL * d_in) as f64;
        Conv1dS2 {
            w: Mat::new(gaussian_matrix(rng, d_out, CONV_KERNEL * d_in, 1.0 / fan_in.sqrt())),
            b: Vect::new(Array1::zeros(d_out)),
            d_in,
            d_out,
        }
    }

    fn im2col(&self, x: &Array2<S>) -> Array2<S> {
        let t_in = x.nrows();
        let t_out = conv_out_len(t_in);
        let mut cols = Array2::zeros((t_out, CONV_KERNEL * self.d_in));
        for t in 0..t_out {
            for k in 0..CONV_KERNEL {
                let src = (t * CONV_STRIDE + k) as isize - CONV_PAD as isize;
                if src >= 0 && (src as usize) < t_in {
                    let src = src as usize;
                    for c in 0..self.d_in {
                        cols[[t, k * self.d_in + c]] = x[[src, c]];
                    }
                }
            }
        }
        cols
    }

    /// Returns (y, cols); the im2col matrix is cached for the backward pass.
    pub fn forward(&self, x: &Array2<S>) -> (Array2<S>, Array2<S>) {
        let cols = self.im2col(x);
        let y = cols.dot(&self.w.v.t()) + &self.b.v;
        (y, cols)
    }

    pub fn backward(
        &mut self,
        cols: &Array2<S>,
        dy: &Array2<S>,
        t_in: usize,
    ) -> Array2<S> {
        if self.w.trainable {
            self.w.g.scaled_add(S::one(), &dy.t().dot(cols));
        }
        if self.b.trainable {
            self.b.g.scaled_add(S::one(), &dy.sum_axis(Axis(0)));
        }
        let dcols = dy.dot(&self.w.v);
        let mut dx = Array2::zeros((t_in, self.d_in));
        for t in 0..dy.nrows() {
            for k in 0..CONV_KERNEL {
                let src = (t * CONV_STRIDE + k) as isize - CONV_PAD as isize;
                if src >= 0 && (src as usize) < t_in {
                    let src = src as usize;
                    for c in 0..self.d_in {
                        dx[[src, c]] = dx[[src, c]] + dcols[[t, k * self.d_in + c]];
                    }
                }
            }
        }
        dx
    }
}

/// Pre-layer-norm transformer encoder block: multi-head self-attention with
/// LoRA adapters on the query and value projections, then a GELU
/// feed-forward, both with residual connections.
#[derive(Debug, Clone)]
pub struct EncoderBlock<S> {
    pub ln1: LayerNorm<S>,
    pub q: LoraLinear<S>,
    pub k: Linear<S>,
    pub v: LoraLinear<S>,
    pub o: Linear<S>,
    pub ln2: LayerNorm<S>,
    pub ff1: Linear<S>,
    pub ff2: Linear<S>,
    pub n_heads: usize,
    pub d_model: usize,
}

pub struct BlockCache<S> {
    x: Array2<S>,
    ln1: LayerNormCache<S>,
    ln1_out: Array2<S>,
    q: Array2<S>,
    k: Array2<S>,
    v: Array2<S>,
    hq: Array2<S>,
    hv: Array2<S>,
    /// softmax attention probabilities, one [T, T] matrix per head
    probs: Vec<Array2<S>>,
    attn_concat: Array2<S>,
    ln2: LayerNormCache<S>,
    ln2_out: Array2<S>,
    ff_pre: Array2<S>,
}

impl<S: Scalar> EncoderBlock<S> {
    pub fn init(
        rng: &mut ChaCha8Rng,
        d_model: usize,
        n_heads: usize,
        ffn_mult: usize,
        lora_rank: usize,
        lora_alpha: f64,
    ) -> Self {
        assert!(d_model % n_heads == 0, "d_model must be divisible by n_heads");
        EncoderBlock {
            ln1: LayerNorm::init(d_model),
            q: LoraLinear::init(rng, d_model, d_model, lora_rank, lora_alpha),
            k: Linear::init_no_bias(rng, d_model, d_model),
            v: LoraLinear::init(rng, d_model, d_model, lora_rank, lora_alpha),
            o: Linear::init(rng, d_model, d_model),
            ln2: LayerNorm::init(d_model),
            ff1: Linear::init(rng, ffn_mult * d_model, d_model),
            ff2: Linear::init(rng, d_model, ffn_mult * d_model),
            n_heads,
            d_model,
        }
    }

    pub fn forward(&self, x: &Array2<S>) -> (Array2<S>, BlockCache<S>) {
        let t = x.nrows();
        let dh = self.d_model / self.n_heads;
        let scale = S::from_f64(1.0 / (dh as f64).sqrt());

        let (ln1_out, ln1) = self.ln1.forward(x);
        let (q, hq) = self.q.forward(&ln1_out);
        let k = self.k.forward(&ln1_out);
        let (v, hv) = self.v.forward(&ln1_out);

        let mut probs = Vec::with_capacity(self.n_heads);
        let mut attn_concat = Array2::zeros((t, self.d_model));
        for h in 0..self.n_heads {
            let cols = h * dh..(h + 1) * dh;
            let qh = q.slice(ndarray::s![.., cols.clone()]);
            let kh = k.slice(ndarray::s![.., cols.clone()]);
            let vh = v.slice(ndarray::s![.., cols.clone()]);
            let mut scores = qh.dot(&kh.t()) * scale;
            // row softmax with max subtraction
            for mut row in scores.rows_mut() {
                let max = row.iter().fold(S::neg_infinity(), |a, &b| a.max(b));
                row.mapv_inplace(|s| (s - max).exp());
                let sum = row.iter().fold(S::zero(), |a, &b| a + b);
                row.mapv_inplace(|s| s / sum);
            }
            let oh = scores.dot(&vh);
            attn_concat.slice_mut(ndarray::s![.., cols]).assign(&oh);
            probs.push(scores);
        }
        let attn_out = self.o.forward(&attn_concat);
        let y = x + &attn_out;

        let (ln2_out, ln2) = self.ln2.forward(&y);
        let ff_pre = self.ff1.forward(&ln2_out);
        let ff_act = gelu(&ff_pre);
        let ff_out = self.ff2.forward(&ff_act);
        let z = &y + &ff_out;

        (
            z,
            BlockCache {
                x: x.clone(),
                ln1,
                ln1_out,
                q,
                k,
                v,
                hq,
                hv,
                probs,
                attn_concat,
                ln2,
                ln2_out,
                ff_pre,
            },
        )
    }

    pub fn backward(&mut self, cache: &BlockCache<S>, dz: &Array2<S>) -> Array2<S> {
        let dh = self.d_model / self.n_heads;
        let scale = S::from_f64(1.0 / (dh as f64).sqrt());

        // feed-forward branch
        let ff_act = gelu(&cache.ff_pre);
        let dff_act = self.ff2.backward(&ff_act, dz);
        let dff_pre = gelu_backward(&cache.ff_pre, &dff_act);
        let dln2_out = self.ff1.backward(&cache.ln2_out, &dff_pre);
        let mut dy = self.ln2.backward(&cache.ln2, &dln2_out);
        dy.scaled_add(S::one(), dz); // residual

        // attention branch
        let dattn_concat = self.o.backward(&cache.attn_concat, &dy);
        let t = dy.nrows();
        let mut dq = Array2::zeros((t, self.d_model));
        let mut dk = Array2::zeros((t, self.d_model));
        let mut dv = Array2::zeros((t, self.d_model));
        for h in 0..self.n_heads {
            let cols = h * dh..(h + 1) * dh;
            let doh = dattn_concat.slice(ndarray::s![.., cols.clone()]);
            let qh = cache.q.slice(ndarray::s![.., cols.clone()]);
            let kh = cache.k.slice(ndarray::s![.., cols.clone()]);
            let vh = cache.v.slice(ndarray::s![.., cols.clone()]);
            let p = &cache.probs[h];

            let dvh = p.t().dot(&doh);
            let dp = doh.dot(&vh.t());
            // softmax backward: ds = p * (dp - rowsum(dp * p))
            let mut ds = dp;
            for (mut drow, prow) in ds.rows_mut().into_iter().zip(p.rows()) {
                let dot = drow
                    .iter()
                    .zip(prow.iter())
                    .fold(S::zero(), |a, (&x, &y)| a + x * y);
                for (d, &pv) in drow.iter_mut().zip(prow.iter()) {
                    *d = pv * (*d - dot);
                }
            }
            let dqh = ds.dot(&kh) * scale;
            let dkh = ds.t().dot(&qh) * scale;
            dq.slice_mut(ndarray::s![.., cols.clone()]).assign(&dqh);
            dk.slice_mut(ndarray::s![.., cols.clone()]).assign(&dkh);
            dv.slice_mut(ndarray::s![.., cols]).assign(&dvh);
        }
        let mut dln1_out = self.q.backward(&cache.ln1_out, &cache.hq, &dq);
        dln1_out.scaled_add(S::one(), &self.k.backward(&cache.ln1_out, &dk));
        dln1_out.scaled_add(S::one(), &self.v.backward(&cache.ln1_out, &cache.hv, &dv));
        let mut dx = self.ln1.backward(&cache.ln1, &dln1_out);
        dx.scaled_add(S::one(), &dy); // residual into x
        let _ = &cache.x;
        dx
    }
}

/// Sinusoidal positional encoding added to a [T, d] frame sequence.
pub fn add_positional_encoding<S: Scalar>(x: &mut Array2<S>) {
    let d = x.ncols();
    for (t, mut row) in x.rows_mut().into_iter().enumerate() {
        for i in 0..d {
            let k = i / 2;
            let angle = t as f64 / 10000f64.powf(2.0 * k as f64 / d as f64);
            let pe = if i % 2 == 0 { angle.sin() } else { angle.cos() };
            row[i] = row[i] + S::from_f64(pe);
        }
    }
}

/// Numerically stable softmax of a logit vector, in f64.
pub fn softmax_probs<S: Scalar>(logits: &Array1<S>) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b.to_f64()));
    let exps: Vec<f64> = logits.iter().map(|&l| (l.to_f64() - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Cross-entropy loss via log-sum-exp; returns (loss, dlogits).
pub fn softmax_cross_entropy<S: Scalar>(
    logits: &Array1<S>,
    target: usize,
) -> crate::Result<(S, Array1<S>)> {
    let c = logits.len();
    if target >= c {
        return Err(crate::Error::InvalidParameter(format!(
            "target {} out of range for {} classes",
            target, c
        )));
    }
    let max = logits.iter().fold(S::neg_infinity(), |a, &b| a.max(b));
    let sum_exp = logits.iter().fold(S::zero(), |a, &b| a + (b - max).exp());
    let loss = max + sum_exp.ln() - logits[target];
    let mut dlogits = logits.mapv(|l| (l - max).exp() / sum_exp);
    dlogits[target] = dlogits[target] - S::one();
    Ok((loss, dlogits))
}

/// Adam with bias correction; beta1=0.9, beta2=0.999, eps=1e-8, no weight
/// decay. Moments are keyed by parameter name.
pub struct AdamState<S> {
    m: BTreeMap<String, Vec<S>>,
    v: BTreeMap<String, Vec<S>>,
    pub t: u64,
}

impl<S: Scalar> Default for AdamState<S> {
    fn default() -> Self {
        AdamState { m: BTreeMap::new(), v: BTreeMap::new(), t: 0 }
    }
}

impl<S: Scalar> AdamState<S> {
    /// One optimizer step over named parameters. Frozen parameters are
    /// untouched and accumulate no state.
    pub fn step(&mut self, params: &mut [(String, ParamMut<'_, S>)], lr: f64) {
        self.t += 1;
        let b1 = S::from_f64(0.9);
        let b2 = S::from_f64(0.999);
        let eps = S::from_f64(1e-8);
        let lr = S::from_f64(lr);
        let bc1 = S::one() - S::from_f64(0.9f64.powi(self.t as i32));
        let bc2 = S::one() - S::from_f64(0.999f64.powi(self.t as i32));
        for (name, p) in params.iter_mut() {
            if !p.trainable() {
                continue;
            }
            let n = p.values().len();
            let m = self.m.entry(name.clone()).or_insert_with(|| vec![S::zero(); n]);
            let v = self.v.entry(name.clone()).or_insert_with(|| vec![S::zero(); n]);
            let grads: Vec<S> = p.grad_slice().to_vec();
            let vals = p.value_slice();
            for i in 0..n {
                let g = grads[i];
                m[i] = b1 * m[i] + (S::one() - b1) * g;
                v[i] = b2 * v[i] + (S::one() - b2) * g * g;
                let mhat = m[i] / bc1;
                let vhat = v[i] / bc2;
                vals[i] = vals[i] - lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }
}
