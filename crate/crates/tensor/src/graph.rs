//! Recorded computation graph with reverse-mode differentiation.
//!
//! Operations append nodes in execution order; [`Graph::backward`] walks the
//! record once in reverse, summing a contribution into each input for every
//! consumer. A value used by k consumers therefore accumulates k gradient
//! terms.

use crate::error::{Result, TensorError};
use crate::ops::{conv, pool};
use crate::tensor::{Element, Tensor};

/// Handle to a node in a [`Graph`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Var(usize);

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Conv2d { input: Var, weight: Var, bias: Var, stride: usize, pad: usize },
    ConvTranspose2d { input: Var, weight: Var, bias: Var, stride: usize, pad: usize },
    MaxPool2d { input: Var, argmax: Vec<usize> },
    AvgPool2d { input: Var, k: usize, stride: usize },
    Linear { input: Var, weight: Var, bias: Var },
    Relu { input: Var },
    Sigmoid { input: Var },
    Tanh { input: Var },
    Add { lhs: Var, rhs: Var },
    Mul { lhs: Var, rhs: Var },
    MulScalar { input: Var, factor: f64 },
    AddScalar { input: Var },
    ClipMin { input: Var, floor: f64 },
    ConcatAxis1 { lhs: Var, rhs: Var },
    SliceAxis1 { input: Var, from: usize, to: usize },
    Reshape { input: Var },
    Softmax { input: Var, axis: usize },
    Sum { input: Var },
    ReduceMin { input: Var, arg: usize },
    ReduceMax { input: Var, arg: usize },
    SubBroadcast { lhs: Var, scalar: Var },
    DivBroadcast { lhs: Var, scalar: Var },
    TileSpatial { input: Var },
    MulChannelBroadcast { lhs: Var, rhs: Var },
    MseLoss { pred: Var, target: Var },
    BceWithLogit { logit: Var, label: Var },
}

struct Node<T> {
    value: Tensor<T>,
    grad: Option<Vec<T>>,
    op: Op,
    needs_grad: bool,
}

/// Single-threaded forward/backward tape. Distinct graphs may run on
/// distinct threads concurrently.
pub struct Graph<T: Element> {
    nodes: Vec<Node<T>>,
}

#[inline]
fn fl<T: Element>(v: f64) -> T {
    T::from_f64(v)
}

impl<T: Element> Default for Graph<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Element> Graph<T> {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Record an input that does not track gradients.
    pub fn leaf(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// Record a trainable input; `backward` will populate its gradient.
    pub fn param(&mut self, value: Tensor<T>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    /// Gradient accumulated for `v` by the last `backward` call.
    pub fn grad(&self, v: Var) -> Option<Tensor<T>> {
        let node = &self.nodes[v.0];
        node.grad.as_ref().map(|g| {
            Tensor::new(node.value.shape().to_vec(), g.clone()).expect("grad shape tracks value")
        })
    }

    fn push(&mut self, value: Tensor<T>, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            grad: None,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].needs_grad)
    }

    fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    fn data(&self, v: Var) -> &[T] {
        self.nodes[v.0].value.data()
    }

    // ---- convolution family ----------------------------------------------

    /// Cross-correlation of `input [B,Cin,H,W]` with `weight [Cout,Cin,kh,kw]`
    /// plus `bias [Cout]`.
    pub fn conv2d(&mut self, input: Var, weight: Var, bias: Var, stride: usize, pad: usize) -> Result<Var> {
        let (xs, ws, bs) = (self.shape(input), self.shape(weight), self.shape(bias));
        if xs.len() != 4 || ws.len() != 4 || bs.len() != 1 {
            return Err(TensorError::ShapeMismatch(format!(
                "conv2d expects input rank 4, weight rank 4, bias rank 1; got {xs:?}, {ws:?}, {bs:?}"
            )));
        }
        if xs[1] != ws[1] || ws[0] != bs[0] {
            return Err(TensorError::ShapeMismatch(format!(
                "conv2d channel mismatch: input {xs:?} vs weight {ws:?} vs bias {bs:?}"
            )));
        }
        let (batch, cin, h, w) = (xs[0], xs[1], xs[2], xs[3]);
        let (cout, kh, kw) = (ws[0], ws[2], ws[3]);
        let oh = conv::conv_out_extent(h, kh, stride, pad)?;
        let ow = conv::conv_out_extent(w, kw, stride, pad)?;

        let mut out = vec![T::ZERO; batch * cout * oh * ow];
        // bias fill, then accumulate the correlation on top
        for b in 0..batch {
            for co in 0..cout {
                let bv = self.data(bias)[co];
                let base = ((b * cout + co) * oh) * ow;
                out[base..base + oh * ow].fill(bv);
            }
        }
        conv::gather(
            self.data(input),
            (batch, cin, h, w),
            self.data(weight),
            (kh, kw),
            &mut out,
            (cout, oh, ow),
            stride,
            pad,
        );
        let needs = self.needs(&[input, weight, bias]);
        let value = Tensor::new(vec![batch, cout, oh, ow], out)?;
        Ok(self.push(value, Op::Conv2d { input, weight, bias, stride, pad }, needs))
    }

    /// Transposed convolution: `input [B,Cin,H,W]`, `weight [Cin,Cout,kh,kw]`,
    /// `bias [Cout]`. Forward equals the input-gradient of `conv2d` with the
    /// same weight.
    pub fn conv_transpose2d(
        &mut self,
        input: Var,
        weight: Var,
        bias: Var,
        stride: usize,
        pad: usize,
    ) -> Result<Var> {
        let (xs, ws, bs) = (self.shape(input), self.shape(weight), self.shape(bias));
        if xs.len() != 4 || ws.len() != 4 || bs.len() != 1 {
            return Err(TensorError::ShapeMismatch(format!(
                "conv_transpose2d expects input rank 4, weight rank 4, bias rank 1; got {xs:?}, {ws:?}, {bs:?}"
            )));
        }
        if xs[1] != ws[0] || ws[1] != bs[0] {
            return Err(TensorError::ShapeMismatch(format!(
                "conv_transpose2d channel mismatch: input {xs:?} vs weight {ws:?} vs bias {bs:?}"
            )));
        }
        let (batch, cin, h, w) = (xs[0], xs[1], xs[2], xs[3]);
        let (cout, kh, kw) = (ws[1], ws[2], ws[3]);
        let oh = conv::conv_transpose_out_extent(h, kh, stride, pad)?;
        let ow = conv::conv_transpose_out_extent(w, kw, stride, pad)?;

        let mut out = vec![T::ZERO; batch * cout * oh * ow];
        for b in 0..batch {
            for co in 0..cout {
                let bv = self.data(bias)[co];
                let base = ((b * cout + co) * oh) * ow;
                out[base..base + oh * ow].fill(bv);
            }
        }
        conv::scatter(
            self.data(input),
            (batch, cin, h, w),
            self.data(weight),
            (kh, kw),
            &mut out,
            (cout, oh, ow),
            stride,
            pad,
        );
        let needs = self.needs(&[input, weight, bias]);
        let value = Tensor::new(vec![batch, cout, oh, ow], out)?;
        Ok(self.push(
            value,
            Op::ConvTranspose2d { input, weight, bias, stride, pad },
            needs,
        ))
    }

    pub fn max_pool2d(&mut self, input: Var, k: usize, stride: usize) -> Result<Var> {
        let xs = self.shape(input);
        if xs.len() != 4 {
            return Err(TensorError::ShapeMismatch(format!(
                "max_pool2d expects rank 4, got {xs:?}"
            )));
        }
        if k > xs[2] || k > xs[3] {
            return Err(TensorError::ShapeMismatch(format!(
                "pool window {k} exceeds spatial extents of {xs:?}"
            )));
        }
        let dims = (xs[0], xs[1], xs[2], xs[3]);
        let oh = (xs[2] - k) / stride + 1;
        let ow = (xs[3] - k) / stride + 1;
        let (out, argmax) = pool::max_pool(self.data(input), dims, k, stride, (oh, ow));
        let needs = self.needs(&[input]);
        let value = Tensor::new(vec![dims.0, dims.1, oh, ow], out)?;
        Ok(self.push(value, Op::MaxPool2d { input, argmax }, needs))
    }

    pub fn avg_pool2d(&mut self, input: Var, k: usize, stride: usize) -> Result<Var> {
        let xs = self.shape(input);
        if xs.len() != 4 {
            return Err(TensorError::ShapeMismatch(format!(
                "avg_pool2d expects rank 4, got {xs:?}"
            )));
        }
        if k > xs[2] || k > xs[3] {
            return Err(TensorError::ShapeMismatch(format!(
                "pool window {k} exceeds spatial extents of {xs:?}"
            )));
        }
        let dims = (xs[0], xs[1], xs[2], xs[3]);
        let oh = (xs[2] - k) / stride + 1;
        let ow = (xs[3] - k) / stride + 1;
        let out = pool::avg_pool(self.data(input), dims, k, stride, (oh, ow));
        let needs = self.needs(&[input]);
        let value = Tensor::new(vec![dims.0, dims.1, oh, ow], out)?;
        Ok(self.push(value, Op::AvgPool2d { input, k, stride }, needs))
    }

    // ---- dense -------------------------------------------------------------

    /// Affine map: `input [B,N]`, `weight [M,N]`, `bias [M]` -> `[B,M]`.
    pub fn linear(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let (xs, ws, bs) = (self.shape(input), self.shape(weight), self.shape(bias));
        if xs.len() != 2 || ws.len() != 2 || bs.len() != 1 || xs[1] != ws[1] || ws[0] != bs[0] {
            return Err(TensorError::ShapeMismatch(format!(
                "linear expects input [B,N], weight [M,N], bias [M]; got {xs:?}, {ws:?}, {bs:?}"
            )));
        }
        let (batch, n, m) = (xs[0], xs[1], ws[0]);
        let x = self.data(input);
        let w = self.data(weight);
        let bv = self.data(bias);
        let mut out = vec![T::ZERO; batch * m];
        for b in 0..batch {
            let x_row = &x[b * n..(b + 1) * n];
            for j in 0..m {
                let w_row = &w[j * n..(j + 1) * n];
                let mut acc = bv[j];
                for (xv, wv) in x_row.iter().zip(w_row) {
                    acc += *xv * *wv;
                }
                out[b * m + j] = acc;
            }
        }
        let needs = self.needs(&[input, weight, bias]);
        let value = Tensor::new(vec![batch, m], out)?;
        Ok(self.push(value, Op::Linear { input, weight, bias }, needs))
    }

    // ---- pointwise ---------------------------------------------------------

    pub fn relu(&mut self, input: Var) -> Var {
        let value = self.nodes[input.0].value.map(|v| v.max(T::ZERO));
        let needs = self.needs(&[input]);
        self.push(value, Op::Relu { input }, needs)
    }

    pub fn sigmoid(&mut self, input: Var) -> Var {
        let value = self.nodes[input.0]
            .value
            .map(|v| T::ONE / (T::ONE + (-v).exp()));
        let needs = self.needs(&[input]);
        self.push(value, Op::Sigmoid { input }, needs)
    }

    pub fn tanh(&mut self, input: Var) -> Var {
        let value = self.nodes[input.0].value.map(|v| v.tanh());
        let needs = self.needs(&[input]);
        self.push(value, Op::Tanh { input }, needs)
    }

    pub fn add(&mut self, lhs: Var, rhs: Var) -> Result<Var> {
        self.check_same_shape("add", lhs, rhs)?;
        let data = self
            .data(lhs)
            .iter()
            .zip(self.data(rhs))
            .map(|(&a, &b)| a + b)
            .collect();
        let value = Tensor::new(self.shape(lhs).to_vec(), data)?;
        let needs = self.needs(&[lhs, rhs]);
        Ok(self.push(value, Op::Add { lhs, rhs }, needs))
    }

    pub fn mul(&mut self, lhs: Var, rhs: Var) -> Result<Var> {
        self.check_same_shape("mul", lhs, rhs)?;
        let data = self
            .data(lhs)
            .iter()
            .zip(self.data(rhs))
            .map(|(&a, &b)| a * b)
            .collect();
        let value = Tensor::new(self.shape(lhs).to_vec(), data)?;
        let needs = self.needs(&[lhs, rhs]);
        Ok(self.push(value, Op::Mul { lhs, rhs }, needs))
    }

    /// Elementwise difference, composed from `mul_scalar` and `add`.
    pub fn sub(&mut self, lhs: Var, rhs: Var) -> Result<Var> {
        let neg = self.mul_scalar(rhs, -1.0);
        self.add(lhs, neg)
    }

    pub fn mul_scalar(&mut self, input: Var, factor: f64) -> Var {
        let f = fl::<T>(factor);
        let value = self.nodes[input.0].value.map(|v| v * f);
        let needs = self.needs(&[input]);
        self.push(value, Op::MulScalar { input, factor }, needs)
    }

    pub fn add_scalar(&mut self, input: Var, offset: f64) -> Var {
        let o = fl::<T>(offset);
        let value = self.nodes[input.0].value.map(|v| v + o);
        let needs = self.needs(&[input]);
        self.push(value, Op::AddScalar { input }, needs)
    }

    pub fn sub_scalar(&mut self, input: Var, offset: f64) -> Var {
        self.add_scalar(input, -offset)
    }

    /// Elementwise `max(x, floor)`; subgradient is 1 at the kink.
    pub fn clip_min(&mut self, input: Var, floor: f64) -> Var {
        let f = fl::<T>(floor);
        let value = self.nodes[input.0].value.map(|v| v.max(f));
        let needs = self.needs(&[input]);
        self.push(value, Op::ClipMin { input, floor }, needs)
    }

    // ---- shape -------------------------------------------------------------

    /// Concatenate along axis 1 (the channel axis for image-like tensors).
    pub fn concat_channels(&mut self, lhs: Var, rhs: Var) -> Result<Var> {
        let (ls, rs) = (self.shape(lhs), self.shape(rhs));
        let compatible = ls.len() == rs.len()
            && ls.len() >= 2
            && ls[0] == rs[0]
            && ls[2..] == rs[2..];
        if !compatible {
            return Err(TensorError::ShapeMismatch(format!(
                "concat_channels requires equal non-channel extents, got {ls:?} and {rs:?}"
            )));
        }
        let outer = ls[0];
        let inner: usize = ls[2..].iter().product();
        let (lc, rc) = (ls[1], rs[1]);
        let mut shape = ls.to_vec();
        shape[1] = lc + rc;
        let l = self.data(lhs);
        let r = self.data(rhs);
        let mut out = Vec::with_capacity(l.len() + r.len());
        for b in 0..outer {
            out.extend_from_slice(&l[b * lc * inner..(b + 1) * lc * inner]);
            out.extend_from_slice(&r[b * rc * inner..(b + 1) * rc * inner]);
        }
        let needs = self.needs(&[lhs, rhs]);
        let value = Tensor::new(shape, out)?;
        Ok(self.push(value, Op::ConcatAxis1 { lhs, rhs }, needs))
    }

    /// Take channels `[from, to)` along axis 1.
    pub fn slice_channels(&mut self, input: Var, from: usize, to: usize) -> Result<Var> {
        let xs = self.shape(input);
        if xs.len() < 2 || from >= to || to > xs[1] {
            return Err(TensorError::ShapeMismatch(format!(
                "slice_channels [{from},{to}) invalid for shape {xs:?}"
            )));
        }
        let outer = xs[0];
        let inner: usize = xs[2..].iter().product();
        let c = xs[1];
        let mut shape = xs.to_vec();
        shape[1] = to - from;
        let x = self.data(input);
        let mut out = Vec::with_capacity(outer * (to - from) * inner);
        for b in 0..outer {
            let base = (b * c + from) * inner;
            out.extend_from_slice(&x[base..base + (to - from) * inner]);
        }
        let needs = self.needs(&[input]);
        let value = Tensor::new(shape, out)?;
        Ok(self.push(value, Op::SliceAxis1 { input, from, to }, needs))
    }

    pub fn reshape(&mut self, input: Var, shape: Vec<usize>) -> Result<Var> {
        let value = self.nodes[input.0].value.clone().reshaped(shape)?;
        let needs = self.needs(&[input]);
        Ok(self.push(value, Op::Reshape { input }, needs))
    }

    /// Collapse all axes after the first: `[B, ...] -> [B, rest]`.
    pub fn flatten(&mut self, input: Var) -> Result<Var> {
        let xs = self.shape(input);
        if xs.is_empty() {
            return Err(TensorError::ShapeMismatch("flatten of rank-0 tensor".into()));
        }
        let b = xs[0];
        let rest: usize = xs[1..].iter().product();
        self.reshape(input, vec![b, rest])
    }

    pub fn softmax(&mut self, input: Var, axis: usize) -> Result<Var> {
        let xs = self.shape(input);
        if axis >= xs.len() {
            return Err(TensorError::InvalidArgument(format!(
                "softmax axis {axis} out of range for shape {xs:?}"
            )));
        }
        let lane = xs[axis];
        let inner: usize = xs[axis + 1..].iter().product();
        let outer: usize = xs[..axis].iter().product();
        let x = self.data(input);
        let mut out = vec![T::ZERO; x.len()];
        for o in 0..outer {
            for i in 0..inner {
                let at = |j: usize| (o * lane + j) * inner + i;
                let mut m = x[at(0)];
                for j in 1..lane {
                    m = m.max(x[at(j)]);
                }
                let mut denom = T::ZERO;
                for j in 0..lane {
                    let e = (x[at(j)] - m).exp();
                    out[at(j)] = e;
                    denom += e;
                }
                for j in 0..lane {
                    out[at(j)] = out[at(j)] / denom;
                }
            }
        }
        let needs = self.needs(&[input]);
        let value = Tensor::new(xs.to_vec(), out)?;
        Ok(self.push(value, Op::Softmax { input, axis }, needs))
    }

    // ---- reductions ----------------------------------------------------------

    /// Sum of all elements as a one-element tensor.
    pub fn sum(&mut self, input: Var) -> Var {
        let mut acc = T::ZERO;
        for &v in self.data(input) {
            acc += v;
        }
        let needs = self.needs(&[input]);
        self.push(Tensor::scalar(acc), Op::Sum { input }, needs)
    }

    /// Minimum over all elements; gradient routes to the first minimum in
    /// row-major order.
    pub fn reduce_min(&mut self, input: Var) -> Var {
        let x = self.data(input);
        let mut arg = 0;
        for (i, &v) in x.iter().enumerate() {
            if v < x[arg] {
                arg = i;
            }
        }
        let value = Tensor::scalar(x[arg]);
        let needs = self.needs(&[input]);
        self.push(value, Op::ReduceMin { input, arg }, needs)
    }

    pub fn reduce_max(&mut self, input: Var) -> Var {
        let x = self.data(input);
        let mut arg = 0;
        for (i, &v) in x.iter().enumerate() {
            if v > x[arg] {
                arg = i;
            }
        }
        let value = Tensor::scalar(x[arg]);
        let needs = self.needs(&[input]);
        self.push(value, Op::ReduceMax { input, arg }, needs)
    }

    /// `lhs - s` with `s` a one-element tensor broadcast over `lhs`.
    pub fn sub_broadcast(&mut self, lhs: Var, scalar: Var) -> Result<Var> {
        self.check_scalar("sub_broadcast", scalar)?;
        let s = self.data(scalar)[0];
        let value = self.nodes[lhs.0].value.map(|v| v - s);
        let needs = self.needs(&[lhs, scalar]);
        Ok(self.push(value, Op::SubBroadcast { lhs, scalar }, needs))
    }

    /// `lhs / s` with `s` a one-element tensor broadcast over `lhs`.
    pub fn div_broadcast(&mut self, lhs: Var, scalar: Var) -> Result<Var> {
        self.check_scalar("div_broadcast", scalar)?;
        let s = self.data(scalar)[0];
        if s.to_f64() == 0.0 {
            return Err(TensorError::InvalidArgument(
                "div_broadcast by exactly zero".into(),
            ));
        }
        let value = self.nodes[lhs.0].value.map(|v| v / s);
        let needs = self.needs(&[lhs, scalar]);
        Ok(self.push(value, Op::DivBroadcast { lhs, scalar }, needs))
    }

    /// Repeat a `[B, C]` feature at every cell of an `h x w` grid.
    pub fn tile_spatial(&mut self, input: Var, h: usize, w: usize) -> Result<Var> {
        let xs = self.shape(input);
        if xs.len() != 2 {
            return Err(TensorError::ShapeMismatch(format!(
                "tile_spatial expects [B,C], got {xs:?}"
            )));
        }
        let (b, c) = (xs[0], xs[1]);
        let x = self.data(input);
        let mut out = Vec::with_capacity(b * c * h * w);
        for bi in 0..b {
            for ci in 0..c {
                let v = x[bi * c + ci];
                out.extend(std::iter::repeat(v).take(h * w));
            }
        }
        let needs = self.needs(&[input]);
        let value = Tensor::new(vec![b, c, h, w], out)?;
        Ok(self.push(value, Op::TileSpatial { input }, needs))
    }

    /// `lhs [B,C,H,W] * rhs [B,1,H,W]`, the map broadcast over channels.
    pub fn mul_channel_broadcast(&mut self, lhs: Var, rhs: Var) -> Result<Var> {
        let (ls, rs) = (self.shape(lhs), self.shape(rhs));
        let ok = ls.len() == 4
            && rs.len() == 4
            && rs[1] == 1
            && ls[0] == rs[0]
            && ls[2] == rs[2]
            && ls[3] == rs[3];
        if !ok {
            return Err(TensorError::ShapeMismatch(format!(
                "mul_channel_broadcast expects [B,C,H,W] and [B,1,H,W], got {ls:?} and {rs:?}"
            )));
        }
        let (b, c, h, w) = (ls[0], ls[1], ls[2], ls[3]);
        let plane = h * w;
        let l = self.data(lhs);
        let r = self.data(rhs);
        let mut out = vec![T::ZERO; l.len()];
        for bi in 0..b {
            let m = &r[bi * plane..(bi + 1) * plane];
            for ci in 0..c {
                let base = (bi * c + ci) * plane;
                for p in 0..plane {
                    out[base + p] = l[base + p] * m[p];
                }
            }
        }
        let needs = self.needs(&[lhs, rhs]);
        let value = Tensor::new(ls.to_vec(), out)?;
        Ok(self.push(value, Op::MulChannelBroadcast { lhs, rhs }, needs))
    }

    // ---- losses ----------------------------------------------------------

    /// Mean squared error, reduced over all elements.
    pub fn mse_loss(&mut self, pred: Var, target: Var) -> Result<Var> {
        self.check_same_shape("mse_loss", pred, target)?;
        let p = self.data(pred);
        let t = self.data(target);
        let inv_n = 1.0 / p.len() as f64;
        let mut acc = 0.0;
        for (&pv, &tv) in p.iter().zip(t) {
            let d = (pv - tv).to_f64();
            acc += d * d;
        }
        let value = Tensor::scalar(fl::<T>(acc * inv_n));
        let needs = self.needs(&[pred, target]);
        Ok(self.push(value, Op::MseLoss { pred, target }, needs))
    }

    /// Mean binary cross entropy from logits, stable for |logit| <= 50.
    /// Labels must be exactly 0 or 1.
    pub fn bce_with_logit_loss(&mut self, logit: Var, label: Var) -> Result<Var> {
        self.check_same_shape("bce_with_logit_loss", logit, label)?;
        for &y in self.data(label) {
            let y = y.to_f64();
            if y != 0.0 && y != 1.0 {
                return Err(TensorError::InvalidArgument(format!(
                    "bce label must be exactly 0 or 1, got {y}"
                )));
            }
        }
        let z = self.data(logit);
        let y = self.data(label);
        let inv_n = 1.0 / z.len() as f64;
        let mut acc = 0.0;
        for (&zv, &yv) in z.iter().zip(y) {
            let zf = zv.to_f64();
            acc += zf.max(0.0) - zf * yv.to_f64() + (-zf.abs()).exp().ln_1p();
        }
        let value = Tensor::scalar(fl::<T>(acc * inv_n));
        let needs = self.needs(&[logit, label]);
        Ok(self.push(value, Op::BceWithLogit { logit, label }, needs))
    }

    // ---- backward ----------------------------------------------------------

    /// Populate gradients of every tracked node reachable from `loss`.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.nodes[loss.0].value.numel() != 1 {
            return Err(TensorError::NonScalarLoss(
                self.nodes[loss.0].value.shape().to_vec(),
            ));
        }
        self.nodes[loss.0].grad = Some(vec![T::ONE]);
        for id in (0..=loss.0).rev() {
            if !self.nodes[id].needs_grad || self.nodes[id].grad.is_none() {
                continue;
            }
            let op = self.nodes[id].op.clone();
            let gy = self.nodes[id].grad.clone().expect("checked above");
            self.propagate(id, &op, &gy);
        }
        Ok(())
    }

    fn accumulate(&mut self, v: Var, contrib: impl Fn(usize) -> T) {
        let node = &mut self.nodes[v.0];
        if !node.needs_grad {
            return;
        }
        let n = node.value.numel();
        let g = node.grad.get_or_insert_with(|| vec![T::ZERO; n]);
        for (i, gv) in g.iter_mut().enumerate() {
            *gv += contrib(i);
        }
    }

    fn accumulate_vec(&mut self, v: Var, contrib: Vec<T>) {
        let node = &mut self.nodes[v.0];
        if !node.needs_grad {
            return;
        }
        match &mut node.grad {
            Some(g) => {
                for (gv, c) in g.iter_mut().zip(contrib) {
                    *gv += c;
                }
            }
            None => node.grad = Some(contrib),
        }
    }

    fn propagate(&mut self, id: usize, op: &Op, gy: &[T]) {
        match *op {
            Op::Leaf => {}
            Op::Conv2d { input, weight, bias, stride, pad } => {
                let xs: Vec<usize> = self.shape(input).to_vec();
                let ws: Vec<usize> = self.shape(weight).to_vec();
                let os: Vec<usize> = self.nodes[id].value.shape().to_vec();
                let (batch, cin, h, w) = (xs[0], xs[1], xs[2], xs[3]);
                let (cout, kh, kw) = (ws[0], ws[2], ws[3]);
                let (oh, ow) = (os[2], os[3]);
                if self.nodes[input.0].needs_grad {
                    let mut gx = vec![T::ZERO; batch * cin * h * w];
                    conv::scatter(
                        gy,
                        (batch, cout, oh, ow),
                        self.data(weight),
                        (kh, kw),
                        &mut gx,
                        (cin, h, w),
                        stride,
                        pad,
                    );
                    self.accumulate_vec(input, gx);
                }
                if self.nodes[weight.0].needs_grad {
                    let mut gw = vec![T::ZERO; cout * cin * kh * kw];
                    conv::weight_grad(
                        gy,
                        (batch, cout, oh, ow),
                        self.data(input),
                        (cin, h, w),
                        &mut gw,
                        (kh, kw),
                        stride,
                        pad,
                    );
                    self.accumulate_vec(weight, gw);
                }
                if self.nodes[bias.0].needs_grad {
                    let mut gb = vec![T::ZERO; cout];
                    for b in 0..batch {
                        for co in 0..cout {
                            let base = ((b * cout + co) * oh) * ow;
                            for &g in &gy[base..base + oh * ow] {
                                gb[co] += g;
                            }
                        }
                    }
                    self.accumulate_vec(bias, gb);
                }
            }
            Op::ConvTranspose2d { input, weight, bias, stride, pad } => {
                let xs: Vec<usize> = self.shape(input).to_vec();
                let ws: Vec<usize> = self.shape(weight).to_vec();
                let os: Vec<usize> = self.nodes[id].value.shape().to_vec();
                let (batch, cin, h, w) = (xs[0], xs[1], xs[2], xs[3]);
                let (cout, kh, kw) = (ws[1], ws[2], ws[3]);
                let (oh, ow) = (os[2], os[3]);
                if self.nodes[input.0].needs_grad {
                    let mut gx = vec![T::ZERO; batch * cin * h * w];
                    conv::gather(
                        gy,
                        (batch, cout, oh, ow),
                        self.data(weight),
                        (kh, kw),
                        &mut gx,
                        (cin, h, w),
                        stride,
                        pad,
                    );
                    self.accumulate_vec(input, gx);
                }
                if self.nodes[weight.0].needs_grad {
                    let mut gw = vec![T::ZERO; cin * cout * kh * kw];
                    conv::weight_grad(
                        self.data(input),
                        (batch, cin, h, w),
                        gy,
                        (cout, oh, ow),
                        &mut gw,
                        (kh, kw),
                        stride,
                        pad,
                    );
                    self.accumulate_vec(weight, gw);
                }
                if self.nodes[bias.0].needs_grad {
                    let mut gb = vec![T::ZERO; cout];
                    for b in 0..batch {
                        for co in 0..cout {
                            let base = ((b * cout + co) * oh) * ow;
                            for &g in &gy[base..base + oh * ow] {
                                gb[co] += g;
                            }
                        }
                    }
                    self.accumulate_vec(bias, gb);
                }
            }
            Op::MaxPool2d { input, ref argmax, .. } => {
                let n = self.nodes[input.0].value.numel();
                let mut gx = vec![T::ZERO; n];
                for (o, &src) in argmax.iter().enumerate() {
                    gx[src] += gy[o];
                }
                self.accumulate_vec(input, gx);
            }
            Op::AvgPool2d { input, k, stride } => {
                let xs: Vec<usize> = self.shape(input).to_vec();
                let os: Vec<usize> = self.nodes[id].value.shape().to_vec();
                let mut gx = vec![T::ZERO; self.nodes[input.0].value.numel()];
                pool::avg_pool_backward(
                    gy,
                    (xs[0], xs[1], xs[2], xs[3]),
                    k,
                    stride,
                    (os[2], os[3]),
                    &mut gx,
                );
                self.accumulate_vec(input, gx);
            }
            Op::Linear { input, weight, bias } => {
                let xs: Vec<usize> = self.shape(input).to_vec();
                let (batch, n) = (xs[0], xs[1]);
                let m = self.shape(weight)[0];
                if self.nodes[input.0].needs_grad {
                    let w = self.data(weight);
                    let mut gx = vec![T::ZERO; batch * n];
                    for b in 0..batch {
                        for j in 0..m {
                            let g = gy[b * m + j];
                            let w_row = &w[j * n..(j + 1) * n];
                            let gx_row = &mut gx[b * n..(b + 1) * n];
                            for (gxv, &wv) in gx_row.iter_mut().zip(w_row) {
                                *gxv += g * wv;
                            }
                        }
                    }
                    self.accumulate_vec(input, gx);
                }
                if self.nodes[weight.0].needs_grad {
                    let x = self.data(input);
                    let mut gw = vec![T::ZERO; m * n];
                    for b in 0..batch {
                        let x_row = &x[b * n..(b + 1) * n];
                        for j in 0..m {
                            let g = gy[b * m + j];
                            let gw_row = &mut gw[j * n..(j + 1) * n];
                            for (gwv, &xv) in gw_row.iter_mut().zip(x_row) {
                                *gwv += g * xv;
                            }
                        }
                    }
                    self.accumulate_vec(weight, gw);
                }
                if self.nodes[bias.0].needs_grad {
                    let mut gb = vec![T::ZERO; m];
                    for b in 0..batch {
                        for j in 0..m {
                            gb[j] += gy[b * m + j];
                        }
                    }
                    self.accumulate_vec(bias, gb);
                }
            }
            Op::Relu { input } => {
                let x = self.data(input);
                let contrib: Vec<T> = gy
                    .iter()
                    .zip(x)
                    .map(|(&g, &v)| if v > T::ZERO { g } else { T::ZERO })
                    .collect();
                self.accumulate_vec(input, contrib);
            }
            Op::Sigmoid { input } => {
                let y = self.nodes[id].value.data();
                let contrib: Vec<T> = gy
                    .iter()
                    .zip(y)
                    .map(|(&g, &s)| g * s * (T::ONE - s))
                    .collect();
                self.accumulate_vec(input, contrib);
            }
            Op::Tanh { input } => {
                let y = self.nodes[id].value.data();
                let contrib: Vec<T> = gy
                    .iter()
                    .zip(y)
                    .map(|(&g, &t)| g * (T::ONE - t * t))
                    .collect();
                self.accumulate_vec(input, contrib);
            }
            Op::Add { lhs, rhs } => {
                self.accumulate_vec(lhs, gy.to_vec());
                self.accumulate_vec(rhs, gy.to_vec());
            }
            Op::Mul { lhs, rhs } => {
                if self.nodes[lhs.0].needs_grad {
                    let r = self.data(rhs);
                    let contrib: Vec<T> = gy.iter().zip(r).map(|(&g, &v)| g * v).collect();
                    self.accumulate_vec(lhs, contrib);
                }
                if self.nodes[rhs.0].needs_grad {
                    let l = self.data(lhs);
                    let contrib: Vec<T> = gy.iter().zip(l).map(|(&g, &v)| g * v).collect();
                    self.accumulate_vec(rhs, contrib);
                }
            }
            Op::MulScalar { input, factor } => {
                let f = fl::<T>(factor);
                let contrib: Vec<T> = gy.iter().map(|&g| g * f).collect();
                self.accumulate_vec(input, contrib);
            }
            Op::AddScalar { input } => {
                self.accumulate_vec(input, gy.to_vec());
            }
            Op::ClipMin { input, floor } => {
                let f = fl::<T>(floor);
                let x = self.data(input);
                let contrib: Vec<T> = gy
                    .iter()
                    .zip(x)
                    .map(|(&g, &v)| if v >= f { g } else { T::ZERO })
                    .collect();
                self.accumulate_vec(input, contrib);
            }
            Op::ConcatAxis1 { lhs, rhs } => {
                let ls: Vec<usize> = self.shape(lhs).to_vec();
                let rs: Vec<usize> = self.shape(rhs).to_vec();
                let outer = ls[0];
                let inner: usize = ls[2..].iter().product();
                let (lc, rc) = (ls[1], rs[1]);
                let mut gl = Vec::with_capacity(outer * lc * inner);
                let mut gr = Vec::with_capacity(outer * rc * inner);
                for b in 0..outer {
                    let base = b * (lc + rc) * inner;
                    gl.extend_from_slice(&gy[base..base + lc * inner]);
                    gr.extend_from_slice(&gy[base + lc * inner..base + (lc + rc) * inner]);
                }
                self.accumulate_vec(lhs, gl);
                self.accumulate_vec(rhs, gr);
            }
            Op::SliceAxis1 { input, from, to } => {
                let xs: Vec<usize> = self.shape(input).to_vec();
                let outer = xs[0];
                let inner: usize = xs[2..].iter().product();
                let c = xs[1];
                let mut gx = vec![T::ZERO; self.nodes[input.0].value.numel()];
                let width = (to - from) * inner;
                for b in 0..outer {
                    let dst = (b * c + from) * inner;
                    let src = b * width;
                    for i in 0..width {
                        gx[dst + i] += gy[src + i];
                    }
                }
                self.accumulate_vec(input, gx);
            }
            Op::Reshape { input } => {
                self.accumulate_vec(input, gy.to_vec());
            }
            Op::Softmax { input, axis } => {
                let xs: Vec<usize> = self.shape(input).to_vec();
                let lane = xs[axis];
                let inner: usize = xs[axis + 1..].iter().product();
                let outer: usize = xs[..axis].iter().product();
                let y = self.nodes[id].value.data();
                let mut gx = vec![T::ZERO; y.len()];
                for o in 0..outer {
                    for i in 0..inner {
                        let at = |j: usize| (o * lane + j) * inner + i;
                        let mut dot = T::ZERO;
                        for j in 0..lane {
                            dot += gy[at(j)] * y[at(j)];
                        }
                        for j in 0..lane {
                            gx[at(j)] = y[at(j)] * (gy[at(j)] - dot);
                        }
                    }
                }
                self.accumulate_vec(input, gx);
            }
            Op::Sum { input } => {
                let g = gy[0];
                self.accumulate(input, |_| g);
            }
            Op::ReduceMin { input, arg } | Op::ReduceMax { input, arg } => {
                let g = gy[0];
                self.accumulate(input, |i| if i == arg { g } else { T::ZERO });
            }
            Op::SubBroadcast { lhs, scalar } => {
                self.accumulate_vec(lhs, gy.to_vec());
                if self.nodes[scalar.0].needs_grad {
                    let mut total = T::ZERO;
                    for &g in gy {
                        total += g;
                    }
                    self.accumulate_vec(scalar, vec![-total]);
                }
            }
            Op::DivBroadcast { lhs, scalar } => {
                let s = self.data(scalar)[0];
                if self.nodes[lhs.0].needs_grad {
                    let contrib: Vec<T> = gy.iter().map(|&g| g / s).collect();
                    self.accumulate_vec(lhs, contrib);
                }
                if self.nodes[scalar.0].needs_grad {
                    // d(x/s)/ds = -x/s^2 = -out/s
                    let out = self.nodes[id].value.data();
                    let mut total = T::ZERO;
                    for (&g, &o) in gy.iter().zip(out) {
                        total += g * o;
                    }
                    self.accumulate_vec(scalar, vec![-(total / s)]);
                }
            }
            Op::TileSpatial { input } => {
                let os: Vec<usize> = self.nodes[id].value.shape().to_vec();
                let (b, c, h, w) = (os[0], os[1], os[2], os[3]);
                let plane = h * w;
                let mut gx = vec![T::ZERO; b * c];
                for bi in 0..b {
                    for ci in 0..c {
                        let base = (bi * c + ci) * plane;
                        let mut acc = T::ZERO;
                        for &g in &gy[base..base + plane] {
                            acc += g;
                        }
                        gx[bi * c + ci] = acc;
                    }
                }
                self.accumulate_vec(input, gx);
            }
            Op::MulChannelBroadcast { lhs, rhs } => {
                let ls: Vec<usize> = self.shape(lhs).to_vec();
                let (b, c, h, w) = (ls[0], ls[1], ls[2], ls[3]);
                let plane = h * w;
                if self.nodes[lhs.0].needs_grad {
                    let r = self.data(rhs);
                    let mut gl = vec![T::ZERO; b * c * plane];
                    for bi in 0..b {
                        let m = &r[bi * plane..(bi + 1) * plane];
                        for ci in 0..c {
                            let base = (bi * c + ci) * plane;
                            for p in 0..plane {
                                gl[base + p] = gy[base + p] * m[p];
                            }
                        }
                    }
                    self.accumulate_vec(lhs, gl);
                }
                if self.nodes[rhs.0].needs_grad {
                    let l = self.data(lhs);
                    let mut gr = vec![T::ZERO; b * plane];
                    for bi in 0..b {
                        for ci in 0..c {
                            let base = (bi * c + ci) * plane;
                            for p in 0..plane {
                                gr[bi * plane + p] += gy[base + p] * l[base + p];
                            }
                        }
                    }
                    self.accumulate_vec(rhs, gr);
                }
            }
            Op::MseLoss { pred, target } => {
                let (pred_contrib, target_contrib) = {
                    let p = self.data(pred);
                    let t = self.data(target);
                    let scale = gy[0] * fl::<T>(2.0 / p.len() as f64);
                    let pc: Vec<T> =
                        p.iter().zip(t).map(|(&pv, &tv)| scale * (pv - tv)).collect();
                    let tc: Vec<T> = pc.iter().map(|&v| -v).collect();
                    (pc, tc)
                };
                self.accumulate_vec(pred, pred_contrib);
                self.accumulate_vec(target, target_contrib);
            }
            Op::BceWithLogit { logit, label } => {
                let (logit_contrib, label_contrib) = {
                    let z = self.data(logit);
                    let y = self.data(label);
                    let scale = gy[0] * fl::<T>(1.0 / z.len() as f64);
                    let zc: Vec<T> = z
                        .iter()
                        .zip(y)
                        .map(|(&zv, &yv)| {
                            let sig = T::ONE / (T::ONE + (-zv).exp());
                            scale * (sig - yv)
                        })
                        .collect();
                    let yc: Vec<T> = z.iter().map(|&zv| -(scale * zv)).collect();
                    (zc, yc)
                };
                self.accumulate_vec(logit, logit_contrib);
                self.accumulate_vec(label, label_contrib);
            }
        }
    }

    // ---- checks ------------------------------------------------------------

    fn check_same_shape(&self, what: &str, a: Var, b: Var) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(TensorError::ShapeMismatch(format!(
                "{what} requires matching shapes, got {:?} and {:?}",
                self.shape(a),
                self.shape(b)
            )));
        }
        Ok(())
    }

    fn check_scalar(&self, what: &str, v: Var) -> Result<()> {
        if self.nodes[v.0].value.numel() != 1 {
            return Err(TensorError::ShapeMismatch(format!(
                "{what} requires a one-element scalar, got {:?}",
                self.shape(v)
            )));
        }
        Ok(())
    }

    /// Error if any recorded value or gradient is NaN or infinite.
    pub fn validate_finite(&self) -> Result<()> {
        for (i, node) in self.nodes.iter().enumerate() {
            if !node.value.all_finite() {
                return Err(TensorError::NonFinite(format!("value of node {i}")));
            }
            if let Some(g) = &node.grad {
                if g.iter().any(|v| !v.is_finite()) {
                    return Err(TensorError::NonFinite(format!("gradient of node {i}")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], data: &[f64]) -> Tensor<f64> {
        Tensor::new(shape.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn conv2d_identity_kernel_scales() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(Tensor::ones(&[1, 1, 3, 3]));
        let w = g.leaf(t(&[1, 1, 1, 1], &[2.0]));
        let b = g.leaf(t(&[1], &[0.0]));
        let y = g.conv2d(x, w, b, 1, 0).unwrap();
        assert_eq!(g.value(y).shape(), &[1, 1, 3, 3]);
        assert!(g.value(y).data().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn conv2d_direct_summation() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(t(&[1, 1, 2, 2], &[1.0, 2.0, 3.0, 4.0]));
        let w = g.leaf(t(&[1, 1, 2, 2], &[1.0, 0.0, 0.0, 1.0]));
        let b = g.leaf(t(&[1], &[0.0]));
        let y = g.conv2d(x, w, b, 1, 0).unwrap();
        assert_eq!(g.value(y).data(), &[5.0]);
    }

    #[test]
    fn conv2d_rejects_channel_mismatch() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(Tensor::zeros(&[1, 3, 4, 4]));
        let w = g.leaf(Tensor::zeros(&[2, 2, 3, 3]));
        let b = g.leaf(Tensor::zeros(&[2]));
        let err = g.conv2d(x, w, b, 1, 1);
        assert!(matches!(err, Err(TensorError::ShapeMismatch(_))));
    }

    #[test]
    fn conv_transpose_stamps_kernel() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(t(&[1, 1, 1, 1], &[3.0]));
        let w = g.leaf(Tensor::ones(&[1, 1, 2, 2]));
        let b = g.leaf(t(&[1], &[0.0]));
        let y = g.conv_transpose2d(x, w, b, 2, 0).unwrap();
        assert_eq!(g.value(y).shape(), &[1, 1, 2, 2]);
        assert!(g.value(y).data().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn deconv_chain_reaches_target_resolution() {
        let mut g = Graph::<f64>::new();
        let mut x = g.leaf(Tensor::ones(&[1, 1, 4, 4]));
        for _ in 0..4 {
            let w = g.leaf(Tensor::ones(&[1, 1, 4, 4]));
            let b = g.leaf(Tensor::zeros(&[1]));
            x = g.conv_transpose2d(x, w, b, 2, 1).unwrap();
        }
        assert_eq!(g.value(x).shape(), &[1, 1, 64, 64]);
    }

    #[test]
    fn max_pool_and_avg_pool_basics() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(t(&[1, 1, 2, 2], &[1.0, 2.0, 3.0, 4.0]));
        let mx = g.max_pool2d(x, 2, 2).unwrap();
        assert_eq!(g.value(mx).data(), &[4.0]);

        let y = g.leaf(t(&[1, 1, 2, 2], &[2.0, 4.0, 6.0, 8.0]));
        let av = g.avg_pool2d(y, 2, 2).unwrap();
        assert_eq!(g.value(av).data(), &[5.0]);
    }

    #[test]
    fn avg_pool_delta_image() {
        let mut g = Graph::<f64>::new();
        let mut delta = Tensor::zeros(&[1, 1, 2, 2]);
        delta.set(&[0, 0, 1, 0], 1.0);
        let x = g.leaf(delta);
        let y = g.avg_pool2d(x, 2, 2).unwrap();
        assert_eq!(g.value(y).data(), &[0.25]);
    }

    #[test]
    fn max_pool_constant_map_stays_constant() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(Tensor::full(&[1, 1, 4, 4], 0.7));
        let y = g.max_pool2d(x, 2, 2).unwrap();
        assert_eq!(g.value(y).shape(), &[1, 1, 2, 2]);
        assert!(g.value(y).data().iter().all(|&v| v == 0.7));
    }

    #[test]
    fn linear_identity_and_known_case() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(t(&[1, 2], &[2.0, 3.0]));
        let w_id = g.leaf(t(&[2, 2], &[1.0, 0.0, 0.0, 1.0]));
        let b0 = g.leaf(Tensor::zeros(&[2]));
        let y = g.linear(x, w_id, b0).unwrap();
        assert_eq!(g.value(y).data(), &[2.0, 3.0]);

        let w = g.leaf(t(&[1, 2], &[1.0, 1.0]));
        let b = g.leaf(t(&[1], &[1.0]));
        let z = g.linear(x, w, b).unwrap();
        assert_eq!(g.value(z).data(), &[6.0]);
    }

    #[test]
    fn pointwise_basics() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(t(&[1], &[0.0]));
        let s = g.sigmoid(x);
        assert!((g.value(s).data()[0] - 0.5).abs() < 1e-15);

        let c = g.leaf(t(&[2], &[-0.1, 0.5]));
        let clipped = g.clip_min(c, 0.0);
        assert_eq!(g.value(clipped).data(), &[0.0, 0.5]);
    }

    #[test]
    fn softmax_constant_is_uniform() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(Tensor::full(&[49], 3.25));
        let y = g.softmax(x, 0).unwrap();
        for &v in g.value(y).data() {
            assert!((v - 1.0 / 49.0).abs() < 1e-15);
        }
        let total: f64 = g.value(y).data().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn losses_known_values() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(t(&[3], &[1.0, -2.0, 0.5]));
        let same = g.mse_loss(x, x).unwrap();
        assert_eq!(g.value(same).data()[0], 0.0);

        let z = g.leaf(t(&[1], &[0.0]));
        let y = g.leaf(t(&[1], &[1.0]));
        let bce = g.bce_with_logit_loss(z, y).unwrap();
        assert!((g.value(bce).data()[0] - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn bce_rejects_non_binary_labels() {
        let mut g = Graph::<f64>::new();
        let z = g.leaf(t(&[1], &[0.3]));
        let y = g.leaf(t(&[1], &[0.5]));
        assert!(matches!(
            g.bce_with_logit_loss(z, y),
            Err(TensorError::InvalidArgument(_))
        ));
    }

    #[test]
    fn backward_sum_of_squares() {
        let mut g = Graph::<f64>::new();
        let x = g.param(t(&[2], &[1.0, 2.0]));
        let sq = g.mul(x, x).unwrap();
        let loss = g.sum(sq);
        g.backward(loss).unwrap();
        assert_eq!(g.grad(x).unwrap().data(), &[2.0, 4.0]);
    }

    #[test]
    fn backward_accumulates_shared_use() {
        // f(x) = sum(x*x + x) has gradient 2x + 1
        let mut g = Graph::<f64>::new();
        let x = g.param(t(&[3], &[1.0, -0.5, 2.0]));
        let sq = g.mul(x, x).unwrap();
        let s = g.add(sq, x).unwrap();
        let loss = g.sum(s);
        g.backward(loss).unwrap();
        assert_eq!(g.grad(x).unwrap().data(), &[3.0, 0.0, 5.0]);
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut g = Graph::<f64>::new();
        let x = g.param(t(&[2], &[1.0, 2.0]));
        let y = g.mul(x, x).unwrap();
        assert!(matches!(g.backward(y), Err(TensorError::NonScalarLoss(_))));
    }

    #[test]
    fn concat_then_slice_round_trips_bitwise() {
        let mut g = Graph::<f64>::new();
        let a_t = t(&[1, 2, 2, 2], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let b_t = t(&[1, 1, 2, 2], &[9.0, 10.0, 11.0, 12.0]);
        let a = g.leaf(a_t.clone());
        let b = g.leaf(b_t.clone());
        let cat = g.concat_channels(a, b).unwrap();
        let back_a = g.slice_channels(cat, 0, 2).unwrap();
        let back_b = g.slice_channels(cat, 2, 3).unwrap();
        assert_eq!(g.value(back_a), &a_t);
        assert_eq!(g.value(back_b), &b_t);
    }
}
