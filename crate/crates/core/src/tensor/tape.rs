//! Wengert-list tape for reverse-mode differentiation.
//!
//! Every op appends one node whose inputs are earlier nodes, so the node
//! list is already in topological order and [`Tape::backward`] is a single
//! reverse sweep that visits each node once.

use std::sync::atomic::{AtomicU64, Ordering};

use super::conv::{self, ConvGeom, Conv2dParams};
use super::ops::{self, AxisView, NormStats};
use super::{MaskTensor, Real, Tensor};
use crate::error::{Error, Result};

static NEXT_TAPE_ID: AtomicU64 = AtomicU64::new(1);

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    tape: u64,
    index: usize,
}

enum Op<T: Real> {
    Leaf,
    Conv2d {
        input: Var,
        weight: Var,
        bias: Option<Var>,
        geom: ConvGeom,
    },
    PixelShuffle {
        input: Var,
        factor: usize,
    },
    Gelu(Var),
    LayerNorm {
        input: Var,
        gamma: Var,
        beta: Var,
        view: AxisView,
        stats: NormStats<T>,
    },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, T),
    Sum(Var),
    Mean(Var),
    Mse {
        pred: Var,
        target: Var,
    },
    MaskedMse {
        pred: Var,
        target: Var,
        mask: Vec<u8>,
        count: usize,
    },
    L1 {
        pred: Var,
        target: Var,
    },
}

impl<T: Real> Op<T> {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::Conv2d { .. } => "conv2d",
            Op::PixelShuffle { .. } => "pixel_shuffle",
            Op::Gelu(_) => "gelu",
            Op::LayerNorm { .. } => "layer_norm",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::Scale(..) => "scale",
            Op::Sum(_) => "sum",
            Op::Mean(_) => "mean",
            Op::Mse { .. } => "mse_loss",
            Op::MaskedMse { .. } => "masked_mse_loss",
            Op::L1 { .. } => "l1_loss",
        }
    }
}

struct Node<T: Real> {
    value: Tensor<T>,
    requires_grad: bool,
    grad: Option<Vec<T>>,
    op: Op<T>,
}

/// Records forward ops and replays them backwards.
///
/// A tape is single-owner; build a fresh one per training step.
pub struct Tape<T: Real = f32> {
    id: u64,
    nodes: Vec<Node<T>>,
    first_non_finite: Option<(usize, &'static str)>,
}

impl<T: Real> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

fn add_into<T: Real>(slot: &mut Option<Vec<T>>, len: usize, src: &[T]) {
    let g = slot.get_or_insert_with(|| vec![T::zero(); len]);
    for (a, &b) in g.iter_mut().zip(src) {
        *a += b;
    }
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Tape {
            id: NEXT_TAPE_ID.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
            first_non_finite: None,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Records an input value.
    pub fn leaf(&mut self, value: Tensor<T>, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            requires_grad,
            grad: None,
            op: Op::Leaf,
        });
        Var {
            tape: self.id,
            index: self.nodes.len() - 1,
        }
    }

    /// A trainable leaf.
    pub fn param(&mut self, value: Tensor<T>) -> Var {
        self.leaf(value, true)
    }

    /// A leaf that never receives a gradient.
    pub fn constant(&mut self, value: Tensor<T>) -> Var {
        self.leaf(value, false)
    }

    fn node(&self, v: Var) -> Result<&Node<T>> {
        if v.tape != self.id {
            return Err(Error::usage("variable belongs to a different tape"));
        }
        self.nodes
            .get(v.index)
            .ok_or_else(|| Error::usage("variable index out of range"))
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.node(v).expect("var from this tape").value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.node(v).map(|n| n.requires_grad).unwrap_or(false)
    }

    /// Accumulated gradient of the last backward pass, if any reached `v`.
    pub fn grad(&self, v: Var) -> Option<&[T]> {
        self.node(v).ok()?.grad.as_deref()
    }

    pub fn grad_tensor(&self, v: Var) -> Option<Tensor<T>> {
        let n = self.node(v).ok()?;
        let g = n.grad.as_ref()?;
        Tensor::new(n.value.shape().to_vec(), g.clone()).ok()
    }

    /// Clears every accumulated gradient.
    pub fn zero_grad(&mut self) {
        for n in &mut self.nodes {
            n.grad = None;
        }
    }

    /// First op (node index, name) that produced a non-finite value from
    /// finite inputs. Only tracked in builds with debug assertions.
    pub fn first_non_finite(&self) -> Option<(usize, &'static str)> {
        self.first_non_finite
    }

    fn push(&mut self, value: Tensor<T>, inputs: &[Var], op: Op<T>) -> Var {
        let requires_grad = inputs.iter().any(|&v| self.nodes[v.index].requires_grad);
        if cfg!(debug_assertions)
            && self.first_non_finite.is_none()
            && !value.all_finite()
            && inputs.iter().all(|&v| self.nodes[v.index].value.all_finite())
        {
            self.first_non_finite = Some((self.nodes.len(), op.name()));
        }
        self.nodes.push(Node {
            value,
            requires_grad,
            grad: None,
            op,
        });
        Var {
            tape: self.id,
            index: self.nodes.len() - 1,
        }
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        let (sa, sb) = (self.node(a)?.value.shape(), self.node(b)?.value.shape());
        if sa != sb {
            return Err(Error::dim(op, format!("{sa:?} vs {sb:?}")));
        }
        Ok(())
    }

    /// Cross-correlation of `[N,C_in,H,W]` with `[C_out,C_in/groups,K,K]`.
    pub fn conv2d(&mut self, input: Var, weight: Var, bias: Option<Var>, params: Conv2dParams) -> Result<Var> {
        let bias_shape = match bias {
            Some(b) => Some(self.node(b)?.value.shape().to_vec()),
            None => None,
        };
        let geom = ConvGeom::new(
            self.node(input)?.value.shape(),
            self.node(weight)?.value.shape(),
            bias_shape.as_deref(),
            params,
        )?;
        let out = conv::forward(
            &geom,
            self.nodes[input.index].value.data(),
            self.nodes[weight.index].value.data(),
            bias.map(|b| self.nodes[b.index].value.data()),
        );
        let value = Tensor::new(geom.out_shape().to_vec(), out)?;
        let mut inputs = vec![input, weight];
        inputs.extend(bias);
        Ok(self.push(
            value,
            &inputs,
            Op::Conv2d {
                input,
                weight,
                bias,
                geom,
            },
        ))
    }

    /// Rearranges `[N, C*s*s, H, W]` into `[N, C, s*H, s*W]`.
    pub fn pixel_shuffle(&mut self, input: Var, factor: usize) -> Result<Var> {
        let shape = self.node(input)?.value.shape().to_vec();
        if shape.len() != 4 {
            return Err(Error::dim("pixel_shuffle", format!("input must be 4-d, got {shape:?}")));
        }
        if factor == 0 || shape[1] % (factor * factor) != 0 {
            return Err(Error::config(format!(
                "pixel_shuffle: {} channels not divisible by {factor}^2",
                shape[1]
            )));
        }
        let s4 = [shape[0], shape[1], shape[2], shape[3]];
        let out = ops::pixel_shuffle(self.nodes[input.index].value.data(), s4, factor);
        let value = Tensor::new(
            vec![shape[0], shape[1] / (factor * factor), shape[2] * factor, shape[3] * factor],
            out,
        )?;
        Ok(self.push(value, &[input], Op::PixelShuffle { input, factor }))
    }

    /// Exact (erf) GELU.
    pub fn gelu(&mut self, input: Var) -> Result<Var> {
        let value = self.node(input)?.value.map(ops::gelu_scalar);
        Ok(self.push(value, &[input], Op::Gelu(input)))
    }

    /// Normalizes over `axis` to zero mean / unit variance, then applies
    /// `gamma * x + beta` with `gamma`, `beta` of shape `[shape[axis]]`.
    pub fn layer_norm(&mut self, input: Var, axis: usize, gamma: Var, beta: Var, eps: f64) -> Result<Var> {
        let shape = self.node(input)?.value.shape().to_vec();
        if axis >= shape.len() {
            return Err(Error::dim("layer_norm", format!("axis {axis} out of range for {shape:?}")));
        }
        for (name, v) in [("gamma", gamma), ("beta", beta)] {
            let s = self.node(v)?.value.shape();
            if s != [shape[axis]] {
                return Err(Error::dim(
                    "layer_norm",
                    format!("{name} shape {s:?} vs normalized axis length {}", shape[axis]),
                ));
            }
        }
        let view = AxisView::new(&shape, axis);
        let (out, stats) = ops::layer_norm(
            self.nodes[input.index].value.data(),
            view,
            self.nodes[gamma.index].value.data(),
            self.nodes[beta.index].value.data(),
            T::c(eps),
        );
        let value = Tensor::new(shape, out)?;
        Ok(self.push(
            value,
            &[input, gamma, beta],
            Op::LayerNorm {
                input,
                gamma,
                beta,
                view,
                stats,
            },
        ))
    }

    fn zip_with(&mut self, op: &'static str, a: Var, b: Var, f: impl Fn(T, T) -> T) -> Result<Tensor<T>> {
        self.same_shape(op, a, b)?;
        let (va, vb) = (&self.nodes[a.index].value, &self.nodes[b.index].value);
        let data = va.data().iter().zip(vb.data()).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(va.shape().to_vec(), data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.zip_with("add", a, b, |x, y| x + y)?;
        Ok(self.push(v, &[a, b], Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.zip_with("sub", a, b, |x, y| x - y)?;
        Ok(self.push(v, &[a, b], Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let v = self.zip_with("mul", a, b, |x, y| x * y)?;
        Ok(self.push(v, &[a, b], Op::Mul(a, b)))
    }

    pub fn scale(&mut self, input: Var, factor: f64) -> Result<Var> {
        let f = T::c(factor);
        let v = self.node(input)?.value.map(|x| x * f);
        Ok(self.push(v, &[input], Op::Scale(input, f)))
    }

    pub fn sum(&mut self, input: Var) -> Result<Var> {
        let s = self.node(input)?.value.data().iter().copied().sum();
        Ok(self.push(Tensor::scalar(s), &[input], Op::Sum(input)))
    }

    pub fn mean(&mut self, input: Var) -> Result<Var> {
        let t = &self.node(input)?.value;
        let m = t.data().iter().copied().sum::<T>() / T::from_usize(t.len()).unwrap();
        Ok(self.push(Tensor::scalar(m), &[input], Op::Mean(input)))
    }

    /// Mean of squared differences.
    pub fn mse_loss(&mut self, pred: Var, target: Var) -> Result<Var> {
        self.same_shape("mse_loss", pred, target)?;
        let (p, t) = (&self.nodes[pred.index].value, &self.nodes[target.index].value);
        let n = T::from_usize(p.len()).unwrap();
        let s: T = p.data().iter().zip(t.data()).map(|(&a, &b)| (a - b) * (a - b)).sum();
        Ok(self.push(Tensor::scalar(s / n), &[pred, target], Op::Mse { pred, target }))
    }

    /// Mean squared difference over elements whose mask bit is 0.
    ///
    /// A fully masked batch has loss 0 and contributes no gradient.
    pub fn masked_mse_loss(&mut self, pred: Var, target: Var, mask: &MaskTensor) -> Result<Var> {
        self.same_shape("masked_mse_loss", pred, target)?;
        let mask = mask.broadcast_to(self.nodes[pred.index].value.shape())?;
        let (p, t) = (&self.nodes[pred.index].value, &self.nodes[target.index].value);
        let mut s = T::zero();
        let mut count = 0usize;
        for ((&a, &b), &m) in p.data().iter().zip(t.data()).zip(&mask) {
            if m == 0 {
                s += (a - b) * (a - b);
                count += 1;
            }
        }
        let loss = if count == 0 {
            T::zero()
        } else {
            s / T::from_usize(count).unwrap()
        };
        Ok(self.push(
            Tensor::scalar(loss),
            &[pred, target],
            Op::MaskedMse {
                pred,
                target,
                mask,
                count,
            },
        ))
    }

    /// Mean absolute difference.
    pub fn l1_loss(&mut self, pred: Var, target: Var) -> Result<Var> {
        self.same_shape("l1_loss", pred, target)?;
        let (p, t) = (&self.nodes[pred.index].value, &self.nodes[target.index].value);
        let n = T::from_usize(p.len()).unwrap();
        let s: T = p.data().iter().zip(t.data()).map(|(&a, &b)| (a - b).abs()).sum();
        Ok(self.push(Tensor::scalar(s / n), &[pred, target], Op::L1 { pred, target }))
    }

    /// Populates `grad` of every trainable value that `loss` depends on.
    /// Gradients add onto whatever an earlier pass left behind.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let node = self.node(loss)?;
        if node.value.len() != 1 {
            return Err(Error::usage(format!(
                "backward needs a scalar loss, got shape {:?}",
                node.value.shape()
            )));
        }
        if !node.requires_grad {
            return Ok(());
        }
        for n in &mut self.nodes {
            if !matches!(n.op, Op::Leaf) {
                n.grad = None;
            }
        }
        add_into(&mut self.nodes[loss.index].grad, 1, &[T::one()]);

        for i in (0..=loss.index).rev() {
            let (lower, upper) = self.nodes.split_at_mut(i);
            let node = &upper[0];
            if !node.requires_grad || matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(dy) = node.grad.as_deref() else {
                continue;
            };
            propagate(lower, node, dy);
        }
        Ok(())
    }
}

fn propagate<T: Real>(lower: &mut [Node<T>], node: &Node<T>, dy: &[T]) {
    let wants = |lower: &[Node<T>], v: Var| lower[v.index].requires_grad;
    let accumulate = |lower: &mut [Node<T>], v: Var, g: &[T]| {
        let n = &mut lower[v.index];
        if n.requires_grad {
            let len = n.value.len();
            add_into(&mut n.grad, len, g);
        }
    };
    match &node.op {
        Op::Leaf => {}
        Op::Conv2d {
            input,
            weight,
            bias,
            geom,
        } => {
            let grads = conv::backward(
                geom,
                lower[input.index].value.data(),
                lower[weight.index].value.data(),
                dy,
                wants(lower, *input),
                wants(lower, *weight),
                bias.is_some_and(|b| wants(lower, b)),
            );
            if let Some(g) = grads.input {
                accumulate(lower, *input, &g);
            }
            if let Some(g) = grads.weight {
                accumulate(lower, *weight, &g);
            }
            if let (Some(b), Some(g)) = (bias, grads.bias) {
                accumulate(lower, *b, &g);
            }
        }
        Op::PixelShuffle { input, factor } => {
            if wants(lower, *input) {
                let s = lower[input.index].value.shape();
                let g = ops::pixel_unshuffle(dy, [s[0], s[1], s[2], s[3]], *factor);
                accumulate(lower, *input, &g);
            }
        }
        Op::Gelu(input) => {
            if wants(lower, *input) {
                let x = lower[input.index].value.data();
                let g: Vec<T> = x
                    .iter()
                    .zip(dy)
                    .map(|(&x, &d)| d * ops::gelu_grad_scalar(x))
                    .collect();
                accumulate(lower, *input, &g);
            }
        }
        Op::LayerNorm {
            input,
            gamma,
            beta,
            view,
            stats,
        } => {
            let g = ops::layer_norm_backward(
                lower[input.index].value.data(),
                dy,
                *view,
                lower[gamma.index].value.data(),
                stats,
            );
            accumulate(lower, *input, &g.input);
            accumulate(lower, *gamma, &g.gamma);
            accumulate(lower, *beta, &g.beta);
        }
        Op::Add(a, b) => {
            accumulate(lower, *a, dy);
            accumulate(lower, *b, dy);
        }
        Op::Sub(a, b) => {
            accumulate(lower, *a, dy);
            if wants(lower, *b) {
                let neg: Vec<T> = dy.iter().map(|&d| -d).collect();
                accumulate(lower, *b, &neg);
            }
        }
        Op::Mul(a, b) => {
            if wants(lower, *a) {
                let g: Vec<T> = dy
                    .iter()
                    .zip(lower[b.index].value.data())
                    .map(|(&d, &y)| d * y)
                    .collect();
                accumulate(lower, *a, &g);
            }
            if wants(lower, *b) {
                let g: Vec<T> = dy
                    .iter()
                    .zip(lower[a.index].value.data())
                    .map(|(&d, &x)| d * x)
                    .collect();
                accumulate(lower, *b, &g);
            }
        }
        Op::Scale(input, f) => {
            let g: Vec<T> = dy.iter().map(|&d| d * *f).collect();
            accumulate(lower, *input, &g);
        }
        Op::Sum(input) => {
            let g = vec![dy[0]; lower[input.index].value.len()];
            accumulate(lower, *input, &g);
        }
        Op::Mean(input) => {
            let n = lower[input.index].value.len();
            let g = vec![dy[0] / T::from_usize(n).unwrap(); n];
            accumulate(lower, *input, &g);
        }
        Op::Mse { pred, target } => {
            let p = lower[pred.index].value.data();
            let t = lower[target.index].value.data();
            let k = dy[0] * T::c(2.0) / T::from_usize(p.len()).unwrap();
            let g: Vec<T> = p.iter().zip(t).map(|(&a, &b)| k * (a - b)).collect();
            if wants(lower, *target) {
                let neg: Vec<T> = g.iter().map(|&v| -v).collect();
                accumulate(lower, *target, &neg);
            }
            accumulate(lower, *pred, &g);
        }
        Op::MaskedMse {
            pred,
            target,
            mask,
            count,
        } => {
            if *count == 0 {
                return;
            }
            let p = lower[pred.index].value.data();
            let t = lower[target.index].value.data();
            let k = dy[0] * T::c(2.0) / T::from_usize(*count).unwrap();
            let g: Vec<T> = p
                .iter()
                .zip(t)
                .zip(mask)
                .map(|((&a, &b), &m)| if m == 0 { k * (a - b) } else { T::zero() })
                .collect();
            if wants(lower, *target) {
                let neg: Vec<T> = g.iter().map(|&v| -v).collect();
                accumulate(lower, *target, &neg);
            }
            accumulate(lower, *pred, &g);
        }
        Op::L1 { pred, target } => {
            let p = lower[pred.index].value.data();
            let t = lower[target.index].value.data();
            let k = dy[0] / T::from_usize(p.len()).unwrap();
            let g: Vec<T> = p
                .iter()
                .zip(t)
                .map(|(&a, &b)| {
                    let d = a - b;
                    if d > T::zero() {
                        k
                    } else if d < T::zero() {
                        -k
                    } else {
                        T::zero()
                    }
                })
                .collect();
            if wants(lower, *target) {
                let neg: Vec<T> = g.iter().map(|&v| -v).collect();
                accumulate(lower, *target, &neg);
            }
            accumulate(lower, *pred, &g);
        }
    }
}
