//! Operation tape for reverse-mode differentiation.
//!
//! A [`Tape`] owns every tensor touched by one forward pass. Leaves enter
//! via [`Tape::leaf`] / [`Tape::param`]; each operation validates shapes,
//! runs its kernel, records itself, and returns a [`Var`] handle to the
//! output. [`Tape::backward`] consumes the tape (clearing it by
//! construction) and returns the accumulated gradients.

use super::kernels::{self, Padding};
use super::{Tensor, TensorError};
use crate::nn::ParamId;
use crate::scalar::Scalar;
use std::collections::HashMap;

/// Handle to a tensor recorded on a tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

struct Node<T> {
    value: Tensor<T>,
    needs_grad: bool,
}

enum Op<T> {
    Dense {
        x: Var,
        w: Var,
        b: Var,
        out: Var,
    },
    Conv2d {
        x: Var,
        k: Var,
        bias: Option<Var>,
        out: Var,
        stride: usize,
        out_dims: (usize, usize),
        pads: (usize, usize, usize, usize),
    },
    Relu {
        x: Var,
        out: Var,
    },
    Add {
        a: Var,
        b: Var,
        out: Var,
    },
    GlobalAvgPool {
        x: Var,
        out: Var,
    },
    SoftmaxCrossEntropy {
        logits: Var,
        out: Var,
        labels: Vec<usize>,
        probs: Vec<T>,
    },
    L2Penalty {
        weights: Vec<Var>,
        out: Var,
        scale: T,
    },
    /// Weighted sum of scalars: `out = sum coeff_i * term_i`.
    Combine {
        terms: Vec<(Var, T)>,
        out: Var,
    },
}

/// Execution record of one forward pass.
pub struct Tape<T: Scalar> {
    nodes: Vec<Node<T>>,
    ops: Vec<Op<T>>,
    param_vars: HashMap<ParamId, Var>,
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            ops: Vec::new(),
            param_vars: HashMap::new(),
        }
    }

    fn push(&mut self, value: Tensor<T>, needs_grad: bool) -> Var {
        self.nodes.push(Node { value, needs_grad });
        Var(self.nodes.len() - 1)
    }

    /// Register an input tensor. `needs_grad` marks it as a gradient target.
    pub fn leaf(&mut self, value: Tensor<T>, needs_grad: bool) -> Var {
        self.push(value, needs_grad)
    }

    /// Register a named parameter leaf. Repeated registration of the same
    /// parameter returns the original handle so gradient contributions from
    /// every use accumulate into one slot.
    pub fn param(&mut self, id: ParamId, value: Tensor<T>, needs_grad: bool) -> Var {
        if let Some(&var) = self.param_vars.get(&id) {
            return var;
        }
        let var = self.push(value, needs_grad);
        self.param_vars.insert(id, var);
        var
    }

    pub fn value(&self, var: Var) -> &Tensor<T> {
        &self.nodes[var.0].value
    }

    pub fn needs_grad(&self, var: Var) -> bool {
        self.nodes[var.0].needs_grad
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    fn record(&mut self, value: Tensor<T>, needs_grad: bool, op: impl FnOnce(Var) -> Op<T>) -> Var {
        #[cfg(debug_assertions)]
        debug_assert!(value.is_finite(), "operation produced non-finite values");
        let out = self.push(value, needs_grad);
        self.ops.push(op(out));
        out
    }

    /// `x [B,I] @ w [I,O] + b [O]`.
    pub fn dense(&mut self, x: Var, w: Var, b: Var) -> Result<Var, TensorError> {
        let (bsz, input) = self.value(x).dims2("dense")?;
        let (wi, wo) = self.value(w).dims2("dense")?;
        if input != wi {
            return Err(TensorError::ShapeMismatch {
                op: "dense",
                lhs: self.value(x).shape().to_vec(),
                rhs: self.value(w).shape().to_vec(),
            });
        }
        if self.value(b).shape() != [wo] {
            return Err(TensorError::ShapeMismatch {
                op: "dense bias",
                lhs: self.value(w).shape().to_vec(),
                rhs: self.value(b).shape().to_vec(),
            });
        }
        let out = kernels::dense_forward(
            self.value(x).data(),
            (bsz, input),
            self.value(w).data(),
            wo,
            self.value(b).data(),
        );
        let needs = self.needs_grad(x) || self.needs_grad(w) || self.needs_grad(b);
        let value = Tensor::from_vec(vec![bsz, wo], out)?;
        Ok(self.record(value, needs, |out| Op::Dense { x, w, b, out }))
    }

    /// 2-D cross-correlation: `x [B,C,H,W] * k [F,C,KH,KW] (+ bias [F])`.
    pub fn conv2d(
        &mut self,
        x: Var,
        k: Var,
        bias: Option<Var>,
        stride: usize,
        padding: Padding,
    ) -> Result<Var, TensorError> {
        assert!(stride >= 1, "conv2d stride must be >= 1");
        let (bsz, cin, h, w) = self.value(x).dims4("conv2d")?;
        let (nf, kc, kh, kw) = self.value(k).dims4("conv2d kernel")?;
        if kc != cin {
            return Err(TensorError::ShapeMismatch {
                op: "conv2d channels",
                lhs: self.value(x).shape().to_vec(),
                rhs: self.value(k).shape().to_vec(),
            });
        }
        if let Some(b) = bias {
            if self.value(b).shape() != [nf] {
                return Err(TensorError::ShapeMismatch {
                    op: "conv2d bias",
                    lhs: self.value(k).shape().to_vec(),
                    rhs: self.value(b).shape().to_vec(),
                });
            }
        }
        let (out_dims, pads) = kernels::conv_output_dims((h, w), (kh, kw), stride, padding)
            .ok_or_else(|| TensorError::KernelTooLarge {
                kernel: self.value(k).shape().to_vec(),
                input: self.value(x).shape().to_vec(),
            })?;
        let out = kernels::conv2d_forward(
            self.value(x).data(),
            (bsz, cin, h, w),
            self.value(k).data(),
            (nf, kh, kw),
            bias.map(|b| self.value(b).data()),
            stride,
            out_dims,
            pads,
        );
        let needs = self.needs_grad(x)
            || self.needs_grad(k)
            || bias.is_some_and(|b| self.needs_grad(b));
        let value = Tensor::from_vec(vec![bsz, nf, out_dims.0, out_dims.1], out)?;
        Ok(self.record(value, needs, |out| Op::Conv2d {
            x,
            k,
            bias,
            out,
            stride,
            out_dims,
            pads,
        }))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let out = kernels::relu_forward(self.value(x).data());
        let value = Tensor::from_vec(self.value(x).shape().to_vec(), out)
            .expect("relu preserves shape");
        let needs = self.needs_grad(x);
        self.record(value, needs, |out| Op::Relu { x, out })
    }

    /// Elementwise sum of two same-shape tensors.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, TensorError> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(TensorError::ShapeMismatch {
                op: "add",
                lhs: self.value(a).shape().to_vec(),
                rhs: self.value(b).shape().to_vec(),
            });
        }
        let out: Vec<T> = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(&x, &y)| x + y)
            .collect();
        let value = Tensor::from_vec(self.value(a).shape().to_vec(), out)?;
        let needs = self.needs_grad(a) || self.needs_grad(b);
        Ok(self.record(value, needs, |out| Op::Add { a, b, out }))
    }

    /// `[B,C,H,W] -> [B,C]` spatial mean.
    pub fn global_avg_pool(&mut self, x: Var) -> Result<Var, TensorError> {
        let (bsz, cin, h, w) = self.value(x).dims4("global_avg_pool")?;
        let out = kernels::global_avg_pool_forward(self.value(x).data(), (bsz, cin, h, w));
        let value = Tensor::from_vec(vec![bsz, cin], out)?;
        let needs = self.needs_grad(x);
        Ok(self.record(value, needs, |out| Op::GlobalAvgPool { x, out }))
    }

    /// Mean softmax cross-entropy between `logits [B,K]` and class indices.
    pub fn softmax_cross_entropy(
        &mut self,
        logits: Var,
        labels: &[usize],
    ) -> Result<Var, TensorError> {
        let (bsz, k) = self.value(logits).dims2("softmax_cross_entropy")?;
        if labels.len() != bsz {
            return Err(TensorError::ShapeMismatch {
                op: "softmax_cross_entropy labels",
                lhs: vec![bsz, k],
                rhs: vec![labels.len()],
            });
        }
        for (index, &label) in labels.iter().enumerate() {
            if label >= k {
                return Err(TensorError::LabelOutOfRange {
                    index,
                    label,
                    classes: k,
                });
            }
        }
        let (loss, probs) =
            kernels::softmax_cross_entropy_forward(self.value(logits).data(), (bsz, k), labels);
        let needs = self.needs_grad(logits);
        let labels = labels.to_vec();
        Ok(self.record(Tensor::scalar(loss), needs, |out| Op::SoftmaxCrossEntropy {
            logits,
            out,
            labels,
            probs,
        }))
    }

    /// `scale * sum_i sum(w_i^2)` over the given weight tensors.
    pub fn l2_penalty(&mut self, weights: &[Var], scale: T) -> Var {
        debug_assert!(scale >= T::zero(), "l2 scale must be non-negative");
        let mut acc = T::zero();
        for &w in weights {
            for &v in self.value(w).data() {
                acc += v * v;
            }
        }
        let needs = weights.iter().any(|&w| self.needs_grad(w));
        let weights = weights.to_vec();
        self.record(Tensor::scalar(scale * acc), needs, |out| Op::L2Penalty {
            weights,
            out,
            scale,
        })
    }

    /// Weighted sum of scalar terms: the loss combiner.
    pub fn combine(&mut self, terms: &[(Var, T)]) -> Result<Var, TensorError> {
        let mut acc = T::zero();
        for &(v, coeff) in terms {
            let t = self.value(v);
            if !t.is_scalar() {
                return Err(TensorError::NonScalarLoss {
                    shape: t.shape().to_vec(),
                });
            }
            acc += coeff * t.item();
        }
        let needs = terms.iter().any(|&(v, _)| self.needs_grad(v));
        let terms = terms.to_vec();
        Ok(self.record(Tensor::scalar(acc), needs, |out| Op::Combine { terms, out }))
    }

    /// Reverse pass from a scalar loss. Consumes the tape; gradients for
    /// every `needs_grad` leaf are materialized (zero-filled when the loss
    /// does not depend on the leaf).
    pub fn backward(self, loss: Var) -> Result<Gradients<T>, TensorError> {
        let Tape {
            nodes,
            ops,
            param_vars,
        } = self;
        if !nodes[loss.0].value.is_scalar() {
            return Err(TensorError::NonScalarLoss {
                shape: nodes[loss.0].value.shape().to_vec(),
            });
        }
        let mut grads: Vec<Option<Vec<T>>> = vec![None; nodes.len()];
        grads[loss.0] = Some(vec![T::one()]);

        for op in ops.iter().rev() {
            backward_op(op, &nodes, &mut grads);
        }

        let tensors = nodes
            .iter()
            .zip(grads)
            .map(|(node, g)| {
                if !node.needs_grad {
                    return None;
                }
                let data = g.unwrap_or_else(|| vec![T::zero(); node.value.len()]);
                Some(
                    Tensor::from_vec(node.value.shape().to_vec(), data)
                        .expect("gradient matches tensor shape"),
                )
            })
            .collect();
        Ok(Gradients {
            tensors,
            param_vars,
        })
    }
}

fn accumulate<T: Scalar>(
    grads: &mut [Option<Vec<T>>],
    nodes: &[Node<T>],
    var: Var,
    contribution: &[T],
) {
    if !nodes[var.0].needs_grad {
        return;
    }
    match &mut grads[var.0] {
        Some(existing) => {
            for (e, c) in existing.iter_mut().zip(contribution) {
                *e += *c;
            }
        }
        None => grads[var.0] = Some(contribution.to_vec()),
    }
}

fn backward_op<T: Scalar>(op: &Op<T>, nodes: &[Node<T>], grads: &mut [Option<Vec<T>>]) {
    // A node's grad is needed only when some path reaches a tracked leaf;
    // untracked subgraphs are skipped entirely.
    macro_rules! out_grad {
        ($out:expr) => {
            match &grads[$out.0] {
                Some(g) => g.clone(),
                None => return,
            }
        };
    }
    match op {
        Op::Dense { x, w, b, out } => {
            let d = out_grad!(out);
            let (bsz, input) = nodes[x.0].value.dims2("dense").unwrap();
            let output = nodes[w.0].value.shape()[1];
            if nodes[x.0].needs_grad {
                let dx =
                    kernels::dense_backward_input(&d, (bsz, input), nodes[w.0].value.data(), output);
                accumulate(grads, nodes, *x, &dx);
            }
            if nodes[w.0].needs_grad {
                let dw =
                    kernels::dense_backward_weight(nodes[x.0].value.data(), (bsz, input), &d, output);
                accumulate(grads, nodes, *w, &dw);
            }
            if nodes[b.0].needs_grad {
                let db = kernels::dense_backward_bias(&d, (bsz, output));
                accumulate(grads, nodes, *b, &db);
            }
        }
        Op::Conv2d {
            x,
            k,
            bias,
            out,
            stride,
            out_dims,
            pads,
        } => {
            let d = out_grad!(out);
            let x_dims = nodes[x.0].value.dims4("conv2d").unwrap();
            let kshape = nodes[k.0].value.shape();
            let k_dims = (kshape[0], kshape[2], kshape[3]);
            if nodes[x.0].needs_grad {
                let dx = kernels::conv2d_backward_input(
                    &d,
                    x_dims,
                    nodes[k.0].value.data(),
                    k_dims,
                    *stride,
                    *out_dims,
                    *pads,
                );
                accumulate(grads, nodes, *x, &dx);
            }
            if nodes[k.0].needs_grad {
                let dk = kernels::conv2d_backward_kernel(
                    nodes[x.0].value.data(),
                    x_dims,
                    &d,
                    k_dims,
                    *stride,
                    *out_dims,
                    *pads,
                );
                accumulate(grads, nodes, *k, &dk);
            }
            if let Some(b) = bias {
                if nodes[b.0].needs_grad {
                    let db = kernels::conv2d_backward_bias(
                        &d,
                        (x_dims.0, k_dims.0, out_dims.0, out_dims.1),
                    );
                    accumulate(grads, nodes, *b, &db);
                }
            }
        }
        Op::Relu { x, out } => {
            let d = out_grad!(out);
            let dx = kernels::relu_backward(nodes[x.0].value.data(), &d);
            accumulate(grads, nodes, *x, &dx);
        }
        Op::Add { a, b, out } => {
            let d = out_grad!(out);
            accumulate(grads, nodes, *a, &d);
            accumulate(grads, nodes, *b, &d);
        }
        Op::GlobalAvgPool { x, out } => {
            let d = out_grad!(out);
            let dims = nodes[x.0].value.dims4("global_avg_pool").unwrap();
            let dx = kernels::global_avg_pool_backward(&d, dims);
            accumulate(grads, nodes, *x, &dx);
        }
        Op::SoftmaxCrossEntropy {
            logits,
            out,
            labels,
            probs,
        } => {
            let d = out_grad!(out);
            let dims = nodes[logits.0].value.dims2("softmax_cross_entropy").unwrap();
            let dl = kernels::softmax_cross_entropy_backward(probs, dims, labels, d[0]);
            accumulate(grads, nodes, *logits, &dl);
        }
        Op::L2Penalty {
            weights,
            out,
            scale,
        } => {
            let d = out_grad!(out);
            let two_scale_d = T::of(2.0) * *scale * d[0];
            for &w in weights {
                if !nodes[w.0].needs_grad {
                    continue;
                }
                let dw: Vec<T> = nodes[w.0]
                    .value
                    .data()
                    .iter()
                    .map(|&v| two_scale_d * v)
                    .collect();
                accumulate(grads, nodes, w, &dw);
            }
        }
        Op::Combine { terms, out } => {
            let d = out_grad!(out);
            for &(v, coeff) in terms {
                accumulate(grads, nodes, v, &[coeff * d[0]]);
            }
        }
    }
}

/// Gradients produced by [`Tape::backward`].
pub struct Gradients<T: Scalar> {
    tensors: Vec<Option<Tensor<T>>>,
    param_vars: HashMap<ParamId, Var>,
}

impl<T: Scalar> Gradients<T> {
    /// Gradient of the loss w.r.t. a tracked variable.
    pub fn grad(&self, var: Var) -> Option<&Tensor<T>> {
        self.tensors[var.0].as_ref()
    }

    /// Gradient for a parameter registered through [`Tape::param`].
    pub fn param_grad(&self, id: ParamId) -> Option<&Tensor<T>> {
        self.param_vars.get(&id).and_then(|&v| self.grad(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], data: &[f64]) -> Tensor<f64> {
        Tensor::from_vec(shape.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn dense_identity_and_hand_sum() {
        let mut tape = Tape::new();
        let x = tape.leaf(t(&[1, 2], &[1.0, 2.0]), false);
        let w = tape.leaf(t(&[2, 2], &[1.0, 0.0, 0.0, 1.0]), false);
        let b = tape.leaf(t(&[2], &[0.0, 0.0]), false);
        let y = tape.dense(x, w, b).unwrap();
        assert_eq!(tape.value(y).data(), &[1.0, 2.0]);

        let x2 = tape.leaf(t(&[1, 2], &[1.0, 1.0]), false);
        let w2 = tape.leaf(t(&[2, 1], &[2.0, 3.0]), false);
        let b2 = tape.leaf(t(&[1], &[1.0]), false);
        let y2 = tape.dense(x2, w2, b2).unwrap();
        assert_eq!(tape.value(y2).data(), &[6.0]);
    }

    #[test]
    fn dense_shape_mismatch_names_both_shapes() {
        let mut tape = Tape::<f64>::new();
        let x = tape.leaf(Tensor::zeros(vec![1, 3]), false);
        let w = tape.leaf(Tensor::zeros(vec![2, 2]), false);
        let b = tape.leaf(Tensor::zeros(vec![2]), false);
        let err = tape.dense(x, w, b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[1, 3]") && msg.contains("[2, 2]"), "{msg}");
    }

    #[test]
    fn conv_identity_kernel_passes_input_through() {
        let mut tape = Tape::new();
        let x = tape.leaf(t(&[1, 1, 3, 3], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]), false);
        let k = tape.leaf(t(&[1, 1, 1, 1], &[1.0]), false);
        let y = tape.conv2d(x, k, None, 1, Padding::Same).unwrap();
        assert_eq!(tape.value(y).data(), tape.value(x).data());
    }

    #[test]
    fn conv_constant_field_sums_kernel() {
        // constant image c with an all-ones 3x3 valid kernel -> every output 9c
        let c = 2.5;
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::full(vec![1, 1, 5, 5], c), false);
        let k = tape.leaf(Tensor::full(vec![1, 1, 3, 3], 1.0), false);
        let y = tape.conv2d(x, k, None, 1, Padding::Valid).unwrap();
        assert_eq!(tape.value(y).shape(), &[1, 1, 3, 3]);
        for &v in tape.value(y).data() {
            assert!((v - 9.0 * c).abs() < 1e-12);
        }
    }

    #[test]
    fn conv_kernel_too_large_is_an_error() {
        let mut tape = Tape::<f64>::new();
        let x = tape.leaf(Tensor::zeros(vec![1, 1, 2, 2]), false);
        let k = tape.leaf(Tensor::zeros(vec![1, 1, 3, 3]), false);
        let err = tape.conv2d(x, k, None, 1, Padding::Valid).unwrap_err();
        assert!(matches!(err, TensorError::KernelTooLarge { .. }));
    }

    #[test]
    fn pool_means_and_distributes() {
        let mut tape = Tape::new();
        let x = tape.leaf(t(&[1, 1, 2, 2], &[1.0, 2.0, 3.0, 4.0]), true);
        let y = tape.global_avg_pool(x).unwrap();
        assert_eq!(tape.value(y).data(), &[2.5]);

        // backward of out-grad 1.0 on a 4x4 map puts 1/16 in each cell
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::full(vec![1, 1, 4, 4], 3.0), true);
        let y = tape.global_avg_pool(x).unwrap();
        assert_eq!(tape.value(y).data(), &[3.0]);
        let grads = tape.backward(y).unwrap();
        for &g in grads.grad(x).unwrap().data() {
            assert_eq!(g, 0.0625);
        }
    }

    #[test]
    fn relu_all_negative_backward_is_zero() {
        let mut tape = Tape::new();
        let x = tape.leaf(t(&[3], &[-1.0, -0.5, -2.0]), true);
        let y = tape.relu(x);
        assert_eq!(tape.value(y).data(), &[0.0, 0.0, 0.0]);
        let s = tape.l2_penalty(&[y], 1.0);
        let grads = tape.backward(s).unwrap();
        assert_eq!(grads.grad(x).unwrap().data(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn cross_entropy_rejects_bad_label() {
        let mut tape = Tape::new();
        let logits = tape.leaf(t(&[1, 2], &[0.0, 0.0]), false);
        let err = tape.softmax_cross_entropy(logits, &[2]).unwrap_err();
        match err {
            TensorError::LabelOutOfRange { index, label, classes } => {
                assert_eq!((index, label, classes), (0, 2, 2));
            }
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn l2_penalty_examples() {
        let mut tape = Tape::new();
        let w = tape.leaf(t(&[1], &[3.0]), true);
        let p = tape.l2_penalty(&[w], 1.0);
        assert_eq!(tape.value(p).item(), 9.0);

        let mut tape = Tape::new();
        let w1 = tape.leaf(t(&[2], &[1.0, 2.0]), true);
        let w2 = tape.leaf(t(&[1], &[2.0]), true);
        let p = tape.l2_penalty(&[w1, w2], 1e-5);
        assert!((tape.value(p).item() - 9e-5).abs() < 1e-18);

        let mut tape = Tape::new();
        let w = tape.leaf(t(&[2], &[5.0, -7.0]), true);
        let p = tape.l2_penalty(&[w], 0.0);
        assert_eq!(tape.value(p).item(), 0.0);
    }

    #[test]
    fn backward_of_square_sum() {
        // loss = sum(x*x) at x=[3] -> grad [6]
        let mut tape = Tape::new();
        let x = tape.leaf(t(&[1], &[3.0]), true);
        let loss = tape.l2_penalty(&[x], 1.0);
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.grad(x).unwrap().data(), &[6.0]);
    }

    #[test]
    fn unused_tracked_leaf_gets_zero_grad() {
        let mut tape = Tape::new();
        let used = tape.leaf(t(&[1], &[2.0]), true);
        let unused = tape.leaf(t(&[2], &[1.0, 1.0]), true);
        let untracked = tape.leaf(t(&[2], &[1.0, 1.0]), false);
        let loss = tape.l2_penalty(&[used], 1.0);
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.grad(unused).unwrap().data(), &[0.0, 0.0]);
        assert!(grads.grad(untracked).is_none());
    }

    #[test]
    fn non_scalar_loss_is_contract_error() {
        let mut tape = Tape::new();
        let x = tape.leaf(t(&[2], &[1.0, 2.0]), true);
        let y = tape.relu(x);
        let err = tape.backward(y).unwrap_err();
        assert!(matches!(err, TensorError::NonScalarLoss { .. }));
    }

    #[test]
    fn param_registration_is_deduplicated() {
        let mut tape = Tape::new();
        let id = ParamId::test_id(7);
        let v1 = tape.param(id, t(&[1], &[2.0]), true);
        let v2 = tape.param(id, t(&[1], &[2.0]), true);
        assert_eq!(v1, v2);
        // used twice: once squared in l2, once via combine -> grads accumulate
        let sq = tape.l2_penalty(&[v1], 1.0);
        let grads = tape.backward(sq).unwrap();
        assert_eq!(grads.param_grad(id).unwrap().data(), &[4.0]);
    }
}
