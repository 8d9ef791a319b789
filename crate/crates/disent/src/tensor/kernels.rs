//! Raw forward/backward compute kernels over flat slices.
//!
//! Every kernel computes each output element with a fixed, serial summation
//! order; parallelism (rayon) only distributes *independent* output elements
//! across threads, so results are bitwise identical regardless of thread
//! count or scheduling.

use crate::scalar::Scalar;
use rayon::prelude::*;

/// Zero-padding policy for 2-D cross-correlation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Padding {
    /// No padding; output shrinks by the kernel extent.
    Valid,
    /// Groups output size to `ceil(input / stride)`; when the total pad is
    /// odd the extra pixel goes on the bottom/right.
    Same,
}

/// Per-axis padding split (before, after).
fn pad_axis(input: usize, kernel: usize, stride: usize, padding: Padding) -> (usize, usize) {
    match padding {
        Padding::Valid => (0, 0),
        Padding::Same => {
            let out = input.div_ceil(stride);
            let total = ((out - 1) * stride + kernel).saturating_sub(input);
            (total / 2, total - total / 2)
        }
    }
}

/// Output spatial dims and padding for conv2d. Errors are reported by the
/// caller; this returns `None` when the kernel exceeds the padded input.
pub fn conv_output_dims(
    (h, w): (usize, usize),
    (kh, kw): (usize, usize),
    stride: usize,
    padding: Padding,
) -> Option<((usize, usize), (usize, usize, usize, usize))> {
    let (pt, pb) = pad_axis(h, kh, stride, padding);
    let (pl, pr) = pad_axis(w, kw, stride, padding);
    if kh > h + pt + pb || kw > w + pl + pr {
        return None;
    }
    let oh = (h + pt + pb - kh) / stride + 1;
    let ow = (w + pl + pr - kw) / stride + 1;
    Some(((oh, ow), (pt, pb, pl, pr)))
}

/// Valid output-column range for a kernel column `j`:
/// all `ow` with `0 <= ow*stride + j - pad_left < w`.
#[inline]
fn ow_range(w: usize, out_w: usize, j: usize, pad_left: usize, stride: usize) -> (usize, usize) {
    let lo = if pad_left > j {
        (pad_left - j).div_ceil(stride)
    } else {
        0
    };
    let hi_excl = (w + pad_left).saturating_sub(j).div_ceil(stride);
    (lo.min(out_w), hi_excl.min(out_w))
}

/// x: [B,C,H,W], k: [F,C,KH,KW], bias: [F] -> out [B,F,OH,OW].
#[allow(clippy::too_many_arguments)]
pub fn conv2d_forward<T: Scalar>(
    x: &[T],
    (bsz, cin, h, w): (usize, usize, usize, usize),
    k: &[T],
    (nf, kh, kw): (usize, usize, usize),
    bias: Option<&[T]>,
    stride: usize,
    (oh, ow): (usize, usize),
    (pt, _pb, pl, _pr): (usize, usize, usize, usize),
) -> Vec<T> {
    let mut out = vec![T::zero(); bsz * nf * oh * ow];
    out.par_chunks_mut(oh * ow).enumerate().for_each(|(bf, map)| {
        let (b, f) = (bf / nf, bf % nf);
        if let Some(bias) = bias {
            map.fill(bias[f]);
        }
        for c in 0..cin {
            let x_chan = &x[((b * cin + c) * h) * w..((b * cin + c) * h + h) * w];
            for i in 0..kh {
                for j in 0..kw {
                    let wgt = k[((f * cin + c) * kh + i) * kw + j];
                    if wgt == T::zero() {
                        continue;
                    }
                    let (lo, hi) = ow_range(w, ow, j, pl, stride);
                    for r in 0..oh {
                        let ih = (r * stride + i) as isize - pt as isize;
                        if ih < 0 || ih >= h as isize {
                            continue;
                        }
                        let x_row = &x_chan[ih as usize * w..(ih as usize + 1) * w];
                        let o_row = &mut map[r * ow..(r + 1) * ow];
                        for oc in lo..hi {
                            let iw = oc * stride + j - pl;
                            o_row[oc] += wgt * x_row[iw];
                        }
                    }
                }
            }
        }
    });
    out
}

/// Gradient w.r.t. the conv input. dout: [B,F,OH,OW] -> dx [B,C,H,W].
#[allow(clippy::too_many_arguments)]
pub fn conv2d_backward_input<T: Scalar>(
    dout: &[T],
    (bsz, cin, h, w): (usize, usize, usize, usize),
    k: &[T],
    (nf, kh, kw): (usize, usize, usize),
    stride: usize,
    (oh, ow): (usize, usize),
    (pt, _pb, pl, _pr): (usize, usize, usize, usize),
) -> Vec<T> {
    let mut dx = vec![T::zero(); bsz * cin * h * w];
    dx.par_chunks_mut(h * w).enumerate().for_each(|(bc, map)| {
        let (b, c) = (bc / cin, bc % cin);
        for f in 0..nf {
            let d_chan = &dout[((b * nf + f) * oh) * ow..((b * nf + f) * oh + oh) * ow];
            for i in 0..kh {
                for j in 0..kw {
                    let wgt = k[((f * cin + c) * kh + i) * kw + j];
                    if wgt == T::zero() {
                        continue;
                    }
                    let (lo, hi) = ow_range(w, ow, j, pl, stride);
                    for r in 0..oh {
                        let ih = (r * stride + i) as isize - pt as isize;
                        if ih < 0 || ih >= h as isize {
                            continue;
                        }
                        let d_row = &d_chan[r * ow..(r + 1) * ow];
                        let x_row = &mut map[ih as usize * w..(ih as usize + 1) * w];
                        for oc in lo..hi {
                            let iw = oc * stride + j - pl;
                            x_row[iw] += wgt * d_row[oc];
                        }
                    }
                }
            }
        }
    });
    dx
}

/// Gradient w.r.t. the conv kernel. -> dk [F,C,KH,KW].
#[allow(clippy::too_many_arguments)]
pub fn conv2d_backward_kernel<T: Scalar>(
    x: &[T],
    (bsz, cin, h, w): (usize, usize, usize, usize),
    dout: &[T],
    (nf, kh, kw): (usize, usize, usize),
    stride: usize,
    (oh, ow): (usize, usize),
    (pt, _pb, pl, _pr): (usize, usize, usize, usize),
) -> Vec<T> {
    let mut dk = vec![T::zero(); nf * cin * kh * kw];
    dk.par_chunks_mut(cin * kh * kw)
        .enumerate()
        .for_each(|(f, dk_f)| {
            for b in 0..bsz {
                let d_chan = &dout[((b * nf + f) * oh) * ow..((b * nf + f) * oh + oh) * ow];
                for c in 0..cin {
                    let x_chan = &x[((b * cin + c) * h) * w..((b * cin + c) * h + h) * w];
                    for i in 0..kh {
                        for j in 0..kw {
                            let (lo, hi) = ow_range(w, ow, j, pl, stride);
                            let mut acc = T::zero();
                            for r in 0..oh {
                                let ih = (r * stride + i) as isize - pt as isize;
                                if ih < 0 || ih >= h as isize {
                                    continue;
                                }
                                let d_row = &d_chan[r * ow..(r + 1) * ow];
                                let x_row = &x_chan[ih as usize * w..(ih as usize + 1) * w];
                                for oc in lo..hi {
                                    let iw = oc * stride + j - pl;
                                    acc += d_row[oc] * x_row[iw];
                                }
                            }
                            dk_f[(c * kh + i) * kw + j] += acc;
                        }
                    }
                }
            }
        });
    dk
}

/// Gradient w.r.t. the conv bias: per-filter sum of dout.
pub fn conv2d_backward_bias<T: Scalar>(
    dout: &[T],
    (bsz, nf, oh, ow): (usize, usize, usize, usize),
) -> Vec<T> {
    let mut db = vec![T::zero(); nf];
    for b in 0..bsz {
        for (f, db_f) in db.iter_mut().enumerate() {
            let base = ((b * nf + f) * oh) * ow;
            for v in &dout[base..base + oh * ow] {
                *db_f += *v;
            }
        }
    }
    db
}

/// x: [B,I] @ w: [I,O] + bias: [O] -> [B,O].
pub fn dense_forward<T: Scalar>(
    x: &[T],
    (bsz, input): (usize, usize),
    w: &[T],
    output: usize,
    bias: &[T],
) -> Vec<T> {
    let mut out = vec![T::zero(); bsz * output];
    out.par_chunks_mut(output).enumerate().for_each(|(b, row)| {
        row.copy_from_slice(bias);
        for i in 0..input {
            let xv = x[b * input + i];
            if xv == T::zero() {
                continue;
            }
            let w_row = &w[i * output..(i + 1) * output];
            for (o, wv) in row.iter_mut().zip(w_row) {
                *o += xv * *wv;
            }
        }
    });
    out
}

/// dx[b,i] = sum_o dout[b,o] * w[i,o].
pub fn dense_backward_input<T: Scalar>(
    dout: &[T],
    (bsz, input): (usize, usize),
    w: &[T],
    output: usize,
) -> Vec<T> {
    let mut dx = vec![T::zero(); bsz * input];
    dx.par_chunks_mut(input).enumerate().for_each(|(b, row)| {
        let d_row = &dout[b * output..(b + 1) * output];
        for (i, dv) in row.iter_mut().enumerate() {
            let w_row = &w[i * output..(i + 1) * output];
            let mut acc = T::zero();
            for (d, wv) in d_row.iter().zip(w_row) {
                acc += *d * *wv;
            }
            *dv = acc;
        }
    });
    dx
}

/// dw[i,o] = sum_b x[b,i] * dout[b,o].
pub fn dense_backward_weight<T: Scalar>(
    x: &[T],
    (bsz, input): (usize, usize),
    dout: &[T],
    output: usize,
) -> Vec<T> {
    let mut dw = vec![T::zero(); input * output];
    dw.par_chunks_mut(output).enumerate().for_each(|(i, row)| {
        for b in 0..bsz {
            let xv = x[b * input + i];
            if xv == T::zero() {
                continue;
            }
            let d_row = &dout[b * output..(b + 1) * output];
            for (o, d) in row.iter_mut().zip(d_row) {
                *o += xv * *d;
            }
        }
    });
    dw
}

/// db[o] = sum_b dout[b,o].
pub fn dense_backward_bias<T: Scalar>(dout: &[T], (bsz, output): (usize, usize)) -> Vec<T> {
    let mut db = vec![T::zero(); output];
    for b in 0..bsz {
        for (o, d) in db.iter_mut().zip(&dout[b * output..(b + 1) * output]) {
            *o += *d;
        }
    }
    db
}

pub fn relu_forward<T: Scalar>(x: &[T]) -> Vec<T> {
    x.iter().map(|&v| v.max(T::zero())).collect()
}

/// Subgradient at exactly zero is zero.
pub fn relu_backward<T: Scalar>(x: &[T], dout: &[T]) -> Vec<T> {
    x.iter()
        .zip(dout)
        .map(|(&v, &d)| if v > T::zero() { d } else { T::zero() })
        .collect()
}

/// x: [B,C,H,W] -> [B,C] spatial mean.
pub fn global_avg_pool_forward<T: Scalar>(
    x: &[T],
    (bsz, cin, h, w): (usize, usize, usize, usize),
) -> Vec<T> {
    let area = T::of((h * w) as f64);
    let mut out = vec![T::zero(); bsz * cin];
    for (bc, o) in out.iter_mut().enumerate() {
        let base = bc * h * w;
        let mut acc = T::zero();
        for v in &x[base..base + h * w] {
            acc += *v;
        }
        *o = acc / area;
    }
    out
}

/// Distributes each output gradient uniformly over its spatial cells.
pub fn global_avg_pool_backward<T: Scalar>(
    dout: &[T],
    (bsz, cin, h, w): (usize, usize, usize, usize),
) -> Vec<T> {
    let area = T::of((h * w) as f64);
    let mut dx = vec![T::zero(); bsz * cin * h * w];
    for bc in 0..bsz * cin {
        let g = dout[bc] / area;
        dx[bc * h * w..(bc + 1) * h * w].fill(g);
    }
    dx
}

/// Row-wise softmax with max-subtraction stabilization. logits: [B,K].
pub fn softmax_rows<T: Scalar>(logits: &[T], (bsz, k): (usize, usize)) -> Vec<T> {
    let mut probs = vec![T::zero(); bsz * k];
    for b in 0..bsz {
        let row = &logits[b * k..(b + 1) * k];
        let p_row = &mut probs[b * k..(b + 1) * k];
        let mut m = row[0];
        for &v in &row[1..] {
            m = m.max(v);
        }
        let mut sum = T::zero();
        for (p, &v) in p_row.iter_mut().zip(row) {
            *p = (v - m).exp();
            sum += *p;
        }
        for p in p_row.iter_mut() {
            *p /= sum;
        }
    }
    probs
}

/// Mean over the batch of `-log softmax(logits)[label]`.
/// Returns `(loss, probs)`; the probabilities are cached for backward.
pub fn softmax_cross_entropy_forward<T: Scalar>(
    logits: &[T],
    (bsz, k): (usize, usize),
    labels: &[usize],
) -> (T, Vec<T>) {
    let probs = softmax_rows(logits, (bsz, k));
    let mut loss = T::zero();
    for (b, &label) in labels.iter().enumerate() {
        let row = &logits[b * k..(b + 1) * k];
        let mut m = row[0];
        for &v in &row[1..] {
            m = m.max(v);
        }
        let mut sum = T::zero();
        for &v in row {
            sum += (v - m).exp();
        }
        // -log p = logsumexp - logit[label], computed without re-exponentiating
        loss += m + sum.ln() - row[label];
    }
    (loss / T::of(bsz as f64), probs)
}

/// dlogits[b,k] = (softmax - onehot) * dloss / B.
pub fn softmax_cross_entropy_backward<T: Scalar>(
    probs: &[T],
    (bsz, k): (usize, usize),
    labels: &[usize],
    dloss: T,
) -> Vec<T> {
    let scale = dloss / T::of(bsz as f64);
    let mut dl = probs.to_vec();
    for (b, &label) in labels.iter().enumerate() {
        let row = &mut dl[b * k..(b + 1) * k];
        row[label] -= T::one();
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    dl
}
