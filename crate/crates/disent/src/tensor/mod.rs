//! Dense n-dimensional tensors and reverse-mode automatic differentiation.
//!
//! [`Tensor`] is an immutable shape + contiguous value buffer. Gradient
//! tracking happens on a [`Tape`]: forward operations are recorded in
//! execution order and [`Tape::backward`] replays them in reverse,
//! accumulating vector-Jacobian products into the leaves that requested
//! gradients. The operation set is exactly what the disentanglement model
//! needs: dense affine maps, 2-D cross-correlation, ReLU, global average
//! pooling, softmax cross-entropy, and an L2 weight penalty.

mod kernels;
mod tape;

pub use kernels::{conv_output_dims, softmax_rows, Padding};
pub use tape::{Gradients, Tape, Var};

use crate::scalar::Scalar;
use std::sync::Arc;
use thiserror::Error;

/// Errors raised by tensor construction and tape operations.
#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape {shape:?} holds {expected} values, got {actual}")]
    ShapeDataMismatch {
        shape: Vec<usize>,
        expected: usize,
        actual: usize,
    },
    #[error("{op}: incompatible shapes {lhs:?} and {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("{op}: expected a rank-{expected} tensor, got shape {shape:?}")]
    RankMismatch {
        op: &'static str,
        expected: usize,
        shape: Vec<usize>,
    },
    #[error("conv2d: kernel {kernel:?} larger than padded input {input:?}")]
    KernelTooLarge {
        kernel: Vec<usize>,
        input: Vec<usize>,
    },
    #[error("label {label} at position {index} out of range for {classes} classes")]
    LabelOutOfRange {
        index: usize,
        label: usize,
        classes: usize,
    },
    #[error("backward: loss must be scalar, got shape {shape:?}")]
    NonScalarLoss { shape: Vec<usize> },
    #[error("{op} produced a non-finite value")]
    NonFinite { op: &'static str },
    #[error("empty shape dimension: {shape:?}")]
    ZeroDim { shape: Vec<usize> },
}

/// Dense tensor: a shape and a contiguous row-major value buffer.
///
/// Storage is reference-counted so tensors clone cheaply onto a tape;
/// mutation goes through [`Tensor::data_mut`], which copies only when the
/// buffer is shared.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Arc<Vec<T>>,
}

impl<T: Scalar> Tensor<T> {
    pub fn from_vec(shape: Vec<usize>, data: Vec<T>) -> Result<Self, TensorError> {
        if shape.iter().any(|&d| d == 0) {
            return Err(TensorError::ZeroDim { shape });
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(TensorError::ShapeDataMismatch {
                shape,
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            shape,
            data: Arc::new(data),
        })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n: usize = shape.iter().product();
        Self {
            shape,
            data: Arc::new(vec![T::zero(); n]),
        }
    }

    pub fn full(shape: Vec<usize>, value: T) -> Self {
        let n: usize = shape.iter().product();
        Self {
            shape,
            data: Arc::new(vec![value; n]),
        }
    }

    /// Rank-1 scalar wrapper (shape `[1]`).
    pub fn scalar(value: T) -> Self {
        Self::full(vec![1], value)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Mutable view of the buffer; copies if the storage is shared.
    pub fn data_mut(&mut self) -> &mut [T] {
        Arc::make_mut(&mut self.data)
    }

    /// The single value of a scalar tensor.
    pub fn item(&self) -> T {
        debug_assert!(self.is_scalar(), "item() on non-scalar {:?}", self.shape);
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Interpret as `[rows, cols]`.
    pub fn dims2(&self, op: &'static str) -> Result<(usize, usize), TensorError> {
        match self.shape[..] {
            [r, c] => Ok((r, c)),
            _ => Err(TensorError::RankMismatch {
                op,
                expected: 2,
                shape: self.shape.clone(),
            }),
        }
    }

    /// Interpret as `[batch, channels, height, width]`.
    pub fn dims4(&self, op: &'static str) -> Result<(usize, usize, usize, usize), TensorError> {
        match self.shape[..] {
            [b, c, h, w] => Ok((b, c, h, w)),
            _ => Err(TensorError::RankMismatch {
                op,
                expected: 4,
                shape: self.shape.clone(),
            }),
        }
    }

    /// Widened copy of the buffer, used by checkpoints and exports.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.to_f64_lossy()).collect()
    }

    /// Rebuild from widened values (exact for f64, round-trip exact for f32).
    pub fn from_f64_slice(shape: Vec<usize>, values: &[f64]) -> Result<Self, TensorError> {
        Self::from_vec(shape, values.iter().map(|&v| T::of(v)).collect())
    }

    /// Order-insensitive structural hash of shape and value bit patterns.
    pub fn bit_digest(&self) -> u64 {
        let mut h = Fnv1a::new();
        for &d in &self.shape {
            h.write_u64(d as u64);
        }
        for v in self.data.iter() {
            h.write_u64(v.to_f64_lossy().to_bits());
        }
        h.finish()
    }
}

/// Minimal FNV-1a accumulator used for deterministic digests and
/// seed derivation. Not cryptographic.
#[derive(Clone, Copy)]
pub struct Fnv1a(u64);

impl Fnv1a {
    pub fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    pub fn write_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn write_u64(&mut self, v: u64) {
        self.write_bytes(&v.to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_checks_length() {
        let err = Tensor::<f64>::from_vec(vec![2, 3], vec![1.0; 5]).unwrap_err();
        assert!(matches!(err, TensorError::ShapeDataMismatch { .. }));
        let ok = Tensor::<f64>::from_vec(vec![2, 3], vec![1.0; 6]).unwrap();
        assert_eq!(ok.shape(), &[2, 3]);
        assert_eq!(ok.len(), 6);
    }

    #[test]
    fn zero_dims_rejected() {
        let err = Tensor::<f64>::from_vec(vec![2, 0], vec![]).unwrap_err();
        assert!(matches!(err, TensorError::ZeroDim { .. }));
    }

    #[test]
    fn data_mut_copies_shared_storage() {
        let a = Tensor::<f64>::full(vec![3], 1.0);
        let mut b = a.clone();
        b.data_mut()[0] = 7.0;
        assert_eq!(a.data()[0], 1.0);
        assert_eq!(b.data()[0], 7.0);
    }

    #[test]
    fn digest_distinguishes_shape_and_values() {
        let a = Tensor::<f64>::from_vec(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor::<f64>::from_vec(vec![4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let c = Tensor::<f64>::from_vec(vec![2, 2], vec![1.0, 2.0, 3.0, 5.0]).unwrap();
        assert_ne!(a.bit_digest(), b.bit_digest());
        assert_ne!(a.bit_digest(), c.bit_digest());
        assert_eq!(a.bit_digest(), a.clone().bit_digest());
    }
}
