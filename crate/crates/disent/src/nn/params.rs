//! Named, grouped model parameters.
//!
//! All trainable tensors live in a [`ParamStore`]; model structs hold
//! [`ParamId`] handles plus layer hyperparameters. The store knows each
//! parameter's group (which of the six named collections it belongs to)
//! and kind (weight or bias), which is what the optimizers, the L2
//! penalty, checkpointing, and the partition invariants key off.

use crate::scalar::Scalar;
use crate::tensor::{Fnv1a, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Stable handle to one parameter tensor in a [`ParamStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }

    #[doc(hidden)]
    pub fn test_id(raw: usize) -> Self {
        ParamId(raw)
    }
}

/// The six parameter collections of the two-task adversarial model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamGroup {
    /// Encoder for task A.
    EncA,
    /// Encoder for task B.
    EncB,
    /// Classifier head for task A.
    ClsA,
    /// Classifier head for task B.
    ClsB,
    /// Adversarial head predicting task A from the task-B features.
    AdvA,
    /// Adversarial head predicting task B from the task-A features.
    AdvB,
}

impl ParamGroup {
    pub const ALL: [ParamGroup; 6] = [
        ParamGroup::EncA,
        ParamGroup::EncB,
        ParamGroup::ClsA,
        ParamGroup::ClsB,
        ParamGroup::AdvA,
        ParamGroup::AdvB,
    ];

    /// Groups updated by the main (encoder/classifier) objective.
    pub const MAIN: [ParamGroup; 4] = [
        ParamGroup::EncA,
        ParamGroup::EncB,
        ParamGroup::ClsA,
        ParamGroup::ClsB,
    ];

    /// Groups updated by the adversary objective.
    pub const ADVERSARY: [ParamGroup; 2] = [ParamGroup::AdvA, ParamGroup::AdvB];

    pub fn is_adversary(self) -> bool {
        matches!(self, ParamGroup::AdvA | ParamGroup::AdvB)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ParamGroup::EncA => "enc_a",
            ParamGroup::EncB => "enc_b",
            ParamGroup::ClsA => "cls_a",
            ParamGroup::ClsB => "cls_b",
            ParamGroup::AdvA => "adv_a",
            ParamGroup::AdvB => "adv_b",
        }
    }

    pub fn from_str_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.as_str() == s)
    }
}

/// Weight tensors get He initialization and L2 decay; biases get neither.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Weight,
    Bias,
}

#[derive(Clone, Debug)]
pub struct ParamMeta {
    pub name: String,
    pub group: ParamGroup,
    pub kind: ParamKind,
    /// Fan-in used for He initialization (inputs feeding one output unit).
    pub fan_in: usize,
}

/// Flat storage for every model parameter, ordered by registration.
#[derive(Clone)]
pub struct ParamStore<T> {
    tensors: Vec<Tensor<T>>,
    meta: Vec<ParamMeta>,
}

impl<T: Scalar> Default for ParamStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> ParamStore<T> {
    pub fn new() -> Self {
        Self {
            tensors: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        group: ParamGroup,
        kind: ParamKind,
        shape: Vec<usize>,
        fan_in: usize,
    ) -> ParamId {
        self.tensors.push(Tensor::zeros(shape));
        self.meta.push(ParamMeta {
            name: name.into(),
            group,
            kind,
            fan_in,
        });
        ParamId(self.tensors.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn value(&self, id: ParamId) -> &Tensor<T> {
        &self.tensors[id.0]
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor<T> {
        &mut self.tensors[id.0]
    }

    pub fn set_value(&mut self, id: ParamId, tensor: Tensor<T>) {
        assert_eq!(
            self.tensors[id.0].shape(),
            tensor.shape(),
            "parameter {} shape change",
            self.meta[id.0].name
        );
        self.tensors[id.0] = tensor;
    }

    pub fn meta(&self, id: ParamId) -> &ParamMeta {
        &self.meta[id.0]
    }

    /// All ids in registration order.
    pub fn ids(&self) -> impl Iterator<Item = ParamId> + '_ {
        (0..self.tensors.len()).map(ParamId)
    }

    /// Ids belonging to any of the given groups, in registration order.
    pub fn group_ids(&self, groups: &[ParamGroup]) -> Vec<ParamId> {
        self.ids()
            .filter(|&id| groups.contains(&self.meta[id.0].group))
            .collect()
    }

    /// Weight (non-bias) ids of the given groups: the L2 penalty set.
    pub fn weight_ids(&self, groups: &[ParamGroup]) -> Vec<ParamId> {
        self.ids()
            .filter(|&id| {
                self.meta[id.0].kind == ParamKind::Weight
                    && groups.contains(&self.meta[id.0].group)
            })
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.tensors.iter().map(|t| t.len()).sum()
    }

    /// He initialization: weights ~ Normal(0, sqrt(2/fan_in)), biases zero.
    /// Fully determined by the seed.
    pub fn init_he(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..self.tensors.len() {
            match self.meta[i].kind {
                ParamKind::Bias => {
                    let shape = self.tensors[i].shape().to_vec();
                    self.tensors[i] = Tensor::zeros(shape);
                }
                ParamKind::Weight => {
                    let std = (2.0 / self.meta[i].fan_in as f64).sqrt();
                    let dist = Normal::new(0.0, std).expect("positive stddev");
                    let data: Vec<T> = (0..self.tensors[i].len())
                        .map(|_| T::of(dist.sample(&mut rng)))
                        .collect();
                    self.tensors[i] =
                        Tensor::from_vec(self.tensors[i].shape().to_vec(), data).unwrap();
                }
            }
        }
    }

    /// Bitwise digest of the given parameters, for partition checks.
    pub fn digest(&self, ids: &[ParamId]) -> u64 {
        let mut h = Fnv1a::new();
        for &id in ids {
            h.write_u64(self.tensors[id.0].bit_digest());
        }
        h.finish()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store_with(shape: &[usize], fan_in: usize) -> (ParamStore<f64>, ParamId) {
        let mut s = ParamStore::new();
        let id = s.register("w", ParamGroup::EncA, ParamKind::Weight, shape.to_vec(), fan_in);
        (s, id)
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        let (mut a, id) = store_with(&[64, 3, 3, 3], 27);
        let (mut b, _) = store_with(&[64, 3, 3, 3], 27);
        a.init_he(9);
        b.init_he(9);
        assert_eq!(a.value(id).data(), b.value(id).data());
        let (mut c, _) = store_with(&[64, 3, 3, 3], 27);
        c.init_he(10);
        assert_ne!(a.value(id).data(), c.value(id).data());
    }

    #[test]
    fn he_init_stddev_matches_fan_in() {
        // 3x3x64 kernel: fan_in 576, expect stddev sqrt(2/576) within 10%
        let fan_in = 3 * 3 * 64;
        let (mut s, id) = store_with(&[32, 64, 3, 3], fan_in);
        s.init_he(1);
        let data = s.value(id).data();
        let n = data.len() as f64;
        let mean: f64 = data.iter().sum::<f64>() / n;
        let var: f64 = data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let expected = (2.0 / fan_in as f64).sqrt();
        assert!(
            (var.sqrt() - expected).abs() / expected < 0.1,
            "stddev {} vs expected {expected}",
            var.sqrt()
        );
    }

    #[test]
    fn biases_init_to_zero() {
        let mut s = ParamStore::<f64>::new();
        let b = s.register("b", ParamGroup::ClsA, ParamKind::Bias, vec![16], 16);
        s.init_he(3);
        assert!(s.value(b).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn group_and_weight_selection() {
        let mut s = ParamStore::<f64>::new();
        let w_enc = s.register("ew", ParamGroup::EncA, ParamKind::Weight, vec![2], 2);
        let b_enc = s.register("eb", ParamGroup::EncA, ParamKind::Bias, vec![2], 2);
        let w_adv = s.register("aw", ParamGroup::AdvB, ParamKind::Weight, vec![2], 2);
        assert_eq!(s.group_ids(&[ParamGroup::EncA]), vec![w_enc, b_enc]);
        assert_eq!(s.weight_ids(&[ParamGroup::EncA, ParamGroup::AdvB]), vec![w_enc, w_adv]);
        assert_eq!(s.group_ids(&ParamGroup::ADVERSARY), vec![w_adv]);
    }
}
