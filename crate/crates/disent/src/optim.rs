//! The two optimizers of the training loop: Adam for the encoders and
//! classifiers, SGD with classical momentum for the adversarial heads.
//!
//! Each optimizer owns a fixed set of parameters and refuses to run when a
//! gradient for any of them is missing; it never touches parameters outside
//! its set. Both are deterministic functions of (state, gradients).

use crate::nn::{ParamId, ParamStore};
use crate::scalar::Scalar;
use crate::tensor::Gradients;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("missing gradient for parameter {0}")]
    MissingGrad(String),
}

/// Adam hyperparameters. Defaults: beta1 0.9, beta2 0.999, epsilon 1e-8.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self {
            learning_rate: 1e-5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Bias-corrected Adam over a fixed parameter set.
#[derive(Clone)]
pub struct Adam<T> {
    pub hyper: AdamHyper,
    step_count: u64,
    slots: Vec<AdamSlot<T>>,
}

#[derive(Clone)]
struct AdamSlot<T> {
    id: ParamId,
    first: Vec<T>,
    second: Vec<T>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(store: &ParamStore<T>, ids: Vec<ParamId>, hyper: AdamHyper) -> Self {
        let slots = ids
            .into_iter()
            .map(|id| AdamSlot {
                id,
                first: vec![T::zero(); store.value(id).len()],
                second: vec![T::zero(); store.value(id).len()],
            })
            .collect();
        Self { hyper, step_count: 0, slots }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn owned_ids(&self) -> Vec<ParamId> {
        self.slots.iter().map(|s| s.id).collect()
    }

    /// m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;
    /// p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
    pub fn step(
        &mut self,
        store: &mut ParamStore<T>,
        grads: &Gradients<T>,
    ) -> Result<(), OptimError> {
        self.step_count += 1;
        let lr = T::of(self.hyper.learning_rate);
        let b1 = T::of(self.hyper.beta1);
        let b2 = T::of(self.hyper.beta2);
        let eps = T::of(self.hyper.epsilon);
        let one = T::one();
        let c1 = one - T::of(self.hyper.beta1.powi(self.step_count as i32));
        let c2 = one - T::of(self.hyper.beta2.powi(self.step_count as i32));
        for slot in &mut self.slots {
            let grad = grads
                .param_grad(slot.id)
                .ok_or_else(|| OptimError::MissingGrad(store.meta(slot.id).name.clone()))?;
            let g = grad.data().to_vec();
            let value = store.value_mut(slot.id).data_mut();
            for i in 0..value.len() {
                let gi = g[i];
                slot.first[i] = b1 * slot.first[i] + (one - b1) * gi;
                slot.second[i] = b2 * slot.second[i] + (one - b2) * gi * gi;
                let m_hat = slot.first[i] / c1;
                let v_hat = slot.second[i] / c2;
                value[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }

    /// (name, first moment, second moment) per owned parameter, widened for
    /// checkpointing.
    pub fn export_state(&self, store: &ParamStore<T>) -> Vec<(String, Vec<f64>, Vec<f64>)> {
        self.slots
            .iter()
            .map(|s| {
                (
                    store.meta(s.id).name.clone(),
                    s.first.iter().map(|v| v.to_f64_lossy()).collect(),
                    s.second.iter().map(|v| v.to_f64_lossy()).collect(),
                )
            })
            .collect()
    }

    pub fn import_state(
        &mut self,
        step_count: u64,
        moments: &[(String, Vec<f64>, Vec<f64>)],
        store: &ParamStore<T>,
    ) {
        self.step_count = step_count;
        for slot in &mut self.slots {
            let name = &store.meta(slot.id).name;
            if let Some((_, m, v)) = moments.iter().find(|(n, _, _)| n == name) {
                slot.first = m.iter().map(|&x| T::of(x)).collect();
                slot.second = v.iter().map(|&x| T::of(x)).collect();
            }
        }
    }
}

/// SGD-with-momentum hyperparameters. Classical (non-Nesterov) form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumHyper {
    pub learning_rate: f64,
    pub momentum: f64,
}

impl Default for MomentumHyper {
    fn default() -> Self {
        Self {
            learning_rate: 1e-5,
            momentum: 0.9,
        }
    }
}

/// v <- mu v + g;  p <- p - lr v.
#[derive(Clone)]
pub struct MomentumSgd<T> {
    pub hyper: MomentumHyper,
    slots: Vec<(ParamId, Vec<T>)>,
}

impl<T: Scalar> MomentumSgd<T> {
    pub fn new(store: &ParamStore<T>, ids: Vec<ParamId>, hyper: MomentumHyper) -> Self {
        let slots = ids
            .into_iter()
            .map(|id| (id, vec![T::zero(); store.value(id).len()]))
            .collect();
        Self { hyper, slots }
    }

    pub fn owned_ids(&self) -> Vec<ParamId> {
        self.slots.iter().map(|(id, _)| *id).collect()
    }

    pub fn step(
        &mut self,
        store: &mut ParamStore<T>,
        grads: &Gradients<T>,
    ) -> Result<(), OptimError> {
        let lr = T::of(self.hyper.learning_rate);
        let mu = T::of(self.hyper.momentum);
        for (id, velocity) in &mut self.slots {
            let grad = grads
                .param_grad(*id)
                .ok_or_else(|| OptimError::MissingGrad(store.meta(*id).name.clone()))?;
            let g = grad.data().to_vec();
            let value = store.value_mut(*id).data_mut();
            for i in 0..value.len() {
                velocity[i] = mu * velocity[i] + g[i];
                value[i] -= lr * velocity[i];
            }
        }
        Ok(())
    }

    pub fn export_state(&self, store: &ParamStore<T>) -> Vec<(String, Vec<f64>)> {
        self.slots
            .iter()
            .map(|(id, v)| {
                (
                    store.meta(*id).name.clone(),
                    v.iter().map(|x| x.to_f64_lossy()).collect(),
                )
            })
            .collect()
    }

    pub fn import_state(&mut self, velocities: &[(String, Vec<f64>)], store: &ParamStore<T>) {
        for (id, velocity) in &mut self.slots {
            let name = &store.meta(*id).name;
            if let Some((_, v)) = velocities.iter().find(|(n, _)| n == name) {
                *velocity = v.iter().map(|&x| T::of(x)).collect();
            }
        }
    }
}
