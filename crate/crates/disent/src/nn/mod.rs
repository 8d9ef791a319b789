//! Model components: residual-block encoders, dense classifier heads,
//! adversarial heads, and the full two-task disentanglement model.
//!
//! The wiring is the cross pattern of the adversarial multi-task setup:
//! two independent encoders produce latent vectors `z_a` and `z_b`; each
//! task's classifier reads its own latent, while each adversarial head
//! reads the *other* task's latent and tries to predict this task anyway.

mod checkpoint;
mod params;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointError, OptimState};
pub use params::{ParamGroup, ParamId, ParamKind, ParamMeta, ParamStore};

use crate::scalar::Scalar;
use crate::tensor::{Padding, Tape, TensorError, Var};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(
        "input {h}x{w} not divisible by the encoder's cumulative stride {required}"
    )]
    IndivisibleInput { h: usize, w: usize, required: usize },
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
}

/// Architecture hyperparameters.
///
/// Defaults: six residual blocks producing `[16,16,32,32,64,128]` channels
/// with stride 2 at blocks 1, 3, 5 and 6, so a 64x64 input pools from a
/// 4x4 map into a 128-wide latent; heads use one 256-unit hidden layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_channels: usize,
    pub channels: Vec<usize>,
    pub strides: Vec<usize>,
    pub head_hidden: Vec<usize>,
    pub classes_a: usize,
    pub classes_b: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            input_channels: 1,
            channels: vec![16, 16, 32, 32, 64, 128],
            strides: vec![2, 1, 2, 1, 2, 2],
            head_hidden: vec![256],
            classes_a: 2,
            classes_b: 2,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        if self.channels.is_empty() {
            return Err(NnError::InvalidConfig("at least one residual block".into()));
        }
        if self.channels.len() != self.strides.len() {
            return Err(NnError::InvalidConfig(format!(
                "channels ({}) and strides ({}) must have equal length",
                self.channels.len(),
                self.strides.len()
            )));
        }
        if self.strides.iter().any(|&s| s == 0) {
            return Err(NnError::InvalidConfig("strides must be >= 1".into()));
        }
        if self.head_hidden.is_empty() {
            return Err(NnError::InvalidConfig(
                "heads need at least one hidden layer".into(),
            ));
        }
        if self.classes_a < 2 || self.classes_b < 2 {
            return Err(NnError::InvalidConfig("each task needs >= 2 classes".into()));
        }
        Ok(())
    }

    /// Product of the block strides; input spatial dims must divide by it.
    pub fn cumulative_stride(&self) -> usize {
        self.strides.iter().product()
    }

    /// Width of the pooled latent vector.
    pub fn latent_width(&self) -> usize {
        *self.channels.last().expect("validated non-empty")
    }
}

/// Which parameter groups receive gradients in the current pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GradScope {
    main: bool,
    adversary: bool,
}

impl GradScope {
    /// Encoder + classifier groups tracked (the main objective).
    pub const MAIN: GradScope = GradScope { main: true, adversary: false };
    /// Adversary heads tracked (the adversary objective).
    pub const ADVERSARY: GradScope = GradScope { main: false, adversary: true };
    /// Nothing tracked: evaluation / feature extraction.
    pub const FROZEN: GradScope = GradScope { main: false, adversary: false };

    pub fn tracks(&self, group: ParamGroup) -> bool {
        if group.is_adversary() {
            self.adversary
        } else {
            self.main
        }
    }
}

#[derive(Clone, Debug)]
struct ConvLayer {
    kernel: ParamId,
    bias: Option<ParamId>,
    stride: usize,
}

impl ConvLayer {
    fn forward<T: Scalar>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        scope: GradScope,
        x: Var,
    ) -> Result<Var, TensorError> {
        let k = read_param(tape, store, scope, self.kernel);
        let b = self.bias.map(|id| read_param(tape, store, scope, id));
        tape.conv2d(x, k, b, self.stride, Padding::Same)
    }
}

fn read_param<T: Scalar>(
    tape: &mut Tape<T>,
    store: &ParamStore<T>,
    scope: GradScope,
    id: ParamId,
) -> Var {
    tape.param(id, store.value(id).clone(), scope.tracks(store.meta(id).group))
}

/// Pre-activation residual block.
///
/// `a = relu(x); y = shortcut(a) + conv2(relu(conv1(a)))` where the
/// shortcut is the identity when shape is preserved and a stride-matched
/// 1x1 convolution otherwise. With all conv weights zero and an identity
/// shortcut the block reduces to `relu(x)`.
#[derive(Clone, Debug)]
pub struct ResidualBlock {
    conv1: ConvLayer,
    conv2: ConvLayer,
    projection: Option<ConvLayer>,
}

impl ResidualBlock {
    fn build<T: Scalar>(
        store: &mut ParamStore<T>,
        group: ParamGroup,
        name: &str,
        c_in: usize,
        c_out: usize,
        stride: usize,
    ) -> Self {
        let conv1 = ConvLayer {
            kernel: store.register(
                format!("{name}.conv1.kernel"),
                group,
                ParamKind::Weight,
                vec![c_out, c_in, 3, 3],
                c_in * 9,
            ),
            bias: Some(store.register(
                format!("{name}.conv1.bias"),
                group,
                ParamKind::Bias,
                vec![c_out],
                c_in * 9,
            )),
            stride,
        };
        let conv2 = ConvLayer {
            kernel: store.register(
                format!("{name}.conv2.kernel"),
                group,
                ParamKind::Weight,
                vec![c_out, c_out, 3, 3],
                c_out * 9,
            ),
            bias: Some(store.register(
                format!("{name}.conv2.bias"),
                group,
                ParamKind::Bias,
                vec![c_out],
                c_out * 9,
            )),
            stride: 1,
        };
        let projection = (stride != 1 || c_in != c_out).then(|| ConvLayer {
            kernel: store.register(
                format!("{name}.proj.kernel"),
                group,
                ParamKind::Weight,
                vec![c_out, c_in, 1, 1],
                c_in,
            ),
            bias: None,
            stride,
        });
        Self { conv1, conv2, projection }
    }

    fn forward<T: Scalar>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        scope: GradScope,
        x: Var,
    ) -> Result<Var, TensorError> {
        let a = tape.relu(x);
        let h = self.conv1.forward(tape, store, scope, a)?;
        let h = tape.relu(h);
        let h = self.conv2.forward(tape, store, scope, h)?;
        let shortcut = match &self.projection {
            Some(proj) => proj.forward(tape, store, scope, a)?,
            None => a,
        };
        tape.add(shortcut, h)
    }
}

/// Convolutional encoder: residual blocks followed by global average
/// pooling into a `[B, latent]` feature vector.
#[derive(Clone, Debug)]
pub struct Encoder {
    blocks: Vec<ResidualBlock>,
    cumulative_stride: usize,
    latent: usize,
}

impl Encoder {
    fn build<T: Scalar>(
        store: &mut ParamStore<T>,
        group: ParamGroup,
        prefix: &str,
        cfg: &ModelConfig,
    ) -> Self {
        let mut blocks = Vec::with_capacity(cfg.channels.len());
        let mut c_in = cfg.input_channels;
        for (i, (&c_out, &stride)) in cfg.channels.iter().zip(&cfg.strides).enumerate() {
            blocks.push(ResidualBlock::build(
                store,
                group,
                &format!("{prefix}.block{i}"),
                c_in,
                c_out,
                stride,
            ));
            c_in = c_out;
        }
        Self {
            blocks,
            cumulative_stride: cfg.cumulative_stride(),
            latent: cfg.latent_width(),
        }
    }

    pub fn latent_width(&self) -> usize {
        self.latent
    }

    /// `[B, C, H, W] -> [B, latent]`.
    pub fn forward<T: Scalar>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        scope: GradScope,
        x: Var,
    ) -> Result<Var, NnError> {
        let (_, _, h, w) = tape.value(x).dims4("encode")?;
        if h % self.cumulative_stride != 0 || w % self.cumulative_stride != 0 {
            return Err(NnError::IndivisibleInput {
                h,
                w,
                required: self.cumulative_stride,
            });
        }
        let mut cur = x;
        for block in &self.blocks {
            cur = block.forward(tape, store, scope, cur)?;
        }
        Ok(tape.global_avg_pool(cur)?)
    }
}

#[derive(Clone, Debug)]
struct DenseLayer {
    weight: ParamId,
    bias: ParamId,
}

impl DenseLayer {
    fn build<T: Scalar>(
        store: &mut ParamStore<T>,
        group: ParamGroup,
        name: &str,
        input: usize,
        output: usize,
    ) -> Self {
        Self {
            weight: store.register(
                format!("{name}.weight"),
                group,
                ParamKind::Weight,
                vec![input, output],
                input,
            ),
            bias: store.register(
                format!("{name}.bias"),
                group,
                ParamKind::Bias,
                vec![output],
                input,
            ),
        }
    }

    fn forward<T: Scalar>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        scope: GradScope,
        x: Var,
    ) -> Result<Var, TensorError> {
        let w = read_param(tape, store, scope, self.weight);
        let b = read_param(tape, store, scope, self.bias);
        tape.dense(x, w, b)
    }
}

/// Logits plus the cached penultimate activation (for embedding export).
#[derive(Clone, Copy, Debug)]
pub struct HeadOut {
    pub logits: Var,
    pub penultimate: Var,
}

/// Dense classifier: hidden layers with ReLU, then a linear output layer
/// whose width is the task's class count.
#[derive(Clone, Debug)]
pub struct ClassifierHead {
    hidden: Vec<DenseLayer>,
    output: DenseLayer,
}

impl ClassifierHead {
    fn build<T: Scalar>(
        store: &mut ParamStore<T>,
        group: ParamGroup,
        prefix: &str,
        input: usize,
        hidden: &[usize],
        classes: usize,
    ) -> Self {
        let mut layers = Vec::with_capacity(hidden.len());
        let mut cur = input;
        for (i, &width) in hidden.iter().enumerate() {
            layers.push(DenseLayer::build(
                store,
                group,
                &format!("{prefix}.dense{i}"),
                cur,
                width,
            ));
            cur = width;
        }
        let output = DenseLayer::build(store, group, &format!("{prefix}.out"), cur, classes);
        Self { hidden: layers, output }
    }

    /// `[B, C] -> [B, classes]`; the penultimate var is the activation of
    /// the last hidden layer.
    pub fn forward<T: Scalar>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        scope: GradScope,
        z: Var,
    ) -> Result<HeadOut, TensorError> {
        let mut cur = z;
        for layer in &self.hidden {
            cur = layer.forward(tape, store, scope, cur)?;
            cur = tape.relu(cur);
        }
        let penultimate = cur;
        let logits = self.output.forward(tape, store, scope, cur)?;
        Ok(HeadOut { logits, penultimate })
    }
}

/// All four logit sets of one forward pass, plus latents and penultimate
/// activations.
#[derive(Clone, Copy, Debug)]
pub struct ModelOut {
    pub z_a: Var,
    pub z_b: Var,
    /// Task-A logits from the task-A features.
    pub head_a: HeadOut,
    /// Task-B logits from the task-B features.
    pub head_b: HeadOut,
    /// Task-A logits predicted adversarially from the task-B features.
    pub head_adv_a: HeadOut,
    /// Task-B logits predicted adversarially from the task-A features.
    pub head_adv_b: HeadOut,
}

/// The full two-encoder, four-head model.
#[derive(Clone, Debug)]
pub struct DisentangleModel {
    pub config: ModelConfig,
    enc_a: Encoder,
    enc_b: Encoder,
    cls_a: ClassifierHead,
    cls_b: ClassifierHead,
    adv_a: ClassifierHead,
    adv_b: ClassifierHead,
}

impl DisentangleModel {
    /// Build the model structure and its zero-valued parameter store.
    /// Call [`ParamStore::init_he`] (or load a checkpoint) afterwards.
    pub fn build<T: Scalar>(cfg: ModelConfig) -> Result<(Self, ParamStore<T>), NnError> {
        cfg.validate()?;
        let mut store = ParamStore::new();
        let enc_a = Encoder::build(&mut store, ParamGroup::EncA, "enc_a", &cfg);
        let enc_b = Encoder::build(&mut store, ParamGroup::EncB, "enc_b", &cfg);
        let latent = cfg.latent_width();
        let cls_a = ClassifierHead::build(
            &mut store,
            ParamGroup::ClsA,
            "cls_a",
            latent,
            &cfg.head_hidden,
            cfg.classes_a,
        );
        let cls_b = ClassifierHead::build(
            &mut store,
            ParamGroup::ClsB,
            "cls_b",
            latent,
            &cfg.head_hidden,
            cfg.classes_b,
        );
        // Adversaries share the classifier architecture but read the other
        // task's latent.
        let adv_a = ClassifierHead::build(
            &mut store,
            ParamGroup::AdvA,
            "adv_a",
            latent,
            &cfg.head_hidden,
            cfg.classes_a,
        );
        let adv_b = ClassifierHead::build(
            &mut store,
            ParamGroup::AdvB,
            "adv_b",
            latent,
            &cfg.head_hidden,
            cfg.classes_b,
        );
        Ok((
            Self { config: cfg, enc_a, enc_b, cls_a, cls_b, adv_a, adv_b },
            store,
        ))
    }

    pub fn encoder_a(&self) -> &Encoder {
        &self.enc_a
    }

    pub fn encoder_b(&self) -> &Encoder {
        &self.enc_b
    }

    /// Run every component once: each encoder executes exactly one time and
    /// its latent is shared by the classifier and the opposite adversary.
    pub fn forward_all<T: Scalar>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        scope: GradScope,
        x: Var,
    ) -> Result<ModelOut, NnError> {
        let z_a = self.enc_a.forward(tape, store, scope, x)?;
        let z_b = self.enc_b.forward(tape, store, scope, x)?;
        let head_a = self.cls_a.forward(tape, store, scope, z_a)?;
        let head_b = self.cls_b.forward(tape, store, scope, z_b)?;
        let head_adv_a = self.adv_a.forward(tape, store, scope, z_b)?;
        let head_adv_b = self.adv_b.forward(tape, store, scope, z_a)?;
        Ok(ModelOut { z_a, z_b, head_a, head_b, head_adv_a, head_adv_b })
    }

    /// One task's classification chain (used by evaluation and probing):
    /// encoder A with classifier A, or encoder B with classifier B.
    pub fn forward_task<T: Scalar>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        scope: GradScope,
        x: Var,
        task: TaskSide,
    ) -> Result<HeadOut, NnError> {
        let (enc, head) = match task {
            TaskSide::A => (&self.enc_a, &self.cls_a),
            TaskSide::B => (&self.enc_b, &self.cls_b),
        };
        let z = enc.forward(tape, store, scope, x)?;
        Ok(head.forward(tape, store, scope, z)?)
    }

    /// The adversarial chain for a pairing: features of one side read by the
    /// head that predicts the *other* task.
    pub fn forward_adversary<T: Scalar>(
        &self,
        tape: &mut Tape<T>,
        store: &ParamStore<T>,
        scope: GradScope,
        x: Var,
        target: TaskSide,
    ) -> Result<HeadOut, NnError> {
        let (enc, head) = match target {
            // predict task A from the task-B features
            TaskSide::A => (&self.enc_b, &self.adv_a),
            // predict task B from the task-A features
            TaskSide::B => (&self.enc_a, &self.adv_b),
        };
        let z = enc.forward(tape, store, scope, x)?;
        Ok(head.forward(tape, store, scope, z)?)
    }
}

/// Which of the two tasks a call refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskSide {
    A,
    B,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn tiny_cfg() -> ModelConfig {
        ModelConfig {
            input_channels: 1,
            channels: vec![4, 8],
            strides: vec![2, 2],
            head_hidden: vec![16],
            classes_a: 2,
            classes_b: 2,
        }
    }

    fn image_batch(b: usize, hw: usize, seed: u64) -> Tensor<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..b * hw * hw).map(|_| rng.random::<f64>()).collect();
        Tensor::from_vec(vec![b, 1, hw, hw], data).unwrap()
    }

    #[test]
    fn default_plan_produces_128_wide_latent_for_64x64() {
        let cfg = ModelConfig::default();
        assert_eq!(cfg.cumulative_stride(), 16);
        let (model, mut store) = DisentangleModel::build::<f64>(cfg).unwrap();
        store.init_he(5);
        // Batch of 50 through the default plan: latent is [50, 128].
        let mut tape = Tape::new();
        let x = tape.leaf(image_batch(50, 64, 1), false);
        let z = model.enc_a.forward(&mut tape, &store, GradScope::FROZEN, x).unwrap();
        assert_eq!(tape.value(z).shape(), &[50, 128]);
        assert!(tape.value(z).is_finite());
    }

    #[test]
    fn identical_images_encode_identically() {
        let (model, mut store) = DisentangleModel::build::<f64>(tiny_cfg()).unwrap();
        store.init_he(2);
        let one = image_batch(1, 8, 3);
        let mut data = one.data().to_vec();
        data.extend_from_slice(one.data());
        let x = Tensor::from_vec(vec![2, 1, 8, 8], data).unwrap();
        let mut tape = Tape::new();
        let xv = tape.leaf(x, false);
        let z = model.enc_a.forward(&mut tape, &store, GradScope::FROZEN, xv).unwrap();
        let vals = tape.value(z).data();
        let w = model.enc_a.latent_width();
        assert_eq!(&vals[..w], &vals[w..]);
    }

    #[test]
    fn indivisible_input_is_a_config_error() {
        let (model, store) = DisentangleModel::build::<f64>(tiny_cfg()).unwrap();
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::zeros(vec![1, 1, 6, 6]), false);
        let err = model
            .enc_a
            .forward(&mut tape, &store, GradScope::FROZEN, x)
            .unwrap_err();
        match err {
            NnError::IndivisibleInput { required, .. } => assert_eq!(required, 4),
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn zero_conv_weights_pass_relu_through_identity_shortcuts() {
        // one block, stride 1, same channel count: no projection, so with
        // zero conv weights the block output equals relu(input).
        let cfg = ModelConfig {
            input_channels: 1,
            channels: vec![1],
            strides: vec![1],
            head_hidden: vec![4],
            classes_a: 2,
            classes_b: 2,
        };
        let (model, store) = DisentangleModel::build::<f64>(cfg).unwrap();
        let x = Tensor::from_vec(vec![1, 1, 2, 2], vec![-1.0, 2.0, -3.0, 4.0]).unwrap();
        let mut tape = Tape::new();
        let xv = tape.leaf(x, false);
        let z = model.enc_a.forward(&mut tape, &store, GradScope::FROZEN, xv).unwrap();
        // relu(x) pooled: mean of [0, 2, 0, 4] = 1.5
        assert_eq!(tape.value(z).data(), &[1.5]);
    }

    #[test]
    fn zero_weights_with_projections_stay_finite() {
        let (model, store) = DisentangleModel::build::<f64>(tiny_cfg()).unwrap();
        let mut tape = Tape::new();
        let x = tape.leaf(image_batch(2, 8, 7), false);
        let z = model.enc_a.forward(&mut tape, &store, GradScope::FROZEN, x).unwrap();
        // zero projection kernels zero the shortcut, so everything collapses to 0
        assert!(tape.value(z).is_finite());
        assert!(tape.value(z).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn head_matches_manual_dense_relu_composition() {
        let (model, mut store) = DisentangleModel::build::<f64>(tiny_cfg()).unwrap();
        store.init_he(11);
        let z = Tensor::from_vec(vec![3, 8], (0..24).map(|i| i as f64 * 0.1).collect()).unwrap();

        let mut tape = Tape::new();
        let zv = tape.leaf(z.clone(), false);
        let out = model.cls_a.forward(&mut tape, &store, GradScope::FROZEN, zv).unwrap();
        let via_head = tape.value(out.logits).clone();

        // manual composition with the same parameters, bitwise equal
        let mut tape = Tape::new();
        let zv = tape.leaf(z, false);
        let w0 = model.cls_a.hidden[0].weight;
        let b0 = model.cls_a.hidden[0].bias;
        let w1 = model.cls_a.output.weight;
        let b1 = model.cls_a.output.bias;
        let w0v = tape.leaf(store.value(w0).clone(), false);
        let b0v = tape.leaf(store.value(b0).clone(), false);
        let h = tape.dense(zv, w0v, b0v).unwrap();
        let h = tape.relu(h);
        let w1v = tape.leaf(store.value(w1).clone(), false);
        let b1v = tape.leaf(store.value(b1).clone(), false);
        let manual = tape.dense(h, w1v, b1v).unwrap();
        assert_eq!(tape.value(manual).data(), via_head.data());
    }

    #[test]
    fn zero_head_weights_give_zero_logits() {
        let (model, store) = DisentangleModel::build::<f64>(tiny_cfg()).unwrap();
        let mut tape = Tape::new();
        let z = tape.leaf(Tensor::full(vec![2, 8], 0.3), false);
        let out = model.cls_b.forward(&mut tape, &store, GradScope::FROZEN, z).unwrap();
        assert!(tape.value(out.logits).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_all_shapes_and_shared_encoders() {
        let (model, mut store) = DisentangleModel::build::<f64>(tiny_cfg()).unwrap();
        store.init_he(4);
        let mut tape = Tape::new();
        let x = tape.leaf(image_batch(1, 8, 9), false);
        let out = model.forward_all(&mut tape, &store, GradScope::FROZEN, x).unwrap();
        for head in [out.head_a, out.head_b, out.head_adv_a, out.head_adv_b] {
            assert_eq!(tape.value(head.logits).shape(), &[1, 2]);
        }
    }

    #[test]
    fn adversary_logits_ignore_the_other_encoder() {
        // perturbing the task-A encoder leaves the task-A adversary's output
        // (computed from the task-B features) bitwise unchanged
        let (model, mut store) = DisentangleModel::build::<f64>(tiny_cfg()).unwrap();
        store.init_he(6);
        let x = image_batch(2, 8, 10);

        let run = |store: &ParamStore<f64>| {
            let mut tape = Tape::new();
            let xv = tape.leaf(x.clone(), false);
            let out = model.forward_all(&mut tape, store, GradScope::FROZEN, xv).unwrap();
            (
                tape.value(out.head_adv_a.logits).clone(),
                tape.value(out.head_adv_b.logits).clone(),
            )
        };
        let (adv_a_before, adv_b_before) = run(&store);

        for id in store.group_ids(&[ParamGroup::EncA]) {
            let mut t = store.value(id).clone();
            for v in t.data_mut() {
                *v += 0.25;
            }
            store.set_value(id, t);
        }
        let (adv_a_after, adv_b_after) = run(&store);
        assert_eq!(adv_a_before.data(), adv_a_after.data());
        assert_ne!(adv_b_before.data(), adv_b_after.data());
    }

    #[test]
    fn parameter_groups_are_disjoint() {
        let (_, store) = DisentangleModel::build::<f64>(ModelConfig::default()).unwrap();
        let main = store.group_ids(&ParamGroup::MAIN);
        let adv = store.group_ids(&ParamGroup::ADVERSARY);
        assert!(!main.iter().any(|id| adv.contains(id)));
        assert_eq!(main.len() + adv.len(), store.len());
    }
}
