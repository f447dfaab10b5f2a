//! Minimal reverse-mode training engine.
//!
//! Covers every model the experiments need: a twin-MLP encoder with a
//! supervised head, a frozen-feature logistic probe, an autoencoder, a GAN
//! generator/discriminator pair, and a weight-clipped critic. Architectures
//! are fixed small shapes: each twin half is `input -> 128 -> 50` (feature
//! width 100 after concatenation), the autoencoder and adversarial nets tap
//! their features at a width-100 penultimate layer.
//!
//! All training is bit-reproducible given `(seed, config, dataset)`: model
//! init, shuffling, and noise each draw from their own derived stream, and
//! batch math has a fixed reduction order on both parallel backends.

mod checkpoint;
mod layers;
mod loss;
mod optim;
mod tensor;
mod train;

pub use checkpoint::{load_model, save_model, write_metrics_csv};
pub use layers::{sigmoid, Activation, DenseGrad, DenseLayer, Layer, Mlp};
pub use loss::{accuracy, loss_and_grad, LossKind, Targets};
pub use optim::{OptKind, Optimizer};
pub use tensor::{mm_nn, mm_nt, mm_tn, Tensor, TensorError};
pub use train::{
    dataset_inputs, dataset_labels, fit_autoencoder, fit_softmax_probe, train_autoencoder,
    train_gan, train_probe, train_supervised, train_wgan, AdversarialStep, AdversarialTrace,
    AeOutcome, GanKind, GanOutcome, ProbeOutcome, ProbeTarget, SupervisedOutcome, TrainedActor,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::seed;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("{loss} targets do not fit the outputs ({outputs} vs {targets})")]
    TargetMismatch { loss: &'static str, outputs: usize, targets: usize },
    #[error("loss {0} expects a different target kind")]
    TargetKindMismatch(&'static str),
    #[error("loss value is not finite ({0})")]
    NonFiniteLoss(f64),
    #[error("training diverged at step {step}: non-finite loss")]
    Diverged { step: usize },
    #[error("have {params} parameters but {grads} gradients")]
    GradientMismatch { params: usize, grads: usize },
    #[error("gradient {grad} does not match parameter {param}")]
    GradientNameMismatch { param: String, grad: String },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("operation needs topology {expected:?}, model is {got:?}")]
    WrongTopology { expected: Topology, got: Topology },
    #[error("no feature tap defined for topology {0:?}")]
    NoFeatureTap(Topology),
    #[error("dataset is empty")]
    EmptyData,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TrainError>;

/// Hidden width shared by all models.
pub const HIDDEN_WIDTH: usize = 128;
/// Width of the probed feature layer.
pub const FEATURE_WIDTH: usize = 100;
/// Feature width contributed by each twin half.
pub const HALF_FEATURE_WIDTH: usize = FEATURE_WIDTH / 2;
/// Generator noise dimensionality.
pub const NOISE_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    TwinMlp,
    Mlp,
    Autoencoder,
    Generator,
    Discriminator,
    Critic,
}

impl Topology {
    pub fn tag(self) -> &'static str {
        match self {
            Topology::TwinMlp => "twin-mlp",
            Topology::Mlp => "mlp",
            Topology::Autoencoder => "autoencoder",
            Topology::Generator => "generator",
            Topology::Discriminator => "discriminator",
            Topology::Critic => "critic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Arch {
    Stack(Mlp),
    Twin { left: Mlp, right: Mlp, head: Mlp },
}

/// A parameterized differentiable model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGraph {
    topology: Topology,
    arch: Arch,
}

impl ModelGraph {
    /// Twin encoder (`half_input -> 128 -> 50` per side, ReLU throughout)
    /// with a linear classification head on the concatenated features.
    pub fn twin_classifier(half_input: usize, num_classes: usize, seed_value: u64) -> ModelGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(seed_value, seed::salt("init")));
        let dims = [half_input, HIDDEN_WIDTH, HALF_FEATURE_WIDTH];
        let left = Mlp::chain(&dims, Activation::Relu, Some(Activation::Relu), &mut rng);
        let right = Mlp::chain(&dims, Activation::Relu, Some(Activation::Relu), &mut rng);
        let head = Mlp::chain(&[FEATURE_WIDTH, num_classes], Activation::Relu, None, &mut rng);
        ModelGraph { topology: Topology::TwinMlp, arch: Arch::Twin { left, right, head } }
    }

    /// Autoencoder with a width-100 code layer; the decoder mirrors the
    /// encoder and ends in a sigmoid to stay in the pixel domain.
    pub fn autoencoder(input: usize, seed_value: u64) -> ModelGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(seed_value, seed::salt("init")));
        let net = Mlp::chain(
            &[input, HIDDEN_WIDTH, FEATURE_WIDTH, HIDDEN_WIDTH, input],
            Activation::Relu,
            Some(Activation::Sigmoid),
            &mut rng,
        );
        ModelGraph { topology: Topology::Autoencoder, arch: Arch::Stack(net) }
    }

    /// Generator mapping uniform noise to the pixel domain.
    pub fn generator(noise_dim: usize, output: usize, seed_value: u64) -> ModelGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(seed_value, seed::salt("init")));
        let net = Mlp::chain(
            &[noise_dim, HIDDEN_WIDTH, output],
            Activation::Relu,
            Some(Activation::Sigmoid),
            &mut rng,
        );
        ModelGraph { topology: Topology::Generator, arch: Arch::Stack(net) }
    }

    /// Discriminator (linear scalar logit; the BCE folds in the sigmoid).
    pub fn discriminator(input: usize, seed_value: u64) -> ModelGraph {
        Self::scorer(Topology::Discriminator, input, seed_value)
    }

    /// Weight-clipped critic; same shape as the discriminator, linear score.
    pub fn critic(input: usize, seed_value: u64) -> ModelGraph {
        Self::scorer(Topology::Critic, input, seed_value)
    }

    fn scorer(topology: Topology, input: usize, seed_value: u64) -> ModelGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(seed_value, seed::salt("init")));
        let net = Mlp::chain(
            &[input, HIDDEN_WIDTH, FEATURE_WIDTH, 1],
            Activation::Relu,
            None,
            &mut rng,
        );
        ModelGraph { topology, arch: Arch::Stack(net) }
    }

    /// Single-dense softmax probe.
    pub fn probe(features: usize, num_classes: usize, seed_value: u64) -> ModelGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(seed_value, seed::salt("init")));
        let net = Mlp::chain(&[features, num_classes], Activation::Relu, None, &mut rng);
        ModelGraph { topology: Topology::Mlp, arch: Arch::Stack(net) }
    }

    /// Wrap an explicit layer stack (custom shapes, e.g. for gradient
    /// checking). Twin topologies need [`from_twin`](Self::from_twin).
    pub fn from_stack(topology: Topology, net: Mlp) -> Result<ModelGraph> {
        if topology == Topology::TwinMlp {
            return Err(TrainError::WrongTopology { expected: Topology::Mlp, got: topology });
        }
        Ok(ModelGraph { topology, arch: Arch::Stack(net) })
    }

    /// Wrap explicit twin halves and a head.
    pub fn from_twin(left: Mlp, right: Mlp, head: Mlp) -> ModelGraph {
        ModelGraph { topology: Topology::TwinMlp, arch: Arch::Twin { left, right, head } }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn output_dim(&self) -> usize {
        match &self.arch {
            Arch::Stack(net) => net.output_dim().unwrap_or(0),
            Arch::Twin { head, .. } => head.output_dim().unwrap_or(0),
        }
    }

    pub fn input_dim(&self) -> usize {
        match &self.arch {
            Arch::Stack(net) => net.input_dim().unwrap_or(0),
            Arch::Twin { left, right, .. } => {
                left.input_dim().unwrap_or(0) + right.input_dim().unwrap_or(0)
            }
        }
    }

    /// Deterministic inference; never mutates parameters.
    pub fn forward(&self, batch: &Tensor) -> Result<Tensor> {
        match &self.arch {
            Arch::Stack(net) => net.forward(batch),
            Arch::Twin { left, right, head } => {
                let half = left.input_dim().unwrap_or(0);
                let (xl, xr) = batch.split_cols(half)?;
                let fl = left.forward(&xl)?;
                let fr = right.forward(&xr)?;
                head.forward(&Tensor::concat_cols(&fl, &fr)?)
            }
        }
    }

    /// Loss plus gradients for every trainable parameter, aligned with
    /// [`parameter_names`](Self::parameter_names) order.
    pub fn backward(
        &self,
        loss: LossKind,
        batch: &Tensor,
        targets: &Targets,
    ) -> Result<(f64, Vec<(String, Tensor)>)> {
        let (value, grads, _) = self.backward_with_input_grad(loss, batch, targets)?;
        Ok((value, grads))
    }

    /// As [`backward`](Self::backward) but also returns the gradient w.r.t.
    /// the input batch (needed to push generator gradients through a frozen
    /// discriminator).
    pub fn backward_with_input_grad(
        &self,
        loss: LossKind,
        batch: &Tensor,
        targets: &Targets,
    ) -> Result<(f64, Vec<(String, Tensor)>, Tensor)> {
        match &self.arch {
            Arch::Stack(net) => {
                let acts = net.forward_cached(batch)?;
                let (value, d_out) = loss_and_grad(loss, acts.last().unwrap(), targets)?;
                let (layer_grads, d_in) = net.backward(&acts, d_out)?;
                Ok((value, name_stack_grads("", layer_grads), d_in))
            }
            Arch::Twin { left, right, head } => {
                let half = left.input_dim().unwrap_or(0);
                let (xl, xr) = batch.split_cols(half)?;
                let left_acts = left.forward_cached(&xl)?;
                let right_acts = right.forward_cached(&xr)?;
                let feats = Tensor::concat_cols(
                    left_acts.last().unwrap(),
                    right_acts.last().unwrap(),
                )?;
                let head_acts = head.forward_cached(&feats)?;
                let (value, d_out) = loss_and_grad(loss, head_acts.last().unwrap(), targets)?;
                let (head_grads, d_feats) = head.backward(&head_acts, d_out)?;
                let split = left_acts.last().unwrap().cols();
                let (d_fl, d_fr) = d_feats.split_cols(split)?;
                let (left_grads, d_xl) = left.backward(&left_acts, d_fl)?;
                let (right_grads, d_xr) = right.backward(&right_acts, d_fr)?;
                let mut grads = name_stack_grads("left.", left_grads);
                grads.extend(name_stack_grads("right.", right_grads));
                grads.extend(name_stack_grads("head.", head_grads));
                Ok((value, grads, Tensor::concat_cols(&d_xl, &d_xr)?))
            }
        }
    }

    /// Backprop an upstream output gradient (instead of a loss) through the
    /// model; used to push discriminator input gradients into the generator.
    pub fn backward_upstream(
        &self,
        batch: &Tensor,
        upstream: Tensor,
    ) -> Result<(Vec<(String, Tensor)>, Tensor)> {
        match &self.arch {
            Arch::Stack(net) => {
                let acts = net.forward_cached(batch)?;
                let (layer_grads, d_in) = net.backward(&acts, upstream)?;
                Ok((name_stack_grads("", layer_grads), d_in))
            }
            Arch::Twin { left, right, head } => {
                let half = left.input_dim().unwrap_or(0);
                let (xl, xr) = batch.split_cols(half)?;
                let left_acts = left.forward_cached(&xl)?;
                let right_acts = right.forward_cached(&xr)?;
                let feats = Tensor::concat_cols(
                    left_acts.last().unwrap(),
                    right_acts.last().unwrap(),
                )?;
                let head_acts = head.forward_cached(&feats)?;
                let (head_grads, d_feats) = head.backward(&head_acts, upstream)?;
                let split = left_acts.last().unwrap().cols();
                let (d_fl, d_fr) = d_feats.split_cols(split)?;
                let (left_grads, d_xl) = left.backward(&left_acts, d_fl)?;
                let (right_grads, d_xr) = right.backward(&right_acts, d_fr)?;
                let mut grads = name_stack_grads("left.", left_grads);
                grads.extend(name_stack_grads("right.", right_grads));
                grads.extend(name_stack_grads("head.", head_grads));
                Ok((grads, Tensor::concat_cols(&d_xl, &d_xr)?))
            }
        }
    }

    /// Named parameters in a stable order.
    pub fn parameters(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        match &self.arch {
            Arch::Stack(net) => collect_params("", net, &mut out),
            Arch::Twin { left, right, head } => {
                collect_params("left.", left, &mut out);
                collect_params("right.", right, &mut out);
                collect_params("head.", head, &mut out);
            }
        }
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out = Vec::new();
        match &mut self.arch {
            Arch::Stack(net) => collect_params_mut("", net, &mut out),
            Arch::Twin { left, right, head } => {
                collect_params_mut("left.", left, &mut out);
                collect_params_mut("right.", right, &mut out);
                collect_params_mut("head.", head, &mut out);
            }
        }
        out
    }

    /// Total scalar parameter count.
    pub fn num_params(&self) -> usize {
        self.parameters().iter().map(|(_, t)| t.len()).sum()
    }

    /// Clamp every parameter into `[-bound, bound]`.
    pub fn clamp_params(&mut self, bound: f64) {
        for (_, p) in self.parameters_mut() {
            for v in p.data_mut() {
                *v = v.clamp(-bound, bound);
            }
        }
    }

    fn stack(&self) -> Option<&Mlp> {
        match &self.arch {
            Arch::Stack(net) => Some(net),
            Arch::Twin { .. } => None,
        }
    }

    fn from_parts(topology: Topology, mut parts: Vec<(String, Mlp)>) -> Result<ModelGraph> {
        let arch = if parts.len() == 1 && parts[0].0.is_empty() {
            Arch::Stack(parts.remove(0).1)
        } else if parts.len() == 3 {
            let mut take = |name: &str| -> Result<Mlp> {
                let pos = parts
                    .iter()
                    .position(|(p, _)| p == name)
                    .ok_or_else(|| TrainError::Checkpoint(format!("missing {name} block")))?;
                Ok(parts.remove(pos).1)
            };
            let left = take("left.")?;
            let right = take("right.")?;
            let head = take("head.")?;
            Arch::Twin { left, right, head }
        } else {
            return Err(TrainError::Checkpoint("unrecognized parameter grouping".into()));
        };
        Ok(ModelGraph { topology, arch })
    }
}

fn name_stack_grads(prefix: &str, layer_grads: Vec<Option<DenseGrad>>) -> Vec<(String, Tensor)> {
    let mut out = Vec::new();
    let mut dense_idx = 0;
    for g in layer_grads.into_iter().flatten() {
        out.push((format!("{prefix}dense{dense_idx}.w"), g.dw));
        out.push((format!("{prefix}dense{dense_idx}.b"), g.db));
        dense_idx += 1;
    }
    out
}

fn collect_params<'a>(prefix: &str, net: &'a Mlp, out: &mut Vec<(String, &'a Tensor)>) {
    for (i, w, b) in net.dense_params() {
        out.push((format!("{prefix}dense{i}.w"), w));
        out.push((format!("{prefix}dense{i}.b"), b));
    }
}

fn collect_params_mut<'a>(prefix: &str, net: &'a mut Mlp, out: &mut Vec<(String, &'a mut Tensor)>) {
    for (i, w, b) in net.dense_params_mut() {
        out.push((format!("{prefix}dense{i}.w"), w));
        out.push((format!("{prefix}dense{i}.b"), b));
    }
}

/// A frozen model prefix ending at the designated feature layer.
///
/// Holds its own copy of the weights; evaluation is pure, so probing can
/// never touch the source model.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureExtractor {
    arch: ExtractorArch,
}

#[derive(Debug, Clone, PartialEq)]
enum ExtractorArch {
    Prefix(Mlp),
    TwinConcat { left: Mlp, right: Mlp },
}

/// Layer count of the prefix ending at the width-100 activation for the
/// stack models (dense, relu, dense, relu).
const STACK_TAP_LAYERS: usize = 4;

impl FeatureExtractor {
    /// Snapshot the feature layer of a trained (or untrained) model.
    pub fn from_model(model: &ModelGraph) -> Result<FeatureExtractor> {
        match (model.topology, &model.arch) {
            (Topology::TwinMlp, Arch::Twin { left, right, .. }) => Ok(FeatureExtractor {
                arch: ExtractorArch::TwinConcat { left: left.clone(), right: right.clone() },
            }),
            (Topology::Autoencoder | Topology::Discriminator | Topology::Critic, _) => {
                let net = model
                    .stack()
                    .ok_or(TrainError::NoFeatureTap(model.topology))?;
                Ok(FeatureExtractor { arch: ExtractorArch::Prefix(net.prefix(STACK_TAP_LAYERS)) })
            }
            (t, _) => Err(TrainError::NoFeatureTap(t)),
        }
    }

    pub fn width(&self) -> usize {
        match &self.arch {
            ExtractorArch::Prefix(net) => net.output_dim().unwrap_or(0),
            ExtractorArch::TwinConcat { left, right } => {
                left.output_dim().unwrap_or(0) + right.output_dim().unwrap_or(0)
            }
        }
    }

    pub fn input_dim(&self) -> usize {
        match &self.arch {
            ExtractorArch::Prefix(net) => net.input_dim().unwrap_or(0),
            ExtractorArch::TwinConcat { left, right } => {
                left.input_dim().unwrap_or(0) + right.input_dim().unwrap_or(0)
            }
        }
    }

    /// Deterministic feature map for a batch.
    pub fn features(&self, batch: &Tensor) -> Result<Tensor> {
        match &self.arch {
            ExtractorArch::Prefix(net) => net.forward(batch),
            ExtractorArch::TwinConcat { left, right } => {
                let half = left.input_dim().unwrap_or(0);
                let (xl, xr) = batch.split_cols(half)?;
                let fl = left.forward(&xl)?;
                let fr = right.forward(&xr)?;
                Ok(Tensor::concat_cols(&fl, &fr)?)
            }
        }
    }

    /// Byte-level snapshot of all parameters, for freeze-contract checks.
    pub fn param_fingerprint(&self) -> Vec<u8> {
        let mut bytes = Vec::new();
        let nets: Vec<&Mlp> = match &self.arch {
            ExtractorArch::Prefix(net) => vec![net],
            ExtractorArch::TwinConcat { left, right } => vec![left, right],
        };
        for net in nets {
            for (_, w, b) in net.dense_params() {
                for v in w.data().iter().chain(b.data()) {
                    bytes.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        bytes
    }
}

/// How the GAN loop decides which network trains next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BalanceRule {
    /// `d_steps` discriminator updates, then `g_steps` generator updates.
    FixedAlternation { d_steps: usize, g_steps: usize },
    /// Train the discriminator while its loss exceeds `tau_d` (nats),
    /// otherwise train the generator.
    LossThreshold { tau_d: f64 },
}

impl Default for BalanceRule {
    fn default() -> Self {
        BalanceRule::FixedAlternation { d_steps: 1, g_steps: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub optimizer: OptKind,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Critic weight clip half-width (WGAN only).
    pub wgan_clip: f64,
    pub balance: BalanceRule,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: OptKind::Adam,
            lr: 1e-3,
            batch_size: 64,
            epochs: 5,
            seed: 0,
            wgan_clip: 0.01,
            balance: BalanceRule::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0) || !self.lr.is_finite() {
            return Err(TrainError::InvalidConfig(format!("lr = {}", self.lr)));
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch_size = 0".into()));
        }
        if !(self.wgan_clip > 0.0) {
            return Err(TrainError::InvalidConfig(format!("wgan_clip = {}", self.wgan_clip)));
        }
        match self.balance {
            BalanceRule::FixedAlternation { d_steps, g_steps } => {
                if d_steps == 0 || g_steps == 0 {
                    return Err(TrainError::InvalidConfig("alternation steps must be >= 1".into()));
                }
            }
            BalanceRule::LossThreshold { tau_d } => {
                if !tau_d.is_finite() {
                    return Err(TrainError::InvalidConfig(format!("tau_d = {tau_d}")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twin_forward_splits_and_concats() {
        let model = ModelGraph::twin_classifier(6, 3, 1);
        assert_eq!(model.input_dim(), 12);
        assert_eq!(model.output_dim(), 3);
        let x = Tensor::from_vec(vec![2, 12], (0..24).map(|i| i as f64 / 24.0).collect()).unwrap();
        let y = model.forward(&x).unwrap();
        assert_eq!(y.shape(), &[2, 3]);
    }

    #[test]
    fn parameter_names_are_unique_and_stable() {
        let model = ModelGraph::twin_classifier(6, 3, 1);
        let names: Vec<String> = model.parameters().into_iter().map(|(n, _)| n).collect();
        let mut dedup = names.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), names.len());
        assert!(names.contains(&"left.dense0.w".to_string()));
        assert!(names.contains(&"head.dense0.b".to_string()));
    }

    #[test]
    fn extractor_taps_width_100_layer() {
        let d = ModelGraph::discriminator(20, 3);
        let f = FeatureExtractor::from_model(&d).unwrap();
        assert_eq!(f.width(), FEATURE_WIDTH);
        let twin = ModelGraph::twin_classifier(10, 4, 3);
        let tf = FeatureExtractor::from_model(&twin).unwrap();
        assert_eq!(tf.width(), FEATURE_WIDTH);
        let g = ModelGraph::generator(NOISE_DIM, 20, 3);
        assert!(matches!(
            FeatureExtractor::from_model(&g),
            Err(TrainError::NoFeatureTap(Topology::Generator))
        ));
    }

    #[test]
    fn forward_does_not_mutate_parameters() {
        let model = ModelGraph::discriminator(8, 9);
        let before: Vec<Vec<f64>> =
            model.parameters().iter().map(|(_, t)| t.data().to_vec()).collect();
        let x = Tensor::from_vec(vec![4, 8], vec![0.3; 32]).unwrap();
        let _ = model.forward(&x).unwrap();
        let after: Vec<Vec<f64>> =
            model.parameters().iter().map(|(_, t)| t.data().to_vec()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn clamp_bounds_every_parameter() {
        let mut model = ModelGraph::critic(8, 2);
        model.clamp_params(0.01);
        for (_, p) in model.parameters() {
            assert!(p.data().iter().all(|v| v.abs() <= 0.01));
        }
    }

    #[test]
    fn config_validation_rejects_nonsense() {
        let mut cfg = TrainConfig::default();
        cfg.batch_size = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = TrainConfig::default();
        cfg.wgan_clip = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = TrainConfig::default();
        cfg.balance = BalanceRule::FixedAlternation { d_steps: 0, g_steps: 1 };
        assert!(cfg.validate().is_err());
    }
}
