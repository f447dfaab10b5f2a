//! Training entry points: supervised twin encoder, frozen-feature probe,
//! autoencoder, GAN, and weight-clipped WGAN.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::seed;

use super::loss::{accuracy, loss_and_grad, LossKind, Targets};
use super::optim::Optimizer;
use super::tensor::Tensor;
use super::{
    BalanceRule, FeatureExtractor, ModelGraph, Result, Topology, TrainConfig, TrainError,
    NOISE_DIM,
};

/// Which label a probe predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeTarget {
    LeftLabel,
    RightLabel,
}

/// Full input matrix `[n, 2*hw]`: left pixels then right pixels per row.
pub fn dataset_inputs(data: &Dataset) -> Result<Tensor> {
    if data.is_empty() {
        return Err(TrainError::EmptyData);
    }
    let hw = data.half_pixels();
    let n = data.len();
    let mut values = Vec::with_capacity(n * 2 * hw);
    for ex in &data.examples {
        values.extend(ex.x_l.iter().map(|&p| f64::from(p)));
        values.extend(ex.x_r.iter().map(|&p| f64::from(p)));
    }
    Ok(Tensor::from_vec(vec![n, 2 * hw], values).map_err(TrainError::from)?)
}

pub fn dataset_labels(data: &Dataset, target: ProbeTarget) -> Vec<usize> {
    data.examples
        .iter()
        .map(|ex| match target {
            ProbeTarget::LeftLabel => ex.y_l,
            ProbeTarget::RightLabel => ex.y_r,
        })
        .collect()
}

fn mark_divergence(err: TrainError, step: usize) -> TrainError {
    match err {
        TrainError::NonFiniteLoss(_) | TrainError::Tensor(super::TensorError::NonFinite(_)) => {
            TrainError::Diverged { step }
        }
        other => other,
    }
}

/// Shared classifier loop: minibatch softmax cross-entropy.
fn fit_classifier(
    mut model: ModelGraph,
    x: &Tensor,
    y: &[usize],
    cfg: &TrainConfig,
) -> Result<(ModelGraph, Vec<f64>, f64)> {
    cfg.validate()?;
    let n = x.rows();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed::mix(cfg.seed, seed::salt("shuffle")));
    let mut opt = Optimizer::new(cfg.optimizer, cfg.lr);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut step = 0usize;
    for _ in 0..cfg.epochs {
        indices.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in indices.chunks(cfg.batch_size) {
            let xb = x.gather_rows(chunk).map_err(TrainError::from)?;
            let yb: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
            let (loss, grads) = model
                .backward(LossKind::SoftmaxXent, &xb, &Targets::Classes(&yb))
                .map_err(|e| mark_divergence(e, step))?;
            opt.step(&mut model.parameters_mut(), &grads)?;
            total += loss;
            batches += 1;
            step += 1;
        }
        epoch_losses.push(total / batches as f64);
    }
    let out = model.forward(x)?;
    let train_accuracy = accuracy(&out, y);
    Ok((model, epoch_losses, train_accuracy))
}

#[derive(Debug)]
pub struct SupervisedOutcome {
    pub model: ModelGraph,
    /// Mean minibatch loss per epoch, in nats.
    pub epoch_losses: Vec<f64>,
    pub train_accuracy: f64,
}

/// Phase-1 training: fit the twin encoder plus head on the left label.
pub fn train_supervised(
    model: ModelGraph,
    data: &Dataset,
    cfg: &TrainConfig,
) -> Result<SupervisedOutcome> {
    if model.topology() != Topology::TwinMlp {
        return Err(TrainError::WrongTopology {
            expected: Topology::TwinMlp,
            got: model.topology(),
        });
    }
    if model.output_dim() != data.params.num_classes {
        return Err(TrainError::InvalidConfig(format!(
            "head width {} does not match {} classes",
            model.output_dim(),
            data.params.num_classes
        )));
    }
    let x = dataset_inputs(data)?;
    let y = dataset_labels(data, ProbeTarget::LeftLabel);
    let (model, epoch_losses, train_accuracy) = fit_classifier(model, &x, &y, cfg)?;
    Ok(SupervisedOutcome { model, epoch_losses, train_accuracy })
}

#[derive(Debug)]
pub struct ProbeOutcome {
    pub probe: ModelGraph,
    pub epoch_losses: Vec<f64>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

/// Fit a softmax probe on raw feature matrices; lower-level entry used by
/// [`train_probe`] and by tests with synthetic features.
pub fn fit_softmax_probe(
    x_train: &Tensor,
    y_train: &[usize],
    x_test: &Tensor,
    y_test: &[usize],
    num_classes: usize,
    cfg: &TrainConfig,
) -> Result<ProbeOutcome> {
    let probe = ModelGraph::probe(x_train.cols(), num_classes, cfg.seed);
    let (probe, epoch_losses, train_accuracy) = fit_classifier(probe, x_train, y_train, cfg)?;
    let out = probe.forward(x_test)?;
    let test_accuracy = accuracy(&out, y_test);
    Ok(ProbeOutcome { probe, epoch_losses, train_accuracy, test_accuracy })
}

/// Phase-2 probing: train a logistic classifier on frozen features and
/// report held-out accuracy. The extractor is borrowed immutably, so its
/// parameters cannot move.
pub fn train_probe(
    extractor: &FeatureExtractor,
    train: &Dataset,
    test: &Dataset,
    target: ProbeTarget,
    cfg: &TrainConfig,
) -> Result<ProbeOutcome> {
    let x_train = extractor.features(&dataset_inputs(train)?)?;
    let x_test = extractor.features(&dataset_inputs(test)?)?;
    let y_train = dataset_labels(train, target);
    let y_test = dataset_labels(test, target);
    fit_softmax_probe(&x_train, &y_train, &x_test, &y_test, train.params.num_classes, cfg)
}

#[derive(Debug)]
pub struct AeOutcome {
    pub model: ModelGraph,
    pub extractor: FeatureExtractor,
    /// Held-out reconstruction MSE: entry 0 before training, then one per
    /// epoch.
    pub eval_mse: Vec<f64>,
}

fn reconstruction_mse(model: &ModelGraph, x: &Tensor) -> Result<f64> {
    let out = model.forward(x)?;
    let mut acc = 0.0;
    for (&p, &t) in out.data().iter().zip(x.data()) {
        let d = p - t;
        acc += d * d;
    }
    Ok(acc / out.len() as f64)
}

/// Fit an autoencoder on explicit train/eval matrices.
pub fn fit_autoencoder(x_train: &Tensor, x_eval: &Tensor, cfg: &TrainConfig) -> Result<AeOutcome> {
    cfg.validate()?;
    let mut model = ModelGraph::autoencoder(x_train.cols(), cfg.seed);
    let mut eval_mse = vec![reconstruction_mse(&model, x_eval)?];
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed::mix(cfg.seed, seed::salt("shuffle")));
    let mut opt = Optimizer::new(cfg.optimizer, cfg.lr);
    let mut indices: Vec<usize> = (0..x_train.rows()).collect();
    let mut step = 0usize;
    for _ in 0..cfg.epochs {
        indices.shuffle(&mut shuffle_rng);
        for chunk in indices.chunks(cfg.batch_size) {
            let xb = x_train.gather_rows(chunk).map_err(TrainError::from)?;
            let (_, grads) = model
                .backward(LossKind::Mse, &xb, &Targets::Dense(&xb))
                .map_err(|e| mark_divergence(e, step))?;
            opt.step(&mut model.parameters_mut(), &grads)?;
            step += 1;
        }
        eval_mse.push(reconstruction_mse(&model, x_eval)?);
    }
    let extractor = FeatureExtractor::from_model(&model)?;
    Ok(AeOutcome { model, extractor, eval_mse })
}

/// Train an autoencoder on the dataset's full inputs, holding out a tail
/// slice for reconstruction tracking.
pub fn train_autoencoder(data: &Dataset, cfg: &TrainConfig) -> Result<AeOutcome> {
    let x = dataset_inputs(data)?;
    let n = x.rows();
    let holdout = (n / 10).clamp(1, 256);
    if holdout >= n {
        return fit_autoencoder(&x, &x, cfg);
    }
    let train_rows: Vec<usize> = (0..n - holdout).collect();
    let eval_rows: Vec<usize> = (n - holdout..n).collect();
    let x_train = x.gather_rows(&train_rows).map_err(TrainError::from)?;
    let x_eval = x.gather_rows(&eval_rows).map_err(TrainError::from)?;
    fit_autoencoder(&x_train, &x_eval, cfg)
}

/// Adversarial flavors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GanKind {
    /// BCE discriminator, non-saturating generator loss.
    Standard,
    /// Linear critic with post-step weight clipping.
    Wasserstein,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainedActor {
    Discriminator,
    Generator,
}

impl TrainedActor {
    pub fn tag(self) -> &'static str {
        match self {
            TrainedActor::Discriminator => "D",
            TrainedActor::Generator => "G",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdversarialStep {
    pub step: usize,
    pub actor: TrainedActor,
    /// Latest discriminator/critic loss (nats for BCE, score gap loss for
    /// the critic).
    pub d_loss: f64,
    pub g_loss: f64,
    /// Objective value: summed real+fake BCE in nats for the standard GAN
    /// (log 4 at perfect confusion), critic score gap for WGAN.
    pub value: f64,
}

#[derive(Debug, Default)]
pub struct AdversarialTrace {
    pub steps: Vec<AdversarialStep>,
}

#[derive(Debug)]
pub struct GanOutcome {
    /// Features tapped from the discriminator/critic penultimate layer.
    pub extractor: FeatureExtractor,
    pub trace: AdversarialTrace,
    pub discriminator: ModelGraph,
    pub generator: ModelGraph,
}

pub fn train_gan(data: &Dataset, cfg: &TrainConfig) -> Result<GanOutcome> {
    train_adversarial(data, cfg, GanKind::Standard)
}

pub fn train_wgan(data: &Dataset, cfg: &TrainConfig) -> Result<GanOutcome> {
    train_adversarial(data, cfg, GanKind::Wasserstein)
}

struct AdversarialState {
    d: ModelGraph,
    g: ModelGraph,
    d_opt: Optimizer,
    g_opt: Optimizer,
    noise_rng: ChaCha8Rng,
    kind: GanKind,
    clip: f64,
    step: usize,
    last_d_loss: f64,
    last_g_loss: f64,
    last_value: f64,
    trace: AdversarialTrace,
}

impl AdversarialState {
    fn noise(&mut self, n: usize) -> Result<Tensor> {
        let data: Vec<f64> =
            (0..n * NOISE_DIM).map(|_| self.noise_rng.random::<f64>() * 2.0 - 1.0).collect();
        Ok(Tensor::from_vec(vec![n, NOISE_DIM], data).map_err(TrainError::from)?)
    }

    fn fake_batch(&mut self, n: usize) -> Result<Tensor> {
        let z = self.noise(n)?;
        self.g.forward(&z)
    }

    fn d_eval_loss(&mut self, real: &Tensor) -> Result<f64> {
        let n = real.rows();
        let fake = self.fake_batch(n)?;
        let batch = Tensor::concat_rows(real, &fake).map_err(TrainError::from)?;
        let out = self.d.forward(&batch)?;
        let (loss, _) = self.d_loss_targets(&out, n)?;
        Ok(loss)
    }

    fn d_loss_targets(&self, out: &Tensor, n_real: usize) -> Result<(f64, Tensor)> {
        let total = out.rows();
        match self.kind {
            GanKind::Standard => {
                let mut t = vec![0.0; total];
                for v in t.iter_mut().take(n_real) {
                    *v = 1.0;
                }
                loss_and_grad(LossKind::SigmoidBce, out, &Targets::Binary(&t))
            }
            GanKind::Wasserstein => {
                let mut s = vec![-1.0; total];
                for v in s.iter_mut().take(n_real) {
                    *v = 1.0;
                }
                loss_and_grad(LossKind::WassersteinLinear, out, &Targets::Signed(&s))
            }
        }
    }

    fn d_step(&mut self, real: &Tensor) -> Result<()> {
        let n = real.rows();
        let fake = self.fake_batch(n)?;
        let batch = Tensor::concat_rows(real, &fake).map_err(TrainError::from)?;
        let step = self.step;
        let (loss, grads) = match self.kind {
            GanKind::Standard => {
                let mut t = vec![0.0; 2 * n];
                for v in t.iter_mut().take(n) {
                    *v = 1.0;
                }
                self.d
                    .backward(LossKind::SigmoidBce, &batch, &Targets::Binary(&t))
                    .map_err(|e| mark_divergence(e, step))?
            }
            GanKind::Wasserstein => {
                let mut s = vec![-1.0; 2 * n];
                for v in s.iter_mut().take(n) {
                    *v = 1.0;
                }
                self.d
                    .backward(LossKind::WassersteinLinear, &batch, &Targets::Signed(&s))
                    .map_err(|e| mark_divergence(e, step))?
            }
        };
        self.d_opt.step(&mut self.d.parameters_mut(), &grads)?;
        if self.kind == GanKind::Wasserstein {
            self.d.clamp_params(self.clip);
        }
        self.last_d_loss = loss;
        self.last_value = match self.kind {
            // Combined mean over 2n; real-mean + fake-mean BCE is twice that.
            GanKind::Standard => 2.0 * loss,
            GanKind::Wasserstein => -2.0 * loss,
        };
        self.record(TrainedActor::Discriminator);
        Ok(())
    }

    fn g_step(&mut self, n: usize) -> Result<()> {
        let z = self.noise(n)?;
        let step = self.step;
        // Forward the generator with a cache, score the fakes, then push the
        // discriminator's input gradient back through the generator.
        let fake = self.g.forward(&z)?;
        let (g_loss, d_input_grad) = match self.kind {
            GanKind::Standard => {
                let ones = vec![1.0; n];
                let (loss, _, d_in) = self
                    .d
                    .backward_with_input_grad(
                        LossKind::SigmoidBce,
                        &fake,
                        &Targets::Binary(&ones),
                    )
                    .map_err(|e| mark_divergence(e, step))?;
                (loss, d_in)
            }
            GanKind::Wasserstein => {
                let signs = vec![1.0; n];
                let (loss, _, d_in) = self
                    .d
                    .backward_with_input_grad(
                        LossKind::WassersteinLinear,
                        &fake,
                        &Targets::Signed(&signs),
                    )
                    .map_err(|e| mark_divergence(e, step))?;
                (loss, d_in)
            }
        };
        let grads = self
            .g
            .backward_upstream(&z, d_input_grad)
            .map_err(|e| mark_divergence(e, step))?;
        self.g_opt.step(&mut self.g.parameters_mut(), &grads.0)?;
        self.last_g_loss = g_loss;
        self.record(TrainedActor::Generator);
        Ok(())
    }

    fn record(&mut self, actor: TrainedActor) {
        self.trace.steps.push(AdversarialStep {
            step: self.step,
            actor,
            d_loss: self.last_d_loss,
            g_loss: self.last_g_loss,
            value: self.last_value,
        });
        self.step += 1;
    }
}

fn train_adversarial(data: &Dataset, cfg: &TrainConfig, kind: GanKind) -> Result<GanOutcome> {
    cfg.validate()?;
    let x = dataset_inputs(data)?;
    let dim = x.cols();
    let d = match kind {
        GanKind::Standard => ModelGraph::discriminator(dim, seed::mix(cfg.seed, seed::salt("d"))),
        GanKind::Wasserstein => ModelGraph::critic(dim, seed::mix(cfg.seed, seed::salt("d"))),
    };
    let g = ModelGraph::generator(NOISE_DIM, dim, seed::mix(cfg.seed, seed::salt("g")));
    let mut state = AdversarialState {
        d,
        g,
        d_opt: Optimizer::new(cfg.optimizer, cfg.lr),
        g_opt: Optimizer::new(cfg.optimizer, cfg.lr),
        noise_rng: ChaCha8Rng::seed_from_u64(seed::mix(cfg.seed, seed::salt("noise"))),
        kind,
        clip: cfg.wgan_clip,
        step: 0,
        last_d_loss: f64::INFINITY,
        last_g_loss: 0.0,
        last_value: 0.0,
        trace: AdversarialTrace::default(),
    };
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed::mix(cfg.seed, seed::salt("shuffle")));
    let mut indices: Vec<usize> = (0..x.rows()).collect();
    let mut d_in_cycle = 0usize;
    for _ in 0..cfg.epochs {
        indices.shuffle(&mut shuffle_rng);
        for chunk in indices.chunks(cfg.batch_size) {
            let real = x.gather_rows(chunk).map_err(TrainError::from)?;
            match cfg.balance {
                BalanceRule::FixedAlternation { d_steps, g_steps } => {
                    state.d_step(&real)?;
                    d_in_cycle += 1;
                    if d_in_cycle == d_steps {
                        for _ in 0..g_steps {
                            state.g_step(real.rows())?;
                        }
                        d_in_cycle = 0;
                    }
                }
                BalanceRule::LossThreshold { tau_d } => {
                    let eval = state.d_eval_loss(&real)?;
                    if eval > tau_d {
                        state.d_step(&real)?;
                    } else {
                        state.g_step(real.rows())?;
                    }
                }
            }
        }
    }
    let extractor = FeatureExtractor::from_model(&state.d)?;
    Ok(GanOutcome {
        extractor,
        trace: state.trace,
        discriminator: state.d,
        generator: state.g,
    })
}
