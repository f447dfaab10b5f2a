//! Analytic gradients against central finite differences for every layer
//! and loss combination on randomized small models.

mod common;

use common::gradcheck_max_rel_err;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use featcomp::nn::{
    Activation, LossKind, Mlp, ModelGraph, Targets, Tensor, Topology,
};

const MAX_REL: f64 = 1e-4;

fn random_input(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    Tensor::from_vec(vec![rows, cols], data).unwrap()
}

fn stack(
    dims: &[usize],
    hidden: Activation,
    output: Option<Activation>,
    seed: u64,
) -> ModelGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = Mlp::chain(dims, hidden, output, &mut rng);
    ModelGraph::from_stack(Topology::Mlp, net).unwrap()
}

#[test]
fn softmax_xent_with_relu_hidden() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut model = stack(&[5, 6, 3], Activation::Relu, None, 21);
    let x = random_input(&mut rng, 4, 5);
    let labels = vec![0usize, 2, 1, 2];
    let err = gradcheck_max_rel_err(&mut model, LossKind::SoftmaxXent, &x, &Targets::Classes(&labels));
    assert!(err < MAX_REL, "max relative error {err}");
}

#[test]
fn softmax_xent_with_tanh_hidden() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut model = stack(&[4, 7, 4], Activation::Tanh, None, 22);
    let x = random_input(&mut rng, 3, 4);
    let labels = vec![3usize, 0, 2];
    let err = gradcheck_max_rel_err(&mut model, LossKind::SoftmaxXent, &x, &Targets::Classes(&labels));
    assert!(err < MAX_REL, "max relative error {err}");
}

#[test]
fn sigmoid_bce_scorer() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut model = stack(&[6, 5, 1], Activation::Relu, None, 23);
    let x = random_input(&mut rng, 5, 6);
    let targets = vec![1.0, 0.0, 1.0, 1.0, 0.0];
    let err = gradcheck_max_rel_err(&mut model, LossKind::SigmoidBce, &x, &Targets::Binary(&targets));
    assert!(err < MAX_REL, "max relative error {err}");
}

#[test]
fn mse_autoencoder_shape_with_sigmoid_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut model = stack(&[5, 4, 5], Activation::Relu, Some(Activation::Sigmoid), 24);
    let x = random_input(&mut rng, 4, 5);
    let target = random_input(&mut rng, 4, 5);
    let err = gradcheck_max_rel_err(&mut model, LossKind::Mse, &x, &Targets::Dense(&target));
    assert!(err < MAX_REL, "max relative error {err}");
}

#[test]
fn mse_with_tanh_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut model = stack(&[4, 6, 4], Activation::Sigmoid, Some(Activation::Tanh), 25);
    let x = random_input(&mut rng, 3, 4);
    let target = random_input(&mut rng, 3, 4);
    let err = gradcheck_max_rel_err(&mut model, LossKind::Mse, &x, &Targets::Dense(&target));
    assert!(err < MAX_REL, "max relative error {err}");
}

#[test]
fn wasserstein_linear_critic() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut model = stack(&[6, 5, 1], Activation::Relu, None, 26);
    let x = random_input(&mut rng, 6, 6);
    let signs = vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
    let err = gradcheck_max_rel_err(
        &mut model,
        LossKind::WassersteinLinear,
        &x,
        &Targets::Signed(&signs),
    );
    assert!(err < MAX_REL, "max relative error {err}");
}

/// Knock every parameter (biases included) off zero so no ReLU sits exactly
/// on its hinge, where analytic subgradients and central differences
/// legitimately disagree.
fn jitter_params(model: &mut ModelGraph, rng: &mut ChaCha8Rng) {
    for (_, p) in model.parameters_mut() {
        for v in p.data_mut() {
            *v += rng.random::<f64>() * 0.2 + 0.01;
        }
    }
}

#[test]
fn twin_encoder_with_head() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut init = ChaCha8Rng::seed_from_u64(27);
    let left = Mlp::chain(&[3, 4, 3], Activation::Relu, Some(Activation::Relu), &mut init);
    let right = Mlp::chain(&[3, 4, 3], Activation::Relu, Some(Activation::Relu), &mut init);
    let head = Mlp::chain(&[6, 3], Activation::Relu, None, &mut init);
    let mut model = ModelGraph::from_twin(left, right, head);
    jitter_params(&mut model, &mut rng);
    let x = random_input(&mut rng, 4, 6);
    let labels = vec![0usize, 1, 2, 1];
    let err = gradcheck_max_rel_err(&mut model, LossKind::SoftmaxXent, &x, &Targets::Classes(&labels));
    assert!(err < MAX_REL, "max relative error {err}");
}

#[test]
fn randomized_sweep_over_architectures() {
    // A small randomized battery; seeds are fixed so kink-free
    // configurations stay kink-free.
    let combos: [(Activation, Option<Activation>, LossKind); 4] = [
        (Activation::Tanh, None, LossKind::SoftmaxXent),
        (Activation::Sigmoid, None, LossKind::SoftmaxXent),
        (Activation::Tanh, Some(Activation::Sigmoid), LossKind::Mse),
        (Activation::Sigmoid, Some(Activation::Tanh), LossKind::Mse),
    ];
    for (round, (hidden, out, kind)) in combos.into_iter().enumerate() {
        let seed = 31 + round as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = [4, 5, 4];
        let mut model = stack(&dims, hidden, out, seed * 7 + 1);
        let x = random_input(&mut rng, 3, dims[0]);
        let err = match kind {
            LossKind::SoftmaxXent => {
                let labels: Vec<usize> =
                    (0..3).map(|_| rng.random_range(0..dims[2])).collect();
                gradcheck_max_rel_err(&mut model, kind, &x, &Targets::Classes(&labels))
            }
            LossKind::Mse => {
                let target = random_input(&mut rng, 3, dims[2]);
                gradcheck_max_rel_err(&mut model, kind, &x, &Targets::Dense(&target))
            }
            _ => unreachable!(),
        };
        assert!(err < MAX_REL, "combo {round}: max relative error {err}");
    }
}
