//! Sequential layer stacks with explicit forward caches and reverse-mode
//! backprop. Dense weights are `[out, in]`; activations differentiate
//! through their cached outputs.

use rand::Rng;

use super::tensor::{mm_nn, mm_nt, mm_tn, Tensor};
use super::{Result, TrainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Sigmoid => sigmoid(v),
            Activation::Tanh => v.tanh(),
        }
    }

    /// Derivative expressed through the activation output.
    fn back(self, out: f64) -> f64 {
        match self {
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => out * (1.0 - out),
            Activation::Tanh => 1.0 - out * out,
        }
    }
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub w: Tensor,
    pub b: Tensor,
}

impl DenseLayer {
    /// He-style uniform init: `U(-sqrt(6/fan_in), +sqrt(6/fan_in))`, zero bias.
    pub fn init(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> DenseLayer {
        let bound = (6.0 / fan_in as f64).sqrt();
        let data = (0..fan_in * fan_out)
            .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * bound)
            .collect();
        DenseLayer {
            w: Tensor::from_vec(vec![fan_out, fan_in], data).expect("init shape"),
            b: Tensor::zeros(vec![fan_out]),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.w.shape()[0]
    }

    pub fn in_dim(&self) -> usize {
        self.w.shape()[1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense(DenseLayer),
    Act(Activation),
}

/// Gradients for one dense layer.
#[derive(Debug, Clone)]
pub struct DenseGrad {
    pub dw: Tensor,
    pub db: Tensor,
}

/// A feed-forward stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

impl Mlp {
    pub fn new(layers: Vec<Layer>) -> Mlp {
        Mlp { layers }
    }

    /// Dense chain `dims[0] -> dims[1] -> ...` with `hidden` after every
    /// non-final dense and `output` (if any) after the last.
    pub fn chain(
        dims: &[usize],
        hidden: Activation,
        output: Option<Activation>,
        rng: &mut impl Rng,
    ) -> Mlp {
        let mut layers = Vec::new();
        for i in 0..dims.len() - 1 {
            layers.push(Layer::Dense(DenseLayer::init(dims[i], dims[i + 1], rng)));
            if i + 2 < dims.len() {
                layers.push(Layer::Act(hidden));
            } else if let Some(act) = output {
                layers.push(Layer::Act(act));
            }
        }
        Mlp { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> Option<usize> {
        self.layers.iter().find_map(|l| match l {
            Layer::Dense(d) => Some(d.in_dim()),
            _ => None,
        })
    }

    pub fn output_dim(&self) -> Option<usize> {
        self.layers.iter().rev().find_map(|l| match l {
            Layer::Dense(d) => Some(d.out_dim()),
            _ => None,
        })
    }

    /// A copy of the first `count` layers.
    pub fn prefix(&self, count: usize) -> Mlp {
        Mlp { layers: self.layers[..count].to_vec() }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            cur = apply_layer(layer, &cur)?;
            if i + 1 == self.layers.len() {
                cur.assert_finite("forward output").map_err(TrainError::from)?;
            }
        }
        Ok(cur)
    }

    /// Forward pass keeping every intermediate: `acts[0]` is the input,
    /// `acts[i + 1]` the output of layer `i`.
    pub fn forward_cached(&self, x: &Tensor) -> Result<Vec<Tensor>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        for layer in &self.layers {
            let next = apply_layer(layer, acts.last().unwrap())?;
            next.assert_finite("layer output").map_err(TrainError::from)?;
            acts.push(next);
        }
        Ok(acts)
    }

    /// Backprop `d_out` through the stack. Returns per-layer dense gradients
    /// (`None` for activation layers) and the gradient w.r.t. the input.
    pub fn backward(
        &self,
        acts: &[Tensor],
        d_out: Tensor,
    ) -> Result<(Vec<Option<DenseGrad>>, Tensor)> {
        let mut grads: Vec<Option<DenseGrad>> = vec![None; self.layers.len()];
        let mut d_cur = d_out;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            match layer {
                Layer::Dense(dense) => {
                    let input = &acts[i];
                    let dw = mm_tn(&d_cur, input).map_err(TrainError::from)?;
                    let cols = d_cur.cols();
                    let mut db = vec![0.0; cols];
                    for r in 0..d_cur.rows() {
                        for (c, acc) in db.iter_mut().enumerate() {
                            *acc += d_cur.row(r)[c];
                        }
                    }
                    grads[i] = Some(DenseGrad {
                        dw,
                        db: Tensor::from_vec(vec![cols], db).map_err(TrainError::from)?,
                    });
                    d_cur = mm_nn(&d_cur, &dense.w).map_err(TrainError::from)?;
                }
                Layer::Act(act) => {
                    let out = &acts[i + 1];
                    let mut d = d_cur;
                    for (g, &o) in d.data_mut().iter_mut().zip(out.data()) {
                        *g *= act.back(o);
                    }
                    d_cur = d;
                }
            }
        }
        d_cur.assert_finite("input gradient").map_err(TrainError::from)?;
        Ok((grads, d_cur))
    }

    /// Dense parameters in layer order as `(dense_index, &w, &b)`.
    pub fn dense_params(&self) -> Vec<(usize, &Tensor, &Tensor)> {
        let mut out = Vec::new();
        let mut idx = 0;
        for layer in &self.layers {
            if let Layer::Dense(d) = layer {
                out.push((idx, &d.w, &d.b));
                idx += 1;
            }
        }
        out
    }

    pub fn dense_params_mut(&mut self) -> Vec<(usize, &mut Tensor, &mut Tensor)> {
        let mut out = Vec::new();
        let mut idx = 0;
        for layer in &mut self.layers {
            if let Layer::Dense(d) = layer {
                out.push((idx, &mut d.w, &mut d.b));
                idx += 1;
            }
        }
        out
    }
}

fn apply_layer(layer: &Layer, x: &Tensor) -> Result<Tensor> {
    match layer {
        Layer::Dense(dense) => {
            let mut y = mm_nt(x, &dense.w).map_err(TrainError::from)?;
            let cols = y.cols();
            let b = dense.b.data();
            for r in 0..y.rows() {
                let row = &mut y.data_mut()[r * cols..(r + 1) * cols];
                for (v, &bias) in row.iter_mut().zip(b) {
                    *v += bias;
                }
            }
            Ok(y)
        }
        Layer::Act(act) => {
            let mut y = x.clone();
            for v in y.data_mut() {
                *v = act.apply(*v);
            }
            Ok(y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_dense_layer_passes_input_through() {
        let eye = Tensor::from_vec(vec![3, 3], vec![1., 0., 0., 0., 1., 0., 0., 0., 1.]).unwrap();
        let layer = DenseLayer { w: eye, b: Tensor::zeros(vec![3]) };
        let mlp = Mlp::new(vec![Layer::Dense(layer)]);
        let x = Tensor::from_vec(vec![2, 3], vec![1., 2., 3., -4., 0.5, 6.]).unwrap();
        let y = mlp.forward(&x).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn relu_zeroes_negative_input() {
        let mlp = Mlp::new(vec![Layer::Act(Activation::Relu)]);
        let x = Tensor::from_vec(vec![1, 4], vec![-1., -0.5, -100., -0.001]).unwrap();
        let y = mlp.forward(&x).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dense_forward_matches_hand_rolled_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layer = DenseLayer::init(4, 3, &mut rng);
        let x = Tensor::from_vec(vec![2, 4], (0..8).map(|i| i as f64 * 0.3 - 1.0).collect())
            .unwrap();
        let mlp = Mlp::new(vec![Layer::Dense(layer.clone())]);
        let y = mlp.forward(&x).unwrap();
        for r in 0..2 {
            for o in 0..3 {
                let mut acc = layer.b.data()[o];
                for i in 0..4 {
                    acc += x.data()[r * 4 + i] * layer.w.data()[o * 4 + i];
                }
                assert!((y.data()[r * 3 + o] - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chain_builds_expected_layer_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mlp = Mlp::chain(&[8, 4, 2], Activation::Relu, Some(Activation::Sigmoid), &mut rng);
        let kinds: Vec<&str> = mlp
            .layers()
            .iter()
            .map(|l| match l {
                Layer::Dense(_) => "dense",
                Layer::Act(Activation::Relu) => "relu",
                Layer::Act(Activation::Sigmoid) => "sigmoid",
                Layer::Act(Activation::Tanh) => "tanh",
            })
            .collect();
        assert_eq!(kinds, vec!["dense", "relu", "dense", "sigmoid"]);
        assert_eq!(mlp.input_dim(), Some(8));
        assert_eq!(mlp.output_dim(), Some(2));
    }

    #[test]
    fn nonfinite_activations_are_reported() {
        let w = Tensor::from_vec(vec![1, 1], vec![f64::INFINITY]).unwrap();
        let mlp = Mlp::new(vec![Layer::Dense(DenseLayer { w, b: Tensor::zeros(vec![1]) })]);
        let x = Tensor::from_vec(vec![1, 1], vec![1.0]).unwrap();
        assert!(matches!(mlp.forward(&x), Err(TrainError::Tensor(_))));
    }
}
