//! SGD and Adam parameter updates. State is keyed by parameter position, so
//! the caller must present parameters in a stable order.

use super::tensor::Tensor;
use super::{Result, TrainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptKind {
    Sgd,
    Adam,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug)]
pub struct Optimizer {
    kind: OptKind,
    lr: f64,
    t: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(kind: OptKind, lr: f64) -> Optimizer {
        Optimizer { kind, lr, t: 0, first: Vec::new(), second: Vec::new() }
    }

    /// Apply one update. `params` and `grads` must align one-to-one.
    pub fn step(
        &mut self,
        params: &mut [(String, &mut Tensor)],
        grads: &[(String, Tensor)],
    ) -> Result<()> {
        if params.len() != grads.len() {
            return Err(TrainError::GradientMismatch {
                params: params.len(),
                grads: grads.len(),
            });
        }
        if self.first.is_empty() {
            self.first = params.iter().map(|(_, p)| vec![0.0; p.len()]).collect();
            self.second = params.iter().map(|(_, p)| vec![0.0; p.len()]).collect();
        }
        self.t += 1;
        for (slot, ((name, param), (gname, grad))) in
            params.iter_mut().zip(grads.iter()).enumerate()
        {
            if name != gname || param.len() != grad.len() {
                return Err(TrainError::GradientNameMismatch {
                    param: name.clone(),
                    grad: gname.clone(),
                });
            }
            match self.kind {
                OptKind::Sgd => {
                    for (p, &g) in param.data_mut().iter_mut().zip(grad.data()) {
                        *p -= self.lr * g;
                    }
                }
                OptKind::Adam => {
                    let bias1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
                    let bias2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
                    let m = &mut self.first[slot];
                    let v = &mut self.second[slot];
                    for (i, (p, &g)) in
                        param.data_mut().iter_mut().zip(grad.data()).enumerate()
                    {
                        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g;
                        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g * g;
                        let m_hat = m[i] / bias1;
                        let v_hat = v[i] / bias2;
                        *p -= self.lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                    }
                }
            }
        }
        Ok(())
    }
}
