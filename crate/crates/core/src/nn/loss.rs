//! Loss functions over network outputs. Values are in nats; gradients are
//! already averaged over the batch.

use super::tensor::Tensor;
use super::{Result, TrainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// Softmax cross-entropy on `[n, classes]` logits against class ids.
    SoftmaxXent,
    /// Numerically stable binary cross-entropy on `[n, 1]` logits against
    /// 0/1 targets; the sigmoid is folded into the loss.
    SigmoidBce,
    /// Mean squared error against a dense target tensor.
    Mse,
    /// Linear score objective `-(1/n) * sum(sign_i * score_i)` on `[n, 1]`
    /// outputs; signs are +1 for samples whose score should rise.
    WassersteinLinear,
}

#[derive(Debug, Clone, Copy)]
pub enum Targets<'a> {
    Classes(&'a [usize]),
    Dense(&'a Tensor),
    Binary(&'a [f64]),
    Signed(&'a [f64]),
}

/// Loss value plus gradient w.r.t. the network output.
pub fn loss_and_grad(kind: LossKind, output: &Tensor, targets: &Targets) -> Result<(f64, Tensor)> {
    let (n, c) = output.as_matrix().map_err(TrainError::from)?;
    match (kind, targets) {
        (LossKind::SoftmaxXent, Targets::Classes(labels)) => {
            if labels.len() != n {
                return Err(TrainError::TargetMismatch {
                    loss: "softmax-xent",
                    outputs: n,
                    targets: labels.len(),
                });
            }
            let mut grad = vec![0.0; n * c];
            let mut loss = 0.0;
            for r in 0..n {
                let row = output.row(r);
                let label = labels[r];
                if label >= c {
                    return Err(TrainError::TargetMismatch {
                        loss: "softmax-xent",
                        outputs: c,
                        targets: label,
                    });
                }
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut z = 0.0;
                for &v in row {
                    z += (v - max).exp();
                }
                let lse = max + z.ln();
                loss += lse - row[label];
                for (j, &v) in row.iter().enumerate() {
                    let p = (v - lse).exp();
                    grad[r * c + j] = (p - f64::from(u8::from(j == label))) / n as f64;
                }
            }
            finish(loss / n as f64, Tensor::from_vec(vec![n, c], grad).map_err(TrainError::from)?)
        }
        (LossKind::SigmoidBce, Targets::Binary(t)) => {
            expect_scalar_column(kind, n, c, t.len())?;
            let mut grad = vec![0.0; n];
            let mut loss = 0.0;
            for r in 0..n {
                let z = output.row(r)[0];
                let target = t[r];
                loss += z.max(0.0) - z * target + (-z.abs()).exp().ln_1p();
                grad[r] = (super::layers::sigmoid(z) - target) / n as f64;
            }
            finish(loss / n as f64, Tensor::from_vec(vec![n, 1], grad).map_err(TrainError::from)?)
        }
        (LossKind::Mse, Targets::Dense(t)) => {
            if t.shape() != output.shape() {
                return Err(TrainError::TargetMismatch {
                    loss: "mse",
                    outputs: output.len(),
                    targets: t.len(),
                });
            }
            let count = output.len() as f64;
            let mut grad = vec![0.0; output.len()];
            let mut loss = 0.0;
            for (i, (&p, &y)) in output.data().iter().zip(t.data()).enumerate() {
                let d = p - y;
                loss += d * d;
                grad[i] = 2.0 * d / count;
            }
            finish(
                loss / count,
                Tensor::from_vec(output.shape().to_vec(), grad).map_err(TrainError::from)?,
            )
        }
        (LossKind::WassersteinLinear, Targets::Signed(signs)) => {
            expect_scalar_column(kind, n, c, signs.len())?;
            let mut grad = vec![0.0; n];
            let mut loss = 0.0;
            for r in 0..n {
                loss -= signs[r] * output.row(r)[0];
                grad[r] = -signs[r] / n as f64;
            }
            finish(loss / n as f64, Tensor::from_vec(vec![n, 1], grad).map_err(TrainError::from)?)
        }
        _ => Err(TrainError::TargetKindMismatch(kind_name(kind))),
    }
}

fn expect_scalar_column(kind: LossKind, n: usize, c: usize, targets: usize) -> Result<()> {
    if c != 1 || targets != n {
        return Err(TrainError::TargetMismatch { loss: kind_name(kind), outputs: n * c, targets });
    }
    Ok(())
}

fn kind_name(kind: LossKind) -> &'static str {
    match kind {
        LossKind::SoftmaxXent => "softmax-xent",
        LossKind::SigmoidBce => "sigmoid-bce",
        LossKind::Mse => "mse",
        LossKind::WassersteinLinear => "wasserstein-linear",
    }
}

fn finish(loss: f64, grad: Tensor) -> Result<(f64, Tensor)> {
    if !loss.is_finite() {
        return Err(TrainError::NonFiniteLoss(loss));
    }
    grad.assert_finite("loss gradient").map_err(TrainError::from)?;
    Ok((loss, grad))
}

/// Fraction of rows whose argmax matches the label.
pub fn accuracy(output: &Tensor, labels: &[usize]) -> f64 {
    let n = output.rows();
    let mut hits = 0usize;
    for r in 0..n {
        let row = output.row(r);
        let mut best = 0;
        for (j, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = j;
            }
        }
        if best == labels[r] {
            hits += 1;
        }
    }
    hits as f64 / n as f64
}
