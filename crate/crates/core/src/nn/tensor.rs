//! Dense row-major f64 tensors and the three matrix-product shapes the
//! training engine needs.
//!
//! Large products fan out across output rows on the parallel backend. Every
//! output element is an independent dot product with a fixed summation order,
//! so results are bit-identical across thread counts and with the sequential
//! fallback.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape {shape:?} implies {expected} values, got {got}")]
    ShapeMismatch { shape: Vec<usize>, expected: usize, got: usize },
    #[error("incompatible operand shapes {a:?} and {b:?} for {op}")]
    IncompatibleShapes { op: &'static str, a: Vec<usize>, b: Vec<usize> },
    #[error("expected a rank-2 tensor, got shape {0:?}")]
    NotMatrix(Vec<usize>),
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// Work threshold (multiply-adds) above which a product uses the pool.
const PAR_FLOP_THRESHOLD: usize = 1 << 17;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: Vec<usize>) -> Tensor {
        let n = shape.iter().product();
        Tensor { shape, data: vec![0.0; n] }
    }

    pub fn from_vec(shape: Vec<usize>, data: Vec<f64>) -> Result<Tensor> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(TensorError::ShapeMismatch { shape, expected, got: data.len() });
        }
        Ok(Tensor { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Rows of a rank-2 tensor.
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    /// Columns of a rank-2 tensor.
    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    pub fn as_matrix(&self) -> Result<(usize, usize)> {
        if self.shape.len() != 2 {
            return Err(TensorError::NotMatrix(self.shape.clone()));
        }
        Ok((self.shape[0], self.shape[1]))
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    pub fn assert_finite(&self, context: &'static str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(TensorError::NonFinite(context))
        }
    }

    /// Split a matrix into left and right column blocks at `at`.
    pub fn split_cols(&self, at: usize) -> Result<(Tensor, Tensor)> {
        let (n, c) = self.as_matrix()?;
        if at > c {
            return Err(TensorError::IncompatibleShapes {
                op: "split_cols",
                a: self.shape.clone(),
                b: vec![at],
            });
        }
        let mut left = Vec::with_capacity(n * at);
        let mut right = Vec::with_capacity(n * (c - at));
        for r in 0..n {
            let row = self.row(r);
            left.extend_from_slice(&row[..at]);
            right.extend_from_slice(&row[at..]);
        }
        Ok((Tensor::from_vec(vec![n, at], left)?, Tensor::from_vec(vec![n, c - at], right)?))
    }

    /// Concatenate two matrices with equal row counts along columns.
    pub fn concat_cols(a: &Tensor, b: &Tensor) -> Result<Tensor> {
        let (na, ca) = a.as_matrix()?;
        let (nb, cb) = b.as_matrix()?;
        if na != nb {
            return Err(TensorError::IncompatibleShapes {
                op: "concat_cols",
                a: a.shape.clone(),
                b: b.shape.clone(),
            });
        }
        let mut data = Vec::with_capacity(na * (ca + cb));
        for r in 0..na {
            data.extend_from_slice(a.row(r));
            data.extend_from_slice(b.row(r));
        }
        Tensor::from_vec(vec![na, ca + cb], data)
    }

    /// Stack two matrices with equal column counts along rows.
    pub fn concat_rows(a: &Tensor, b: &Tensor) -> Result<Tensor> {
        let (na, ca) = a.as_matrix()?;
        let (nb, cb) = b.as_matrix()?;
        if ca != cb {
            return Err(TensorError::IncompatibleShapes {
                op: "concat_rows",
                a: a.shape.clone(),
                b: b.shape.clone(),
            });
        }
        let mut data = Vec::with_capacity((na + nb) * ca);
        data.extend_from_slice(&a.data);
        data.extend_from_slice(&b.data);
        Tensor::from_vec(vec![na + nb, ca], data)
    }

    /// Gather the given rows into a new matrix.
    pub fn gather_rows(&self, indices: &[usize]) -> Result<Tensor> {
        let (_, c) = self.as_matrix()?;
        let mut data = Vec::with_capacity(indices.len() * c);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Tensor::from_vec(vec![indices.len(), c], data)
    }
}

/// Run `fill(row_index, row_slice)` over every `row_len`-sized chunk of
/// `out`, in parallel when the work is worth it.
fn for_each_row<F>(out: &mut [f64], row_len: usize, flops: usize, fill: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if flops >= PAR_FLOP_THRESHOLD {
            use rayon::prelude::*;
            out.par_chunks_mut(row_len)
                .enumerate()
                .for_each(|(i, row)| fill(i, row));
            return;
        }
    }
    let _ = flops;
    for (i, row) in out.chunks_mut(row_len).enumerate() {
        fill(i, row);
    }
}

/// `a [m,k] * b [k,n] -> [m,n]`.
pub fn mm_nn(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k) = a.as_matrix()?;
    let (kb, n) = b.as_matrix()?;
    if k != kb {
        return Err(TensorError::IncompatibleShapes {
            op: "mm_nn",
            a: a.shape.clone(),
            b: b.shape.clone(),
        });
    }
    let mut out = vec![0.0; m * n];
    let (ad, bd) = (a.data(), b.data());
    for_each_row(&mut out, n, m * n * k, |i, row| {
        let a_row = &ad[i * k..(i + 1) * k];
        for (l, &av) in a_row.iter().enumerate() {
            if av != 0.0 {
                let b_row = &bd[l * n..(l + 1) * n];
                for (o, &bv) in row.iter_mut().zip(b_row) {
                    *o += av * bv;
                }
            }
        }
    });
    Tensor::from_vec(vec![m, n], out)
}

/// `a [m,k] * b^T [n,k] -> [m,n]`.
pub fn mm_nt(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k) = a.as_matrix()?;
    let (n, kb) = b.as_matrix()?;
    if k != kb {
        return Err(TensorError::IncompatibleShapes {
            op: "mm_nt",
            a: a.shape.clone(),
            b: b.shape.clone(),
        });
    }
    let mut out = vec![0.0; m * n];
    let (ad, bd) = (a.data(), b.data());
    for_each_row(&mut out, n, m * n * k, |i, row| {
        let a_row = &ad[i * k..(i + 1) * k];
        for (j, o) in row.iter_mut().enumerate() {
            let b_row = &bd[j * k..(j + 1) * k];
            let mut acc = 0.0;
            for (av, bv) in a_row.iter().zip(b_row) {
                acc += av * bv;
            }
            *o = acc;
        }
    });
    Tensor::from_vec(vec![m, n], out)
}

/// `a^T [m,k] * b [m,n] -> [k,n]`.
pub fn mm_tn(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, k) = a.as_matrix()?;
    let (mb, n) = b.as_matrix()?;
    if m != mb {
        return Err(TensorError::IncompatibleShapes {
            op: "mm_tn",
            a: a.shape.clone(),
            b: b.shape.clone(),
        });
    }
    let mut out = vec![0.0; k * n];
    let (ad, bd) = (a.data(), b.data());
    for_each_row(&mut out, n, m * n * k, |i, row| {
        for l in 0..m {
            let av = ad[l * k + i];
            if av != 0.0 {
                let b_row = &bd[l * n..(l + 1) * n];
                for (o, &bv) in row.iter_mut().zip(b_row) {
                    *o += av * bv;
                }
            }
        }
    });
    Tensor::from_vec(vec![k, n], out)
}
