//! Dense row-major f64 tensors.
//!
//! Everything downstream works on these: activations, weights, gradients.
//! Values are immutable once returned from an operation; the handful of
//! `*_inplace` methods exist for the optimizer hot path only.

use crate::error::{Error, Result};

/// Dense tensor of f64 scalars in row-major layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Build a tensor from a shape and row-major data.
    pub fn new(shape: impl Into<Vec<usize>>, data: Vec<f64>) -> Result<Tensor> {
        let shape = shape.into();
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::shape(format!(
                "shape {:?} implies {} elements, got {}",
                shape,
                expected,
                data.len()
            )));
        }
        let t = Tensor { shape, data };
        t.debug_check_finite();
        Ok(t)
    }

    pub fn zeros(shape: impl Into<Vec<usize>>) -> Tensor {
        let shape = shape.into();
        let len = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; len],
        }
    }

    pub fn full(shape: impl Into<Vec<usize>>, value: f64) -> Tensor {
        let shape = shape.into();
        let len = shape.iter().product();
        Tensor {
            shape,
            data: vec![value; len],
        }
    }

    /// 2-D tensor from a list of equally sized rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Tensor> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::shape("rows have unequal lengths"));
        }
        let data = rows.iter().flatten().copied().collect();
        Tensor::new([n_rows, n_cols], data)
    }

    /// Identity matrix of order `n`.
    pub fn eye(n: usize) -> Tensor {
        let mut t = Tensor::zeros([n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Dimensions of a 2-D tensor as (rows, cols).
    pub fn dim2(&self) -> Result<(usize, usize)> {
        match self.shape[..] {
            [r, c] => Ok((r, c)),
            _ => Err(Error::shape(format!("expected 2-D tensor, got {:?}", self.shape))),
        }
    }

    /// Row `i` of a 2-D tensor as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        let (_, c) = (self.shape[0], self.shape[1]);
        &self.data[i * c..(i + 1) * c]
    }

    /// Same data, different shape (element count must match).
    pub fn reshape(&self, shape: impl Into<Vec<usize>>) -> Result<Tensor> {
        let shape = shape.into();
        let expected: usize = shape.iter().product();
        if expected != self.data.len() {
            return Err(Error::shape(format!(
                "cannot reshape {} elements into {:?}",
                self.data.len(),
                shape
            )));
        }
        Ok(Tensor {
            shape,
            data: self.data.clone(),
        })
    }

    /// Elementwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        let t = Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        };
        t.debug_check_finite();
        t
    }

    pub fn map_inplace(&mut self, f: impl Fn(f64) -> f64) {
        for x in &mut self.data {
            *x = f(*x);
        }
        self.debug_check_finite();
    }

    /// Elementwise binary map; shapes must match.
    pub fn zip_map(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::shape(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        let t = Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        };
        t.debug_check_finite();
        Ok(t)
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, k: f64) -> Tensor {
        self.map(|x| x * k)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Arithmetic mean over all elements; zero-length tensors are a shape error.
    pub fn mean(&self) -> Result<f64> {
        if self.data.is_empty() {
            return Err(Error::shape("mean of empty tensor"));
        }
        Ok(self.sum() / self.data.len() as f64)
    }

    /// Sum along one axis; output shape is the input shape with `axis` removed.
    pub fn sum_axis(&self, axis: usize) -> Result<Tensor> {
        if axis >= self.shape.len() {
            return Err(Error::shape(format!(
                "axis {} out of range for shape {:?}",
                axis, self.shape
            )));
        }
        let outer: usize = self.shape[..axis].iter().product();
        let mid = self.shape[axis];
        let inner: usize = self.shape[axis + 1..].iter().product();
        let mut out_shape = self.shape.clone();
        out_shape.remove(axis);
        let mut out = vec![0.0; outer * inner];
        for o in 0..outer {
            for m in 0..mid {
                let src = &self.data[(o * mid + m) * inner..(o * mid + m + 1) * inner];
                let dst = &mut out[o * inner..(o + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += s;
                }
            }
        }
        Tensor::new(out_shape, out)
    }

    pub fn mean_axis(&self, axis: usize) -> Result<Tensor> {
        if axis >= self.shape.len() {
            return Err(Error::shape(format!(
                "axis {} out of range for shape {:?}",
                axis, self.shape
            )));
        }
        let mid = self.shape[axis] as f64;
        if mid == 0.0 {
            return Err(Error::shape("mean over zero-length axis"));
        }
        Ok(self.sum_axis(axis)?.scale(1.0 / mid))
    }

    /// 2-D transpose.
    pub fn transpose(&self) -> Result<Tensor> {
        let (r, c) = self.dim2()?;
        let mut out = vec![0.0; self.data.len()];
        for i in 0..r {
            for j in 0..c {
                out[j * r + i] = self.data[i * c + j];
            }
        }
        Tensor::new([c, r], out)
    }

    /// Matrix product `self [m×k] · other [k×n] -> [m×n]`.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        let (m, k) = self.dim2()?;
        let (k2, n) = other.dim2()?;
        if k != k2 {
            return Err(Error::shape(format!(
                "matmul inner dims differ: [{}x{}] * [{}x{}]",
                m, k, k2, n
            )));
        }
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let a_row = &self.data[i * k..(i + 1) * k];
            let c_row = &mut out[i * n..(i + 1) * n];
            for (t, &a_it) in a_row.iter().enumerate() {
                if a_it == 0.0 {
                    continue;
                }
                let b_row = &other.data[t * n..(t + 1) * n];
                for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                    *cv = a_it.mul_add(bv, *cv);
                }
            }
        }
        let t = Tensor {
            shape: vec![m, n],
            data: out,
        };
        t.debug_check_finite();
        Ok(t)
    }

    /// `selfᵀ · other` for 2-D tensors: `[p×m]ᵀ · [p×n] -> [m×n]`.
    ///
    /// Same result as `self.transpose()?.matmul(other)` without materializing
    /// the transpose; used for weight gradients.
    pub fn matmul_tn(&self, other: &Tensor) -> Result<Tensor> {
        let (p, m) = self.dim2()?;
        let (p2, n) = other.dim2()?;
        if p != p2 {
            return Err(Error::shape(format!(
                "matmul_tn outer dims differ: [{}x{}]ᵀ * [{}x{}]",
                p, m, p2, n
            )));
        }
        let mut out = vec![0.0; m * n];
        for r in 0..p {
            let a_row = &self.data[r * m..(r + 1) * m];
            let b_row = &other.data[r * n..(r + 1) * n];
            for (i, &a_ri) in a_row.iter().enumerate() {
                if a_ri == 0.0 {
                    continue;
                }
                let c_row = &mut out[i * n..(i + 1) * n];
                for (cv, &bv) in c_row.iter_mut().zip(b_row) {
                    *cv = a_ri.mul_add(bv, *cv);
                }
            }
        }
        let t = Tensor {
            shape: vec![m, n],
            data: out,
        };
        t.debug_check_finite();
        Ok(t)
    }

    /// `self · otherᵀ` for 2-D tensors: `[m×k] · [n×k]ᵀ -> [m×n]`.
    pub fn matmul_nt(&self, other: &Tensor) -> Result<Tensor> {
        let (m, k) = self.dim2()?;
        let (n, k2) = other.dim2()?;
        if k != k2 {
            return Err(Error::shape(format!(
                "matmul_nt inner dims differ: [{}x{}] * [{}x{}]ᵀ",
                m, k, n, k2
            )));
        }
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let a_row = &self.data[i * k..(i + 1) * k];
            let c_row = &mut out[i * n..(i + 1) * n];
            for (j, cv) in c_row.iter_mut().enumerate() {
                let b_row = &other.data[j * k..(j + 1) * k];
                *cv = dot(a_row, b_row);
            }
        }
        let t = Tensor {
            shape: vec![m, n],
            data: out,
        };
        t.debug_check_finite();
        Ok(t)
    }

    /// Debug-build guard for the "all elements finite" invariant.
    pub(crate) fn debug_check_finite(&self) {
        debug_assert!(
            self.data.iter().all(|x| x.is_finite()),
            "tensor contains non-finite values"
        );
    }
}

/// Dot product with an 8-lane accumulator bank (fixed summation order).
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = [0.0f64; 8];
    let mut xc = x.chunks_exact(8);
    let mut yc = y.chunks_exact(8);
    for (xb, yb) in (&mut xc).zip(&mut yc) {
        for l in 0..8 {
            acc[l] = xb[l].mul_add(yb[l], acc[l]);
        }
    }
    let mut tail = 0.0;
    for (a, b) in xc.remainder().iter().zip(yc.remainder()) {
        tail = a.mul_add(*b, tail);
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}
