//! Dense component arrays.

use std::ops::{Index, IndexMut};

use crate::expr::Scalar;

/// Dense row-major array with a runtime shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<S = f64> {
    shape: Vec<usize>,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Tensor { shape: shape.to_vec(), data: vec![S::zero(); len] }
    }

    pub fn from_fn<const N: usize>(shape: [usize; N], mut f: impl FnMut([usize; N]) -> S) -> Self {
        let mut t = Tensor::zeros(&shape);
        let mut idx = [0usize; N];
        for slot in t.data.iter_mut() {
            *slot = f(idx);
            for axis in (0..N).rev() {
                idx[axis] += 1;
                if idx[axis] < shape[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        t
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Tensor<T> {
        Tensor { shape: self.shape.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Real parts of every entry.
    pub fn values(&self) -> Tensor<f64> {
        self.map(|v| v.re())
    }
}

impl<S> Tensor<S> {
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len(), "rank mismatch");
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| {
            debug_assert!(i < n, "index {i} out of bounds {n}");
            acc * n + i
        })
    }
}

impl Tensor<f64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise difference; shapes must agree.
    pub fn max_abs_diff(&self, other: &Tensor<f64>) -> f64 {
        assert_eq!(self.shape, other.shape, "shape mismatch");
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl<S, const N: usize> Index<[usize; N]> for Tensor<S> {
    type Output = S;
    fn index(&self, idx: [usize; N]) -> &S {
        &self.data[self.offset(&idx)]
    }
}

impl<S, const N: usize> IndexMut<[usize; N]> for Tensor<S> {
    fn index_mut(&mut self, idx: [usize; N]) -> &mut S {
        let k = self.offset(&idx);
        &mut self.data[k]
    }
}

/// Square matrix product `a·b`, both `dim × dim`, row-major.
pub(crate) fn matmul<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> Tensor<S> {
    let dim = a.shape()[0];
    Tensor::from_fn([dim, dim], |[r, c]| {
        (0..dim).fold(S::zero(), |acc, k| acc + a[[r, k]] * b[[k, c]])
    })
}

/// Determinant by Gaussian elimination with partial pivoting.
pub(crate) fn determinant(m: &Tensor<f64>) -> f64 {
    let n = m.shape()[0];
    let mut a = m.as_slice().to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let factor = a[row * n + col] / p;
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
        }
    }
    det
}
