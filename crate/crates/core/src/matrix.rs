//! Dense exact k×k matrices for the small solves behind finite-rank updates.

use serde::{Deserialize, Serialize};

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SmallMatrix {
    dim: usize,
    /// Row-major entries.
    entries: Vec<Scalar>,
}

impl SmallMatrix {
    pub fn zeros(dim: usize) -> Self {
        SmallMatrix { dim, entries: vec![Scalar::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let entries = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        SmallMatrix { dim, entries }
    }

    /// Panics unless `rows` is square.
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        SmallMatrix { dim, entries: rows.into_iter().flatten().collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &Scalar {
        &self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Scalar) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn mul(&self, rhs: &SmallMatrix) -> SmallMatrix {
        assert_eq!(self.dim, rhs.dim);
        SmallMatrix::from_fn(self.dim, |i, j| (0..self.dim).map(|k| self.get(i, k) * rhs.get(k, j)).sum())
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                let v = self.get(i, j);
                if i == j {
                    v.is_one()
                } else {
                    v.is_zero()
                }
            })
        })
    }

    /// Determinant by fraction-exact elimination.
    pub fn det(&self) -> Scalar {
        let mut a = self.entries.clone();
        let n = self.dim;
        let mut det = Scalar::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return Scalar::zero();
            };
            if p != col {
                for j in 0..n {
                    a.swap(p * n + j, col * n + j);
                }
                det = -det;
            }
            let pivot = a[col * n + col].clone();
            det *= &pivot;
            for r in col + 1..n {
                if a[r * n + col].is_zero() {
                    continue;
                }
                let factor = &a[r * n + col] / &pivot;
                for j in col..n {
                    let sub = &factor * &a[col * n + j];
                    a[r * n + j] -= sub;
                }
            }
        }
        det
    }

    /// Gauss–Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<SmallMatrix> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = SmallMatrix::identity(n);
        for col in 0..n {
            let p = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if p != col {
                a.swap_rows(p, col);
                inv.swap_rows(p, col);
            }
            let scale = a.get(col, col).recip()?;
            a.scale_row(col, &scale);
            inv.scale_row(col, &scale);
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                a.sub_row_multiple(r, col, &factor);
                inv.sub_row_multiple(r, col, &factor);
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, r1: usize, r2: usize) {
        for j in 0..self.dim {
            self.entries.swap(r1 * self.dim + j, r2 * self.dim + j);
        }
    }

    fn scale_row(&mut self, r: usize, c: &Scalar) {
        for j in 0..self.dim {
            self.entries[r * self.dim + j] *= c;
        }
    }

    /// row[target] -= factor · row[source]
    fn sub_row_multiple(&mut self, target: usize, source: usize, factor: &Scalar) {
        for j in 0..self.dim {
            let sub = factor * &self.entries[source * self.dim + j];
            self.entries[target * self.dim + j] -= sub;
        }
    }
}
