//! Seeded generators and independent oracles shared by the integration
//! tests. Nothing here calls into the elimination or inversion code it is
//! used to check.
#![allow(dead_code)]

use hypercyclic::{Scalar, SparseFunctional, SparseVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_scalar(rng: &mut impl Rng) -> Scalar {
    Scalar::ratio(rng.gen_range(-12..=12), rng.gen_range(1..=9))
}

pub fn rand_nonzero(rng: &mut impl Rng) -> Scalar {
    loop {
        let s = rand_scalar(rng);
        if !s.is_zero() {
            return s;
        }
    }
}

/// Scalar that is zero with probability `p_zero`.
pub fn rand_sparse_scalar(rng: &mut impl Rng, p_zero: f64) -> Scalar {
    if rng.gen_bool(p_zero) {
        Scalar::zero()
    } else {
        rand_nonzero(rng)
    }
}

/// Up to `max_nnz` entries at indices below `max_index`.
pub fn rand_vector(rng: &mut impl Rng, max_nnz: usize, max_index: usize) -> SparseVector {
    let nnz = rng.gen_range(0..=max_nnz);
    SparseVector::from_entries((0..nnz).map(|_| (rng.gen_range(0..max_index), rand_nonzero(rng))))
}

pub fn rand_nonzero_vector(rng: &mut impl Rng, max_nnz: usize, max_index: usize) -> SparseVector {
    loop {
        let v = rand_vector(rng, max_nnz.max(1), max_index);
        if !v.is_zero() {
            return v;
        }
    }
}

pub fn rand_functional(rng: &mut impl Rng, max_nnz: usize, max_index: usize) -> SparseFunctional {
    rand_vector(rng, max_nnz, max_index).transpose()
}

/// Leibniz determinant over all permutations.
pub fn leibniz_det(m: &[Vec<Scalar>]) -> Scalar {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }
    let n = m.len();
    perms(n)
        .into_iter()
        .map(|p| {
            let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let term: Scalar = (0..n).map(|i| m[i][p[i]].clone()).product();
            if inversions % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut with_last = subsets(n - 1, k - 1);
    for s in &mut with_last {
        s.push(n - 1);
    }
    let mut out = subsets(n - 1, k);
    out.extend(with_last);
    out
}

/// Independence by brute force: some k×k minor over the union support has a
/// non-zero Leibniz determinant.
pub fn brute_force_independent(rows: &[Vec<(usize, Scalar)>]) -> bool {
    let k = rows.len();
    if k == 0 {
        return true;
    }
    let mut cols: Vec<usize> = rows.iter().flatten().map(|(i, _)| *i).collect();
    cols.sort_unstable();
    cols.dedup();
    let value = |row: &Vec<(usize, Scalar)>, c: usize| {
        row.iter().filter(|(i, _)| *i == c).map(|(_, v)| v.clone()).sum::<Scalar>()
    };
    subsets(cols.len(), k).into_iter().any(|pick| {
        let minor: Vec<Vec<Scalar>> = rows.iter().map(|r| pick.iter().map(|&p| value(r, cols[p])).collect()).collect();
        !leibniz_det(&minor).is_zero()
    })
}

/// Determinant by textbook elimination on a dense copy.
pub fn dense_det(mut a: Vec<Vec<Scalar>>) -> Scalar {
    let n = a.len();
    let mut det = Scalar::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Scalar::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        det *= &a[col][col];
        let (top, bottom) = a.split_at_mut(col + 1);
        let pivot = &top[col];
        for row in bottom {
            let factor = &row[col] / &pivot[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *x = &*x - &factor * p;
            }
        }
    }
    det
}
