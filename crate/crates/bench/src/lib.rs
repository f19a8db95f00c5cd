//! Fixtures shared by the criterion benches in `benches/`.

use hypercyclic::{
    enumerate_targets, FiniteRankUpdate, GridSpec, Scalar, SparseFunctional, SparseVector, TargetSchedule,
};

/// The first `count` targets on the standard grid of dimension `dim`.
pub fn schedule(dim: usize, count: usize, m: usize) -> TargetSchedule {
    let grid = GridSpec::standard(dim).expect("standard grid");
    enumerate_targets(&grid, count, m).expect("grid holds enough targets")
}

/// A vector with `len` nonzero coefficients starting at `offset`.
pub fn dense_vector(offset: usize, len: usize) -> SparseVector {
    SparseVector::from_entries((0..len).map(|i| (offset + i, Scalar::ratio(i as i64 % 5 - 2, 1 + i as i64 % 3))))
}

pub fn dense_functional(offset: usize, len: usize) -> SparseFunctional {
    SparseFunctional::from_entries((0..len).map(|i| (offset + i, Scalar::ratio(1 + i as i64 % 4, 2 + i as i64 % 3))))
}

/// A rank-`rank` update with small Gram matrix entries, invertible for the
/// sizes used here.
pub fn update(rank: usize, width: usize) -> FiniteRankUpdate {
    FiniteRankUpdate::new(
        (0..rank)
            .map(|i| {
                (dense_vector(i * width, width), dense_functional(i * width + 1, width).scaled(&Scalar::ratio(1, 8)))
            })
            .collect(),
    )
}
