//! Deterministic parallel reductions.
//!
//! Work is cut into fixed-size blocks independent of the thread count. Each
//! block is reduced sequentially, and the block partials are combined in a
//! fixed pairwise tree. The result is bit-identical for any rayon pool size.

use num_complex::Complex;
use rayon::prelude::*;

use crate::scalar::Real;

/// Items per work unit.
pub const BLOCK: usize = 1024;

/// Pairwise (cascade) sum of a slice of scalars.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::zero(),
        n if n <= 16 => xs.iter().fold(T::zero(), |a, &b| a + b),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

fn combine_tree<T: Real>(mut parts: Vec<Vec<Complex<T>>>) -> Vec<Complex<T>> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = *x + y;
                }
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

/// Sum of `width`-long complex accumulator vectors produced by `kernel` over
/// `0..n_items`. `kernel(range, acc)` adds the contribution of every item in
/// `range` to `acc`.
pub fn block_sum<T, F>(n_items: usize, width: usize, kernel: F) -> Vec<Complex<T>>
where
    T: Real,
    F: Fn(std::ops::Range<usize>, &mut [Complex<T>]) + Sync,
{
    let n_blocks = n_items.div_ceil(BLOCK);
    let parts: Vec<Vec<Complex<T>>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![Complex::new(T::zero(), T::zero()); width];
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n_items);
            kernel(lo..hi, &mut acc);
            acc
        })
        .collect();
    if parts.is_empty() {
        return vec![Complex::new(T::zero(), T::zero()); width];
    }
    combine_tree(parts)
}
