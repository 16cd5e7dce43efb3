//! Data-parallel execution helpers.
//!
//! With the `parallel` feature (default) maps run on the rayon pool that is
//! current at the call site; without it everything runs on the calling thread.
//! Reductions always use the same fixed pairwise tree, so sums are
//! bit-identical whatever the thread count or feature set.

/// Leaf size of the pairwise summation tree.
pub const PAIRWISE_LEAF: usize = 32;

/// Evaluates `f(i)` for `i in 0..n`, preserving index order in the output.
#[cfg(feature = "parallel")]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential reference for [`map_range`], always available.
pub fn map_range_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Pairwise sum with a fixed split tree: slices of at most [`PAIRWISE_LEAF`]
/// values are summed left to right, longer slices are split at `len / 2`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_LEAF {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    let (lo, hi) = values.split_at(mid);
    #[cfg(feature = "parallel")]
    {
        if values.len() >= 1 << 14 {
            let (a, b) = rayon::join(|| pairwise_sum(lo), || pairwise_sum(hi));
            return a + b;
        }
    }
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// `pairwise_sum` of `f(i)` over `0..n`, with the terms produced by [`map_range`].
pub fn sum_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    pairwise_sum(&map_range(n, f))
}

/// Maximum of `f(i)` over `0..n` (0 for an empty range). Max is order-free.
pub fn max_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_range(n, f).into_iter().fold(0.0, f64::max)
}

/// Accurate sum of a short sequence via non-overlapping partials. Terms that
/// cancel exactly in real arithmetic give an exact zero.
pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    partials.iter().rev().fold(0.0, |acc, p| acc + p)
}
