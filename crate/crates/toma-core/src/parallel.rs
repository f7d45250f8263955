//! Order-preserving data-parallel evaluation.
//!
//! With the default `parallel` feature the helpers fan work out across the
//! global rayon pool; without it they run plain sequential loops. Both
//! paths produce results in input order and all reductions downstream
//! consume that ordered buffer sequentially, so a given seed yields
//! bit-identical numbers regardless of feature choice or thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Maps `f` over `items`, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Maps `f` over an index range, preserving order.
#[cfg(feature = "parallel")]
pub fn map_range<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..len).into_par_iter().map(f).collect()
}

/// Maps `f` over an index range, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F>(len: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..len).map(f).collect()
}

/// Index and value of the minimum, first occurrence winning ties; `None`
/// for an empty slice. NaN entries never win.
pub fn argmin(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if !(v < b) => {}
            _ if v.is_nan() => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_collect_preserves_order() {
        let items: Vec<u64> = (0..1000).collect();
        let out = map_collect(&items, |&x| x * x);
        assert_eq!(out[999], 999 * 999);
        assert_eq!(out, items.iter().map(|&x| x * x).collect::<Vec<_>>());
    }

    #[test]
    fn map_range_matches_sequential() {
        assert_eq!(map_range(5, |i| i as f64 * 0.5), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn argmin_breaks_ties_on_first() {
        assert_eq!(argmin(&[3.0, 1.0, 1.0, 2.0]), Some((1, 1.0)));
        assert_eq!(argmin(&[f64::NAN, 2.0]), Some((1, 2.0)));
        assert_eq!(argmin(&[]), None);
    }
}
