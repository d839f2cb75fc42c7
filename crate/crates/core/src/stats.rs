//! Small descriptive statistics shared by the feature and selection code.

use std::cmp::Ordering;

use crate::Scalar;

pub fn mean<T: Scalar>(v: &[T]) -> Option<T> {
    if v.is_empty() {
        return None;
    }
    Some(v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len()))
}

/// Sample standard deviation (divisor `n - 1`).
pub fn sd<T: Scalar>(v: &[T]) -> Option<T> {
    if v.len() < 2 {
        return None;
    }
    let m = mean(v)?;
    let ss: T = v.iter().map(|&x| (x - m) * (x - m)).sum();
    Some((ss / T::from_usize_lossy(v.len() - 1)).sqrt())
}

/// Biased central moment of order `k` (divisor `n`).
pub fn central_moment<T: Scalar>(v: &[T], k: i32) -> Option<T> {
    let m = mean(v)?;
    Some(v.iter().map(|&x| (x - m).powi(k)).sum::<T>() / T::from_usize_lossy(v.len()))
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson<T: Scalar>(a: &[T], b: &[T]) -> Option<T> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let ma = mean(a)?;
    let mb = mean(b)?;
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    if saa <= T::zero() || sbb <= T::zero() {
        return None;
    }
    let r = sab / (saa.sqrt() * sbb.sqrt());
    Some(r.max(-T::one()).min(T::one()))
}

pub fn total_cmp<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Median; the average of the two middle values for even lengths.
pub fn median<T: Scalar>(v: &[T]) -> Option<T> {
    let mut s = v.to_vec();
    median_in_place(&mut s)
}

/// Median that reorders `v` instead of copying it.
pub fn median_in_place<T: Scalar>(v: &mut [T]) -> Option<T> {
    let n = v.len();
    if n == 0 {
        return None;
    }
    let mid = n / 2;
    let (_, &mut hi, _) = v.select_nth_unstable_by(mid, total_cmp);
    if n % 2 == 1 {
        return Some(hi);
    }
    let lo = v[..mid]
        .iter()
        .copied()
        .fold(T::neg_infinity(), |a, b| a.max(b));
    Some((lo + hi) / T::lit(2.0))
}
