use super::{Distances, FeatureSet, SampleSet};
use crate::stats::{mean, median_in_place};
use crate::Scalar;

/// Best-fraction sizes in percent, with their feature-name suffixes.
pub const DISPERSION_QUANTILES: [(usize, &str); 4] = [(2, "02"), (5, "05"), (10, "10"), (25, "25")];

const NAMES: [[&str; 4]; 4] = [
    ["disp.ratio_mean_02", "disp.ratio_mean_05", "disp.ratio_mean_10", "disp.ratio_mean_25"],
    ["disp.ratio_median_02", "disp.ratio_median_05", "disp.ratio_median_10", "disp.ratio_median_25"],
    ["disp.diff_mean_02", "disp.diff_mean_05", "disp.diff_mean_10", "disp.diff_mean_25"],
    ["disp.diff_median_02", "disp.diff_median_05", "disp.diff_median_10", "disp.diff_median_25"],
];

/// Dispersion of the best points relative to the whole sample, indexed by
/// [`DISPERSION_QUANTILES`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionFeatures<T> {
    pub ratio_mean: [T; 4],
    pub ratio_median: [T; 4],
    pub diff_mean: [T; 4],
    pub diff_median: [T; 4],
    /// Per quantile: the subset is a single point or the sample has no spread.
    pub degenerate: [bool; 4],
}

impl<T: Scalar> FeatureSet<T> for DispersionFeatures<T> {
    fn write_into(&self, out: &mut Vec<(&'static str, T, bool)>) {
        let groups = [self.ratio_mean, self.ratio_median, self.diff_mean, self.diff_median];
        for (names, vals) in NAMES.iter().zip(groups) {
            for q in 0..4 {
                out.push((names[q], vals[q], self.degenerate[q]));
            }
        }
    }
}

/// Size of the best-`percent` subset: `ceil(percent · n / 100)`.
pub(crate) fn best_count(percent: usize, n: usize) -> usize {
    (percent * n).div_ceil(100).max(1)
}

pub fn dispersion<T: Scalar>(s: &SampleSet<T>) -> DispersionFeatures<T> {
    dispersion_with(s, &Distances::new(s))
}

pub(crate) fn dispersion_with<T: Scalar>(s: &SampleSet<T>, dist: &Distances<T>) -> DispersionFeatures<T> {
    let order = s.canonical_order();
    let mean_all = mean(dist.all()).unwrap_or(T::zero());
    let median_all = median_in_place(&mut dist.all().to_vec()).unwrap_or(T::zero());

    let mut out = DispersionFeatures {
        ratio_mean: [T::zero(); 4],
        ratio_median: [T::zero(); 4],
        diff_mean: [T::zero(); 4],
        diff_median: [T::zero(); 4],
        degenerate: [false; 4],
    };
    for (q, &(percent, _)) in DISPERSION_QUANTILES.iter().enumerate() {
        let k = best_count(percent, s.len());
        let mut sub = dist.subset(&order[..k]);
        let single = k < 2;
        let (sub_mean, sub_median) = if single {
            (T::zero(), T::zero())
        } else {
            (
                mean(&sub).unwrap_or(T::zero()),
                median_in_place(&mut sub).unwrap_or(T::zero()),
            )
        };
        let ratio = |num: T, den: T| -> (T, bool) {
            if den > T::zero() {
                (num / den, false)
            } else {
                (T::one(), true)
            }
        };
        let (rm, f1) = ratio(sub_mean, mean_all);
        let (rd, f2) = ratio(sub_median, median_all);
        out.ratio_mean[q] = rm;
        out.ratio_median[q] = rd;
        out.diff_mean[q] = sub_mean - mean_all;
        out.diff_median[q] = sub_median - median_all;
        out.degenerate[q] = single || f1 || f2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> SampleSet<f64> {
        let rows: Vec<Vec<f64>> = (1..=n).map(|i| vec![i as f64]).collect();
        let y = (1..=n).map(|i| i as f64).collect();
        SampleSet::from_rows(&rows, y).unwrap()
    }

    #[test]
    fn best_count_uses_exact_ceiling() {
        assert_eq!(best_count(10, 250), 25);
        assert_eq!(best_count(2, 250), 5);
        assert_eq!(best_count(25, 8), 2);
        assert_eq!(best_count(2, 8), 1);
    }

    #[test]
    fn eight_points_on_a_line() {
        let f = dispersion(&line(8));
        // Best quarter is {1, 2}: mean distance 1; all pairs average 84/28 = 3.
        assert!((f.ratio_mean[3] - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.diff_mean[3] + 2.0).abs() < 1e-15);
        // The 2% subset is a single point.
        assert!(f.degenerate[0]);
        assert_eq!(f.ratio_mean[0], 0.0);
        assert!((f.diff_mean[0] + 3.0).abs() < 1e-15);
    }

    #[test]
    fn identical_points_give_unit_ratios() {
        let rows = vec![vec![1.0, 1.0]; 50];
        let y = (0..50).map(|i| i as f64).collect();
        let f = dispersion(&SampleSet::from_rows(&rows, y).unwrap());
        for q in 0..4 {
            assert_eq!(f.ratio_mean[q], 1.0);
            assert_eq!(f.ratio_median[q], 1.0);
            assert_eq!(f.diff_mean[q], 0.0);
            assert_eq!(f.diff_median[q], 0.0);
            assert!(f.degenerate[q]);
        }
    }
}
