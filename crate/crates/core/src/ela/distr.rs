use super::{FeatureSet, SampleSet};
use crate::stats::{central_moment, sd, total_cmp};
use crate::Scalar;

const KDE_GRID: usize = 512;
const KDE_CUT: f64 = 3.0;
const MODE_MASS_THRESHOLD: f64 = 0.01;

/// y-distribution features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistrFeatures<T> {
    pub skewness: T,
    pub kurtosis: T,
    pub number_of_peaks: T,
    /// Set when `y` is constant and the moments are undefined.
    pub constant: bool,
}

impl<T: Scalar> FeatureSet<T> for DistrFeatures<T> {
    fn write_into(&self, out: &mut Vec<(&'static str, T, bool)>) {
        out.push(("ela_distr.skewness", self.skewness, self.constant));
        out.push(("ela_distr.kurtosis", self.kurtosis, self.constant));
        out.push(("ela_distr.number_of_peaks", self.number_of_peaks, false));
    }
}

/// Skewness and excess kurtosis from biased central moments, plus the number
/// of KDE modes that hold at least 1% of the probability mass.
pub fn ela_distr<T: Scalar>(s: &SampleSet<T>) -> DistrFeatures<T> {
    distr_of(s.y())
}

pub(crate) fn distr_of<T: Scalar>(y: &[T]) -> DistrFeatures<T> {
    let m2 = central_moment(y, 2).unwrap_or(T::zero());
    if !(m2 > T::zero()) || is_constant(y) {
        return DistrFeatures {
            skewness: T::zero(),
            kurtosis: T::zero(),
            number_of_peaks: T::one(),
            constant: true,
        };
    }
    let m3 = central_moment(y, 3).unwrap_or(T::zero());
    let m4 = central_moment(y, 4).unwrap_or(T::zero());
    DistrFeatures {
        skewness: m3 / m2.powf(T::lit(1.5)),
        kurtosis: m4 / (m2 * m2) - T::lit(3.0),
        number_of_peaks: T::from_usize_lossy(number_of_peaks(y)),
        constant: false,
    }
}

fn is_constant<T: Scalar>(y: &[T]) -> bool {
    y.windows(2).all(|w| w[0] == w[1])
}

/// Quantile with linear interpolation between order statistics.
fn quantile_sorted<T: Scalar>(sorted: &[T], p: f64) -> T {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + T::lit(h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule of thumb `0.9 · min(sd, IQR/1.34) · n^{-1/5}`.
pub fn silverman_bandwidth<T: Scalar>(y: &[T]) -> T {
    let mut sorted = y.to_vec();
    sorted.sort_by(total_cmp);
    let sdv = sd(y).unwrap_or(T::zero());
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let mut lo = sdv.min(iqr / T::lit(1.34));
    if !(lo > T::zero()) {
        lo = if sdv > T::zero() {
            sdv
        } else if sorted[0] != T::zero() {
            sorted[0].abs()
        } else {
            T::one()
        };
    }
    T::lit(0.9) * lo * T::from_usize_lossy(y.len()).powf(T::lit(-0.2))
}

/// Number of modes of a Gaussian KDE of `y` holding at least 1% of its mass.
///
/// The density is evaluated on 512 points spanning three bandwidths beyond
/// the data; each mode owns the region between its neighbouring local minima.
pub fn number_of_peaks<T: Scalar>(y: &[T]) -> usize {
    if y.is_empty() {
        return 0;
    }
    if is_constant(y) {
        return 1;
    }
    let h = silverman_bandwidth(y);
    let (min, max) = y
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
    let lo = min - T::lit(KDE_CUT) * h;
    let hi = max + T::lit(KDE_CUT) * h;
    let step = (hi - lo) / T::from_usize_lossy(KDE_GRID - 1);
    let grid: Vec<T> = (0..KDE_GRID)
        .map(|i| lo + step * T::from_usize_lossy(i))
        .collect();
    let norm = T::one() / (T::from_usize_lossy(y.len()) * h * T::lit((2.0 * std::f64::consts::PI).sqrt()));
    let dens: Vec<T> = grid
        .iter()
        .map(|&g| {
            y.iter()
                .map(|&v| {
                    let u = (g - v) / h;
                    (T::lit(-0.5) * u * u).exp()
                })
                .sum::<T>()
                * norm
        })
        .collect();

    // Local minima, where a flat bottom (e.g. from symmetric data) counts
    // once at its left end.
    let mut bounds = vec![0usize];
    for i in 1..KDE_GRID - 1 {
        if dens[i] < dens[i - 1] {
            let mut j = i;
            while j + 1 < KDE_GRID && dens[j + 1] == dens[i] {
                j += 1;
            }
            if j + 1 < KDE_GRID && dens[j + 1] > dens[i] {
                bounds.push(i);
            }
        }
    }
    bounds.push(KDE_GRID - 1);

    let trapezoid = |a: usize, b: usize| -> T {
        (a..b)
            .map(|i| (dens[i] + dens[i + 1]) * step / T::lit(2.0))
            .sum::<T>()
    };
    let total = trapezoid(0, KDE_GRID - 1);
    if !(total > T::zero()) {
        return 1;
    }
    let count = bounds
        .windows(2)
        .filter(|w| trapezoid(w[0], w[1]) / total >= T::lit(MODE_MASS_THRESHOLD))
        .count();
    count.max(1)
}
