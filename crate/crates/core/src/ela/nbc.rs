use super::{Distances, FeatureSet, SampleSet};
use crate::stats::{mean, pearson, sd};
use crate::Scalar;

/// Nearest-better clustering features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbcFeatures<T> {
    pub sd_ratio: T,
    pub mean_ratio: T,
    pub cor: T,
    pub coeff_var: T,
    pub fitness_cor: T,
    /// Flags in the order of the fields above.
    pub degenerate: [bool; 5],
}

impl<T: Scalar> FeatureSet<T> for NbcFeatures<T> {
    fn write_into(&self, out: &mut Vec<(&'static str, T, bool)>) {
        let f = &self.degenerate;
        out.push(("nbc.nn_nb.sd_ratio", self.sd_ratio, f[0]));
        out.push(("nbc.nn_nb.mean_ratio", self.mean_ratio, f[1]));
        out.push(("nbc.nn_nb.cor", self.cor, f[2]));
        out.push(("nbc.dist_ratio.coeff_var", self.coeff_var, f[3]));
        out.push(("nbc.nb_fitness.cor", self.fitness_cor, f[4]));
    }
}

pub fn nearest_better<T: Scalar>(s: &SampleSet<T>) -> NbcFeatures<T> {
    nearest_better_with(s, &Distances::new(s))
}

/// `num / den`, or 1 (flagged) when the denominator vanishes.
fn ratio<T: Scalar>(num: Option<T>, den: Option<T>) -> (T, bool) {
    match (num, den) {
        (Some(a), Some(b)) if b > T::zero() => (a / b, false),
        _ => (T::one(), true),
    }
}

pub(crate) fn nearest_better_with<T: Scalar>(s: &SampleSet<T>, dist: &Distances<T>) -> NbcFeatures<T> {
    let n = s.len();
    let y = s.y();
    let mut nn = vec![T::infinity(); n];
    // Nearest strictly better point and its distance; ties go to the lower index.
    let mut nb: Vec<Option<(usize, T)>> = vec![None; n];
    for i in 0..n {
        let row = dist.row(i);
        for (j, &d) in row.iter().enumerate() {
            if i == j {
                continue;
            }
            if d < nn[i] {
                nn[i] = d;
            }
            if y[j] < y[i] && nb[i].is_none_or(|(_, best)| d < best) {
                nb[i] = Some((j, d));
            }
        }
    }

    let mut nn_def = Vec::with_capacity(n);
    let mut nb_def = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    let mut indegree = vec![T::zero(); n];
    for i in 0..n {
        if let Some((j, d)) = nb[i] {
            nn_def.push(nn[i]);
            nb_def.push(d);
            indegree[j] = indegree[j] + T::one();
            if nn[i] > T::zero() {
                r.push(d / nn[i]);
            }
        }
    }

    let (sd_ratio, f0) = ratio(sd(&nn_def), sd(&nb_def));
    let (mean_ratio, f1) = ratio(mean(&nn_def), mean(&nb_def));
    let (cor, f2) = match pearson(&nn_def, &nb_def) {
        Some(c) => (c, false),
        None => (T::zero(), true),
    };
    let (coeff_var, f3) = match (sd(&r), mean(&r)) {
        (Some(s), Some(m)) if m > T::zero() => (s / m, false),
        _ => (T::zero(), true),
    };
    let (fitness_cor, f4) = match pearson(&indegree, y) {
        Some(c) => (c, false),
        None => (T::zero(), true),
    };
    NbcFeatures {
        sd_ratio,
        mean_ratio,
        cor,
        coeff_var,
        fitness_cor,
        degenerate: [f0, f1, f2, f3, f4],
    }
}
