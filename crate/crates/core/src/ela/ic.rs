use super::{Distances, FeatureSet, SampleSet};
use crate::Scalar;

const EPS_GRID_LEN: usize = 1000;
const EPS_LOG_MIN: f64 = -5.0;
const EPS_LOG_MAX: f64 = 15.0;
const SETTLING_THRESHOLD: f64 = 0.05;

/// Information-content features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcFeatures<T> {
    pub h_max: T,
    pub eps_s: T,
    pub eps_max: T,
    pub eps_ratio: T,
    pub m0: T,
    /// Flags in the order of the fields above.
    pub degenerate: [bool; 5],
}

impl<T: Scalar> FeatureSet<T> for IcFeatures<T> {
    fn write_into(&self, out: &mut Vec<(&'static str, T, bool)>) {
        let f = &self.degenerate;
        out.push(("ic.h.max", self.h_max, f[0]));
        out.push(("ic.eps.s", self.eps_s, f[1]));
        out.push(("ic.eps.max", self.eps_max, f[2]));
        out.push(("ic.eps.ratio", self.eps_ratio, f[3]));
        out.push(("ic.m0", self.m0, f[4]));
    }
}

/// `{0} ∪ 10^linspace(-5, 15, 1000)`, ascending.
pub fn epsilon_grid<T: Scalar>() -> Vec<T> {
    let step = (EPS_LOG_MAX - EPS_LOG_MIN) / (EPS_GRID_LEN - 1) as f64;
    std::iter::once(T::zero())
        .chain((0..EPS_GRID_LEN).map(|k| T::lit(10f64.powf(EPS_LOG_MIN + step * k as f64))))
        .collect()
}

/// Nearest-neighbour tour starting at index 0, ties to the lower index.
/// Points that coincide with an earlier point are dropped first.
pub fn nearest_neighbor_tour<T: Scalar>(s: &SampleSet<T>) -> Vec<usize> {
    tour_with(s, &Distances::new(s))
}

fn tour_with<T: Scalar>(s: &SampleSet<T>, dist: &Distances<T>) -> Vec<usize> {
    let n = s.len();
    let mut keep = vec![true; n];
    for j in 1..n {
        let row = dist.row(j);
        keep[j] = (0..j).all(|i| !keep[i] || row[i] > T::zero());
    }
    let mut unvisited: Vec<usize> = (1..n).filter(|&i| keep[i]).collect();
    let mut tour = Vec::with_capacity(unvisited.len() + 1);
    let mut cur = 0;
    tour.push(cur);
    while !unvisited.is_empty() {
        let mut best = 0;
        let row = dist.row(cur);
        let mut best_d = row[unvisited[0]];
        for (k, &j) in unvisited.iter().enumerate().skip(1) {
            let d = row[j];
            if d < best_d || (d == best_d && j < unvisited[best]) {
                best = k;
                best_d = d;
            }
        }
        cur = unvisited.swap_remove(best);
        tour.push(cur);
    }
    tour
}

/// Slopes along `tour`, with `y` rescaled by its range so the result does not
/// depend on the fitness scale. A constant `y` gives all-zero slopes.
pub fn tour_slopes<T: Scalar>(s: &SampleSet<T>, tour: &[usize]) -> Vec<T> {
    slopes_with(s, &Distances::new(s), tour)
}

fn slopes_with<T: Scalar>(s: &SampleSet<T>, dist: &Distances<T>, tour: &[usize]) -> Vec<T> {
    let y = s.y();
    let lo = y.iter().copied().fold(T::infinity(), T::min);
    let hi = y.iter().copied().fold(T::neg_infinity(), T::max);
    let range = hi - lo;
    tour.windows(2)
        .map(|w| {
            if range > T::zero() {
                (y[w[1]] - y[w[0]]) / range / dist.get(w[0], w[1])
            } else {
                T::zero()
            }
        })
        .collect()
}

fn symbol<T: Scalar>(g: T, eps: T) -> i8 {
    if g < -eps {
        -1
    } else if g > eps {
        1
    } else {
        0
    }
}

pub fn symbols<T: Scalar>(slopes: &[T], eps: T) -> Vec<i8> {
    slopes.iter().map(|&g| symbol(g, eps)).collect()
}

fn symbol_index(a: i8) -> usize {
    (a + 1) as usize
}

/// Entropy (base 6) of the consecutive unequal symbol pairs.
pub fn entropy<T: Scalar>(slopes: &[T], eps: T) -> T {
    entropy_of(&symbols(slopes, eps))
}

fn entropy_of<T: Scalar>(sym: &[i8]) -> T {
    if sym.len() < 2 {
        return T::zero();
    }
    let mut counts = [[0usize; 3]; 3];
    for w in sym.windows(2) {
        counts[symbol_index(w[0])][symbol_index(w[1])] += 1;
    }
    // Summing in sorted order makes equal pair-count multisets give
    // bit-identical entropies.
    let mut off: Vec<usize> = (0..3)
        .flat_map(|a| (0..3).filter(move |&b| b != a).map(move |b| (a, b)))
        .map(|(a, b)| counts[a][b])
        .filter(|&c| c > 0)
        .collect();
    off.sort_unstable();
    let total = T::from_usize_lossy(sym.len() - 1);
    let ln6 = T::lit(6f64.ln());
    let mut h = T::zero();
    for c in off {
        let p = T::from_usize_lossy(c) / total;
        h = h - p * p.ln() / ln6;
    }
    h
}

/// Partial information: length of the symbol sequence without zeros and with
/// repeats collapsed, divided by the number of slopes.
pub fn partial_information<T: Scalar>(slopes: &[T], eps: T) -> T {
    partial_of(&symbols(slopes, eps))
}

fn partial_of<T: Scalar>(sym: &[i8]) -> T {
    if sym.is_empty() {
        return T::zero();
    }
    let mut len = 0usize;
    let mut last = 0i8;
    for &a in sym {
        if a != 0 && a != last {
            len += 1;
            last = a;
        }
    }
    T::from_usize_lossy(len) / T::from_usize_lossy(sym.len())
}

pub fn information_content<T: Scalar>(s: &SampleSet<T>) -> IcFeatures<T> {
    information_content_with(s, &Distances::new(s))
}

pub(crate) fn information_content_with<T: Scalar>(s: &SampleSet<T>, dist: &Distances<T>) -> IcFeatures<T> {
    let tour = tour_with(s, dist);
    let slopes = slopes_with(s, dist, &tour);
    let grid: Vec<T> = epsilon_grid();
    // Beyond the largest |slope| every symbol is 0 and H vanishes.
    let steepest = slopes.iter().fold(T::zero(), |m, g| m.max(g.abs()));
    let mut sym = Vec::with_capacity(slopes.len());
    let h: Vec<T> = grid
        .iter()
        .map(|&e| {
            if e >= steepest {
                return T::zero();
            }
            sym.clear();
            sym.extend(slopes.iter().map(|&g| symbol(g, e)));
            entropy_of(&sym)
        })
        .collect();
    let too_short = slopes.len() < 2;
    let constant = slopes.iter().all(|g| *g == T::zero());

    let mut h_max = T::zero();
    let mut eps_max = grid[0];
    for (&e, &v) in grid.iter().zip(&h) {
        if v > h_max {
            h_max = v;
            eps_max = e;
        }
    }

    // log10 of the first ε below `limit`. ε = 0 maps to the smallest positive
    // grid exponent and "never" to the largest; both are flagged.
    let first_below = |limit: T| -> (T, bool) {
        match grid.iter().zip(&h).find(|(_, &v)| v < limit) {
            Some((&e, _)) if e > T::zero() => (e.log10(), false),
            Some(_) => (T::lit(EPS_LOG_MIN), true),
            None => (T::lit(EPS_LOG_MAX), true),
        }
    };
    let (eps_s, fs) = first_below(T::lit(SETTLING_THRESHOLD));
    let (eps_ratio, fr) = first_below(h_max * T::lit(0.5));
    let m0 = partial_information(&slopes, T::zero());

    let dead = too_short || constant;
    IcFeatures {
        h_max,
        eps_s,
        eps_max,
        eps_ratio,
        m0,
        degenerate: [dead, dead || fs, dead, dead || fr, too_short],
    }
}
