use ndarray::Array2;

use super::{FeatureSet, SampleSet};
use crate::linalg::lstsq;
use crate::{Error, Result, Scalar};

/// Meta-model features from four least-squares fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaFeatures<T> {
    pub lin_simple_adj_r2: T,
    pub lin_simple_intercept: T,
    pub lin_simple_coef_min: T,
    pub lin_simple_coef_max: T,
    pub lin_simple_coef_max_by_min: T,
    pub lin_w_interact_adj_r2: T,
    pub quad_simple_adj_r2: T,
    pub quad_simple_cond: T,
    pub quad_w_interact_adj_r2: T,
    /// Degeneracy flags in field order.
    pub flags: [bool; 9],
}

impl<T: Scalar> MetaFeatures<T> {
    pub fn values(&self) -> [T; 9] {
        [
            self.lin_simple_adj_r2,
            self.lin_simple_intercept,
            self.lin_simple_coef_min,
            self.lin_simple_coef_max,
            self.lin_simple_coef_max_by_min,
            self.lin_w_interact_adj_r2,
            self.quad_simple_adj_r2,
            self.quad_simple_cond,
            self.quad_w_interact_adj_r2,
        ]
    }
}

const META_NAMES: [&str; 9] = [
    "ela_meta.lin_simple.adj_r2",
    "ela_meta.lin_simple.intercept",
    "ela_meta.lin_simple.coef.min",
    "ela_meta.lin_simple.coef.max",
    "ela_meta.lin_simple.coef.max_by_min",
    "ela_meta.lin_w_interact.adj_r2",
    "ela_meta.quad_simple.adj_r2",
    "ela_meta.quad_simple.cond",
    "ela_meta.quad_w_interact.adj_r2",
];

impl<T: Scalar> FeatureSet<T> for MetaFeatures<T> {
    fn write_into(&self, out: &mut Vec<(&'static str, T, bool)>) {
        for ((name, v), flag) in META_NAMES.iter().zip(self.values()).zip(self.flags) {
            out.push((name, v, flag));
        }
    }
}

/// Relative size below which a fitted term counts as numerical noise.
const NEGLIGIBLE_TERM: f64 = 1e-8;

#[derive(Clone, Copy)]
enum Model {
    Linear,
    LinearInteractions,
    PureQuadratic,
    FullQuadratic,
}

impl Model {
    fn terms(self, d: usize) -> usize {
        match self {
            Model::Linear => d,
            Model::LinearInteractions => d + d * (d - 1) / 2,
            Model::PureQuadratic => 2 * d,
            Model::FullQuadratic => d + d * (d + 1) / 2,
        }
    }
}

struct Fit<T> {
    /// Intercept first, then terms in design order.
    coef: Vec<T>,
    adj_r2: T,
    degenerate: bool,
}

fn design<T: Scalar>(xc: &Array2<T>, model: Model) -> Array2<T> {
    let (n, d) = xc.dim();
    let p = model.terms(d);
    let mut a = Array2::<T>::zeros((n, p + 1));
    for r in 0..n {
        let row = xc.row(r);
        let mut c = 0;
        a[[r, c]] = T::one();
        c += 1;
        for j in 0..d {
            a[[r, c]] = row[j];
            c += 1;
        }
        match model {
            Model::Linear => {}
            Model::LinearInteractions => {
                for i in 0..d {
                    for j in (i + 1)..d {
                        a[[r, c]] = row[i] * row[j];
                        c += 1;
                    }
                }
            }
            Model::PureQuadratic => {
                for j in 0..d {
                    a[[r, c]] = row[j] * row[j];
                    c += 1;
                }
            }
            Model::FullQuadratic => {
                for i in 0..d {
                    for j in i..d {
                        a[[r, c]] = row[i] * row[j];
                        c += 1;
                    }
                }
            }
        }
    }
    a
}

fn fit<T: Scalar>(xc: &Array2<T>, y: &[T], model: Model) -> Result<Fit<T>> {
    let n = y.len();
    let p = model.terms(xc.ncols());
    let ybar = y.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    if y.iter().all(|&v| v == y[0]) {
        let mut coef = vec![T::zero(); p + 1];
        coef[0] = ybar;
        return Ok(Fit {
            coef,
            adj_r2: T::one(),
            degenerate: true,
        });
    }
    let a = design(xc, model);
    let coef = lstsq(&a, y)?;
    let mut ss_tot = T::zero();
    let mut ss_res = T::zero();
    for (r, &yi) in y.iter().enumerate() {
        let pred: T = a.row(r).iter().zip(&coef).map(|(&u, &b)| u * b).sum();
        ss_res = ss_res + (yi - pred) * (yi - pred);
        ss_tot = ss_tot + (yi - ybar) * (yi - ybar);
    }
    let (adj_r2, degenerate) = if ss_res == T::zero() {
        (T::one(), ss_tot == T::zero())
    } else if ss_tot == T::zero() {
        (T::one(), true)
    } else {
        let r2 = T::one() - ss_res / ss_tot;
        let scale = T::from_usize_lossy(n - 1) / T::from_usize_lossy(n - p - 1);
        (T::one() - (T::one() - r2) * scale, false)
    };
    // Terms whose contribution is at rounding level relative to the spread
    // of y are reported as exactly zero.
    let y_sd = (ss_tot / T::from_usize_lossy(n)).sqrt();
    let mut coef = coef;
    for (k, c) in coef.iter_mut().enumerate().skip(1) {
        let rms = (a.column(k).iter().map(|&u| u * u).sum::<T>() / T::from_usize_lossy(n)).sqrt();
        if c.abs() * rms <= T::lit(NEGLIGIBLE_TERM) * y_sd {
            *c = T::zero();
        }
    }
    Ok(Fit {
        coef,
        adj_r2,
        degenerate,
    })
}

fn ratio_or_one<T: Scalar>(num: T, den: T) -> (T, bool) {
    if den > T::zero() && (num / den).is_finite() {
        (num / den, false)
    } else {
        (T::one(), true)
    }
}

/// Linear, linear-with-interactions, pure-quadratic and full-quadratic least
/// squares fits with intercept.
///
/// Inputs are centred per column before fitting; only the reported
/// intercept is mapped back to the original coordinates.
pub fn ela_meta<T: Scalar>(s: &SampleSet<T>) -> Result<MetaFeatures<T>> {
    let (n, d) = s.x().dim();
    let p_full = Model::FullQuadratic.terms(d);
    if n <= p_full + 1 {
        return Err(Error::InvalidSample(format!(
            "full quadratic model needs more than {} points, got {n}",
            p_full + 1
        )));
    }
    let means: Vec<T> = (0..d)
        .map(|j| s.x().column(j).iter().copied().sum::<T>() / T::from_usize_lossy(n))
        .collect();
    let mut xc = s.x().clone();
    for mut row in xc.rows_mut() {
        for (v, &m) in row.iter_mut().zip(&means) {
            *v = *v - m;
        }
    }
    let y = s.y();

    let lin = fit(&xc, y, Model::Linear)?;
    let inter = fit(&xc, y, Model::LinearInteractions)?;
    let quad = fit(&xc, y, Model::PureQuadratic)?;
    let full = fit(&xc, y, Model::FullQuadratic)?;

    let slopes: Vec<T> = lin.coef[1..].iter().map(|c| c.abs()).collect();
    let intercept = lin.coef[0]
        - lin.coef[1..]
            .iter()
            .zip(&means)
            .map(|(&b, &m)| b * m)
            .sum::<T>();
    let coef_min = slopes.iter().copied().fold(T::infinity(), T::min);
    let coef_max = slopes.iter().copied().fold(T::zero(), T::max);
    let (max_by_min, mbm_flag) = ratio_or_one(coef_max, coef_min);

    let quad_abs: Vec<T> = quad.coef[1 + d..].iter().map(|c| c.abs()).collect();
    let qmax = quad_abs.iter().copied().fold(T::zero(), T::max);
    let qmin = quad_abs.iter().copied().fold(T::infinity(), T::min);
    let (cond, cond_flag) = ratio_or_one(qmax, qmin);

    Ok(MetaFeatures {
        lin_simple_adj_r2: lin.adj_r2,
        lin_simple_intercept: intercept,
        lin_simple_coef_min: coef_min,
        lin_simple_coef_max: coef_max,
        lin_simple_coef_max_by_min: max_by_min,
        lin_w_interact_adj_r2: inter.adj_r2,
        quad_simple_adj_r2: quad.adj_r2,
        quad_simple_cond: cond,
        quad_w_interact_adj_r2: full.adj_r2,
        flags: [
            lin.degenerate,
            false,
            false,
            false,
            mbm_flag,
            inter.degenerate,
            quad.degenerate,
            cond_flag,
            full.degenerate,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random_sample(n: usize, d: usize, seed: u64, f: impl Fn(&[f64]) -> f64) -> SampleSet<f64> {
        let mut r = rng::stream(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng::uniform(&mut r, -5.0, 5.0)).collect())
            .collect();
        let y = rows.iter().map(|x| f(x)).collect();
        SampleSet::from_rows(&rows, y).unwrap()
    }

    #[test]
    fn exact_linear_model() {
        let s = random_sample(60, 2, 1, |x| 3.0 + 2.0 * x[0] - x[1]);
        let m = ela_meta(&s).unwrap();
        assert!((m.lin_simple_adj_r2 - 1.0).abs() < 1e-12);
        assert!((m.lin_simple_intercept - 3.0).abs() < 1e-10);
        assert!((m.lin_simple_coef_min - 1.0).abs() < 1e-10);
        assert!((m.lin_simple_coef_max - 2.0).abs() < 1e-10);
        assert!((m.lin_simple_coef_max_by_min - 2.0).abs() < 1e-10);
    }

    #[test]
    fn sphere_has_unit_condition() {
        let s = random_sample(100, 5, 2, |x| x.iter().map(|v| v * v).sum());
        let m = ela_meta(&s).unwrap();
        assert!((m.quad_simple_adj_r2 - 1.0).abs() < 1e-12);
        assert!((m.quad_simple_cond - 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_points_for_full_quadratic() {
        let s = random_sample(21, 5, 3, |x| x[0]);
        assert!(matches!(ela_meta(&s), Err(Error::InvalidSample(_))));
    }

    #[test]
    fn constant_target_is_degenerate_not_nan() {
        let s = random_sample(40, 2, 4, |_| 7.0);
        let m = ela_meta(&s).unwrap();
        assert!(m.values().iter().all(|v| v.is_finite()));
        assert_eq!(m.lin_simple_adj_r2, 1.0);
        assert!(m.flags[0]);
        assert!(m.flags[4] && m.flags[7]);
    }
}
