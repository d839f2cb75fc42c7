//! The five CMA-ES state variables used as predictor features.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::cmaes::CmaState;
use crate::linalg::{mat_t_vec, norm, symmetric_eigen};
use crate::{Error, Result, Scalar};

pub const STATE_FEATURE_NAMES: [&str; 5] = [
    "step_size",
    "mahalanobis_dist",
    "c_evol_path",
    "sigma_evol_path",
    "cma_simil_lh",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaStateSnapshot<T> {
    pub step_size: T,
    /// Mahalanobis distance of the population mean from `m` under `σ²C`.
    pub mahalanobis_dist: T,
    /// `‖p_c‖`.
    pub c_evol_path: T,
    /// `‖p_σ‖ / χ_n`.
    pub sigma_evol_path: T,
    /// Mean log-density of the population under `N(m, σ²C)`.
    pub cma_simil_lh: T,
    pub evals_at_snapshot: usize,
    pub population: Vec<Vec<T>>,
}

impl<T: Scalar> CmaStateSnapshot<T> {
    pub fn values(&self) -> [T; 5] {
        [
            self.step_size,
            self.mahalanobis_dist,
            self.c_evol_path,
            self.sigma_evol_path,
            self.cma_simil_lh,
        ]
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, T)> {
        STATE_FEATURE_NAMES.into_iter().zip(self.values())
    }
}

/// Whitened coordinates `D⁻¹ Bᵀ (x - m) / σ`, where `C = B D² Bᵀ`.
struct Whitener<T> {
    basis: Array2<T>,
    inv_scales: Vec<T>,
    log_det: T,
}

impl<T: Scalar> Whitener<T> {
    fn new(sigma: T, cov: &Array2<T>) -> Result<Self> {
        let eig = symmetric_eigen(cov)?;
        let floor = T::lit(1e-300).max(T::min_positive_value());
        let s2 = sigma * sigma;
        let mut log_det = T::zero();
        let mut inv_scales = Vec::with_capacity(eig.values.len());
        for &ev in &eig.values {
            let v = s2 * ev;
            if !(v >= floor) || !v.is_finite() {
                return Err(Error::DegenerateState(format!(
                    "sampling covariance eigenvalue {v} is not usable"
                )));
            }
            log_det = log_det + v.ln();
            inv_scales.push(T::one() / v.sqrt());
        }
        Ok(Self {
            basis: eig.vectors,
            inv_scales,
            log_det,
        })
    }

    fn squared_distance(&self, diff: &[T]) -> T {
        mat_t_vec(&self.basis, diff)
            .iter()
            .zip(&self.inv_scales)
            .map(|(&a, &s)| (a * s) * (a * s))
            .sum()
    }
}

pub fn extract_state_variables<T: Scalar>(
    state: &CmaState<T>,
    population: &[Vec<T>],
) -> Result<CmaStateSnapshot<T>> {
    let dim = state.dim();
    if population.is_empty() {
        return Err(Error::EmptyData("snapshot population is empty".into()));
    }
    if let Some(bad) = population.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    let whitener = Whitener::new(state.sigma(), state.covariance())?;
    let m = state.mean();
    let count = T::from_usize_lossy(population.len());

    // Average of x - m rather than centroid - m, so a population sitting on
    // the mean gives exactly zero.
    let mut mean_diff = vec![T::zero(); dim];
    for x in population {
        for ((c, &v), &mi) in mean_diff.iter_mut().zip(x).zip(m) {
            *c = *c + (v - mi);
        }
    }
    mean_diff.iter_mut().for_each(|c| *c = *c / count);
    let mahalanobis_dist = whitener.squared_distance(&mean_diff).sqrt();

    let log_2pi = T::lit((2.0 * std::f64::consts::PI).ln());
    let half = T::lit(0.5);
    let dim_t = T::from_usize_lossy(dim);
    let total_ll: T = population
        .iter()
        .map(|x| {
            let diff: Vec<T> = x.iter().zip(m).map(|(&a, &b)| a - b).collect();
            -half * (dim_t * log_2pi + whitener.log_det + whitener.squared_distance(&diff))
        })
        .sum();

    let snap = CmaStateSnapshot {
        step_size: state.sigma(),
        mahalanobis_dist,
        c_evol_path: norm(state.p_c()),
        sigma_evol_path: norm(state.p_sigma()) / state.params().chi_n,
        cma_simil_lh: total_ll / count,
        evals_at_snapshot: state.evals(),
        population: population.to_vec(),
    };
    if snap.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateState("non-finite state variable".into()));
    }
    Ok(snap)
}
