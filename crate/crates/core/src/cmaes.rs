//! Standard (μ/μ_w, λ)-CMA-ES with fixed population size and no restarts,
//! instrumented to log every evaluation and snapshot its internal state.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bbob::ProblemInstance;
use crate::linalg::{mat_t_vec, mat_vec, norm, symmetric_eigen};
use crate::state::{extract_state_variables, CmaStateSnapshot};
use crate::{rng, Error, Result, Scalar};

/// Strategy parameters; defaults follow the reference implementation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaParameters<T> {
    pub dim: usize,
    pub lambda: usize,
    pub mu: usize,
    /// Positive recombination weights of the μ best candidates.
    pub weights: Vec<T>,
    /// Negative weights of the λ−μ worst candidates, best first; empty when
    /// the active update is disabled.
    pub negative_weights: Vec<T>,
    pub mu_eff: T,
    pub c_sigma: T,
    pub d_sigma: T,
    pub c_c: T,
    pub c_1: T,
    pub c_mu: T,
    pub chi_n: T,
}

/// `4 + floor(3 ln d)`.
pub fn default_population_size(dim: usize) -> usize {
    4 + (3.0 * (dim as f64).ln()).floor() as usize
}

impl<T: Scalar> CmaParameters<T> {
    pub fn new(dim: usize) -> Self {
        Self::with_population(dim, default_population_size(dim))
    }

    /// Parameters with the active (negative-weight) covariance update.
    pub fn with_population(dim: usize, lambda: usize) -> Self {
        Self::build(dim, lambda, true)
    }

    /// Parameters of the classic update with positive weights only.
    pub fn passive(dim: usize, lambda: usize) -> Self {
        Self::build(dim, lambda, false)
    }

    fn build(dim: usize, lambda: usize, active: bool) -> Self {
        let lambda = lambda.max(2);
        let mu = (lambda / 2).max(1);
        let n = dim as f64;
        let raw: Vec<f64> = (1..=lambda)
            .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln())
            .collect();
        let total: f64 = raw[..mu].iter().sum();
        let weights: Vec<f64> = raw[..mu].iter().map(|w| w / total).collect();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 3.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let c_1 = (lambda as f64 / 6.0).min(1.0) * 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (0.25 + mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
        let neg = &raw[mu..];
        let negative_weights: Vec<f64> = if active && !neg.is_empty() && c_mu > 0.0 {
            let neg_sum: f64 = neg.iter().map(|w| w.abs()).sum();
            let mu_eff_neg = neg_sum * neg_sum / neg.iter().map(|w| w * w).sum::<f64>();
            let scale = (1.0 + c_1 / c_mu)
                .min(1.0 + 2.0 * mu_eff_neg / (mu_eff + 2.0))
                .min((1.0 - c_1 - c_mu) / (n * c_mu));
            neg.iter().map(|w| scale * w / neg_sum).collect()
        } else {
            Vec::new()
        };
        Self {
            dim,
            lambda,
            mu,
            weights: weights.into_iter().map(T::lit).collect(),
            negative_weights: negative_weights.into_iter().filter(|w| *w < 0.0).map(T::lit).collect(),
            mu_eff: T::lit(mu_eff),
            c_sigma: T::lit(c_sigma),
            d_sigma: T::lit(d_sigma),
            c_c: T::lit(c_c),
            c_1: T::lit(c_1),
            c_mu: T::lit(c_mu),
            chi_n: T::lit(chi_n),
        }
    }
}

/// Initial mean policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialMean<T> {
    /// Uniform in `[lower, upper]^d`, drawn from the run's stream.
    Uniform { lower: f64, upper: f64 },
    Fixed(Vec<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaOptions<T> {
    pub initial_mean: InitialMean<T>,
    pub sigma0: T,
    pub population: Option<usize>,
}

impl<T: Scalar> Default for CmaOptions<T> {
    fn default() -> Self {
        Self {
            initial_mean: InitialMean::Uniform {
                lower: -4.0,
                upper: 4.0,
            },
            sigma0: T::lit(2.0),
            population: None,
        }
    }
}

/// Mutable search state.
#[derive(Debug, Clone)]
pub struct CmaState<T> {
    params: CmaParameters<T>,
    mean: Vec<T>,
    sigma: T,
    cov: Array2<T>,
    p_sigma: Vec<T>,
    p_c: Vec<T>,
    basis: Array2<T>,
    scales: Vec<T>,
    eigen_fresh: bool,
    generation: usize,
    evals: usize,
}

impl<T: Scalar> CmaState<T> {
    pub fn init<R: Rng + ?Sized>(dim: usize, options: &CmaOptions<T>, rng: &mut R) -> Result<Self> {
        if !(options.sigma0 > T::zero()) || !options.sigma0.is_finite() {
            return Err(Error::InvalidArgument("sigma0 must be positive".into()));
        }
        let mean = match &options.initial_mean {
            InitialMean::Uniform { lower, upper } => {
                (0..dim).map(|_| rng::uniform(rng, *lower, *upper)).collect()
            }
            InitialMean::Fixed(m) => {
                if m.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: m.len(),
                    });
                }
                m.clone()
            }
        };
        let params = match options.population {
            Some(l) => CmaParameters::with_population(dim, l),
            None => CmaParameters::new(dim),
        };
        Self::from_distribution(params, mean, options.sigma0, Array2::eye(dim))
    }

    /// State with the given distribution and zero evolution paths.
    pub fn from_distribution(
        params: CmaParameters<T>,
        mean: Vec<T>,
        sigma: T,
        cov: Array2<T>,
    ) -> Result<Self> {
        let dim = mean.len();
        if params.dim != dim || cov.dim() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: params.dim,
                got: dim,
            });
        }
        let mut state = Self {
            params,
            mean,
            sigma,
            cov,
            p_sigma: vec![T::zero(); dim],
            p_c: vec![T::zero(); dim],
            basis: Array2::eye(dim),
            scales: vec![T::one(); dim],
            eigen_fresh: false,
            generation: 0,
            evals: 0,
        };
        state.refresh_eigen()?;
        Ok(state)
    }

    pub fn params(&self) -> &CmaParameters<T> {
        &self.params
    }
    pub fn dim(&self) -> usize {
        self.params.dim
    }
    pub fn lambda(&self) -> usize {
        self.params.lambda
    }
    pub fn mean(&self) -> &[T] {
        &self.mean
    }
    pub fn sigma(&self) -> T {
        self.sigma
    }
    pub fn covariance(&self) -> &Array2<T> {
        &self.cov
    }
    pub fn p_sigma(&self) -> &[T] {
        &self.p_sigma
    }
    pub fn p_c(&self) -> &[T] {
        &self.p_c
    }
    pub fn generation(&self) -> usize {
        self.generation
    }
    pub fn evals(&self) -> usize {
        self.evals
    }

    fn refresh_eigen(&mut self) -> Result<()> {
        if self.eigen_fresh {
            return Ok(());
        }
        let eig = symmetric_eigen(&self.cov)?;
        if let Some(v) = eig.values.iter().find(|v| !(**v > T::zero()) || !v.is_finite()) {
            return Err(Error::NumericalBreakdown(format!(
                "covariance lost positive definiteness (eigenvalue {v})"
            )));
        }
        self.scales = eig.values.iter().map(|v| v.sqrt()).collect();
        self.basis = eig.vectors;
        self.eigen_fresh = true;
        Ok(())
    }

    /// Samples λ candidates `m + σ·B·D·z`.
    pub fn ask<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<Vec<T>>> {
        self.refresh_eigen()?;
        let dim = self.dim();
        let mut out = Vec::with_capacity(self.lambda());
        for _ in 0..self.lambda() {
            let dz: Vec<T> = self
                .scales
                .iter()
                .map(|&d| d * rng::standard_normal::<T, _>(rng))
                .collect();
            let y = mat_vec(&self.basis, &dz);
            let x: Vec<T> = (0..dim).map(|i| self.mean[i] + self.sigma * y[i]).collect();
            out.push(x);
        }
        Ok(out)
    }

    /// `C^{-1/2} v = B D^{-1} Bᵀ v`.
    fn inv_sqrt_times(&self, v: &[T]) -> Vec<T> {
        let bt = mat_t_vec(&self.basis, v);
        let scaled: Vec<T> = bt.iter().zip(&self.scales).map(|(&a, &d)| a / d).collect();
        mat_vec(&self.basis, &scaled)
    }

    /// Standard update from one fully evaluated generation.
    pub fn tell(&mut self, candidates: &[Vec<T>], fitness: &[T]) -> Result<()> {
        let lambda = self.lambda();
        if candidates.len() != lambda || fitness.len() != lambda {
            return Err(Error::InvalidArgument(format!(
                "tell expects {lambda} candidates and fitness values, got {} and {}",
                candidates.len(),
                fitness.len()
            )));
        }
        if let Some(i) = fitness.iter().position(|f| !f.is_finite()) {
            return Err(Error::NumericalBreakdown(format!(
                "non-finite fitness for candidate {i} in generation {}",
                self.generation
            )));
        }
        self.refresh_eigen()?;
        let dim = self.dim();
        let p = &self.params;
        let mut order: Vec<usize> = (0..lambda).collect();
        order.sort_by(|&a, &b| fitness[a].partial_cmp(&fitness[b]).expect("finite").then(a.cmp(&b)));

        let steps: Vec<Vec<T>> = order
            .iter()
            .map(|&k| {
                candidates[k]
                    .iter()
                    .zip(&self.mean)
                    .map(|(&x, &m)| (x - m) / self.sigma)
                    .collect()
            })
            .collect();
        let mut y_w = vec![T::zero(); dim];
        for (w, y) in p.weights.iter().zip(&steps) {
            for i in 0..dim {
                y_w[i] = y_w[i] + *w * y[i];
            }
        }

        let two = T::lit(2.0);
        let one = T::one();
        let cs = p.c_sigma;
        let cc = p.c_c;
        let c_inv_sqrt_yw = self.inv_sqrt_times(&y_w);
        let ks = (cs * (two - cs) * p.mu_eff).sqrt();
        for i in 0..dim {
            self.mean[i] = self.mean[i] + self.sigma * y_w[i];
            self.p_sigma[i] = (one - cs) * self.p_sigma[i] + ks * c_inv_sqrt_yw[i];
        }
        let ps_norm = norm(&self.p_sigma);
        let gen = (self.generation + 1) as i32;
        let dt = T::from_usize_lossy(dim);
        let squared = ps_norm * ps_norm / (one - (one - cs).powi(2 * gen));
        let h_sigma = if squared / dt - one < one + T::lit(4.0) / (dt + one) { one } else { T::zero() };
        let kc = (cc * (two - cc) * p.mu_eff).sqrt();
        for i in 0..dim {
            self.p_c[i] = (one - cc) * self.p_c[i] + h_sigma * kc * y_w[i];
        }

        // Negative weights act on steps rescaled to Mahalanobis length √d.
        let worst = &steps[lambda - p.negative_weights.len()..];
        let mut rank_weights: Vec<(T, &Vec<T>)> = p.weights.iter().copied().zip(&steps).collect();
        for (&w, y) in p.negative_weights.iter().zip(worst) {
            let m = norm(&self.inv_sqrt_times(y));
            if m > T::zero() {
                rank_weights.push((w * dt / (m * m), y));
            }
        }
        let weight_sum = p.weights.iter().chain(&p.negative_weights).fold(T::zero(), |a, &w| a + w);
        let decay = one - p.c_1 - p.c_mu * weight_sum + (one - h_sigma) * p.c_1 * cc * (two - cc);
        for i in 0..dim {
            for j in 0..=i {
                let mut rank_mu = T::zero();
                for (w, y) in &rank_weights {
                    rank_mu = rank_mu + *w * y[i] * y[j];
                }
                let v = decay * self.cov[[i, j]] + p.c_1 * self.p_c[i] * self.p_c[j] + p.c_mu * rank_mu;
                self.cov[[i, j]] = v;
                self.cov[[j, i]] = v;
            }
        }
        let expo = ((cs / p.d_sigma) * (ps_norm / p.chi_n - one)).min(one);
        self.sigma = self.sigma * expo.exp();
        if !self.sigma.is_finite() || !(self.sigma > T::zero()) {
            return Err(Error::NumericalBreakdown(format!(
                "step size became {} in generation {}",
                self.sigma, self.generation
            )));
        }
        self.generation += 1;
        self.evals += lambda;
        self.eigen_fresh = false;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEntry<T> {
    /// 1-based evaluation counter.
    pub eval: usize,
    pub x: Vec<T>,
    pub y: T,
}

/// Per-evaluation log of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub entries: Vec<TrajectoryEntry<T>>,
    pub best_so_far: Vec<T>,
    pub precision_at_budget: T,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries.first().map_or(0, |e| e.x.len())
    }

    /// Points and fitness values of the first `n` evaluations.
    pub fn prefix(&self, n: usize) -> (Vec<Vec<T>>, Vec<T>) {
        self.entries[..n.min(self.entries.len())]
            .iter()
            .map(|e| (e.x.clone(), e.y))
            .unzip()
    }

    /// Target precision of the best point among the first `n` evaluations.
    pub fn precision_after(&self, instance: &ProblemInstance<T>, n: usize) -> Option<T> {
        let k = n.min(self.best_so_far.len());
        (k > 0).then(|| instance.target_precision(self.best_so_far[k - 1]))
    }
}

/// Result of one instrumented run.
#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub trajectory: Trajectory<T>,
    pub snapshot: CmaStateSnapshot<T>,
    pub generations: usize,
}

/// Runs CMA-ES for exactly `budget` evaluations.
///
/// The last generation is truncated when `budget` is not a multiple of λ and
/// is then never told. The state snapshot is taken after the first generation
/// whose cumulative evaluation count reaches `snapshot_at`.
pub fn run<T: Scalar>(
    instance: &ProblemInstance<T>,
    budget: usize,
    seed: u64,
    snapshot_at: usize,
    options: &CmaOptions<T>,
) -> Result<RunOutput<T>> {
    if snapshot_at == 0 || snapshot_at > budget {
        return Err(Error::InvalidArgument(format!(
            "snapshot_at must lie in 1..={budget}, got {snapshot_at}"
        )));
    }
    let mut rng = rng::stream(seed);
    let mut state = CmaState::init(instance.dim(), options, &mut rng)?;
    if budget < state.lambda() {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} smaller than population size {}",
            state.lambda()
        )));
    }

    let mut entries = Vec::with_capacity(budget);
    let mut best_so_far = Vec::with_capacity(budget);
    let mut best = T::infinity();
    let mut snapshot = None;

    while entries.len() < budget {
        let candidates = state.ask(&mut rng)?;
        let room = budget - entries.len();
        let take = room.min(candidates.len());
        let mut fitness = Vec::with_capacity(take);
        for x in &candidates[..take] {
            let y = instance.evaluate(x)?;
            if !y.is_finite() {
                return Err(Error::NumericalBreakdown(format!(
                    "non-finite fitness at evaluation {}",
                    entries.len() + 1
                )));
            }
            best = best.min(y);
            entries.push(TrajectoryEntry {
                eval: entries.len() + 1,
                x: x.clone(),
                y,
            });
            best_so_far.push(best);
            fitness.push(y);
        }
        if take == candidates.len() {
            state.tell(&candidates, &fitness)?;
            if snapshot.is_none() && entries.len() >= snapshot_at {
                let mut snap = extract_state_variables(&state, &candidates)?;
                snap.evals_at_snapshot = entries.len();
                snapshot = Some(snap);
            }
        } else if snapshot.is_none() {
            let mut snap = extract_state_variables(&state, &candidates[..take])?;
            snap.evals_at_snapshot = entries.len();
            snapshot = Some(snap);
        }
    }

    let precision_at_budget = instance.target_precision(best);
    Ok(RunOutput {
        trajectory: Trajectory {
            entries,
            best_so_far,
            precision_at_budget,
        },
        snapshot: snapshot.expect("snapshot_at <= budget guarantees a snapshot"),
        generations: state.generation(),
    })
}
