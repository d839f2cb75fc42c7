//! Checks shared by the core test suites and the acceptance run.
#![allow(dead_code)]

use std::collections::HashMap;

use trajela::bbob::{make_instance, SearchDomain};
use trajela::ela::{
    compute_all, dispersion, ela_distr, ela_meta, entropy, epsilon_grid, information_content,
    nearest_better, number_of_peaks, partial_information, FeatureVector, SampleSet,
    DISPERSION_QUANTILES, ELA_FEATURE_NAMES,
};
use trajela::{rng, Instance};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn cor(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let sab: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let saa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let sbb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    sab / (saa * sbb).sqrt()
}

struct Raw {
    rows: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl Raw {
    fn set(&self) -> SampleSet<f64> {
        SampleSet::from_rows(&self.rows, self.y.clone()).unwrap()
    }
}

/// Points uniform in the box, evaluated on a random BBOB instance.
fn random_raw(seed: u64) -> Raw {
    let mut r = rng::stream(seed);
    let fid = 1 + (seed % 24) as u32;
    let d = 2 + (seed % 4) as usize;
    let n = 60 + (seed as usize * 37) % 200;
    let inst: Instance = make_instance(fid, 1 + (seed % 5) as u32, d).unwrap();
    let dom = SearchDomain::<f64>::bbob(d);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| dom.sample(&mut r)).collect();
    let y = rows.iter().map(|x| inst.evaluate(x).unwrap()).collect();
    Raw { rows, y }
}

fn canonical(raw: &Raw) -> Raw {
    let mut idx: Vec<usize> = (0..raw.y.len()).collect();
    idx.sort_by(|&a, &b| raw.y[a].partial_cmp(&raw.y[b]).unwrap().then(a.cmp(&b)));
    Raw {
        rows: idx.iter().map(|&i| raw.rows[i].clone()).collect(),
        y: idx.iter().map(|&i| raw.y[i]).collect(),
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// Brute-force oracles on canonically ordered samples.

fn oracle_dispersion(raw: &Raw) -> Vec<f64> {
    let n = raw.y.len();
    let pairs = |k: usize| -> Vec<f64> {
        let mut v = Vec::new();
        for i in 0..k {
            for j in (i + 1)..k {
                v.push(dist(&raw.rows[i], &raw.rows[j]));
            }
        }
        v
    };
    let all = pairs(n);
    let (ma, da) = (mean(&all), median(all.clone()));
    let mut rm = Vec::new();
    let mut rd = Vec::new();
    let mut dm = Vec::new();
    let mut dd = Vec::new();
    for &(pct, _) in &DISPERSION_QUANTILES {
        let k = ((pct * n) as f64 / 100.0 - 1e-12).ceil() as usize;
        let sub = pairs(k);
        let (ms, ds) = if sub.is_empty() { (0.0, 0.0) } else { (mean(&sub), median(sub.clone())) };
        rm.push(ms / ma);
        rd.push(ds / da);
        dm.push(ms - ma);
        dd.push(ds - da);
    }
    [rm, rd, dm, dd].concat()
}

fn oracle_nbc(raw: &Raw) -> Vec<f64> {
    let n = raw.y.len();
    let mut nn_all = vec![f64::INFINITY; n];
    let mut nb_of = vec![None; n];
    for i in 0..n {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = dist(&raw.rows[i], &raw.rows[j]);
            nn_all[i] = nn_all[i].min(d);
            if raw.y[j] < raw.y[i] && best.is_none_or(|(_, b)| d < b) {
                best = Some((j, d));
            }
        }
        nb_of[i] = best;
    }
    let def: Vec<usize> = (0..n).filter(|&i| nb_of[i].is_some()).collect();
    let nn: Vec<f64> = def.iter().map(|&i| nn_all[i]).collect();
    let nb: Vec<f64> = def.iter().map(|&i| nb_of[i].unwrap().1).collect();
    let r: Vec<f64> = def.iter().filter(|&&i| nn_all[i] > 0.0).map(|&i| nb_of[i].unwrap().1 / nn_all[i]).collect();
    let mut indeg = vec![0.0; n];
    for &i in &def {
        indeg[nb_of[i].unwrap().0] += 1.0;
    }
    vec![sd(&nn) / sd(&nb), mean(&nn) / mean(&nb), cor(&nn, &nb), sd(&r) / mean(&r), cor(&indeg, &raw.y)]
}

fn oracle_ic(raw: &Raw) -> Vec<f64> {
    let n = raw.y.len();
    let mut kept: Vec<usize> = Vec::new();
    for j in 0..n {
        if kept.iter().all(|&i| dist(&raw.rows[i], &raw.rows[j]) > 0.0) {
            kept.push(j);
        }
    }
    let mut tour = vec![kept[0]];
    let mut left: Vec<usize> = kept[1..].to_vec();
    while !left.is_empty() {
        let cur = *tour.last().unwrap();
        let (k, _) = left
            .iter()
            .enumerate()
            .map(|(k, &j)| (k, dist(&raw.rows[cur], &raw.rows[j])))
            .fold((usize::MAX, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        tour.push(left.remove(k));
    }
    let lo = raw.y.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = raw.y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let slopes: Vec<f64> = tour
        .windows(2)
        .map(|w| (raw.y[w[1]] - raw.y[w[0]]) / (hi - lo) / dist(&raw.rows[w[0]], &raw.rows[w[1]]))
        .collect();
    let h_of = |eps: f64| -> f64 {
        let s: Vec<i32> = slopes.iter().map(|&g| if g < -eps { -1 } else if g > eps { 1 } else { 0 }).collect();
        let mut counts: HashMap<(i32, i32), usize> = HashMap::new();
        for w in s.windows(2) {
            *counts.entry((w[0], w[1])).or_default() += 1;
        }
        let total = (s.len() - 1) as f64;
        let mut terms: Vec<usize> = counts.iter().filter(|((a, b), _)| a != b).map(|(_, &c)| c).collect();
        terms.sort_unstable();
        terms
            .iter()
            .map(|&c| {
                let p = c as f64 / total;
                -p * p.ln() / 6f64.ln()
            })
            .fold(0.0, |acc, t| acc + t)
    };
    let grid: Vec<f64> = epsilon_grid();
    let hs: Vec<f64> = grid.iter().map(|&e| h_of(e)).collect();
    let hmax = hs.iter().cloned().fold(0.0, f64::max);
    let eps_max = grid[hs.iter().position(|&h| h == hmax).unwrap()];
    let first = |lim: f64| match grid.iter().zip(&hs).find(|(_, &h)| h < lim) {
        Some((&e, _)) if e > 0.0 => e.log10(),
        Some(_) => -5.0,
        None => 15.0,
    };
    let m0 = {
        let mut len = 0;
        let mut last = 0;
        for &g in &slopes {
            let a = if g < 0.0 { -1 } else if g > 0.0 { 1 } else { 0 };
            if a != 0 && a != last {
                len += 1;
                last = a;
            }
        }
        len as f64 / slopes.len() as f64
    };
    vec![hmax, first(0.05), eps_max, first(0.5 * hmax), m0]
}

fn group(fv: &FeatureVector<f64>, prefix: &str) -> Vec<f64> {
    fv.iter().filter(|(n, _)| n.starts_with(prefix)).map(|(_, v)| v).collect()
}

pub fn names_match_registry() {
    let raw = random_raw(3);
    let fv = compute_all(&raw.set()).unwrap();
    assert_eq!(fv.values.len(), 38);
    let names: Vec<&str> = fv.iter().map(|(n, _)| n).collect();
    assert_eq!(names, ELA_FEATURE_NAMES);
}

pub fn dispersion_nbc_ic_match_brute_force() {
    for seed in 0..30 {
        let raw = random_raw(seed);
        let fv = compute_all(&raw.set()).unwrap();
        let c = canonical(&raw);
        for (name, got, want) in [
            ("disp", group(&fv, "disp."), oracle_dispersion(&c)),
            ("nbc", group(&fv, "nbc."), oracle_nbc(&c)),
            ("ic", group(&fv, "ic."), oracle_ic(&c)),
        ] {
            assert_eq!(got.len(), want.len());
            for (k, (g, w)) in got.iter().zip(&want).enumerate() {
                assert!(close(*g, *w, 1e-9 * w.abs().max(1.0)), "seed {seed} {name}[{k}]: {g} vs {w}");
            }
        }
    }
}

pub fn linear_meta_model_matches_normal_equations() {
    for seed in 0..20 {
        let raw = random_raw(seed);
        let d = raw.rows[0].len();
        // Solve (A^T A) beta = A^T y with Gaussian elimination.
        let p = d + 1;
        let mut m = vec![vec![0.0; p + 1]; p];
        for (x, &y) in raw.rows.iter().zip(&raw.y) {
            let a: Vec<f64> = std::iter::once(1.0).chain(x.iter().cloned()).collect();
            for i in 0..p {
                for j in 0..p {
                    m[i][j] += a[i] * a[j];
                }
                m[i][p] += a[i] * y;
            }
        }
        for c in 0..p {
            let piv = (c..p).max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap()).unwrap();
            m.swap(c, piv);
            for r in 0..p {
                if r != c {
                    let f = m[r][c] / m[c][c];
                    for k in c..=p {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
        let beta: Vec<f64> = (0..p).map(|i| m[i][p] / m[i][i]).collect();
        let n = raw.y.len() as f64;
        let ybar = mean(&raw.y);
        let sst: f64 = raw.y.iter().map(|y| (y - ybar).powi(2)).sum();
        let sse: f64 = raw
            .rows
            .iter()
            .zip(&raw.y)
            .map(|(x, y)| {
                let f = beta[0] + x.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>();
                (y - f).powi(2)
            })
            .sum();
        let adj = 1.0 - (sse / sst) * (n - 1.0) / (n - d as f64 - 1.0);
        let abs: Vec<f64> = beta[1..].iter().map(|b| b.abs()).collect();
        let (lo, hi) = (abs.iter().cloned().fold(f64::INFINITY, f64::min), abs.iter().cloned().fold(0.0, f64::max));
        let mf = ela_meta(&raw.set()).unwrap();
        let scale = raw.y.iter().map(|v| v.abs()).fold(1.0, f64::max);
        assert!(close(mf.lin_simple_adj_r2, adj, 1e-9), "seed {seed}");
        assert!(close(mf.lin_simple_intercept, beta[0], 1e-9 * scale));
        assert!(close(mf.lin_simple_coef_min, lo, 1e-9 * scale));
        assert!(close(mf.lin_simple_coef_max, hi, 1e-9 * scale));
    }
}

pub fn exact_linear_model() {
    let mut r = rng::stream(8);
    let rows: Vec<Vec<f64>> = (0..50).map(|_| vec![rng::uniform(&mut r, -5.0, 5.0), rng::uniform(&mut r, -5.0, 5.0)]).collect();
    let y = rows.iter().map(|x| 3.0 + 2.0 * x[0] - x[1]).collect();
    let m = ela_meta(&SampleSet::from_rows(&rows, y).unwrap()).unwrap();
    assert!(close(m.lin_simple_adj_r2, 1.0, 1e-12));
    assert!(close(m.lin_simple_intercept, 3.0, 1e-10));
    assert!(close(m.lin_simple_coef_min, 1.0, 1e-10));
    assert!(close(m.lin_simple_coef_max, 2.0, 1e-10));
    assert!(close(m.lin_simple_coef_max_by_min, 2.0, 1e-10));
}

pub fn quadratic_condition_oracle() {
    let mut r = rng::stream(9);
    let rows: Vec<Vec<f64>> = (0..80).map(|_| vec![rng::uniform(&mut r, -5.0, 5.0), rng::uniform(&mut r, -5.0, 5.0)]).collect();
    let y = rows.iter().map(|x| 4.0 * x[0] * x[0] + x[1] * x[1]).collect();
    let m = ela_meta(&SampleSet::from_rows(&rows, y).unwrap()).unwrap();
    assert!(close(m.quad_simple_cond, 4.0, 1e-9));
    assert!(close(m.quad_simple_adj_r2, 1.0, 1e-12));
    let y: Vec<f64> = rows.iter().map(|x| x[0] * x[0] + x[1] * x[1]).collect();
    let m = ela_meta(&SampleSet::from_rows(&rows, y).unwrap()).unwrap();
    assert!(close(m.quad_simple_cond, 1.0, 1e-9));
}

pub fn distribution_examples() {
    let rows: Vec<Vec<f64>> = (0..3).map(|i| vec![i as f64]).collect();
    let f = ela_distr(&SampleSet::from_rows(&rows, vec![1.0, 2.0, 3.0]).unwrap());
    assert!(f.skewness.abs() < 1e-15);

    let mut y = vec![-1.0; 125];
    y.extend(vec![1.0; 125]);
    let rows: Vec<Vec<f64>> = (0..250).map(|i| vec![i as f64]).collect();
    let f = ela_distr(&SampleSet::from_rows(&rows, y).unwrap());
    assert!(close(f.kurtosis, -2.0, 1e-12));

    // One tight Gaussian cluster, laid out on its quantiles.
    let tight: Vec<f64> = (1..=300).map(|i| 5.0 + 0.01 * normal_quantile((i as f64 - 0.5) / 300.0)).collect();
    assert_eq!(number_of_peaks(&tight), 1);
    assert_eq!(oracle_peaks(&tight), 1);
}

pub fn peak_count_matches_direct_kde() {
    for seed in 0..40 {
        let mut r = rng::stream(seed);
        let n = 50 + 10 * seed as usize;
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let z = rng::standard_normal::<f64, _>(&mut r);
                if i % 3 == 0 { 10.0 + z } else { z }
            })
            .collect();
        assert_eq!(number_of_peaks(&y), oracle_peaks(&y), "seed {seed}");
    }
    // Two well separated clusters.
    let y: Vec<f64> = (1..=200)
        .map(|i| {
            let z = normal_quantile(((i % 100) as f64 + 0.5) / 100.0);
            if i <= 100 { z } else { 20.0 + z }
        })
        .collect();
    assert_eq!(number_of_peaks(&y), 2);
}

/// Inverse standard normal CDF by bisection on an erf approximation.
fn normal_quantile(p: f64) -> f64 {
    fn erf(x: f64) -> f64 {
        // Abramowitz and Stegun 7.1.26.
        let t = 1.0 / (1.0 + 0.3275911 * x.abs());
        let poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
        (1.0 - poly * (-x * x).exp()).copysign(x)
    }
    let cdf = |x: f64| 0.5 * (1.0 + erf(x / 2f64.sqrt()));
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p { lo = mid } else { hi = mid }
    }
    0.5 * (lo + hi)
}

/// Gaussian KDE with Silverman bandwidth on 512 points, modes split at local
/// minima, counted at >= 1% of the mass.
fn oracle_peaks(y: &[f64]) -> usize {
    let n = y.len() as f64;
    let mut s = y.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| {
        let h = (s.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(s.len() - 1);
        s[lo] + (h - lo as f64) * (s[hi] - s[lo])
    };
    let bw = 0.9 * sd(y).min((q(0.75) - q(0.25)) / 1.34) * n.powf(-0.2);
    let (a, b) = (s[0] - 3.0 * bw, s[s.len() - 1] + 3.0 * bw);
    let xs: Vec<f64> = (0..512).map(|i| a + (b - a) * i as f64 / 511.0).collect();
    let dens: Vec<f64> = xs
        .iter()
        .map(|&x| y.iter().map(|&v| (-0.5 * ((x - v) / bw).powi(2)).exp()).sum::<f64>() / (n * bw * (2.0 * std::f64::consts::PI).sqrt()))
        .collect();
    let mut cuts = vec![0];
    cuts.extend((1..511).filter(|&i| {
        let next_change = (i + 1..512).find(|&k| dens[k] != dens[i]);
        dens[i] < dens[i - 1] && next_change.is_some_and(|k| dens[k] > dens[i])
    }));
    cuts.push(511);
    let area = |l: usize, r: usize| (l..r).map(|i| 0.5 * (dens[i] + dens[i + 1]) * (xs[1] - xs[0])).sum::<f64>();
    let total = area(0, 511);
    cuts.windows(2).filter(|w| area(w[0], w[1]) / total >= 0.01).count()
}

pub fn dispersion_examples() {
    let rows: Vec<Vec<f64>> = (1..=8).map(|i| vec![i as f64]).collect();
    let f = dispersion(&SampleSet::from_rows(&rows, (1..=8).map(|i| i as f64).collect()).unwrap());
    assert!(close(f.ratio_mean[3], 1.0 / 3.0, 1e-12));
    assert!(close(f.diff_mean[3], -2.0, 1e-12));

    for seed in 0..20 {
        let raw = random_raw(seed);
        let s = raw.set();
        let f = dispersion(&s.canonicalized());
        let mut all = Vec::new();
        for i in 0..raw.rows.len() {
            for j in (i + 1)..raw.rows.len() {
                all.push(dist(&raw.rows[i], &raw.rows[j]));
            }
        }
        let ma = mean(&all);
        for q in 0..4 {
            assert!(close(f.diff_mean[q], (f.ratio_mean[q] - 1.0) * ma, 1e-9));
            assert!(f.ratio_mean[q] >= 0.0 && f.ratio_median[q] >= 0.0);
        }
    }

    let rows = vec![vec![0.5, -1.0]; 40];
    let f = dispersion(&SampleSet::from_rows(&rows, (0..40).map(|i| i as f64).collect()).unwrap());
    assert!(f.ratio_mean.iter().chain(&f.ratio_median).all(|&v| v == 1.0));
    assert!(f.diff_mean.iter().chain(&f.diff_median).all(|&v| v == 0.0));
}

pub fn nearest_better_examples() {
    let rows: Vec<Vec<f64>> = (1..=5).map(|i| vec![i as f64]).collect();
    let f = nearest_better(&SampleSet::from_rows(&rows, (1..=5).map(|i| i as f64).collect()).unwrap());
    assert_eq!(f.coeff_var, 0.0);
    assert!(close(f.mean_ratio, 1.0, 1e-15));

    // Low cluster near the origin, high cluster 50 units away.
    let mut r = rng::stream(12);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..30 {
        rows.push(vec![rng::uniform(&mut r, 0.0, 1.0), rng::uniform(&mut r, 0.0, 1.0)]);
        y.push(i as f64);
        rows.push(vec![50.0 + rng::uniform::<f64, _>(&mut r, 0.0, 1.0), rng::uniform(&mut r, 0.0, 1.0)]);
        y.push(100.0 + i as f64);
    }
    let s = SampleSet::from_rows(&rows, y).unwrap();
    let f = nearest_better(&s);
    assert!(f.cor.abs() < 0.3, "cor {}", f.cor);
    // Best high-cluster point: its nearest better point is across the gap.
    let raw = canonical(&Raw { rows: s.x().outer_iter().map(|r| r.to_vec()).collect(), y: s.y().to_vec() });
    let jump = (0..30).map(|j| dist(&raw.rows[30], &raw.rows[j])).fold(f64::INFINITY, f64::min);
    assert!(jump > 48.0 && jump < 52.0);

    for seed in 0..20 {
        let f = nearest_better(&random_raw(seed).set());
        assert!(f.mean_ratio <= 1.0 + 1e-12);
    }
}

pub fn information_content_examples() {
    let alt = [1.0, -1.0, 1.0, -1.0, 1.0];
    assert!(close(entropy(&alt, 0.0), 2f64.ln() / 6f64.ln(), 1e-9));
    let mono = [0.1, 0.4, 2.0, 0.3];
    assert_eq!(partial_information(&mono, 0.0), 0.25);

    let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.91).cos()]).collect();
    let f = information_content(&SampleSet::from_rows(&rows, vec![2.5; 40]).unwrap());
    assert_eq!(f.h_max, 0.0);
    assert_eq!(f.m0, 0.0);

    for seed in 0..20 {
        let f = information_content(&random_raw(seed).set().canonicalized());
        assert!((0.0..=1.0).contains(&f.h_max));
        assert!((0.0..=1.0).contains(&f.m0));
    }
}

fn invariant(name: &str, affine: bool) -> bool {
    if affine {
        !(name.starts_with("disp.diff_") || name.starts_with("ela_meta.lin_simple.intercept") || name.starts_with("ela_meta.lin_simple.coef"))
    } else {
        name != "ela_meta.lin_simple.intercept"
    }
}

pub fn y_affine_invariance() {
    for seed in 0..100 {
        let raw = random_raw(1000 + seed);
        let mut r = rng::stream(seed);
        let a = rng::uniform::<f64, _>(&mut r, 0.1, 10.0);
        let b = rng::uniform::<f64, _>(&mut r, -100.0, 100.0);
        let base = compute_all(&raw.set()).unwrap();
        let y2: Vec<f64> = raw.y.iter().map(|v| a * v + b).collect();
        let moved = compute_all(&SampleSet::from_rows(&raw.rows, y2).unwrap()).unwrap();
        for ((name, u), (_, v)) in base.iter().zip(moved.iter()) {
            if invariant(name, true) {
                assert!(close(u, v, 1e-9 * u.abs().max(1.0)), "seed {seed} {name}: {u} vs {v} (a={a}, b={b})");
            }
        }
    }
}

pub fn x_translation_invariance() {
    for seed in 0..100 {
        let raw = random_raw(2000 + seed);
        let mut r = rng::stream(seed);
        let d = raw.rows[0].len();
        let c: Vec<f64> = (0..d).map(|_| rng::uniform(&mut r, -3.0, 3.0)).collect();
        let base = compute_all(&raw.set()).unwrap();
        let rows2: Vec<Vec<f64>> = raw.rows.iter().map(|x| x.iter().zip(&c).map(|(a, b)| a + b).collect()).collect();
        let moved = compute_all(&SampleSet::from_rows(&rows2, raw.y.clone()).unwrap()).unwrap();
        for ((name, u), (_, v)) in base.iter().zip(moved.iter()) {
            if invariant(name, false) {
                assert!(close(u, v, 1e-9 * u.abs().max(1.0)), "seed {seed} {name}: {u} vs {v}");
            }
        }
    }
}

pub fn permutation_invariance() {
    for seed in 0..20 {
        let raw = random_raw(3000 + seed);
        let base = compute_all(&raw.set()).unwrap();
        let n = raw.y.len();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + seed as usize) % n).collect();
        let mut seen = perm.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != n {
            continue;
        }
        let shuffled = raw.set().select(&perm);
        let other = compute_all(&shuffled).unwrap();
        assert_eq!(base.values, other.values, "seed {seed}");
    }
}

pub fn every_feature_is_finite_and_peaks_positive() {
    for seed in 0..50 {
        let fv = compute_all(&random_raw(4000 + seed).set()).unwrap();
        assert!(fv.values.iter().all(|v| v.is_finite()));
        assert!(fv.get("ela_distr.number_of_peaks").unwrap() >= 1.0);
    }
}

pub fn degenerate_constant_fitness_is_flagged_not_nan() {
    let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![(i as f64).sin(), (i as f64 * 1.3).cos()]).collect();
    let fv = compute_all(&SampleSet::from_rows(&rows, vec![1.0; 50]).unwrap()).unwrap();
    assert!(fv.values.iter().all(|v| v.is_finite()));
    assert!(fv.is_degenerate("ela_distr.skewness"));
    assert!(fv.is_degenerate("nbc.nn_nb.cor"));
    assert!(fv.is_degenerate("ic.h.max"));
}

pub fn single_precision_agrees_with_double() {
    let raw = random_raw(5);
    let rows32: Vec<Vec<f32>> = raw.rows.iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect();
    let y32: Vec<f32> = raw.y.iter().map(|&v| v as f32).collect();
    let f32v = compute_all(&SampleSet::from_rows(&rows32, y32).unwrap()).unwrap();
    let f64v = compute_all(&raw.set()).unwrap();
    let a = f32v.get("disp.ratio_mean_25").unwrap() as f64;
    let b = f64v.get("disp.ratio_mean_25").unwrap();
    assert!((a - b).abs() < 1e-3);
}
