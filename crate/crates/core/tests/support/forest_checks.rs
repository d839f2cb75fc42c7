//! Checks shared by the core test suites and the acceptance run.
#![allow(dead_code)]

use ndarray::Array2;
use rand::Rng;
use trajela::forest::{ForestParams, Node, RandomForestModel, RowMeta, TargetTransform, TrainingSet};
use trajela::{rng, Error, Forest, TrainingData};

fn meta(m: usize) -> Vec<RowMeta> {
    (0..m)
        .map(|i| RowMeta {
            fid: 1 + (i % 24) as u32,
            iid: 1 + (i % 5) as u32,
            run: i as u32,
        })
        .collect()
}

fn names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("f{j}")).collect()
}

fn dataset(x: Array2<f64>, y: Vec<f64>) -> TrainingData {
    let m = x.nrows();
    TrainingSet::new(names(x.ncols()), x, y, meta(m)).unwrap()
}

fn single_tree(depth: Option<usize>) -> ForestParams {
    ForestParams {
        n_trees: 1,
        bootstrap: false,
        max_depth: depth,
        ..ForestParams::default()
    }
}

/// Exhaustive search over every midpoint of a one-feature dataset; the first
/// (lowest) cut wins ties.
fn best_cut(x: &[f64], y: &[f64]) -> f64 {
    let mut xs: Vec<f64> = x.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let sse = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|t| (t - m).powi(2)).sum::<f64>()
    };
    let mut best = (f64::INFINITY, f64::NAN);
    for w in xs.windows(2) {
        let t = 0.5 * (w[0] + w[1]);
        let left: Vec<f64> = x.iter().zip(y).filter(|(a, _)| **a <= t).map(|(_, b)| *b).collect();
        let right: Vec<f64> = x.iter().zip(y).filter(|(a, _)| **a > t).map(|(_, b)| *b).collect();
        let s = sse(&left) + sse(&right);
        if s < best.0 {
            best = (s, t);
        }
    }
    best.1
}

pub fn stump_matches_exhaustive_cut_search() {
    for seed in 0..50u64 {
        let mut r = rng::stream(seed);
        let m = r.random_range(5..60);
        let x: Vec<f64> = (0..m).map(|_| r.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| if v > 0.7 { 4.0 } else { 0.0 } + v * v + r.random_range(0.0..2.0))
            .collect();
        let data = dataset(Array2::from_shape_vec((m, 1), x.clone()).unwrap(), y.clone());
        let model = Forest::fit(&data, TargetTransform::Raw, seed, &single_tree(Some(1))).unwrap();
        let tree = &model.trees()[0];
        assert_eq!(tree.depth(), 1, "seed {seed}");
        let Node::Split { threshold, .. } = tree.nodes()[0] else {
            panic!("seed {seed}: root is a leaf")
        };
        assert_eq!(threshold, best_cut(&x, &y), "seed {seed}");
    }
}

pub fn unbootstrapped_tree_reproduces_training_targets() {
    let mut r = rng::stream(7);
    let x = Array2::from_shape_fn((80, 3), |_| r.random_range(-5.0..5.0));
    let y: Vec<f64> = (0..80).map(|_| r.random_range(0.0..100.0)).collect();
    let data = dataset(x.clone(), y.clone());
    let model = Forest::fit(&data, TargetTransform::Raw, 1, &single_tree(None)).unwrap();
    for (i, row) in x.rows().into_iter().enumerate() {
        assert_eq!(model.predict(&row.to_vec()).unwrap(), y[i]);
    }
}

pub fn predictions_stay_within_target_range() {
    let mut r = rng::stream(11);
    let x = Array2::from_shape_fn((60, 4), |_| r.random_range(-5.0..5.0));
    let y: Vec<f64> = x.rows().into_iter().map(|row| row.iter().map(|v| v * v).sum::<f64>()).collect();
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let model = Forest::fit(&dataset(x, y), TargetTransform::Raw, 3, &ForestParams::with_trees(50)).unwrap();
    for _ in 0..1000 {
        let q: Vec<f64> = (0..4).map(|_| r.random_range(-20.0..20.0)).collect();
        let p = model.predict(&q).unwrap();
        assert!(p >= lo && p <= hi, "{p} outside [{lo}, {hi}]");
    }
}

pub fn constant_target_is_predicted_everywhere() {
    let mut r = rng::stream(5);
    let x = Array2::from_shape_fn((30, 2), |_| r.random_range(-5.0..5.0));
    let model = Forest::fit(&dataset(x, vec![2.5; 30]), TargetTransform::Raw, 0, &ForestParams::with_trees(20)).unwrap();
    for _ in 0..100 {
        let q = [r.random_range(-9.0..9.0), r.random_range(-9.0..9.0)];
        assert_eq!(model.predict(&q).unwrap(), 2.5);
    }
}

pub fn forest_output_is_the_mean_of_its_trees() {
    let json = r#"{"version":1,"feature_names":["a"],"transform":"raw","seed":0,
        "params":{"n_trees":2,"bootstrap":true,"min_samples_split":2,"max_depth":null,"log_floor":1e-12},
        "trees":[{"nodes":[{"kind":"leaf","value":1.0}],"importance":[0.0]},
                 {"nodes":[{"kind":"leaf","value":3.0}],"importance":[0.0]}]}"#;
    let model = Forest::from_reader(json.as_bytes()).unwrap();
    assert_eq!(model.predict(&[0.3]).unwrap(), 2.0);
    assert_eq!(model.predict(&[0.3]).unwrap(), model.predict(&[0.3]).unwrap());
}

pub fn single_driver_dominates_importance() {
    let mut r = rng::stream(21);
    let x = Array2::from_shape_fn((200, 4), |_| r.random_range(-5.0..5.0));
    let y: Vec<f64> = x.column(2).iter().map(|v| 3.0 * v + 20.0).collect();
    let model = Forest::fit(&dataset(x, y), TargetTransform::Raw, 2, &ForestParams::with_trees(50)).unwrap();
    let imp = model.feature_importance();
    let total: f64 = imp.iter().map(|(_, v)| v).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert_eq!(imp[2].0, "f3");
    assert!(imp[2].1 > 0.9, "{imp:?}");
}

pub fn noise_feature_ranks_below_informative_one() {
    let mut r = rng::stream(22);
    let x = Array2::from_shape_fn((150, 2), |_| r.random_range(0.0..1.0));
    let y: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|row| 10.0 * row[0] + r.random_range(0.0..2.0))
        .collect();
    let model = Forest::fit(&dataset(x, y), TargetTransform::Raw, 4, &ForestParams::with_trees(50)).unwrap();
    let imp = model.feature_importance();
    assert!(imp[1].1 < imp[0].1, "{imp:?}");
}

pub fn identity_target_is_learned_on_a_grid() {
    let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 10.0).collect();
    let train: Vec<f64> = xs.iter().copied().step_by(2).collect();
    let test: Vec<f64> = xs.iter().copied().skip(1).step_by(2).collect();
    let data = dataset(Array2::from_shape_vec((train.len(), 1), train.clone()).unwrap(), train.clone());
    let model = Forest::fit(&data, TargetTransform::Raw, 8, &ForestParams::with_trees(100)).unwrap();
    let se: f64 = test.iter().map(|&v| (model.predict(&[v]).unwrap() - v).powi(2)).sum();
    let rmse = (se / test.len() as f64).sqrt();
    assert!(rmse < 0.1 * 10.0, "rmse {rmse}");
}

pub fn log_model_is_better_on_fine_precisions() {
    // Precisions spanning 1e-9..1e2 driven by one feature.
    let mut r = rng::stream(31);
    let m = 200;
    let x = Array2::from_shape_fn((m, 2), |_| r.random_range(0.0..1.0));
    let y: Vec<f64> = x.column(0).iter().map(|&v| 10f64.powf(-9.0 + 11.0 * v)).collect();
    let data = dataset(x.clone(), y.clone());
    let params = ForestParams::with_trees(100);
    let raw = Forest::fit(&data, TargetTransform::Raw, 1, &params).unwrap();
    let log = Forest::fit(&data, TargetTransform::Log10, 1, &params).unwrap();

    let mut q = rng::stream(32);
    let (mut err_raw, mut err_log, mut n) = (0.0, 0.0, 0);
    for _ in 0..500 {
        let row = [q.random_range(0.0..0.5), q.random_range(0.0..1.0)];
        let truth: f64 = -9.0 + 11.0 * row[0];
        let pr = raw.predict(&row).unwrap().max(1e-12).log10();
        let pl = log.predict(&row).unwrap();
        err_raw += (pr - truth).powi(2);
        err_log += (pl - truth).powi(2);
        n += 1;
    }
    let (err_raw, err_log) = ((err_raw / n as f64).sqrt(), (err_log / n as f64).sqrt());
    assert!(err_log < err_raw, "log {err_log} raw {err_raw}");
}

pub fn zero_precision_is_clamped_before_log() {
    let x = Array2::from_shape_vec((4, 1), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    let data = dataset(x, vec![0.0, 0.0, 1.0, 1.0]);
    let model = Forest::fit(&data, TargetTransform::Log10, 0, &single_tree(None)).unwrap();
    assert_eq!(model.predict(&[0.0]).unwrap(), -12.0);
    assert_eq!(model.predict(&[3.0]).unwrap(), 0.0);
}

pub fn training_is_independent_of_pool_size() {
    let mut r = rng::stream(41);
    let x = Array2::from_shape_fn((70, 3), |_| r.random_range(-5.0..5.0));
    let y: Vec<f64> = (0..70).map(|_| r.random_range(0.0..10.0)).collect();
    let data = dataset(x, y);
    let probes: Vec<[f64; 3]> = (0..50)
        .map(|_| [r.random_range(-5.0..5.0), r.random_range(-5.0..5.0), r.random_range(-5.0..5.0)])
        .collect();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let model = Forest::fit(&data, TargetTransform::Log10, 99, &ForestParams::with_trees(40)).unwrap();
            let mut buf = Vec::new();
            model.to_writer(&mut buf).unwrap();
            let preds: Vec<f64> = probes.iter().map(|p| model.predict(p).unwrap()).collect();
            (buf, preds)
        })
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_eq!(a, run(1));
}

pub fn serialization_round_trip_and_version_check() {
    let mut r = rng::stream(51);
    let x = Array2::from_shape_fn((25, 2), |_| r.random_range(-1.0..1.0));
    let y: Vec<f64> = (0..25).map(|_| r.random_range(0.0..1.0)).collect();
    let model = Forest::fit(&dataset(x, y), TargetTransform::Raw, 5, &ForestParams::with_trees(10)).unwrap();
    let dir = std::env::temp_dir().join(format!("trajela-forest-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.json");
    model.save(&path).unwrap();
    let back = Forest::load(&path).unwrap();
    assert_eq!(back, model);

    let text = std::fs::read_to_string(&path).unwrap().replacen("\"version\":1", "\"version\":9", 1);
    assert!(matches!(Forest::from_reader(text.as_bytes()), Err(Error::ModelFormat(_))));
    std::fs::remove_dir_all(&dir).unwrap();
}

pub fn named_prediction_and_schema_errors() {
    let x = Array2::from_shape_vec((4, 2), vec![0.0, 5.0, 1.0, 4.0, 2.0, 3.0, 3.0, 2.0]).unwrap();
    let data = dataset(x, vec![1.0, 2.0, 3.0, 4.0]);
    let model = Forest::fit(&data, TargetTransform::Raw, 0, &single_tree(None)).unwrap();
    let a = model.predict_named(&[("f2", 4.0), ("extra", 9.0), ("f1", 1.0)]).unwrap();
    assert_eq!(a, model.predict(&[1.0, 4.0]).unwrap());
    assert!(matches!(model.predict_named(&[("f1", 1.0)]), Err(Error::Schema(_))));
    assert!(model.predict(&[1.0]).is_err());
    assert!(model.predict(&[f64::NAN, 1.0]).is_err());
}

pub fn invalid_training_data_is_rejected() {
    let x = Array2::from_shape_vec((2, 1), vec![0.0, 1.0]).unwrap();
    assert!(TrainingSet::new(names(1), x.clone(), vec![1.0, -1.0], meta(2)).is_err());
    assert!(TrainingSet::new(names(1), x.clone(), vec![1.0], meta(2)).is_err());
    assert!(TrainingSet::new(names(2), x.clone(), vec![1.0, 1.0], meta(2)).is_err());
    let one = dataset(Array2::from_shape_vec((1, 1), vec![0.0]).unwrap(), vec![1.0]);
    assert!(Forest::fit(&one, TargetTransform::Raw, 0, &ForestParams::with_trees(1)).is_err());
    let ok = dataset(x, vec![0.0, 1.0]);
    assert!(Forest::fit(&ok, TargetTransform::Raw, 0, &ForestParams::with_trees(0)).is_err());
}

pub fn single_precision_forest() {
    let x = Array2::from_shape_fn((40, 1), |(i, _)| i as f32);
    let y: Vec<f32> = (0..40).map(|i| (i / 10) as f32).collect();
    let data = TrainingSet::new(names(1), x, y, meta(40)).unwrap();
    let model = RandomForestModel::<f32>::fit(&data, TargetTransform::Raw, 0, &single_tree(None)).unwrap();
    assert_eq!(model.predict(&[25.0]).unwrap(), 2.0);
    assert_eq!(model.trees()[0].depth(), 2);
}
