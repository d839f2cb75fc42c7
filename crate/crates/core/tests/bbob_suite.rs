use trajela::bbob::{make_instance, FunctionId, SearchDomain};
use trajela::{rng, Error, Instance};

fn all_instances() -> Vec<Instance> {
    let mut v = Vec::new();
    for fid in 1..=24 {
        for iid in 1..=5 {
            v.push(make_instance(fid, iid, 5).unwrap());
        }
    }
    v
}

#[test]
fn random_points_never_beat_the_optimum() {
    for inst in all_instances() {
        let dom = SearchDomain::<f64>::bbob(5);
        let mut r = rng::derived_stream(77, &[inst.fid().get() as u64, inst.iid() as u64]);
        for _ in 0..10_000 {
            let x = dom.sample(&mut r);
            let y = inst.evaluate(&x).unwrap();
            assert!(
                y >= inst.f_opt() - 1e-9,
                "f{} i{}: {y} < f_opt {}",
                inst.fid().get(),
                inst.iid(),
                inst.f_opt()
            );
            assert!(inst.target_precision(y) >= 0.0);
        }
    }
}

#[test]
fn optimum_attained_everywhere() {
    for inst in all_instances() {
        let y = inst.evaluate(inst.x_opt()).unwrap();
        let tol = 1e-9 * inst.f_opt().abs().max(1.0);
        assert!((y - inst.f_opt()).abs() <= tol, "f{} i{}", inst.fid().get(), inst.iid());
    }
}

#[test]
fn optimum_inside_box() {
    for inst in all_instances() {
        let bound = if inst.fid().get() == 5 { 5.0 } else { 4.0 };
        assert!(inst.x_opt().iter().all(|v| v.abs() <= bound));
    }
}

#[test]
fn rotations_are_orthogonal() {
    for inst in all_instances() {
        for m in [inst.rotation_r(), inst.rotation_q()] {
            let p = m.t().dot(m);
            for ((i, j), v) in p.indexed_iter() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn sphere_unit_step() {
    let inst: Instance = make_instance(1, 1, 5).unwrap();
    let mut x = inst.x_opt().to_vec();
    x[0] += 1.0;
    assert!((inst.evaluate(&x).unwrap() - inst.f_opt() - 1.0).abs() < 1e-12);
}

#[test]
fn linear_slope_directional_signs() {
    for iid in 1..=5 {
        let inst: Instance = make_instance(5, iid, 5).unwrap();
        let mut r = rng::stream(iid as u64);
        for _ in 0..100 {
            let x: Vec<f64> = (0..5).map(|_| rng::uniform(&mut r, -4.99, 4.99)).collect();
            for i in 0..5 {
                let h = 1e-3;
                let mut up = x.clone();
                let mut down = x.clone();
                up[i] += h;
                down[i] -= h;
                let d = inst.evaluate(&up).unwrap() - inst.evaluate(&down).unwrap();
                // Moving toward the optimum's corner always improves.
                assert!(d * inst.x_opt()[i] < 0.0, "iid {iid} coord {i}");
            }
        }
    }
}

#[test]
fn precision_examples() {
    let inst: Instance = make_instance(3, 2, 5).unwrap();
    assert_eq!(inst.target_precision(inst.f_opt()), 0.0);
    assert!((inst.target_precision(inst.f_opt() + 3.2) - 3.2).abs() < 1e-12);
    let dom = SearchDomain::<f64>::bbob(5);
    let mut r = rng::stream(5);
    for _ in 0..1000 {
        let y = inst.evaluate(&dom.sample(&mut r)).unwrap();
        assert!(inst.target_precision(y) >= 0.0);
    }
}

#[test]
fn generation_is_deterministic() {
    for fid in FunctionId::all() {
        let a: Instance = make_instance(fid.get(), 3, 5).unwrap();
        let b: Instance = make_instance(fid.get(), 3, 5).unwrap();
        assert_eq!(a.x_opt(), b.x_opt());
        assert_eq!(a.f_opt().to_bits(), b.f_opt().to_bits());
        assert_eq!(a.rotation_seeds(), b.rotation_seeds());
    }
}

#[test]
fn invalid_ids_and_points() {
    assert!(matches!(make_instance::<f64>(25, 1, 5), Err(Error::InvalidFunction(25))));
    assert!(matches!(make_instance::<f64>(0, 1, 5), Err(Error::InvalidFunction(0))));
    let inst: Instance = make_instance(1, 1, 5).unwrap();
    assert!(matches!(inst.evaluate(&[0.0; 4]), Err(Error::DimensionMismatch { .. })));
    assert!(inst.evaluate(&[0.0, 0.0, f64::NAN, 0.0, 0.0]).is_err());
    // Outside the box is still a valid point.
    assert!(inst.evaluate(&[9.0; 5]).unwrap().is_finite());
}

#[test]
fn metadata_withholds_optimum_by_default() {
    let inst: Instance = make_instance(7, 4, 5).unwrap();
    let hidden = serde_json::to_string(&inst.metadata(false)).unwrap();
    assert!(!hidden.contains("x_opt"));
    let shown = inst.metadata(true);
    assert_eq!(shown.x_opt.unwrap(), inst.x_opt().to_vec());
}
