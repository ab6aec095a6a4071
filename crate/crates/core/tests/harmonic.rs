use std::sync::OnceLock;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sandpile_harmonic::green::{compute_green, GreenTable, QuadratureSpec};
use sandpile_harmonic::harmonic::{
    addition_operator_demo, equivariance_residual, harmonicity_residual, injectivity_check, intertwining_residual,
    kernel_check, kernel_witness, separation_check, torus_dist, xi_apply, xi_tuple, Extension, IntegerField,
    PeriodicProfile, TorusPoint, WitnessKind, XiSpec,
};
use sandpile_harmonic::laurent::{divide_by, parse_expression, standard_polys, LaurentPoly};
use sandpile_harmonic::sandpile::{random_recurrent, HeightConfig};
use sandpile_harmonic::window::BoxWindow;
use sandpile_harmonic::{GreenTable64, Poly};

fn plane() -> &'static GreenTable64 {
    static T: OnceLock<GreenTable64> = OnceLock::new();
    T.get_or_init(|| compute_green(2, 4, 16, &QuadratureSpec::default_for(2, 4)).unwrap())
}

fn plane_specs() -> Vec<XiSpec<f64>> {
    standard_polys(2, 4).unwrap().generators.iter().map(|g| XiSpec::new(g, plane()).unwrap()).collect()
}

fn random_poly(rng: &mut ChaCha8Rng, dim: usize, radius: i64, terms: usize) -> Poly {
    let t = (0..terms).map(|_| {
        let k: Vec<i64> = (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect();
        (k, BigInt::from(rng.gen_range(-2i64..=2)))
    });
    LaurentPoly::from_terms(dim, t).unwrap()
}

#[test]
fn zero_field_maps_to_zero() {
    let out = BoxWindow::centered(2, 4);
    let xs = xi_tuple(&plane_specs(), &IntegerField::constant(2, 0), &out).unwrap();
    assert_eq!(xs.len(), 3);
    for x in xs {
        assert!(x.values.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn spec_invariants() {
    for s in plane_specs() {
        assert!(s.tail_l1 > 0.0 && s.tail_l1.is_finite());
        assert!(s.trunc_radius <= plane().radius - s.g.degree());
        assert!(!s.exact);
    }
    let f = standard_polys(2, 4).unwrap().f;
    assert!(XiSpec::new(&f, plane()).unwrap().exact);
    let lin = parse_expression("1-u1", 2).unwrap();
    assert!(XiSpec::new(&lin, plane()).is_err());
    let g3 = parse_expression("(1-u1)^3", 3).unwrap();
    assert!(XiSpec::new(&g3, plane()).is_err());
}

#[test]
fn harmonicity_on_32_window() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = BoxWindow::with_extents(vec![32, 32]).unwrap();
    let v = IntegerField::from_recurrent(&random_recurrent(&w, 4, &mut rng).unwrap());
    for s in plane_specs() {
        let x = xi_apply(&s, &v, &w).unwrap();
        assert!(harmonicity_residual(&x, 4) <= 9.0 * x.max_err());
    }
    let mut c = TorusPoint::<f64>::zeros(BoxWindow::centered(2, 3));
    assert_eq!(harmonicity_residual(&c, 4), 0.0);
    c.values.iter_mut().for_each(|v| *v = 0.3);
    assert!(harmonicity_residual(&c, 4) < 1e-12);
}

#[test]
fn equivariance_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let out = BoxWindow::centered(2, 3);
    let w = BoxWindow::centered(2, 6);
    let delta = IntegerField::new(BoxWindow::centered(2, 0), vec![1], Extension::Zero).unwrap();
    let v = IntegerField::from_recurrent(&random_recurrent(&w, 4, &mut rng).unwrap());
    for s in plane_specs() {
        assert_eq!(equivariance_residual(&s, &v, &[0, 0], &out).unwrap().residual, 0.0);
        assert!(equivariance_residual(&s, &delta, &[1, 0], &out).unwrap().within());
        assert!(equivariance_residual(&s, &v, &[1, 1], &out).unwrap().within());
    }
}

#[test]
fn kernel_witnesses_in_both_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let space = compute_green::<f64>(3, 6, 11, &QuadratureSpec::default_for(3, 6)).unwrap();
    for d in [2usize, 3] {
        let table = if d == 2 { plane() } else { &space };
        let gens = standard_polys(d, 2 * d as i64).unwrap().generators;
        let specs: Vec<XiSpec<f64>> = gens.iter().map(|g| XiSpec::new(g, table).unwrap()).collect();
        let out = BoxWindow::centered(d, 2);
        let mut kinds = vec![WitnessKind::Constant(3), WitnessKind::FMultiple(parse_expression("u1 - 2*u2", d).unwrap())];
        for _ in 0..3 {
            kinds.push(WitnessKind::FMultiple(random_poly(&mut rng, d, 2, 5)));
        }
        for axis in 0..d {
            kinds.push(WitnessKind::Periodic(PeriodicProfile::quarter_alternating(axis)));
        }
        for k in &kinds {
            let v = kernel_witness(k, d, 2 * d as i64).unwrap();
            assert!(kernel_check(&specs, &v, &out).unwrap().all_within(), "{k:?}");
        }
    }
}

#[test]
fn other_periodic_profiles() {
    // beta * profile with integer third differences: period 4 triangle wave / 2
    let p = PeriodicProfile { axis: 1, beta: num_rational::Ratio::new(1, 2), profile: vec![0, 1, 2, 1], offset: 5 };
    let v = kernel_witness(&WitnessKind::Periodic(p), 2, 4).unwrap();
    assert_eq!(v.values.len(), 4);
    assert!(kernel_check(&plane_specs(), &v, &BoxWindow::centered(2, 2)).unwrap().all_within());
}

#[test]
fn homomorphism_on_integer_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let w = BoxWindow::centered(2, 5);
    let out = BoxWindow::centered(2, 4);
    for _ in 0..5 {
        let a = IntegerField::new(w.clone(), (0..w.len()).map(|_| rng.gen_range(-5..6)).collect(), Extension::Constant(2))
            .unwrap();
        let b = IntegerField::new(w.clone(), (0..w.len()).map(|_| rng.gen_range(-5..6)).collect(), Extension::Zero).unwrap();
        for s in plane_specs() {
            let lhs = xi_apply(&s, &a.add(&b).unwrap(), &out).unwrap();
            let rhs = xi_apply(&s, &a, &out).unwrap().add(&xi_apply(&s, &b, &out).unwrap()).unwrap();
            let (dist, err) = lhs.distance(&rhs).unwrap();
            assert!(dist <= err + lhs.max_err());
        }
    }
}

#[test]
fn intertwining_with_random_h() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = BoxWindow::centered(2, 6);
    let v = IntegerField::from_recurrent(&random_recurrent(&w, 4, &mut rng).unwrap());
    for s in plane_specs() {
        for _ in 0..3 {
            let h = random_poly(&mut rng, 2, 1, 4);
            if h.is_zero() {
                continue;
            }
            let gh = &s.g * &h;
            let sgh = XiSpec::new(&gh, plane()).unwrap();
            let c = intertwining_residual(&s, &sgh, &h, &v, &BoxWindow::centered(2, 3)).unwrap();
            assert!(c.within(), "{c:?}");
        }
    }
}

#[test]
fn separation_examples() {
    let s = &plane_specs()[2];
    let w = BoxWindow::centered(2, 5);
    let q = BoxWindow::centered(2, 1);
    let v = HeightConfig::max_stable(w.clone(), 4).unwrap();
    let same = separation_check(s, &v, &v, &q).unwrap();
    assert_eq!(same.value, 0.0);

    let mut toppled = v.clone();
    for (n, dv) in [([0, 0], 4), ([1, 0], -1), ([-1, 0], -1), ([0, 1], -1), ([0, -1], -1)] {
        toppled.set(&n, v.get(&n).unwrap() + dv).unwrap();
    }
    let r = separation_check(s, &v, &toppled, &q).unwrap();
    assert!(r.difference_in_ideal);
    assert!(r.value <= 2.0 * r.err);

    let mut lowered = v.clone();
    lowered.set(&[0, 0], 2).unwrap();
    let r = separation_check(s, &v, &lowered, &q).unwrap();
    assert!(!r.difference_in_ideal);
    assert!(r.separated(2), "{r:?}");

    let mut outside = v.clone();
    outside.set(&[4, 4], 0).unwrap();
    assert!(separation_check(s, &v, &outside, &q).is_err());
}

#[test]
fn addition_demo_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let out = BoxWindow::centered(2, 4);
    for s in plane_specs() {
        let demo = addition_operator_demo(&s, &IntegerField::constant(2, 0), &[0, 0], &out).unwrap();
        for (n, x) in out.sites().zip(&demo.delta.values) {
            assert!(torus_dist(x - s.z(&n)) < 1e-15);
        }
        assert!(demo.comparison.within());

        let w = BoxWindow::centered(2, 6);
        let v = IntegerField::from_recurrent(&random_recurrent(&w, 4, &mut rng).unwrap());
        let demo = addition_operator_demo(&s, &v, &[1, 0], &out).unwrap();
        assert!(demo.comparison.within(), "{:?}", demo.comparison);

        let other = addition_operator_demo(&s, &v, &[0, 2], &out).unwrap();
        let ab = demo.delta.add(&other.delta).unwrap();
        let ba = other.delta.add(&demo.delta).unwrap();
        assert_eq!(ab.values, ba.values);
    }
}

#[test]
fn dissipative_injectivity() {
    let gamma = 5;
    let table = compute_green::<f64>(2, gamma, 16, &QuadratureSpec::default_for(2, gamma)).unwrap();
    let one = LaurentPoly::one(2);
    let spec = XiSpec::new(&one, &table).unwrap();
    assert!((spec.total - 1.0).abs() < 1e-15);
    let f = standard_polys(2, gamma).unwrap().f_gamma;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let w = BoxWindow::centered(2, 6);
    let q = BoxWindow::centered(2, 1);
    let mut tested = 0;
    while tested < 20 {
        let v = IntegerField::from_recurrent(&random_recurrent(&w, gamma, &mut rng).unwrap());
        let p: Vec<i64> = (0..q.len()).map(|_| rng.gen_range(-2..=2)).collect();
        let poly = LaurentPoly::from_terms(2, q.sites().zip(&p).map(|(n, &c)| (n, BigInt::from(c)))).unwrap();
        if poly.is_zero() || divide_by(&poly, &f, None).unwrap().quotient().is_some() {
            continue;
        }
        let pf = IntegerField::new(q.clone(), p, Extension::Zero).unwrap();
        let c = injectivity_check(&spec, &v, &pf, &BoxWindow::centered(2, 3)).unwrap();
        assert!(c.exceeds(), "{c:?}");
        tested += 1;
    }
}

#[test]
fn single_precision_pipeline() {
    let t: GreenTable<f32> = compute_green(2, 4, 12, &QuadratureSpec::default_for(2, 4).with_target(1e-3)).unwrap();
    let gens = standard_polys(2, 4).unwrap().generators;
    let specs: Vec<XiSpec<f32>> = gens.iter().map(|g| XiSpec::new(g, &t).unwrap()).collect();
    let v = kernel_witness(&WitnessKind::Constant(3), 2, 4).unwrap();
    assert!(kernel_check(&specs, &v, &BoxWindow::centered(2, 2)).unwrap().all_within());
}

#[test]
fn torus_csv_layout() {
    let s = &plane_specs()[0];
    let x = xi_apply(s, &IntegerField::constant(2, 1), &BoxWindow::centered(2, 1)).unwrap();
    let csv = x.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n1,n2,value,err"));
    assert_eq!(lines.count(), 9);
}
