use sandpile_harmonic::green::{
    compute_green, decay_profile, entropy_quadrature, fundamental_residual, l1_partial_sums, multiplier_table,
    series_table, walk_series_oracle, GreenTable, QuadratureSpec, SingularityTreatment,
};
use sandpile_harmonic::laurent::{parse_expression, standard_polys};
use sandpile_harmonic::window::{max_norm, BoxWindow};
use sandpile_harmonic::GreenTable64;

fn table(d: usize, gamma: i64, radius: usize) -> GreenTable64 {
    compute_green(d, gamma, radius, &QuadratureSpec::default_for(d, gamma)).unwrap()
}

/// All images of `n` under coordinate permutations and sign flips.
fn orbit(n: &[i64]) -> Vec<Vec<i64>> {
    let d = n.len();
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..d {
        perms = perms
            .into_iter()
            .flat_map(|p| {
                let free: Vec<usize> = (0..d).filter(|i| !p.contains(i)).collect();
                free.into_iter().map(move |i| [p.clone(), vec![i]].concat())
            })
            .collect();
    }
    let mut out = Vec::new();
    for p in &perms {
        for signs in 0..(1 << d) {
            out.push((0..d).map(|a| if signs >> a & 1 == 1 { -n[p[a]] } else { n[p[a]] }).collect());
        }
    }
    out
}

#[test]
fn tables_are_symmetric() {
    for (d, gamma, r) in [(2usize, 4i64, 6usize), (2, 5, 6), (3, 6, 3), (3, 7, 3)] {
        let t = table(d, gamma, r);
        for n in t.window().sites() {
            let v = t.get(&n).unwrap();
            for m in orbit(&n) {
                assert!((t.get(&m).unwrap() - v).abs() <= 2.0 * t.accuracy);
            }
        }
    }
}

#[test]
fn sign_pattern() {
    let t = table(2, 4, 6);
    for n in t.window().sites() {
        let v = t.get(&n).unwrap();
        if n.iter().all(|&x| x == 0) {
            assert_eq!(v, 0.0);
        } else {
            assert!(v < 0.0, "w{n:?} = {v}");
        }
    }
    for (d, gamma) in [(3usize, 6i64), (2, 5), (3, 7)] {
        let t = table(d, gamma, 3);
        assert!(t.values.iter().all(|&v| v > 0.0));
    }
}

#[test]
fn quadrature_matches_series_oracle() {
    for (d, gamma) in [(2usize, 4i64), (2, 5), (3, 6), (3, 7)] {
        let q = table(d, gamma, 4);
        let s = series_table::<f64>(d, gamma, 4, 4096).unwrap();
        for n in q.window().sites() {
            let gap = (q.get(&n).unwrap() - s.get(&n).unwrap()).abs();
            assert!(gap <= q.accuracy + s.accuracy, "({d},{gamma}) {n:?}: {gap:e} vs {:e} + {:e}", q.accuracy, s.accuracy);
        }
    }
}

#[test]
fn oracle_examples() {
    let a = walk_series_oracle(2, 4, &[1, 0], 4096).unwrap();
    assert!((a.value + 0.25).abs() <= a.error.max(1e-12));
    assert_eq!(walk_series_oracle(2, 4, &[0, 0], 4096).unwrap().value, 0.0);
    let b = walk_series_oracle(3, 6, &[0, 0, 0], 4096).unwrap();
    assert!((b.value - 0.252731).abs() <= 1e-5 + b.error);
    assert!(walk_series_oracle(2, 4, &[0, 0], 1).is_err());
}

#[test]
fn three_dimensional_origin_value() {
    let t = table(3, 6, 8);
    assert!((t.get(&[0, 0, 0]).unwrap() - 0.252731).abs() <= 1e-5);
}

#[test]
fn stencil_residual_detects_perturbation() {
    let mut t = table(2, 4, 16);
    assert!(fundamental_residual(&t) <= 1e-6);
    let i = t.window().index_of(&[3, 2]).unwrap();
    t.values[i] += 1e-3;
    assert!(fundamental_residual(&t) >= 9e-4);
}

#[test]
fn other_treatments_agree() {
    let reference = table(2, 4, 3);
    for treatment in [SingularityTreatment::Subtraction, SingularityTreatment::None] {
        let spec = QuadratureSpec::default_for(2, 4).with_treatment(treatment).with_target(1e-4);
        let t = match compute_green::<f64>(2, 4, 3, &spec) {
            Ok(t) => t,
            Err(sandpile_harmonic::green::GreenError::Unconverged { table, .. }) => *table,
            Err(e) => panic!("{e}"),
        };
        for (a, b) in t.values.iter().zip(&reference.values) {
            assert!((a - b).abs() <= t.accuracy + reference.accuracy + 1e-12);
        }
    }
}

#[test]
fn dissipative_mass() {
    // summing f w = delta over Z^2 gives (gamma - 4) sum w = 1
    for (gamma, r) in [(5i64, 24usize), (6, 16)] {
        let t = table(2, gamma, r);
        let sum: f64 = t.values.iter().sum();
        let edge = t
            .window()
            .sites()
            .zip(&t.values)
            .filter(|(n, _)| max_norm(n) == r as i64)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max);
        // geometric decay: the tail is a small multiple of the edge shell
        let target = 1.0 / (gamma - 4) as f64;
        assert!((sum - target).abs() <= 1e3 * edge + t.accuracy * t.values.len() as f64, "{sum} vs {target}");
    }
}

#[test]
fn f32_tables_follow_f64() {
    let a: GreenTable<f32> = compute_green(2, 5, 4, &QuadratureSpec::default_for(2, 5).with_target(1e-3)).unwrap();
    let b = table(2, 5, 4);
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((*x as f64 - y).abs() <= a.accuracy as f64 + b.accuracy + 1e-6);
    }
}

#[test]
fn multiplier_examples() {
    let t = table(2, 4, 16);
    let f = standard_polys(2, 4).unwrap().f;
    let delta = multiplier_table(&f, &t).unwrap();
    for (n, v) in delta.window().sites().zip(&delta.values) {
        let target = if n.iter().all(|&x| x == 0) { 1.0 } else { 0.0 };
        assert!((v - target).abs() <= delta.accuracy);
    }

    let cube = parse_expression("(1-u1)^3", 2).unwrap();
    let m = multiplier_table(&cube, &t).unwrap();
    let prof = decay_profile(&m.values, &m.window(), 10.0 * m.accuracy).unwrap();
    assert!(prof.exponent.unwrap() <= -3.0 + 0.3, "{:?}", prof.exponent);
    let sums = l1_partial_sums(&m.values, &m.window()).unwrap();
    let n = sums.len();
    // Cauchy: the last increments are small compared with the total
    assert!(sums[n - 1] - sums[n / 2] <= 0.05 * sums[n - 1]);

    let lin = parse_expression("1-u1", 2).unwrap();
    let mut last = 0.0;
    for r in [8usize, 16, 32] {
        let m = multiplier_table(&lin, &table(2, 4, r + 1)).unwrap();
        let total = *l1_partial_sums(&m.values, &m.window()).unwrap().last().unwrap();
        assert!(total > last + 1.0);
        last = total;
    }

    let big = parse_expression("u1^20", 2).unwrap();
    assert!(multiplier_table(&big, &t).is_err());
}

#[test]
fn decay_fit_needs_radius_and_nonzero_data() {
    let w = BoxWindow::centered(2, 8);
    let zeros = vec![0.0f64; w.len()];
    assert!(decay_profile(&zeros, &w, 0.0).is_err());
}

#[test]
fn entropy_bounds_for_large_gamma() {
    let h = entropy_quadrature::<f64>(2, 100, &QuadratureSpec::default_for(2, 100)).unwrap().value;
    assert!((96f64.ln()..=104f64.ln()).contains(&h));
    assert!((h - 100f64.ln()).abs() < 1e-3);
    assert!(entropy_quadrature::<f64>(2, 3, &QuadratureSpec::default_for(2, 3)).is_err());
}

#[test]
fn csv_roundtrip_preserves_values() {
    let t = table(3, 7, 2);
    let back = GreenTable::<f64>::from_csv(&t.to_csv()).unwrap();
    assert_eq!(back.dim, 3);
    assert_eq!(back.gamma, 7);
    for (a, b) in t.values.iter().zip(&back.values) {
        assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
    }
}
