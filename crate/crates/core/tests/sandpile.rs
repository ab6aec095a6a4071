use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sandpile_harmonic::sandpile::{
    burning_test, correct_to_recurrent, count_recurrent, group_add, group_add_with_odometer,
    has_forbidden_subconfiguration, identity_element, is_recurrent, neighbour_count, odometer_csv, parse_grid,
    random_recurrent, sparse_zero_witness, stabilize, stabilize_random_order, topple_at, verify_correction,
    witness_conditions, CountBackend, HeightConfig,
};
use sandpile_harmonic::window::{max_norm, BoxWindow};

/// Topples the first unstable site in scanline order, one grain-batch at a
/// time, until stable. Returns the stable heights and per-site counts.
fn naive_stabilize(v: &HeightConfig) -> (Vec<i64>, Vec<u64>) {
    let w = v.window();
    let gamma = v.gamma();
    let mut h = v.heights().to_vec();
    let mut counts = vec![0u64; h.len()];
    while let Some(i) = h.iter().position(|&x| x >= gamma) {
        h[i] -= gamma;
        counts[i] += 1;
        let n = w.site(i);
        for axis in 0..w.dim() {
            for s in [-1, 1] {
                let mut m = n.clone();
                m[axis] += s;
                if let Some(j) = w.index_of(&m) {
                    h[j] += 1;
                }
            }
        }
    }
    (h, counts)
}

fn random_config(rng: &mut ChaCha8Rng, w: &BoxWindow, gamma: i64, hi: i64) -> HeightConfig {
    HeightConfig::new(w.clone(), gamma, (0..w.len()).map(|_| rng.gen_range(0..hi)).collect()).unwrap()
}

#[test]
fn neighbour_count_examples() {
    let w = BoxWindow::centered(2, 1);
    assert_eq!(neighbour_count(&w, &[0, 0]).unwrap(), 4);
    assert_eq!(neighbour_count(&w, &[1, 1]).unwrap(), 2);
    assert_eq!(neighbour_count(&BoxWindow::centered(2, 0), &[0, 0]).unwrap(), 0);
    assert!(neighbour_count(&w, &[2, 0]).is_err());
}

#[test]
fn toppling_examples() {
    let w = BoxWindow::centered(2, 1);
    let v = HeightConfig::delta(w.clone(), 4, &[0, 0]).unwrap();
    let v = HeightConfig::new(w.clone(), 4, v.heights().iter().map(|x| 4 * x).collect()).unwrap();
    let t = topple_at(&v, &[0, 0]).unwrap();
    for n in w.sites() {
        let expected = if max_norm(&n) == 1 && n.contains(&0) { 1 } else { 0 };
        assert_eq!(t.get(&n), Some(expected));
    }
    let (s, odo) = stabilize(&v);
    assert_eq!(s, t);
    assert_eq!(odo.get(&[0, 0]), Some(1));
    assert_eq!(odo.total_topplings(), 1);
    assert_eq!(odo.total_mass_lost, 0);
    assert!(topple_at(&t, &[0, 0]).is_err());

    let w2 = BoxWindow::with_extents(vec![2, 2]).unwrap();
    let mut c = HeightConfig::zeros(w2.clone(), 4).unwrap();
    let corner = w2.site(0);
    c.set(&corner, 4).unwrap();
    let t = topple_at(&c, &corner).unwrap();
    assert_eq!(t.total(), 2);
}

#[test]
fn eight_grains_at_center() {
    let w = BoxWindow::centered(2, 2);
    let mut v = HeightConfig::zeros(w.clone(), 4).unwrap();
    v.set(&[0, 0], 8).unwrap();
    let (s, odo) = stabilize(&v);
    let (h, counts) = naive_stabilize(&v);
    assert_eq!(s.heights(), &h[..]);
    assert_eq!(odo.counts, counts);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (s2, odo2) = stabilize_random_order(&v, &mut rng);
    assert_eq!((s2, odo2.counts), (s, odo.counts));
}

#[test]
fn stable_input_is_fixed() {
    let v = HeightConfig::max_stable(BoxWindow::centered(2, 3), 4).unwrap();
    let (s, odo) = stabilize(&v);
    assert_eq!(s, v);
    assert!(odo.is_zero());
}

#[test]
fn abelian_property_against_naive_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let w = BoxWindow::with_extents(vec![8, 8]).unwrap();
    for _ in 0..100 {
        let v = random_config(&mut rng, &w, 4, 10);
        let (s, odo) = stabilize(&v);
        let (h, counts) = naive_stabilize(&v);
        assert_eq!(s.heights(), &h[..]);
        assert_eq!(odo.counts, counts);
        let (s2, odo2) = stabilize_random_order(&v, &mut rng);
        assert_eq!(s2, s);
        assert_eq!(odo2, odo);
        // final = input - Laplacian(counts) with open boundary
        for (i, n) in w.sites().enumerate() {
            let mut x = v.heights()[i] - 4 * counts[i] as i64;
            for axis in 0..2 {
                for st in [-1, 1] {
                    let mut m = n.clone();
                    m[axis] += st;
                    if let Some(j) = w.index_of(&m) {
                        x += counts[j] as i64;
                    }
                }
            }
            assert_eq!(x, s.heights()[i]);
        }
        assert_eq!(v.total(), s.total() + odo.total_mass_lost);
    }
}

#[test]
fn dissipative_termination() {
    let w = BoxWindow::with_extents(vec![32, 32]).unwrap();
    let v = HeightConfig::constant(w.clone(), 5, 10).unwrap();
    let (s, odo) = stabilize(&v);
    assert!(s.is_stable());
    // every toppling loses at least one grain
    assert!(odo.total_topplings() as i64 <= v.total());
    assert_eq!(v.total(), s.total() + odo.total_mass_lost);
}

#[test]
fn burning_examples() {
    let pair = BoxWindow::with_extents(vec![1, 2]).unwrap();
    let r = burning_test(&HeightConfig::new(pair.clone(), 4, vec![0, 0]).unwrap()).unwrap();
    assert!(!r.recurrent);
    assert_eq!(r.stuck_set.len(), 2);
    let r = burning_test(&HeightConfig::new(pair.clone(), 4, vec![1, 0]).unwrap()).unwrap();
    assert!(r.recurrent && r.stuck_set.is_empty());
    assert_eq!(r.burn_order.iter().map(|(round, _)| *round).collect::<Vec<_>>(), vec![1, 2]);
    for gamma in [4, 5, 7] {
        assert!(is_recurrent(&HeightConfig::max_stable(BoxWindow::centered(2, 4), gamma).unwrap()).unwrap());
    }
    assert!(burning_test(&HeightConfig::new(pair, 4, vec![4, 0]).unwrap()).is_err());
}

#[test]
fn burning_matches_definition_on_3x3() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let w = BoxWindow::with_extents(vec![3, 3]).unwrap();
    for _ in 0..100_000 {
        let v = random_config(&mut rng, &w, 4, 4);
        assert_eq!(is_recurrent(&v).unwrap(), has_forbidden_subconfiguration(&v).unwrap().is_none(), "{v}");
    }
}

#[test]
fn forbidden_subconfiguration_is_genuine() {
    let w = BoxWindow::with_extents(vec![2, 2]).unwrap();
    let v = HeightConfig::new(w.clone(), 4, vec![0, 0, 3, 3]).unwrap();
    let f = has_forbidden_subconfiguration(&v).unwrap().expect("not recurrent");
    for n in &f {
        let nf = f.iter().filter(|m| m.iter().zip(n.iter()).map(|(a, b)| (a - b).abs()).sum::<i64>() == 1).count();
        assert!(v.get(n).unwrap() < nf as i64);
    }
}

#[test]
fn count_backends_agree() {
    for (ext, gamma) in [
        (vec![1usize, 1], 4i64),
        (vec![1, 3], 4),
        (vec![2, 3], 4),
        (vec![3, 3], 4),
        (vec![2, 5], 4),
        (vec![2, 3], 5),
        (vec![3, 3], 5),
        (vec![2, 2, 2], 6),
        (vec![1, 2, 3], 7),
    ] {
        let w = BoxWindow::with_extents(ext.clone()).unwrap();
        let a = count_recurrent(&w, gamma, CountBackend::Bruteforce).unwrap();
        let b = count_recurrent(&w, gamma, CountBackend::Determinant).unwrap();
        assert_eq!(a.exact, b.exact, "{ext:?} gamma={gamma}");
        assert!((a.log_count - b.log_count).abs() < 1e-9);
    }
    assert_eq!(
        count_recurrent(&BoxWindow::centered(2, 0), 4, CountBackend::Bruteforce).unwrap().exact,
        Some(BigInt::from(4))
    );
    assert!(count_recurrent(&BoxWindow::centered(2, 3), 4, CountBackend::Bruteforce).is_err());
}

#[test]
fn recurrent_configs_satisfy_positivity_condition() {
    // v recurrent, h a nonzero 0/1 polynomial on Q_2: some n in supp h has
    // (f h)_n + v_n >= gamma
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let q = BoxWindow::centered(2, 2);
    for gamma in [4i64, 5] {
        for _ in 0..200 {
            let v = random_recurrent(&q, gamma, &mut rng).unwrap();
            let supp: Vec<Vec<i64>> = loop {
                let s: Vec<Vec<i64>> = q.sites().filter(|_| rng.gen_bool(0.4)).collect();
                if !s.is_empty() {
                    break s;
                }
            };
            let ok = supp.iter().any(|n| {
                let nb = supp.iter().filter(|m| m.iter().zip(n).map(|(a, b)| (a - b).abs()).sum::<i64>() == 1).count();
                gamma - nb as i64 + v.get(n).unwrap() >= gamma
            });
            assert!(ok);
        }
    }
}

#[test]
fn two_site_group() {
    let pair = BoxWindow::with_extents(vec![1, 2]).unwrap();
    let elems: Vec<HeightConfig> = (0..16)
        .map(|c| HeightConfig::new(pair.clone(), 4, vec![c / 4, c % 4]).unwrap())
        .filter(|v| is_recurrent(v).unwrap())
        .collect();
    assert_eq!(elems.len(), 15);
    let neutral: Vec<&HeightConfig> =
        elems.iter().filter(|e| elems.iter().all(|v| group_add(v, e).unwrap() == *v)).collect();
    assert_eq!(neutral.len(), 1);
    assert_eq!(identity_element(&pair, 4).unwrap(), *neutral[0]);
    for v in &elems {
        for w in &elems {
            let s = group_add(v, w).unwrap();
            assert_eq!(s, group_add(w, v).unwrap());
            assert!(is_recurrent(&s).unwrap());
        }
    }
    let max = HeightConfig::max_stable(pair.clone(), 4).unwrap();
    let (s, odo) = group_add_with_odometer(&max, &max).unwrap();
    assert_eq!(s, max);
    assert_eq!(odo.counts, vec![1, 1]);
    let zero = HeightConfig::zeros(pair, 4).unwrap();
    assert!(group_add(&zero, &max).is_err());
}

#[test]
fn identity_on_larger_window() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let w = BoxWindow::with_extents(vec![5, 4]).unwrap();
    let e = identity_element(&w, 4).unwrap();
    for _ in 0..10 {
        let v = random_recurrent(&w, 4, &mut rng).unwrap();
        assert_eq!(group_add(&v, &e).unwrap(), v);
    }
}

#[test]
fn correction_examples() {
    for d in [2usize, 3] {
        let gamma = 2 * d as i64;
        let v = HeightConfig::max_stable(BoxWindow::centered(d, 3), gamma).unwrap();
        assert!(correct_to_recurrent(&v, 1).unwrap().h.is_zero());
    }
    let v = HeightConfig::zeros(BoxWindow::centered(2, 2), 4).unwrap();
    let c = correct_to_recurrent(&v, 1).unwrap();
    let r = verify_correction(&v, 1, &c.h).unwrap();
    assert!(r.support_in_qm && r.recurrent_on_qm && r.unchanged_outside);
    assert!(!r.boundary_ok());
}

#[test]
fn correction_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    for i in 0..60 {
        let m = 1 + i % 3;
        let d = 2 + i % 2;
        let w = BoxWindow::centered(d, m + 1 + i % 2);
        let v = HeightConfig::new(w.clone(), 2 * d as i64, (0..w.len()).map(|_| rng.gen_range(-20..25)).collect())
            .unwrap();
        let c = correct_to_recurrent(&v, m).unwrap();
        let r = verify_correction(&v, m, &c.h).unwrap();
        assert!(r.all_hold(), "{r:?}");
        assert_eq!(c.corrected.restrict(&BoxWindow::centered(d, m)).map(|x| is_recurrent(&x).unwrap()), Ok(true));
    }
}

#[test]
fn grid_and_odometer_formats() {
    let v = parse_grid("2 4 3 3\n3 3 3\n3 9 3\n3 3 3\n").unwrap();
    assert_eq!(v.get(&[0, 0]), Some(9));
    let (_, odo) = stabilize(&v);
    let csv = odometer_csv(&odo);
    assert!(csv.starts_with("n1,n2,count\n"));
    assert!(csv.contains("0,0,"));
    assert!(csv.trim_end().ends_with(&format!("# total_mass_lost={}", odo.total_mass_lost)));
    assert!(parse_grid("2 4 3 3\n3 3\n").is_err());
    assert!(parse_grid("2 4 2 2\n1 x\n1 1\n").is_err());
}

#[test]
fn sparse_witness() {
    let v = sparse_zero_witness(BoxWindow::centered(2, 6), 4, 2).unwrap();
    assert!(witness_conditions(&v).unwrap().all_hold());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stabilization_matches_naive(heights in prop::collection::vec(0i64..14, 20), gamma in 4i64..7) {
        let w = BoxWindow::with_extents(vec![4, 5]).unwrap();
        let v = HeightConfig::new(w, gamma, heights).unwrap();
        let (s, odo) = stabilize(&v);
        let (h, counts) = naive_stabilize(&v);
        prop_assert_eq!(s.heights(), &h[..]);
        prop_assert_eq!(odo.counts, counts);
    }

    #[test]
    fn grid_roundtrip(heights in prop::collection::vec(-3i64..20, 24)) {
        let w = BoxWindow::new(vec![-1, 2, 0], vec![2, 3, 4]).unwrap();
        let v = HeightConfig::new(w, 6, heights).unwrap();
        prop_assert_eq!(parse_grid(&sandpile_harmonic::sandpile::write_grid(&v)).unwrap(), v);
    }
}
