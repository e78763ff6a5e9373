use gowers_core::constructions::{behrend_set, block_random_counterexample, quad_bohr_set};
use gowers_core::inverse::{converse_u2_check, integrate_derivative, inverse_u2, reconstruct_polynomial, FpPoly};
use gowers_core::nilseq::{
    heisenberg_lower_central, heisenberg_reduce, is_polynomial_map, Group, Heisenberg, PolyCheckConfig, PolySequence,
};
use gowers_core::progressions::{count_nontrivial_aps_interval, find_three_ap, lambda3_via_fourier, lambda_k};
use gowers_core::ring::{dft, dft_naive, inner_product, inverse_dft, Indicator};
use gowers_core::roth::{rescale, run_increment_loop, IncrementConfig, Progression};
use gowers_core::uniformity::{gowers_norm_naive, gowers_norm_recursive, mult_derivative};
use gowers_core::{Complex64, CyclicFunction};
use proptest::prelude::*;

fn unit_function(max_m: usize) -> impl Strategy<Value = CyclicFunction> {
    (1..=max_m).prop_flat_map(|m| {
        prop::collection::vec((0.0..=1.0f64, 0.0..1.0f64), m).prop_map(|v| {
            CyclicFunction::new(v.into_iter().map(|(r, t)| Complex64::from_polar(r, std::f64::consts::TAU * t)).collect())
                .unwrap()
        })
    })
}

fn unit_pair(max_m: usize) -> impl Strategy<Value = (CyclicFunction, CyclicFunction)> {
    (1..=max_m).prop_flat_map(|m| {
        let one = prop::collection::vec((0.0..=1.0f64, 0.0..1.0f64), m).prop_map(|v| {
            CyclicFunction::new(v.into_iter().map(|(r, t)| Complex64::from_polar(r, std::f64::consts::TAU * t)).collect())
                .unwrap()
        });
        (one.clone(), one)
    })
}

fn odd_triple(max_m: usize) -> impl Strategy<Value = [CyclicFunction; 3]> {
    (0..max_m / 2).prop_flat_map(|h| {
        let m = 2 * h + 1;
        let one = prop::collection::vec((0.0..=1.0f64, 0.0..1.0f64), m).prop_map(|v| {
            CyclicFunction::new(v.into_iter().map(|(r, t)| Complex64::from_polar(r, std::f64::consts::TAU * t)).collect())
                .unwrap()
        });
        [one.clone(), one.clone(), one]
    })
}

fn sup_dist(a: &CyclicFunction, b: &CyclicFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fourier_round_trip(f in unit_function(4096)) {
        let back = inverse_dft(&dft(&f));
        prop_assert!(sup_dist(&back, &f) <= 1e-9 * f.linf().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn fft_matches_naive(f in unit_function(2048)) {
        let fast = dft(&f);
        let slow = dft_naive(&f);
        let err = fast.coeffs().iter().zip(slow.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10, "err = {err}");
    }

    #[test]
    fn parseval((g, h) in unit_pair(2048)) {
        let direct = inner_product(&g, &h).unwrap();
        let spectral: Complex64 = dft(&g).coeffs().iter().zip(dft(&h).coeffs()).map(|(a, b)| a * b.conj()).sum();
        prop_assert!((direct - spectral).norm() <= 1e-9);
    }

    #[test]
    fn lambda3_paths_agree(fs in odd_triple(301)) {
        let direct = lambda_k(&fs).unwrap();
        let fourier = lambda3_via_fourier(&fs[0], &fs[1], &fs[2]).unwrap();
        prop_assert!((direct - fourier).norm() <= 1e-9);
    }

    #[test]
    fn lambda3_bounded_by_u2(fs in odd_triple(201)) {
        let lambda = lambda3_via_fourier(&fs[0], &fs[1], &fs[2]).unwrap().norm();
        let u2 = gowers_norm_recursive(&fs[2], 2).unwrap().value;
        prop_assert!(lambda <= u2 + 1e-9);
    }

    #[test]
    fn l4_inequality(f in unit_function(1024)) {
        let u2 = gowers_norm_recursive(&f, 2).unwrap().value;
        let max = dft(&f).coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(u2.powi(4) <= max * max + 1e-12);
    }

    #[test]
    fn inverse_u2_sound(f in unit_function(1024), delta in 0.01..=1.0f64) {
        let found = inverse_u2(&f, delta).unwrap();
        let max = dft(&f).coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert_eq!(found.correlation, max);
        if found.u2 >= delta {
            prop_assert!(found.correlation >= delta * delta - 1e-9);
        }
        let conv = converse_u2_check(&f, found.frequency as i64).unwrap();
        prop_assert!(conv.correlation <= conv.u2 + 1e-9);
    }

    #[test]
    fn norm_axioms((f, g) in unit_pair(40), c in -3.0..3.0f64, s in 2usize..=3) {
        let nf = gowers_norm_naive(&f, s).unwrap().value;
        let ng = gowers_norm_naive(&g, s).unwrap().value;
        let scaled = gowers_norm_naive(&f.scale(Complex64::new(c, 0.0)), s).unwrap().value;
        prop_assert!((scaled - c.abs() * nf).abs() <= 1e-9);
        let sum = gowers_norm_naive(&(&f + &g), s).unwrap().value;
        prop_assert!(sum <= nf + ng + 1e-9);
    }

    #[test]
    fn monotone_in_s(f in unit_function(24)) {
        let vals: Vec<f64> = (1..=4).map(|s| gowers_norm_naive(&f, s).unwrap().value).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-9), "{vals:?}");
    }

    #[test]
    fn recursion_identity(f in unit_function(32), s in 2usize..=3) {
        let m = f.modulus();
        let whole = gowers_norm_naive(&f, s).unwrap().value.powi(1 << s);
        let avg = (0..m)
            .map(|h| gowers_norm_naive(&mult_derivative(&f, h as i64), s - 1).unwrap().value.powi(1 << (s - 1)))
            .sum::<f64>() / m as f64;
        prop_assert!((whole - avg).abs() <= 1e-9);
    }

    #[test]
    fn heisenberg_group_law(v in prop::collection::vec(-100.0..100.0f64, 9)) {
        let g: Vec<Heisenberg<f64>> = v.chunks(3).map(|c| Heisenberg::new(c[0], c[1], c[2])).collect();
        let lhs = g[0].op(&g[1]).op(&g[2]);
        let rhs = g[0].op(&g[1].op(&g[2]));
        prop_assert!((lhs.z - rhs.z).abs() <= 1e-12 * lhs.z.abs().max(1.0) * 1e3);
        let id = g[0].op(&g[0].inverse());
        prop_assert!(id.x.abs() <= 1e-12 && id.y.abs() <= 1e-12 && id.z.abs() <= 1e-9);
        let red = heisenberg_reduce(&g[0]);
        let back = red.rep.op(&red.gamma);
        prop_assert!((back.z - g[0].z).abs() <= 1e-9 && red.gamma.is_integral(1e-9));
    }

    #[test]
    fn taylor_sequences_are_polynomial_maps(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, z in -2.0..2.0f64) {
        let filt = heisenberg_lower_central::<f64>(1e-8);
        let p = PolySequence::new(
            vec![Heisenberg::new(a, b, z), Heisenberg::new(b, a, c), Heisenberg::new(0.0, 0.0, c)],
            &filt,
        ).unwrap();
        let check = is_polynomial_map(&|n| p.eval(n), &filt, 2, PolyCheckConfig::default());
        prop_assert!(check.is_polynomial);
    }

    #[test]
    fn commutators_are_central(v in prop::collection::vec(-5.0..5.0f64, 6)) {
        let g = Heisenberg::new(v[0], v[1], v[2]);
        let h = Heisenberg::new(v[3], v[4], v[5]);
        let c = g.commutator(&h);
        prop_assert!(c.x.abs() <= 1e-12 && c.y.abs() <= 1e-12);
        let centre = Heisenberg::new(0.0, 0.0, c.z);
        let d = g.commutator(&centre);
        prop_assert!(d.x.abs() <= 1e-12 && d.y.abs() <= 1e-12 && d.z.abs() <= 1e-9);
    }

    #[test]
    fn integration_inverts_difference(p in prop::sample::select(vec![7u64, 11, 13, 17, 31]), coeffs in prop::collection::vec(0u64..1000, 0..4), phi0 in 0u64..1000) {
        let p1 = FpPoly::new(p, &coeffs).unwrap();
        let q = integrate_derivative(&p1, phi0).unwrap();
        prop_assert_eq!(q.eval(0), phi0 % p);
        for m in 0..p {
            prop_assert_eq!((q.eval((m + 1) % p) + p - q.eval(m)) % p, p1.eval(m));
        }
    }

    #[test]
    fn toy_round_trip(p in prop::sample::select(vec![7u64, 11, 13, 17, 19, 23, 29, 31]), coeffs in prop::collection::vec(0u64..31, 1..=5)) {
        let poly = FpPoly::new(p, &coeffs).unwrap();
        let s = coeffs.len() - 1;
        let r = reconstruct_polynomial(&poly.table(), s).unwrap();
        prop_assert_eq!(r.poly, poly);
    }
}

#[test]
fn orthogonality_exhaustive() {
    for m in 1..=512usize {
        for xi in 1..m {
            let chi = gowers_core::ring::character(m, xi).unwrap();
            assert!(chi.mean().norm() <= 1e-12, "M = {m}, xi = {xi}");
        }
    }
}

#[test]
fn telescoping_over_z15() {
    let m = 15;
    for mask in 0u32..(1 << m) {
        let a = Indicator::new(m, (0..m).filter(|i| mask >> i & 1 == 1)).unwrap();
        let one = a.to_function();
        let alpha = a.density();
        let lhs = (lambda3_via_fourier(&one, &one, &one).unwrap() - alpha.powi(3)).norm();
        let rhs = lambda3_via_fourier(&one, &one, &a.balanced()).unwrap().norm();
        assert!(lhs <= rhs + 1e-12, "mask {mask:b}: {lhs} > {rhs}");
    }
}

#[test]
fn progression_free_sets_count_only_trivial() {
    for n in [50u64, 200, 1000] {
        let b = behrend_set(n).unwrap();
        // any odd modulus above 2N keeps 3-APs from wrapping
        let m = 2 * n as usize + 1;
        let a = Indicator::new(m, b.elements.iter().map(|&x| x as usize)).unwrap();
        let f = a.to_function();
        let lambda = lambda_k(&[f.clone(), f.clone(), f]).unwrap();
        let want = a.density() / m as f64;
        assert!((lambda.re - want).abs() <= 1e-12 * m as f64 * want, "N = {n}");
        assert_eq!(count_nontrivial_aps_interval(&b.elements, n, 3), 0);
    }
}

#[test]
fn lambda_deviation_controlled_by_gowers() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for m in [31usize, 65, 101, 201] {
        for _ in 0..5 {
            let a = Indicator::new(m, (0..m).filter(|_| rng.random_bool(0.4))).unwrap();
            let one = a.to_function();
            let alpha = a.density();
            for k in [3usize, 4] {
                let lambda = lambda_k(&vec![one.clone(); k]).unwrap();
                let u = gowers_norm_recursive(&a.balanced(), k - 1).unwrap().value;
                assert!((lambda - alpha.powi(k as i32)).norm() <= (k - 2) as f64 * u + 1e-9);
            }
        }
    }
}

#[test]
fn seeded_constructions_reproduce() {
    let a = block_random_counterexample(16, 99).unwrap();
    let b = block_random_counterexample(16, 99).unwrap();
    assert_eq!(a.phases, b.phases);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(quad_bohr_set(2001, 10).unwrap(), quad_bohr_set(2001, 10).unwrap());
}

fn brute_nontrivial_3aps(a: &[u64]) -> usize {
    let mut count = 0;
    for &x in a {
        for &y in a {
            for &z in a {
                if x < y && y < z && y - x == z - y {
                    count += 1;
                }
            }
        }
    }
    count
}

#[test]
fn rescale_preserves_progressions() {
    for n in 1..=40u64 {
        for q in 1..=4u64 {
            for a in 1 - q as i64..=3 {
                let max_len = (n as i64 - a) / q as i64;
                for len in (1..=max_len.max(0) as u64).step_by(3) {
                    let p = Progression::new(a, q, len).unwrap();
                    let set: Vec<u64> = (1..=n).filter(|x| (x * 7 + n) % 5 < 3).collect();
                    let pulled = rescale(&set, n, &p).unwrap();
                    let inside: Vec<u64> =
                        p.elements().map(|x| x as u64).filter(|x| set.contains(x)).collect();
                    assert_eq!(brute_nontrivial_3aps(&pulled), brute_nontrivial_3aps(&inside));
                }
            }
        }
    }
}

#[test]
fn increment_trace_invariants() {
    let b = behrend_set(3000).unwrap();
    let cfg = IncrementConfig::default();
    let t = run_increment_loop(&b.elements, 3000, &cfg).unwrap();
    assert!(!t.steps.is_empty());
    assert!(t.is_monotone());
    assert!(t.steps.len() as u64 <= t.step_budget);
    let mut cur = b.elements.clone();
    let mut cur_n = 3000u64;
    for step in &t.steps {
        assert_eq!(step.size, cur.len() as u64);
        assert_eq!(step.n, cur_n);
        assert!(step.phase_variation <= cfg.phase_budget + 1e-12);
        let p = step.progression;
        assert!(p.length as f64 >= cfg.c_len * step.alpha.powi(2) * (cur_n as f64).sqrt() - 1.0);
        let next = rescale(&cur, cur_n, &p).unwrap();
        assert!(next.len() as f64 / p.length as f64 >= step.alpha + cfg.increment_constant * step.alpha.powi(2) - 1e-12);
        if cur_n <= 2000 {
            let inside: Vec<u64> = p.elements().map(|x| x as u64).filter(|x| cur.contains(x)).collect();
            assert_eq!(find_three_ap(&next).is_some(), find_three_ap(&inside).is_some());
        }
        cur = next;
        cur_n = p.length;
    }
    assert_eq!(t.final_size, cur.len() as u64);
}
