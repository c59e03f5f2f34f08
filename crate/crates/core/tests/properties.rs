use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qprop_core::bounds::majorization_check;
use qprop_core::partitions::{dim_symmetric_irrep, enumerate_partitions, schur_eval, schur_eval_ssyt};
use qprop_core::ranktest::{beta_closed_form, beta_limit_large_eps, beta_r1, elementary_symmetric_slice};
use qprop_core::scalar::ratio;
use qprop_core::schmidt::{best_rank_r_approx, delta_r, distance_to_sr, random_state, random_unitary, schmidt_decompose};
use qprop_core::wss::{accept_prob_exact, lds_length, wss_distribution};
use qprop_core::{BigRational, BigUint, Caps, Partition, Spectrum};

fn rational_spectrum(max_d: usize) -> impl Strategy<Value = Spectrum<BigRational>> {
    prop::collection::vec(0i64..12, 1..=max_d)
        .prop_filter("some weight", |w| w.iter().any(|&x| x > 0))
        .prop_map(|w| {
            let total: i64 = w.iter().sum();
            Spectrum::new(w.iter().map(|&x| ratio(x, total)).collect()).unwrap()
        })
}

fn float_spectrum(max_d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 2..=max_d).prop_map(|w| {
        let s: f64 = w.iter().sum();
        let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
        p.sort_by(|a, b| b.partial_cmp(a).unwrap());
        p
    })
}

fn partition(max_n: usize) -> impl Strategy<Value = Partition> {
    (1..=max_n, any::<prop::sample::Index>()).prop_map(|(n, idx)| {
        let all = enumerate_partitions(n, n).unwrap();
        all[idx.index(all.len())].clone()
    })
}

/// Standard Young tableaux, counted by removing the cell holding the largest entry.
fn count_syt(parts: &[usize]) -> BigUint {
    if parts.iter().sum::<usize>() == 0 {
        return BigUint::from(1u32);
    }
    let mut total = BigUint::from(0u32);
    for i in 0..parts.len() {
        let corner = parts[i] > 0 && (i + 1 == parts.len() || parts[i + 1] < parts[i]);
        if corner {
            let mut smaller = parts.to_vec();
            smaller[i] -= 1;
            total += count_syt(&smaller);
        }
    }
    total
}

fn lds_quadratic(word: &[usize]) -> usize {
    let mut best = vec![1; word.len()];
    for i in 0..word.len() {
        for j in 0..i {
            if word[j] > word[i] {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn schur_jacobi_trudi_matches_tableaux(lambda in partition(8), alpha in rational_spectrum(4)) {
        let jt = schur_eval(&lambda, &alpha);
        let ssyt = schur_eval_ssyt(&lambda, &alpha, 2_000_000).unwrap();
        prop_assert_eq!(jt, ssyt);
    }

    #[test]
    fn schur_is_symmetric(lambda in partition(7), w in prop::collection::vec(1i64..9, 2..=4), seed in any::<u64>()) {
        let total: i64 = w.iter().sum();
        let mut shuffled = w.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = Spectrum::new(w.iter().map(|&x| ratio(x, total)).collect()).unwrap();
        let b = Spectrum::new(shuffled.iter().map(|&x| ratio(x, total)).collect()).unwrap();
        prop_assert_eq!(schur_eval(&lambda, &a), schur_eval(&lambda, &b));
    }

    #[test]
    fn dimension_counts_standard_tableaux(lambda in partition(8)) {
        prop_assert_eq!(dim_symmetric_irrep(&lambda), count_syt(lambda.parts()));
    }

    #[test]
    fn wss_is_normalised_and_consistent(alpha in rational_spectrum(4), n in 1usize..=12, r in 1usize..=4) {
        let caps = Caps::default();
        let dist = wss_distribution(&alpha, n, &caps).unwrap();
        prop_assert_eq!(dist.total(), ratio(1, 1));
        prop_assert_eq!(accept_prob_exact(&alpha, n, r, &caps).unwrap(), dist.mass_with_rows_at_most(r));
    }

    #[test]
    fn acceptance_is_monotone(alpha in rational_spectrum(4), n in 1usize..=9, r in 1usize..=3) {
        let caps = Caps::default();
        let a = accept_prob_exact(&alpha, n, r, &caps).unwrap();
        prop_assert!(a <= accept_prob_exact(&alpha, n, r + 1, &caps).unwrap());
        prop_assert!(accept_prob_exact(&alpha, n + 1, r, &caps).unwrap() <= a);
    }

    #[test]
    fn patience_sorting_matches_quadratic(d in 1usize..=10, word in prop::collection::vec(1usize..=10, 0..200)) {
        let word: Vec<usize> = word.into_iter().map(|x| 1 + (x - 1) % d).collect();
        prop_assert_eq!(lds_length(&word, d).unwrap(), lds_quadratic(&word));
    }

    #[test]
    fn beta_is_monotone(r in 1usize..=3, d in 5usize..=30, i in 1usize..=40) {
        prop_assume!(r < d);
        let max_eps = 1.0 - r as f64 / d as f64;
        let e1 = max_eps * i as f64 / 41.0;
        let e2 = max_eps * (i + 1) as f64 / 41.0;
        let b1 = beta_closed_form(e1, r, d).unwrap().beta;
        prop_assert!(beta_closed_form(e2, r, d).unwrap().beta <= b1 + 1e-12);
        // ε ≤ 1 - r/d also holds at d + 1.
        prop_assert!(beta_closed_form(e1, r, d + 1).unwrap().beta >= b1 - 1e-12);
        prop_assert!(b1 >= beta_limit_large_eps(r) - 1e-12);
        if r == 1 {
            prop_assert!((beta_r1(e1, d).unwrap() - b1).abs() <= 1e-12);
        }
    }

    #[test]
    fn witness_realises_beta(r in 1usize..=3, d in 4usize..=12, frac in 0.02f64..=1.0) {
        prop_assume!(r < d);
        let eps = frac * (1.0 - r as f64 / d as f64);
        let res = beta_closed_form(eps, r, d).unwrap();
        let tail: f64 = res.witness.probs().iter().skip(r).sum();
        prop_assert!(tail >= eps - 1e-9);
        let accept = accept_prob_exact(&res.witness, r + 1, r, &Caps::default()).unwrap();
        prop_assert!((accept - res.beta).abs() <= 1e-9, "{} vs {}", accept, res.beta);
    }

    #[test]
    fn elementary_symmetric_is_schur_concave(p in float_spectrum(8), k in 2usize..=5, i in 0usize..8, j in 0usize..8, s in 0.0f64..=1.0) {
        let d = p.len();
        let (i, j) = (i % d, j % d);
        prop_assume!(i < j);
        let t = s * (p[i] - p[j]) / 2.0;
        let mut q = p.clone();
        q[i] -= t;
        q[j] += t;
        let sp = Spectrum::new(p.clone()).unwrap();
        let sq = Spectrum::new(q.clone()).unwrap();
        prop_assert!(majorization_check(&sp, &sq));
        prop_assert!(elementary_symmetric_slice(k, &p) <= elementary_symmetric_slice(k, &q) + 1e-15);
    }

    #[test]
    fn majorization_orders_rank2_acceptance(w in prop::collection::vec(1i64..9, 3), shift in 0i64..4, n in 1usize..=10) {
        // p ≻ q by moving mass from the largest to the smallest letter.
        let mut w = w;
        w.sort_unstable_by(|a, b| b.cmp(a));
        let total: i64 = w.iter().sum();
        let t = shift.min((w[0] - w[2]) / 2);
        let p = Spectrum::new(w.iter().map(|&x| ratio(x, total)).collect()).unwrap();
        let q = Spectrum::new(vec![ratio(w[0] - t, total), ratio(w[1], total), ratio(w[2] + t, total)]).unwrap();
        prop_assert!(majorization_check(&p, &q));
        let caps = Caps::default();
        prop_assert!(accept_prob_exact(&p, n, 2, &caps).unwrap() >= accept_prob_exact(&q, n, 2, &caps).unwrap());
    }

    #[test]
    fn schmidt_consistency(da in 2usize..=4, db in 2usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = random_state(da, db, &mut rng);
        let coeffs = schmidt_decompose(&state).unwrap().coefficients;
        let mut previous = f64::INFINITY;
        for r in 1..=da.min(db) {
            let best = best_rank_r_approx(&state, r).unwrap();
            let overlap_sq = best.inner(&state).unwrap().norm_sqr();
            let delta = delta_r(&state, r).unwrap();
            let dist = distance_to_sr(&state, r).unwrap();
            prop_assert!((overlap_sq - (1.0 - delta)).abs() < 1e-10);
            prop_assert!((overlap_sq - (1.0 - dist * dist)).abs() < 1e-10);
            prop_assert!(delta <= previous + 1e-15);
            previous = delta;
        }
        for _ in 0..10 {
            let u = random_unitary(da, &mut rng);
            let v = random_unitary(db, &mut rng);
            let moved = schmidt_decompose(&state.apply_local(&u, &v).unwrap()).unwrap().coefficients;
            for (a, b) in coeffs.iter().zip(&moved) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
