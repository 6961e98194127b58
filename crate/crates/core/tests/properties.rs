mod common;

use common::*;
use hinfraud::classify::logistic::{gradient, loss, LogisticModel};
use hinfraud::collective::label_change_fraction;
use hinfraud::eval::{metrics, sliding_window_split, welch_t_test};
use hinfraud::features::{compute_all_features, feature_dense_oracle, feature_fast};
use hinfraud::metapath::MetaPaths;
use hinfraud::{split_seed, CsrMatrix64, MetaPaths64};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn triplets(max_dim: usize) -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
    (1..max_dim, 1..max_dim).prop_flat_map(|(r, c)| {
        (Just(r), Just(c), prop::collection::vec((0..r, 0..c, -5.0f64..5.0), 0..3 * (r + c)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_route_exact_for_simple_left_paths(seed in any::<u64>(), exclude in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = RandomHinSpec { max_n: 120, ..RandomHinSpec::MEDIUM };
        let hin = random_hin(&mut rng, spec);
        let meta: MetaPaths64 = MetaPaths::build(&hin);
        let y = random_labels(&mut rng, hin.n_targets());
        for pair in meta.pairs.iter().filter(|p| meta.paths[p.left].is_simple) {
            let (p1, p2) = (&meta.paths[pair.left], &meta.paths[pair.right]);
            let fast = feature_fast(p1, p2, &y, 0.25, exclude).unwrap();
            let dense = feature_dense_oracle(p1, p2, &y, 0.25, exclude, 1000).unwrap();
            prop_assert!(max_abs_diff(&fast, &dense) < 1e-9);
        }
    }

    #[test]
    fn features_are_fractions(seed in any::<u64>(), fallback in 0.0f64..=1.0, exclude in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hin = random_hin(&mut rng, RandomHinSpec::SMALL_COMPLEX);
        let meta: MetaPaths64 = MetaPaths::build(&hin);
        let soft: Vec<f64> = (0..hin.n_targets()).map(|_| rng.random::<f64>()).collect();
        let z = compute_all_features(&meta, &soft, fallback, exclude).unwrap();
        prop_assert_eq!(z.ncols(), meta.pairs.len());
        prop_assert!(z.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn all_zero_labels_give_zero_or_fallback(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hin = random_hin(&mut rng, RandomHinSpec::SMALL_COMPLEX);
        let meta: MetaPaths64 = MetaPaths::build(&hin);
        let z = compute_all_features(&meta, &vec![0.0; hin.n_targets()], 0.5, true).unwrap();
        prop_assert!(z.iter().all(|&v| v == 0.0 || v == 0.5));
    }

    #[test]
    fn transpose_round_trips((r, c, t) in triplets(12)) {
        let m = CsrMatrix64::from_triplets(r, c, &t);
        let tt = m.transpose();
        prop_assert_eq!((tt.nrows(), tt.ncols()), (c, r));
        prop_assert_eq!(&tt.transpose(), &m);
        let d = m.to_dense();
        prop_assert_eq!(tt.to_dense(), d.t().to_owned());
        prop_assert_eq!(CsrMatrix64::from_dense(&d).to_dense(), d);
    }

    #[test]
    fn matmul_matches_dense((r, c, t) in triplets(10), k in 1usize..10, seed in any::<u64>()) {
        let a = CsrMatrix64::from_triplets(r, c, &t);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bt: Vec<(usize, usize, f64)> =
            (0..2 * c).map(|_| (rng.random_range(0..c), rng.random_range(0..k), rng.random_range(-2.0..2.0))).collect();
        let b = CsrMatrix64::from_triplets(c, k, &bt);
        let got = a.matmul(&b).to_dense();
        let want = a.to_dense().dot(&b.to_dense());
        prop_assert!(got.iter().zip(want.iter()).all(|(x, y)| (x - y).abs() < 1e-9));
    }

    #[test]
    fn logistic_gradient_matches_finite_differences(seed in any::<u64>(), l2 in 0.0f64..0.1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, d) = (rng.random_range(2..30), rng.random_range(1..5));
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0));
        let y: Vec<u8> = (0..n).map(|_| rng.random_bool(0.4) as u8).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let model = LogisticModel { weights: (0..d).map(|_| rng.random_range(-1.0..1.0)).collect(), bias: rng.random_range(-1.0..1.0) };
        let (gw, gb) = gradient(&model, x.view(), &y, &w, l2);
        let h = 1e-6;
        for j in 0..=d {
            let bump = |delta: f64| {
                let mut m = model.clone();
                if j < d { m.weights[j] += delta } else { m.bias += delta }
                loss(&m, x.view(), &y, &w, l2)
            };
            let numeric = (bump(h) - bump(-h)) / (2.0 * h);
            let analytic = if j < d { gw[j] } else { gb };
            prop_assert!((numeric - analytic).abs() < 1e-5, "coord {}: {} vs {}", j, numeric, analytic);
        }
    }

    #[test]
    fn welch_is_antisymmetric_and_matches_reference(
        a in prop::collection::vec(-10.0f64..10.0, 2..40),
        b in prop::collection::vec(-10.0f64..10.0, 2..40),
    ) {
        let values: Vec<f64> = a.iter().chain(&b).copied().collect();
        let groups: Vec<u8> = a.iter().map(|_| 1).chain(b.iter().map(|_| 0)).collect();
        let flipped: Vec<u8> = groups.iter().map(|g| 1 - g).collect();
        let (Ok(r), Ok(s)) = (welch_t_test(&values, &groups), welch_t_test(&values, &flipped)) else {
            return Ok(());
        };
        prop_assert!((r.t + s.t).abs() < 1e-12);
        prop_assert!((r.df - s.df).abs() < 1e-9 && (r.p - s.p).abs() < 1e-12);
        prop_assert!(r.p > 0.0 && r.p <= 1.0);
        let dist = StudentsT::new(0.0, 1.0, r.df).unwrap();
        let reference = 2.0 * dist.cdf(-r.t.abs());
        prop_assert!((r.p - reference).abs() < 1e-9 * reference.max(1e-3), "{} vs {}", r.p, reference);
    }

    #[test]
    fn metrics_stay_in_unit_interval(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..200)) {
        let (t, p): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let m = metrics(&t, &p).unwrap();
        for v in [m.recall, m.precision, m.f_score, m.accuracy] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if m.recall > 0.0 && m.precision > 0.0 {
            prop_assert!(m.f_score <= m.recall.max(m.precision) + 1e-12);
            prop_assert!(m.f_score >= m.recall.min(m.precision) - 1e-12);
        }
    }

    #[test]
    fn change_fraction_is_a_symmetric_fraction(pairs in prop::collection::vec((0u8..2, 0u8..2), 0..100)) {
        let (a, b): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let f = label_change_fraction(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert_eq!(f, label_change_fraction(&b, &a).unwrap());
        prop_assert_eq!(label_change_fraction(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn windows_train_strictly_on_the_past(ts in prop::collection::vec(0i64..10_000, 20..200), w in 1usize..6) {
        let Ok(windows) = sliding_window_split(&ts, w) else { return Ok(()); };
        prop_assert_eq!(windows.len(), w);
        for win in &windows {
            let latest_train = (0..ts.len()).filter(|&i| win.train[i]).map(|i| ts[i]).max().unwrap();
            let earliest_test = (0..ts.len()).filter(|&i| win.test[i]).map(|i| ts[i]).min().unwrap();
            prop_assert!(latest_train < earliest_test);
            prop_assert!((0..ts.len()).all(|i| !(win.train[i] && win.test[i])));
        }
    }

    #[test]
    fn split_streams_differ(root in any::<u64>(), a in 0u64..64, b in 0u64..64) {
        prop_assume!(a != b);
        prop_assert_ne!(split_seed(root, a), split_seed(root, b));
    }
}
