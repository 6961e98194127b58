mod common;

use common::*;
use hinfraud::features::{feature_dense_oracle, feature_fast};
use hinfraud::metapath::{enumerate_downsized, pair_paths, MetaPaths};
use hinfraud::MetaPaths64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn dense(meta: &MetaPaths64, hin: &hinfraud::hin::Hin, idx: usize) -> Vec<Vec<f64>> {
    walk_counts(hin, meta.paths[idx].trace.links())
}

#[test]
fn walk_counts_match_materialized_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let hin = random_hin(&mut rng, RandomHinSpec::SMALL_COMPLEX);
        let meta: MetaPaths64 = MetaPaths::build(&hin);
        for (idx, path) in meta.paths.iter().enumerate() {
            let want = dense(&meta, &hin, idx);
            let got = path.matrix.to_dense();
            for (i, row) in want.iter().enumerate() {
                for (k, &v) in row.iter().enumerate() {
                    assert_eq!(got[[i, k]], v, "path {idx} entry ({i},{k})");
                }
            }
        }
    }
}

#[test]
fn title_fixture_path_counts() {
    let hin = title_fixture();
    let meta: MetaPaths64 = MetaPaths::build(&hin);
    let rendered: Vec<String> = meta.traces().iter().map(|t| t.render(hin.schema())).collect();
    assert_eq!(rendered, vec!["T", "T→containsItem→Item", "T→containsItem→Item→isTitle→Title"]);
    let title = &meta.paths[2];
    assert!(!title.is_simple);
    // Entry = number of the transaction's items under that title.
    let want = [[2.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let got = title.matrix.to_dense();
    for i in 0..4 {
        for k in 0..2 {
            assert_eq!(got[[i, k]], want[i][k]);
        }
    }
}

#[test]
fn title_fixture_hand_values() {
    let hin = title_fixture();
    let meta: MetaPaths64 = MetaPaths::build(&hin);
    let p = &meta.paths[2];
    let y = [1.0, 0.0, 1.0, 0.0];
    // P1 D2 P1ᵀ with title weights 1/4 and 1/2:
    //   t0: [1, 1/2, 1/2, 0]   t1: [1/2, 1/4, 1/4, 0]
    //   t2: [1/2, 1/4, 3/4, 1/2]   t3: [0, 0, 1/2, 1/2]
    let excl = feature_fast(p, p, &y, 0.9, true).unwrap();
    assert!(max_abs_diff(&excl, &[0.5, 1.0, 0.4, 1.0]) < 1e-12);
    let incl = feature_fast(p, p, &y, 0.9, false).unwrap();
    assert!(max_abs_diff(&incl, &[0.75, 0.75, 0.625, 0.5]) < 1e-12);

    // The raw count matrix P1 P1ᵀ weighs both titles alike and disagrees on t2.
    let raw_excl = feature_dense_oracle(p, p, &y, 0.9, true, 100).unwrap();
    assert!(max_abs_diff(&raw_excl, &[0.5, 1.0, 0.5, 1.0]) < 1e-12);
    let raw_incl = feature_dense_oracle(p, p, &y, 0.9, false, 100).unwrap();
    assert!(max_abs_diff(&raw_incl, &[0.75, 0.75, 4.0 / 6.0, 0.5]) < 1e-12);
}

#[test]
fn simple_pairs_match_literal_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    for round in 0..40 {
        let hin = random_hin(&mut rng, RandomHinSpec::MEDIUM);
        let meta: MetaPaths64 = MetaPaths::build(&hin);
        let y = random_labels(&mut rng, hin.n_targets());
        let exclude = round % 2 == 0;
        for pair in &meta.pairs {
            let (p1, p2) = (&meta.paths[pair.left], &meta.paths[pair.right]);
            if !p1.is_simple {
                continue;
            }
            let fast = feature_fast(p1, p2, &y, 0.3, exclude).unwrap();
            let lib = feature_dense_oracle(p1, p2, &y, 0.3, exclude, 500).unwrap();
            let own = literal_fraction(&dense(&meta, &hin, pair.left), &dense(&meta, &hin, pair.right), &y, 0.3, exclude);
            assert!(max_abs_diff(&fast, &lib) < TOL, "{}", pair.semantics);
            assert!(max_abs_diff(&fast, &own) < TOL, "{}", pair.semantics);
            checked += 1;
        }
    }
    assert!(checked > 40);
}

#[test]
fn every_pair_matches_end_normalized_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut complex = 0;
    for round in 0..40 {
        let hin = random_hin(&mut rng, RandomHinSpec::SMALL_COMPLEX);
        let meta: MetaPaths64 = MetaPaths::build(&hin);
        let y = random_labels(&mut rng, hin.n_targets());
        let exclude = round % 3 != 0;
        for pair in &meta.pairs {
            let (p1, p2) = (&meta.paths[pair.left], &meta.paths[pair.right]);
            let fast = feature_fast(p1, p2, &y, 0.3, exclude).unwrap();
            let own = end_normalized_fraction(&dense(&meta, &hin, pair.left), &dense(&meta, &hin, pair.right), &y, 0.3, exclude);
            assert!(max_abs_diff(&fast, &own) < TOL, "{}", pair.semantics);
            complex += usize::from(!p1.is_simple);
        }
    }
    assert!(complex > 10);
}

#[test]
fn enumeration_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let hin = random_hin(&mut rng, RandomHinSpec::MEDIUM);
        let counts = hin.node_counts();
        let traces = enumerate_downsized(hin.schema(), &counts);
        assert_eq!(traces.len(), trace_keys(&traces).len(), "no duplicate traces");
        assert_eq!(trace_keys(&traces), brute_force_traces(hin.schema(), &counts));
        assert_eq!(pair_paths(&traces, hin.schema()).len(), brute_force_pair_count(&traces));
    }
}

#[test]
fn toy_schema_counts() {
    let schema = toy_schema();
    let traces = enumerate_downsized(&schema, &TOY_COUNTS);
    assert_eq!(traces.len(), 4);
    assert_eq!(trace_keys(&traces), brute_force_traces(&schema, &TOY_COUNTS));
    let pairs = pair_paths(&traces, &schema);
    assert_eq!(pairs.len(), 3);
    for a in &pairs {
        for b in &pairs {
            if a != b {
                assert!(!is_contiguous_part(&a.semantics, &b.semantics), "{} inside {}", a.semantics, b.semantics);
            }
        }
    }
}

/// Whether the steps of `short` appear as one consecutive run in `long`.
fn is_contiguous_part(short: &str, long: &str) -> bool {
    let (s, l): (Vec<&str>, Vec<&str>) = (short.split('→').collect(), long.split('→').collect());
    s.len() < l.len() && l.windows(s.len()).any(|w| w == s.as_slice())
}
