mod support;

use hdx_core::constructions::{build_conlon, find_sidon_set, is_sidon};
use hdx_core::rng::derive_stream;
use hdx_core::schreier::Verdict;
use hdx_core::spectra::{lambda, walk_graph};
use hdx_core::{SpectralOptions, TwoComplex, WeightedGraph};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use support::{naive_sidon, oracle_lambda, random_regular};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Random complex on `n` vertices with up to `k` distinct triangles.
fn random_complex(n: u32, k: usize, seed: u64) -> TwoComplex {
    let mut rng = derive_stream(seed, "complex");
    let mut tris = std::collections::BTreeSet::new();
    for _ in 0..k {
        let mut v: Vec<u32> = (0..n).collect();
        v.shuffle(&mut rng);
        let mut t = [v[0], v[1], v[2]];
        t.sort_unstable();
        tris.insert(t);
    }
    TwoComplex::with_numeric_labels(n as usize, tris.into_iter().collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lambda_agrees_with_jacobi(n in 6usize..40, d in 3usize..6, seed in any::<u64>()) {
        prop_assume!(n * d % 2 == 0 && d < n);
        let g = random_regular(n, d, &mut derive_stream(seed, "regular"));
        let r = lambda(&g, &SpectralOptions::default()).unwrap();
        let (signed, min, abs) = oracle_lambda(&g);
        prop_assert!(close(r.lambda_signed, signed, 1e-8), "{} vs {}", r.lambda_signed, signed);
        prop_assert!(close(r.lambda_min, min, 1e-8));
        prop_assert!(close(r.lambda_abs, abs, 1e-8));
        prop_assert_eq!(r.degree, Some(d as u64));
    }

    #[test]
    fn lambda_agrees_with_jacobi_on_irregular_weighted_graphs(n in 4usize..30, seed in any::<u64>()) {
        let mut rng = derive_stream(seed, "weighted");
        // A spanning path keeps the graph connected.
        let mut edges: Vec<(usize, usize, u32)> = (1..n).map(|v| (v - 1, v, rng.random_range(1..4))).collect();
        for _ in 0..n {
            let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
            if u + 1 < v {
                edges.push((u, v, rng.random_range(1..4)));
            }
        }
        let g = WeightedGraph::from_edges(n, &edges).unwrap();
        let r = lambda(&g, &SpectralOptions::default()).unwrap();
        let (signed, min, _) = oracle_lambda(&g);
        prop_assert!(close(r.lambda_signed, signed, 1e-8), "{} vs {}", r.lambda_signed, signed);
        prop_assert!(close(r.lambda_min, min, 1e-8));
    }

    #[test]
    fn walk_degree_is_twice_the_triangle_count(n in 4u32..12, k in 1usize..20, seed in any::<u64>()) {
        let c = random_complex(n, k, seed);
        let w = walk_graph(&c).unwrap();
        prop_assert_eq!(w.num_vertices(), c.edges().len());
        let counts = c.edge_triangle_counts();
        for (e, &count) in counts.iter().enumerate() {
            prop_assert_eq!(w.degrees()[e], 2 * count as u64);
        }
    }

    #[test]
    fn complex_json_round_trips(n in 3u32..12, k in 1usize..20, seed in any::<u64>()) {
        let c = random_complex(n, k, seed);
        let text = c.to_json();
        let back = TwoComplex::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn is_sidon_matches_the_naive_check(t in 3u32..7, size in 2usize..8, seed in any::<u64>()) {
        let mut rng = derive_stream(seed, "subset");
        let mut pool: Vec<usize> = (1..1usize << t).collect();
        pool.shuffle(&mut rng);
        let set = &pool[..size.min(pool.len())];
        prop_assert_eq!(is_sidon(set), naive_sidon(set));
    }

    #[test]
    fn found_sidon_sets_pass_the_naive_check(t in 4u32..9, seed in any::<u64>()) {
        let size = t as usize;
        let s = find_sidon_set(t, size, seed).unwrap();
        prop_assert_eq!(s.len(), size);
        prop_assert!(naive_sidon(s.elements()));
        prop_assert!(s.elements().iter().all(|&x| x < 1 << t));
    }

    #[test]
    fn condition_d_holds_iff_sidon(t in 4u32..7, size in 4usize..7, seed in any::<u64>()) {
        let mut rng = derive_stream(seed, "condition-d");
        let mut pool: Vec<usize> = (1..1usize << t).collect();
        pool.shuffle(&mut rng);
        let set = &pool[..size];
        let inst = build_conlon(t, set).unwrap();
        let d = inst.record().free_like;
        prop_assert_eq!(d == Verdict::Pass, naive_sidon(set), "{:?} {:?}", set, d);
    }
}

/// `J(s,2)` spectrum from an independent Jacobi run on an explicitly built
/// Johnson graph.
fn johnson_oracle(s: usize) -> f64 {
    let pairs: Vec<(usize, usize)> = (0..s).flat_map(|a| (a + 1..s).map(move |b| (a, b))).collect();
    let mut edges = Vec::new();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let (a, b) = pairs[i];
            let (c, d) = pairs[j];
            if a == c || a == d || b == c || b == d {
                edges.push((i, j, 1));
            }
        }
    }
    oracle_lambda(&WeightedGraph::from_edges(pairs.len(), &edges).unwrap()).2
}

#[test]
fn conlon_link_graph_is_johnson() {
    for s in 5..=8 {
        let set = find_sidon_set(8, s, 3).unwrap();
        let inst = build_conlon(8, set.elements()).unwrap();
        let l = inst.type_graph().unwrap();
        assert_eq!(l.num_vertices(), s * (s - 1) / 2);
        let r = lambda(&l, &SpectralOptions::default()).unwrap();
        let expected = johnson_oracle(s);
        assert!(close(r.lambda_abs, expected, 1e-9), "s={s}: {} vs {expected}", r.lambda_abs);
        // Closed form of the signed second eigenvalue.
        let signed = (s as f64 - 4.0) / (2.0 * (s as f64 - 2.0));
        assert!(close(r.lambda_signed, signed, 1e-9), "s={s}");
    }
}
