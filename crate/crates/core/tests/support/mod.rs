//! Independent oracles for integration tests.

#![allow(dead_code)]

use hdx_core::WeightedGraph;
use rand::Rng;

/// Dense `D^{-1/2} A D^{-1/2}` built straight from the edge list.
pub fn normalized_dense(g: &WeightedGraph) -> Vec<Vec<f64>> {
    let n = g.num_vertices();
    let mut deg = vec![0f64; n];
    let mut a = vec![vec![0f64; n]; n];
    for (u, v, w) in g.edges() {
        let w = w as f64;
        if u == v {
            a[u][u] += w;
            deg[u] += w;
        } else {
            a[u][v] += w;
            a[v][u] += w;
            deg[u] += w;
            deg[v] += w;
        }
    }
    for u in 0..n {
        for v in 0..n {
            if a[u][v] != 0.0 {
                a[u][v] /= (deg[u] * deg[v]).sqrt();
            }
        }
    }
    a
}

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes. Returns the
/// eigenvalues in ascending order.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// `(lambda_signed, lambda_min, lambda_abs)` from the Jacobi spectrum.
pub fn oracle_lambda(g: &WeightedGraph) -> (f64, f64, f64) {
    let ev = jacobi_eigenvalues(normalized_dense(g));
    let n = ev.len();
    let signed = ev[n - 2];
    let min = ev[0];
    (signed, min, signed.abs().max(-min))
}

/// Simple connected `d`-regular graph on `n` vertices from the pairing
/// model, retried until simple and connected.
pub fn random_regular<R: Rng>(n: usize, d: usize, rng: &mut R) -> WeightedGraph {
    assert!(n * d % 2 == 0 && d < n);
    loop {
        let mut points: Vec<usize> = (0..n * d).map(|i| i / d).collect();
        for i in (1..points.len()).rev() {
            let j = rng.random_range(0..=i);
            points.swap(i, j);
        }
        let mut edges = std::collections::HashSet::new();
        let mut ok = true;
        for pair in points.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !edges.insert((u, v)) {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let list: Vec<(usize, usize, u32)> = edges.into_iter().map(|(u, v)| (u, v, 1)).collect();
        let g = WeightedGraph::from_edges(n, &list).unwrap();
        if g.is_connected() {
            return g;
        }
    }
}

/// Sorted list of every nonzero pairwise XOR, recomputed naively.
pub fn naive_sidon(set: &[usize]) -> bool {
    for a in 0..set.len() {
        for b in 0..set.len() {
            for c in 0..set.len() {
                for d in 0..set.len() {
                    let trivial = (a == c && b == d) || (a == d && b == c);
                    if a != b && c != d && !trivial && set[a] ^ set[b] == set[c] ^ set[d] {
                        return false;
                    }
                }
            }
        }
    }
    set.iter().all(|&x| x != 0)
}
