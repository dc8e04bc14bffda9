//! Graph constructions: Cayley, Johnson, Cartesian, complex walk graphs,
//! replacement and zig-zag products.

use std::collections::HashMap;

use crate::complexes::{triangle_edges, TwoComplex};
use crate::error::{HdxError, Result};
use crate::groups::FiniteGroup;
use crate::scalar::Scalar;

use super::eigen::{lanczos_extremes, lambda, make_report, Method, SpectralOptions, SpectralReport};
use super::graph::WeightedGraph;

/// `Cay(G, S)`: an arc `g -> s g` for every occurrence of `s` in the multiset.
pub fn cayley_graph(group: &FiniteGroup, generators: &[usize]) -> Result<WeightedGraph> {
    let mut count: HashMap<usize, usize> = HashMap::new();
    for &s in generators {
        if s >= group.order() {
            return Err(HdxError::param(format!("generator {s} outside group")));
        }
        *count.entry(s).or_default() += 1;
    }
    for (&s, &c) in &count {
        let ci = count.get(&group.inv(s)).copied().unwrap_or(0);
        if ci != c {
            return Err(HdxError::param(format!(
                "generator multiset not symmetric: {} appears {c} times, its inverse {ci}",
                group.label(s)
            )));
        }
    }
    let n = group.order();
    let mut arcs = Vec::with_capacity(n * count.len());
    for g in 0..n {
        for (&s, &c) in &count {
            arcs.push((g as u32, group.op(s, g) as u32, c as u32));
        }
    }
    Ok(WeightedGraph::assemble(n, arcs))
}

/// `J(s, 2)`: 2-subsets of `[s]` in lexicographic order, adjacent when they
/// share exactly one element.
pub fn johnson_graph(s: usize) -> Result<WeightedGraph> {
    if s < 2 {
        return Err(HdxError::param(format!("Johnson graph needs s >= 2, got {s}")));
    }
    let pairs: Vec<(usize, usize)> = (0..s)
        .flat_map(|a| (a + 1..s).map(move |b| (a, b)))
        .collect();
    let mut edges = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        for (j, q) in pairs.iter().enumerate().skip(i + 1) {
            let shared = [p.0 == q.0, p.0 == q.1, p.1 == q.0, p.1 == q.1]
                .iter()
                .filter(|&&x| x)
                .count();
            if shared == 1 {
                edges.push((i, j, 1));
            }
        }
    }
    WeightedGraph::from_edges(pairs.len(), &edges)
}

/// Second normalized eigenvalue of `J(s, 2)`: `(s - 4) / (2 (s - 2))`.
pub fn johnson_lambda<T: Scalar>(s: usize) -> Result<T> {
    if s < 4 {
        return Err(HdxError::param(format!("Johnson eigenvalue formula needs s >= 4, got {s}")));
    }
    Ok(T::from_count(s - 4) / (T::lit(2.0) * T::from_count(s - 2)))
}

/// Box product; vertex `(i, j)` has index `i * |H| + j`.
pub fn cartesian_product(g: &WeightedGraph, h: &WeightedGraph) -> Result<WeightedGraph> {
    if !g.is_regular() || !h.is_regular() {
        return Err(HdxError::param("Cartesian product gap identity needs regular factors"));
    }
    let (ng, nh) = (g.num_vertices(), h.num_vertices());
    let mut edges = Vec::new();
    for (u, v, w) in g.edges() {
        for j in 0..nh {
            edges.push((u * nh + j, v * nh + j, w));
        }
    }
    for (u, v, w) in h.edges() {
        for i in 0..ng {
            edges.push((i * nh + u, i * nh + v, w));
        }
    }
    WeightedGraph::from_edges(ng * nh, &edges)
}

/// Walk graph of a complex: vertices are the complex's edges (in
/// [`TwoComplex::edges`] order); each triangle links its three edges pairwise.
pub fn walk_graph(complex: &TwoComplex) -> Result<WeightedGraph> {
    if complex.triangles().is_empty() {
        return Err(HdxError::param("walk graph of a complex without triangles"));
    }
    let mut edges = Vec::with_capacity(complex.triangles().len() * 3);
    for t in complex.triangles() {
        let ids = triangle_edges(t).map(|e| complex.edge_id(e[0], e[1]).expect("derived edge"));
        edges.push((ids[0], ids[1], 1));
        edges.push((ids[0], ids[2], 1));
        edges.push((ids[1], ids[2], 1));
    }
    WeightedGraph::from_edges(complex.edges().len(), &edges)
}

/// The zig-zag function `f(a, b)`.
pub fn zigzag_function<T: Scalar>(a: T, b: T) -> Result<T> {
    let unit = |x: T| x >= T::zero() && x <= T::one();
    if !unit(a) || !unit(b) {
        return Err(HdxError::param(format!("zig-zag function arguments must lie in [0,1]: ({a}, {b})")));
    }
    let half = T::lit(0.5);
    let c = T::one() - b * b;
    Ok(half * c * a + half * (c * c * a * a + T::lit(4.0) * b * b).sqrt())
}

/// Replacement product of a `k`-regular base graph with a cloud graph on
/// `k` vertices. Vertex `(v, t)` has index `v * k + t`.
#[derive(Clone, Debug)]
pub struct ReplacementProduct {
    clouds: usize,
    cloud: WeightedGraph,
    /// Blue partner of each vertex.
    rotation: Vec<u32>,
}

/// Validates a rotation map `(v, t) -> (u, t')` against `base` and builds the
/// replacement product with `cloud` copied into every cloud.
pub fn replacement_product(
    base: &WeightedGraph,
    cloud: &WeightedGraph,
    rotation: &[(u32, u32)],
) -> Result<ReplacementProduct> {
    let n = base.num_vertices();
    let k = cloud.num_vertices();
    if rotation.len() != n * k {
        return Err(HdxError::param(format!(
            "rotation map has {} entries, expected {}",
            rotation.len(),
            n * k
        )));
    }
    let mut flat = Vec::with_capacity(n * k);
    for (x, &(u, t)) in rotation.iter().enumerate() {
        if u as usize >= n || t as usize >= k {
            return Err(HdxError::structural(
                "rotation map leaves the vertex set",
                format!("({}, {}) -> ({u}, {t})", x / k, x % k),
            ));
        }
        flat.push(u * k as u32 + t);
    }
    for v in 0..n {
        if base.degrees()[v] as usize != k {
            return Err(HdxError::structural(
                "base degree differs from cloud size",
                format!("vertex {v} has degree {}", base.degrees()[v]),
            ));
        }
        let mut ports: Vec<u32> = rotation[v * k..(v + 1) * k].iter().map(|p| p.0).collect();
        ports.sort_unstable();
        if ports != base.neighbor_multiset(v) {
            return Err(HdxError::structural(
                "ports are not a bijection onto the neighbourhood",
                format!("vertex {v}"),
            ));
        }
    }
    for (x, &y) in flat.iter().enumerate() {
        if flat[y as usize] as usize != x {
            return Err(HdxError::structural(
                "blue edges are not a matching",
                format!("({}, {}) -> ({}, {})", x / k, x % k, y as usize / k, y as usize % k),
            ));
        }
    }
    Ok(ReplacementProduct {
        clouds: n,
        cloud: cloud.clone(),
        rotation: flat,
    })
}

impl ReplacementProduct {
    pub fn num_vertices(&self) -> usize {
        self.clouds * self.cloud.num_vertices()
    }

    pub fn cloud_size(&self) -> usize {
        self.cloud.num_vertices()
    }

    pub fn cloud(&self) -> &WeightedGraph {
        &self.cloud
    }

    pub fn blue_partner(&self, x: usize) -> usize {
        self.rotation[x] as usize
    }

    /// Red neighbours `(vertex, multiplicity)` of `x`, inside its cloud.
    pub fn red_neighbors(&self, x: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let k = self.cloud_size();
        let (v, t) = (x / k, x % k);
        self.cloud.neighbors(t).map(move |(s, w)| (v * k + s as usize, w))
    }

    /// Red edges only: one copy of the cloud graph per base vertex.
    pub fn red_graph(&self) -> Result<WeightedGraph> {
        let k = self.cloud_size();
        let mut edges = Vec::new();
        for v in 0..self.clouds {
            for (a, b, w) in self.cloud.edges() {
                edges.push((v * k + a, v * k + b, w));
            }
        }
        WeightedGraph::from_edges(self.num_vertices(), &edges)
    }

    /// Red and blue edges together.
    pub fn graph(&self) -> Result<WeightedGraph> {
        let k = self.cloud_size();
        let mut edges = Vec::new();
        for v in 0..self.clouds {
            for (a, b, w) in self.cloud.edges() {
                edges.push((v * k + a, v * k + b, w));
            }
        }
        for (x, &y) in self.rotation.iter().enumerate() {
            if x < y as usize {
                edges.push((x, y as usize, 1));
            }
        }
        WeightedGraph::from_edges(self.num_vertices(), &edges)
    }

    /// `P_B x`: the blue matching as a permutation.
    pub fn apply_blue<T: Scalar>(&self, x: &[T], y: &mut [T]) {
        for (i, out) in y.iter_mut().enumerate() {
            *out = x[self.rotation[i] as usize];
        }
    }

    /// `P_R x`: the normalized cloud walk in every cloud.
    pub fn apply_red<T: Scalar>(&self, x: &[T], y: &mut [T]) {
        let k = self.cloud_size();
        let deg = self.cloud.degrees();
        for (i, out) in y.iter_mut().enumerate() {
            let (v, t) = (i / k, i % k);
            let mut acc = T::zero();
            for (s, w) in self.cloud.neighbors(t) {
                acc += T::from_count(w as usize) * x[v * k + s as usize];
            }
            *out = if deg[t] == 0 {
                T::zero()
            } else {
                acc / T::from_count(deg[t] as usize)
            };
        }
    }

    /// Zig-zag product: red-blue-red paths counted with multiplicity.
    pub fn zigzag(&self) -> Result<WeightedGraph> {
        let k = self.cloud_size();
        let mut arcs = Vec::new();
        for x in 0..self.num_vertices() {
            let v = x / k;
            for (t1, w1) in self.cloud.neighbors(x % k) {
                let y = self.rotation[v * k + t1 as usize] as usize;
                let (u, t2) = (y / k, y % k);
                for (t3, w3) in self.cloud.neighbors(t2) {
                    arcs.push((x as u32, (u * k) as u32 + t3, w1 * w3));
                }
            }
        }
        Ok(WeightedGraph::assemble(self.num_vertices(), arcs))
    }

    /// Spectrum of the zig-zag walk `P_R P_B P_R` without materializing the
    /// product graph. Requires a regular cloud, where the operator is the
    /// normalized adjacency of [`zigzag`](Self::zigzag).
    pub fn zigzag_lambda<T: Scalar>(&self, opts: &SpectralOptions<T>) -> Result<SpectralReport<T>> {
        let d = self
            .cloud
            .regular_degree()
            .ok_or_else(|| HdxError::param("zig-zag operator path needs a regular cloud"))?;
        let n = self.num_vertices();
        if n <= opts.dense_cap {
            return lambda(&self.zigzag()?, opts);
        }
        if n > opts.max_vertices {
            return Err(HdxError::Size {
                what: "zig-zag product".into(),
                actual: n,
                cap: opts.max_vertices,
            });
        }
        let zz = self.zigzag()?;
        if !zz.is_connected() {
            let (_, comp) = zz.components();
            let b = comp.iter().position(|&c| c != comp[0]).expect("second component");
            return Err(HdxError::Disconnected { a: 0, b });
        }
        drop(zz);
        let scale = T::one() / T::from_count(n).sqrt();
        let u = vec![scale; n];
        let apply = |x: &[T], y: &mut [T]| {
            let mut a = vec![T::zero(); n];
            let mut b = vec![T::zero(); n];
            self.apply_red(x, &mut a);
            self.apply_blue(&a, &mut b);
            self.apply_red(&b, y);
        };
        let (lo, hi) = lanczos_extremes(n, apply, &u, opts)?;
        Ok(make_report(n, Some(d * d), hi, lo, opts.tol, Method::Lanczos))
    }
}
