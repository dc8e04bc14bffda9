use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{HdxError, Result};
use crate::scalar::Scalar;

/// Rows above this size are multiplied in parallel.
const PAR_ROWS: usize = 4096;

/// Undirected multigraph in compressed row form.
///
/// Entry `(u, v)` holds the number of arcs from `u` to `v`; the matrix is
/// symmetric. A loop contributes one arc per unit of multiplicity, so the
/// degree of a vertex is its row sum and the random walk picks an arc
/// uniformly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<u32>,
    degrees: Vec<u64>,
}

impl WeightedGraph {
    /// Builds from undirected edges `(u, v, multiplicity)`; repeats accumulate.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u32)]) -> Result<Self> {
        let mut arcs = Vec::with_capacity(edges.len() * 2);
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(HdxError::param(format!("edge ({u},{v}) outside {n} vertices")));
            }
            if w == 0 {
                continue;
            }
            arcs.push((u as u32, v as u32, w));
            if u != v {
                arcs.push((v as u32, u as u32, w));
            }
        }
        Ok(Self::assemble(n, arcs))
    }

    /// Builds from directed arcs, which must form a symmetric multiset.
    pub fn from_arcs(n: usize, arcs: Vec<(u32, u32, u32)>) -> Result<Self> {
        if let Some(&(u, v, _)) = arcs.iter().find(|a| a.0 as usize >= n || a.1 as usize >= n) {
            return Err(HdxError::param(format!("arc ({u},{v}) outside {n} vertices")));
        }
        let g = Self::assemble(n, arcs);
        for u in 0..n {
            for (v, w) in g.neighbors(u) {
                if g.weight(v as usize, u) != w {
                    return Err(HdxError::param(format!(
                        "arc multiset not symmetric at ({u},{v})"
                    )));
                }
            }
        }
        Ok(g)
    }

    pub(crate) fn assemble(n: usize, mut arcs: Vec<(u32, u32, u32)>) -> Self {
        arcs.par_sort_unstable_by_key(|a| (a.0, a.1));
        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::with_capacity(arcs.len());
        let mut weights: Vec<u32> = Vec::with_capacity(arcs.len());
        let mut last: Option<(u32, u32)> = None;
        for (u, v, w) in arcs {
            if last == Some((u, v)) {
                *weights.last_mut().expect("merged arc") += w;
            } else {
                targets.push(v);
                weights.push(w);
                offsets[u as usize + 1] += 1;
                last = Some((u, v));
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let degrees = (0..n)
            .map(|u| {
                weights[offsets[u]..offsets[u + 1]]
                    .iter()
                    .map(|&w| w as u64)
                    .sum()
            })
            .collect();
        WeightedGraph {
            offsets,
            targets,
            weights,
            degrees,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.degrees.len()
    }

    /// Distinct unordered adjacent pairs, loops included.
    pub fn num_edges(&self) -> usize {
        (0..self.num_vertices())
            .map(|u| self.neighbors(u).filter(|&(v, _)| v as usize >= u).count())
            .sum()
    }

    /// Number of stored arcs (nonzero entries).
    pub fn num_entries(&self) -> usize {
        self.targets.len()
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<u64> {
        let d = *self.degrees.first()?;
        self.degrees.iter().all(|&x| x == d).then_some(d)
    }

    pub fn is_regular(&self) -> bool {
        self.regular_degree().is_some()
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (u32, u32)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.weights[r].iter().copied())
    }

    pub fn weight(&self, u: usize, v: usize) -> u32 {
        let r = self.offsets[u]..self.offsets[u + 1];
        match self.targets[r.clone()].binary_search(&(v as u32)) {
            Ok(i) => self.weights[r.start + i],
            Err(_) => 0,
        }
    }

    /// Neighbour multiset of `u`, each neighbour repeated by multiplicity.
    pub fn neighbor_multiset(&self, u: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.degrees[u] as usize);
        for (v, w) in self.neighbors(u) {
            out.extend(std::iter::repeat_n(v, w as usize));
        }
        out
    }

    /// Component id per vertex and the number of components.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let n = self.num_vertices();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for (v, _) in self.neighbors(u) {
                    if comp[v as usize] == usize::MAX {
                        comp[v as usize] = count;
                        queue.push_back(v as usize);
                    }
                }
            }
            count += 1;
        }
        (count, comp)
    }

    /// Subgraph induced on `keep`, relabeled `keep[i] -> i`. Edges leaving
    /// `keep` are dropped.
    pub fn induced(&self, keep: &[usize]) -> Result<WeightedGraph> {
        let mut index = vec![u32::MAX; self.num_vertices()];
        for (i, &v) in keep.iter().enumerate() {
            if v >= self.num_vertices() || index[v] != u32::MAX {
                return Err(HdxError::param(format!("bad or repeated vertex {v} in subgraph")));
            }
            index[v] = i as u32;
        }
        let mut arcs = Vec::new();
        for (i, &u) in keep.iter().enumerate() {
            for (v, w) in self.neighbors(u) {
                let j = index[v as usize];
                if j != u32::MAX {
                    arcs.push((i as u32, j, w));
                }
            }
        }
        Ok(Self::assemble(keep.len(), arcs))
    }

    /// Vertices in the same component as `v`, ascending.
    pub fn component_of(&self, v: usize) -> Vec<usize> {
        let (_, comp) = self.components();
        (0..self.num_vertices()).filter(|&u| comp[u] == comp[v]).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.num_vertices() > 0 && self.components().0 == 1
    }

    /// Undirected edges `(u, v, multiplicity)` with `u <= v`.
    pub fn edges(&self) -> Vec<(usize, usize, u32)> {
        let mut out = Vec::new();
        for u in 0..self.num_vertices() {
            for (v, w) in self.neighbors(u) {
                if v as usize >= u {
                    out.push((u, v as usize, w));
                }
            }
        }
        out
    }

    /// `y = A x` with the raw (multiplicity) adjacency.
    pub fn adjacency_apply<T: Scalar>(&self, x: &[T], y: &mut [T]) {
        let row = |u: usize| -> T {
            let mut acc = T::zero();
            for i in self.offsets[u]..self.offsets[u + 1] {
                acc += T::from_count(self.weights[i] as usize) * x[self.targets[i] as usize];
            }
            acc
        };
        if self.num_vertices() >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(u, out)| *out = row(u));
        } else {
            y.iter_mut().enumerate().for_each(|(u, out)| *out = row(u));
        }
    }

    /// Normalized adjacency operator `D^{-1/2} A D^{-1/2}`.
    pub fn normalized<T: Scalar>(&self) -> NormalizedOperator<'_, T> {
        let inv_sqrt = self
            .degrees
            .iter()
            .map(|&d| {
                if d == 0 {
                    T::zero()
                } else {
                    T::one() / T::from_count(d as usize).sqrt()
                }
            })
            .collect();
        NormalizedOperator {
            graph: self,
            inv_sqrt,
        }
    }

    /// Dense row-major normalized adjacency.
    pub fn dense_normalized<T: Scalar>(&self) -> Vec<T> {
        let n = self.num_vertices();
        let op = self.normalized::<T>();
        let mut m = vec![T::zero(); n * n];
        for u in 0..n {
            for (v, w) in self.neighbors(u) {
                m[u * n + v as usize] =
                    T::from_count(w as usize) * op.inv_sqrt[u] * op.inv_sqrt[v as usize];
            }
        }
        m
    }

    /// `tr(A^len)`: closed walks of length `len`, exact.
    pub fn closed_walks(&self, len: usize) -> Result<u128> {
        let n = self.num_vertices();
        let overflow = || HdxError::State("closed walk count overflows u128".into());
        let half = len / 2;
        let mut total: u128 = 0;
        let mut cur = vec![0u128; n];
        let mut next = vec![0u128; n];
        for s in 0..n {
            cur.iter_mut().for_each(|x| *x = 0);
            cur[s] = 1;
            for _ in 0..half {
                for u in 0..n {
                    let mut acc: u128 = 0;
                    for (v, w) in self.neighbors(u) {
                        let term = (w as u128).checked_mul(cur[v as usize]).ok_or_else(overflow)?;
                        acc = acc.checked_add(term).ok_or_else(overflow)?;
                    }
                    next[u] = acc;
                }
                std::mem::swap(&mut cur, &mut next);
            }
            // (A^half e_s) . (A^(len-half) e_s) and A symmetric.
            if len.is_multiple_of(2) {
                for &x in &cur {
                    total = x
                        .checked_mul(x)
                        .and_then(|sq| total.checked_add(sq))
                        .ok_or_else(overflow)?;
                }
            } else {
                for u in 0..n {
                    for (v, w) in self.neighbors(u) {
                        let term = cur[u]
                            .checked_mul(cur[v as usize])
                            .and_then(|t| t.checked_mul(w as u128))
                            .ok_or_else(overflow)?;
                        total = total.checked_add(term).ok_or_else(overflow)?;
                    }
                }
            }
        }
        Ok(total)
    }

    /// Tab-separated edge list with a `#n=<count>` header.
    pub fn to_tsv(&self) -> String {
        let mut s = format!("#n={}\n", self.num_vertices());
        for (u, v, w) in self.edges() {
            writeln!(s, "{u}\t{v}\t{w}").expect("write to string");
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix("#n="))
            .ok_or_else(|| HdxError::Parse("missing #n= header".into()))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|e| HdxError::Parse(format!("bad vertex count: {e}")))?;
        let mut edges = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(HdxError::Parse(format!("line {}: expected 3 fields", i + 2)));
            }
            let parse = |f: &str| {
                f.trim()
                    .parse::<usize>()
                    .map_err(|e| HdxError::Parse(format!("line {}: {e}", i + 2)))
            };
            edges.push((parse(fields[0])?, parse(fields[1])?, parse(fields[2])? as u32));
        }
        Self::from_edges(n, &edges)
    }
}

/// Matrix-free `D^{-1/2} A D^{-1/2}`.
pub struct NormalizedOperator<'a, T> {
    graph: &'a WeightedGraph,
    inv_sqrt: Vec<T>,
}

impl<T: Scalar> NormalizedOperator<'_, T> {
    pub fn dim(&self) -> usize {
        self.graph.num_vertices()
    }

    /// Unit eigenvector for eigenvalue 1: `sqrt(deg)` normalized.
    pub fn stationary(&self) -> Vec<T> {
        let total: u64 = self.graph.degrees.iter().sum();
        let scale = T::one() / T::from_count(total as usize).sqrt();
        self.graph
            .degrees
            .iter()
            .map(|&d| T::from_count(d as usize).sqrt() * scale)
            .collect()
    }

    pub fn apply(&self, x: &[T], y: &mut [T]) {
        let g = self.graph;
        let row = |u: usize| -> T {
            let mut acc = T::zero();
            for i in g.offsets[u]..g.offsets[u + 1] {
                let v = g.targets[i] as usize;
                acc += T::from_count(g.weights[i] as usize) * self.inv_sqrt[v] * x[v];
            }
            acc * self.inv_sqrt[u]
        };
        if self.dim() >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(u, out)| *out = row(u));
        } else {
            y.iter_mut().enumerate().for_each(|(u, out)| *out = row(u));
        }
    }
}
