//! Graph isomorphism for small weighted graphs by color refinement plus
//! individualization. Used to compare vertex links.

use std::collections::HashMap;

use serde::Serialize;

use crate::spectra::WeightedGraph;

/// Outcome of an isomorphism search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoOutcome {
    /// `map[v]` is the image in the second graph of vertex `v` of the first.
    Found(Vec<u32>),
    NotIsomorphic,
    /// The search visited `budget` nodes without deciding.
    Undecided,
}

/// Refines `colors` in place on the disjoint union of `graphs` until stable.
/// Colors are renumbered canonically, so equal colors across graphs are
/// comparable.
fn refine(graphs: &[&WeightedGraph], colors: &mut [Vec<u32>]) {
    loop {
        let before: usize = count_colors(colors);
        let mut sigs: Vec<Vec<(u32, Vec<(u32, u32)>)>> = Vec::with_capacity(graphs.len());
        for (g, col) in graphs.iter().zip(colors.iter()) {
            let s = (0..g.num_vertices())
                .map(|u| {
                    let mut nb: Vec<(u32, u32)> =
                        g.neighbors(u).map(|(v, w)| (col[v as usize], w)).collect();
                    nb.sort_unstable();
                    (col[u], nb)
                })
                .collect();
            sigs.push(s);
        }
        let mut all: Vec<&(u32, Vec<(u32, u32)>)> = sigs.iter().flatten().collect();
        all.sort();
        all.dedup();
        let index: HashMap<&(u32, Vec<(u32, u32)>), u32> =
            all.into_iter().enumerate().map(|(i, s)| (s, i as u32)).collect();
        for (col, s) in colors.iter_mut().zip(&sigs) {
            for (c, sig) in col.iter_mut().zip(s) {
                *c = index[sig];
            }
        }
        if count_colors(colors) == before {
            return;
        }
    }
}

fn count_colors(colors: &[Vec<u32>]) -> usize {
    let mut all: Vec<u32> = colors.iter().flatten().copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

fn histogram(col: &[u32]) -> Vec<(u32, usize)> {
    let mut h: HashMap<u32, usize> = HashMap::new();
    for &c in col {
        *h.entry(c).or_default() += 1;
    }
    let mut v: Vec<_> = h.into_iter().collect();
    v.sort_unstable();
    v
}

/// Smallest non-singleton color class (ties broken by color), if any.
fn target_cell(col: &[u32]) -> Option<u32> {
    histogram(col)
        .into_iter()
        .filter(|&(_, n)| n > 1)
        .min_by_key(|&(c, n)| (n, c))
        .map(|(c, _)| c)
}

fn is_isomorphism(a: &WeightedGraph, b: &WeightedGraph, map: &[u32]) -> bool {
    (0..a.num_vertices()).all(|u| {
        let mut left: Vec<(u32, u32)> = a.neighbors(u).map(|(v, w)| (map[v as usize], w)).collect();
        let mut right: Vec<(u32, u32)> = b.neighbors(map[u] as usize).collect();
        left.sort_unstable();
        right.sort_unstable();
        left == right
    })
}

/// Searches for an isomorphism `a -> b`, visiting at most `budget` nodes.
pub fn find_isomorphism(a: &WeightedGraph, b: &WeightedGraph, budget: usize) -> IsoOutcome {
    if a.num_vertices() != b.num_vertices() || a.num_entries() != b.num_entries() {
        return IsoOutcome::NotIsomorphic;
    }
    let mut colors = vec![vec![0u32; a.num_vertices()], vec![0u32; b.num_vertices()]];
    refine(&[a, b], &mut colors);
    let mut visited = 0usize;
    search(a, b, colors, budget, &mut visited)
}

fn search(
    a: &WeightedGraph,
    b: &WeightedGraph,
    colors: Vec<Vec<u32>>,
    budget: usize,
    visited: &mut usize,
) -> IsoOutcome {
    *visited += 1;
    if *visited > budget {
        return IsoOutcome::Undecided;
    }
    if histogram(&colors[0]) != histogram(&colors[1]) {
        return IsoOutcome::NotIsomorphic;
    }
    let Some(cell) = target_cell(&colors[0]) else {
        let mut map = vec![0u32; a.num_vertices()];
        let mut where_b: HashMap<u32, u32> = HashMap::new();
        for (v, &c) in colors[1].iter().enumerate() {
            where_b.insert(c, v as u32);
        }
        for (u, c) in colors[0].iter().enumerate() {
            map[u] = where_b[c];
        }
        return if is_isomorphism(a, b, &map) {
            IsoOutcome::Found(map)
        } else {
            IsoOutcome::NotIsomorphic
        };
    };
    let fresh = colors
        .iter()
        .flatten()
        .copied()
        .max()
        .unwrap_or(0)
        + 1;
    let v = colors[0].iter().position(|&c| c == cell).expect("cell nonempty");
    let mut undecided = false;
    for u in (0..b.num_vertices()).filter(|&u| colors[1][u] == cell) {
        let mut next = colors.clone();
        next[0][v] = fresh;
        next[1][u] = fresh;
        refine(&[a, b], &mut next);
        match search(a, b, next, budget, visited) {
            IsoOutcome::Found(m) => return IsoOutcome::Found(m),
            IsoOutcome::Undecided => undecided = true,
            IsoOutcome::NotIsomorphic => {}
        }
        if *visited > budget {
            return IsoOutcome::Undecided;
        }
    }
    if undecided {
        IsoOutcome::Undecided
    } else {
        IsoOutcome::NotIsomorphic
    }
}

/// Canonical relabeled edge list: equal for two graphs iff they are
/// isomorphic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CanonicalForm {
    pub vertices: usize,
    pub edges: Vec<(u32, u32, u32)>,
}

/// Minimum relabeled edge list over the leaves of the individualization tree.
/// Returns `None` when more than `budget` nodes would be visited.
pub fn canonical_form(g: &WeightedGraph, budget: usize) -> Option<CanonicalForm> {
    let mut colors = vec![vec![0u32; g.num_vertices()]];
    refine(&[g], &mut colors);
    let mut best: Option<CanonicalForm> = None;
    let mut visited = 0usize;
    canon_search(g, colors.pop().expect("one graph"), budget, &mut visited, &mut best)?;
    best
}

fn canon_search(
    g: &WeightedGraph,
    col: Vec<u32>,
    budget: usize,
    visited: &mut usize,
    best: &mut Option<CanonicalForm>,
) -> Option<()> {
    *visited += 1;
    if *visited > budget {
        return None;
    }
    let Some(cell) = target_cell(&col) else {
        // Discrete: colors are a permutation after ranking.
        let mut order: Vec<usize> = (0..g.num_vertices()).collect();
        order.sort_by_key(|&u| col[u]);
        let mut label = vec![0u32; g.num_vertices()];
        for (rank, &u) in order.iter().enumerate() {
            label[u] = rank as u32;
        }
        let mut edges: Vec<(u32, u32, u32)> = g
            .edges()
            .into_iter()
            .map(|(u, v, w)| {
                let (x, y) = (label[u], label[v]);
                (x.min(y), x.max(y), w)
            })
            .collect();
        edges.sort_unstable();
        let form = CanonicalForm {
            vertices: g.num_vertices(),
            edges,
        };
        if best.as_ref().is_none_or(|b| form < *b) {
            *best = Some(form);
        }
        return Some(());
    };
    let fresh = col.iter().copied().max().unwrap_or(0) + 1;
    for v in (0..g.num_vertices()).filter(|&v| col[v] == cell) {
        let mut next = vec![col.clone()];
        next[0][v] = fresh;
        refine(&[g], &mut next);
        canon_search(g, next.pop().expect("one graph"), budget, visited, best)?;
    }
    Some(())
}
