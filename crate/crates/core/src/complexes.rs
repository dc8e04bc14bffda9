//! Pure 2-dimensional simplicial complexes.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HdxError, Result};
use crate::spectra::WeightedGraph;

pub type Triangle = [u32; 3];
pub type Edge = [u32; 2];

/// A strong coloring candidate with an ordered vertex list per color.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    classes: Vec<Vec<u32>>,
    color_of: Vec<usize>,
    position: Vec<usize>,
}

impl Coloring {
    /// `classes[c]` lists the vertices of color `c` in their fixed order.
    pub fn new(num_vertices: usize, classes: Vec<Vec<u32>>) -> Result<Self> {
        if classes.is_empty() {
            return Err(HdxError::param("coloring needs at least one color"));
        }
        let mut color_of = vec![usize::MAX; num_vertices];
        let mut position = vec![0; num_vertices];
        for (c, class) in classes.iter().enumerate() {
            for (i, &v) in class.iter().enumerate() {
                let v = v as usize;
                if v >= num_vertices {
                    return Err(HdxError::param(format!("colored vertex {v} out of range")));
                }
                if color_of[v] != usize::MAX {
                    return Err(HdxError::param(format!("vertex {v} colored twice")));
                }
                color_of[v] = c;
                position[v] = i;
            }
        }
        if let Some(v) = color_of.iter().position(|&c| c == usize::MAX) {
            return Err(HdxError::param(format!("vertex {v} has no color")));
        }
        Ok(Coloring {
            classes,
            color_of,
            position,
        })
    }

    pub fn chi(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<u32>] {
        &self.classes
    }

    pub fn color_of(&self, v: u32) -> usize {
        self.color_of[v as usize]
    }

    /// Index `i` such that `v = V^c_i`.
    pub fn position(&self, v: u32) -> usize {
        self.position[v as usize]
    }

    /// Part sizes `K_c`.
    pub fn part_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.len()).collect()
    }
}

/// Vertices, triangles and the derived edge set of a pure 2-complex.
///
/// Triangles are stored sorted and deduplicated, so two complexes with the
/// same vertex order and face set compare (and serialize) equal.
#[derive(Clone, Debug)]
pub struct TwoComplex {
    labels: Vec<String>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
    edge_index: HashMap<Edge, usize>,
    coloring: Option<Coloring>,
}

impl PartialEq for TwoComplex {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
            && self.triangles == other.triangles
            && self.coloring == other.coloring
    }
}

fn sort3(t: Triangle) -> Triangle {
    let mut t = t;
    t.sort_unstable();
    t
}

fn edge(a: u32, b: u32) -> Edge {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// The three edges of a sorted triangle.
pub fn triangle_edges(t: &Triangle) -> [Edge; 3] {
    [[t[0], t[1]], [t[0], t[2]], [t[1], t[2]]]
}

impl TwoComplex {
    pub fn new(labels: Vec<String>, triangles: Vec<Triangle>) -> Result<Self> {
        let n = labels.len();
        let mut seen = HashSet::with_capacity(n);
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(HdxError::param(format!("duplicate vertex id {l:?}")));
            }
        }
        let mut tris = Vec::with_capacity(triangles.len());
        for t in triangles {
            let s = sort3(t);
            if s[2] as usize >= n {
                return Err(HdxError::param(format!("triangle {t:?} references a missing vertex")));
            }
            if s[0] == s[1] || s[1] == s[2] {
                return Err(HdxError::param(format!("triangle {t:?} repeats a vertex")));
            }
            tris.push(s);
        }
        tris.sort_unstable();
        tris.dedup();
        Ok(Self::from_sorted(labels, tris))
    }

    /// Complex with vertices labelled `0..n`.
    pub fn with_numeric_labels(n: usize, triangles: Vec<Triangle>) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect(), triangles)
    }

    fn from_sorted(labels: Vec<String>, triangles: Vec<Triangle>) -> Self {
        let mut edges: Vec<Edge> = triangles.iter().flat_map(triangle_edges).collect();
        edges.sort_unstable();
        edges.dedup();
        let edge_index = edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        TwoComplex {
            labels,
            triangles,
            edges,
            edge_index,
            coloring: None,
        }
    }

    pub fn with_coloring(mut self, coloring: Coloring) -> Result<Self> {
        if coloring.color_of.len() != self.labels.len() {
            return Err(HdxError::param("coloring size does not match vertex count"));
        }
        self.coloring = Some(coloring);
        Ok(self)
    }

    pub fn without_coloring(mut self) -> Self {
        self.coloring = None;
        self
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: u32) -> &str {
        &self.labels[v as usize]
    }

    pub fn vertex_index(&self, label: &str) -> Option<u32> {
        self.labels.iter().position(|l| l == label).map(|i| i as u32)
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    /// All 2-subsets of triangles, sorted.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_id(&self, a: u32, b: u32) -> Option<usize> {
        self.edge_index.get(&edge(a, b)).copied()
    }

    pub fn has_triangle(&self, t: Triangle) -> bool {
        self.triangles.binary_search(&sort3(t)).is_ok()
    }

    pub fn coloring(&self) -> Option<&Coloring> {
        self.coloring.as_ref()
    }

    /// Number of triangles containing each edge, indexed like [`edges`](Self::edges).
    pub fn edge_triangle_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.edges.len()];
        for t in &self.triangles {
            for e in triangle_edges(t) {
                counts[self.edge_index[&e]] += 1;
            }
        }
        counts
    }

    /// Edge regularity: every edge in exactly `d` triangles.
    pub fn regularity(&self) -> Regularity {
        let counts = self.edge_triangle_counts();
        let Some(&d) = counts.first() else {
            return Regularity::Empty;
        };
        match counts.iter().position(|&c| c != d) {
            None => Regularity::Regular(d),
            Some(i) => Regularity::Irregular {
                edge: self.edges[i],
                count: counts[i],
                expected: d,
            },
        }
    }

    /// Triangles containing each vertex.
    pub fn vertex_triangle_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_vertices()];
        for t in &self.triangles {
            for &v in t {
                counts[v as usize] += 1;
            }
        }
        counts
    }

    /// Connected components of the 1-skeleton, as a component id per vertex.
    /// Vertices in no edge form their own components.
    pub fn skeleton_components(&self) -> (usize, Vec<usize>) {
        let n = self.num_vertices();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let a = find(&mut parent, e[0] as usize);
            let b = find(&mut parent, e[1] as usize);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut ids = HashMap::new();
        let mut comp = vec![0; n];
        for v in 0..n {
            let r = find(&mut parent, v);
            let next = ids.len();
            comp[v] = *ids.entry(r).or_insert(next);
        }
        (ids.len(), comp)
    }

    pub fn is_connected(&self) -> bool {
        self.num_vertices() > 0 && self.skeleton_components().0 == 1
    }

    /// Checks the attached coloring is strong and reports skeleton connectivity.
    pub fn validate_coloring(&self) -> Result<ColoringReport> {
        let coloring = self
            .coloring
            .as_ref()
            .ok_or_else(|| HdxError::param("complex has no coloring"))?;
        let violations = self
            .triangles
            .iter()
            .filter(|t| {
                let c: Vec<usize> = t.iter().map(|&v| coloring.color_of(v)).collect();
                c[0] == c[1] || c[0] == c[2] || c[1] == c[2]
            })
            .copied()
            .collect();
        Ok(ColoringReport {
            violations,
            connected: self.is_connected(),
        })
    }

    /// Link of `v`: the graph on neighbours of `v` with an edge `{a,b}` for
    /// every triangle `{v,a,b}`.
    pub fn link_of(&self, v: u32) -> Result<LinkGraph> {
        if v as usize >= self.num_vertices() {
            return Err(HdxError::param(format!("vertex {v} not in complex")));
        }
        let mut pairs = Vec::new();
        for t in &self.triangles {
            if t.contains(&v) {
                let others: Vec<u32> = t.iter().copied().filter(|&x| x != v).collect();
                pairs.push((others[0], others[1]));
            }
        }
        let mut vertices: Vec<u32> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let local: HashMap<u32, usize> = vertices.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let edges: Vec<(usize, usize, u32)> = pairs
            .iter()
            .map(|(a, b)| (local[a], local[b], 1))
            .collect();
        let graph = WeightedGraph::from_edges(vertices.len(), &edges)?;
        Ok(LinkGraph { vertices, graph })
    }

    /// Property Inv: `{V^c_i, V^d_j}` is an edge iff
    /// `{V^c_{i+K_c/2}, V^d_{j+K_d/2}}` is.
    pub fn check_property_inv(&self) -> Result<InvReport> {
        let coloring = self
            .coloring
            .as_ref()
            .ok_or_else(|| HdxError::param("property Inv needs a coloring"))?;
        for (c, class) in coloring.classes.iter().enumerate() {
            if class.len() % 2 != 0 {
                return Err(HdxError::infeasible(format!(
                    "color {c} has odd part size {}",
                    class.len()
                )));
            }
        }
        let shift = |v: u32| -> u32 {
            let class = &coloring.classes[coloring.color_of(v)];
            let k = class.len();
            class[(coloring.position(v) + k / 2) % k]
        };
        // The shift is an involution, so one direction over all edges covers both.
        for e in &self.edges {
            let image = edge(shift(e[0]), shift(e[1]));
            if !self.edge_index.contains_key(&image) {
                return Ok(InvReport {
                    holds: false,
                    witness: Some((*e, image)),
                });
            }
        }
        Ok(InvReport {
            holds: true,
            witness: None,
        })
    }

    /// HPOWER: vertex set `{0,1} x V`, every triangle lifted to all 8 sign
    /// patterns. Vertex `(b, v)` gets index `b * n + v`; color class `c`
    /// lists `(0, V^c_i)` for all `i`, then `(1, V^c_i)`.
    pub fn hpower(&self) -> Result<TwoComplex> {
        let n = self.num_vertices() as u32;
        let labels: Vec<String> = (0..2)
            .flat_map(|b| self.labels.iter().map(move |l| format!("({b},{l})")))
            .collect();
        let mut triangles = Vec::with_capacity(self.triangles.len() * 8);
        for t in &self.triangles {
            for mask in 0..8u32 {
                let lift = |i: usize| t[i] + ((mask >> i) & 1) * n;
                triangles.push([lift(0), lift(1), lift(2)]);
            }
        }
        let out = TwoComplex::new(labels, triangles)?;
        match &self.coloring {
            None => Ok(out),
            Some(col) => {
                let classes = col
                    .classes
                    .iter()
                    .map(|class| {
                        class
                            .iter()
                            .copied()
                            .chain(class.iter().map(|&v| v + n))
                            .collect()
                    })
                    .collect();
                let coloring = Coloring::new(2 * n as usize, classes)?;
                out.with_coloring(coloring)
            }
        }
    }

    /// Removes one triangle; used for fault injection.
    pub fn without_triangle(&self, index: usize) -> Result<TwoComplex> {
        if index >= self.triangles.len() {
            return Err(HdxError::param(format!("no triangle {index}")));
        }
        let mut tris = self.triangles.clone();
        tris.remove(index);
        let mut out = Self::from_sorted(self.labels.clone(), tris);
        out.coloring = self.coloring.clone();
        Ok(out)
    }

    /// Same vertices and coloring, different triangle set.
    pub fn with_triangles(&self, triangles: Vec<Triangle>) -> Result<TwoComplex> {
        let mut out = TwoComplex::new(self.labels.clone(), triangles)?;
        out.coloring = self.coloring.clone();
        Ok(out)
    }

    pub fn to_file(&self) -> ComplexFile {
        ComplexFile {
            vertices: self.labels.clone(),
            triangles: self.triangles.clone(),
            coloring: self.coloring.as_ref().map(|c| ColoringFile {
                chi: c.chi(),
                classes: c
                    .classes
                    .iter()
                    .map(|class| class.iter().map(|&v| self.labels[v as usize].clone()).collect())
                    .collect(),
            }),
        }
    }

    pub fn from_file(file: ComplexFile) -> Result<Self> {
        let complex = TwoComplex::new(file.vertices, file.triangles)?;
        match file.coloring {
            None => Ok(complex),
            Some(cf) => {
                if cf.chi != cf.classes.len() {
                    return Err(HdxError::Parse(format!(
                        "chi = {} but {} color classes",
                        cf.chi,
                        cf.classes.len()
                    )));
                }
                let index: HashMap<&str, u32> = complex
                    .labels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.as_str(), i as u32))
                    .collect();
                let classes = cf
                    .classes
                    .iter()
                    .map(|class| {
                        class
                            .iter()
                            .map(|id| {
                                index.get(id.as_str()).copied().ok_or_else(|| {
                                    HdxError::Parse(format!("colored vertex {id:?} unknown"))
                                })
                            })
                            .collect::<Result<Vec<u32>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let coloring = Coloring::new(complex.num_vertices(), classes)?;
                complex.with_coloring(coloring)
            }
        }
    }

    /// Canonical JSON text (single line, trailing newline).
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(&self.to_file()).expect("complex serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Outcome of [`TwoComplex::regularity`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Regularity {
    Regular(usize),
    Irregular {
        edge: Edge,
        count: usize,
        expected: usize,
    },
    Empty,
}

impl Regularity {
    pub fn degree(&self) -> Option<usize> {
        match self {
            Regularity::Regular(d) => Some(*d),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ColoringReport {
    /// Triangles with a repeated color.
    pub violations: Vec<Triangle>,
    pub connected: bool,
}

impl ColoringReport {
    pub fn is_strong(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct InvReport {
    pub holds: bool,
    /// An edge whose shifted image is missing.
    pub witness: Option<(Edge, Edge)>,
}

/// A vertex link with the complex ids of its vertices.
#[derive(Clone, Debug)]
pub struct LinkGraph {
    pub vertices: Vec<u32>,
    pub graph: WeightedGraph,
}

/// On-disk form of a complex.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexFile {
    pub vertices: Vec<String>,
    pub triangles: Vec<Triangle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coloring: Option<ColoringFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ColoringFile {
    pub chi: usize,
    pub classes: Vec<Vec<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k222() -> TwoComplex {
        // Parts {0,1}, {2,3}, {4,5}.
        let mut tris = Vec::new();
        for a in 0..2 {
            for b in 2..4 {
                for c in 4..6 {
                    tris.push([a, b, c]);
                }
            }
        }
        let col = Coloring::new(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        TwoComplex::with_numeric_labels(6, tris)
            .unwrap()
            .with_coloring(col)
            .unwrap()
    }

    #[test]
    fn edges_of_single_triangle() {
        let c = TwoComplex::with_numeric_labels(3, vec![[2, 0, 1]]).unwrap();
        assert_eq!(c.edges(), &[[0, 1], [0, 2], [1, 2]]);
        assert_eq!(c.regularity(), Regularity::Regular(1));
    }

    #[test]
    fn empty_complex_has_no_edges() {
        let c = TwoComplex::with_numeric_labels(2, vec![]).unwrap();
        assert!(c.edges().is_empty());
        assert_eq!(c.regularity(), Regularity::Empty);
    }

    #[test]
    fn k222_counts() {
        let c = k222();
        assert_eq!(c.edges().len(), 12);
        assert_eq!(c.regularity(), Regularity::Regular(2));
        let rep = c.validate_coloring().unwrap();
        assert!(rep.is_strong() && rep.connected);
        let link = c.link_of(0).unwrap();
        assert_eq!(link.vertices, vec![2, 3, 4, 5]);
        assert_eq!(link.graph.num_edges(), 4);
        assert!(link.graph.degrees().iter().all(|&d| d == 2));
    }

    #[test]
    fn regularity_witness() {
        let c = TwoComplex::with_numeric_labels(4, vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        match c.regularity() {
            Regularity::Irregular {
                edge,
                count,
                expected,
            } => {
                assert_eq!(edge, [0, 2]);
                assert_eq!((count, expected), (1, 2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_coloring_and_disconnection() {
        let col = Coloring::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let c = TwoComplex::with_numeric_labels(3, vec![[0, 1, 2]])
            .unwrap()
            .with_coloring(col)
            .unwrap();
        assert_eq!(c.validate_coloring().unwrap().violations, vec![[0, 1, 2]]);

        let col = Coloring::new(6, vec![vec![0, 3], vec![1, 4], vec![2, 5]]).unwrap();
        let c = TwoComplex::with_numeric_labels(6, vec![[0, 1, 2], [3, 4, 5]])
            .unwrap()
            .with_coloring(col)
            .unwrap();
        let rep = c.validate_coloring().unwrap();
        assert!(rep.is_strong());
        assert!(!rep.connected);
    }

    #[test]
    fn link_of_single_triangle_and_unknown_vertex() {
        let c = TwoComplex::with_numeric_labels(4, vec![[0, 1, 2]]).unwrap();
        let link = c.link_of(0).unwrap();
        assert_eq!(link.vertices, vec![1, 2]);
        assert_eq!(link.graph.num_edges(), 1);
        assert!(c.link_of(3).unwrap().vertices.is_empty());
        assert!(c.link_of(9).is_err());
    }

    #[test]
    fn property_inv() {
        assert!(k222().check_property_inv().unwrap().holds);
        // A path-like skeleton: parts {0,1},{2,3},{4,5} with only triangle 0-2-4.
        let col = Coloring::new(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        let c = TwoComplex::with_numeric_labels(6, vec![[0, 2, 4]])
            .unwrap()
            .with_coloring(col)
            .unwrap();
        let rep = c.check_property_inv().unwrap();
        assert!(!rep.holds);
        assert!(rep.witness.is_some());
        let col = Coloring::new(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        let odd = TwoComplex::with_numeric_labels(3, vec![[0, 1, 2]])
            .unwrap()
            .with_coloring(col)
            .unwrap();
        assert!(matches!(odd.check_property_inv(), Err(HdxError::Infeasible(_))));
    }

    #[test]
    fn hpower_scaling() {
        let a = k222();
        let b = a.hpower().unwrap();
        assert_eq!(b.num_vertices(), 12);
        assert_eq!(b.edges().len(), 48);
        assert_eq!(b.triangles().len(), 64);
        assert_eq!(b.regularity(), Regularity::Regular(4));
        assert!(b.check_property_inv().unwrap().holds);
        assert!(b.validate_coloring().unwrap().is_strong());

        let t = TwoComplex::with_numeric_labels(3, vec![[0, 1, 2]]).unwrap();
        let h = t.hpower().unwrap();
        assert_eq!(h.num_vertices(), 6);
        assert_eq!(h.triangles().len(), 8);
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let c = k222().hpower().unwrap();
        let text = c.to_json();
        let back = TwoComplex::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), text);
        let shuffled = TwoComplex::new(
            c.labels().to_vec(),
            c.triangles().iter().rev().map(|t| [t[2], t[0], t[1]]).collect(),
        )
        .unwrap()
        .with_coloring(c.coloring().unwrap().clone())
        .unwrap();
        assert_eq!(shuffled.to_json(), text);
    }
}
