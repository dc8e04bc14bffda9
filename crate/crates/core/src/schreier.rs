//! Schreier complexes and commutative triplet structures (CTS).
//!
//! A small complex `S` whose vertices are elements of a group `G` acts on
//! `G` by left multiplication; the Schreier complex has the triangles
//! `{a g, b g, c g}` for every triangle `{a, b, c}` of `S` and every `g`.
//! Each edge of `S` is a *type*; the edge `{a g, b g}` is named by its
//! center `g` and type `{a, b}`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::OnceLock;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexes::{Edge, Triangle, TwoComplex};
use crate::error::{HdxError, Result};
use crate::groups::FiniteGroup;
use crate::rng::derive_stream;
use crate::scalar::Scalar;
use crate::spectra::{
    cayley_graph, lambda, replacement_product, walk_graph, zigzag_function, ReplacementProduct,
    SpectralOptions, SpectralReport, WeightedGraph,
};

/// A small complex over group elements.
#[derive(Clone, Debug)]
pub struct ActionComplex {
    group: FiniteGroup,
    elements: Vec<usize>,
    small: TwoComplex,
}

impl ActionComplex {
    /// Builds `S` from triangles given as triples of group elements. Vertex
    /// `i` of the small complex is the `i`-th smallest element used.
    pub fn new(group: FiniteGroup, triangles: &[[usize; 3]]) -> Result<Self> {
        let mut elements: Vec<usize> = triangles.iter().flatten().copied().collect();
        elements.sort_unstable();
        elements.dedup();
        if let Some(&x) = elements.iter().find(|&&x| x >= group.order()) {
            return Err(HdxError::param(format!("element {x} outside the group")));
        }
        let index: HashMap<usize, u32> = elements
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, i as u32))
            .collect();
        let tris: Vec<Triangle> = triangles
            .iter()
            .map(|t| t.map(|x| index[&x]))
            .collect();
        let labels = elements.iter().map(|&x| group.label(x)).collect();
        let small = TwoComplex::new(labels, tris)?;
        Ok(ActionComplex {
            group,
            elements,
            small,
        })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    /// Group element of each small-complex vertex.
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn small(&self) -> &TwoComplex {
        &self.small
    }

    /// Types as pairs of group elements, in small-complex edge order.
    pub fn types(&self) -> Vec<(usize, usize)> {
        self.small
            .edges()
            .iter()
            .map(|e| (self.elements[e[0] as usize], self.elements[e[1] as usize]))
            .collect()
    }

    /// Small-complex triangles as group-element triples.
    pub fn element_triangles(&self) -> Vec<[usize; 3]> {
        self.small
            .triangles()
            .iter()
            .map(|t| t.map(|v| self.elements[v as usize]))
            .collect()
    }
}

/// Face counts of a Schreier complex build.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SchreierStats {
    /// `|S(2)| * |G|`.
    pub images: usize,
    pub distinct: usize,
    /// Images that coincided with an earlier one.
    pub collisions: usize,
}

/// `Sc[S, G]`: vertex set `G` in index order, triangles `{sigma g}`.
pub fn schreier_complex(action: &ActionComplex) -> Result<(TwoComplex, SchreierStats)> {
    let g = &action.group;
    let base = action.element_triangles();
    let mut tris: Vec<Triangle> = Vec::with_capacity(base.len() * g.order());
    for x in 0..g.order() {
        for sigma in &base {
            let img = sigma.map(|s| g.op(s, x) as u32);
            if img[0] == img[1] || img[0] == img[2] || img[1] == img[2] {
                return Err(HdxError::structural(
                    "triangle image collapses",
                    format!("sigma {:?}, g {}", sigma.map(|s| g.label(s)), g.label(x)),
                ));
            }
            tris.push(img);
        }
    }
    let images = tris.len();
    let labels = (0..g.order()).map(|x| g.label(x)).collect();
    let complex = TwoComplex::new(labels, tris)?;
    let distinct = complex.triangles().len();
    Ok((
        complex,
        SchreierStats {
            images,
            distinct,
            collisions: images - distinct,
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Verdict per CTS condition, serialized as
/// `{"0":"pass","A":"pass",...,"d_tilde":2,"witness":{...}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationRecord {
    #[serde(rename = "0")]
    pub no_inverse_edge: Verdict,
    #[serde(rename = "A")]
    pub regular: Verdict,
    #[serde(rename = "B")]
    pub commuting: Verdict,
    #[serde(rename = "C")]
    pub symmetric: Verdict,
    #[serde(rename = "D")]
    pub free_like: Verdict,
    #[serde(rename = "E")]
    pub connected: Verdict,
    pub d_tilde: Option<usize>,
    /// Failure witnesses keyed by condition.
    pub witness: BTreeMap<String, String>,
}

impl ValidationRecord {
    pub fn all_pass(&self) -> bool {
        self.verdicts().iter().all(|(_, v)| v.passed())
    }

    pub fn verdicts(&self) -> [(&'static str, Verdict); 6] {
        [
            ("0", self.no_inverse_edge),
            ("A", self.regular),
            ("B", self.commuting),
            ("C", self.symmetric),
            ("D", self.free_like),
            ("E", self.connected),
        ]
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.verdicts()
            .iter()
            .filter(|(_, v)| !v.passed())
            .map(|(k, _)| *k)
            .collect()
    }
}

/// Checks conditions 0 and A-E on the small complex.
pub fn validate_cts(action: &ActionComplex) -> ValidationRecord {
    let g = &action.group;
    let small = &action.small;
    let lab = |x: usize| g.label(x);
    let elem_index: HashMap<usize, u32> = action
        .elements
        .iter()
        .enumerate()
        .map(|(i, &x)| (x, i as u32))
        .collect();
    let is_type = |a: usize, b: usize| -> bool {
        match (elem_index.get(&a), elem_index.get(&b)) {
            (Some(&i), Some(&j)) => i != j && small.edge_id(i, j).is_some(),
            _ => false,
        }
    };
    let types = action.types();
    let mut witness = BTreeMap::new();

    let mut zero = true;
    for &s in &action.elements {
        let si = g.inv(s);
        if si != s && is_type(s, si) {
            zero = false;
            witness.insert("0".into(), format!("{{{}, {}}} is an edge", lab(s), lab(si)));
            break;
        }
    }

    let regularity = small.regularity();
    let d_tilde = regularity.degree();
    if d_tilde.is_none() {
        witness.insert("A".into(), format!("{regularity:?}"));
    }

    let mut commuting = true;
    for &(a, b) in &types {
        if !g.commute(a, b) {
            commuting = false;
            witness.insert("B".into(), format!("{} and {} do not commute", lab(a), lab(b)));
            break;
        }
    }

    let mut symmetric = true;
    for &(a, b) in &types {
        if !is_type(g.inv(a), g.inv(b)) {
            symmetric = false;
            witness.insert(
                "C".into(),
                format!("{{{}, {}}} has no inverse type", lab(a), lab(b)),
            );
            break;
        }
    }

    let free_like = match condition_d_violation(g, &types) {
        None => true,
        Some(((a, b), (c, d))) => {
            witness.insert(
                "D".into(),
                format!(
                    "({},{}) and ({},{}) share t1*t2^-1 = {}",
                    lab(a),
                    lab(b),
                    lab(c),
                    lab(d),
                    lab(g.div(a, b))
                ),
            );
            false
        }
    };

    let connected = small.is_connected();
    if !connected {
        witness.insert("E".into(), "1-skeleton of S is disconnected".into());
    }

    ValidationRecord {
        no_inverse_edge: Verdict::from_bool(zero),
        regular: Verdict::from_bool(d_tilde.is_some()),
        commuting: Verdict::from_bool(commuting),
        symmetric: Verdict::from_bool(symmetric),
        free_like: Verdict::from_bool(free_like),
        connected: Verdict::from_bool(connected),
        d_tilde,
        witness,
    }
}

/// Condition D over ordered types: `t1 t2^-1 = t1' t2'^-1` with `t != t'`
/// is allowed only for `t' = (t2^-1, t1^-1)`. Returns a violating pair.
pub fn condition_d_violation(
    g: &FiniteGroup,
    types: &[(usize, usize)],
) -> Option<((usize, usize), (usize, usize))> {
    let mut buckets: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for &(a, b) in types {
        for t in [(a, b), (b, a)] {
            buckets.entry(g.div(t.0, t.1)).or_default().push(t);
        }
    }
    let mut keys: Vec<&usize> = buckets.keys().collect();
    keys.sort_unstable();
    for key in keys {
        let bucket = &buckets[key];
        for t in bucket {
            for u in bucket {
                if t != u && !(u.1 == g.inv(t.0) && u.0 == g.inv(t.1)) {
                    return Some((*t, *u));
                }
            }
        }
    }
    None
}

/// One of the two names `(center, type)` of an edge of the big complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgeName {
    pub center: usize,
    /// Index into the type list (small-complex edge order).
    pub type_index: usize,
}

/// Outcome of a pass/fail structural check with an optional witness.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub passed: bool,
    pub witness: Option<String>,
}

impl CheckOutcome {
    fn pass() -> Self {
        CheckOutcome {
            passed: true,
            witness: None,
        }
    }

    fn fail(witness: String) -> Self {
        CheckOutcome {
            passed: false,
            witness: Some(witness),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LiftOptions {
    /// Check every vertex up to this many replacement-product vertices.
    pub exhaustive_cap: usize,
    /// Fraction of vertices checked above the cap.
    pub sample_fraction: f64,
    pub seed: u64,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            exhaustive_cap: 50_000,
            sample_fraction: 0.1,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftReport {
    pub passed: bool,
    pub rep_vertices: usize,
    pub walk_vertices: usize,
    pub checked_vertices: usize,
    pub exhaustive: bool,
    /// Every edge has exactly two preimages under `E`.
    pub two_to_one: bool,
    pub witness: Option<String>,
}

/// Both bound forms of the zig-zag argument for one instance.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck<T> {
    pub walk: SpectralReport<T>,
    pub zigzag: SpectralReport<T>,
    pub dual: SpectralReport<T>,
    pub cloud: SpectralReport<T>,
    /// `sqrt(1/2 + 1/2 lambda_abs(G_dual zz L))`.
    pub bound: T,
    /// `sqrt(1/2 + 1/2 f(lambda_abs(G_dual), lambda_abs(L)))`.
    pub corollary_bound: T,
    /// `bound - lambda_abs(walk)`.
    pub margin: T,
    pub holds: bool,
    pub tolerance: T,
    /// Component counts of `G_dual` and `G_walk`. When above one, every
    /// spectrum above is taken on the component of the identity; the
    /// components are translates of each other.
    pub dual_components: usize,
    pub walk_components: usize,
}

/// Link of the identity, `{x y^-1}` with edges `{a c^-1, b c^-1}`.
#[derive(Clone, Debug)]
pub struct TypeLink {
    /// Group element of each link vertex.
    pub vertices: Vec<usize>,
    pub graph: WeightedGraph,
}

/// A Schreier complex over a group with its CTS validation and derived
/// graphs.
#[derive(Debug)]
pub struct CtsInstance {
    action: ActionComplex,
    record: ValidationRecord,
    types: Vec<(usize, usize)>,
    inverse_type: Vec<usize>,
    hat: Vec<usize>,
    complex: OnceLock<(TwoComplex, SchreierStats)>,
}

impl CtsInstance {
    /// Validates the action complex; the big complex is built lazily.
    pub fn new(action: ActionComplex) -> Self {
        let record = validate_cts(&action);
        let types = action.types();
        let g = &action.group;
        let index: HashMap<(usize, usize), usize> = types
            .iter()
            .enumerate()
            .flat_map(|(i, &(a, b))| [((a, b), i), ((b, a), i)])
            .collect();
        let (inverse_type, hat) = if record.commuting.passed() && record.symmetric.passed() {
            (
                types
                    .iter()
                    .map(|&(a, b)| index[&(g.inv(a), g.inv(b))])
                    .collect(),
                types.iter().map(|&(a, b)| g.op(a, b)).collect(),
            )
        } else {
            (Vec::new(), Vec::new())
        };
        CtsInstance {
            action,
            record,
            types,
            inverse_type,
            hat,
            complex: OnceLock::new(),
        }
    }

    /// Replaces the big complex, e.g. with one read from disk.
    pub fn with_complex(self, complex: TwoComplex) -> Result<Self> {
        if complex.num_vertices() != self.group().order() {
            return Err(HdxError::param(format!(
                "complex has {} vertices, group has {} elements",
                complex.num_vertices(),
                self.group().order()
            )));
        }
        let stats = SchreierStats {
            images: self.action.small.triangles().len() * self.group().order(),
            distinct: complex.triangles().len(),
            collisions: 0,
        };
        let cell = OnceLock::new();
        let _ = cell.set((complex, stats));
        Ok(CtsInstance {
            complex: cell,
            ..self
        })
    }

    pub fn action(&self) -> &ActionComplex {
        &self.action
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.action.group
    }

    pub fn record(&self) -> &ValidationRecord {
        &self.record
    }

    pub fn d_tilde(&self) -> Option<usize> {
        self.record.d_tilde
    }

    pub fn types(&self) -> &[(usize, usize)] {
        &self.types
    }

    pub fn require_valid(&self) -> Result<()> {
        if self.record.all_pass() {
            Ok(())
        } else {
            Err(HdxError::State(format!(
                "CTS conditions failed: {}",
                self.record.failed().join(", ")
            )))
        }
    }

    /// The big complex `C = Sc[S, G]`.
    pub fn complex(&self) -> Result<&TwoComplex> {
        if let Some((c, _)) = self.complex.get() {
            return Ok(c);
        }
        let built = schreier_complex(&self.action)?;
        Ok(&self.complex.get_or_init(|| built).0)
    }

    pub fn stats(&self) -> Result<SchreierStats> {
        self.complex()?;
        Ok(self.complex.get().expect("built").1)
    }

    /// Index of the type `{a^-1, b^-1}`.
    pub fn inverse_type(&self, t: usize) -> Result<usize> {
        self.require_valid()?;
        Ok(self.inverse_type[t])
    }

    /// `tau^ = t1 t2`; the hat product `tau^ g`.
    pub fn hat(&self, t: usize) -> Result<usize> {
        self.require_valid()?;
        Ok(self.hat[t])
    }

    /// `E(g, tau) = {t1 g, t2 g}` as sorted vertex ids.
    pub fn edge_of(&self, center: usize, t: usize) -> Edge {
        let g = self.group();
        let (a, b) = self.types[t];
        let (x, y) = (g.op(a, center) as u32, g.op(b, center) as u32);
        if x < y {
            [x, y]
        } else {
            [y, x]
        }
    }

    /// All names `(g, tau)` with `E(g, tau)` equal to the edge.
    pub fn centers_of(&self, edge: Edge) -> Result<Vec<EdgeName>> {
        self.require_valid()?;
        let complex = self.complex()?;
        if complex.edge_id(edge[0], edge[1]).is_none() {
            return Err(HdxError::param(format!("{edge:?} is not an edge of the complex")));
        }
        let g = self.group();
        let mut names = Vec::new();
        for (t, &(a, b)) in self.types.iter().enumerate() {
            let ai = g.inv(a);
            for (x, y) in [(edge[0], edge[1]), (edge[1], edge[0])] {
                let center = g.op(ai, x as usize);
                if g.op(b, center) == y as usize {
                    names.push(EdgeName {
                        center,
                        type_index: t,
                    });
                }
            }
        }
        names.sort_unstable();
        names.dedup();
        Ok(names)
    }

    /// Number of names landing on each edge of the complex, and the first
    /// name whose image is not an edge.
    fn name_counts(&self) -> Result<(Vec<usize>, Option<EdgeName>)> {
        let complex = self.complex()?;
        let mut counts = vec![0usize; complex.edges().len()];
        let mut stray = None;
        for center in 0..self.group().order() {
            for t in 0..self.types.len() {
                let e = self.edge_of(center, t);
                match complex.edge_id(e[0], e[1]) {
                    Some(i) => counts[i] += 1,
                    None => {
                        stray.get_or_insert(EdgeName {
                            center,
                            type_index: t,
                        });
                    }
                }
            }
        }
        Ok((counts, stray))
    }

    /// Every edge of the complex has exactly two names, and every name is
    /// an edge.
    pub fn check_two_centers(&self) -> Result<CheckOutcome> {
        self.require_valid()?;
        let complex = self.complex()?;
        let (counts, stray) = self.name_counts()?;
        if let Some(name) = stray {
            let e = self.edge_of(name.center, name.type_index);
            return Ok(CheckOutcome::fail(format!(
                "E({}, type {}) = {{{}, {}}} is not an edge",
                self.group().label(name.center),
                name.type_index,
                complex.label(e[0]),
                complex.label(e[1])
            )));
        }
        if let Some(i) = counts.iter().position(|&c| c != 2) {
            let e = complex.edges()[i];
            return Ok(CheckOutcome::fail(format!(
                "edge {{{}, {}}} has {} centers",
                complex.label(e[0]),
                complex.label(e[1]),
                counts[i]
            )));
        }
        Ok(CheckOutcome::pass())
    }

    /// `G_dual = Cay(G, {t1 t2})`.
    pub fn dual_graph(&self) -> Result<WeightedGraph> {
        self.require_valid()?;
        cayley_graph(self.group(), &self.hat)
    }

    /// `L`: the walk graph of the small complex, on types.
    pub fn type_graph(&self) -> Result<WeightedGraph> {
        walk_graph(&self.action.small)
    }

    /// Blue rotation `(g, tau) -> (tau^ g, tau^-1)`.
    pub fn rotation_map(&self) -> Result<Vec<(u32, u32)>> {
        self.require_valid()?;
        let g = self.group();
        let k = self.types.len();
        let mut rot = Vec::with_capacity(g.order() * k);
        for x in 0..g.order() {
            for t in 0..k {
                rot.push((g.op(self.hat[t], x) as u32, self.inverse_type[t] as u32));
            }
        }
        Ok(rot)
    }

    /// `G_rep = G_dual (r) L` with ports `phi_g(tau) = tau^ g`.
    pub fn replacement(&self) -> Result<ReplacementProduct> {
        replacement_product(&self.dual_graph()?, &self.type_graph()?, &self.rotation_map()?)
    }

    /// Walk graph of the big complex.
    pub fn walk_graph(&self) -> Result<WeightedGraph> {
        walk_graph(self.complex()?)
    }

    /// Lift check with the instance's own rotation map.
    pub fn verify_lift(&self, opts: &LiftOptions) -> Result<LiftReport> {
        let rot = self.rotation_map()?;
        self.verify_lift_with_rotation(&rot, opts)
    }

    /// For every checked vertex `(g, tau)`, `E` must map its neighbourhood
    /// (red steps, and blue-then-red steps) bijectively onto the walk-graph
    /// neighbourhood of `E(g, tau)`. Also checks that `E` is 2-to-1.
    pub fn verify_lift_with_rotation(
        &self,
        rotation: &[(u32, u32)],
        opts: &LiftOptions,
    ) -> Result<LiftReport> {
        self.require_valid()?;
        let complex = self.complex()?;
        let walk = walk_graph(complex)?;
        let cloud = self.type_graph()?;
        let k = self.types.len();
        let n = self.group().order() * k;
        if rotation.len() != n {
            return Err(HdxError::param("rotation map has the wrong length"));
        }
        let (counts, stray) = self.name_counts()?;
        let two_to_one = stray.is_none() && counts.iter().all(|&c| c == 2);

        let exhaustive = n <= opts.exhaustive_cap;
        let vertices: Vec<usize> = if exhaustive {
            (0..n).collect()
        } else {
            let amount = ((n as f64 * opts.sample_fraction).ceil() as usize).clamp(1, n);
            let mut rng = derive_stream(opts.seed, "lift-sample");
            let mut v = sample(&mut rng, n, amount).into_vec();
            v.sort_unstable();
            v
        };

        let edge_id = |x: usize| -> Option<usize> {
            let e = self.edge_of(x / k, x % k);
            complex.edge_id(e[0], e[1])
        };
        let check = |x: usize| -> Option<String> {
            let Some(target) = edge_id(x) else {
                return Some(format!("E{:?} is not an edge", (x / k, x % k)));
            };
            let mut image = Vec::with_capacity(4 * k);
            let (g, t) = (x / k, x % k);
            for (s, w) in cloud.neighbors(t) {
                let y = g * k + s as usize;
                image.extend(std::iter::repeat_n(edge_id(y), w as usize));
            }
            let (u, s) = rotation[x];
            for (r, w) in cloud.neighbors(s as usize) {
                let y = u as usize * k + r as usize;
                image.extend(std::iter::repeat_n(edge_id(y), w as usize));
            }
            let Some(mut image) = image.into_iter().collect::<Option<Vec<usize>>>() else {
                return Some(format!("a neighbour of {:?} maps outside the complex", (g, t)));
            };
            image.sort_unstable();
            let expected: Vec<usize> = walk
                .neighbor_multiset(target)
                .into_iter()
                .map(|v| v as usize)
                .collect();
            if image != expected {
                let lab = self.group().label(g);
                return Some(format!(
                    "neighbourhood of ({lab}, type {t}) maps to {} edges, walk graph has {}",
                    image.len(),
                    expected.len()
                ));
            }
            None
        };
        let failure = vertices.par_iter().find_map_first(|&x| check(x));
        let witness = failure.or_else(|| {
            (!two_to_one).then(|| "E is not 2-to-1 onto the edges".to_string())
        });
        Ok(LiftReport {
            passed: witness.is_none() && n == 2 * walk.num_vertices(),
            rep_vertices: n,
            walk_vertices: walk.num_vertices(),
            checked_vertices: vertices.len(),
            exhaustive,
            two_to_one,
            witness,
        })
    }

    /// Walk spectrum against both bound forms. A disconnected instance is
    /// measured on the component of the identity.
    pub fn bound_check<T: Scalar>(&self, opts: &SpectralOptions<T>) -> Result<BoundCheck<T>> {
        self.require_valid()?;
        let g = self.group();
        let cloud_graph = self.type_graph()?;
        let cloud = lambda(&cloud_graph, opts)?;
        let dual_full = self.dual_graph()?;
        let walk_full = self.walk_graph()?;
        let (dual_components, _) = dual_full.components();
        let (walk_components, _) = walk_full.components();
        let (walk, zigzag, dual) = if dual_components == 1 && walk_components == 1 {
            let rep = self.replacement()?;
            (
                lambda(&walk_full, opts)?,
                rep.zigzag_lambda(opts)?,
                lambda(&dual_full, opts)?,
            )
        } else {
            let keep = dual_full.component_of(g.identity());
            let mut index = vec![u32::MAX; g.order()];
            for (i, &x) in keep.iter().enumerate() {
                index[x] = i as u32;
            }
            let k = self.types.len();
            let mut rot = Vec::with_capacity(keep.len() * k);
            for &x in &keep {
                for t in 0..k {
                    rot.push((index[g.op(self.hat[t], x)], self.inverse_type[t] as u32));
                }
            }
            let dual_graph = dual_full.induced(&keep)?;
            let rep = replacement_product(&dual_graph, &cloud_graph, &rot)?;
            let e = self.edge_of(g.identity(), 0);
            let start = self
                .complex()?
                .edge_id(e[0], e[1])
                .ok_or_else(|| HdxError::structural("E(e, type 0) is not an edge", format!("{e:?}")))?;
            let walk_graph = walk_full.induced(&walk_full.component_of(start))?;
            (
                lambda(&walk_graph, opts)?,
                rep.zigzag_lambda(opts)?,
                lambda(&dual_graph, opts)?,
            )
        };
        let mut b = assemble_bound(walk, zigzag, dual, cloud, opts.tol);
        b.dual_components = dual_components;
        b.walk_components = walk_components;
        Ok(b)
    }

    /// The identity's link from types alone.
    pub fn link_graph(&self) -> Result<TypeLink> {
        let g = self.group();
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for t in self.action.element_triangles() {
            for (i, &c) in t.iter().enumerate() {
                let others: Vec<usize> = (0..3).filter(|&j| j != i).map(|j| t[j]).collect();
                let x = g.div(others[0], c);
                let y = g.div(others[1], c);
                edges.insert((x.min(y), x.max(y)));
            }
        }
        let mut vertices: Vec<usize> = edges.iter().flat_map(|&(x, y)| [x, y]).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let local: HashMap<usize, usize> = vertices.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let list: Vec<(usize, usize, u32)> = edges.iter().map(|(x, y)| (local[x], local[y], 1)).collect();
        let graph = WeightedGraph::from_edges(vertices.len(), &list)?;
        Ok(TypeLink { vertices, graph })
    }

    /// Checks that `x -> x g` maps the type link isomorphically onto the link
    /// of `g` in the big complex, for each given `g`.
    pub fn check_link_lemma(&self, centers: &[usize]) -> Result<CheckOutcome> {
        let tl = self.link_graph()?;
        let complex = self.complex()?;
        let g = self.group();
        for &x in centers {
            let link = complex.link_of(x as u32)?;
            let mapped: Vec<u32> = tl.vertices.iter().map(|&v| g.op(v, x) as u32).collect();
            let mut sorted = mapped.clone();
            sorted.sort_unstable();
            if sorted != link.vertices {
                return Ok(CheckOutcome::fail(format!(
                    "link of {} has {} vertices, translated type link has {}",
                    g.label(x),
                    link.vertices.len(),
                    tl.vertices.len()
                )));
            }
            let pos: HashMap<u32, usize> =
                link.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let mut ours: Vec<(usize, usize)> = tl
                .graph
                .edges()
                .iter()
                .map(|&(a, b, _)| {
                    let (p, q) = (pos[&mapped[a]], pos[&mapped[b]]);
                    (p.min(q), p.max(q))
                })
                .collect();
            ours.sort_unstable();
            let theirs: Vec<(usize, usize)> =
                link.graph.edges().iter().map(|&(a, b, _)| (a, b)).collect();
            if ours != theirs {
                return Ok(CheckOutcome::fail(format!(
                    "translation does not carry the type link onto the link of {}",
                    g.label(x)
                )));
            }
        }
        Ok(CheckOutcome::pass())
    }
}

pub(crate) fn assemble_bound<T: Scalar>(
    walk: SpectralReport<T>,
    zigzag: SpectralReport<T>,
    dual: SpectralReport<T>,
    cloud: SpectralReport<T>,
    tol: T,
) -> BoundCheck<T> {
    let half = T::lit(0.5);
    let clamp = |x: T| x.max(T::zero()).min(T::one());
    let bound = (half + half * clamp(zigzag.lambda_abs)).sqrt();
    let f = zigzag_function(clamp(dual.lambda_abs), clamp(cloud.lambda_abs))
        .expect("arguments clamped to [0,1]");
    let corollary_bound = (half + half * f).sqrt();
    let margin = bound - walk.lambda_abs;
    BoundCheck {
        holds: walk.lambda_abs <= bound + tol,
        walk,
        zigzag,
        dual,
        cloud,
        bound,
        corollary_bound,
        margin,
        tolerance: tol,
        dual_components: 1,
        walk_components: 1,
    }
}
