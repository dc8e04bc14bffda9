//! Concrete instances (Conlon, 3-product, complete multipartite bases) and
//! certificates for face transitivity and link isomorphism.

use std::collections::{BTreeMap, HashSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rayon::prelude::*;
use serde::Serialize;

use crate::complexes::{Coloring, Triangle, TwoComplex};
use crate::error::{HdxError, Result};
use crate::groups::{FiniteGroup, GroupDescriptor};
use crate::iso::{canonical_form, find_isomorphism, CanonicalForm, IsoOutcome};
use crate::rng::derive_stream;
use crate::scalar::Scalar;
use crate::schreier::{ActionComplex, CtsInstance};
use crate::spectra::{cayley_graph, lambda, zigzag_function, SpectralOptions, WeightedGraph};

/// A subset of `F_2^t` (elements as bit masks) whose pairwise sums are
/// distinct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SidonSet {
    t: u32,
    elements: Vec<usize>,
}

/// Exhaustive quadruple check: `a + b = c + d` only when `{a, b} = {c, d}`.
pub fn is_sidon(elements: &[usize]) -> bool {
    let mut sums = HashSet::new();
    for (i, &a) in elements.iter().enumerate() {
        if a == 0 || elements[..i].contains(&a) {
            return false;
        }
        for &b in &elements[..i] {
            if !sums.insert(a ^ b) {
                return false;
            }
        }
    }
    true
}

impl SidonSet {
    pub fn new(t: u32, elements: Vec<usize>) -> Result<Self> {
        if let Some(&x) = elements.iter().find(|&&x| x >> t != 0) {
            return Err(HdxError::param(format!("{x} is not in F_2^{t}")));
        }
        if !is_sidon(&elements) {
            return Err(HdxError::param("set has a nontrivial solution of a+b=c+d"));
        }
        Ok(Self { t, elements })
    }

    pub fn dimension(&self) -> u32 {
        self.t
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

const SIDON_ATTEMPTS: usize = 64;

/// Greedy search over a seeded shuffle of the nonzero vectors, retried with
/// fresh orders.
pub fn find_sidon_set(t: u32, size: usize, seed: u64) -> Result<SidonSet> {
    if !(1..=20).contains(&t) {
        return Err(HdxError::param(format!("dimension t = {t} out of range 1..=20")));
    }
    let nonzero = (1usize << t) - 1;
    if size > nonzero {
        return Err(HdxError::infeasible(format!(
            "F_2^{t} has only {nonzero} nonzero elements, {size} requested"
        )));
    }
    for attempt in 0..SIDON_ATTEMPTS {
        let mut rng = derive_stream(seed, &format!("sidon/{t}/{size}/{attempt}"));
        let mut order: Vec<usize> = (1..=nonzero).collect();
        order.shuffle(&mut rng);
        let mut chosen: Vec<usize> = Vec::with_capacity(size);
        let mut sums: HashSet<usize> = HashSet::new();
        for x in order {
            if chosen.len() == size {
                break;
            }
            let new: Vec<usize> = chosen.iter().map(|&a| a ^ x).collect();
            let distinct: HashSet<usize> = new.iter().copied().collect();
            if distinct.len() == new.len() && new.iter().all(|s| !sums.contains(s)) {
                sums.extend(new);
                chosen.push(x);
            }
        }
        if chosen.len() == size {
            chosen.sort_unstable();
            return SidonSet::new(t, chosen);
        }
    }
    Err(HdxError::infeasible(format!(
        "no Sidon set of size {size} in F_2^{t} found in {SIDON_ATTEMPTS} greedy attempts"
    )))
}

/// Conlon complex: all 3-subsets of `elements` acting on `F_2^t`. The record
/// is not required to pass, so a non-Sidon set shows up as a condition D
/// failure.
pub fn build_conlon(t: u32, elements: &[usize]) -> Result<CtsInstance> {
    if elements.len() < 3 {
        return Err(HdxError::param("Conlon needs at least 3 elements"));
    }
    let group = FiniteGroup::new(&GroupDescriptor::BooleanVector { t })?;
    if let Some(&x) = elements.iter().find(|&&x| x >= group.order()) {
        return Err(HdxError::param(format!("{x} is not in F_2^{t}")));
    }
    let mut triangles = Vec::new();
    for i in 0..elements.len() {
        for j in i + 1..elements.len() {
            for k in j + 1..elements.len() {
                triangles.push([elements[i], elements[j], elements[k]]);
            }
        }
    }
    Ok(CtsInstance::new(ActionComplex::new(group, &triangles)?))
}

/// Reference curve `sqrt(3)/2 + lambda^2 / (2 sqrt(3))` for Conlon complexes.
/// The unquantified lower-order term means this is compared, never asserted.
pub fn conlon_reference<T: Scalar>(lambda: T) -> T {
    let s3 = T::lit(3.0).sqrt();
    s3 / T::lit(2.0) + lambda * lambda / (T::lit(2.0) * s3)
}

/// A 3-product instance and its corollary bound.
#[derive(Debug)]
pub struct ThreeProduct<T> {
    pub instance: CtsInstance,
    /// `max_i lambda_signed(Cay(G_i, S_i))`.
    pub lambda3: T,
    /// `sqrt(1/2 + 1/2 f((1 + 2 lambda3) / 3, 1/2))`.
    pub corollary_bound: T,
    pub collisions: usize,
    /// False when triangle images collide.
    pub conforming: bool,
}

/// Triangles `{s1, s2, s3}` with `s_i` in `S_i`, placed in coordinate `i`.
pub fn build_three_product<T: Scalar>(
    groups: [&FiniteGroup; 3],
    sets: [&[usize]; 3],
    opts: &SpectralOptions<T>,
) -> Result<ThreeProduct<T>> {
    let d = sets[0].len();
    let order = groups[0].order();
    for i in 0..3 {
        let (g, s) = (groups[i], sets[i]);
        if s.len() != d {
            return Err(HdxError::param(format!(
                "S_{} has {} elements, S_1 has {d}",
                i + 1,
                s.len()
            )));
        }
        if g.order() != order {
            return Err(HdxError::param(format!(
                "|G_{}| = {} differs from |G_1| = {order}",
                i + 1,
                g.order()
            )));
        }
        let set: HashSet<usize> = s.iter().copied().collect();
        if set.len() != s.len() || set.contains(&g.identity()) {
            return Err(HdxError::param(format!(
                "S_{} must be distinct non-identity elements",
                i + 1
            )));
        }
        if let Some(&x) = s.iter().find(|&&x| !set.contains(&g.inv(x))) {
            return Err(HdxError::param(format!(
                "S_{} is not symmetric: {} lacks its inverse",
                i + 1,
                g.label(x)
            )));
        }
    }
    let product = FiniteGroup::product(&[groups[0].clone(), groups[1].clone(), groups[2].clone()])?;
    let mut triangles = Vec::with_capacity(d * d * d);
    for &a in sets[0] {
        for &b in sets[1] {
            for &c in sets[2] {
                triangles.push([product.embed(0, a), product.embed(1, b), product.embed(2, c)]);
            }
        }
    }
    let instance = CtsInstance::new(ActionComplex::new(product, &triangles)?);
    instance.require_valid()?;
    let collisions = instance.stats()?.collisions;
    let lambda3 = (0..3)
        .map(|i| Ok(lambda(&cayley_graph(groups[i], sets[i])?, opts)?.lambda_signed))
        .collect::<Result<Vec<T>>>()?
        .into_iter()
        .fold(T::neg_infinity(), T::max);
    let a = (T::one() + T::lit(2.0) * lambda3) / T::lit(3.0);
    let f = zigzag_function(a.max(T::zero()).min(T::one()), T::lit(0.5))?;
    Ok(ThreeProduct {
        instance,
        lambda3,
        corollary_bound: (T::lit(0.5) + T::lit(0.5) * f).sqrt(),
        collisions,
        conforming: collisions == 0,
    })
}

/// All polychromatic triangles over `chi` parts of size `n`. Vertex
/// `V{c}_{i}` has index `c n + i`.
pub fn complete_multipartite_base(chi: usize, n: usize) -> Result<TwoComplex> {
    if chi < 3 || n < 1 {
        return Err(HdxError::param(format!("need chi >= 3 and n >= 1, got {chi}, {n}")));
    }
    let id = |c: usize, i: usize| (c * n + i) as u32;
    let labels = (0..chi)
        .flat_map(|c| (0..n).map(move |i| format!("V{c}_{i}")))
        .collect();
    let mut triangles = Vec::new();
    for a in 0..chi {
        for b in a + 1..chi {
            for c in b + 1..chi {
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            triangles.push([id(a, i), id(b, j), id(c, k)]);
                        }
                    }
                }
            }
        }
    }
    let classes = (0..chi)
        .map(|c| (0..n).map(|i| id(c, i)).collect())
        .collect();
    TwoComplex::new(labels, triangles)?.with_coloring(Coloring::new(chi * n, classes)?)
}

/// A vertex permutation of the big complex with a readable origin.
#[derive(Clone, Debug, Serialize)]
pub struct NamedMap {
    pub name: String,
    #[serde(skip)]
    pub perm: Vec<u32>,
}

/// Generating maps found for an instance.
#[derive(Clone, Debug, Serialize)]
pub struct AutomorphismFamily {
    pub maps: Vec<NamedMap>,
}

impl AutomorphismFamily {
    /// `maps[i]` after `maps[j]`.
    pub fn compose(&self, i: usize, j: usize) -> Vec<u32> {
        let (a, b) = (&self.maps[i].perm, &self.maps[j].perm);
        b.iter().map(|&x| a[x as usize]).collect()
    }
}

/// The first triangle whose image under `perm` is not a triangle.
pub fn face_preservation_witness(complex: &TwoComplex, perm: &[u32]) -> Option<Triangle> {
    complex
        .triangles()
        .par_iter()
        .find_first(|t| !complex.has_triangle(t.map(|v| perm[v as usize])))
        .copied()
}

/// Orbit sizes per face dimension, largest first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitSizes {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub triangles: Vec<usize>,
}

impl OrbitSizes {
    pub fn transitive(&self) -> bool {
        self.vertices.len() == 1 && self.edges.len() == 1 && self.triangles.len() == 1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitivityCertificate {
    pub transitive: bool,
    pub orbit_sizes: OrbitSizes,
    pub maps: Vec<String>,
    /// An isomorphism invariant that separates faces of one dimension, which
    /// proves no automorphism family can be transitive there.
    pub obstruction: Option<String>,
    /// Orbits of the full automorphism group, for small complexes.
    pub brute_force: Option<OrbitSizes>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    fn class_sizes(&mut self) -> Vec<usize> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for x in 0..self.0.len() {
            *counts.entry(self.find(x)).or_default() += 1;
        }
        let mut sizes: Vec<usize> = counts.into_values().collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

fn triangle_index(complex: &TwoComplex, t: Triangle) -> Option<usize> {
    let mut s = t;
    s.sort_unstable();
    complex.triangles().binary_search(&s).ok()
}

fn orbits_under(complex: &TwoComplex, perms: &[&[u32]]) -> OrbitSizes {
    let mut v = UnionFind::new(complex.num_vertices());
    let mut e = UnionFind::new(complex.edges().len());
    let mut t = UnionFind::new(complex.triangles().len());
    for p in perms {
        for x in 0..complex.num_vertices() {
            v.union(x, p[x] as usize);
        }
        for (i, ed) in complex.edges().iter().enumerate() {
            if let Some(j) = complex.edge_id(p[ed[0] as usize], p[ed[1] as usize]) {
                e.union(i, j);
            }
        }
        for (i, tr) in complex.triangles().iter().enumerate() {
            if let Some(j) = triangle_index(complex, tr.map(|x| p[x as usize])) {
                t.union(i, j);
            }
        }
    }
    OrbitSizes {
        vertices: v.class_sizes(),
        edges: e.class_sizes(),
        triangles: t.class_sizes(),
    }
}

/// Automorphisms of a single (non-product) group that are worth trying.
fn component_automorphisms(g: &FiniteGroup, small_elements: &[usize]) -> Vec<(String, Vec<usize>)> {
    let n = g.order();
    let mut out = Vec::new();
    if let Some(units) = g.cyclic_units() {
        for u in units.into_iter().filter(|&u| u != 1) {
            out.push((format!("x -> {u}x"), (0..n).map(|x| (u * x) % n).collect()));
        }
    } else if let Some(t) = g.boolean_dimension() {
        out.extend(boolean_extensions(t, small_elements));
    } else if matches!(g.descriptor(), GroupDescriptor::SpecialLinear { .. }) {
        for h in g.generators() {
            let hi = g.inv(h);
            out.push((
                format!("conjugation by {}", g.label(h)),
                (0..n).map(|x| g.op(g.op(h, x), hi)).collect(),
            ));
        }
    }
    out
}

/// Linear maps of `F_2^t` that permute `elements`, for permutations small
/// enough to enumerate (all of them up to 7 elements, transpositions above).
fn boolean_extensions(t: u32, elements: &[usize]) -> Vec<(String, Vec<usize>)> {
    let k = elements.len();
    let perms: Vec<Vec<usize>> = if k <= 7 {
        permutations(k)
    } else {
        let mut v = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                let mut p: Vec<usize> = (0..k).collect();
                p.swap(i, j);
                v.push(p);
            }
        }
        v
    };
    let mut out = Vec::new();
    for p in perms {
        if p.iter().enumerate().all(|(i, &x)| i == x) {
            continue;
        }
        let images: Vec<usize> = p.iter().map(|&j| elements[j]).collect();
        if let Some(map) = linear_extension(t, elements, &images) {
            out.push((format!("linear map permuting S by {p:?}"), map));
        }
    }
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..k).collect();
    fn rec(p: &mut Vec<usize>, i: usize, out: &mut Vec<Vec<usize>>) {
        if i == p.len() {
            out.push(p.clone());
            return;
        }
        for j in i..p.len() {
            p.swap(i, j);
            rec(p, i + 1, out);
            p.swap(i, j);
        }
    }
    rec(&mut p, 0, &mut out);
    out
}

/// The invertible linear map with `src[i] -> dst[i]` that fixes a complement
/// of `span(src)`, when one exists.
fn linear_extension(t: u32, src: &[usize], dst: &[usize]) -> Option<Vec<usize>> {
    // Echelon rows (vector, image), sorted by descending pivot.
    fn reduce(rows: &[(usize, usize)], mut x: usize, mut y: usize) -> (usize, usize) {
        for &(r, d) in rows {
            if x ^ r < x {
                x ^= r;
                y ^= d;
            }
        }
        (x, y)
    }
    fn insert(rows: &mut Vec<(usize, usize)>, row: (usize, usize)) {
        rows.push(row);
        rows.sort_unstable_by_key(|r| std::cmp::Reverse(r.0));
    }
    let mut rows: Vec<(usize, usize)> = Vec::new();
    for (&s, &d) in src.iter().zip(dst) {
        match reduce(&rows, s, d) {
            (0, 0) => {}
            (0, _) => return None,
            row => insert(&mut rows, row),
        }
    }
    for i in 0..t {
        let e = 1usize << i;
        let row = reduce(&rows, e, e);
        if row.0 != 0 {
            insert(&mut rows, row);
        }
    }
    let n = 1usize << t;
    let map: Vec<usize> = (0..n).map(|x| reduce(&rows, x, 0).1).collect();
    let mut seen = vec![false; n];
    for &y in &map {
        if std::mem::replace(&mut seen[y], true) {
            return None;
        }
    }
    Some(map)
}

/// Candidate group automorphisms of the acting group.
fn group_automorphisms(g: &FiniteGroup, small_elements: &[usize]) -> Vec<(String, Vec<usize>)> {
    let Some(components) = g.components() else {
        return component_automorphisms(g, small_elements);
    };
    let mut out = Vec::new();
    for (c, comp) in components.iter().enumerate() {
        let local: Vec<usize> = small_elements
            .iter()
            .filter(|&&x| g.support(x) == [c])
            .map(|&x| g.project(x, c))
            .collect();
        for (name, perm) in component_automorphisms(comp, &local) {
            let full = (0..g.order())
                .map(|x| {
                    let mut parts = g.decode(x);
                    parts[c] = perm[parts[c]];
                    g.encode(&parts).expect("decoded parts are in range")
                })
                .collect();
            out.push((format!("{name} on coordinate {c}"), full));
        }
    }
    for a in 0..components.len() {
        for b in a + 1..components.len() {
            if components[a].descriptor() == components[b].descriptor() {
                let full = (0..g.order())
                    .map(|x| {
                        let mut parts = g.decode(x);
                        parts.swap(a, b);
                        g.encode(&parts).expect("decoded parts are in range")
                    })
                    .collect();
                out.push((format!("swap coordinates {a} and {b}"), full));
            }
        }
    }
    out
}

fn small_triangle_set(action: &ActionComplex) -> HashSet<[usize; 3]> {
    action
        .element_triangles()
        .into_iter()
        .map(|mut t| {
            t.sort_unstable();
            t
        })
        .collect()
}

/// Whether `tri` equals `{a h, b h, c h}` for a small triangle `{a, b, c}`.
fn is_small_translate(g: &FiniteGroup, small: &HashSet<[usize; 3]>, tri: [usize; 3]) -> bool {
    small.iter().any(|t| {
        tri.iter().any(|&x| {
            let h = g.op(g.inv(t[0]), x);
            let mut img = t.map(|a| g.op(a, h));
            img.sort_unstable();
            img == tri
        })
    })
}

/// Right translations `x -> x h` over group generators, plus group
/// automorphisms sending every small triangle to a translate of a small
/// triangle. Those are exactly the group automorphisms of the big complex.
pub fn automorphism_family(instance: &CtsInstance) -> AutomorphismFamily {
    let g = instance.group();
    let n = g.order();
    let mut maps: Vec<NamedMap> = g
        .generators()
        .into_iter()
        .map(|h| NamedMap {
            name: format!("translation by {}", g.label(h)),
            perm: (0..n).map(|x| g.op(x, h) as u32).collect(),
        })
        .collect();
    let small = small_triangle_set(instance.action());
    for (name, perm) in group_automorphisms(g, instance.action().elements()) {
        let keeps = small.iter().all(|t| {
            let mut img = t.map(|x| perm[x]);
            img.sort_unstable();
            small.contains(&img) || is_small_translate(g, &small, img)
        });
        if keeps {
            maps.push(NamedMap {
                name,
                perm: perm.into_iter().map(|x| x as u32).collect(),
            });
        }
    }
    AutomorphismFamily { maps }
}

/// Sorted common-neighbor counts over the 1-skeleton, per face dimension.
fn invariant_obstruction(complex: &TwoComplex) -> Option<String> {
    let n = complex.num_vertices();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for e in complex.edges() {
        adj[e[0] as usize].push(e[1]);
        adj[e[1] as usize].push(e[0]);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    let counts = complex.vertex_triangle_counts();
    let vinv: HashSet<(usize, usize)> = (0..n).map(|v| (adj[v].len(), counts[v])).collect();
    if vinv.len() > 1 {
        return Some(format!("vertex (degree, triangle count) takes {} values", vinv.len()));
    }
    let common = |a: u32, b: u32| {
        let (x, y) = (&adj[a as usize], &adj[b as usize]);
        let (mut i, mut j, mut c) = (0, 0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    c += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        c
    };
    let per_edge: Vec<usize> = complex
        .edges()
        .par_iter()
        .map(|e| common(e[0], e[1]))
        .collect();
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &per_edge {
        *hist.entry(c).or_default() += 1;
    }
    if hist.len() > 1 {
        return Some(format!(
            "edge common-neighbor count histogram {hist:?} is not constant"
        ));
    }
    None
}

/// Builds the automorphism family, checks every map on the big complex and
/// computes face orbits. Complexes up to 60 vertices also get the full
/// automorphism group by exhaustive search.
pub fn certify_transitivity(instance: &CtsInstance) -> Result<(AutomorphismFamily, TransitivityCertificate)> {
    let complex = instance.complex()?;
    let family = automorphism_family(instance);
    for m in &family.maps {
        if let Some(t) = face_preservation_witness(complex, &m.perm) {
            return Err(HdxError::structural(
                format!("map '{}' does not preserve triangles", m.name),
                format!(
                    "triangle {:?} maps to non-triangle {:?}",
                    t.map(|v| complex.label(v).to_string()),
                    t.map(|v| complex.label(m.perm[v as usize]).to_string())
                ),
            ));
        }
    }
    let perms: Vec<&[u32]> = family.maps.iter().map(|m| m.perm.as_slice()).collect();
    let orbit_sizes = orbits_under(complex, &perms);
    let obstruction = if orbit_sizes.transitive() {
        None
    } else {
        invariant_obstruction(complex)
    };
    let brute_force = (complex.num_vertices() <= BRUTE_FORCE_VERTICES)
        .then(|| brute_force_orbits(complex, BRUTE_FORCE_BUDGET))
        .flatten();
    let cert = TransitivityCertificate {
        transitive: orbit_sizes.transitive(),
        orbit_sizes,
        maps: family.maps.iter().map(|m| m.name.clone()).collect(),
        obstruction,
        brute_force,
    };
    Ok((family, cert))
}

pub const BRUTE_FORCE_VERTICES: usize = 60;
const BRUTE_FORCE_BUDGET: usize = 5_000_000;

/// Exhaustive search for an automorphism sending the ordered tuple `src` to
/// `dst`. Visits at most `*budget` nodes.
pub fn find_automorphism(
    complex: &TwoComplex,
    src: &[u32],
    dst: &[u32],
    budget: &mut usize,
) -> Option<Option<Vec<u32>>> {
    let n = complex.num_vertices();
    let mut adj: Vec<HashSet<u32>> = vec![HashSet::new(); n];
    for e in complex.edges() {
        adj[e[0] as usize].insert(e[1]);
        adj[e[1] as usize].insert(e[0]);
    }
    let tri_of: Vec<Vec<[u32; 2]>> = {
        let mut v = vec![Vec::new(); n];
        for t in complex.triangles() {
            for i in 0..3 {
                v[t[i] as usize].push([t[(i + 1) % 3], t[(i + 2) % 3]]);
            }
        }
        v
    };
    let counts = complex.vertex_triangle_counts();
    // BFS order from the source tuple.
    let mut order: Vec<u32> = src.to_vec();
    let mut seen = vec![false; n];
    for &s in src {
        seen[s as usize] = true;
    }
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        let mut nb: Vec<u32> = adj[u as usize].iter().copied().collect();
        nb.sort_unstable();
        for v in nb {
            if !seen[v as usize] {
                seen[v as usize] = true;
                order.push(v);
            }
        }
    }
    if order.len() != n {
        return Some(None);
    }
    let mut map = vec![u32::MAX; n];
    let mut used = vec![false; n];
    struct Ctx<'a> {
        complex: &'a TwoComplex,
        adj: &'a [HashSet<u32>],
        tri_of: &'a [Vec<[u32; 2]>],
        counts: &'a [usize],
        order: &'a [u32],
    }
    fn consistent(ctx: &Ctx, map: &[u32], v: u32, img: u32) -> bool {
        if ctx.counts[v as usize] != ctx.counts[img as usize]
            || ctx.adj[v as usize].len() != ctx.adj[img as usize].len()
        {
            return false;
        }
        for &w in ctx.order {
            let mw = map[w as usize];
            if mw == u32::MAX {
                continue;
            }
            if ctx.adj[v as usize].contains(&w) != ctx.adj[img as usize].contains(&mw) {
                return false;
            }
        }
        for pair in &ctx.tri_of[v as usize] {
            let (a, b) = (map[pair[0] as usize], map[pair[1] as usize]);
            if a != u32::MAX && b != u32::MAX && !ctx.complex.has_triangle([img, a, b]) {
                return false;
            }
        }
        true
    }
    fn rec(ctx: &Ctx, depth: usize, map: &mut [u32], used: &mut [bool], budget: &mut usize, fixed: usize) -> Option<bool> {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        if depth == ctx.order.len() {
            return Some(true);
        }
        let v = ctx.order[depth];
        if depth < fixed {
            return rec(ctx, depth + 1, map, used, budget, fixed);
        }
        // Candidates: neighbors of the image of an earlier mapped neighbor.
        let anchor = ctx.order[..depth]
            .iter()
            .find(|&&w| ctx.adj[v as usize].contains(&w))
            .copied()
            .expect("BFS order has a mapped neighbor");
        let mut cands: Vec<u32> = ctx.adj[map[anchor as usize] as usize].iter().copied().collect();
        cands.sort_unstable();
        for c in cands {
            if used[c as usize] || !consistent(ctx, map, v, c) {
                continue;
            }
            map[v as usize] = c;
            used[c as usize] = true;
            match rec(ctx, depth + 1, map, used, budget, fixed) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            map[v as usize] = u32::MAX;
            used[c as usize] = false;
        }
        Some(false)
    }
    let ctx = Ctx {
        complex,
        adj: &adj,
        tri_of: &tri_of,
        counts: &counts,
        order: &order,
    };
    // Seed the fixed tuple, checking it pairwise.
    for (&s, &d) in src.iter().zip(dst) {
        if used[d as usize] || !consistent(&ctx, &map, s, d) {
            return Some(None);
        }
        map[s as usize] = d;
        used[d as usize] = true;
    }
    match rec(&ctx, 0, &mut map, &mut used, budget, src.len())? {
        true => {
            // Equal triangle counts and one-directional preservation make
            // the map a bijection on triangles; confirm anyway.
            let ok = complex
                .triangles()
                .iter()
                .all(|t| complex.has_triangle(t.map(|v| map[v as usize])));
            Some(ok.then_some(map))
        }
        false => Some(None),
    }
}

/// Orbits of the full automorphism group on each face dimension, or `None`
/// if the search budget runs out.
pub fn brute_force_orbits(complex: &TwoComplex, budget: usize) -> Option<OrbitSizes> {
    let mut budget = budget;
    let faces_v: Vec<Vec<u32>> = (0..complex.num_vertices() as u32).map(|v| vec![v]).collect();
    let faces_e: Vec<Vec<u32>> = complex.edges().iter().map(|e| e.to_vec()).collect();
    let faces_t: Vec<Vec<u32>> = complex.triangles().iter().map(|t| t.to_vec()).collect();
    let mut found: Vec<Vec<u32>> = Vec::new();
    let mut sizes = Vec::new();
    for faces in [&faces_v, &faces_e, &faces_t] {
        let mut reps: Vec<usize> = Vec::new();
        let mut uf = UnionFind::new(faces.len());
        let index = |f: &[u32]| -> Option<usize> {
            let mut s = f.to_vec();
            s.sort_unstable();
            faces.binary_search(&s).ok()
        };
        for (i, face) in faces.iter().enumerate() {
            // Known automorphisms first.
            for p in &found {
                let img: Vec<u32> = face.iter().map(|&v| p[v as usize]).collect();
                if let Some(j) = index(&img) {
                    uf.union(i, j);
                }
            }
            let mut joined = false;
            for &r in &reps {
                if uf.find(r) == uf.find(i) {
                    joined = true;
                    break;
                }
            }
            if joined {
                continue;
            }
            let mut hit = None;
            'reps: for &r in &reps {
                for dst in permutations(face.len()) {
                    let d: Vec<u32> = dst.iter().map(|&k| face[k]).collect();
                    if let Some(p) = find_automorphism(complex, &faces[r], &d, &mut budget)? {
                        hit = Some((r, p));
                        break 'reps;
                    }
                }
            }
            match hit {
                Some((r, p)) => {
                    uf.union(r, i);
                    for (k, f) in faces.iter().enumerate() {
                        let img: Vec<u32> = f.iter().map(|&v| p[v as usize]).collect();
                        if let Some(j) = index(&img) {
                            uf.union(k, j);
                        }
                    }
                    found.push(p);
                }
                None => reps.push(i),
            }
        }
        sizes.push(uf.class_sizes());
    }
    let triangles = sizes.pop().expect("three dimensions");
    let edges = sizes.pop().expect("three dimensions");
    let vertices = sizes.pop().expect("three dimensions");
    Some(OrbitSizes {
        vertices,
        edges,
        triangles,
    })
}

/// Result of comparing vertex links.
#[derive(Clone, Debug, Serialize)]
pub struct LinkCertificate {
    pub link_isomorphic: bool,
    pub link_regular: bool,
    pub checked_vertices: usize,
    pub exhaustive: bool,
    pub link_vertices: usize,
    pub link_degree: Option<u64>,
    /// Canonical edge list of the reference link, when labeling finished
    /// within budget.
    pub canonical_link: Option<CanonicalForm>,
    /// Vertex pair with non-isomorphic links.
    pub mismatch: Option<(String, String)>,
    /// Vertices whose comparison ran out of budget.
    pub undecided: Vec<String>,
}

pub const LINK_EXHAUSTIVE_CAP: usize = 2000;
const ISO_BUDGET: usize = 200_000;

fn brute_force_isomorphic(a: &WeightedGraph, b: &WeightedGraph) -> bool {
    let n = a.num_vertices();
    if n != b.num_vertices() {
        return false;
    }
    let ea: HashSet<(usize, usize, u32)> = a.edges().into_iter().collect();
    let eb: HashSet<(usize, usize, u32)> = b.edges().into_iter().collect();
    if ea.len() != eb.len() {
        return false;
    }
    permutations(n).into_iter().any(|p| {
        ea.iter().all(|&(u, v, w)| {
            let (x, y) = (p[u].min(p[v]), p[u].max(p[v]));
            eb.contains(&(x, y, w))
        })
    })
}

/// Compares links against the link of the first checked vertex: all
/// vertices up to [`LINK_EXHAUSTIVE_CAP`], otherwise `sample_size` seeded
/// picks.
pub fn certify_links(instance: &CtsInstance, sample_size: usize, seed: u64) -> Result<LinkCertificate> {
    certify_complex_links(instance.complex()?, sample_size, seed)
}

/// [`certify_links`] for a bare complex.
pub fn certify_complex_links(complex: &TwoComplex, sample_size: usize, seed: u64) -> Result<LinkCertificate> {
    let n = complex.num_vertices();
    if n == 0 {
        return Err(HdxError::param("complex has no vertices"));
    }
    let exhaustive = n <= LINK_EXHAUSTIVE_CAP;
    let vertices: Vec<u32> = if exhaustive {
        (0..n as u32).collect()
    } else {
        let all: Vec<u32> = (1..n as u32).collect();
        let mut rng = derive_stream(seed, "links");
        let mut v = vec![0];
        v.extend(all.choose_multiple(&mut rng, sample_size.max(1).min(n - 1)).copied());
        v
    };
    let links: Vec<WeightedGraph> = vertices
        .par_iter()
        .map(|&v| complex.link_of(v).map(|l| l.graph))
        .collect::<Result<_>>()?;
    let reference = &links[0];
    let link_regular = links.iter().all(|l| l.is_regular());
    let outcomes: Vec<IsoOutcome> = links[1..]
        .par_iter()
        .map(|l| match find_isomorphism(reference, l, ISO_BUDGET) {
            IsoOutcome::Undecided if l.num_vertices() <= 12 => {
                if brute_force_isomorphic(reference, l) {
                    IsoOutcome::Found(Vec::new())
                } else {
                    IsoOutcome::NotIsomorphic
                }
            }
            other => other,
        })
        .collect();
    let label = |v: u32| complex.label(v).to_string();
    let mismatch = outcomes
        .iter()
        .position(|o| *o == IsoOutcome::NotIsomorphic)
        .map(|i| (label(vertices[0]), label(vertices[i + 1])));
    let undecided: Vec<String> = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| **o == IsoOutcome::Undecided)
        .map(|(i, _)| label(vertices[i + 1]))
        .collect();
    Ok(LinkCertificate {
        link_isomorphic: mismatch.is_none() && undecided.is_empty(),
        link_regular,
        checked_vertices: vertices.len(),
        exhaustive,
        link_vertices: reference.num_vertices(),
        link_degree: reference.regular_degree(),
        canonical_link: canonical_form(reference, ISO_BUDGET),
        mismatch,
        undecided,
    })
}
