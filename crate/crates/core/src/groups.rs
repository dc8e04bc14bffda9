//! Finite group kernel.
//!
//! Every group is frozen into canonical element indices `0..order`; all
//! downstream graphs and complexes use those integers as vertex identities.
//! Products use mixed-radix indexing with the first component most
//! significant, so `Z_2 x Z_3` enumerates `(0,0), (0,1), (0,2), (1,0), ...`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HdxError, Result};

/// Largest group order we are willing to enumerate element-by-element.
pub const DEFAULT_ORDER_CAP: usize = 1 << 24;

/// Serializable description of a group, `{"kind": ..., "params": ...}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum GroupDescriptor {
    Cyclic {
        m: u64,
    },
    BooleanVector {
        t: u32,
    },
    SpecialLinear {
        p: u64,
        #[serde(default)]
        projective: bool,
    },
    Product {
        components: Vec<GroupDescriptor>,
    },
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDescriptor::Cyclic { m } => write!(f, "Z_{m}"),
            GroupDescriptor::BooleanVector { t } => write!(f, "F_2^{t}"),
            GroupDescriptor::SpecialLinear { p, projective } => {
                write!(f, "{}(2,{p})", if *projective { "PSL" } else { "SL" })
            }
            GroupDescriptor::Product { components } => {
                let parts: Vec<String> = components.iter().map(|c| c.to_string()).collect();
                write!(f, "{}", parts.join(" x "))
            }
        }
    }
}

#[derive(Clone, Debug)]
struct MatrixTable {
    p: u64,
    projective: bool,
    elems: Vec<[u32; 4]>,
    index: HashMap<[u32; 4], usize>,
}

#[derive(Clone, Debug)]
enum Repr {
    Cyclic { m: usize },
    Boolean { t: u32 },
    Matrix(Box<MatrixTable>),
    Product {
        components: Vec<FiniteGroup>,
        strides: Vec<usize>,
    },
}

/// An enumerable finite group with canonical integer elements.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    descriptor: GroupDescriptor,
    repr: Repr,
    order: usize,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

fn mat_mul(a: &[u32; 4], b: &[u32; 4], p: u64) -> [u32; 4] {
    let (a0, a1, a2, a3) = (a[0] as u64, a[1] as u64, a[2] as u64, a[3] as u64);
    let (b0, b1, b2, b3) = (b[0] as u64, b[1] as u64, b[2] as u64, b[3] as u64);
    [
        ((a0 * b0 + a1 * b2) % p) as u32,
        ((a0 * b1 + a1 * b3) % p) as u32,
        ((a2 * b0 + a3 * b2) % p) as u32,
        ((a2 * b1 + a3 * b3) % p) as u32,
    ]
}

fn mat_neg(a: &[u32; 4], p: u64) -> [u32; 4] {
    let n = |x: u32| ((p - x as u64) % p) as u32;
    [n(a[0]), n(a[1]), n(a[2]), n(a[3])]
}

impl MatrixTable {
    fn canonical(&self, m: [u32; 4]) -> [u32; 4] {
        if self.projective {
            let neg = mat_neg(&m, self.p);
            if neg < m {
                return neg;
            }
        }
        m
    }

    fn build(p: u64, projective: bool, cap: usize) -> Result<Self> {
        let sl_order = (p * (p * p - 1)) as usize;
        let order = if projective { sl_order / 2 } else { sl_order };
        if order > cap {
            return Err(HdxError::Size {
                what: format!("SL(2,{p}) enumeration"),
                actual: order,
                cap,
            });
        }
        // Lexicographic order in (a, b, c, d).
        let mut elems = Vec::with_capacity(sl_order);
        for a in 0..p {
            if a == 0 {
                for b in 1..p {
                    let c = (p - mod_pow(b, p - 2, p)) % p;
                    for d in 0..p {
                        elems.push([0, b as u32, c as u32, d as u32]);
                    }
                }
            } else {
                let a_inv = mod_pow(a, p - 2, p);
                for b in 0..p {
                    for c in 0..p {
                        let d = (1 + b * c) % p * a_inv % p;
                        elems.push([a as u32, b as u32, c as u32, d as u32]);
                    }
                }
            }
        }
        let mut table = MatrixTable {
            p,
            projective,
            elems: Vec::new(),
            index: HashMap::new(),
        };
        if projective {
            elems.retain(|m| table.canonical(*m) == *m);
        }
        table.index = elems.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        table.elems = elems;
        Ok(table)
    }
}

impl FiniteGroup {
    /// Builds a group from its descriptor, enumerating matrix groups up to
    /// [`DEFAULT_ORDER_CAP`] elements.
    pub fn new(descriptor: &GroupDescriptor) -> Result<Self> {
        Self::with_cap(descriptor, DEFAULT_ORDER_CAP)
    }

    pub fn with_cap(descriptor: &GroupDescriptor, cap: usize) -> Result<Self> {
        let (repr, order) = match descriptor {
            GroupDescriptor::Cyclic { m } => {
                if *m < 2 {
                    return Err(HdxError::param(format!("cyclic group needs m >= 2, got {m}")));
                }
                let m = *m as usize;
                (Repr::Cyclic { m }, m)
            }
            GroupDescriptor::BooleanVector { t } => {
                if *t < 1 || *t > 40 {
                    return Err(HdxError::param(format!(
                        "boolean vector group needs 1 <= t <= 40, got {t}"
                    )));
                }
                (Repr::Boolean { t: *t }, 1usize << t)
            }
            GroupDescriptor::SpecialLinear { p, projective } => {
                if *p < 3 || !is_prime(*p) {
                    return Err(HdxError::param(format!("SL(2,p) needs an odd prime p, got {p}")));
                }
                if *p > 2000 {
                    return Err(HdxError::param(format!("SL(2,{p}) is beyond desk scale")));
                }
                let table = MatrixTable::build(*p, *projective, cap)?;
                let order = table.elems.len();
                (Repr::Matrix(Box::new(table)), order)
            }
            GroupDescriptor::Product { components } => {
                if components.is_empty() {
                    return Err(HdxError::param("product of an empty list of groups"));
                }
                let comps = components
                    .iter()
                    .map(|c| FiniteGroup::with_cap(c, cap))
                    .collect::<Result<Vec<_>>>()?;
                let mut order: usize = 1;
                for c in &comps {
                    order = order.checked_mul(c.order).ok_or_else(|| HdxError::Size {
                        what: "product group".into(),
                        actual: usize::MAX,
                        cap,
                    })?;
                }
                if order > cap {
                    return Err(HdxError::Size {
                        what: "product group".into(),
                        actual: order,
                        cap,
                    });
                }
                let mut strides = vec![1usize; comps.len()];
                for i in (0..comps.len().saturating_sub(1)).rev() {
                    strides[i] = strides[i + 1] * comps[i + 1].order;
                }
                (
                    Repr::Product {
                        components: comps,
                        strides,
                    },
                    order,
                )
            }
        };
        Ok(FiniteGroup {
            descriptor: descriptor.clone(),
            repr,
            order,
        })
    }

    /// Direct product `G_1 x ... x G_k` with componentwise operations.
    pub fn product(components: &[FiniteGroup]) -> Result<Self> {
        let desc = GroupDescriptor::Product {
            components: components.iter().map(|c| c.descriptor.clone()).collect(),
        };
        Self::new(&desc)
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        match &self.repr {
            Repr::Cyclic { .. } | Repr::Boolean { .. } => 0,
            Repr::Matrix(t) => t.index[&[1, 0, 0, 1]],
            Repr::Product {
                components,
                strides,
            } => components
                .iter()
                .zip(strides)
                .map(|(c, s)| c.identity() * s)
                .sum(),
        }
    }

    pub fn op(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < self.order && b < self.order);
        match &self.repr {
            Repr::Cyclic { m } => (a + b) % m,
            Repr::Boolean { .. } => a ^ b,
            Repr::Matrix(t) => {
                let prod = mat_mul(&t.elems[a], &t.elems[b], t.p);
                t.index[&t.canonical(prod)]
            }
            Repr::Product {
                components,
                strides,
            } => {
                let mut out = 0;
                for (c, &s) in components.iter().zip(strides) {
                    let x = (a / s) % c.order;
                    let y = (b / s) % c.order;
                    out += c.op(x, y) * s;
                }
                out
            }
        }
    }

    pub fn inv(&self, a: usize) -> usize {
        match &self.repr {
            Repr::Cyclic { m } => (m - a) % m,
            Repr::Boolean { .. } => a,
            Repr::Matrix(t) => {
                let [x, y, z, w] = t.elems[a];
                let p = t.p as u32;
                let neg = |v: u32| (p - v) % p;
                t.index[&t.canonical([w, neg(y), neg(z), x])]
            }
            Repr::Product {
                components,
                strides,
            } => components
                .iter()
                .zip(strides)
                .map(|(c, &s)| c.inv((a / s) % c.order) * s)
                .sum(),
        }
    }

    /// `a * b^{-1}`.
    pub fn div(&self, a: usize, b: usize) -> usize {
        self.op(a, self.inv(b))
    }

    pub fn is_involution(&self, a: usize) -> bool {
        a != self.identity() && self.op(a, a) == self.identity()
    }

    pub fn commute(&self, a: usize, b: usize) -> bool {
        self.op(a, b) == self.op(b, a)
    }

    pub fn is_abelian(&self) -> bool {
        match &self.repr {
            Repr::Cyclic { .. } | Repr::Boolean { .. } => true,
            Repr::Matrix(_) => false,
            Repr::Product { components, .. } => components.iter().all(|c| c.is_abelian()),
        }
    }

    /// Number of elements `x` with `x^2 = e` (identity included).
    pub fn square_roots_of_identity(&self) -> usize {
        match &self.repr {
            Repr::Cyclic { m } => {
                if m % 2 == 0 {
                    2
                } else {
                    1
                }
            }
            Repr::Boolean { .. } => self.order,
            Repr::Matrix(_) => {
                let e = self.identity();
                (0..self.order).filter(|&x| self.op(x, x) == e).count()
            }
            Repr::Product { components, .. } => components
                .iter()
                .map(|c| c.square_roots_of_identity())
                .product(),
        }
    }

    /// Direct-product components, or `None` for a simple factor.
    pub fn components(&self) -> Option<&[FiniteGroup]> {
        match &self.repr {
            Repr::Product { components, .. } => Some(components),
            _ => None,
        }
    }

    pub fn num_components(&self) -> usize {
        self.components().map_or(1, |c| c.len())
    }

    /// Splits a product element into its component indices.
    pub fn decode(&self, a: usize) -> Vec<usize> {
        match &self.repr {
            Repr::Product {
                components,
                strides,
            } => components
                .iter()
                .zip(strides)
                .map(|(c, &s)| (a / s) % c.order)
                .collect(),
            _ => vec![a],
        }
    }

    pub fn encode(&self, parts: &[usize]) -> Result<usize> {
        match &self.repr {
            Repr::Product {
                components,
                strides,
            } => {
                if parts.len() != components.len() {
                    return Err(HdxError::param(format!(
                        "expected {} components, got {}",
                        components.len(),
                        parts.len()
                    )));
                }
                let mut out = 0;
                for ((c, &s), &x) in components.iter().zip(strides).zip(parts) {
                    if x >= c.order {
                        return Err(HdxError::param(format!("component index {x} out of range")));
                    }
                    out += x * s;
                }
                Ok(out)
            }
            _ => match parts {
                [x] if *x < self.order => Ok(*x),
                _ => Err(HdxError::param("bad element encoding for a simple group")),
            },
        }
    }

    /// Embeds an element of component `c` into the product, identity elsewhere.
    pub fn embed(&self, c: usize, x: usize) -> usize {
        match &self.repr {
            Repr::Product {
                components,
                strides,
            } => {
                let mut out = 0;
                for (i, (comp, &s)) in components.iter().zip(strides).enumerate() {
                    out += if i == c { x } else { comp.identity() } * s;
                }
                out
            }
            _ => x,
        }
    }

    /// Projects a product element onto component `c`.
    pub fn project(&self, a: usize, c: usize) -> usize {
        match &self.repr {
            Repr::Product {
                components,
                strides,
            } => (a / strides[c]) % components[c].order,
            _ => a,
        }
    }

    /// Components where `a` differs from the identity.
    pub fn support(&self, a: usize) -> Vec<usize> {
        match &self.repr {
            Repr::Product { components, .. } => self
                .decode(a)
                .into_iter()
                .zip(components)
                .enumerate()
                .filter(|(_, (x, c))| *x != c.identity())
                .map(|(i, _)| i)
                .collect(),
            _ => {
                if a == self.identity() {
                    vec![]
                } else {
                    vec![0]
                }
            }
        }
    }

    /// A generating set of the group (used for translation families).
    pub fn generators(&self) -> Vec<usize> {
        match &self.repr {
            Repr::Cyclic { .. } => vec![1],
            Repr::Boolean { t } => (0..*t).map(|i| 1usize << i).collect(),
            Repr::Matrix(t) => {
                let upper = t.canonical([1, 1, 0, 1]);
                let lower = t.canonical([1, 0, 1, 1]);
                vec![t.index[&upper], t.index[&lower]]
            }
            Repr::Product { components, .. } => components
                .iter()
                .enumerate()
                .flat_map(|(i, c)| c.generators().into_iter().map(move |g| (i, g)))
                .map(|(i, g)| self.embed(i, g))
                .collect(),
        }
    }

    /// Human-readable element label; stable across platforms.
    pub fn label(&self, a: usize) -> String {
        match &self.repr {
            Repr::Cyclic { .. } => a.to_string(),
            Repr::Boolean { t } => format!("{:0width$b}", a, width = *t as usize),
            Repr::Matrix(t) => {
                let [x, y, z, w] = t.elems[a];
                format!("[{x},{y};{z},{w}]")
            }
            Repr::Product { components, .. } => {
                let parts: Vec<String> = self
                    .decode(a)
                    .into_iter()
                    .zip(components)
                    .map(|(x, c)| c.label(x))
                    .collect();
                format!("({})", parts.join(","))
            }
        }
    }

    /// Lists all elements with their labels and inverses.
    pub fn enumerate(&self, cap: usize) -> Result<Enumeration> {
        if self.order > cap {
            return Err(HdxError::Size {
                what: format!("enumeration of {}", self.descriptor),
                actual: self.order,
                cap,
            });
        }
        let labels: Vec<String> = (0..self.order).map(|a| self.label(a)).collect();
        let index_of = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        let inverse = (0..self.order).map(|a| self.inv(a)).collect();
        Ok(Enumeration {
            labels,
            index_of,
            inverse,
        })
    }

    /// Unit multipliers `x -> u x` of a cyclic group; the automorphism group.
    pub(crate) fn cyclic_units(&self) -> Option<Vec<usize>> {
        match &self.repr {
            Repr::Cyclic { m } => Some((1..*m).filter(|&u| gcd(u, *m) == 1).collect()),
            _ => None,
        }
    }

    pub(crate) fn boolean_dimension(&self) -> Option<u32> {
        match &self.repr {
            Repr::Boolean { t } => Some(*t),
            _ => None,
        }
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Output of [`FiniteGroup::enumerate`].
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub labels: Vec<String>,
    pub index_of: HashMap<String, usize>,
    pub inverse: Vec<usize>,
}

impl Enumeration {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// `2K` elements where index `i` and `i + K` are mutual inverses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSet {
    elements: Vec<usize>,
    half_size: usize,
}

impl GeneratorSet {
    /// Validates an explicit list against the generator-set invariants.
    pub fn new(group: &FiniteGroup, elements: Vec<usize>) -> Result<Self> {
        if elements.is_empty() || !elements.len().is_multiple_of(2) {
            return Err(HdxError::param(format!(
                "generator list must have positive even length, got {}",
                elements.len()
            )));
        }
        let half_size = elements.len() / 2;
        let mut seen = HashSet::new();
        for (i, &g) in elements.iter().enumerate() {
            if g >= group.order() {
                return Err(HdxError::param(format!("element {g} outside group")));
            }
            if g == group.identity() {
                return Err(HdxError::param("generator set contains the identity"));
            }
            if group.is_involution(g) {
                return Err(HdxError::param(format!(
                    "generator {} has order 2",
                    group.label(g)
                )));
            }
            if !seen.insert(g) {
                return Err(HdxError::param(format!(
                    "generator {} listed twice",
                    group.label(g)
                )));
            }
            let partner = elements[(i + half_size) % elements.len()];
            if group.inv(g) != partner {
                return Err(HdxError::param(format!(
                    "inverse of position {i} is not at position {}",
                    (i + half_size) % elements.len()
                )));
            }
        }
        Ok(GeneratorSet {
            elements,
            half_size,
        })
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn half_size(&self) -> usize {
        self.half_size
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Draws `k` distinct inverse pairs uniformly and lists the chosen elements
/// followed by their inverses in matching order.
pub fn sample_symmetric_generators<R: Rng + ?Sized>(
    group: &FiniteGroup,
    k: usize,
    rng: &mut R,
) -> Result<GeneratorSet> {
    if k == 0 {
        return Err(HdxError::param("need K >= 1 generators"));
    }
    let available = group.order() - group.square_roots_of_identity();
    if available / 2 < k {
        return Err(HdxError::infeasible(format!(
            "{} has only {} inverse pairs of non-involutions, {} requested",
            group.descriptor(),
            available / 2,
            k
        )));
    }
    let e = group.identity();
    let mut used = HashSet::new();
    let mut firsts = Vec::with_capacity(k);
    while firsts.len() < k {
        let g = rng.random_range(0..group.order());
        if g == e || group.is_involution(g) || used.contains(&g) {
            continue;
        }
        used.insert(g);
        used.insert(group.inv(g));
        firsts.push(g);
    }
    let mut elements = firsts.clone();
    elements.extend(firsts.iter().map(|&g| group.inv(g)));
    GeneratorSet::new(group, elements)
}
