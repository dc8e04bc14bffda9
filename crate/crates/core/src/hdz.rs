//! The HDZ pipeline: a strongly colored base complex is embedded into a
//! product of groups through per-color generator sets, and the resulting
//! small complex drives a CTS over the product.

use serde::{Deserialize, Serialize};

use crate::complexes::TwoComplex;
use crate::error::{HdxError, Result};
use crate::groups::{sample_symmetric_generators, FiniteGroup, GeneratorSet, GroupDescriptor};
use crate::rng::derive_stream;
use crate::scalar::Scalar;
use crate::schreier::{ActionComplex, CtsInstance};
use crate::spectra::{cayley_graph, lambda, zigzag_function, SpectralOptions, SpectralReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HdzMode {
    /// Use the base complex as is; it must satisfy property Inv.
    Minus,
    /// Apply HPOWER first, which enforces property Inv.
    Plus,
}

/// Inputs of an HDZ build.
#[derive(Clone, Debug)]
pub struct HdzSpec {
    /// Strongly colored base complex.
    pub base: TwoComplex,
    /// One group per color.
    pub groups: Vec<FiniteGroup>,
    /// One generator set per color, sized for the complex actually embedded
    /// (`K_c` in minus mode, `2 K_c` in plus mode).
    pub generators: Vec<GeneratorSet>,
    pub mode: HdzMode,
    /// The caller asserts the groups share no common simple factor. Recorded,
    /// never verified.
    pub independent: bool,
}

/// Counts the construction promises, next to what was measured.
#[derive(Clone, Debug, Serialize)]
pub struct HdzProperties {
    pub vertices: usize,
    pub group_order: usize,
    /// Triangles at each vertex: expected `3 |A'(2)|`.
    pub expected_vertex_degree: usize,
    pub vertex_degree: Option<usize>,
    /// Triangles at each edge: expected `2 d'`.
    pub expected_edge_regularity: usize,
    pub edge_regularity: Option<usize>,
    /// Walk graph degree: expected `4 d'`.
    pub expected_walk_degree: usize,
    pub walk_degree: Option<u64>,
}

impl HdzProperties {
    pub fn all_match(&self) -> bool {
        self.vertices == self.group_order
            && self.vertex_degree == Some(self.expected_vertex_degree)
            && self.edge_regularity == Some(self.expected_edge_regularity)
            && self.walk_degree == Some(self.expected_walk_degree as u64)
    }
}

/// A finished HDZ build.
#[derive(Debug)]
pub struct HdzBuild {
    /// The complex that was embedded (the base, or its HPOWER).
    pub embedded: TwoComplex,
    pub groups: Vec<FiniteGroup>,
    pub generators: Vec<GeneratorSet>,
    pub mode: HdzMode,
    pub independent: bool,
    pub instance: CtsInstance,
}

fn check_base(base: &TwoComplex) -> Result<usize> {
    let report = base.validate_coloring()?;
    if let Some(t) = report.violations.first() {
        return Err(HdxError::structural(
            "base coloring is not strong",
            format!("triangle {:?}", t.map(|v| base.label(v).to_string())),
        ));
    }
    if !report.connected {
        return Err(HdxError::structural("base 1-skeleton is disconnected", "skeleton"));
    }
    base.regularity().degree().ok_or_else(|| {
        HdxError::structural("base complex is not edge-regular", format!("{:?}", base.regularity()))
    })
}

/// CONV: vertex `V^c_i` becomes `(F_c)_i` placed in coordinate `c`.
pub fn conv(
    complex: &TwoComplex,
    product: &FiniteGroup,
    generators: &[GeneratorSet],
) -> Result<ActionComplex> {
    let coloring = complex
        .coloring()
        .ok_or_else(|| HdxError::param("CONV needs a colored complex"))?;
    let chi = coloring.chi();
    if product.num_components() != chi || generators.len() != chi {
        return Err(HdxError::param(format!(
            "{chi} colors but {} group components and {} generator sets",
            product.num_components(),
            generators.len()
        )));
    }
    for (c, (class, gens)) in coloring.classes().iter().zip(generators).enumerate() {
        if class.len() != gens.len() {
            return Err(HdxError::param(format!(
                "color {c} has {} vertices but F_{c} has {} elements",
                class.len(),
                gens.len()
            )));
        }
    }
    let image = |v: u32| -> usize {
        let c = coloring.color_of(v);
        product.embed(c, generators[c].elements()[coloring.position(v)])
    };
    let triangles: Vec<[usize; 3]> = complex
        .triangles()
        .iter()
        .map(|t| t.map(image))
        .collect();
    ActionComplex::new(product.clone(), &triangles)
}

/// Builds HDZ- or HDZ+ and validates the CTS.
pub fn build_hdz(spec: HdzSpec) -> Result<HdzBuild> {
    check_base(&spec.base)?;
    let embedded = match spec.mode {
        HdzMode::Minus => {
            let inv = spec.base.check_property_inv()?;
            if !inv.holds {
                let (e, img) = inv.witness.expect("failing Inv has a witness");
                return Err(HdxError::Mode(format!(
                    "base complex lacks property Inv (edge {{{}, {}}} present, {{{}, {}}} missing); use plus mode",
                    spec.base.label(e[0]),
                    spec.base.label(e[1]),
                    spec.base.label(img[0]),
                    spec.base.label(img[1])
                )));
            }
            spec.base.clone()
        }
        HdzMode::Plus => spec.base.hpower()?,
    };
    let product = FiniteGroup::product(&spec.groups)?;
    let action = conv(&embedded, &product, &spec.generators)?;
    let instance = CtsInstance::new(action);
    instance.require_valid()?;
    Ok(HdzBuild {
        embedded,
        groups: spec.groups,
        generators: spec.generators,
        mode: spec.mode,
        independent: spec.independent,
        instance,
    })
}

impl HdzBuild {
    /// Regularity of the embedded complex.
    pub fn d_prime(&self) -> usize {
        self.embedded.regularity().degree().unwrap_or(0)
    }

    /// Expected counts, and measured ones when `measure` is set (this builds
    /// the big complex and its walk graph).
    pub fn properties(&self, measure: bool) -> Result<HdzProperties> {
        let d = self.d_prime();
        let order = self.instance.group().order();
        let mut props = HdzProperties {
            vertices: order,
            group_order: order,
            expected_vertex_degree: 3 * self.embedded.triangles().len(),
            vertex_degree: None,
            expected_edge_regularity: 2 * d,
            edge_regularity: None,
            expected_walk_degree: 4 * d,
            walk_degree: None,
        };
        if measure {
            let c = self.instance.complex()?;
            props.vertices = c.num_vertices();
            let counts = c.vertex_triangle_counts();
            props.vertex_degree = counts
                .iter()
                .all(|&x| x == counts[0])
                .then(|| counts[0]);
            props.edge_regularity = c.regularity().degree();
            props.walk_degree = self.instance.walk_graph()?.regular_degree();
        }
        Ok(props)
    }

    /// Template multiset `S_cd = {mu(e)}` over embedded edges between colors
    /// `c < d`, with `mu({a, b}) = a b` in the product.
    pub fn template(&self, c: usize, d: usize) -> Vec<usize> {
        let g = self.instance.group();
        let elements = self.instance.action().elements();
        let mut out = Vec::new();
        for e in self.instance.action().small().edges() {
            let (x, y) = (elements[e[0] as usize], elements[e[1] as usize]);
            let colors = (color_of_element(g, x), color_of_element(g, y));
            if (colors == (c, d)) || (colors == (d, c)) {
                out.push(g.op(x, y));
            }
        }
        out
    }

    /// `M_cd = Cay(G_c x G_d, S_cd)` with the template projected to the pair.
    pub fn pair_graph_spectrum<T: Scalar>(
        &self,
        c: usize,
        d: usize,
        opts: &SpectralOptions<T>,
    ) -> Result<PairSpectrum<T>> {
        let g = self.instance.group();
        let pair = FiniteGroup::product(&[self.groups[c].clone(), self.groups[d].clone()])?;
        let template = self.template(c, d);
        let gens: Vec<usize> = template
            .iter()
            .map(|&x| pair.encode(&[g.project(x, c), g.project(x, d)]))
            .collect::<Result<_>>()?;
        let distinct = |k: usize| {
            let mut v: Vec<usize> = template.iter().map(|&x| g.project(x, k)).collect();
            v.sort_unstable();
            v.dedup();
            v.len()
        };
        let graph = cayley_graph(&pair, &gens)?;
        let (report, warning) = match lambda(&graph, opts) {
            Ok(r) => (Some(r), None),
            Err(HdxError::Disconnected { .. }) => {
                (None, Some(format!("M_{c}{d} is disconnected; counted as gap 0")))
            }
            Err(e) => return Err(e),
        };
        let sigma = report
            .as_ref()
            .and_then(|r| r.spectral_gap)
            .unwrap_or_else(T::zero);
        Ok(PairSpectrum {
            colors: (c, d),
            degree: template.len(),
            projection_sizes: (distinct(c), distinct(d)),
            report,
            sigma,
            warning,
        })
    }
}

fn color_of_element(g: &FiniteGroup, x: usize) -> usize {
    let support = g.support(x);
    debug_assert_eq!(support.len(), 1);
    support[0]
}

/// Spectrum of one pair graph `M_cd`.
#[derive(Clone, Debug, Serialize)]
pub struct PairSpectrum<T> {
    pub colors: (usize, usize),
    pub degree: usize,
    /// Distinct projections of `S_cd` onto coordinates `c` and `d`.
    pub projection_sizes: (usize, usize),
    pub report: Option<SpectralReport<T>>,
    pub sigma: T,
    pub warning: Option<String>,
}

/// A 1-factorization of the complete graph on `[chi]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TemplatePartition {
    pub classes: Vec<Vec<(usize, usize)>>,
}

impl TemplatePartition {
    /// Every pair in exactly one class and every class a perfect matching.
    pub fn is_valid(&self, chi: usize) -> bool {
        let mut seen = vec![vec![0u32; chi]; chi];
        for class in &self.classes {
            let mut used = vec![false; chi];
            if class.len() * 2 != chi {
                return false;
            }
            for &(a, b) in class {
                if a >= chi || b >= chi || a == b || used[a] || used[b] {
                    return false;
                }
                used[a] = true;
                used[b] = true;
                seen[a.min(b)][a.max(b)] += 1;
            }
        }
        (0..chi).all(|a| (a + 1..chi).all(|b| seen[a][b] == 1))
    }
}

/// Round-robin (circle method) schedule: `chi - 1` perfect matchings.
pub fn baranyai_partition(chi: usize) -> Result<TemplatePartition> {
    if !chi.is_multiple_of(2) || chi < 4 {
        return Err(HdxError::infeasible(format!(
            "pair partition needs an even chi >= 4, got {chi}"
        )));
    }
    let m = chi - 1;
    let classes = (0..m)
        .map(|r| {
            let mut class = vec![(r.min(m), r.max(m))];
            for i in 1..chi / 2 {
                let a = (r + i) % m;
                let b = (r + m - i) % m;
                class.push((a.min(b), a.max(b)));
            }
            class.sort_unstable();
            class
        })
        .collect();
    Ok(TemplatePartition { classes })
}

/// Lower bound on the spectral gap of `G_dual` from the pair graphs.
#[derive(Clone, Debug, Serialize)]
pub struct DualGapReport<T> {
    pub partition: TemplatePartition,
    pub pairs: Vec<PairSpectrum<T>>,
    /// `min_{ij in U_l} sigma(M_ij)` per class.
    pub class_minima: Vec<T>,
    pub bound: T,
    pub dual: SpectralReport<T>,
    pub sigma_dual: T,
    pub holds: bool,
    /// Color pairs with an edge whose template projects to a single element.
    pub projection_failures: Vec<(usize, usize)>,
    pub tolerance: T,
}

/// `sigma(G_dual) >= sum_l min_{ij in U_l} sigma(M_ij)`.
pub fn dual_gap_lower_bound<T: Scalar>(
    build: &HdzBuild,
    partition: &TemplatePartition,
    opts: &SpectralOptions<T>,
) -> Result<DualGapReport<T>> {
    let chi = build.groups.len();
    if !partition.is_valid(chi) {
        return Err(HdxError::param("partition is not a 1-factorization of the colors"));
    }
    let mut pairs = Vec::new();
    for c in 0..chi {
        for d in c + 1..chi {
            pairs.push(build.pair_graph_spectrum(c, d, opts)?);
        }
    }
    let sigma_of = |a: usize, b: usize| {
        pairs
            .iter()
            .find(|p| p.colors == (a.min(b), a.max(b)))
            .map(|p| p.sigma)
            .expect("pair computed")
    };
    let class_minima: Vec<T> = partition
        .classes
        .iter()
        .map(|class| {
            class
                .iter()
                .map(|&(a, b)| sigma_of(a, b))
                .fold(T::infinity(), T::min)
        })
        .collect();
    let bound: T = class_minima.iter().copied().sum();
    let dual = lambda(&build.instance.dual_graph()?, opts)?;
    let sigma_dual = dual.spectral_gap.unwrap_or_else(T::zero);
    let projection_failures = pairs
        .iter()
        .filter(|p| p.degree > 0 && (p.projection_sizes.0 < 2 || p.projection_sizes.1 < 2))
        .map(|p| p.colors)
        .collect();
    let tol = T::lit(1e-6).max(opts.tol);
    Ok(DualGapReport {
        partition: partition.clone(),
        holds: bound <= sigma_dual + tol,
        pairs,
        class_minima,
        bound,
        dual,
        sigma_dual,
        projection_failures,
        tolerance: tol,
    })
}

/// `(N - (chi - 1) + (chi - 1) nu) / N` with `N = chi (chi - 1) / 2`.
pub fn full_skeleton_dual_lambda<T: Scalar>(chi: usize, nu: T) -> Result<T> {
    if chi < 2 {
        return Err(HdxError::param("need at least two colors"));
    }
    let n = T::from_count(chi * (chi - 1) / 2);
    let k = T::from_count(chi - 1);
    Ok((n - k + k * nu) / n)
}

#[derive(Clone, Debug, Serialize)]
pub struct FullSkeletonReport<T> {
    /// `lambda_signed(Cay(G_i, F_i))` per color.
    pub factor_lambdas: Vec<T>,
    pub nu: T,
    pub closed_form: T,
    pub measured: T,
    pub difference: T,
}

/// Compares the measured `lambda(G_dual)` with the closed form for a build
/// whose embedded complex has a complete multipartite 1-skeleton.
pub fn full_skeleton_check<T: Scalar>(
    build: &HdzBuild,
    opts: &SpectralOptions<T>,
) -> Result<FullSkeletonReport<T>> {
    let complex = &build.embedded;
    let coloring = complex.coloring().expect("embedded complex is colored");
    let classes = coloring.classes();
    for a in 0..classes.len() {
        for b in a + 1..classes.len() {
            for &x in &classes[a] {
                for &y in &classes[b] {
                    if complex.edge_id(x, y).is_none() {
                        return Err(HdxError::param(format!(
                            "1-skeleton is not complete multipartite: {{{}, {}}} missing",
                            complex.label(x),
                            complex.label(y)
                        )));
                    }
                }
            }
        }
    }
    let sizes = coloring.part_sizes();
    if sizes.iter().any(|&s| s != sizes[0]) {
        return Err(HdxError::param(
            "closed form assumes equal generator-set sizes across colors",
        ));
    }
    let factor_lambdas = build
        .groups
        .iter()
        .zip(&build.generators)
        .map(|(g, f)| Ok(lambda(&cayley_graph(g, f.elements())?, opts)?.lambda_signed))
        .collect::<Result<Vec<T>>>()?;
    let nu = factor_lambdas
        .iter()
        .copied()
        .fold(T::neg_infinity(), T::max);
    let closed_form = full_skeleton_dual_lambda(classes.len(), nu)?;
    let measured = lambda(&build.instance.dual_graph()?, opts)?.lambda_signed;
    Ok(FullSkeletonReport {
        factor_lambdas,
        nu,
        closed_form,
        measured,
        difference: (measured - closed_form).abs(),
    })
}

/// Projection condition on the base: for colors `a != b` joined by an edge,
/// at least two vertices of each color touch an `a`-`b` edge.
pub fn projection_condition(base: &TwoComplex) -> Result<Option<(usize, usize)>> {
    let coloring = base
        .coloring()
        .ok_or_else(|| HdxError::param("projection condition needs a coloring"))?;
    let chi = coloring.chi();
    let mut touch: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new(); chi]; chi];
    for e in base.edges() {
        let (ca, cb) = (coloring.color_of(e[0]), coloring.color_of(e[1]));
        touch[ca][cb].push(e[0]);
        touch[cb][ca].push(e[1]);
    }
    for a in 0..chi {
        for b in 0..chi {
            let list = &mut touch[a][b];
            list.sort_unstable();
            list.dedup();
            if a != b && !list.is_empty() && list.len() < 2 {
                return Ok(Some((a, b)));
            }
        }
    }
    Ok(None)
}

/// One measured graph in a random HDZ report.
#[derive(Clone, Debug, Serialize)]
pub struct MeasuredGraph<T> {
    pub graph: String,
    pub report: Option<SpectralReport<T>>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RandomHdzReport<T> {
    pub seed: u64,
    pub groups: Vec<GroupDescriptor>,
    /// Sampled generator sets, as element indices per color.
    pub generators: Vec<Vec<usize>>,
    pub measured: Vec<MeasuredGraph<T>>,
    /// `sqrt(1/2 + 1/2 f(lambda_abs(G_dual), lambda_abs(L)))`.
    pub corollary_bound: T,
    /// `lambda_abs` of the big walk graph when it fits the size cap.
    pub walk_lambda: Option<T>,
    /// Walk bound verdict, when the walk graph was measured.
    pub bound_holds: Option<bool>,
}

/// Samples generator sets, builds HDZ+ and measures every graph on the way.
/// Nothing probabilistic is asserted: the report lists measured values.
pub fn random_hdz<T: Scalar>(
    base: &TwoComplex,
    groups: &[GroupDescriptor],
    seed: u64,
    opts: &SpectralOptions<T>,
) -> Result<(HdzBuild, RandomHdzReport<T>)> {
    if let Some((a, b)) = projection_condition(base)? {
        return Err(HdxError::structural(
            "projection condition fails: fewer than two vertices touch the color pair",
            format!("colors {a} and {b}"),
        ));
    }
    let coloring = base
        .coloring()
        .ok_or_else(|| HdxError::param("random HDZ needs a colored base"))?;
    if coloring.chi() != groups.len() {
        return Err(HdxError::param(format!(
            "{} colors but {} groups",
            coloring.chi(),
            groups.len()
        )));
    }
    let built_groups = groups
        .iter()
        .map(FiniteGroup::new)
        .collect::<Result<Vec<_>>>()?;
    let generators = built_groups
        .iter()
        .zip(coloring.part_sizes())
        .enumerate()
        .map(|(c, (g, k))| {
            sample_symmetric_generators(g, k, &mut derive_stream(seed, &format!("generators/{c}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let build = build_hdz(HdzSpec {
        base: base.clone(),
        groups: built_groups,
        generators,
        mode: HdzMode::Plus,
        independent: true,
    })?;

    let mut measured = Vec::new();
    let mut push = |name: String, r: Result<SpectralReport<T>>| -> Result<Option<SpectralReport<T>>> {
        match r {
            Ok(rep) => {
                measured.push(MeasuredGraph {
                    graph: name,
                    report: Some(rep.clone()),
                    note: None,
                });
                Ok(Some(rep))
            }
            Err(e @ (HdxError::Disconnected { .. } | HdxError::Size { .. })) => {
                measured.push(MeasuredGraph {
                    graph: name,
                    report: None,
                    note: Some(e.to_string()),
                });
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };

    let chi = build.groups.len();
    let g = build.instance.group();
    for c in 0..chi {
        for d in c + 1..chi {
            let template = build.template(c, d);
            if template.is_empty() {
                continue;
            }
            for k in [c, d] {
                let proj: Vec<usize> = template.iter().map(|&x| g.project(x, k)).collect();
                let r = cayley_graph(&build.groups[k], &proj).and_then(|gr| lambda(&gr, opts));
                push(format!("M^{k}_{{{c}{d}}}"), r)?;
            }
            let pair = build.pair_graph_spectrum(c, d, opts)?;
            match pair.report {
                Some(r) => push(format!("M_{{{c}{d}}}"), Ok(r))?,
                None => push(
                    format!("M_{{{c}{d}}}"),
                    Err(HdxError::Disconnected { a: 0, b: 0 }),
                )?,
            };
        }
    }
    let dual = push("G_dual".into(), lambda(&build.instance.dual_graph()?, opts))?;
    let cloud = push("L".into(), lambda(&build.instance.type_graph()?, opts))?;
    let clamp = |x: T| x.max(T::zero()).min(T::one());
    let corollary_bound = match (&dual, &cloud) {
        (Some(a), Some(b)) => {
            let f = zigzag_function(clamp(a.lambda_abs), clamp(b.lambda_abs))?;
            (T::lit(0.5) + T::lit(0.5) * f).sqrt()
        }
        _ => T::one(),
    };
    let walk_vertices = g.order() * build.instance.types().len() / 2;
    let walk_lambda = if walk_vertices <= opts.max_vertices {
        let w = push("G_walk".into(), lambda(&build.instance.walk_graph()?, opts))?;
        w.map(|r| r.lambda_abs)
    } else {
        measured.push(MeasuredGraph {
            graph: "G_walk".into(),
            report: None,
            note: Some(format!(
                "skipped: {walk_vertices} vertices above the cap of {}",
                opts.max_vertices
            )),
        });
        None
    };
    let report = RandomHdzReport {
        seed,
        groups: groups.to_vec(),
        generators: build.generators.iter().map(|f| f.elements().to_vec()).collect(),
        measured,
        corollary_bound,
        walk_lambda,
        bound_holds: walk_lambda.map(|l| l <= corollary_bound + opts.tol),
    };
    Ok((build, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_examples() {
        let p4 = baranyai_partition(4).unwrap();
        assert_eq!(p4.classes.len(), 3);
        assert!(p4.is_valid(4));
        let p6 = baranyai_partition(6).unwrap();
        assert_eq!(p6.classes.len(), 5);
        assert!(p6.classes.iter().all(|c| c.len() == 3));
        assert!(matches!(baranyai_partition(3), Err(HdxError::Infeasible(_))));
    }

    #[test]
    fn partitions_valid_up_to_twelve() {
        for chi in (4..=12).step_by(2) {
            assert!(baranyai_partition(chi).unwrap().is_valid(chi), "chi = {chi}");
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!((full_skeleton_dual_lambda(3, 0.5f64).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((full_skeleton_dual_lambda(4, 0.0f64).unwrap() - 0.5).abs() < 1e-15);
        for chi in 2..8 {
            assert!((full_skeleton_dual_lambda(chi, 1.0f64).unwrap() - 1.0).abs() < 1e-15);
        }
    }
}
