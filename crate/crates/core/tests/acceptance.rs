//! Acceptance criteria. Each test prints one verdict line of the form
//! `criterion N: PASS|FAIL ...` and fails when its criterion fails.
//! Criteria run one at a time so the measured runtimes are not inflated by
//! each other.

mod support;

use std::sync::Mutex;
use std::time::{Duration, Instant};

use hdx_core::constructions::{
    build_conlon, certify_links, certify_transitivity, complete_multipartite_base, find_sidon_set,
};
use hdx_core::groups::sample_symmetric_generators;
use hdx_core::hdz::{
    baranyai_partition, build_hdz, dual_gap_lower_bound, full_skeleton_check, random_hdz, HdzBuild,
    HdzMode, HdzSpec,
};
use hdx_core::rng::derive_stream;
use hdx_core::schreier::LiftOptions;
use hdx_core::spectra::{
    cartesian_product, cayley_graph, johnson_graph, johnson_lambda, lambda, normalized_spectrum,
    walk_graph, zigzag_function,
};
use hdx_core::{
    CtsInstance, FiniteGroup, GroupDescriptor, SpectralOptions, TwoComplex, WeightedGraph,
};

static SERIAL: Mutex<()> = Mutex::new(());

struct Criterion {
    number: u32,
    title: &'static str,
    limit: Duration,
    start: Instant,
    checks: Vec<(String, bool)>,
}

impl Criterion {
    fn new(number: u32, title: &'static str, limit_secs: u64) -> Self {
        Criterion {
            number,
            title,
            limit: Duration::from_secs(limit_secs),
            start: Instant::now(),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        let what = what.into();
        println!("  [{}] {what}", if ok { "ok" } else { "FAIL" });
        self.checks.push((what, ok));
    }

    fn finish(mut self) {
        let elapsed = self.start.elapsed();
        self.check(
            format!("runtime {:.2} s < {} s", elapsed.as_secs_f64(), self.limit.as_secs()),
            elapsed < self.limit,
        );
        let failed: Vec<&str> = self
            .checks
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(w, _)| w.as_str())
            .collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "criterion {}: {verdict} {} ({} checks, {:.2} s)",
            self.number,
            self.title,
            self.checks.len(),
            elapsed.as_secs_f64()
        );
        assert!(failed.is_empty(), "criterion {} failed: {failed:?}", self.number);
    }
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn opts() -> SpectralOptions {
    SpectralOptions::default()
}

fn cyclic(m: u64) -> FiniteGroup {
    FiniteGroup::new(&GroupDescriptor::Cyclic { m }).unwrap()
}

const CONLON_SEED: u64 = 1;
const HDZ_SEED: u64 = 7;
const FULL_SEED: u64 = 11;

fn conlon_instance() -> CtsInstance {
    let s = find_sidon_set(6, 5, CONLON_SEED).unwrap();
    build_conlon(6, s.elements()).unwrap()
}

/// Complete multipartite base with parts of size 4 over `Z_p` factors, in
/// minus mode (the full skeleton has property Inv).
fn full_skeleton_build(primes: &[u64]) -> HdzBuild {
    let chi = primes.len();
    let base = complete_multipartite_base(chi, 4).unwrap();
    let groups: Vec<FiniteGroup> = primes.iter().map(|&p| cyclic(p)).collect();
    let generators = groups
        .iter()
        .enumerate()
        .map(|(c, g)| {
            sample_symmetric_generators(g, 2, &mut derive_stream(FULL_SEED, &format!("full/{c}")))
                .unwrap()
        })
        .collect();
    build_hdz(HdzSpec {
        base,
        groups,
        generators,
        mode: HdzMode::Minus,
        independent: true,
    })
    .unwrap()
}

fn k222() -> TwoComplex {
    complete_multipartite_base(3, 2).unwrap()
}

fn hdz_plus_instance() -> (HdzBuild, hdx_core::hdz::RandomHdzReport<f64>) {
    let groups = [11, 13, 17].map(|m| GroupDescriptor::Cyclic { m });
    random_hdz(&k222(), &groups, HDZ_SEED, &opts()).unwrap()
}

fn cartesian_pairs() -> Vec<(WeightedGraph, WeightedGraph)> {
    let mut rng = derive_stream(2024, "cartesian");
    let mut out = Vec::new();
    while out.len() < 20 {
        use rand::Rng;
        let pick = |rng: &mut hdx_core::rng::StreamRng| loop {
            let n = rng.random_range(6..=60usize);
            let d = rng.random_range(3..=6usize);
            if n * d % 2 == 0 && d < n {
                return support::random_regular(n, d, rng);
            }
        };
        let g = pick(&mut rng);
        let h = pick(&mut rng);
        out.push((g, h));
    }
    out
}

#[test]
fn criterion_01_johnson_gap() {
    let _g = lock();
    let mut c = Criterion::new(1, "Johnson gap", 1);
    for s in 5..=8 {
        let r = lambda(&johnson_graph(s).unwrap(), &opts()).unwrap();
        let closed: f64 = johnson_lambda(s).unwrap();
        c.check(
            format!(
                "J({s},2): lambda_abs {:.12} vs (S-4)/(2(S-2)) = {closed:.12} (lambda_signed {:.12}, lambda_min {:.12})",
                r.lambda_abs, r.lambda_signed, r.lambda_min
            ),
            (r.lambda_abs - closed).abs() <= 1e-9,
        );
    }
    c.finish();
}

#[test]
fn criterion_02_zigzag_function() {
    let _g = lock();
    let mut c = Criterion::new(2, "zig-zag function properties", 1);
    let mut worst_sum = f64::NEG_INFINITY;
    let mut worst_one = f64::NEG_INFINITY;
    for i in 0..50 {
        for j in 0..50 {
            let a = 0.99 * i as f64 / 49.0;
            let b = 0.99 * j as f64 / 49.0;
            let f: f64 = zigzag_function(a, b).unwrap();
            worst_sum = worst_sum.max(f - (a + b));
            worst_one = worst_one.max(f);
        }
    }
    c.check(format!("max f(a,b) - (a+b) = {worst_sum:.3e} <= 0"), worst_sum <= 0.0);
    c.check(format!("max f(a,b) = {worst_one:.12} < 1"), worst_one < 1.0);
    let mut exact = true;
    for i in 0..=100 {
        let x = i as f64 / 100.0;
        exact &= zigzag_function(0.0, x).unwrap() == x;
        exact &= zigzag_function(x, 0.0).unwrap() == x;
        exact &= zigzag_function(x, 1.0).unwrap() == 1.0;
    }
    c.check("f(0,b)=b, f(a,0)=a, f(a,1)=1 exactly on a 101-point grid", exact);
    c.finish();
}

#[test]
fn criterion_03_conlon_instance() {
    let _g = lock();
    let mut c = Criterion::new(3, "Conlon instance t=6 |S|=5", 60);
    let inst = conlon_instance();
    c.check(
        format!("validate_cts all pass: {:?}", inst.record().verdicts()),
        inst.record().all_pass(),
    );
    let two = inst.check_two_centers().unwrap();
    c.check(format!("every edge has exactly 2 centers ({:?})", two.witness), two.passed);
    let walk = inst.walk_graph().unwrap();
    c.check(
        format!("G_walk regular degree {:?} == 12", walk.regular_degree()),
        walk.regular_degree() == Some(12),
    );
    let lift = inst.verify_lift(&LiftOptions::default()).unwrap();
    c.check(
        format!(
            "lift verified at {} of {} vertices (exhaustive {}), 2-to-1 {}",
            lift.checked_vertices, lift.rep_vertices, lift.exhaustive, lift.two_to_one
        ),
        lift.passed && lift.exhaustive && lift.checked_vertices == lift.rep_vertices,
    );
    let b = inst.bound_check(&opts()).unwrap();
    c.check(
        format!(
            "lambda(G_walk) = {:.9} <= sqrt(1/2 + 1/2 lambda(G_dual zz L)) = {:.9} + 1e-6, margin {:.6} (on the identity component; {} dual and {} walk components)",
            b.walk.lambda_abs, b.bound, b.margin, b.dual_components, b.walk_components
        ),
        b.walk.lambda_abs <= b.bound + 1e-6,
    );
    c.finish();
}

#[test]
fn criterion_04_hpower() {
    let _g = lock();
    let mut c = Criterion::new(4, "HPOWER on K_{2,2,2}", 30);
    let a = k222();
    let b = a.hpower().unwrap();
    c.check(
        format!("vertices {} -> {}", a.num_vertices(), b.num_vertices()),
        b.num_vertices() == 2 * a.num_vertices(),
    );
    c.check(
        format!("edges {} -> {}", a.edges().len(), b.edges().len()),
        b.edges().len() == 4 * a.edges().len(),
    );
    c.check(
        format!("triangles {} -> {}", a.triangles().len(), b.triangles().len()),
        b.triangles().len() == 8 * a.triangles().len(),
    );
    let (wa, wb) = (walk_graph(&a).unwrap(), walk_graph(&b).unwrap());
    for m in 1..=3usize {
        let ta = wa.closed_walks(2 * m).unwrap();
        let tb = wb.closed_walks(2 * m).unwrap();
        let expected = ta << (2 * m + 1);
        c.check(
            format!("m={m}: tr(A'^{}) = {tb} vs 2^{} tr(A^{}) = {expected}", 2 * m, 2 * m + 1, 2 * m),
            tb == expected,
        );
    }
    let (la, lb) = (lambda(&wa, &opts()).unwrap(), lambda(&wb, &opts()).unwrap());
    c.check(
        format!(
            "lambda(walk(A)) = {:.9}, lambda(walk(A')) = {:.9}",
            la.lambda_abs, lb.lambda_abs
        ),
        (la.lambda_abs - lb.lambda_abs).abs() <= 1e-6,
    );
    c.finish();
}

#[test]
fn criterion_05_full_skeleton() {
    let _g = lock();
    let mut c = Criterion::new(5, "full-skeleton formula", 60);
    for primes in [&[11u64, 13, 17][..], &[11, 13, 17, 19][..]] {
        let build = full_skeleton_build(primes);
        let r = full_skeleton_check(&build, &opts()).unwrap();
        c.check(
            format!(
                "chi={}: lambda(G_dual) = {:.12}, closed form {:.12} with nu = {:.12}, diff {:.2e}",
                primes.len(),
                r.measured,
                r.closed_form,
                r.nu,
                r.difference
            ),
            r.difference <= 1e-9,
        );
    }
    c.finish();
}

#[test]
fn criterion_06_baranyai_bound() {
    let _g = lock();
    let mut c = Criterion::new(6, "Baranyai bound", 30);
    let build = full_skeleton_build(&[11, 13, 17, 19]);
    let part = baranyai_partition(4).unwrap();
    let mut pairs: Vec<(usize, usize)> = part.classes.iter().flatten().copied().collect();
    pairs.sort_unstable();
    c.check(
        format!("partition {:?} covers the 6 pairs once", part.classes),
        part.is_valid(4) && pairs == vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
    );
    let r = dual_gap_lower_bound(&build, &part, &opts()).unwrap();
    c.check(
        format!(
            "bound {:.9} <= sigma(G_dual) {:.9} + 1e-6 (class minima {:?})",
            r.bound, r.sigma_dual, r.class_minima
        ),
        r.bound <= r.sigma_dual + 1e-6,
    );
    c.finish();
}

#[test]
fn criterion_07_cartesian_gap() {
    let _g = lock();
    let mut c = Criterion::new(7, "Cartesian gap", 30);
    let o = SpectralOptions {
        dense_cap: 900,
        ..opts()
    };
    let mut worst = 0f64;
    let mut sizes = Vec::new();
    for (g, h) in cartesian_pairs() {
        let sg = lambda(&g, &o).unwrap().spectral_gap.unwrap();
        let sh = lambda(&h, &o).unwrap().spectral_gap.unwrap();
        let p = cartesian_product(&g, &h).unwrap();
        let sp = lambda(&p, &o).unwrap().spectral_gap.unwrap();
        worst = worst.max((sp - sg.min(sh)).abs());
        sizes.push((g.num_vertices(), h.num_vertices()));
    }
    c.check(
        format!("20 pairs {sizes:?}: max |sigma(GxH) - min| = {worst:.3e} <= 1e-9"),
        worst <= 1e-9,
    );
    c.finish();
}

#[test]
fn criterion_08_hdz_plus() {
    let _g = lock();
    let mut c = Criterion::new(8, "HDZ+ end to end over (Z_11, Z_13, Z_17)", 120);
    let (build, report) = hdz_plus_instance();
    c.check(
        format!("build succeeds, CTS record {:?}", build.instance.record().verdicts()),
        build.instance.record().all_pass(),
    );
    let props = build.properties(true).unwrap();
    c.check(
        format!(
            "complex is {:?}-regular == 4d = 8 for d = 2 (walk degree {:?} == 4 d_tilde = {})",
            props.edge_regularity,
            props.walk_degree,
            4 * build.instance.d_tilde().unwrap_or(0)
        ),
        props.edge_regularity == Some(8)
            && props.walk_degree == Some(4 * build.instance.d_tilde().unwrap_or(0) as u64),
    );
    c.check(
        format!(
            "{} vertices, vertex degree {:?} == {}",
            props.vertices, props.vertex_degree, props.expected_vertex_degree
        ),
        props.all_match(),
    );
    let (_, cert) = certify_transitivity(&build.instance).unwrap();
    c.check(
        format!(
            "transitivity: orbit counts v/e/t = {}/{}/{} under {} maps; obstruction {:?}",
            cert.orbit_sizes.vertices.len(),
            cert.orbit_sizes.edges.len(),
            cert.orbit_sizes.triangles.len(),
            cert.maps.len(),
            cert.obstruction
        ),
        cert.transitive,
    );
    let links = certify_links(&build.instance, 200, HDZ_SEED).unwrap();
    c.check(
        format!(
            "links: {} checked, isomorphic {}, regular {} (degree {:?}, {} vertices)",
            links.checked_vertices,
            links.link_isomorphic,
            links.link_regular,
            links.link_degree,
            links.link_vertices
        ),
        links.link_isomorphic && links.link_regular,
    );
    let b = build.instance.bound_check(&opts()).unwrap();
    c.check(
        format!(
            "lambda(G_walk) = {:.9} <= bound {:.9}, margin {:.6} (corollary {:.6}, random_hdz corollary {:.6})",
            b.walk.lambda_abs, b.bound, b.margin, b.corollary_bound, report.corollary_bound
        ),
        b.holds && b.walk.lambda_abs <= b.bound + 1e-6,
    );
    c.finish();
}

/// Every graph with at most 500 vertices built in criteria 1 to 8.
fn small_graphs() -> Vec<(String, WeightedGraph)> {
    let mut out: Vec<(String, WeightedGraph)> = Vec::new();
    for s in 5..=8 {
        out.push((format!("J({s},2)"), johnson_graph(s).unwrap()));
    }
    let conlon = conlon_instance();
    out.push(("Conlon G_dual".into(), conlon.dual_graph().unwrap()));
    out.push(("Conlon L".into(), conlon.type_graph().unwrap()));
    let a = k222();
    out.push(("walk(K222)".into(), walk_graph(&a).unwrap()));
    out.push(("walk(HPOWER(K222))".into(), walk_graph(&a.hpower().unwrap()).unwrap()));
    for primes in [&[11u64, 13, 17][..], &[11, 13, 17, 19][..]] {
        let b = full_skeleton_build(primes);
        let chi = primes.len();
        out.push((format!("chi={chi} L"), b.instance.type_graph().unwrap()));
        for (i, (g, f)) in b.groups.iter().zip(&b.generators).enumerate() {
            out.push((format!("chi={chi} Cay(G_{i}, F_{i})"), cayley_graph(g, f.elements()).unwrap()));
        }
        for x in 0..chi {
            for y in x + 1..chi {
                let pair = FiniteGroup::product(&[b.groups[x].clone(), b.groups[y].clone()]).unwrap();
                let g = b.instance.group();
                let gens: Vec<usize> = b
                    .template(x, y)
                    .iter()
                    .map(|&s| pair.encode(&[g.project(s, x), g.project(s, y)]).unwrap())
                    .collect();
                let m = cayley_graph(&pair, &gens).unwrap();
                if m.num_vertices() <= 500 {
                    out.push((format!("chi={chi} M_{x}{y}"), m));
                }
            }
        }
    }
    for (i, (g, h)) in cartesian_pairs().into_iter().enumerate() {
        let p = cartesian_product(&g, &h).unwrap();
        if p.num_vertices() <= 500 {
            out.push((format!("pair {i} product"), p));
        }
        out.push((format!("pair {i} G"), g));
        out.push((format!("pair {i} H"), h));
    }
    let (b, _) = hdz_plus_instance();
    out.push(("HDZ+ L".into(), b.instance.type_graph().unwrap()));
    for (i, (g, f)) in b.groups.iter().zip(&b.generators).enumerate() {
        out.push((format!("HDZ+ Cay(G_{i}, F_{i})"), cayley_graph(g, f.elements()).unwrap()));
    }
    out
}

#[test]
fn criterion_09_oracle_equivalence() {
    let _g = lock();
    let mut c = Criterion::new(9, "eigensolver vs Jacobi oracle", 120);
    let graphs = small_graphs();
    let mut worst = (0f64, String::new());
    for (name, g) in &graphs {
        assert!(g.num_vertices() <= 500);
        let ours: Vec<f64> = normalized_spectrum(g).unwrap();
        let oracle = support::jacobi_eigenvalues(support::normalized_dense(g));
        let diff = ours
            .iter()
            .zip(&oracle)
            .map(|(x, y)| (x - y).abs())
            .fold(0f64, f64::max);
        let r = lambda(g, &opts());
        let (os, om, _) = support::oracle_lambda(g);
        let diff = match r {
            Ok(r) => diff.max((r.lambda_signed - os).abs()).max((r.lambda_min - om).abs()),
            Err(_) => diff,
        };
        if diff > worst.0 {
            worst = (diff, name.clone());
        }
    }
    c.check(
        format!(
            "{} graphs, max eigenvalue discrepancy {:.3e} ({}) <= 1e-8",
            graphs.len(),
            worst.0,
            worst.1
        ),
        worst.0 <= 1e-8,
    );
    c.finish();
}

#[test]
fn criterion_10_fault_injection() {
    let _g = lock();
    let mut c = Criterion::new(10, "fault injection on Conlon", 30);
    let inst = conlon_instance();
    let complex = inst.complex().unwrap().clone();
    // Move one vertex of the first triangle to a vertex outside it.
    let t = complex.triangles()[0];
    let replacement = (0..complex.num_vertices() as u32)
        .find(|v| !t.contains(v) && !complex.has_triangle([t[0], t[1], *v]))
        .unwrap();
    let mut tris = complex.triangles().to_vec();
    tris[0] = [t[0], t[1], replacement];
    let corrupted = complex.with_triangles(tris).unwrap();
    let bad = build_conlon(6, find_sidon_set(6, 5, CONLON_SEED).unwrap().elements())
        .unwrap()
        .with_complex(corrupted)
        .unwrap();
    let d = !bad.record().free_like.passed();
    let two = bad.check_two_centers().unwrap();
    let lift = bad.verify_lift(&LiftOptions::default()).unwrap();
    println!(
        "  condition D fails: {d}; two centers witness: {:?}; lift witness: {:?}",
        two.witness, lift.witness
    );
    let flipped = d || (!two.passed && two.witness.is_some()) || (!lift.passed && lift.witness.is_some());
    c.check("at least one of {condition D, two centers, lift} fails with a witness", flipped);
    c.finish();
}
