use hdx_core::groups::sample_symmetric_generators;
use hdx_core::hdz::{baranyai_partition, build_hdz, full_skeleton_dual_lambda, HdzMode, HdzSpec};
use hdx_core::rng::derive_stream;
use hdx_core::{Coloring, FiniteGroup, GroupDescriptor, HdxError, TwoComplex};
use proptest::prelude::*;

/// Three triangles on parts `{A0, A1}`, `{B0, B1}`, `{C0, C1}`. Every edge
/// lies in one triangle, but `{A0, B0}` is present while its shift
/// `{A1, B1}` is not.
fn base_without_inv() -> TwoComplex {
    let labels = ["A0", "A1", "B0", "B1", "C0", "C1"].map(String::from).to_vec();
    let c = TwoComplex::new(labels, vec![[0, 2, 4], [0, 3, 5], [1, 2, 5]]).unwrap();
    c.with_coloring(Coloring::new(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap())
        .unwrap()
}

fn spec(mode: HdzMode, pairs: usize) -> HdzSpec {
    let groups: Vec<FiniteGroup> = [11, 13, 17]
        .map(|m| FiniteGroup::new(&GroupDescriptor::Cyclic { m }).unwrap())
        .to_vec();
    let generators = groups
        .iter()
        .enumerate()
        .map(|(c, g)| {
            sample_symmetric_generators(g, pairs, &mut derive_stream(5, &format!("hdz/{c}")))
                .unwrap()
        })
        .collect();
    HdzSpec {
        base: base_without_inv(),
        groups,
        generators,
        mode,
        independent: true,
    }
}

#[test]
fn minus_mode_needs_property_inv() {
    let base = base_without_inv();
    assert!(!base.check_property_inv().unwrap().holds);
    match build_hdz(spec(HdzMode::Minus, 1)) {
        Err(HdxError::Mode(m)) => assert!(m.contains("plus"), "{m}"),
        other => panic!("expected a mode error, got {other:?}"),
    }
}

#[test]
fn plus_mode_repairs_inv_and_meets_its_counts() {
    let build = build_hdz(spec(HdzMode::Plus, 2)).unwrap();
    assert!(build.embedded.check_property_inv().unwrap().holds);
    assert_eq!(build.embedded.num_vertices(), 12);
    assert_eq!(build.embedded.triangles().len(), 24);
    let props = build.properties(true).unwrap();
    assert_eq!(props.group_order, 11 * 13 * 17);
    assert!(props.all_match(), "{props:?}");
    assert!(build.instance.record().all_pass());
}

#[test]
fn full_skeleton_closed_form_endpoints() {
    // nu = 1 gives the trivial eigenvalue; chi = 2 reduces to nu itself.
    for chi in 2..8 {
        let one: f64 = full_skeleton_dual_lambda(chi, 1.0).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
    }
    let nu = 0.3;
    let two: f64 = full_skeleton_dual_lambda(2, nu).unwrap();
    assert!((two - nu).abs() < 1e-12);
}

proptest! {
    #[test]
    fn round_robin_partitions_are_valid(half in 2usize..12) {
        let chi = 2 * half;
        let p = baranyai_partition(chi).unwrap();
        prop_assert_eq!(p.classes.len(), chi - 1);
        prop_assert!(p.is_valid(chi));
    }

    #[test]
    fn odd_chi_has_no_partition(half in 1usize..12) {
        let r = baranyai_partition(2 * half + 1);
        prop_assert!(matches!(r, Err(HdxError::Infeasible(_))));
    }
}
