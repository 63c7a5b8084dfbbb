mod common;

use proptest::prelude::*;

use rbc_core::polytope::{contained_in, LpOutcome};
use rbc_core::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn redundancy_removal_preserves_the_set(seed in 0u64..10_000) {
        let (sys, _) = common::random_system(seed);
        let reduced = sys.remove_redundant().unwrap();
        prop_assert!(reduced.rows().len() <= sys.rows().len());
        prop_assert!(polytopes_equal(&sys, &reduced, 1e-9).unwrap().is_equal());
    }

    #[test]
    fn elimination_order_does_not_matter(seed in 0u64..10_000) {
        let (sys, elim) = common::random_system(seed);
        let forward = sys.project_out(&elim).unwrap();
        let reversed: Vec<&str> = elim.iter().rev().copied().collect();
        let backward = sys.project_out(&reversed).unwrap();
        prop_assert!(polytopes_equal(&forward, &backward, 1e-8).unwrap().is_equal());
    }

    #[test]
    fn projections_of_vertices_are_members(seed in 0u64..10_000) {
        let (sys, elim) = common::random_system(seed);
        let proj = sys.project_out(&elim).unwrap();
        for v in common::brute_vertices(&sys, 1e-9) {
            let x = common::keep_coords(&sys, &elim, &v);
            prop_assert!(proj.contains(&x, 1e-8), "{:?}", x);
        }
    }
}

#[test]
fn three_dimensional_vertices_match_brute_force() {
    let vars = ["a", "b", "c"];
    for seed in 0..100 {
        let (full, _) = common::random_system(seed);
        let sys = full.project_out(&["d", "e"]).unwrap();
        assert_eq!(sys.vars().iter().map(|v| v.as_str()).collect::<Vec<_>>(), vars);
        let ours = sys.enumerate_vertices().unwrap();
        let brute = common::brute_vertices(&sys, 1e-9);
        for b in &brute {
            assert!(ours.contains_near(b, 1e-7), "seed {seed}: missing {b:?}");
        }
        for v in &ours.points {
            assert!(brute.iter().any(|b| b.iter().zip(v).all(|(x, y)| (x - y).abs() < 1e-7)), "seed {seed}: extra {v:?}");
        }
        common::check_vertex_consistency(&sys, 1e-9).unwrap();
    }
}

#[test]
fn containment_witnesses_are_genuine() {
    for seed in 0..50 {
        let (a, _) = common::random_system(seed);
        let (b, _) = common::random_system(seed + 1000);
        if let Containment::Fails { witness, excess } = contained_in(&a, &b, 1e-8).unwrap() {
            assert!(a.contains(&witness, 1e-7), "seed {seed}");
            assert!(!b.contains(&witness, 1e-8), "seed {seed}");
            assert!((b.violation(&witness) - excess).abs() < 1e-9, "seed {seed}: {} vs {excess} at {witness:?}", b.violation(&witness));
        }
    }
}

#[test]
fn lp_handles_degenerate_and_unbounded_problems() {
    let mut s = HalfspaceSystem::with_vars(&["x", "y"]).unwrap();
    s.push_nonnegativity();
    assert!(matches!(s.maximize(&[1.0, 0.0]).unwrap(), LpOutcome::Unbounded));
    s.push_le(&[("x", 1.0), ("y", 1.0)], 1.0).unwrap();
    s.push_le(&[("x", 1.0), ("y", 2.0)], 1.0).unwrap();
    s.push_le(&[("x", 2.0), ("y", 1.0)], 2.0).unwrap();
    match s.maximize(&[1.0, 1.0]).unwrap() {
        LpOutcome::Optimal { value, .. } => assert!((value - 1.0).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    s.push_ge(&[("x", 1.0)], 2.0).unwrap();
    assert!(s.is_empty().unwrap());
    assert!(matches!(s.maximize(&[1.0, 1.0]).unwrap(), LpOutcome::Infeasible));
}

#[test]
fn instantiated_regions_have_consistent_vertices_under_finite_feedback() {
    let rates = FeedbackRates::new(0.05, 0.02).unwrap();
    for seed in 0..15 {
        for (id, scheme) in [
            (RegionId::Theorem1, Scheme::Scheme1),
            (RegionId::Theorem3v1, Scheme::Scheme2B),
            (RegionId::Theorem3v2, Scheme::Scheme2B),
        ] {
            let pmf = random_structured_pmf(&StructuredFamilySpec::binary(scheme, seed)).unwrap();
            let spec = build_region(id);
            let a = MiAssignment::from_pmf(&pmf, &spec.atoms()).unwrap();
            let inst = instantiate_region(&spec, &a, rates).unwrap();
            common::check_vertex_consistency(&inst.system, 1e-9).unwrap();
        }
    }
}

#[test]
fn projection_of_the_zero_system_is_the_origin() {
    for scheme in Scheme::ALL {
        let atoms = prefme::scheme_atoms(scheme, Transcription::Corrected);
        let a = MiAssignment::constant(&atoms, 0.0).unwrap();
        let s = build_scheme_system(scheme, &a, FeedbackRates::unlimited()).unwrap();
        let p = project_to_rates(&s).unwrap();
        assert_eq!(p.enumerate_vertices().unwrap().points, vec![vec![0.0; 3]]);
    }
}

#[test]
fn region_json_round_trip() {
    let spec = build_region(RegionId::Theorem3v2);
    let text = serde_json::to_string(&spec).unwrap();
    let back: RegionSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
    let pmf = random_structured_pmf(&StructuredFamilySpec::binary(Scheme::Scheme2B, 4)).unwrap();
    let a = MiAssignment::from_pmf(&pmf, &spec.atoms()).unwrap();
    let sys = instantiate_region(&spec, &a, FeedbackRates::unlimited()).unwrap().system;
    let back: HalfspaceSystem = serde_json::from_str(&serde_json::to_string(&sys).unwrap()).unwrap();
    assert_eq!(back, sys);
}
