mod common;

use forge_core::molgraph::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn canon(s: &str) -> String {
    canonical_form(&parse_linear(s).unwrap()).unwrap()
}

#[test]
fn equivalent_spellings_share_a_canonical_form() {
    let pairs = [
        ("OCC", "CCO"),
        ("c1ccccc1", "C1=CC=CC=C1"),
        ("C(=O)O", "OC=O"),
        ("C[C@H](O)CC", "CC[C@H](C)O"),
        ("C/C=C/C", "C\\C=C\\C"),
        ("c1ccc2ccccc2c1", "C1=CC=C2C=CC=CC2=C1"),
        ("[nH]1cccc1", "c1cc[nH]c1"),
    ];
    for (a, b) in pairs {
        assert_eq!(canon(a), canon(b), "{a} vs {b}");
    }
}

#[test]
fn stereo_and_constitution_are_distinguished() {
    let pairs = [
        ("C[C@H](O)CC", "C[C@@H](O)CC"),
        ("C/C=C/C", "C/C=C\\C"),
        ("CCO", "COC"),
        ("C1CC1", "C=CC"),
    ];
    for (a, b) in pairs {
        assert_ne!(canon(a), canon(b), "{a} vs {b}");
    }
}

#[test]
fn emitted_notation_reparses_to_the_same_graph() {
    for s in [
        "CC(=O)Oc1ccccc1C(=O)O",
        "C1CC2(C1)CCC2",
        "N#CC[C@@H](F)Cl",
        "O=S(=O)(O)c1ccc(cc1)/C=C/Br",
    ] {
        let g = parse_linear(s).unwrap();
        let back = parse_linear(&emit_linear(&g).unwrap()).unwrap();
        assert!(graphs_equivalent(&g, &back).unwrap(), "{s}");
    }
}

#[test]
fn malformed_notation_is_rejected() {
    for s in ["C1CC", "C(", "CX", "C==C", "[C"] {
        assert!(parse_linear(s).is_err(), "{s}");
    }
}

#[test]
fn valence_violations_are_reported() {
    assert!(parse_linear("C(C)(C)(C)(C)C").is_err());
}

#[test]
fn heavy_atom_counts() {
    assert_eq!(count_heavy_atoms("CCO").unwrap(), 3);
    assert_eq!(count_heavy_atoms("c1ccccc1").unwrap(), 6);
    assert_eq!(count_heavy_atoms("[H]C([H])([H])[H]").unwrap(), 1);
}

#[test]
fn ring_systems_of_known_skeletons() {
    let cases = [
        ("CCCC", 0, false, false, false),
        ("C1CCCCC1", 1, false, false, false),
        ("c1ccc2ccccc2c1", 1, true, false, false),
        ("C1CCC2(C1)CCCC2", 1, false, true, false),
        ("C1CC2CCC1C2", 1, true, false, true),
        ("C1CC1CC1CC1", 2, false, false, false),
    ];
    for (s, systems, fused, spiro, bridged) in cases {
        let summary = perceive_ring_systems(&parse_linear(s).unwrap());
        assert_eq!(summary.ring_systems.len(), systems, "{s}");
        if let Some(rs) = summary.ring_systems.first() {
            assert_eq!(
                (rs.fused, rs.has_spiro_internal, rs.has_bridge_internal),
                (fused, spiro, bridged),
                "{s}"
            );
        }
    }
}

#[test]
fn difficulty_of_worked_examples() {
    for row in common::tsv("difficulty.tsv") {
        let expected: Difficulty = row[0].parse().unwrap();
        assert_eq!(
            classify_difficulty_notation(&row[1]).unwrap(),
            expected,
            "{}",
            row[2]
        );
    }
}

#[test]
fn difficulty_boundaries() {
    assert_eq!(
        classify_difficulty_notation("C1CCCCC1CC1CCCC1").unwrap(),
        Difficulty::Easy
    );
    assert_eq!(
        classify_difficulty_notation("c1ccc2ccccc2c1").unwrap(),
        Difficulty::Medium
    );
    assert_eq!(
        classify_difficulty_notation("c1ccc2cc3ccccc3cc2c1").unwrap(),
        Difficulty::Hard
    );
    assert_eq!(
        classify_difficulty_notation("C1CCC2(C1)CCCC2").unwrap(),
        Difficulty::Easy
    );
    assert_eq!(
        classify_difficulty_notation("c1ccc2ccccc2c1Cc1ccc2ccccc2c1").unwrap(),
        Difficulty::Hard
    );
    assert_eq!(
        classify_difficulty_notation("C1CC2(CCC3CCCCC32)C1").unwrap(),
        Difficulty::Hard
    );
}

#[test]
fn ring_perception_matches_brute_force_on_small_skeletons() {
    for (n, edges) in common::all_connected_skeletons(7) {
        let g = common::skeleton(n, &edges);
        if let Some(d) = common::ring_perception_disagreement(&g) {
            panic!("{edges:?}: {d}");
        }
    }
}

#[test]
fn skeleton_enumeration_counts_known_classes() {
    // Connected graphs with maximum degree 4, counted from the networkx graph atlas.
    let all = common::all_connected_skeletons(7);
    let counts: Vec<usize> = (1..=7)
        .map(|n| all.iter().filter(|(k, _)| *k == n).count())
        .collect();
    assert_eq!(counts, vec![1, 1, 2, 6, 21, 78, 353]);
}

#[test]
fn matching_is_maximum_on_a_hexagon() {
    let edges: Vec<MatchingEdge> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
    let m = maximum_matching(6, &edges);
    assert!(m.iter().all(Option::is_some));
}

#[test]
fn canonical_form_is_invariant_on_random_molecules() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..40 {
        let g = common::random_molecule(&mut rng, 25);
        let c = canonical_form(&g).unwrap();
        for _ in 0..5 {
            let p = common::random_permutation(&mut rng, g.atom_count());
            assert_eq!(canonical_form(&g.permuted(&p)).unwrap(), c);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutation_preserves_canonical_form(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = common::random_molecule(&mut rng, 30);
        let p = common::random_permutation(&mut rng, g.atom_count());
        prop_assert_eq!(canonical_form(&g).unwrap(), canonical_form(&g.permuted(&p)).unwrap());
    }

    #[test]
    fn emit_then_parse_is_equivalent(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = common::random_molecule(&mut rng, 30);
        let s = emit_linear(&g).unwrap();
        let back = parse_linear(&s).unwrap();
        prop_assert!(graphs_equivalent(&g, &back).unwrap(), "{}", s);
    }

    #[test]
    fn ring_perception_agrees_with_cycle_enumeration(seed in any::<u64>(), n in 7usize..=12, extra in 0usize..5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let edges = common::random_skeleton(&mut rng, n, extra);
        let g = common::skeleton(n, &edges);
        prop_assert_eq!(common::ring_perception_disagreement(&g), None, "{:?}", edges);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn acyclic_substituents_keep_difficulty(seed in any::<u64>(), chain in 1usize..6) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut g = common::random_molecule(&mut rng, 20);
        let before = classify_difficulty(&g);
        let anchor = (0..g.atom_count()).find(|&a| g.hydrogen_count(a) > 0);
        if let Some(mut prev) = anchor {
            for _ in 0..chain {
                let a = g.add_atom(Atom::new(Element::C));
                g.add_bond(prev, a, BondOrder::Single).unwrap();
                prev = a;
            }
        }
        prop_assert_eq!(classify_difficulty(&g), before);
    }
}
