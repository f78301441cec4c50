mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use forge_core::metadata_serializer::{
    deserialize, normalize_whitespace, serialize, SerializeError,
};
use forge_core::molgraph::{graphs_equivalent, parse_linear};
use forge_core::parse_tree::{
    build_parse_tree, rearrange_affiliations, retain_elements, Element, MetadataTree, Tag,
};
use forge_core::structure_builder::scope_index;
use forge_core::tokenizer::tokenize;
use forge_core::{parse_name, NameError};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

const GOLD_SPIRO: &str = "(7'R)-7'-methyl-7-((E)-prop-1-en-1-yl)-5',6'-dihydrospiro[benzo[e][1,2]oxazine-4,4'-[2,5]methanocyclopenta[b]furan]";

fn corpus() -> Vec<(String, String)> {
    common::tsv("names.tsv")
        .into_iter()
        .map(|r| (r[0].clone(), r[1].clone()))
        .collect()
}

fn find<'a>(e: &'a Element, tag: Tag) -> Vec<&'a Element> {
    e.walk().into_iter().filter(|x| x.tag == tag).collect()
}

#[test]
fn corpus_names_build_their_reference_structures() {
    let rows = corpus();
    assert!(rows.len() >= 50);
    let mut failures = Vec::new();
    for (name, smiles) in &rows {
        let reference = parse_linear(smiles).unwrap();
        match parse_name(name) {
            Ok(p) if graphs_equivalent(&p.graph, &reference).unwrap() => {}
            Ok(_) => failures.push(format!("{name}: wrong structure")),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn gold_spiro_name_reproduces_gold_metadata() {
    let start = Instant::now();
    let parsed = parse_name(GOLD_SPIRO).unwrap();
    let xml = serialize(&parsed.tree);
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert_eq!(
        normalize_whitespace(&xml),
        normalize_whitespace(&common::fixture("gold_spiro_metadata.xml"))
    );
}

#[test]
fn gold_spiro_name_descriptors_land_where_they_belong() {
    let tree = parse_name(GOLD_SPIRO).unwrap().tree;
    let labels = find(&tree.root, Tag::FusedRingLabels);
    assert!(labels
        .iter()
        .any(|l| l.attr("labels") == Some("1/2/3/4/4a/5/6/7/8/8a")));
    let bridge = find(&tree.root, Tag::BridgeChild);
    assert_eq!(bridge[0].attr("bridgeLocants"), Some("2,5"));
    assert_eq!(bridge[0].attr("labels"), Some("7"));
    assert_eq!(
        find(&tree.root, Tag::SpiroLocant)[0].text.as_deref(),
        Some("4,4'")
    );
    let hydro: Vec<_> = find(&tree.root, Tag::Hydro)
        .iter()
        .map(|h| h.attr("locant").unwrap().to_string())
        .collect();
    assert_eq!(hydro, ["6'", "5'"]);

    // E belongs to the propenyl substituent, 7'R to the spiro root.
    let root = find(&tree.root, Tag::Root)[0];
    let r = root.first_child(Tag::StereoChemistry).unwrap();
    assert_eq!((r.attr("locant"), r.attr("value")), (Some("7'"), Some("R")));
    let bracket = find(&tree.root, Tag::Bracket)[0];
    let e = find(bracket, Tag::StereoChemistry);
    assert_eq!(e.len(), 1);
    assert_eq!(e[0].attr("value"), Some("E"));
}

#[test]
fn e_descriptor_follows_the_double_bond() {
    let backbone = parse_name("(E)-5-(prop-1-en-1-yl)non-3-ene").unwrap().tree;
    let root = find(&backbone.root, Tag::Root)[0];
    assert!(root.first_child(Tag::StereoChemistry).is_some());
    assert!(find(find(&backbone.root, Tag::Bracket)[0], Tag::StereoChemistry).is_empty());

    let nested = parse_name("(E)-5-(prop-1-en-1-yl)non-1-ene").unwrap();
    let root = find(&nested.tree.root, Tag::Root)[0];
    assert!(root.first_child(Tag::StereoChemistry).is_none());
    assert_eq!(
        find(
            find(&nested.tree.root, Tag::Bracket)[0],
            Tag::StereoChemistry
        )
        .len(),
        1
    );
    assert!(
        graphs_equivalent(&nested.graph, &parse_linear("C=CCCC(CCCC)/C=C/C").unwrap()).unwrap()
    );
}

#[test]
fn ambiguous_bare_descriptor_is_an_error() {
    let r = parse_name("(E)-octa-2,5-diene");
    assert!(matches!(r, Err(NameError::Tree(_))), "{r:?}");
}

#[test]
fn propan_2_ol_tree() {
    let tree = build_parse_tree(&tokenize("propan-2-ol").unwrap()).unwrap();
    let group = find(&tree.root, Tag::Group)[0];
    assert_eq!(
        (
            group.attr("type"),
            group.attr("subType"),
            group.attr("value"),
            group.attr("labels")
        ),
        (
            Some("chain"),
            Some("alkaneStem"),
            Some("CCC"),
            Some("numeric")
        )
    );
    let suffix = find(&tree.root, Tag::Suffix)[0];
    assert_eq!(
        (suffix.attr("value"), suffix.attr("locant")),
        (Some("ol"), Some("2"))
    );
    assert!(graphs_equivalent(
        &parse_name("propan-2-ol").unwrap().graph,
        &parse_linear("CC(O)C").unwrap()
    )
    .unwrap());
}

#[test]
fn methyl_prefix_is_a_substituent_part() {
    let tree = parse_name("2-methylpropane").unwrap().tree;
    let sub = find(&tree.root, Tag::Substituent)[0];
    assert_eq!(
        sub.first_child(Tag::Group).unwrap().attr("value"),
        Some("C")
    );
    assert_eq!(
        sub.first_child(Tag::Suffix).unwrap().attr("value"),
        Some("yl")
    );
}

#[test]
fn fused_worked_example() {
    let tree = parse_name("indeno[5,6-b]furan").unwrap().tree;
    let l = find(&tree.root, Tag::FusedRingLabels)[0];
    assert_eq!(l.attr("labels"), Some("1/2/3/3a/4/4a/5/6/7/7a/8/8a"));
    assert_eq!(
        l.attr("originalLabels"),
        Some("(1,)/(5,)/(4,)/(3,6)/(,7)/(,7a)/(,1)/(,2)/(,3)/(,3a)/(,4)/(2,5)")
    );
}

#[test]
fn bridged_worked_example() {
    let tree = parse_name("4a,8a-propanoquinoline").unwrap().tree;
    let b = find(&tree.root, Tag::BridgeChild)[0];
    assert_eq!(
        (b.attr("labels"), b.attr("bridgeLocants"), b.attr("value")),
        (Some("11/10/9"), Some("4a,8a"), Some("-CCC-"))
    );
}

#[test]
fn spiro_worked_example() {
    let tree = parse_name("spiro[cyclopentane-1,1'-indene]").unwrap().tree;
    assert_eq!(
        find(&tree.root, Tag::SpiroLocant)[0].text.as_deref(),
        Some("1,1'")
    );
    let indene = find(&tree.root, Tag::SpiroSystemComponent)[1];
    assert_eq!(indene.attr("labels"), Some("1/2/3/3a/4/5/6/7/7a"));
    assert_eq!(
        indene.attr("originalLabels"),
        Some("(1,)/(2,)/(3,)/(4,1)/(,2)/(,3)/(,4)/(,5)/(5,6)")
    );
}

#[test]
fn symmetric_spiro_has_one_shared_atom() {
    let g = parse_name("spiro[cyclopropane-1,1'-cyclopropane]")
        .unwrap()
        .graph;
    assert_eq!(g.heavy_atom_count(), 5);
    assert_eq!((0..g.atom_count()).filter(|&a| g.degree(a) == 4).count(), 1);
}

#[test]
fn unsupported_names_fail_cleanly() {
    for name in ["bicyclo[2.2.1]heptane", "propan-9-ol", "zzz", "2-methyl"] {
        assert!(parse_name(name).is_err(), "{name}");
    }
}

#[test]
fn serializer_escapes_and_round_trips() {
    let tree = MetadataTree::new(
        Element::new(Tag::Molecule)
            .with_attr("name", "a<b & \"c\"")
            .with_child(
                Element::new(Tag::Hyphen)
                    .with_attr("value", "-")
                    .with_text("x & y < z"),
            ),
    );
    let xml = serialize(&tree);
    assert!(xml.contains("&lt;") && xml.contains("&amp;") && xml.contains("&quot;"));
    assert_eq!(deserialize(&xml).unwrap(), tree);
}

#[test]
fn serializer_rejects_bad_input() {
    assert!(matches!(
        deserialize("<molecule>"),
        Err(SerializeError::MalformedXml(_))
    ));
    assert!(matches!(
        deserialize("<molecule><banana></banana></molecule>"),
        Err(SerializeError::UnknownTag(_))
    ));
}

#[test]
fn gold_listing_round_trips_through_the_serializer() {
    let gold = common::fixture("gold_spiro_metadata.xml");
    let tree = deserialize(&gold).unwrap();
    assert_eq!(
        normalize_whitespace(&serialize(&tree)),
        normalize_whitespace(&gold)
    );
}

fn raw_tree(name: &str) -> MetadataTree {
    build_parse_tree(&tokenize(name).unwrap()).unwrap()
}

/// Nodes by tag and attributes. A group that receives hydro children drops its own text.
fn multiset(tree: &MetadataTree) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for e in tree.root.walk() {
        let key = format!("{}|{:?}", e.tag, e.attributes());
        *m.entry(key).or_insert(0) += 1;
    }
    m
}

fn random_text(rng: &mut StdRng) -> String {
    const CHARS: &[char] = &[
        'a', 'b', 'Z', '1', '\'', '&', '<', '>', '"', '(', ',', '-', '/', ' ',
    ];
    let n = rng.gen_range(1..8);
    let s: String = (0..n).map(|_| *CHARS.choose(rng).unwrap()).collect();
    format!("x{s}x")
}

fn random_element(rng: &mut StdRng, depth: usize) -> Element {
    let tag = *Tag::ALL.choose(rng).unwrap();
    let mut e = Element::new(tag);
    for name in tag.attribute_order() {
        if rng.gen_bool(0.4) {
            e.set_attr(name, random_text(rng));
        }
    }
    if depth > 0 && rng.gen_bool(0.6) {
        for _ in 0..rng.gen_range(1..4) {
            e.children.push(random_element(rng, depth - 1));
        }
    } else if rng.gen_bool(0.5) {
        e.text = Some(random_text(rng));
    }
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn serialize_deserialize_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let tree = MetadataTree::new(random_element(&mut rng, 4));
        let xml = serialize(&tree);
        let back = deserialize(&xml).unwrap();
        prop_assert_eq!(serialize(&back), xml);
        prop_assert_eq!(back, tree);
    }

    #[test]
    fn retention_and_element_count_survive_rearrangement(i in 0usize..1000) {
        let rows = corpus();
        let name = &rows[i % rows.len()].0;
        let marked = retain_elements(raw_tree(name));
        let before = marked.retained_triples();
        let count = marked.root.count();
        let nodes = multiset(&marked);
        let after = rearrange_affiliations(marked).unwrap();
        prop_assert_eq!(after.retained_triples(), before);
        prop_assert_eq!(after.root.count(), count);
        prop_assert_eq!(multiset(&after), nodes);
    }

    #[test]
    fn retain_is_idempotent(i in 0usize..1000) {
        let rows = corpus();
        let once = retain_elements(raw_tree(&rows[i % rows.len()].0));
        let twice = retain_elements(once.clone());
        prop_assert_eq!(once.retained_triples(), twice.retained_triples());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn descriptor_locants_belong_to_their_part(i in 0usize..1000) {
        let rows = corpus();
        let tree = parse_name(&rows[i % rows.len()].0).unwrap().tree;
        for scope in scope_index(&tree).unwrap() {
            let part = tree.at(&scope.path).unwrap();
            let descriptors = part.walk().into_iter().filter(|e| matches!(e.tag, Tag::StereoChemistry | Tag::Hydro));
            for d in descriptors {
                if let Some(l) = d.attr("locant") {
                    prop_assert!(scope.labels.iter().any(|x| x == l), "{} not in {:?}", l, scope.labels);
                }
            }
        }
    }

    #[test]
    fn ring_labels_are_unique(i in 0usize..1000) {
        let rows = corpus();
        let tree = parse_name(&rows[i % rows.len()].0).unwrap().tree;
        for e in tree.root.walk() {
            if let Some(l) = e.attr("labels").filter(|l| l.contains('/')) {
                let mut v: Vec<&str> = l.split('/').collect();
                let n = v.len();
                v.sort_unstable();
                v.dedup();
                prop_assert_eq!(v.len(), n, "{}", l);
            }
        }
    }
}
