mod common;

use forge_core::tokenizer::{normalize_name, tokenize, Locant, TokenClass, TokenizeError};
use proptest::prelude::*;
use TokenClass::*;

fn shape(name: &str) -> Vec<(String, TokenClass)> {
    tokenize(name)
        .unwrap()
        .into_iter()
        .map(|t| (t.text, t.kind))
        .collect()
}

fn expect(name: &str, want: &[(&str, TokenClass)]) {
    let want: Vec<(String, TokenClass)> = want.iter().map(|(t, k)| (t.to_string(), *k)).collect();
    assert_eq!(shape(name), want, "{name}");
}

#[test]
fn propan_2_ol() {
    expect(
        "propan-2-ol",
        &[
            ("prop", AlkaneStem),
            ("an", SaturationSuffix),
            ("-", Hyphen),
            ("2-", Locant),
            ("ol", PrincipalSuffix),
        ],
    );
}

#[test]
fn methyl() {
    expect("methyl", &[("meth", AlkaneStem), ("yl", InlineSuffix)]);
}

#[test]
fn cyclohexanol() {
    expect(
        "cyclohexan-1-ol",
        &[
            ("cyclo", RingStem),
            ("hex", AlkaneStem),
            ("an", SaturationSuffix),
            ("-", Hyphen),
            ("1-", Locant),
            ("ol", PrincipalSuffix),
        ],
    );
}

#[test]
fn hantzsch_widman_ending_is_not_a_suffix() {
    let kinds: Vec<TokenClass> = tokenize("1,2-oxazole")
        .unwrap()
        .iter()
        .map(|t| t.kind)
        .collect();
    assert!(!kinds.contains(&PrincipalSuffix), "{kinds:?}");
}

#[test]
fn fusion_and_spiro_names() {
    let t = shape("spiro[cyclopentane-1,1'-indene]");
    assert_eq!(t[0], ("spiro".to_string(), SpiroKeyword));
    assert!(t.iter().any(|(s, k)| s == "1,1'-" && *k == Locant));
    let t = shape("indeno[5,6-b]furan");
    assert!(
        t.iter().any(|(s, k)| s == "[5,6-b]" && *k == FusionLetter),
        "{t:?}"
    );
}

#[test]
fn locants_carry_letters_and_primes() {
    let t = tokenize("4a,8a-propanoquinoline").unwrap();
    let locs = t[0].locants.clone().unwrap();
    assert_eq!(
        locs,
        vec![Locant::parse("4a").unwrap(), Locant::parse("8a").unwrap()]
    );
    assert_eq!(locs[1].letter, Some('a'));
    assert_eq!(Locant::parse("7''").unwrap().primes, 2);
    assert_eq!(Locant::parse("0"), None);
}

#[test]
fn out_of_subset_and_unknown_input() {
    assert!(matches!(
        tokenize("bicyclo[2.2.1]heptane"),
        Err(TokenizeError::UnsupportedNomenclature(_))
    ));
    assert!(matches!(
        tokenize("propan-2-qq"),
        Err(TokenizeError::UnknownToken(_))
    ));
    assert_eq!(tokenize(""), Err(TokenizeError::Empty));
}

#[test]
fn typographic_primes_are_normalized() {
    assert_eq!(
        normalize_name("5\u{2032},6\u{2032}-dihydro"),
        "5',6'-dihydro"
    );
    assert_eq!(
        shape("spiro[cyclopentane-1,1\u{2032}-indene]"),
        shape("spiro[cyclopentane-1,1'-indene]")
    );
}

#[test]
fn tokens_cover_every_corpus_name() {
    for row in common::tsv("names.tsv") {
        let name = normalize_name(&row[0]);
        let tokens = tokenize(&name).unwrap();
        let joined: String = tokens.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(joined, name);
        let mut at = 0;
        for t in &tokens {
            assert_eq!(t.span.0, at, "{name}");
            assert_eq!(&name[t.span.0..t.span.1], t.text);
            at = t.span.1;
        }
        assert_eq!(at, name.len());
    }
}

proptest! {
    #[test]
    fn prime_count_round_trips(number in 1u32..500, letter in proptest::option::of(proptest::char::range('a', 'z')), primes in 0u32..4) {
        let mut s = number.to_string();
        if let Some(c) = letter {
            s.push(c);
        }
        s.push_str(&"'".repeat(primes as usize));
        let l = Locant::parse(&s).unwrap();
        prop_assert_eq!(l.primes, primes);
        prop_assert_eq!(l.letter, letter);
        prop_assert_eq!(l.to_string(), s);
    }

    #[test]
    fn tokenize_is_deterministic(i in 0usize..88) {
        let rows = common::tsv("names.tsv");
        let name = &rows[i % rows.len()][0];
        prop_assert_eq!(tokenize(name).unwrap(), tokenize(name).unwrap());
    }
}
