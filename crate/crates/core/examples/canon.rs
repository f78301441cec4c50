fn main() {
    for s in std::env::args().skip(1) {
        match forge_core::molgraph::parse_linear(&s) {
            Ok(g) => println!(
                "{s}\t{:?}\t{:?}",
                forge_core::molgraph::canonical_form(&g),
                forge_core::molgraph::classify_difficulty(&g)
            ),
            Err(e) => println!("{s}\tERR {e}"),
        }
    }
}
