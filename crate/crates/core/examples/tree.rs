fn main() {
    let xml = std::env::var("XML").is_ok();
    for s in std::env::args().skip(1) {
        match forge_core::parse_name(&s) {
            Ok(p) => {
                if xml {
                    print!("{}", forge_core::metadata_serializer::serialize(&p.tree));
                }
                println!(
                    "{s}\t{}",
                    forge_core::molgraph::emit_linear(&p.graph).unwrap()
                );
            }
            Err(e) => println!("{s}\tERR {e}"),
        }
    }
}
