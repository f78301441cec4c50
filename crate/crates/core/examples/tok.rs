fn main() {
    for s in std::env::args().skip(1) {
        match forge_core::tokenizer::tokenize(&s) {
            Ok(t) => println!(
                "{s}: {}",
                t.iter()
                    .map(|t| format!("{}:{:?}", t.text, t.kind))
                    .collect::<Vec<_>>()
                    .join(" ")
            ),
            Err(e) => println!("{s}: ERR {e}"),
        }
    }
}
