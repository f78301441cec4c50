use crate::metadata_serializer::serialize;
use crate::parse_tree::{MetadataTree, Tag};

pub const PROMPT_VERSION: &str = "v1";

const GENERATION: &str = include_str!("../../resources/prompts/v1/generation.txt");
const GENERATION_NO_METADATA: &str =
    include_str!("../../resources/prompts/v1/generation_no_metadata.txt");
const FUSED: &str = include_str!("../../resources/prompts/v1/fused.txt");
const BRIDGED: &str = include_str!("../../resources/prompts/v1/bridged.txt");
const SPIRO: &str = include_str!("../../resources/prompts/v1/spiro.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemanticsBlock {
    Fused,
    Bridged,
    Spiro,
}

impl SemanticsBlock {
    pub fn title(self) -> &'static str {
        match self {
            SemanticsBlock::Fused => "Fused Ring Semantics (XML)",
            SemanticsBlock::Bridged => "Bridged Ring Semantics (XML)",
            SemanticsBlock::Spiro => "Spiro Ring Semantics (XML)",
        }
    }

    fn body(self) -> &'static str {
        match self {
            SemanticsBlock::Fused => FUSED,
            SemanticsBlock::Bridged => BRIDGED,
            SemanticsBlock::Spiro => SPIRO,
        }
    }
}

/// Blocks the tree needs, keyed on the ring descriptors it contains.
pub fn semantics_blocks(tree: &MetadataTree) -> Vec<SemanticsBlock> {
    let mut out = Vec::new();
    if tree.contains_tag(Tag::FusedRingLabels) {
        out.push(SemanticsBlock::Fused);
    }
    if tree.contains_tag(Tag::BridgeChild) {
        out.push(SemanticsBlock::Bridged);
    }
    if tree.contains_tag(Tag::SpiroLocant) {
        out.push(SemanticsBlock::Spiro);
    }
    out
}

fn fill(template: &str, name: &str, notation: &str, xml: &str, semantics: &str) -> String {
    template
        .replace("{SEMANTICS}\n\n", semantics)
        .replace("{IUPAC}", name)
        .replace("{SMILES}", notation)
        .replace("{XML_METADATA}", xml.trim_end())
}

pub fn assemble_prompt(name: &str, notation: &str, tree: &MetadataTree) -> String {
    let mut semantics = String::new();
    for b in semantics_blocks(tree) {
        semantics.push_str(&format!("## {}\n\n{}\n", b.title(), b.body().trim_end()));
        semantics.push('\n');
    }
    fill(GENERATION, name, notation, &serialize(tree), &semantics)
}

/// The ablation variant that sees only the name and notation.
pub fn assemble_prompt_without_metadata(name: &str, notation: &str) -> String {
    fill(GENERATION_NO_METADATA, name, notation, "", "")
}
