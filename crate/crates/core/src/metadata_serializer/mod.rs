//! XML form of the metadata tree.
//!
//! Output uses one tab per depth level and keeps attributes in schema order.
//! Elements with neither text nor children are written as `<x ...></x>`.

use std::fmt::Write;

use thiserror::Error;

use crate::parse_tree::{Element, MetadataTree, Tag};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SerializeError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("unknown tag <{0}>")]
    UnknownTag(String),
}

pub fn serialize(tree: &MetadataTree) -> String {
    let mut out = String::new();
    write_element(&mut out, &tree.root, 0);
    out
}

fn write_element(out: &mut String, e: &Element, depth: usize) {
    for _ in 0..depth {
        out.push('\t');
    }
    let _ = write!(out, "<{}", e.tag);
    for (k, v) in e.attributes() {
        let _ = write!(out, " {k}=\"{}\"", escape(v, true));
    }
    out.push('>');
    if e.children.is_empty() {
        if let Some(t) = &e.text {
            out.push_str(&escape(t, false));
        }
    } else {
        out.push('\n');
        for c in &e.children {
            write_element(out, c, depth + 1);
        }
        for _ in 0..depth {
            out.push('\t');
        }
    }
    let _ = writeln!(out, "</{}>", e.tag);
}

fn escape(s: &str, attr: bool) -> String {
    let mut o = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => o.push_str("&amp;"),
            '<' => o.push_str("&lt;"),
            '>' => o.push_str("&gt;"),
            '"' if attr => o.push_str("&quot;"),
            _ => o.push(c),
        }
    }
    o
}

pub fn deserialize(xml: &str) -> Result<MetadataTree, SerializeError> {
    let doc =
        roxmltree::Document::parse(xml).map_err(|e| SerializeError::MalformedXml(e.to_string()))?;
    Ok(MetadataTree::new(read_element(doc.root_element())?))
}

fn read_element(node: roxmltree::Node) -> Result<Element, SerializeError> {
    let name = node.tag_name().name();
    let tag = Tag::from_name(name).ok_or_else(|| SerializeError::UnknownTag(name.to_string()))?;
    let mut e = Element::new(tag);
    for a in node.attributes() {
        e.set_attr(a.name(), a.value());
    }
    let mut text = String::new();
    for c in node.children() {
        if c.is_element() {
            e.children.push(read_element(c)?);
        } else if let Some(t) = c.text() {
            text.push_str(t);
        }
    }
    if e.children.is_empty() && !text.is_empty() {
        e.text = Some(text);
    }
    Ok(e)
}

/// Collapses whitespace between tags so typeset listings compare equal to emitted XML.
pub fn normalize_whitespace(xml: &str) -> String {
    xml.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("")
}
