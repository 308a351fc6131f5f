//! Labeled ordered document trees with pre-order node IDs.
//!
//! Every element and every attribute becomes a node. Attributes of an element
//! are placed as its first children, in document order, followed by the child
//! elements. Text is not modelled as separate nodes: each text chunk is
//! tokenized and its keywords attach to the enclosing element.
//!
//! Keywords are compared exactly and case-sensitively. No normalization
//! (case folding, punctuation stripping, stemming) is applied anywhere.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use quick_xml::events::Event;
use quick_xml::Reader;

use crate::error::ParseError;
use crate::vocab::{KeywordId, Vocabulary};

/// Pre-order node number. The document root is always `1`; `0` is the
/// "no parent" sentinel.
pub type NodeId = u32;

/// Upper bound on node count so every ID fits a signed 32-bit integer.
pub const MAX_NODES: usize = i32::MAX as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Element,
    Attribute,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub parent: NodeId,
    /// One past the largest ID in this node's subtree.
    pub end: NodeId,
    pub kind: NodeKind,
    pub label: KeywordId,
    /// Element text chunks (trimmed, joined by one space) or the attribute value.
    pub text: Box<str>,
    /// Directly contained keywords, sorted and duplicate-free.
    pub keywords: Box<[KeywordId]>,
}

impl Node {
    pub fn contains_directly(&self, kw: KeywordId) -> bool {
        self.keywords.binary_search(&kw).is_ok()
    }
}

/// An immutable parsed document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentTree {
    nodes: Vec<Node>,
    vocab: Vocabulary,
}

impl DocumentTree {
    pub const ROOT: NodeId = 1;

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize - 1]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn label(&self, id: NodeId) -> &str {
        self.vocab.resolve(self.node(id).label)
    }

    pub fn direct_keywords(&self, id: NodeId) -> impl Iterator<Item = &str> + '_ {
        self.node(id)
            .keywords
            .iter()
            .map(|&k| self.vocab.resolve(k))
    }

    /// Children in document order (attributes first).
    pub fn children(&self, id: NodeId) -> Children<'_> {
        let n = self.node(id);
        Children {
            tree: self,
            next: id + 1,
            end: n.end,
        }
    }

    /// True when `anc` is a proper ancestor of `desc`.
    pub fn is_ancestor(&self, anc: NodeId, desc: NodeId) -> bool {
        anc < desc && desc < self.node(anc).end
    }

    pub(crate) fn from_parts(nodes: Vec<Node>, vocab: Vocabulary) -> Self {
        DocumentTree { nodes, vocab }
    }

    pub fn to_xml(&self) -> String {
        let mut out = String::new();
        if !self.nodes.is_empty() {
            self.write_element(Self::ROOT, &mut out);
        }
        out
    }

    fn write_element(&self, id: NodeId, out: &mut String) {
        // explicit stack of (node, closing?) keeps deep documents off the call stack
        let mut stack = vec![(id, false)];
        while let Some((id, closing)) = stack.pop() {
            let node = self.node(id);
            let name = self.vocab.resolve(node.label);
            if closing {
                let _ = write!(out, "</{name}>");
                continue;
            }
            let _ = write!(out, "<{name}");
            let mut elems = Vec::new();
            for c in self.children(id) {
                let child = self.node(c);
                match child.kind {
                    NodeKind::Attribute => {
                        let _ = write!(
                            out,
                            " {}=\"{}\"",
                            self.vocab.resolve(child.label),
                            escape(&child.text, true)
                        );
                    }
                    NodeKind::Element => elems.push(c),
                }
            }
            if elems.is_empty() && node.text.is_empty() {
                out.push_str("/>");
                continue;
            }
            out.push('>');
            out.push_str(&escape(&node.text, false));
            stack.push((id, true));
            for &c in elems.iter().rev() {
                stack.push((c, false));
            }
        }
    }
}

pub struct Children<'a> {
    tree: &'a DocumentTree,
    next: NodeId,
    end: NodeId,
}

impl Iterator for Children<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        if self.next >= self.end {
            return None;
        }
        let id = self.next;
        self.next = self.tree.node(id).end;
        Some(id)
    }
}

fn escape(s: &str, attr: bool) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            '"' if attr => out.push_str("&quot;"),
            '\t' if attr => out.push_str("&#9;"),
            '\n' if attr => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    out
}

/// Splits at runs of Unicode whitespace; every other character is kept verbatim.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Incremental pre-order tree construction.
///
/// Call order mirrors a SAX stream: `start_element`, then that element's
/// `attribute`s, then any mix of `text`, nested elements and `end_element`.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    nodes: Vec<Node>,
    vocab: Vocabulary,
    open: Vec<OpenElement>,
    closed_root: bool,
    scratch: Vec<KeywordId>,
}

#[derive(Debug)]
struct OpenElement {
    id: NodeId,
    text: String,
    keywords: Vec<KeywordId>,
    has_children: bool,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("document has more than one root element")]
    MultipleRoots,
    #[error("attribute `{0}` appears after element content")]
    LateAttribute(String),
    #[error("attribute or text outside of any element")]
    NoOpenElement,
    #[error("unbalanced end_element")]
    Unbalanced,
    #[error("document has no root element")]
    Empty,
    #[error("element `{0}` not closed")]
    Unclosed(String),
    #[error("node count exceeds {MAX_NODES}")]
    TooManyNodes,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn next_id(&self) -> Result<NodeId, BuildError> {
        if self.nodes.len() >= MAX_NODES {
            return Err(BuildError::TooManyNodes);
        }
        Ok(self.nodes.len() as NodeId + 1)
    }

    pub fn start_element(&mut self, name: &str) -> Result<NodeId, BuildError> {
        if self.open.is_empty() && (self.closed_root || !self.nodes.is_empty()) {
            return Err(BuildError::MultipleRoots);
        }
        let id = self.next_id()?;
        let parent = match self.open.last_mut() {
            Some(p) => {
                p.has_children = true;
                p.id
            }
            None => 0,
        };
        let label = self.vocab.intern(name);
        let mut keywords = Vec::new();
        for tok in tokenize(name) {
            keywords.push(self.vocab.intern(tok));
        }
        self.nodes.push(Node {
            id,
            parent,
            end: id + 1,
            kind: NodeKind::Element,
            label,
            text: "".into(),
            keywords: Box::new([]),
        });
        self.open.push(OpenElement {
            id,
            text: String::new(),
            keywords,
            has_children: false,
        });
        Ok(id)
    }

    pub fn attribute(&mut self, name: &str, value: &str) -> Result<NodeId, BuildError> {
        let parent = match self.open.last() {
            Some(p) if p.has_children => return Err(BuildError::LateAttribute(name.into())),
            Some(p) => p.id,
            None => return Err(BuildError::NoOpenElement),
        };
        let id = self.next_id()?;
        let label = self.vocab.intern(name);
        self.scratch.clear();
        for tok in tokenize(name).into_iter().chain(tokenize(value)) {
            let k = self.vocab.intern(tok);
            self.scratch.push(k);
        }
        self.scratch.sort_unstable();
        self.scratch.dedup();
        self.nodes.push(Node {
            id,
            parent,
            end: id + 1,
            kind: NodeKind::Attribute,
            label,
            text: value.into(),
            keywords: self.scratch.as_slice().into(),
        });
        Ok(id)
    }

    pub fn text(&mut self, text: &str) -> Result<(), BuildError> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Ok(());
        }
        let Some(top) = self.open.last_mut() else {
            return Err(BuildError::NoOpenElement);
        };
        if !top.text.is_empty() {
            top.text.push(' ');
        }
        top.text.push_str(trimmed);
        for tok in tokenize(trimmed) {
            top.keywords.push(self.vocab.intern(tok));
        }
        Ok(())
    }

    pub fn end_element(&mut self) -> Result<NodeId, BuildError> {
        let mut el = self.open.pop().ok_or(BuildError::Unbalanced)?;
        let end = self.nodes.len() as NodeId + 1;
        el.keywords.sort_unstable();
        el.keywords.dedup();
        let node = &mut self.nodes[el.id as usize - 1];
        node.end = end;
        node.text = el.text.into_boxed_str();
        node.keywords = el.keywords.into_boxed_slice();
        if self.open.is_empty() {
            self.closed_root = true;
        }
        Ok(el.id)
    }

    pub fn finish(self) -> Result<DocumentTree, BuildError> {
        if let Some(el) = self.open.last() {
            let name = self.vocab.resolve(self.nodes[el.id as usize - 1].label);
            return Err(BuildError::Unclosed(name.to_string()));
        }
        if self.nodes.is_empty() {
            return Err(BuildError::Empty);
        }
        // canonical keyword numbering, independent of interning order
        let (vocab, remap) = self.vocab.into_sorted();
        let mut nodes = self.nodes;
        for node in &mut nodes {
            node.label = remap[node.label.index()];
            for k in node.keywords.iter_mut() {
                *k = remap[k.index()];
            }
            node.keywords.sort_unstable();
        }
        Ok(DocumentTree::from_parts(nodes, vocab))
    }
}

/// Parses a UTF-8 XML document.
pub fn parse_document(bytes: &[u8]) -> Result<DocumentTree, ParseError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| ParseError::new(e.valid_up_to(), "invalid UTF-8"))?;
    let mut reader = Reader::from_str(text);
    reader.config_mut().check_end_names = true;
    reader.config_mut().expand_empty_elements = true;
    let mut builder = TreeBuilder::new();
    loop {
        let at = reader.buffer_position() as usize;
        let event = reader
            .read_event()
            .map_err(|e| ParseError::new(reader.error_position() as usize, e.to_string()))?;
        let fail = |e: BuildError| ParseError::new(at, e.to_string());
        match event {
            Event::Start(start) => {
                let name = std::str::from_utf8(start.name().as_ref())
                    .map_err(|_| ParseError::new(at, "invalid UTF-8 in name"))?
                    .to_owned();
                builder.start_element(&name).map_err(fail)?;
                for attr in start.attributes() {
                    let attr = attr.map_err(|e| ParseError::new(at, e.to_string()))?;
                    let key = std::str::from_utf8(attr.key.as_ref())
                        .map_err(|_| ParseError::new(at, "invalid UTF-8 in attribute name"))?;
                    let value = attr
                        .unescape_value()
                        .map_err(|e| ParseError::new(at, e.to_string()))?;
                    builder.attribute(key, &value).map_err(fail)?;
                }
            }
            Event::End(_) => {
                builder.end_element().map_err(fail)?;
            }
            Event::Text(t) => {
                let raw = t
                    .unescape()
                    .map_err(|e| ParseError::new(at, e.to_string()))?;
                if !raw.trim().is_empty() {
                    builder.text(&raw).map_err(fail)?;
                }
            }
            Event::CData(c) => {
                let raw = std::str::from_utf8(&c)
                    .map_err(|_| ParseError::new(at, "invalid UTF-8 in CDATA"))?
                    .to_owned();
                builder.text(&raw).map_err(fail)?;
            }
            Event::Empty(_) => unreachable!("empty elements are expanded"),
            Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }
    builder
        .finish()
        .map_err(|e| ParseError::new(text.len(), e.to_string()))
}

pub fn parse_file(path: &Path) -> Result<DocumentTree, crate::Error> {
    let bytes = std::fs::read(path)?;
    Ok(parse_document(&bytes)?)
}

pub fn parse_reader<R: Read>(mut r: R) -> Result<DocumentTree, crate::Error> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    Ok(parse_document(&bytes)?)
}
