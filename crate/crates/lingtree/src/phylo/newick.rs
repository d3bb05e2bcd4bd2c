//! Newick reading and writing.
//!
//! Accepts the classic dialect: unquoted labels, `:length` suffixes,
//! optional internal-node labels (parsed and discarded), terminated by
//! `;`. Missing branch lengths default to 0. Labels may be any run of
//! bytes free of `( ) , : ;` and whitespace.

use std::collections::BTreeSet;

use super::{NodeKind, PhyloTree};
use crate::error::{Error, Result};

/// What to do with a node that has three or more children.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonBinaryPolicy {
    /// Fail with the node's position and arity.
    Reject,
    /// Left-fold the children into a ladder of zero-length edges.
    BinarizeZero,
}

/// Parses Newick text, rejecting non-binary nodes.
pub fn parse_newick(text: &str) -> Result<PhyloTree> {
    parse_newick_with(text, NonBinaryPolicy::Reject)
}

/// Parses Newick text under the given non-binary policy.
///
/// Nodes with a single child are always rejected; they cannot be
/// binarized and a binary tree cannot represent them.
pub fn parse_newick_with(text: &str, policy: NonBinaryPolicy) -> Result<PhyloTree> {
    let mut parser = Parser {
        bytes: text.as_bytes(),
        text,
        pos: 0,
        policy,
        seen: BTreeSet::new(),
    };
    parser.skip_ws();
    let start = parser.pos;
    let mut tree = parser.core()?;
    parser.skip_ws();
    if parser.peek() == Some(b':') {
        parser.pos += 1;
        let edge = parser.length()?;
        tree.nodes[tree.root].edge = edge;
    }
    parser.skip_ws();
    if parser.peek() != Some(b';') {
        return Err(parser.err("expected ';'"));
    }
    parser.pos += 1;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.err("trailing content after ';'"));
    }
    if tree.leaf_count() < 2 {
        return Err(Error::NewickParse {
            pos: start,
            message: "tree must have at least 2 leaves".to_string(),
        });
    }
    Ok(tree)
}

struct Parser<'a> {
    bytes: &'a [u8],
    text: &'a str,
    pos: usize,
    policy: NonBinaryPolicy,
    seen: BTreeSet<&'a str>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self
            .peek()
            .is_some_and(|b| b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::NewickParse {
            pos: self.pos,
            message: message.into(),
        }
    }

    /// One node: a leaf label or a parenthesized child list. Consumes a
    /// trailing internal-node label but not the `:length` suffix.
    fn core(&mut self) -> Result<PhyloTree> {
        if self.peek() == Some(b'(') {
            let open = self.pos;
            self.pos += 1;
            let mut children: Vec<(PhyloTree, f64)> = Vec::new();
            loop {
                self.skip_ws();
                children.push(self.element()?);
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected ',' or ')'")),
                }
            }
            self.skip_ws();
            // Internal label, permitted by the format, carries no
            // information we keep.
            let _ = self.label();
            if children.len() < 2
                || (children.len() > 2 && self.policy == NonBinaryPolicy::Reject)
            {
                return Err(Error::NonBinaryNode {
                    pos: open,
                    arity: children.len(),
                });
            }
            let mut iter = children.into_iter();
            let (first, e1) = iter.next().unwrap();
            let (second, e2) = iter.next().unwrap();
            let mut tree = PhyloTree::join(first, e1, second, e2);
            for (next, e) in iter {
                tree = PhyloTree::join(tree, 0.0, next, e);
            }
            Ok(tree)
        } else {
            let start = self.pos;
            match self.label() {
                Some(label) => {
                    if !self.seen.insert(label) {
                        return Err(Error::NewickParse {
                            pos: start,
                            message: format!("duplicate leaf label {label:?}"),
                        });
                    }
                    Ok(PhyloTree::leaf(label))
                }
                None => Err(self.err("expected a label or '('")),
            }
        }
    }

    /// One child: a node plus its optional `:length`.
    fn element(&mut self) -> Result<(PhyloTree, f64)> {
        let tree = self.core()?;
        self.skip_ws();
        let edge = if self.peek() == Some(b':') {
            self.pos += 1;
            self.length()?
        } else {
            0.0
        };
        Ok((tree, edge))
    }

    fn label(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() || matches!(b, b'(' | b')' | b',' | b':' | b';') {
                break;
            }
            self.pos += 1;
        }
        // Delimiters are all ASCII, so these indices sit on character
        // boundaries even in multibyte labels.
        (self.pos > start).then(|| &self.text[start..self.pos])
    }

    fn length(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|b| b.is_ascii_digit() || matches!(b, b'.' | b'+' | b'-' | b'e' | b'E'))
        {
            self.pos += 1;
        }
        let raw = &self.text[start..self.pos];
        let value: f64 = raw.parse().map_err(|_| Error::NewickParse {
            pos: start,
            message: format!("invalid branch length {raw:?}"),
        })?;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::NewickParse {
                pos: start,
                message: format!("branch length {value} out of range"),
            });
        }
        Ok(value)
    }
}

/// Serializes a tree to Newick with branch lengths on every non-root
/// edge. `f64` formatting round-trips exactly, so parse ∘ serialize
/// preserves lengths bit for bit.
pub fn to_newick(tree: &PhyloTree) -> String {
    let mut out = String::new();
    write_node(tree, tree.root(), true, &mut out);
    out.push(';');
    out
}

fn write_node(tree: &PhyloTree, id: usize, is_root: bool, out: &mut String) {
    match &tree.nodes[id].kind {
        NodeKind::Leaf { label } => out.push_str(label),
        NodeKind::Internal { children } => {
            out.push('(');
            write_node(tree, children[0], false, out);
            out.push(',');
            write_node(tree, children[1], false, out);
            out.push(')');
        }
    }
    if !is_root {
        out.push(':');
        out.push_str(&tree.nodes[id].edge.to_string());
    }
}
