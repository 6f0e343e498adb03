//! Text format for ordered trees.
//!
//! ```text
//! tree     := node
//! node     := label? glyph* open (node ("," node)*)? close
//! label    := "-"? digit+
//! glyph    := "*" (radius boundary) | "?" (censored) | "~" (spine)
//! open     := "(" | "["        "[" ... "]" marks the distinguished root
//! ```
//!
//! Children are listed eldest first. Whitespace between tokens is ignored. Serialization
//! starts from the vertex without a parent.

use super::{OrderedTree, VertexFlag, VertexId};
use crate::error::{Error, Result};

enum Token {
    Node(VertexId),
    Close(VertexId),
    Comma,
}

pub fn serialize(t: &OrderedTree) -> String {
    let mut out = String::new();
    let mut stack = vec![Token::Node(t.top())];
    while let Some(tok) = stack.pop() {
        let v = match tok {
            Token::Comma => {
                out.push(',');
                continue;
            }
            Token::Close(v) => {
                out.push(if v == t.root() { ']' } else { ')' });
                continue;
            }
            Token::Node(v) => v,
        };
        if let Some(l) = t.label(v) {
            out.push_str(&l.to_string());
        }
        match t.flag(v) {
            VertexFlag::Interior => {}
            VertexFlag::RadiusBoundary => out.push('*'),
            VertexFlag::Censored => out.push('?'),
        }
        if t.is_spine(v) {
            out.push('~');
        }
        out.push(if v == t.root() { '[' } else { '(' });
        stack.push(Token::Close(v));
        for (k, &c) in t.children(v).iter().enumerate().rev() {
            stack.push(Token::Node(c));
            if k > 0 {
                stack.push(Token::Comma);
            }
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { offset: self.pos, message: message.into() })
    }

    fn label(&mut self) -> Result<Option<i64>> {
        self.skip_ws();
        let start = self.pos;
        if self.bytes.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            if self.pos != start {
                self.pos = start;
                return self.err("expected digits after '-'");
            }
            return Ok(None);
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        match text.parse() {
            Ok(v) => Ok(Some(v)),
            Err(_) => {
                self.pos = start;
                self.err("label out of range")
            }
        }
    }
}

pub fn parse(text: &str) -> Result<OrderedTree> {
    let mut cur = Cursor { bytes: text.as_bytes(), pos: 0 };
    let mut t = OrderedTree::with_capacity(16);
    let mut root: Option<VertexId> = None;
    let mut stack: Vec<(VertexId, u8)> = Vec::new();
    let mut expect_node = true;
    loop {
        if expect_node {
            let label = cur.label()?;
            let mut flag = VertexFlag::Interior;
            let mut spine = false;
            let open = loop {
                match cur.peek() {
                    Some(b'*') => flag = VertexFlag::RadiusBoundary,
                    Some(b'?') => flag = VertexFlag::Censored,
                    Some(b'~') => spine = true,
                    Some(c @ (b'(' | b'[')) => break c,
                    Some(_) => return cur.err("expected '(' or '['"),
                    None => return cur.err("unexpected end of input"),
                }
                cur.pos += 1;
            };
            let v = t.add_vertex(label, flag);
            t.set_spine(v, spine);
            if open == b'[' {
                if root.is_some() {
                    return cur.err("second root marker");
                }
                root = Some(v);
            }
            if let Some(&(p, _)) = stack.last() {
                t.push_child(p, v);
            }
            cur.pos += 1;
            stack.push((v, if open == b'[' { b']' } else { b')' }));
            expect_node = false;
            if cur.peek() != Some(stack.last().unwrap().1) {
                expect_node = true;
                continue;
            }
        }
        let (_, closer) = *stack.last().unwrap();
        match cur.peek() {
            Some(c) if c == closer => {
                cur.pos += 1;
                stack.pop();
                if stack.is_empty() {
                    if cur.peek().is_some() {
                        return cur.err("trailing input");
                    }
                    break;
                }
            }
            Some(b',') => {
                cur.pos += 1;
                expect_node = true;
            }
            Some(_) => return cur.err(format!("expected ',' or '{}'", closer as char)),
            None => return cur.err("unexpected end of input"),
        }
    }
    t.set_root(root.unwrap_or(0));
    Ok(t)
}
