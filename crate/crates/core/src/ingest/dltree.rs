use std::collections::HashSet;

use super::{is_identifier, is_skippable, parse_decimal, parse_header, syntax, tokenize};
use crate::error::{ParseError, ParseErrorKind};
use crate::tree::{BinaryTree, NodeRef, Subtree};

/// Formats a thickness the way `.dltree` stores it: exactly four decimals,
/// `_` when absent.
pub fn format_thickness(t: Option<f64>) -> String {
    match t {
        Some(v) => format!("{:.4}", if v == 0.0 { 0.0 } else { v }),
        None => "_".to_string(),
    }
}

/// Canonical `.dltree` text: header line plus the tree on one line, children
/// left before right, no whitespace inside the expression.
pub fn serialize_dltree(tree: &BinaryTree) -> String {
    let mut out = format!("HEADER {} {}\n", tree.subject_id, tree.region);
    // Iterative emission: deep chains must not exhaust the stack.
    enum Step {
        Open(NodeRef),
        Comma,
        Close,
    }
    let mut stack = vec![Step::Open(BinaryTree::ROOT)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Comma => out.push(','),
            Step::Close => out.push(')'),
            Step::Open(r) => {
                let n = &tree.nodes()[r.0];
                out.push('(');
                out.push_str(&n.id);
                out.push(':');
                out.push_str(&format_thickness(n.thickness));
                stack.push(Step::Close);
                let children: Vec<_> = n.children().collect();
                for c in children.into_iter().rev() {
                    stack.push(Step::Open(c));
                    stack.push(Step::Comma);
                }
            }
        }
    }
    out.push('\n');
    out
}

struct Cursor {
    chars: Vec<(usize, usize, char)>,
    pos: usize,
    end_line: usize,
}

impl Cursor {
    fn new(src: &str, first_line: usize) -> Self {
        let mut chars = Vec::new();
        let (mut line, mut col) = (first_line, 0usize);
        for ch in src.chars() {
            if ch == '\n' {
                line += 1;
                col = 0;
                continue;
            }
            col += 1;
            chars.push((line, col, ch));
        }
        Self { chars, pos: 0, end_line: line }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].2.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.2)
    }

    fn here(&self) -> (usize, usize) {
        self.chars
            .get(self.pos)
            .map(|c| (c.0, c.1))
            .unwrap_or((self.end_line, 0))
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        syntax(l, c, msg)
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(ch) if ch == want => {
                self.pos += 1;
                Ok(())
            }
            Some(ch) => Err(self.err(format!("expected `{want}`, found `{ch}`"))),
            None => Err(self.err(format!("expected `{want}`, found end of input"))),
        }
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let mut s = String::new();
        while let Some(ch) = self.peek() {
            if ch.is_whitespace() || matches!(ch, '(' | ')' | ':' | ',') {
                break;
            }
            s.push(ch);
            self.pos += 1;
        }
        s
    }
}

/// Parses `.dltree` text into a validated [`BinaryTree`].
pub fn parse_dltree(text: &str) -> Result<BinaryTree, ParseError> {
    let mut offset = 0usize;
    let mut header = None;
    let mut body_line = 1;
    for (idx, line) in text.split_inclusive('\n').enumerate() {
        offset += line.len();
        if is_skippable(line) {
            continue;
        }
        header = Some(parse_header(idx + 1, &tokenize(line))?);
        body_line = idx + 2;
        break;
    }
    let (subject, region) = header.ok_or_else(|| syntax(1, 0, "missing HEADER line"))?;

    // Comment lines after the header are blanked so positions stay exact.
    let body: String = text[offset..]
        .split_inclusive('\n')
        .map(|l| if l.trim_start().starts_with('#') { "\n" } else { l })
        .collect();
    let mut cur = Cursor::new(&body, body_line);
    let mut seen = HashSet::new();
    let root = parse_node(&mut cur, &mut seen, true)?;
    cur.skip_ws();
    if cur.peek().is_some() {
        return Err(cur.err("trailing input after tree"));
    }
    BinaryTree::from_subtree(subject, region, root).map_err(|e| syntax(body_line, 0, e.to_string()))
}

fn parse_node(
    cur: &mut Cursor,
    seen: &mut HashSet<String>,
    is_root: bool,
) -> Result<Subtree, ParseError> {
    // Explicit work stack keeps deep chains off the call stack.
    struct Frame {
        node: Subtree,
        open: (usize, usize),
    }
    let mut stack: Vec<Frame> = Vec::new();
    let mut pending_root = is_root;
    loop {
        // Parse one node header: "(" id ":" thickness
        cur.expect('(')?;
        cur.skip_ws();
        let open = cur.here();
        let id = cur.word();
        if !is_identifier(&id) {
            return Err(syntax(open.0, open.1, format!("invalid node id `{id}`")));
        }
        cur.expect(':')?;
        cur.skip_ws();
        let (tl, tc) = cur.here();
        let tok = cur.word();
        let thickness = if tok == "_" {
            if !pending_root {
                return Err(syntax(tl, tc, format!("absent thickness on non-root node `{id}`")));
            }
            None
        } else {
            let v = parse_decimal(&tok)
                .ok_or_else(|| syntax(tl, tc, format!("expected thickness, found `{tok}`")))?;
            if v < 0.0 {
                return Err(ParseError::new(tl, tc, ParseErrorKind::NegativeThickness(id)));
            }
            Some(if v == 0.0 { 0.0 } else { v })
        };
        if !seen.insert(id.clone()) {
            return Err(ParseError::new(open.0, open.1, ParseErrorKind::DuplicateId(id)));
        }
        pending_root = false;
        stack.push(Frame {
            node: Subtree { id, thickness, children: Vec::new() },
            open,
        });

        // Close finished nodes until one wants another child.
        loop {
            cur.skip_ws();
            match cur.peek() {
                Some(',') => {
                    let top = stack.last().expect("frame");
                    if top.node.children.len() == 2 {
                        return Err(ParseError::new(
                            top.open.0,
                            top.open.1,
                            ParseErrorKind::TooManyChildren(top.node.id.clone()),
                        ));
                    }
                    cur.pos += 1;
                    break;
                }
                Some(')') => {
                    cur.pos += 1;
                    let done = stack.pop().expect("frame").node;
                    match stack.last_mut() {
                        Some(parent) => parent.node.children.push(done),
                        None => return Ok(done),
                    }
                }
                Some(ch) => return Err(cur.err(format!("expected `,` or `)`, found `{ch}`"))),
                None => return Err(cur.err("unterminated node")),
            }
        }
    }
}
