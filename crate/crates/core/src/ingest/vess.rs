use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::{is_skippable, parse_decimal, parse_header, syntax, tokenize, Token};
use crate::error::{ParseError, ParseErrorKind};
use crate::tree::{RawVesselGraph, SegmentId, VesselPoint, VesselSegment};

fn parse_id(line: usize, tok: &Token<'_>) -> Result<u64, ParseError> {
    if !tok.text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(syntax(line, tok.column, format!("expected integer id, found `{}`", tok.text)));
    }
    tok.text
        .parse()
        .map_err(|_| syntax(line, tok.column, format!("id `{}` out of range", tok.text)))
}

fn parse_number(line: usize, tok: &Token<'_>) -> Result<f64, ParseError> {
    parse_decimal(tok.text)
        .ok_or_else(|| syntax(line, tok.column, format!("expected decimal number, found `{}`", tok.text)))
}

fn arity(line: usize, tokens: &[Token<'_>], n: usize) -> Result<(), ParseError> {
    if tokens.len() != n {
        return Err(syntax(
            line,
            tokens[0].column,
            format!("{} takes {} fields, found {}", tokens[0].text, n - 1, tokens.len() - 1),
        ));
    }
    Ok(())
}

/// Parses `.vess` text into a validated [`RawVesselGraph`].
pub fn parse_vess(text: &str) -> Result<RawVesselGraph, ParseError> {
    let mut header = None;
    let mut points: HashMap<u64, VesselPoint> = HashMap::new();
    let mut segments: BTreeMap<u64, VesselSegment> = BTreeMap::new();
    let mut parent: HashMap<u64, u64> = HashMap::new();
    let mut edges = Vec::new();
    let mut roots: Vec<u64> = Vec::new();
    let mut last_line = 0;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        if is_skippable(line) {
            continue;
        }
        let tokens = tokenize(line);
        if header.is_none() {
            header = Some(parse_header(line_no, &tokens)?);
            continue;
        }
        let kw = tokens[0];
        match kw.text {
            "POINT" => {
                arity(line_no, &tokens, 6)?;
                let id = parse_id(line_no, &tokens[1])?;
                let x = parse_number(line_no, &tokens[2])?;
                let y = parse_number(line_no, &tokens[3])?;
                let z = parse_number(line_no, &tokens[4])?;
                let radius = parse_number(line_no, &tokens[5])?;
                if radius <= 0.0 {
                    return Err(ParseError::new(
                        line_no,
                        tokens[5].column,
                        ParseErrorKind::NonPositiveRadius(id.to_string()),
                    ));
                }
                if points.insert(id, VesselPoint { id, x, y, z, radius }).is_some() {
                    return Err(ParseError::new(
                        line_no,
                        tokens[1].column,
                        ParseErrorKind::DuplicateId(id.to_string()),
                    ));
                }
            }
            "SEGMENT" => {
                if tokens.len() < 2 {
                    return Err(syntax(line_no, kw.column, "SEGMENT needs an id"));
                }
                let sid = parse_id(line_no, &tokens[1])?;
                let mut pts = Vec::with_capacity(tokens.len() - 2);
                for tok in &tokens[2..] {
                    let pid = parse_id(line_no, tok)?;
                    let p = points.get(&pid).ok_or_else(|| {
                        ParseError::new(
                            line_no,
                            tok.column,
                            ParseErrorKind::DanglingReference(pid.to_string()),
                        )
                    })?;
                    pts.push(*p);
                }
                if pts.len() < 2 {
                    return Err(ParseError::new(
                        line_no,
                        tokens[1].column,
                        ParseErrorKind::TooFewPoints(sid.to_string()),
                    ));
                }
                if segments.contains_key(&sid) {
                    return Err(ParseError::new(
                        line_no,
                        tokens[1].column,
                        ParseErrorKind::DuplicateId(sid.to_string()),
                    ));
                }
                segments.insert(sid, VesselSegment { id: SegmentId(sid), points: pts });
            }
            "CONNECT" => {
                arity(line_no, &tokens, 3)?;
                let p = parse_id(line_no, &tokens[1])?;
                let c = parse_id(line_no, &tokens[2])?;
                for (id, tok) in [(p, &tokens[1]), (c, &tokens[2])] {
                    if !segments.contains_key(&id) {
                        return Err(ParseError::new(
                            line_no,
                            tok.column,
                            ParseErrorKind::DanglingReference(id.to_string()),
                        ));
                    }
                }
                // Adding p -> c closes a cycle iff c is p or an ancestor of p.
                let mut cur = Some(p);
                while let Some(a) = cur {
                    if a == c {
                        return Err(ParseError::new(
                            line_no,
                            tokens[2].column,
                            ParseErrorKind::Cycle(c.to_string()),
                        ));
                    }
                    cur = parent.get(&a).copied();
                }
                if parent.insert(c, p).is_some() {
                    return Err(ParseError::new(
                        line_no,
                        tokens[2].column,
                        ParseErrorKind::MultipleParents(c.to_string()),
                    ));
                }
                edges.push((SegmentId(p), SegmentId(c)));
            }
            "ROOT" => {
                arity(line_no, &tokens, 2)?;
                let sid = parse_id(line_no, &tokens[1])?;
                if !segments.contains_key(&sid) {
                    return Err(ParseError::new(
                        line_no,
                        tokens[1].column,
                        ParseErrorKind::DanglingReference(sid.to_string()),
                    ));
                }
                if roots.contains(&sid) {
                    return Err(ParseError::new(
                        line_no,
                        tokens[1].column,
                        ParseErrorKind::DuplicateId(sid.to_string()),
                    ));
                }
                roots.push(sid);
            }
            "HEADER" => return Err(syntax(line_no, kw.column, "duplicate HEADER")),
            other => return Err(syntax(line_no, kw.column, format!("unknown record `{other}`"))),
        }
    }

    let (subject_id, region) =
        header.ok_or_else(|| syntax(last_line.max(1), 0, "missing HEADER record"))?;
    if roots.is_empty() {
        return Err(ParseError::new(last_line, 0, ParseErrorKind::MissingRoot));
    }
    for r in &roots {
        if parent.contains_key(r) {
            return Err(syntax(last_line, 0, format!("ROOT {r} has a parent")));
        }
    }
    for &sid in segments.keys() {
        let mut cur = sid;
        while let Some(&p) = parent.get(&cur) {
            cur = p;
        }
        if !roots.contains(&cur) {
            return Err(ParseError::new(
                last_line,
                0,
                ParseErrorKind::Unreachable(sid.to_string()),
            ));
        }
    }

    RawVesselGraph::new(
        subject_id,
        region,
        segments.into_values().collect(),
        edges,
        roots.into_iter().map(SegmentId).collect(),
    )
    .map_err(|e| syntax(last_line, 0, e.to_string()))
}

/// Canonical `.vess` text: points, segments and connections in ascending
/// id order. Coordinates use the shortest decimal that round-trips.
pub fn serialize_vess(graph: &RawVesselGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "HEADER {} {}", graph.subject_id, graph.region);
    let mut points: BTreeMap<u64, VesselPoint> = BTreeMap::new();
    for seg in graph.segments() {
        for p in &seg.points {
            points.entry(p.id).or_insert(*p);
        }
    }
    for p in points.values() {
        let _ = writeln!(
            out,
            "POINT {} {} {} {} {}",
            p.id,
            decimal(p.x),
            decimal(p.y),
            decimal(p.z),
            decimal(p.radius)
        );
    }
    for seg in graph.segments() {
        let _ = write!(out, "SEGMENT {}", seg.id);
        for p in &seg.points {
            let _ = write!(out, " {}", p.id);
        }
        out.push('\n');
    }
    for (p, c) in graph.edges() {
        let _ = writeln!(out, "CONNECT {p} {c}");
    }
    for r in graph.roots() {
        let _ = writeln!(out, "ROOT {r}");
    }
    out
}

fn decimal(v: f64) -> String {
    // `Display` for f64 never uses exponent notation.
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}
