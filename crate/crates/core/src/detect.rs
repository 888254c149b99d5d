//! Discrepancy detectors.
//!
//! Three signatures are checked, all as threshold comparisons on node
//! thickness:
//!
//! * misconnection: a subtree whose median thickness exceeds its parent's
//!   thickness by more than the measurement tolerance `epsilon_mm`;
//! * starting point: a run of very thick nodes down the heavy path from the
//!   root;
//! * vein: a leaf thicker than its parent by more than `epsilon_mm`.
//!
//! Detectors only report; they never modify a tree.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::extract::median;
use crate::tree::{BinaryTree, NodeRef, Region};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Thickness differences up to this are treated as measurement noise.
    pub epsilon_mm: f64,
    pub misconnection_min_subtree: usize,
    pub startpoint_thick_mm: f64,
    pub startpoint_min_chain: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            epsilon_mm: 0.3,
            misconnection_min_subtree: 3,
            startpoint_thick_mm: 3.0,
            startpoint_min_chain: 3,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.epsilon_mm > 0.0
            && self.epsilon_mm.is_finite()
            && self.startpoint_thick_mm > 0.0
            && self.startpoint_thick_mm.is_finite()
            && self.misconnection_min_subtree > 0
            && self.startpoint_min_chain > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams("detector settings must all be positive".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlagKind {
    Misconnection,
    StartingPoint,
    Vein,
}

impl FlagKind {
    pub const ALL: [FlagKind; 3] = [FlagKind::Misconnection, FlagKind::StartingPoint, FlagKind::Vein];

    pub fn as_str(self) -> &'static str {
        match self {
            FlagKind::Misconnection => "misconnection",
            FlagKind::StartingPoint => "starting_point",
            FlagKind::Vein => "vein",
        }
    }
}

impl fmt::Display for FlagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FlagKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "misconnection" => Ok(FlagKind::Misconnection),
            "starting_point" => Ok(FlagKind::StartingPoint),
            "vein" => Ok(FlagKind::Vein),
            other => Err(format!("unknown flag kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlagRecord {
    pub subject_id: String,
    pub region: Region,
    pub kind: FlagKind,
    pub node_id: String,
    /// Excess thickness in mm.
    pub severity: f64,
}

impl FlagRecord {
    fn new(tree: &BinaryTree, kind: FlagKind, node: NodeRef, severity: f64) -> Self {
        Self {
            subject_id: tree.subject_id.clone(),
            region: tree.region,
            kind,
            node_id: tree.nodes()[node.0].id.clone(),
            severity,
        }
    }
}

/// Flags the closest-to-root node of each region whose subtree median
/// thickness jumps above the parent's thickness by more than epsilon.
pub fn detect_misconnection(tree: &BinaryTree, config: &DetectorConfig) -> Vec<FlagRecord> {
    let desc = tree.all_descendant_counts();
    let nodes = tree.nodes();
    let mut out = Vec::new();
    let mut values = Vec::new();
    // Preorder arena: the subtree of i is i..=i+desc[i], so skipping it
    // suppresses descendants of a flagged node.
    let mut i = 1;
    while i < nodes.len() {
        let size = desc[i] + 1;
        let parent_t = nodes[i].parent().and_then(|p| nodes[p.0].thickness);
        if let (true, Some(pt)) = (size >= config.misconnection_min_subtree, parent_t) {
            values.clear();
            values.extend(nodes[i..i + size].iter().filter_map(|n| n.thickness));
            let m = median(&mut values);
            if m > pt + config.epsilon_mm {
                out.push(FlagRecord::new(tree, FlagKind::Misconnection, NodeRef(i), m - pt));
                i += size;
                continue;
            }
        }
        i += 1;
    }
    out
}

/// Nodes on the heavy path from the root: each step descends into the child
/// with more descendants, the left child on ties.
pub fn heavy_path(tree: &BinaryTree) -> Vec<NodeRef> {
    let desc = tree.all_descendant_counts();
    let mut path = vec![BinaryTree::ROOT];
    let mut cur = BinaryTree::ROOT;
    loop {
        let n = &tree.nodes()[cur.0];
        let next = match (n.left(), n.right()) {
            (Some(l), Some(r)) => {
                if desc[r.0] > desc[l.0] {
                    r
                } else {
                    l
                }
            }
            (Some(l), None) => l,
            _ => break,
        };
        path.push(next);
        cur = next;
    }
    path
}

/// Flags the root when the heavy path opens with at least
/// `startpoint_min_chain` consecutive nodes at or above
/// `startpoint_thick_mm`. A phantom root is skipped when counting.
pub fn detect_starting_point(tree: &BinaryTree, config: &DetectorConfig) -> Vec<FlagRecord> {
    let path = heavy_path(tree);
    let mut excess = Vec::new();
    for r in path {
        match tree.nodes()[r.0].thickness {
            None if r == BinaryTree::ROOT => continue,
            Some(t) if t >= config.startpoint_thick_mm => excess.push(t - config.startpoint_thick_mm),
            _ => break,
        }
    }
    if excess.len() >= config.startpoint_min_chain {
        let mean = excess.iter().sum::<f64>() / excess.len() as f64;
        vec![FlagRecord::new(
            tree,
            FlagKind::StartingPoint,
            BinaryTree::ROOT,
            excess.len() as f64 * mean,
        )]
    } else {
        Vec::new()
    }
}

/// Flags every leaf thicker than its parent by more than epsilon.
pub fn detect_vein(tree: &BinaryTree, config: &DetectorConfig) -> Vec<FlagRecord> {
    let nodes = tree.nodes();
    tree.refs()
        .skip(1)
        .filter(|r| nodes[r.0].is_leaf())
        .filter_map(|r| {
            let t = nodes[r.0].thickness?;
            let pt = nodes[nodes[r.0].parent()?.0].thickness?;
            (t > pt + config.epsilon_mm).then(|| FlagRecord::new(tree, FlagKind::Vein, r, t - pt))
        })
        .collect()
}

/// All three detectors, ordered by kind then node id.
pub fn scan_tree(tree: &BinaryTree, config: &DetectorConfig) -> Vec<FlagRecord> {
    let mut out = detect_misconnection(tree, config);
    out.extend(detect_starting_point(tree, config));
    out.extend(detect_vein(tree, config));
    out.sort_by(|a, b| (a.kind, &a.node_id).cmp(&(b.kind, &b.node_id)));
    out
}

/// Sorts records by subject, region, kind and node id.
pub fn sort_records(records: &mut [FlagRecord]) {
    records.sort_by(|a, b| {
        (&a.subject_id, a.region, a.kind, &a.node_id).cmp(&(&b.subject_id, b.region, b.kind, &b.node_id))
    });
}

pub const REPORT_HEADER: &str = "subject\tregion\tkind\tnode\tseverity";

/// Flag report TSV: header line plus one row per record.
pub fn format_report(records: &[FlagRecord]) -> String {
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.4}\n",
            r.subject_id, r.region, r.kind, r.node_id, r.severity
        ));
    }
    s
}

/// Reads a flag report written by [`format_report`].
pub fn parse_report(text: &str) -> Result<Vec<FlagRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 && line == REPORT_HEADER || line.trim().is_empty() {
            continue;
        }
        let bad = |m: String| Error::Script { line: i + 1, message: m };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(bad(format!("expected 5 columns, found {}", cols.len())));
        }
        out.push(FlagRecord {
            subject_id: cols[0].to_string(),
            region: cols[1].parse().map_err(bad)?,
            kind: cols[2].parse().map_err(bad)?,
            node_id: cols[3].to_string(),
            severity: cols[4].parse().map_err(|_| bad(format!("bad severity `{}`", cols[4])))?,
        });
    }
    Ok(out)
}
