//! Domain types shared by every stage: raw vessel graphs, binary component
//! trees and corpus entries.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Brain region a component tree feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    Back,
    Left,
    Right,
    Front,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Back, Region::Left, Region::Right, Region::Front];

    pub fn code(self) -> char {
        match self {
            Region::Back => 'B',
            Region::Left => 'L',
            Region::Right => 'R',
            Region::Front => 'F',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Back => "Back",
            Region::Left => "Left",
            Region::Right => "Right",
            Region::Front => "Front",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "B" | "Back" => Ok(Region::Back),
            "L" | "Left" => Ok(Region::Left),
            "R" | "Right" => Ok(Region::Right),
            "F" | "Front" => Ok(Region::Front),
            other => Err(format!("unknown region `{other}` (expected B, L, R or F)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SegmentId(pub u64);

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A sample along a vessel centerline, in millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselPoint {
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub radius: f64,
}

impl VesselPoint {
    pub fn is_valid(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.z.is_finite()
            && self.radius.is_finite()
            && self.radius > 0.0
    }
}

/// A polyline of at least two points ordered in flow direction.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselSegment {
    pub id: SegmentId,
    pub points: Vec<VesselPoint>,
}

/// Segments of one subject/region plus their parent-child connectivity.
///
/// Construction through [`RawVesselGraph::new`] guarantees the edges form a
/// forest in which every segment hangs below exactly one declared root.
#[derive(Debug, Clone, PartialEq)]
pub struct RawVesselGraph {
    pub subject_id: String,
    pub region: Region,
    segments: BTreeMap<SegmentId, VesselSegment>,
    edges: BTreeSet<(SegmentId, SegmentId)>,
    roots: Vec<SegmentId>,
}

impl RawVesselGraph {
    pub fn new(
        subject_id: impl Into<String>,
        region: Region,
        segments: Vec<VesselSegment>,
        edges: impl IntoIterator<Item = (SegmentId, SegmentId)>,
        roots: Vec<SegmentId>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for seg in segments {
            if seg.points.len() < 2 {
                return Err(Error::InvalidGraph(format!("segment {} has < 2 points", seg.id)));
            }
            if let Some(p) = seg.points.iter().find(|p| !p.is_valid()) {
                return Err(Error::InvalidGraph(format!(
                    "segment {} point {} is invalid",
                    seg.id, p.id
                )));
            }
            if map.insert(seg.id, seg).is_some() {
                return Err(Error::InvalidGraph("duplicate segment id".into()));
            }
        }
        let edges: BTreeSet<_> = edges.into_iter().collect();
        let mut parent: BTreeMap<SegmentId, SegmentId> = BTreeMap::new();
        for &(p, c) in &edges {
            if !map.contains_key(&p) || !map.contains_key(&c) {
                return Err(Error::InvalidGraph(format!("edge {p}->{c} names an unknown segment")));
            }
            if parent.insert(c, p).is_some() {
                return Err(Error::InvalidGraph(format!("segment {c} has more than one parent")));
            }
        }
        let mut roots = roots;
        roots.sort();
        roots.dedup();
        for r in &roots {
            if !map.contains_key(r) {
                return Err(Error::InvalidGraph(format!("root {r} is not a segment")));
            }
            if parent.contains_key(r) {
                return Err(Error::InvalidGraph(format!("root {r} has a parent")));
            }
        }
        let graph = Self {
            subject_id: subject_id.into(),
            region,
            segments: map,
            edges,
            roots,
        };
        // Every segment must reach one of the roots by following parents.
        for &id in graph.segments.keys() {
            let mut cur = id;
            let mut steps = 0usize;
            while let Some(&p) = parent.get(&cur) {
                cur = p;
                steps += 1;
                if steps > graph.segments.len() {
                    return Err(Error::InvalidGraph(format!("cycle through segment {id}")));
                }
            }
            if !graph.roots.contains(&cur) {
                return Err(Error::InvalidGraph(format!("segment {id} is not reachable from a root")));
            }
        }
        Ok(graph)
    }

    pub fn segments(&self) -> impl Iterator<Item = &VesselSegment> {
        self.segments.values()
    }

    pub fn segment(&self, id: SegmentId) -> Option<&VesselSegment> {
        self.segments.get(&id)
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (SegmentId, SegmentId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn roots(&self) -> &[SegmentId] {
        &self.roots
    }

    /// Children of `id` in ascending id order.
    pub fn children(&self, id: SegmentId) -> Vec<SegmentId> {
        self.edges
            .range((id, SegmentId(0))..=(id, SegmentId(u64::MAX)))
            .map(|&(_, c)| c)
            .collect()
    }
}

/// Index of a node inside a [`BinaryTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef(pub usize);

/// One vessel trunk between two split points. `thickness` is absent only on
/// a phantom root.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryNode {
    pub id: String,
    pub thickness: Option<f64>,
    left: Option<NodeRef>,
    right: Option<NodeRef>,
    parent: Option<NodeRef>,
}

impl BinaryNode {
    pub fn left(&self) -> Option<NodeRef> {
        self.left
    }

    pub fn right(&self) -> Option<NodeRef> {
        self.right
    }

    pub fn parent(&self) -> Option<NodeRef> {
        self.parent
    }

    pub fn children(&self) -> impl Iterator<Item = NodeRef> {
        self.left.into_iter().chain(self.right)
    }

    pub fn child_count(&self) -> usize {
        self.left.is_some() as usize + self.right.is_some() as usize
    }

    pub fn is_leaf(&self) -> bool {
        self.left.is_none()
    }
}

/// Owned recursive form of a tree, used to build and rewrite trees.
#[derive(Debug, Clone, PartialEq)]
pub struct Subtree {
    pub id: String,
    pub thickness: Option<f64>,
    pub children: Vec<Subtree>,
}

impl Subtree {
    pub fn leaf(id: impl Into<String>, thickness: f64) -> Self {
        Self {
            id: id.into(),
            thickness: Some(thickness),
            children: Vec::new(),
        }
    }

    pub fn node(id: impl Into<String>, thickness: Option<f64>, children: Vec<Subtree>) -> Self {
        Self {
            id: id.into(),
            thickness,
            children,
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![self];
        while let Some(s) = stack.pop() {
            n += 1;
            stack.extend(s.children.iter());
        }
        n
    }
}

/// A binary component tree.
///
/// Nodes live in an arena laid out in preorder (left subtree before right),
/// so the root is always `NodeRef(0)` and the subtree of node `i` occupies
/// the contiguous range `i..i + subtree_size(i)`. Two trees with the same
/// shape, ids and thicknesses therefore compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryTree {
    pub subject_id: String,
    pub region: Region,
    nodes: Vec<BinaryNode>,
}

impl BinaryTree {
    pub const ROOT: NodeRef = NodeRef(0);

    /// Builds and validates a tree: at most two children per node, unique
    /// ids, finite non-negative thickness, absent thickness only at the root.
    pub fn from_subtree(
        subject_id: impl Into<String>,
        region: Region,
        root: Subtree,
    ) -> Result<Self> {
        let mut nodes: Vec<BinaryNode> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        // (subtree, parent index, is_left)
        let mut stack: Vec<(Subtree, Option<usize>, bool)> = vec![(root, None, true)];
        while let Some((sub, parent, is_left)) = stack.pop() {
            if sub.children.len() > 2 {
                return Err(Error::InvalidTree(format!("node `{}` has more than 2 children", sub.id)));
            }
            if !seen.insert(sub.id.clone()) {
                return Err(Error::InvalidTree(format!("duplicate node id `{}`", sub.id)));
            }
            match sub.thickness {
                None if parent.is_some() => {
                    return Err(Error::InvalidTree(format!(
                        "node `{}` lacks thickness but is not the root",
                        sub.id
                    )))
                }
                Some(t) if !(t.is_finite() && t >= 0.0) => {
                    return Err(Error::InvalidTree(format!(
                        "node `{}` has invalid thickness {t}",
                        sub.id
                    )))
                }
                _ => {}
            }
            let idx = nodes.len();
            if let Some(p) = parent {
                if is_left {
                    nodes[p].left = Some(NodeRef(idx));
                } else {
                    nodes[p].right = Some(NodeRef(idx));
                }
            }
            nodes.push(BinaryNode {
                id: sub.id,
                thickness: sub.thickness,
                left: None,
                right: None,
                parent: parent.map(NodeRef),
            });
            let mut children = sub.children.into_iter();
            let left = children.next();
            let right = children.next();
            if let Some(r) = right {
                stack.push((r, Some(idx), false));
            }
            if let Some(l) = left {
                stack.push((l, Some(idx), true));
            }
        }
        Ok(Self {
            subject_id: subject_id.into(),
            region,
            nodes,
        })
    }

    pub fn single(subject_id: impl Into<String>, region: Region, id: &str, thickness: f64) -> Self {
        Self::from_subtree(subject_id, region, Subtree::leaf(id, thickness))
            .expect("single node is always valid")
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> &BinaryNode {
        &self.nodes[0]
    }

    pub fn node(&self, r: NodeRef) -> Result<&BinaryNode> {
        self.nodes
            .get(r.0)
            .ok_or_else(|| Error::UnknownNode(format!("#{}", r.0)))
    }

    pub fn nodes(&self) -> &[BinaryNode] {
        &self.nodes
    }

    /// Node references in preorder.
    pub fn refs(&self) -> impl Iterator<Item = NodeRef> {
        (0..self.nodes.len()).map(NodeRef)
    }

    pub fn find(&self, id: &str) -> Option<NodeRef> {
        self.nodes.iter().position(|n| n.id == id).map(NodeRef)
    }

    pub fn require(&self, id: &str) -> Result<NodeRef> {
        self.find(id).ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Number of proper descendants of `r`.
    pub fn descendant_count(&self, r: NodeRef) -> Result<usize> {
        self.node(r)?;
        let mut count = 0;
        let mut stack: Vec<NodeRef> = self.nodes[r.0].children().collect();
        while let Some(n) = stack.pop() {
            count += 1;
            stack.extend(self.nodes[n.0].children());
        }
        Ok(count)
    }

    /// Depth of `r`, with the root at level 0.
    pub fn node_level(&self, r: NodeRef) -> Result<usize> {
        let mut level = 0;
        let mut cur = self.node(r)?;
        while let Some(p) = cur.parent {
            level += 1;
            cur = &self.nodes[p.0];
        }
        Ok(level)
    }

    /// Proper descendant counts for every node, indexed by arena position.
    pub fn all_descendant_counts(&self) -> Vec<usize> {
        let mut desc = vec![0usize; self.nodes.len()];
        for i in (0..self.nodes.len()).rev() {
            let n = &self.nodes[i];
            desc[i] = n.children().map(|c| desc[c.0] + 1).sum();
        }
        desc
    }

    /// Levels for every node, indexed by arena position.
    pub fn all_levels(&self) -> Vec<usize> {
        let mut levels = vec![0usize; self.nodes.len()];
        for i in 1..self.nodes.len() {
            let p = self.nodes[i].parent.expect("non-root has parent");
            levels[i] = levels[p.0] + 1;
        }
        levels
    }

    /// Preorder references of the subtree rooted at `r`, including `r`.
    pub fn subtree_refs(&self, r: NodeRef) -> impl Iterator<Item = NodeRef> {
        let size = self.descendant_count(r).map(|d| d + 1).unwrap_or(0);
        (r.0..r.0 + size).map(NodeRef)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Owned recursive copy of the subtree rooted at `r`.
    pub fn to_subtree(&self, r: NodeRef) -> Subtree {
        let n = &self.nodes[r.0];
        Subtree {
            id: n.id.clone(),
            thickness: n.thickness,
            children: n.children().map(|c| self.to_subtree(c)).collect(),
        }
    }

    pub fn with_root(&self, root: Subtree) -> Result<Self> {
        Self::from_subtree(self.subject_id.clone(), self.region, root)
    }
}

/// A component tree with its subject covariate (typically age in years).
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub tree: BinaryTree,
    pub covariate: Option<f64>,
}
