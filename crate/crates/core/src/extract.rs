//! Raw vessel graph to binary component tree.
//!
//! Every maximal run of segments without a split collapses into one node
//! whose thickness is twice the median radius of all points on the run.
//! Split points with three or more children are resolved into a right-leaning
//! comb (see [`resolve_polyfurcation`]); a region with two root vessels gets a
//! phantom root.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::tree::{BinaryTree, RawVesselGraph, SegmentId, Subtree};

pub const PHANTOM_ID: &str = "phantom";

/// Binary split order for the children of one split point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitOrder {
    Child(SegmentId),
    Split(Box<SplitOrder>, Box<SplitOrder>),
}

/// Orders the children of a split point into nested binary splits.
///
/// Children are sorted by ascending segment id; the first splits off first
/// and the rest are split recursively, so `{9, 4, 7}` becomes `4 | (7 | 9)`.
pub fn resolve_polyfurcation(children: &[SegmentId]) -> SplitOrder {
    let mut sorted = children.to_vec();
    sorted.sort();
    let mut iter = sorted.into_iter().rev();
    let last = iter.next().expect("at least one child");
    let mut acc = SplitOrder::Child(last);
    for c in iter {
        acc = SplitOrder::Split(Box::new(SplitOrder::Child(c)), Box::new(acc));
    }
    acc
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

pub fn extract_binary_tree(graph: &RawVesselGraph) -> Result<BinaryTree> {
    if graph.segment_count() == 0 || graph.roots().is_empty() {
        return Err(Error::EmptyGraph);
    }
    let trees = graph
        .roots()
        .iter()
        .map(|&r| {
            BinaryTree::from_subtree(graph.subject_id.clone(), graph.region, trunk(graph, r))
        })
        .collect::<Result<Vec<_>>>()?;
    match trees.len() {
        1 => Ok(trees.into_iter().next().expect("one tree")),
        2 => attach_phantom_root(trees),
        n => Err(Error::RootCount(n)),
    }
}

/// Builds the node for the run starting at `head`.
fn trunk(graph: &RawVesselGraph, head: SegmentId) -> Subtree {
    let mut radii = Vec::new();
    let mut cur = head;
    let children = loop {
        let seg = graph.segment(cur).expect("validated graph");
        radii.extend(seg.points.iter().map(|p| p.radius));
        let children = graph.children(cur);
        if children.len() == 1 {
            cur = children[0];
        } else {
            break children;
        }
    };
    let thickness = 2.0 * median(&mut radii);
    let id = head.to_string();
    let kids = if children.is_empty() {
        Vec::new()
    } else {
        match resolve_polyfurcation(&children) {
            SplitOrder::Split(l, r) => {
                let mut synthetic = 0;
                vec![
                    expand(graph, *l, &id, thickness, &mut synthetic),
                    expand(graph, *r, &id, thickness, &mut synthetic),
                ]
            }
            SplitOrder::Child(_) => unreachable!("single child continues the run"),
        }
    };
    Subtree::node(id, Some(thickness), kids)
}

/// Zero-length trunks introduced by a polyfurcation inherit the parent's
/// thickness and are named `<head>.<k>`.
fn expand(
    graph: &RawVesselGraph,
    order: SplitOrder,
    head: &str,
    thickness: f64,
    synthetic: &mut usize,
) -> Subtree {
    match order {
        SplitOrder::Child(c) => trunk(graph, c),
        SplitOrder::Split(l, r) => {
            *synthetic += 1;
            let id = format!("{head}.{synthetic}");
            let left = expand(graph, *l, head, thickness, synthetic);
            let right = expand(graph, *r, head, thickness, synthetic);
            Subtree::node(id, Some(thickness), vec![left, right])
        }
    }
}

fn root_key(tree: &BinaryTree) -> (u8, u64, String) {
    let id = &tree.root().id;
    match id.parse::<u64>() {
        Ok(n) => (0, n, String::new()),
        Err(_) => (1, 0, id.clone()),
    }
}

/// Joins the two root trees of a region under a phantom root without
/// thickness. The tree whose root has the lower segment id goes left.
pub fn attach_phantom_root(trees: Vec<BinaryTree>) -> Result<BinaryTree> {
    if trees.len() != 2 {
        return Err(Error::RootCount(trees.len()));
    }
    let mut trees = trees;
    trees.sort_by_key(root_key);
    let subject = trees[0].subject_id.clone();
    let region = trees[0].region;
    let children = trees
        .iter()
        .map(|t| t.to_subtree(BinaryTree::ROOT))
        .collect();
    BinaryTree::from_subtree(subject, region, Subtree::node(PHANTOM_ID, None, children))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_vess;
    use crate::tree::Region;

    fn ids(v: &[u64]) -> Vec<SegmentId> {
        v.iter().map(|&i| SegmentId(i)).collect()
    }

    fn c(i: u64) -> Box<SplitOrder> {
        Box::new(SplitOrder::Child(SegmentId(i)))
    }

    #[test]
    fn polyfurcation_order() {
        assert_eq!(
            resolve_polyfurcation(&ids(&[9, 4, 7])),
            SplitOrder::Split(c(4), Box::new(SplitOrder::Split(c(7), c(9))))
        );
        assert_eq!(resolve_polyfurcation(&ids(&[2, 1])), SplitOrder::Split(c(1), c(2)));
        assert_eq!(
            resolve_polyfurcation(&ids(&[1, 2, 3, 4])),
            SplitOrder::Split(
                c(1),
                Box::new(SplitOrder::Split(c(2), Box::new(SplitOrder::Split(c(3), c(4)))))
            )
        );
    }

    /// Builds a `.vess` text where every segment has two points with the
    /// given radius and the listed connections.
    fn vess(segs: &[(u64, f64)], edges: &[(u64, u64)], roots: &[u64]) -> String {
        let mut s = String::from("HEADER s1 L\n");
        for &(id, r) in segs {
            s += &format!("POINT {} 0 0 0 {r}\nPOINT {} 0 0 1 {r}\n", id * 10, id * 10 + 1);
        }
        for &(id, _) in segs {
            s += &format!("SEGMENT {id} {} {}\n", id * 10, id * 10 + 1);
        }
        for (p, c) in edges {
            s += &format!("CONNECT {p} {c}\n");
        }
        for r in roots {
            s += &format!("ROOT {r}\n");
        }
        s
    }

    #[test]
    fn one_split() {
        let g = parse_vess(&vess(&[(1, 1.0), (2, 0.5), (3, 0.4)], &[(1, 2), (1, 3)], &[1])).unwrap();
        let t = extract_binary_tree(&g).unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.root().thickness, Some(2.0));
        let kids: Vec<_> = t.root().children().map(|c| t.nodes()[c.0].id.clone()).collect();
        assert_eq!(kids, ["2", "3"]);
    }

    #[test]
    fn unary_run_collapses() {
        // A -> B -> C, C splits into D and E.
        let g = parse_vess(&vess(
            &[(1, 1.0), (2, 1.0), (3, 1.0), (4, 0.5), (5, 0.5)],
            &[(1, 2), (2, 3), (3, 4), (3, 5)],
            &[1],
        ))
        .unwrap();
        let t = extract_binary_tree(&g).unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.root().id, "1");
    }

    #[test]
    fn pooled_median_thickness() {
        let g = parse_vess(&vess(&[(1, 0.5), (2, 0.3)], &[(1, 2)], &[1])).unwrap();
        let t = extract_binary_tree(&g).unwrap();
        assert_eq!(t.node_count(), 1);
        assert!((t.root().thickness.unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn five_point_median() {
        let text = "HEADER s F\nPOINT 1 0 0 0 0.2\nPOINT 2 0 0 1 0.3\nPOINT 3 0 0 2 0.4\n\
                    POINT 4 0 0 3 0.5\nPOINT 5 0 0 4 0.6\nSEGMENT 1 1 2 3 4 5\nROOT 1\n";
        let t = extract_binary_tree(&parse_vess(text).unwrap()).unwrap();
        assert!((t.root().thickness.unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn trifurcation_gets_synthetic_node() {
        let g = parse_vess(&vess(
            &[(1, 1.0), (9, 0.5), (4, 0.5), (7, 0.5)],
            &[(1, 9), (1, 4), (1, 7)],
            &[1],
        ))
        .unwrap();
        let t = extract_binary_tree(&g).unwrap();
        assert_eq!(t.node_count(), 5);
        assert_eq!(t.leaf_count(), 3);
        let s = crate::ingest::serialize_dltree(&t);
        assert_eq!(
            s.lines().nth(1).unwrap(),
            "(1:2.0000,(4:1.0000),(1.1:2.0000,(7:1.0000),(9:1.0000)))"
        );
    }

    #[test]
    fn two_roots_get_phantom() {
        let g = parse_vess(&vess(&[(5, 1.0), (3, 0.9)], &[], &[5, 3])).unwrap();
        let t = extract_binary_tree(&g).unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.root().thickness, None);
        assert_eq!(t.root().id, PHANTOM_ID);
        let left = t.root().left().unwrap();
        assert_eq!(t.nodes()[left.0].id, "3");
    }

    #[test]
    fn three_roots_rejected() {
        let g = parse_vess(&vess(&[(1, 1.0), (2, 1.0), (3, 1.0)], &[], &[1, 2, 3])).unwrap();
        assert_eq!(extract_binary_tree(&g), Err(Error::RootCount(3)));
    }

    #[test]
    fn phantom_attachment() {
        let a = BinaryTree::single("s", Region::Back, "2", 1.0);
        let b = BinaryTree::single("s", Region::Back, "10", 1.0);
        let t = attach_phantom_root(vec![b.clone(), a.clone()]).unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.root().thickness, None);
        assert_eq!(t.nodes()[t.root().left().unwrap().0].id, "2");
        let t2 = attach_phantom_root(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(t, t2);
        assert_eq!(attach_phantom_root(vec![a]), Err(Error::RootCount(1)));
    }
}
