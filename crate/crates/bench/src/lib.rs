//! Deterministic inputs for the pipeline benchmarks.

use dlview::synth::{generate_tree, GenParams};
use dlview::{BinaryTree, RawVesselGraph, Region, SegmentId, VesselPoint, VesselSegment};

/// A generated tree with between `min_nodes` and `2 * min_nodes` nodes.
pub fn sample_tree(min_nodes: usize) -> BinaryTree {
    let params = GenParams { p0: 1.0, decay: 0.02, max_nodes: 2 * min_nodes, ..GenParams::default() };
    (0..)
        .map(|seed| generate_tree("B001", Region::Back, &params, seed).expect("valid params"))
        .find(|t| t.node_count() >= min_nodes)
        .expect("some seed reaches the size")
}

/// A complete binary vessel graph of `depth` levels with a unary run on
/// every segment, so extraction has chains to collapse.
pub fn sample_graph(depth: u32) -> RawVesselGraph {
    let mut segments = Vec::new();
    let mut edges = Vec::new();
    let mut next_point = 0u64;
    let heap_len = (1u64 << depth) - 1;
    for heap in 1..=heap_len {
        for part in 0..2u64 {
            let id = heap * 2 + part;
            let points = (0..4)
                .map(|k| {
                    next_point += 1;
                    VesselPoint {
                        id: next_point,
                        x: heap as f64,
                        y: part as f64,
                        z: k as f64,
                        radius: 2.0 / (1.0 + heap.ilog2() as f64) + 0.01 * k as f64,
                    }
                })
                .collect();
            segments.push(VesselSegment { id: SegmentId(id), points });
        }
        edges.push((SegmentId(heap * 2), SegmentId(heap * 2 + 1)));
        if heap * 2 + 1 <= heap_len {
            edges.push((SegmentId(heap * 2 + 1), SegmentId(heap * 4)));
            edges.push((SegmentId(heap * 2 + 1), SegmentId(heap * 4 + 2)));
        }
    }
    RawVesselGraph::new("B001", Region::Front, segments, edges, vec![SegmentId(2)]).expect("valid graph")
}

/// `(age, log2 size)`-like pairs with a mild trend.
pub fn sample_pairs(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let x = 20.0 + 60.0 * i as f64 / n as f64;
            (x, 8.0 - 0.03 * x + ((i * 7919) % 13) as f64 / 13.0)
        })
        .collect()
}
