//! Random instance generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use dlview::{BinaryTree, RawVesselGraph, Region, SegmentId, Subtree, VesselPoint, VesselSegment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_region(rng: &mut ChaCha8Rng) -> Region {
    Region::ALL[rng.random_range(0..4)]
}

/// Thickness with four decimals so it survives the text format exactly.
pub fn random_thickness(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0..60_000u32) as f64 / 10_000.0
}

/// Random binary tree of at most `max_nodes` nodes, built by repeatedly
/// giving a random leaf zero, one or two children. Thicknesses are
/// multiples of 1e-4; with `phantom` the root has none.
pub fn random_tree(rng: &mut ChaCha8Rng, max_nodes: usize, phantom: bool) -> BinaryTree {
    let target = rng.random_range(1..=max_nodes.max(1));
    // children lists indexed by creation order
    let mut kids: Vec<Vec<usize>> = vec![Vec::new()];
    let mut open = vec![0usize];
    while kids.len() < target && !open.is_empty() {
        let pick = rng.random_range(0..open.len());
        let n = open[pick];
        let room = target - kids.len();
        let want = rng.random_range(1..=2usize).min(room).min(2 - kids[n].len());
        for _ in 0..want {
            let c = kids.len();
            kids.push(Vec::new());
            kids[n].push(c);
            open.push(c);
        }
        if kids[n].len() == 2 || rng.random_bool(0.3) {
            open.swap_remove(pick);
        }
    }
    let thick: Vec<f64> = (0..kids.len()).map(|_| random_thickness(rng)).collect();
    fn build(i: usize, kids: &[Vec<usize>], thick: &[f64], phantom: bool) -> Subtree {
        let t = if i == 0 && phantom { None } else { Some(thick[i]) };
        Subtree::node(
            format!("v{i}"),
            t,
            kids[i].iter().map(|&c| build(c, kids, thick, phantom)).collect(),
        )
    }
    let subject = format!("S{}", rng.random_range(0..1000));
    BinaryTree::from_subtree(subject, random_region(rng), build(0, &kids, &thick, phantom)).unwrap()
}

/// Full binary tree (every node has 0 or 2 children).
pub fn random_full_tree(rng: &mut ChaCha8Rng, max_nodes: usize) -> BinaryTree {
    let mut kids: Vec<Vec<usize>> = vec![Vec::new()];
    let mut leaves = vec![0usize];
    while kids.len() + 2 <= max_nodes && rng.random_bool(0.9) {
        let pick = rng.random_range(0..leaves.len());
        let n = leaves.swap_remove(pick);
        for _ in 0..2 {
            let c = kids.len();
            kids.push(Vec::new());
            kids[n].push(c);
            leaves.push(c);
        }
    }
    let thick: Vec<f64> = (0..kids.len()).map(|_| 0.1 + random_thickness(rng) / 2.0).collect();
    fn build(i: usize, kids: &[Vec<usize>], thick: &[f64]) -> Subtree {
        Subtree::node(format!("v{i}"), Some(thick[i]), kids[i].iter().map(|&c| build(c, kids, thick)).collect())
    }
    BinaryTree::from_subtree("S1", Region::Back, build(0, &kids, &thick)).unwrap()
}

/// Random raw vessel forest with one or two roots and at most
/// `max_segments` segments. Segment ids are a random permutation so child
/// order is not creation order.
pub fn random_graph(rng: &mut ChaCha8Rng, max_segments: usize) -> RawVesselGraph {
    let n = rng.random_range(1..=max_segments.max(1));
    let two_roots = n >= 2 && rng.random_bool(0.3);
    let mut parent: Vec<Option<usize>> = vec![None; n];
    for (i, p) in parent.iter_mut().enumerate().skip(if two_roots { 2 } else { 1 }) {
        *p = Some(rng.random_range(0..i));
    }
    let mut ids: Vec<u64> = (0..n as u64).map(|i| i * 3 + 1).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        ids.swap(i, j);
    }
    let mut next_point = 0u64;
    let segments = (0..n)
        .map(|i| {
            let len = rng.random_range(2..=6);
            let points = (0..len)
                .map(|_| {
                    next_point += 1;
                    VesselPoint {
                        id: next_point,
                        x: rng.random_range(-500..500) as f64 / 4.0,
                        y: rng.random_range(-500..500) as f64 / 4.0,
                        z: rng.random_range(-500..500) as f64 / 4.0,
                        radius: rng.random_range(1..=2000u32) as f64 / 1000.0,
                    }
                })
                .collect();
            VesselSegment { id: SegmentId(ids[i]), points }
        })
        .collect();
    let edges: Vec<(SegmentId, SegmentId)> = parent
        .iter()
        .enumerate()
        .filter_map(|(c, p)| p.map(|p| (SegmentId(ids[p]), SegmentId(ids[c]))))
        .collect();
    let roots = (0..n).filter(|&i| parent[i].is_none()).map(|i| SegmentId(ids[i])).collect();
    RawVesselGraph::new(format!("S{}", rng.random_range(0..100)), random_region(rng), segments, edges, roots)
        .unwrap()
}

/// Node counts an extracted tree must have, derived straight from the raw
/// graph: trunk heads, comb nodes and their subtree sizes.
#[derive(Debug, Default)]
pub struct ExtractionOracle {
    pub node_count: usize,
    pub leaf_count: usize,
    /// Descendants per node id.
    pub descendants: BTreeMap<String, usize>,
    /// Thickness per trunk head.
    pub thickness: BTreeMap<String, f64>,
}

pub fn extraction_oracle(graph: &RawVesselGraph) -> ExtractionOracle {
    let mut children: HashMap<u64, Vec<u64>> = HashMap::new();
    for (p, c) in graph.edges() {
        children.entry(p.0).or_default().push(c.0);
    }
    for v in children.values_mut() {
        v.sort();
    }
    let kids = |s: u64| children.get(&s).cloned().unwrap_or_default();

    // Binary node count of the run starting at `head`, filling the oracle.
    fn walk(head: u64, kids: &dyn Fn(u64) -> Vec<u64>, graph: &RawVesselGraph, o: &mut ExtractionOracle) -> usize {
        let mut radii = Vec::new();
        let mut cur = head;
        loop {
            radii.extend(graph.segment(SegmentId(cur)).unwrap().points.iter().map(|p| p.radius));
            let k = kids(cur);
            if k.len() == 1 {
                cur = k[0];
            } else {
                break;
            }
        }
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = radii.len();
        let med = if m % 2 == 1 { radii[m / 2] } else { (radii[m / 2 - 1] + radii[m / 2]) / 2.0 };
        o.thickness.insert(head.to_string(), 2.0 * med);
        let end_kids = kids(cur);
        if end_kids.is_empty() {
            o.leaf_count += 1;
            o.node_count += 1;
            o.descendants.insert(head.to_string(), 0);
            return 1;
        }
        let sizes: Vec<usize> = end_kids.iter().map(|&c| walk(c, kids, graph, o)).collect();
        let m = sizes.len();
        // Comb node `head.k` joins children k+1..m (1-based).
        for k in 1..m - 1 {
            let size: usize = sizes[k..].iter().sum::<usize>() + (m - k - 1);
            o.descendants.insert(format!("{head}.{k}"), size - 1);
        }
        let total = sizes.iter().sum::<usize>() + (m - 1);
        o.node_count += m - 1;
        o.descendants.insert(head.to_string(), total - 1);
        total
    }

    let mut o = ExtractionOracle::default();
    let mut total = 0;
    for r in graph.roots() {
        total += walk(r.0, &kids, graph, &mut o);
    }
    if graph.roots().len() == 2 {
        o.node_count += 1;
        o.descendants.insert("phantom".into(), total);
    }
    o
}

/// Descendant counts by explicit DFS from each node.
pub fn brute_descendants(tree: &BinaryTree) -> Vec<usize> {
    tree.refs()
        .map(|r| {
            let mut count = 0;
            let mut stack: Vec<_> = tree.nodes()[r.0].children().collect();
            while let Some(n) = stack.pop() {
                count += 1;
                stack.extend(tree.nodes()[n.0].children());
            }
            count
        })
        .collect()
}

/// Levels by walking parent links.
pub fn brute_levels(tree: &BinaryTree) -> Vec<usize> {
    tree.refs()
        .map(|r| {
            let mut level = 0;
            let mut cur = r;
            while let Some(p) = tree.nodes()[cur.0].parent() {
                level += 1;
                cur = p;
            }
            level
        })
        .collect()
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> f64 {
    let n = steps + steps % 2;
    let h = (hi - lo) / n as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// `I_x(a, b)` by direct quadrature of the beta density, normalized by the
/// quadrature of the full integral. Power substitutions near both ends make
/// the integrands smooth enough for Simpson's rule.
pub fn inc_beta_by_quadrature(a: f64, b: f64, x: f64, steps: usize) -> f64 {
    let p = (4.0 / a).ceil().max(1.0);
    let q = (4.0 / b).ceil().max(1.0);
    // Integral of the density over [0, y] with t = u^p, y <= 1/2.
    let left = |y: f64| {
        simpson(
            |u: f64| p * u.powf(p * a - 1.0) * (1.0 - u.powf(p)).powf(b - 1.0),
            0.0,
            y.powf(1.0 / p),
            steps,
        )
    };
    // Integral over [y, 1] with 1 - t = v^q, y >= 1/2.
    let right = |y: f64| {
        simpson(
            |v: f64| q * v.powf(q * b - 1.0) * (1.0 - v.powf(q)).powf(a - 1.0),
            0.0,
            (1.0 - y).powf(1.0 / q),
            steps,
        )
    };
    let (l_half, r_half) = (left(0.5), right(0.5));
    let total = l_half + r_half;
    if x <= 0.5 {
        left(x) / total
    } else {
        1.0 - right(x) / total
    }
}

/// `(a, b, x)` spot checks for the incomplete beta.
pub const BETA_SPOTS: [(f64, f64, f64); 20] = [
    (0.5, 0.5, 0.3),
    (1.0, 1.0, 0.7),
    (2.0, 3.0, 0.4),
    (5.0, 0.5, 0.9),
    (0.5, 5.0, 0.1),
    (10.0, 10.0, 0.5),
    (1.5, 2.5, 0.25),
    (3.0, 0.5, 0.75),
    (0.7, 1.3, 0.01),
    (20.0, 4.0, 0.8),
    (4.0, 20.0, 0.2),
    (0.5, 0.5, 0.999),
    (2.5, 0.5, 0.6),
    (50.0, 0.5, 0.99),
    (1.0, 3.0, 0.05),
    (7.0, 2.0, 0.66),
    (0.9, 0.9, 0.5),
    (12.0, 0.5, 0.3),
    (3.5, 3.5, 0.45),
    (1.2, 8.0, 0.15),
];

pub struct GoldenRegression {
    pub name: &'static str,
    pub x: &'static [f64],
    pub y: &'static [f64],
    pub slope: f64,
    pub intercept: f64,
    pub p_value: f64,
}

/// Reference values from a standard least-squares implementation
/// (scipy.stats.linregress), frozen here.
pub const GOLDEN_REGRESSIONS: [GoldenRegression; 10] = [
    GoldenRegression {
        name: "four_points",
        x: &[1.0, 2.0, 3.0, 4.0],
        y: &[2.0, 3.0, 5.0, 4.0],
        slope: 0.8,
        intercept: 1.5,
        p_value: 0.1999999999999999,
    },
    GoldenRegression {
        name: "small_negative",
        x: &[1.0, 2.0, 3.0, 4.0, 5.0],
        y: &[5.1, 3.9, 3.2, 1.8, 1.1],
        slope: -1.0099999999999998,
        intercept: 6.049999999999999,
        p_value: 0.00045025733107387233,
    },
    GoldenRegression {
        name: "weak",
        x: &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
        y: &[3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0],
        slope: 0.5357142857142857,
        intercept: 1.4642857142857144,
        p_value: 0.23151983207369453,
    },
    GoldenRegression {
        name: "ages",
        x: &[23.0, 31.0, 38.0, 44.0, 52.0, 57.0, 63.0, 71.0, 78.0],
        y: &[7.9, 7.6, 7.7, 7.1, 7.3, 6.8, 6.9, 6.2, 6.4],
        slope: -0.02990903130634321,
        intercept: 8.618714145222095,
        p_value: 0.00012684455408432284,
    },
    GoldenRegression {
        name: "noisy_positive",
        x: &[0.5, 1.5, 2.5, 3.5, 4.5, 5.5],
        y: &[1.2, 0.7, 2.9, 2.1, 3.8, 2.6],
        slope: 0.44285714285714284,
        intercept: 0.8880952380952378,
        p_value: 0.10061280209356624,
    },
    GoldenRegression {
        name: "three_points",
        x: &[0.0, 1.0, 2.0],
        y: &[0.0, 1.0, 3.0],
        slope: 1.5,
        intercept: -0.16666666666666674,
        p_value: 0.12103771832367702,
    },
    GoldenRegression {
        name: "negative_covariate",
        x: &[-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0],
        y: &[0.4, -0.3, 0.9, 0.1, 0.6, 1.4, 0.8],
        slope: 0.15357142857142855,
        intercept: 0.5571428571428572,
        p_value: 0.15760762125369923,
    },
    GoldenRegression {
        name: "large_covariate",
        x: &[1000.0, 2000.0, 3000.0, 4000.0, 5000.0],
        y: &[10.5, 10.1, 11.9, 12.2, 12.0],
        slope: 0.00051,
        intercept: 9.81,
        p_value: 0.07855199961987978,
    },
    GoldenRegression {
        name: "near_null",
        x: &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0],
        y: &[2.0, 4.0, 3.0, 5.0, 1.0, 4.0, 3.0, 2.0, 5.0, 3.0],
        slope: 0.04848484848484848,
        intercept: 2.9333333333333336,
        p_value: 0.7591057459918616,
    },
    GoldenRegression {
        name: "strong",
        x: &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0],
        y: &[1.1, 2.3, 2.8, 4.2, 5.1, 5.8, 7.2, 8.1, 8.8, 10.3, 10.9, 12.2],
        slope: 0.9979020979020978,
        intercept: 0.08030303030303099,
        p_value: 4.578286337648472e-14,
    },
];

/// `I_x(a, b)` for the spot parameters, from scipy.special.betainc.
pub const BETA_REFERENCE: [f64; 20] = [
    0.36901011956554536,
    0.7,
    0.5247999999999999,
    0.3166429150200122,
    0.6833570849799877,
    0.5,
    0.3333333333333335,
    0.20703125,
    0.04875851559491103,
    0.2965314109848812,
    0.7034685890151187,
    0.9798649583666235,
    0.1274640081581162,
    0.3173043978741973,
    0.142625,
    0.18438443169569282,
    0.5000000000000001,
    1.0076548010756933e-07,
    0.3989858476174255,
    0.6584685390806244,
];
