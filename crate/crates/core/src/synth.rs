//! Synthetic component trees and corpora with known anomalies.
//!
//! Trees grow by a level-dependent branching process: a node at level `l`
//! splits in two with probability `clamp(p0 - decay * l, 0, 1)`. Each node
//! carries a latent trunk thickness that shrinks by a uniform factor in
//! `[shrink_lo, shrink_hi]` per generation; the recorded thickness adds an
//! independent perturbation of at most `noise_mm`. With `shrink_hi < 1` and
//! `noise_mm < epsilon / 2`, no parent-child pair differs by more than
//! epsilon in the "thicker child" direction, so clean trees raise no flags.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detect::{DetectorConfig, FlagKind};
use crate::edit::{EditCommand, EditOp};
use crate::error::{Error, Result};
use crate::tree::{BinaryTree, CorpusEntry, NodeRef, Region, Subtree};

/// Thickness floor for generated nodes, in mm.
const MIN_THICKNESS: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub p0: f64,
    pub decay: f64,
    /// Latent root thickness in mm.
    pub t0: f64,
    pub shrink_lo: f64,
    pub shrink_hi: f64,
    pub noise_mm: f64,
    /// Nodes at this level never split.
    pub max_depth: usize,
    /// Growth stops splitting once the tree reaches this size.
    pub max_nodes: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            p0: 0.95,
            decay: 0.05,
            t0: 3.0,
            shrink_lo: 0.80,
            shrink_hi: 0.95,
            noise_mm: 0.1,
            max_depth: 40,
            max_nodes: 100_000,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if !(0.0..=1.0).contains(&self.p0) {
            return bad("p0 must lie in [0, 1]");
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return bad("decay must be non-negative");
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return bad("t0 must be positive");
        }
        if !(self.shrink_lo > 0.0 && self.shrink_lo <= self.shrink_hi && self.shrink_hi < 1.0) {
            return bad("shrink bounds must satisfy 0 < lo <= hi < 1");
        }
        if !(self.noise_mm >= 0.0 && self.noise_mm < self.t0) {
            return bad("noise must be non-negative and below t0");
        }
        if self.max_nodes == 0 {
            return bad("max_nodes must be positive");
        }
        Ok(())
    }

    pub fn split_probability(&self, level: usize) -> f64 {
        (self.p0 - self.decay * level as f64).clamp(0.0, 1.0)
    }
}

fn observed(latent: f64, noise: f64, rng: &mut ChaCha8Rng) -> f64 {
    let u = if noise > 0.0 { rng.random_range(-noise..=noise) } else { 0.0 };
    (latent + u).max(MIN_THICKNESS)
}

/// Grows one tree. Node ids are `n0, n1, ...` in preorder.
pub fn generate_tree(
    subject: &str,
    region: Region,
    params: &GenParams,
    seed: u64,
) -> Result<BinaryTree> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = 0usize;

    struct Pending {
        latent: f64,
        level: usize,
        parent: Option<usize>,
    }
    // Flat preorder records: (thickness, children indices).
    let mut flat: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut stack = vec![Pending { latent: params.t0, level: 0, parent: None }];
    while let Some(p) = stack.pop() {
        let idx = flat.len();
        count += 1;
        flat.push((observed(p.latent, params.noise_mm, &mut rng), Vec::new()));
        if let Some(parent) = p.parent {
            flat[parent].1.push(idx);
        }
        let room = count + stack.len() + 2 <= params.max_nodes;
        let split = p.level < params.max_depth
            && room
            && rng.random_bool(params.split_probability(p.level));
        if split {
            let l = p.latent * rng.random_range(params.shrink_lo..=params.shrink_hi);
            let r = p.latent * rng.random_range(params.shrink_lo..=params.shrink_hi);
            // Right pushed first so the left child is generated next.
            stack.push(Pending { latent: r, level: p.level + 1, parent: Some(idx) });
            stack.push(Pending { latent: l, level: p.level + 1, parent: Some(idx) });
        }
    }
    BinaryTree::from_subtree(subject, region, build(&flat, 0))
}

fn build(flat: &[(f64, Vec<usize>)], i: usize) -> Subtree {
    let (t, kids) = &flat[i];
    Subtree::node(format!("n{i}"), Some(*t), kids.iter().map(|&k| build(flat, k)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectParams {
    /// Anomaly size in multiples of `detector.epsilon_mm`.
    pub margin: f64,
    pub detector: DetectorConfig,
    /// Shrink range used for grafted children.
    pub shrink_lo: f64,
    pub shrink_hi: f64,
}

impl Default for InjectParams {
    fn default() -> Self {
        let g = GenParams::default();
        Self {
            margin: 5.0,
            detector: DetectorConfig::default(),
            shrink_lo: g.shrink_lo,
            shrink_hi: g.shrink_hi,
        }
    }
}

/// An injected anomaly with its ground truth and the edit that undoes it.
#[derive(Debug, Clone, PartialEq)]
pub struct Injection {
    pub tree: BinaryTree,
    pub kind: FlagKind,
    /// The node a detector should report.
    pub locus: String,
    pub correction: EditOp,
}

fn fresh_ids(tree: &BinaryTree, n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    let mut k = 0usize;
    while out.len() < n {
        let id = format!("x{k}");
        if tree.find(&id).is_none() {
            out.push(id);
        }
        k += 1;
    }
    out
}

fn replace_at(root: &mut Subtree, path: &[usize], f: impl FnOnce(Subtree) -> Subtree) {
    let mut cur = root;
    for &step in path {
        cur = &mut cur.children[step];
    }
    let old = std::mem::replace(cur, Subtree::leaf("", 0.0));
    *cur = f(old);
}

fn path_to(tree: &BinaryTree, target: NodeRef) -> Vec<usize> {
    let mut path = Vec::new();
    let mut cur = target;
    while let Some(p) = tree.nodes()[cur.0].parent() {
        path.push(if tree.nodes()[p.0].left() == Some(cur) { 0 } else { 1 });
        cur = p;
    }
    path.reverse();
    path
}

fn thickness(tree: &BinaryTree, r: NodeRef) -> f64 {
    tree.nodes()[r.0].thickness.unwrap_or(0.0)
}

/// Injects one anomaly of `kind`.
///
/// * `Vein`: a non-root leaf gains two children, a thinner ordinary leaf
///   and a vein leaf at `parent + margin * eps`.
/// * `Misconnection`: a trunk is inserted above a non-root node `c` whose
///   subtree outnumbers the graft, carrying a 3-node graft whose root is at
///   `trunk + margin * eps`.
/// * `StartingPoint`: `startpoint_min_chain + 1` thick nodes, each with a
///   thin side leaf, are stacked above the root.
pub fn inject_anomaly(
    tree: &BinaryTree,
    kind: FlagKind,
    params: &InjectParams,
    seed: u64,
) -> Result<Injection> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = params.detector.epsilon_mm;
    let jump = params.margin * eps;
    let shrink = |rng: &mut ChaCha8Rng| rng.random_range(params.shrink_lo..=params.shrink_hi);
    let mut root = tree.to_subtree(BinaryTree::ROOT);

    let (locus, correction) = match kind {
        FlagKind::Vein => {
            let leaves: Vec<NodeRef> = tree.refs().skip(1).filter(|r| tree.nodes()[r.0].is_leaf()).collect();
            if leaves.is_empty() {
                return Err(Error::TreeTooSmall("vein"));
            }
            let host = leaves[rng.random_range(0..leaves.len())];
            let th = thickness(tree, host);
            let ids = fresh_ids(tree, 2);
            let normal = Subtree::leaf(ids[0].clone(), th * shrink(&mut rng));
            let vein = Subtree::leaf(ids[1].clone(), th + jump);
            replace_at(&mut root, &path_to(tree, host), |mut h| {
                h.children = vec![normal, vein];
                h
            });
            (ids[1].clone(), EditOp::DeleteLeaf(ids[1].clone()))
        }
        FlagKind::Misconnection => {
            const GRAFT: usize = 3;
            let desc = tree.all_descendant_counts();
            let candidates: Vec<NodeRef> = tree
                .refs()
                .skip(1)
                .filter(|r| desc[r.0] + 1 > GRAFT)
                .filter(|r| {
                    let p = tree.nodes()[r.0].parent().expect("non-root");
                    tree.nodes()[p.0].thickness.is_some()
                })
                .collect();
            if candidates.is_empty() {
                return Err(Error::TreeTooSmall("misconnection"));
            }
            let c = candidates[rng.random_range(0..candidates.len())];
            let tc = thickness(tree, c);
            let ids = fresh_ids(tree, 4);
            let graft_t = tc + jump;
            let k1 = graft_t * shrink(&mut rng);
            let k2 = graft_t * shrink(&mut rng);
            if k1.max(k2) <= tc + eps {
                return Err(Error::InvalidParams(
                    "graft children too thin to read as a misconnection".into(),
                ));
            }
            let graft = Subtree::node(
                ids[1].clone(),
                Some(graft_t),
                vec![Subtree::leaf(ids[2].clone(), k1), Subtree::leaf(ids[3].clone(), k2)],
            );
            // The trunk takes over c's id so deleting the graft, which merges
            // the trunk with c, gives back the original tree.
            let renamed = ids[0].clone();
            replace_at(&mut root, &path_to(tree, c), |mut old| {
                let id = std::mem::replace(&mut old.id, renamed);
                Subtree::node(id, Some(tc), vec![old, graft])
            });
            (ids[1].clone(), EditOp::DeleteSubtree(ids[1].clone()))
        }
        FlagKind::StartingPoint => {
            let Some(root_t) = tree.root().thickness else {
                return Err(Error::TreeTooSmall("starting point (phantom root)"));
            };
            let k = params.detector.startpoint_min_chain + 1;
            let ids = fresh_ids(tree, 2 * k);
            let base = root_t.max(params.detector.startpoint_thick_mm);
            let host_id = tree.root().id.clone();
            let mut acc = root;
            for i in (0..k).rev() {
                let t = base + jump * (k - i) as f64 / k as f64;
                let side = Subtree::leaf(ids[2 * i + 1].clone(), t * 0.3);
                acc = Subtree::node(ids[2 * i].clone(), Some(t), vec![acc, side]);
            }
            root = acc;
            (ids[0].clone(), EditOp::TrimRoot(host_id))
        }
    };
    Ok(Injection {
        tree: tree.with_root(root)?,
        kind,
        locus,
        correction,
    })
}

/// Per-tree anomaly probabilities; at most one anomaly per tree.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectionPlan {
    pub misconnection: f64,
    pub starting_point: f64,
    pub vein: f64,
    pub params: InjectParams,
}

impl Default for InjectionPlan {
    fn default() -> Self {
        Self {
            misconnection: 0.0,
            starting_point: 0.0,
            vein: 0.0,
            params: InjectParams::default(),
        }
    }
}

impl InjectionPlan {
    /// Parses `none` or a comma list such as
    /// `misconnection=0.1,starting_point=0.05,vein=0.1,margin=5`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut plan = Self::default();
        let spec = spec.trim();
        if spec.is_empty() || spec == "none" {
            return Ok(plan);
        }
        for part in spec.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidParams(format!("expected key=value, found `{part}`")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad number `{value}`")))?;
            match key.trim() {
                "misconnection" => plan.misconnection = v,
                "starting_point" => plan.starting_point = v,
                "vein" => plan.vein = v,
                "margin" => plan.params.margin = v,
                other => return Err(Error::InvalidParams(format!("unknown injection key `{other}`"))),
            }
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let probs = [self.misconnection, self.starting_point, self.vein];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) || probs.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::InvalidParams("injection probabilities must be in [0,1] and sum to at most 1".into()));
        }
        if !(self.params.margin > 1.0 && self.params.margin.is_finite()) {
            return Err(Error::InvalidParams("margin must exceed 1".into()));
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.misconnection + self.starting_point + self.vein
    }

    fn pick(&self, u: f64) -> Option<FlagKind> {
        let mut acc = 0.0;
        for (kind, p) in [
            (FlagKind::Misconnection, self.misconnection),
            (FlagKind::StartingPoint, self.starting_point),
            (FlagKind::Vein, self.vein),
        ] {
            acc += p;
            if u < acc {
                return Some(kind);
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusParams {
    pub n_subjects: usize,
    /// Drop in the root split probability per year of age.
    pub covariate_effect: f64,
    pub seed: u64,
    pub age_range: (f64, f64),
    /// Branching parameters; `gen.p0` applies at the youngest age.
    pub gen: GenParams,
    pub injection: InjectionPlan,
}

impl CorpusParams {
    pub fn new(n_subjects: usize, covariate_effect: f64, seed: u64) -> Self {
        Self {
            n_subjects,
            covariate_effect,
            seed,
            age_range: (20.0, 80.0),
            gen: GenParams::default(),
            injection: InjectionPlan::default(),
        }
    }
}

/// Ground truth for one injected anomaly.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub subject_id: String,
    pub region: Region,
    pub kind: FlagKind,
    pub node_id: String,
    pub correction: EditCommand,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub entries: Vec<CorpusEntry>,
    pub truths: Vec<GroundTruth>,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn subject_name(index: usize, n_subjects: usize) -> String {
    let width = n_subjects.to_string().len().max(3);
    format!("S{:0width$}", index + 1)
}

/// Generates `n_subjects` subjects with ages uniform over `age_range`, four
/// component trees each. A subject's split probability at the root is
/// `gen.p0 - covariate_effect * (age - age_min)`.
pub fn generate_corpus(params: &CorpusParams) -> Result<SynthCorpus> {
    if params.n_subjects < 2 {
        return Err(Error::InvalidParams("need at least 2 subjects".into()));
    }
    params.gen.validate()?;
    params.injection.validate()?;
    let (lo, hi) = params.age_range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidParams("bad age range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut entries = Vec::with_capacity(params.n_subjects * 4);
    let mut truths = Vec::new();
    for i in 0..params.n_subjects {
        let subject = subject_name(i, params.n_subjects);
        let age = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let gen = GenParams {
            p0: (params.gen.p0 - params.covariate_effect * (age - lo)).clamp(0.0, 1.0),
            ..params.gen.clone()
        };
        for region in Region::ALL {
            let tree_seed = splitmix64(params.seed ^ splitmix64((i * 4 + region.index()) as u64 + 1));
            let mut tree = generate_tree(&subject, region, &gen, tree_seed)?;
            if params.injection.total() > 0.0 {
                let mut irng = ChaCha8Rng::seed_from_u64(splitmix64(tree_seed));
                let u: f64 = irng.random();
                if let Some(kind) = params.injection.pick(u) {
                    match inject_anomaly(&tree, kind, &params.injection.params, irng.random()) {
                        Ok(inj) => {
                            truths.push(GroundTruth {
                                subject_id: subject.clone(),
                                region,
                                kind,
                                node_id: inj.locus.clone(),
                                correction: EditCommand {
                                    line: 0,
                                    subject: subject.clone(),
                                    region: Some(region),
                                    op: inj.correction.clone(),
                                },
                            });
                            tree = inj.tree;
                        }
                        Err(Error::TreeTooSmall(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
            entries.push(CorpusEntry { tree, covariate: Some(age) });
        }
    }
    Ok(SynthCorpus { entries, truths })
}

pub const TRUTH_HEADER: &str = "subject\tregion\tkind\tnode";

/// Ground-truth manifest TSV.
pub fn format_truths(truths: &[GroundTruth]) -> String {
    let mut s = String::from(TRUTH_HEADER);
    s.push('\n');
    for t in truths {
        s.push_str(&format!("{}\t{}\t{}\t{}\n", t.subject_id, t.region, t.kind, t.node_id));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::{detect_misconnection, detect_starting_point, detect_vein, scan_tree};
    use crate::edit::apply_op;

    #[test]
    fn zero_split_probability_gives_single_node() {
        let p = GenParams { p0: 0.0, ..GenParams::default() };
        let t = generate_tree("s", Region::Back, &p, 1).unwrap();
        assert_eq!(t.node_count(), 1);
    }

    #[test]
    fn deterministic_per_seed() {
        let p = GenParams::default();
        let a = generate_tree("s", Region::Back, &p, 42).unwrap();
        let b = generate_tree("s", Region::Back, &p, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_tree("s", Region::Back, &p, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_trees_are_full_and_clean() {
        let p = GenParams::default();
        let cfg = DetectorConfig::default();
        for seed in 0..200 {
            let t = generate_tree("s", Region::Left, &p, seed).unwrap();
            assert!(t.nodes().iter().all(|n| n.child_count() != 1));
            assert!(scan_tree(&t, &cfg).is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn invalid_params() {
        let d = GenParams::default();
        for bad in [
            GenParams { p0: 1.5, ..d.clone() },
            GenParams { shrink_hi: 1.0, ..d.clone() },
            GenParams { shrink_lo: 0.96, ..d.clone() },
            GenParams { t0: 0.0, ..d.clone() },
            GenParams { decay: -0.1, ..d.clone() },
        ] {
            assert!(generate_tree("s", Region::Back, &bad, 0).is_err());
        }
    }

    fn big_tree(seed: u64) -> BinaryTree {
        let p = GenParams::default();
        (seed..)
            .map(|s| generate_tree("s", Region::Back, &p, s).unwrap())
            .find(|t| t.node_count() >= 15)
            .unwrap()
    }

    #[test]
    fn injection_round_trips() {
        let ip = InjectParams::default();
        let cfg = &ip.detector;
        let tree = big_tree(7);

        let inj = inject_anomaly(&tree, FlagKind::Vein, &ip, 3).unwrap();
        let flags = detect_vein(&inj.tree, cfg);
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].node_id, inj.locus);

        let inj = inject_anomaly(&tree, FlagKind::StartingPoint, &ip, 3).unwrap();
        let flags = detect_starting_point(&inj.tree, cfg);
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].node_id, inj.tree.root().id);
        assert_eq!(inj.locus, inj.tree.root().id);

        let inj = inject_anomaly(&tree, FlagKind::Misconnection, &ip, 3).unwrap();
        let flags = detect_misconnection(&inj.tree, cfg);
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].node_id, inj.locus);

        let fixed = apply_op(&inj.tree, &inj.correction).unwrap();
        assert!(scan_tree(&fixed, cfg).is_empty());
    }

    #[test]
    fn injection_needs_room() {
        let single = BinaryTree::single("s", Region::Back, "n0", 1.0);
        let ip = InjectParams::default();
        assert_eq!(
            inject_anomaly(&single, FlagKind::Vein, &ip, 0).unwrap_err(),
            Error::TreeTooSmall("vein")
        );
        assert!(inject_anomaly(&single, FlagKind::Misconnection, &ip, 0).is_err());
        assert!(inject_anomaly(&single, FlagKind::StartingPoint, &ip, 0).is_ok());
    }

    #[test]
    fn corpus_shape() {
        let c = generate_corpus(&CorpusParams::new(2, 0.0, 5)).unwrap();
        assert_eq!(c.entries.len(), 8);
        assert!(c.truths.is_empty());
        for e in &c.entries {
            let age = e.covariate.unwrap();
            assert!((20.0..=80.0).contains(&age));
        }
        assert!(generate_corpus(&CorpusParams::new(1, 0.0, 5)).is_err());
        assert_eq!(generate_corpus(&CorpusParams::new(2, 0.0, 5)).unwrap(), c);
    }

    #[test]
    fn injection_plan_parsing() {
        let plan = InjectionPlan::parse("misconnection=0.1, vein=0.2,margin=6").unwrap();
        assert_eq!(plan.misconnection, 0.1);
        assert_eq!(plan.vein, 0.2);
        assert_eq!(plan.params.margin, 6.0);
        assert_eq!(InjectionPlan::parse("none").unwrap().total(), 0.0);
        assert!(InjectionPlan::parse("vein=0.8,misconnection=0.5").is_err());
        assert!(InjectionPlan::parse("worm=0.1").is_err());
    }
}
