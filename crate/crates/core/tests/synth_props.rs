use dlview::detect::{detect_misconnection, detect_starting_point, detect_vein, scan_tree, DetectorConfig, FlagKind};
use dlview::edit::apply_op;
use dlview::synth::{generate_tree, inject_anomaly, GenParams, InjectParams};
use dlview::{BinaryTree, Region};

fn host(seed: u64) -> BinaryTree {
    generate_tree("S1", Region::ALL[(seed % 4) as usize], &GenParams::default(), seed).unwrap()
}

#[test]
fn clean_trees_raise_nothing() {
    let cfg = DetectorConfig::default();
    for seed in 0..500 {
        assert!(scan_tree(&host(seed), &cfg).is_empty(), "seed {seed}");
    }
}

#[test]
fn injections_are_found_exactly_and_corrected() {
    let ip = InjectParams::default();
    let cfg = &ip.detector;
    let mut done = [0usize; 3];
    for seed in 0..300u64 {
        let tree = host(seed);
        for (k, kind) in FlagKind::ALL.into_iter().enumerate() {
            let inj = match inject_anomaly(&tree, kind, &ip, seed ^ 0xabcd) {
                Ok(inj) => inj,
                Err(_) => continue,
            };
            done[k] += 1;
            let own = match kind {
                FlagKind::Misconnection => detect_misconnection(&inj.tree, cfg),
                FlagKind::StartingPoint => detect_starting_point(&inj.tree, cfg),
                FlagKind::Vein => detect_vein(&inj.tree, cfg),
            };
            assert_eq!(own.len(), 1, "{kind} seed {seed}");
            assert_eq!(own[0].node_id, inj.locus);
            let all = scan_tree(&inj.tree, cfg);
            assert_eq!(all.len(), 1, "extra flags for {kind} seed {seed}: {all:?}");
            let fixed = apply_op(&inj.tree, &inj.correction).unwrap();
            assert!(scan_tree(&fixed, cfg).is_empty());
            assert!(fixed.nodes().iter().all(|n| n.child_count() != 1));
        }
    }
    assert!(done.iter().all(|&d| d > 200), "{done:?}");
}

#[test]
fn misconnection_correction_restores_original() {
    let ip = InjectParams::default();
    for seed in 0..100 {
        let tree = host(seed);
        if let Ok(inj) = inject_anomaly(&tree, FlagKind::Misconnection, &ip, seed) {
            let fixed = apply_op(&inj.tree, &inj.correction).unwrap();
            assert_eq!(fixed, tree);
        }
    }
}
