mod common;

use common::{random_full_tree, rng};
use dlview::edit::{delete_leaf, delete_subtree, trim_root};
use dlview::BinaryTree;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn delete_subtree_keeps_tree_full(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = random_full_tree(&mut r, 101);
        prop_assume!(tree.node_count() > 1);
        let target = r.random_range(1..tree.node_count());
        let node = &tree.nodes()[target];
        let parent = &tree.nodes()[node.parent().unwrap().0];
        let size = tree.subtree_refs(dlview::NodeRef(target)).count();
        let out = delete_subtree(&tree, &node.id).unwrap();

        prop_assert_eq!(out.node_count(), tree.node_count() - size - 1);
        prop_assert!(out.nodes().iter().all(|n| n.child_count() != 1));
        prop_assert!(out.find(&node.id).is_none());
        let merged = out.node(out.require(&parent.id).unwrap()).unwrap();
        let sibling = parent.children().find(|c| c.0 != target).unwrap();
        let expect = (parent.thickness.unwrap() + tree.nodes()[sibling.0].thickness.unwrap()) / 2.0;
        prop_assert_eq!(merged.thickness, Some(expect));
        prop_assert_eq!(&out.subject_id, &tree.subject_id);
        prop_assert_eq!(out.region, tree.region);
        // The survivors keep their relative structure.
        let survivors: Vec<&str> = tree.nodes().iter().map(|n| n.id.as_str())
            .filter(|id| out.find(id).is_some()).collect();
        prop_assert_eq!(survivors.len(), out.node_count());
    }

    #[test]
    fn trim_root_keeps_subtree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = random_full_tree(&mut r, 101);
        let target = dlview::NodeRef(r.random_range(0..tree.node_count()));
        let id = &tree.nodes()[target.0].id;
        let out = trim_root(&tree, id).unwrap();
        prop_assert_eq!(out.node_count(), tree.descendant_count(target).unwrap() + 1);
        prop_assert_eq!(&out.root().id, id);
        prop_assert_eq!(out.to_subtree(BinaryTree::ROOT), tree.to_subtree(target));
    }

    #[test]
    fn delete_leaf_only_on_leaves(seed in any::<u64>()) {
        let mut r = rng(seed);
        let tree = random_full_tree(&mut r, 51);
        for n in tree.refs().skip(1) {
            let node = &tree.nodes()[n.0];
            prop_assert_eq!(delete_leaf(&tree, &node.id).is_ok(), node.is_leaf());
        }
    }
}
