mod common;

use common::cloud;
use h2mmp::geometry::{generate_geometry, GeometryFamily, GeometrySpec};
use h2mmp::htree::{
    build_block_tree, build_cluster_tree, is_admissible, BlockKind, BlockTree, ClusterTree,
    Placement,
};
use proptest::prelude::*;

/// Depth of the tree found by walking parent links up from every leaf.
fn traversal_depth(tree: &ClusterTree) -> usize {
    tree.leaves()
        .map(|mut t| {
            let mut d = 0;
            while let Some(p) = tree.cluster(t).parent {
                t = p;
                d += 1;
            }
            d
        })
        .max()
        .unwrap()
}

fn leaf_area(bt: &BlockTree) -> usize {
    bt.blocks()
        .iter()
        .filter(|b| b.kind != BlockKind::Subdivided)
        .map(|b| bt.tree().cluster(b.row).size() * bt.tree().cluster(b.col).size())
        .sum()
}

#[test]
fn thousand_points_depth() {
    let tree = build_cluster_tree(&cloud(1000, 0), 30).unwrap();
    // ⌈log2(1000/30)⌉ = 6
    assert_eq!(traversal_depth(&tree), 6);
    assert_eq!(tree.depth(), 6);
    assert!(tree.leaves().all(|t| tree.cluster(t).size() <= 30));
}

#[test]
fn bus_sparsity_constant() {
    let pts = generate_geometry(&GeometrySpec {
        family: GeometryFamily::Bus {
            conductors: 4,
            density: 4,
        },
        seed: 0,
    })
    .unwrap();
    assert_eq!(pts.len(), 4864);
    let bt = build_block_tree(&build_cluster_tree(&pts, 30).unwrap(), 1.0).unwrap();
    assert_eq!(bt.tree().depth(), 8);
    assert_eq!(bt.csp(), 142);
    let per_level_max = (0..bt.num_levels())
        .map(|l| {
            bt.tree()
                .level(l)
                .map(|t| bt.row_blocks(t).len().max(bt.col_blocks(t).len()))
                .max()
                .unwrap()
        })
        .max()
        .unwrap();
    assert_eq!(per_level_max, bt.csp());
    assert_eq!(leaf_area(&bt), 4864 * 4864);
}

#[test]
fn placement_of_pairs() {
    let bt = build_block_tree(&build_cluster_tree(&cloud(400, 2), 20).unwrap(), 1.0).unwrap();
    let tree = bt.tree();
    for (id, b) in bt.blocks().iter().enumerate() {
        assert_eq!(bt.placement(b.row, b.col), Placement::Node(id));
        if b.kind == BlockKind::Admissible {
            if let (Some(r), Some(c)) = (tree.children(b.row), tree.children(b.col)) {
                assert_eq!(bt.placement(r[0], c[1]), Placement::InsideAdmissible);
            }
        }
    }
}

#[test]
fn serde_round_trip_rebuilds_lookups() {
    let bt = build_block_tree(&build_cluster_tree(&cloud(300, 4), 16).unwrap(), 1.5).unwrap();
    let back: BlockTree = serde_json::from_str(&serde_json::to_string(&bt).unwrap()).unwrap();
    assert_eq!(back, bt);
    assert_eq!(back.csp(), bt.csp());
    let b = &bt.blocks()[7];
    assert_eq!(back.find(b.row, b.col), Some(7));
}

#[test]
fn malformed_structure_rejected() {
    let bt = build_block_tree(&build_cluster_tree(&cloud(100, 4), 16).unwrap(), 1.0).unwrap();
    let mut v = serde_json::to_value(&bt).unwrap();
    v["tree"]["perm"][0] = serde_json::json!(1);
    assert!(serde_json::from_value::<BlockTree>(v).is_err());
    let mut v = serde_json::to_value(&bt).unwrap();
    v["blocks"].as_array_mut().unwrap().pop();
    assert!(serde_json::from_value::<BlockTree>(v).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cluster_tree_partitions(n in 1usize..600, leafsize in 1usize..40, seed in any::<u64>()) {
        let tree = build_cluster_tree(&cloud(n, seed), leafsize).unwrap();
        let mut perm = tree.permutation().to_vec();
        perm.sort_unstable();
        prop_assert_eq!(perm, (0..n).collect::<Vec<_>>());
        let pts = cloud(n, seed);
        for l in 0..=tree.depth() {
            let mut next = 0;
            for t in tree.level(l) {
                let c = tree.cluster(t);
                prop_assert_eq!(c.begin, next);
                next = c.end;
                prop_assert_eq!(c.is_leaf(), l == tree.depth());
                for &i in tree.indices(t) {
                    prop_assert!(c.bbox.contains(&pts.points()[i]));
                }
                if let Some([a, b]) = c.children {
                    prop_assert_eq!(tree.cluster(a).begin, c.begin);
                    prop_assert_eq!(tree.cluster(a).end, tree.cluster(b).begin);
                    prop_assert_eq!(tree.cluster(b).end, c.end);
                }
            }
            prop_assert_eq!(next, n);
        }
        prop_assert!(tree.leaves().all(|t| tree.cluster(t).size() <= leafsize));
        prop_assert_eq!(traversal_depth(&tree), tree.depth());
    }

    #[test]
    fn block_tree_invariants(n in 2usize..500, leafsize in 4usize..40, eta in 0.3f64..3.0, seed in any::<u64>()) {
        let bt = build_block_tree(&build_cluster_tree(&cloud(n, seed), leafsize).unwrap(), eta).unwrap();
        let tree = bt.tree();
        prop_assert_eq!(leaf_area(&bt), n * n);
        for b in bt.blocks() {
            let (t, s) = (tree.cluster(b.row), tree.cluster(b.col));
            match b.kind {
                BlockKind::Admissible => prop_assert!(is_admissible(t, s, eta)),
                BlockKind::InadmissibleLeaf => prop_assert!(t.is_leaf() && s.is_leaf()),
                BlockKind::Subdivided => prop_assert!(b.children.is_some()),
            }
            // symmetric structure
            let mirror = bt.find(b.col, b.row).expect("mirror block");
            prop_assert_eq!(bt.block(mirror).kind, b.kind);
        }
        let max_rows = (0..tree.len()).map(|t| bt.row_blocks(t).len().max(bt.col_blocks(t).len())).max().unwrap();
        prop_assert_eq!(bt.csp(), max_rows);
    }

    #[test]
    fn admissibility_monotone_in_eta(n in 20usize..400, seed in any::<u64>(), eta in 0.2f64..2.0, grow in 1.0f64..3.0) {
        let tree = build_cluster_tree(&cloud(n, seed), 8).unwrap();
        for t in tree.clusters() {
            for s in tree.clusters().iter().filter(|s| s.level == t.level) {
                if is_admissible(t, s, eta) {
                    prop_assert!(is_admissible(t, s, eta * grow));
                }
            }
        }
        // and at the block-tree level: admissible leaves never get finer
        let coarse = build_block_tree(&tree, eta * grow).unwrap();
        let fine = build_block_tree(&tree, eta).unwrap();
        for b in fine.blocks().iter().filter(|b| b.kind == BlockKind::Admissible) {
            prop_assert!(!matches!(coarse.placement(b.row, b.col), Placement::Node(id) if coarse.block(id).kind != BlockKind::Admissible));
        }
    }
}
