use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use verisure_core::rtl_graph::{backward_slice, build_graph, decompose, RtlBlock};

const SIGNALS: [&str; 8] = ["s0", "s1", "s2", "s3", "s4", "s5", "s6", "s7"];

fn blocks_strategy() -> impl Strategy<Value = Vec<RtlBlock>> {
    let block = (
        prop::collection::btree_set(0..SIGNALS.len(), 0..4),
        prop::collection::btree_set(0..SIGNALS.len(), 1..3),
    );
    prop::collection::vec(block, 1..10).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(id, (r, w))| {
                RtlBlock::synthetic(id, r.into_iter().map(|i| SIGNALS[i]), w.into_iter().map(|i| SIGNALS[i]))
            })
            .collect()
    })
}

/// Breadth-first distances computed straight from the read/write sets.
fn distances(blocks: &[RtlBlock], fail: &[String]) -> BTreeMap<usize, usize> {
    let mut dist = BTreeMap::new();
    let mut frontier: Vec<usize> = blocks
        .iter()
        .filter(|b| fail.iter().any(|f| b.writes.contains(f)))
        .map(|b| b.id)
        .collect();
    let mut d = 0;
    while !frontier.is_empty() {
        for &b in &frontier {
            dist.entry(b).or_insert(d);
        }
        let needed: BTreeSet<&String> = frontier.iter().flat_map(|b| &blocks[*b].reads).collect();
        frontier = blocks
            .iter()
            .filter(|b| !dist.contains_key(&b.id) && b.writes.iter().any(|w| needed.contains(w)))
            .map(|b| b.id)
            .collect();
        d += 1;
    }
    dist
}

proptest! {
    #[test]
    fn slice_matches_bfs_oracle(blocks in blocks_strategy(), seed in 0..SIGNALS.len(), d_max in 0usize..6) {
        let fail = vec![SIGNALS[seed].to_string()];
        let dist = distances(&blocks, &fail);
        let g = build_graph(blocks);
        let s = backward_slice(&g, &fail, d_max);
        let got: BTreeSet<usize> = s.block_ids.iter().copied().collect();
        let want: BTreeSet<usize> = dist.iter().filter(|(_, d)| **d <= d_max).map(|(b, _)| *b).collect();
        prop_assert_eq!(got, want);
        prop_assert_eq!(s.is_empty(), s.warnings.len() == 1);
    }

    #[test]
    fn slice_grows_with_depth(blocks in blocks_strategy(), seed in 0..SIGNALS.len(), d in 0usize..5) {
        let fail = vec![SIGNALS[seed].to_string()];
        let g = build_graph(blocks);
        let small: BTreeSet<usize> = backward_slice(&g, &fail, d).block_ids.into_iter().collect();
        let big: BTreeSet<usize> = backward_slice(&g, &fail, d + 1).block_ids.into_iter().collect();
        prop_assert!(small.is_subset(&big));
    }

    #[test]
    fn graph_edges_follow_read_write_sets(blocks in blocks_strategy()) {
        let mut want = BTreeSet::new();
        for a in &blocks {
            for b in &blocks {
                if a.writes.intersection(&b.reads).next().is_some() {
                    want.insert((a.id, b.id));
                }
            }
        }
        let g = build_graph(blocks.clone());
        prop_assert_eq!(&g.edges, &want);
        for s in SIGNALS {
            let drivers: BTreeSet<usize> = blocks.iter().filter(|b| b.writes.contains(s)).map(|b| b.id).collect();
            prop_assert_eq!(g.drivers(s).collect::<BTreeSet<_>>(), drivers);
        }
    }
}

#[test]
fn chain_of_assigns_slices_by_depth() {
    let src = "module m(input a, output y);
  wire w1, w2, w3;
  assign w1 = a;
  assign w2 = w1;
  assign w3 = w2;
  assign y = w3;
endmodule
";
    let g = build_graph(decompose(src).unwrap());
    let fail = vec!["y".to_string()];
    for d in 0..5 {
        assert_eq!(backward_slice(&g, &fail, d).block_ids.len(), (d + 1).min(4));
    }
}
