use proptest::prelude::*;
use tamelab::source::{SourceModel, Word};
use tamelab::trees::{build_bst, build_trie, coincidence, tree_costs, TrieNode};

fn w(s: &[usize]) -> Word {
    Word(s.to_vec())
}

/// Recount of R and C by walking every internal node.
fn recount(t: &tamelab::trees::Trie) -> (u64, u64) {
    fn walk(t: &tamelab::trees::Trie, id: usize) -> (u64, u64, u64) {
        match &t.nodes[id] {
            TrieNode::Leaf { word } => (0, 0, word.is_some() as u64),
            TrieNode::Internal { children } => {
                let (mut r, mut c, mut leaves) = (1, 0, 0);
                for (_, ch) in children {
                    let (rr, cc, ll) = walk(t, *ch);
                    r += rr;
                    c += cc;
                    leaves += ll;
                }
                (r, c + leaves, leaves)
            }
        }
    }
    let (r, c, _) = walk(t, t.root);
    (r, c)
}

#[test]
fn hand_examples() {
    assert_eq!(coincidence(&mut w(&[0, 1, 2]), &mut w(&[0, 1, 3])).unwrap(), 2);
    assert_eq!(coincidence(&mut w(&[1, 0]), &mut w(&[0, 0])).unwrap(), 0);
    let t = build_trie(&mut [w(&[0, 1]), w(&[0, 0]), w(&[1, 0])]).unwrap();
    assert_eq!((t.size, t.path_length), (2, 5));
    let b = build_bst(&mut [w(&[0])]).unwrap();
    assert_eq!(b.symbol_cost, 0);
    let b = build_bst(&mut [w(&[0, 1]), w(&[0, 0])]).unwrap();
    assert_eq!(b.symbol_cost, 2);
}

#[test]
fn sixteen_words() {
    let src = SourceModel::builtin("uniform-binary").unwrap();
    let mut words = src.emit_words(16, 64, 2024);
    let t = build_trie(&mut words).unwrap();
    assert_eq!(t.leaves().len(), 16);
    assert_eq!(recount(&t), (t.size, t.path_length));
}

proptest! {
    #[test]
    fn bst_cost_is_sum_over_comparisons(seed in 0u64..500, n in 1usize..40) {
        let src = SourceModel::builtin("biased-binary").unwrap();
        let mut words = src.emit_words(n, 80, seed);
        words.sort();
        words.dedup();
        let b = build_bst(&mut words).unwrap();
        let order = b.in_order();
        let mut sorted = order.clone();
        sorted.sort_by(|&i, &j| words[i].0.cmp(&words[j].0));
        prop_assert_eq!(&order, &sorted);
        // sorted insertion: word i is compared with every earlier word
        let mut cost = 0u64;
        for i in 1..words.len() {
            for j in 0..i {
                cost += coincidence(&mut words[i].clone(), &mut words[j].clone()).unwrap() as u64 + 1;
            }
        }
        prop_assert_eq!(b.symbol_cost, cost);
    }

    #[test]
    fn trie_recount(seed in 0u64..500, n in 0usize..60) {
        let src = SourceModel::builtin("thirds").unwrap();
        let mut words = src.emit_words(n, 200, seed);
        let t = build_trie(&mut words).unwrap();
        prop_assert_eq!(recount(&t), (t.size, t.path_length));
        let r = tree_costs(&mut words).unwrap();
        prop_assert_eq!(r.trie_size, t.size);
    }
}
