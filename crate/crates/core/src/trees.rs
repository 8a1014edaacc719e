//! Tries and binary search trees on word collections, with costs counted
//! at symbol granularity.

use crate::dynamical::Symbol;
use crate::error::{Error, Result};
use crate::source::SymbolAccess;
use serde::Serialize;
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::collections::BTreeMap;

fn pair_mut<W>(words: &mut [W], i: usize, j: usize) -> (&mut W, &mut W) {
    assert_ne!(i, j);
    if i < j {
        let (a, b) = words.split_at_mut(j);
        (&mut a[i], &mut b[0])
    } else {
        let (a, b) = words.split_at_mut(i);
        (&mut b[0], &mut a[j])
    }
}

/// First position where `u` and `v` differ and the order of the symbols
/// there. Ids are only used for error reporting.
fn compare<U: SymbolAccess + ?Sized, V: SymbolAccess + ?Sized>(
    u: &mut U,
    v: &mut V,
    ids: (usize, usize),
) -> Result<(usize, Ordering)> {
    let mut i = 0;
    loop {
        match (u.symbol(i), v.symbol(i)) {
            (Some(a), Some(b)) if a == b => i += 1,
            (Some(a), Some(b)) => return Ok((i, a.cmp(&b))),
            _ => {
                return Err(Error::IndistinguishableWords {
                    first: ids.0,
                    second: ids.1,
                })
            }
        }
    }
}

/// Length of the longest common prefix of two distinct words.
pub fn coincidence<U: SymbolAccess + ?Sized, V: SymbolAccess + ?Sized>(u: &mut U, v: &mut V) -> Result<usize> {
    compare(u, v, (0, 1)).map(|(c, _)| c)
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrieNode {
    Internal {
        children: Vec<(Symbol, NodeId)>,
    },
    /// Subtree holding fewer than two words.
    Leaf {
        word: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trie {
    pub nodes: Vec<TrieNode>,
    pub root: NodeId,
    /// Number of internal nodes.
    pub size: u64,
    /// Sum over words of the number of internal nodes on their branch.
    pub path_length: u64,
}

impl Trie {
    pub fn to_json(&self) -> Value {
        self.node_json(self.root)
    }

    fn node_json(&self, id: NodeId) -> Value {
        match &self.nodes[id] {
            TrieNode::Leaf { word } => json!({ "word": word }),
            TrieNode::Internal { children } => {
                let map: serde_json::Map<String, Value> = children
                    .iter()
                    .map(|(s, c)| (s.to_string(), self.node_json(*c)))
                    .collect();
                json!({ "children": map })
            }
        }
    }

    /// Word id stored at each leaf, with its depth in internal nodes.
    pub fn leaves(&self) -> Vec<(usize, u64)> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, 0u64)];
        while let Some((id, d)) = stack.pop() {
            match &self.nodes[id] {
                TrieNode::Leaf { word: Some(w) } => out.push((*w, d)),
                TrieNode::Leaf { word: None } => {}
                TrieNode::Internal { children } => stack.extend(children.iter().map(|(_, c)| (*c, d + 1))),
            }
        }
        out
    }
}

/// Builds the trie of `words`: a set of fewer than two words is a leaf,
/// otherwise an internal node whose children are the tries of the suffix
/// sets grouped by first symbol.
pub fn build_trie<W: SymbolAccess>(words: &mut [W]) -> Result<Trie> {
    let mut nodes = vec![TrieNode::Leaf { word: None }];
    let mut size = 0u64;
    let mut path_length = 0u64;
    let mut stack: Vec<(NodeId, Vec<usize>, usize)> = vec![(0, (0..words.len()).collect(), 0)];
    while let Some((id, ids, depth)) = stack.pop() {
        if ids.len() < 2 {
            nodes[id] = TrieNode::Leaf {
                word: ids.first().copied(),
            };
            continue;
        }
        size += 1;
        path_length += ids.len() as u64;
        let mut groups: BTreeMap<Symbol, Vec<usize>> = BTreeMap::new();
        let mut exhausted = None;
        for &w in &ids {
            match words[w].symbol(depth) {
                Some(s) => groups.entry(s).or_default().push(w),
                None => match exhausted {
                    None => exhausted = Some(w),
                    Some(prev) => return Err(Error::IndistinguishableWords { first: prev, second: w }),
                },
            }
        }
        if let Some(w) = exhausted {
            let other = ids.iter().copied().find(|&x| x != w).unwrap();
            return Err(Error::IndistinguishableWords {
                first: w,
                second: other,
            });
        }
        let mut children = Vec::with_capacity(groups.len());
        for (s, g) in groups {
            let child = nodes.len();
            nodes.push(TrieNode::Leaf { word: None });
            children.push((s, child));
            stack.push((child, g, depth + 1));
        }
        nodes[id] = TrieNode::Internal { children };
    }
    Ok(Trie {
        nodes,
        root: 0,
        size,
        path_length,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BstNode {
    pub word: usize,
    pub left: Option<NodeId>,
    pub right: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bst {
    pub nodes: Vec<BstNode>,
    /// Total symbol comparisons, each word comparison costing
    /// coincidence + 1.
    pub symbol_cost: u64,
    pub key_comparisons: u64,
}

impl Bst {
    pub fn in_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = Vec::new();
        let mut cur = if self.nodes.is_empty() { None } else { Some(0) };
        while cur.is_some() || !stack.is_empty() {
            while let Some(c) = cur {
                stack.push(c);
                cur = self.nodes[c].left;
            }
            let c = stack.pop().unwrap();
            out.push(self.nodes[c].word);
            cur = self.nodes[c].right;
        }
        out
    }

    pub fn to_json(&self) -> Value {
        fn rec(t: &Bst, id: Option<NodeId>) -> Value {
            match id {
                None => Value::Null,
                Some(i) => json!({
                    "word": t.nodes[i].word,
                    "left": rec(t, t.nodes[i].left),
                    "right": rec(t, t.nodes[i].right),
                }),
            }
        }
        rec(self, if self.nodes.is_empty() { None } else { Some(0) })
    }
}

/// Inserts `words` in order into a binary search tree under the
/// lexicographic order.
pub fn build_bst<W: SymbolAccess>(words: &mut [W]) -> Result<Bst> {
    let mut nodes: Vec<BstNode> = Vec::with_capacity(words.len());
    let mut symbol_cost = 0u64;
    let mut key_comparisons = 0u64;
    for w in 0..words.len() {
        if nodes.is_empty() {
            nodes.push(BstNode {
                word: w,
                left: None,
                right: None,
            });
            continue;
        }
        let mut cur = 0;
        loop {
            let other = nodes[cur].word;
            let (u, v) = pair_mut(words, w, other);
            let (c, ord) = compare(u, v, (w, other))?;
            symbol_cost += c as u64 + 1;
            key_comparisons += 1;
            let next = if ord == Ordering::Less {
                nodes[cur].left
            } else {
                nodes[cur].right
            };
            match next {
                Some(n) => cur = n,
                None => {
                    let id = nodes.len();
                    if ord == Ordering::Less {
                        nodes[cur].left = Some(id);
                    } else {
                        nodes[cur].right = Some(id);
                    }
                    nodes.push(BstNode {
                        word: w,
                        left: None,
                        right: None,
                    });
                    break;
                }
            }
        }
    }
    Ok(Bst {
        nodes,
        symbol_cost,
        key_comparisons,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeCostReport {
    pub n: usize,
    pub trie_size: u64,
    pub trie_path_length: u64,
    pub bst_symbol_cost: u64,
    pub key_comparisons: u64,
}

/// R, C and B for one collection of words.
pub fn tree_costs<W: SymbolAccess>(words: &mut [W]) -> Result<TreeCostReport> {
    let trie = build_trie(words)?;
    let bst = build_bst(words)?;
    Ok(TreeCostReport {
        n: words.len(),
        trie_size: trie.size,
        trie_path_length: trie.path_length,
        bst_symbol_cost: bst.symbol_cost,
        key_comparisons: bst.key_comparisons,
    })
}
