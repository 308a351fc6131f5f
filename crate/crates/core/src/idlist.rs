//! Inverted node lists ("IDLists") and the baseline per-keyword tree index.
//!
//! An IDList for keyword `w` holds every node that contains `w` directly or
//! through a descendant, sorted by ID. Each entry carries three integers:
//! the node ID, the position of the node's parent inside the same list
//! (`-1` when the parent is not in the list, which only happens for the root
//! of the indexed tree) and the number of nodes in the subtree that contain
//! `w` directly. The three columns are stored as parallel arrays.

use std::collections::HashMap;

use crate::doc::{DocumentTree, NodeId};
use crate::vocab::{KeywordId, Vocabulary};

pub const NO_PARENT: i32 = -1;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdList {
    pub ids: Vec<NodeId>,
    pub pid_pos: Vec<i32>,
    pub n_desc: Vec<u32>,
}

impl IdList {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Position of `id` in the list, if present.
    pub fn position(&self, id: NodeId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    /// Number of entries whose `n_desc` is not explained by child entries,
    /// i.e. entries that contain the keyword themselves.
    pub fn self_counts(&self) -> Vec<u32> {
        let mut own = self.n_desc.clone();
        for (i, &p) in self.pid_pos.iter().enumerate() {
            if p >= 0 {
                own[p as usize] = own[p as usize].wrapping_sub(self.n_desc[i]);
            }
        }
        own
    }

    pub(crate) fn check_invariants(&self) -> Result<(), String> {
        let n = self.ids.len();
        if self.pid_pos.len() != n || self.n_desc.len() != n {
            return Err("column lengths differ".into());
        }
        for i in 0..n {
            if i > 0 && self.ids[i - 1] >= self.ids[i] {
                return Err(format!("ids not strictly ascending at {i}"));
            }
            let p = self.pid_pos[i];
            if p != NO_PARENT && (p < 0 || p as usize >= i) {
                return Err(format!("pid_pos {p} invalid at {i}"));
            }
            if self.n_desc[i] == 0 {
                return Err(format!("n_desc is zero at {i}"));
            }
        }
        let own = self.self_counts();
        if own.iter().any(|&c| c > u32::MAX / 2) {
            return Err("n_desc smaller than the sum of its children".into());
        }
        Ok(())
    }
}

/// Builds IDLists from a pre-order stream of items (tree nodes or dummy
/// placeholders), each announcing the keywords it contributes.
///
/// Items must be pushed in ascending ID order with parents pushed before
/// children. Ancestors that do not contribute a keyword themselves are added
/// to that keyword's list on demand, so every list stays ancestor-closed.
#[derive(Debug, Default)]
pub(crate) struct ListBuilder {
    item_ids: Vec<NodeId>,
    item_parent: Vec<u32>,
    lists: HashMap<KeywordId, PendingList>,
    missing: Vec<u32>,
}

#[derive(Debug, Default)]
struct PendingList {
    list: IdList,
    items: Vec<u32>,
}

const NO_ITEM: u32 = u32::MAX;

impl ListBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_item(&mut self, id: NodeId, parent: Option<u32>) -> u32 {
        debug_assert!(self.item_ids.last().is_none_or(|&last| last < id));
        let idx = self.item_ids.len() as u32;
        self.item_ids.push(id);
        self.item_parent.push(parent.unwrap_or(NO_ITEM));
        idx
    }

    /// Records that `item` contains `kw` directly `count` times (a dummy item
    /// contributes the number of direct containers in the subtree it stands for).
    pub fn add(&mut self, item: u32, kw: KeywordId, count: u32) {
        let pending = self.lists.entry(kw).or_default();
        if pending.items.last() == Some(&item) {
            *pending.list.n_desc.last_mut().unwrap() += count;
            return;
        }
        // Walk the item's ancestors against the parent chain of the last list
        // entry; the deepest ancestor already present is always on that chain.
        let list = &mut pending.list;
        self.missing.clear();
        let mut p = self.item_parent[item as usize];
        let mut q = list.ids.len() as i32 - 1;
        while p != NO_ITEM {
            let pid = self.item_ids[p as usize];
            while q >= 0 && list.ids[q as usize] > pid {
                q = list.pid_pos[q as usize];
            }
            if q >= 0 && pending.items[q as usize] == p {
                break;
            }
            self.missing.push(p);
            p = self.item_parent[p as usize];
        }
        let mut parent_pos = if p == NO_ITEM { NO_PARENT } else { q };
        for &m in self.missing.iter().rev() {
            list.ids.push(self.item_ids[m as usize]);
            list.pid_pos.push(parent_pos);
            list.n_desc.push(0);
            pending.items.push(m);
            parent_pos = list.ids.len() as i32 - 1;
        }
        list.ids.push(self.item_ids[item as usize]);
        list.pid_pos.push(parent_pos);
        list.n_desc.push(count);
        pending.items.push(item);
    }

    pub fn finish(self) -> HashMap<KeywordId, IdList> {
        self.lists
            .into_iter()
            .map(|(kw, pending)| {
                let mut list = pending.list;
                for i in (0..list.ids.len()).rev() {
                    let p = list.pid_pos[i];
                    if p >= 0 {
                        list.n_desc[p as usize] += list.n_desc[i];
                    }
                }
                (kw, list)
            })
            .collect()
    }
}

/// Baseline index: one IDList per keyword over the whole document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeIndex {
    pub(crate) vocab: Vocabulary,
    pub(crate) lists: Vec<IdList>,
    pub(crate) node_count: u32,
}

static EMPTY: IdList = IdList {
    ids: Vec::new(),
    pid_pos: Vec::new(),
    n_desc: Vec::new(),
};

impl TreeIndex {
    pub(crate) fn from_parts(vocab: Vocabulary, lists: Vec<IdList>, node_count: u32) -> Self {
        debug_assert_eq!(vocab.len(), lists.len());
        TreeIndex {
            vocab,
            lists,
            node_count,
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn node_count(&self) -> u32 {
        self.node_count
    }

    /// The IDList for `keyword`; empty when the keyword does not occur.
    pub fn lookup(&self, keyword: &str) -> &IdList {
        match self.vocab.get(keyword) {
            Some(k) => self.list(k),
            None => &EMPTY,
        }
    }

    pub fn list(&self, kw: KeywordId) -> &IdList {
        self.lists.get(kw.index()).unwrap_or(&EMPTY)
    }

    pub fn lists(&self) -> impl Iterator<Item = (KeywordId, &str, &IdList)> {
        self.vocab
            .iter()
            .zip(&self.lists)
            .map(|((k, w), l)| (k, w, l))
    }

    pub fn total_entries(&self) -> u64 {
        self.lists.iter().map(|l| l.len() as u64).sum()
    }
}

/// `idlist_lookup`: returns the keyword's list, or an empty list.
pub fn idlist_lookup<'a>(index: &'a TreeIndex, keyword: &str) -> &'a IdList {
    index.lookup(keyword)
}

/// Builds the tree index in one pre-order pass over the document.
pub fn build_tree_index(doc: &DocumentTree) -> TreeIndex {
    let mut b = ListBuilder::new();
    for node in doc.nodes() {
        let parent = (node.parent != 0).then(|| node.parent - 1);
        let item = b.push_item(node.id, parent);
        for &kw in node.keywords.iter() {
            b.add(item, kw, 1);
        }
    }
    let mut by_kw = b.finish();
    let lists = (0..doc.vocabulary().len() as u32)
        .map(|k| by_kw.remove(&KeywordId(k)).unwrap_or_default())
        .collect();
    TreeIndex::from_parts(doc.vocabulary().clone(), lists, doc.len() as u32)
}
