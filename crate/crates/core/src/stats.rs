//! Index-size accounting and compression savings.
//!
//! Byte sizes follow a fixed cost model: every list entry costs two 4-byte
//! integers for SLCA search (ID, parent position) or three for ELCA search
//! (plus the descendant count), and every pointer-map entry costs two 4-byte
//! integers (component, offset).

use crate::dag::IdCluster;
use crate::error::Error;
use crate::idlist::TreeIndex;
use crate::query::Query;
use crate::search::{common_ancestors, elca_fwd, query_lists, slca_fwd, Semantics};

pub const INT_BYTES: u64 = 4;
pub const RCPM_INTS_PER_ENTRY: u64 = 2;

pub fn ints_per_entry(semantics: Semantics) -> u64 {
    match semantics {
        Semantics::Slca => 2,
        Semantics::Elca => 3,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordSavings {
    pub keyword: String,
    /// Entries in the tree index ("path": nodes containing the keyword).
    pub tree_entries: u64,
    /// Entries across all components, dummies included.
    pub cluster_entries: u64,
    pub cluster_dummy_entries: u64,
    /// Nodes directly containing the keyword in the document.
    pub tree_direct: u64,
    /// DAG nodes directly containing the keyword.
    pub cluster_direct: u64,
}

/// Percentage of `before` removed by going down to `after`; zero when `before` is.
pub fn saving(before: u64, after: u64) -> f64 {
    if before == 0 {
        0.0
    } else {
        100.0 * (1.0 - after as f64 / before as f64)
    }
}

impl KeywordSavings {
    /// Percentage saving of list entries (`S_path`).
    pub fn path_saving(&self) -> f64 {
        saving(self.tree_entries, self.cluster_entries)
    }

    /// Percentage saving of directly containing nodes (`S_nodes`).
    pub fn nodes_saving(&self) -> f64 {
        saving(self.tree_direct, self.cluster_direct)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavingsStats {
    pub per_keyword: Vec<KeywordSavings>,
    pub tree_entries: u64,
    pub cluster_entries: u64,
    pub cluster_dummy_entries: u64,
    pub rcpm_entries: u64,
    pub components: u64,
}

impl SavingsStats {
    pub fn entry_saving(&self) -> f64 {
        saving(self.tree_entries, self.cluster_entries)
    }

    pub fn tree_bytes(&self, semantics: Semantics) -> u64 {
        self.tree_entries * ints_per_entry(semantics) * INT_BYTES
    }

    pub fn cluster_list_bytes(&self, semantics: Semantics) -> u64 {
        self.cluster_entries * ints_per_entry(semantics) * INT_BYTES
    }

    pub fn rcpm_bytes(&self) -> u64 {
        self.rcpm_entries * RCPM_INTS_PER_ENTRY * INT_BYTES
    }

    pub fn cluster_bytes(&self, semantics: Semantics) -> u64 {
        self.cluster_list_bytes(semantics) + self.rcpm_bytes()
    }

    pub fn keyword(&self, kw: &str) -> Option<&KeywordSavings> {
        self.per_keyword.iter().find(|k| k.keyword == kw)
    }
}

fn check_same_document(tree: &TreeIndex, cluster: &IdCluster) -> Result<(), Error> {
    if tree.node_count() != cluster.node_count() {
        return Err(Error::Mismatch(format!(
            "node counts differ ({} vs {})",
            tree.node_count(),
            cluster.node_count()
        )));
    }
    if tree.vocabulary() != cluster.vocabulary() {
        return Err(Error::Mismatch("keyword dictionaries differ".into()));
    }
    Ok(())
}

/// Per-keyword and total entry counts of both indices.
pub fn savings_report(tree: &TreeIndex, cluster: &IdCluster) -> Result<SavingsStats, Error> {
    check_same_document(tree, cluster)?;
    let vocab = tree.vocabulary();
    let mut per_keyword: Vec<KeywordSavings> = tree
        .lists()
        .map(|(_, w, l)| KeywordSavings {
            keyword: w.to_owned(),
            tree_entries: l.len() as u64,
            cluster_entries: 0,
            cluster_dummy_entries: 0,
            tree_direct: l.self_counts().iter().filter(|&&c| c > 0).count() as u64,
            cluster_direct: 0,
        })
        .collect();
    for (rc, comp) in cluster.components().iter().enumerate() {
        for (&kw, list) in &comp.lists {
            let row = &mut per_keyword[kw.index()];
            row.cluster_entries += list.len() as u64;
            let own = list.self_counts();
            for (i, &id) in list.ids.iter().enumerate() {
                if cluster.is_dummy(rc, id) {
                    row.cluster_dummy_entries += 1;
                } else if own[i] > 0 {
                    row.cluster_direct += 1;
                }
            }
        }
    }
    debug_assert_eq!(per_keyword.len(), vocab.len());
    let tree_entries = per_keyword.iter().map(|k| k.tree_entries).sum();
    let cluster_entries = per_keyword.iter().map(|k| k.cluster_entries).sum();
    let cluster_dummy_entries = per_keyword.iter().map(|k| k.cluster_dummy_entries).sum();
    Ok(SavingsStats {
        per_keyword,
        tree_entries,
        cluster_entries,
        cluster_dummy_entries,
        rcpm_entries: cluster.rcpm().len() as u64,
        components: cluster.components().len() as u64,
    })
}

/// Result counts in the tree versus the number of distinct (non-dummy)
/// result nodes that remain after DAG compression.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QuerySavings {
    pub ca_tree: u64,
    pub ca_dag: u64,
    pub elca_tree: u64,
    pub elca_dag: u64,
    pub slca_tree: u64,
    pub slca_dag: u64,
}

impl QuerySavings {
    pub fn s_ca(&self) -> f64 {
        saving(self.ca_tree, self.ca_dag)
    }
    pub fn s_elca(&self) -> f64 {
        saving(self.elca_tree, self.elca_dag)
    }
    pub fn s_slca(&self) -> f64 {
        saving(self.slca_tree, self.slca_dag)
    }
}

pub fn query_savings(tree: &TreeIndex, cluster: &IdCluster, query: &Query) -> QuerySavings {
    let mut s = QuerySavings::default();
    if let Some(lists) = query_lists(tree, query) {
        s.ca_tree = common_ancestors(&lists).len() as u64;
        s.elca_tree = elca_fwd(&lists).len() as u64;
        s.slca_tree = slca_fwd(&lists).len() as u64;
    }
    let Some(kws) = query
        .keywords()
        .iter()
        .map(|k| cluster.vocabulary().get(k))
        .collect::<Option<Vec<_>>>()
    else {
        return s;
    };
    for (rc, comp) in cluster.components().iter().enumerate() {
        let Some(lists) = kws
            .iter()
            .map(|&k| comp.list(k))
            .collect::<Option<Vec<_>>>()
        else {
            continue;
        };
        let real = |ids: Vec<u32>| {
            ids.into_iter()
                .filter(|&id| !cluster.is_dummy(rc, id))
                .count() as u64
        };
        s.ca_dag += real(common_ancestors(&lists));
        s.elca_dag += real(elca_fwd(&lists));
        s.slca_dag += real(slca_fwd(&lists));
    }
    s
}
