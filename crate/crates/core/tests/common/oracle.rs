//! Brute-force CA / SLCA / ELCA straight from the definitions.
//!
//! Quadratic and deliberately naive. Nothing here touches IDLists or the
//! search kernels; it reads the document tree only.

use super::{DocumentTree, KeywordId, NodeId, Query, ResultSet};

fn keyword_ids(doc: &DocumentTree, query: &Query) -> Option<Vec<KeywordId>> {
    query
        .keywords()
        .iter()
        .map(|k| doc.vocabulary().get(k))
        .collect()
}

/// Does some node in `[from, to)` minus the `excluded` ranges directly contain every keyword?
fn range_contains_all(
    doc: &DocumentTree,
    from: NodeId,
    to: NodeId,
    excluded: &[(NodeId, NodeId)],
    kws: &[KeywordId],
) -> bool {
    kws.iter().all(|&kw| {
        (from..to).any(|id| {
            !excluded.iter().any(|&(a, b)| a <= id && id < b) && doc.node(id).contains_directly(kw)
        })
    })
}

/// Every node whose subtree contains every keyword.
pub fn ca_oracle(doc: &DocumentTree, query: &Query) -> ResultSet {
    let Some(kws) = keyword_ids(doc, query) else {
        return ResultSet::empty();
    };
    let ids = doc
        .nodes()
        .iter()
        .filter(|n| range_contains_all(doc, n.id, n.end, &[], &kws))
        .map(|n| n.id)
        .collect();
    ResultSet::from_unsorted(ids)
}

/// CA nodes without a CA descendant.
pub fn slca_oracle(doc: &DocumentTree, query: &Query) -> ResultSet {
    let ca = ca_oracle(doc, query);
    let ids = ca
        .iter()
        .copied()
        .filter(|&n| !ca.iter().any(|&d| doc.is_ancestor(n, d)))
        .collect();
    ResultSet::from_unsorted(ids)
}

/// CA nodes that still contain every keyword after the subtrees of all their
/// CA descendants are removed.
pub fn elca_oracle(doc: &DocumentTree, query: &Query) -> ResultSet {
    let Some(kws) = keyword_ids(doc, query) else {
        return ResultSet::empty();
    };
    let ca = ca_oracle(doc, query);
    let ids = ca
        .iter()
        .copied()
        .filter(|&n| {
            let removed: Vec<(NodeId, NodeId)> = ca
                .iter()
                .copied()
                .filter(|&d| doc.is_ancestor(n, d))
                .map(|d| (d, doc.node(d).end))
                .collect();
            range_contains_all(doc, n, doc.node(n).end, &removed, &kws)
        })
        .collect();
    ResultSet::from_unsorted(ids)
}
