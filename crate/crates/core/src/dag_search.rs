//! Query execution over an [`IdCluster`].
//!
//! Starting at the root component, each component is searched with an
//! unmodified baseline kernel. A local result that is a dummy entry stands for
//! a nested component: that component is searched (once per query, results
//! cached in its own ID frame) and the dummy is replaced by the nested results
//! shifted by the dummy's offset.
//!
//! A nested component's root has the same ID as the offset-0 dummy that
//! refers to it, so the root must never be looked up in the pointer map from
//! inside its own component. For SLCA a root result is necessarily the only
//! result and expansion is skipped entirely; for ELCA only the first (root)
//! entry is exempted because other ELCAs may follow it.

use crate::dag::IdCluster;
use crate::doc::NodeId;
use crate::idlist::IdList;
use crate::query::{Query, ResultSet};
use crate::search::{run_kernel, Algorithm, Semantics};
use crate::vocab::KeywordId;

/// Per-query cache of resolved component results (`SLCA[rc]` / `ELCA[rc]`).
#[derive(Debug, Clone)]
pub struct ComponentResultCache {
    results: Vec<Option<Vec<NodeId>>>,
    visits: Vec<u32>,
}

impl ComponentResultCache {
    fn new(components: usize) -> Self {
        ComponentResultCache {
            results: vec![None; components],
            visits: vec![0; components],
        }
    }

    pub fn is_done(&self, rc: usize) -> bool {
        self.results[rc].is_some()
    }

    /// Resolved results of `rc` in that component's own ID frame.
    pub fn get(&self, rc: usize) -> Option<&[NodeId]> {
        self.results[rc].as_deref()
    }

    /// How many times each component's lists were searched.
    pub fn visits(&self) -> &[u32] {
        &self.visits
    }

    pub fn components_searched(&self) -> usize {
        self.visits.iter().filter(|&&v| v > 0).count()
    }
}

/// Final results plus the per-component cache. The root component's entry is
/// moved into `results`, so `cache.get(0)` is `None`.
#[derive(Debug, Clone)]
pub struct DagSearchOutcome {
    pub results: ResultSet,
    pub cache: ComponentResultCache,
}

struct Frame {
    rc: usize,
    local: Vec<NodeId>,
    /// Next local index to check for pointer-map expansion.
    next: usize,
    /// Resolved output, filled lazily from the first dummy on.
    out: Vec<NodeId>,
    /// Local entries before this index are already in `out`.
    copied: usize,
    spliced: bool,
}

fn resolve_keywords(cluster: &IdCluster, query: &Query) -> Option<Vec<KeywordId>> {
    query
        .keywords()
        .iter()
        .map(|k| cluster.vocabulary().get(k))
        .collect()
}

fn component_lists<'a>(
    cluster: &'a IdCluster,
    rc: usize,
    kws: &[KeywordId],
) -> Option<Vec<&'a IdList>> {
    let comp = cluster.component(rc);
    let mut lists = Vec::with_capacity(kws.len());
    for &kw in kws {
        lists.push(comp.list(kw)?);
    }
    lists.sort_by_key(|l| l.len());
    Some(lists)
}

/// Runs a DAG-based search, returning results together with the component cache.
pub fn dag_search_traced(
    cluster: &IdCluster,
    query: &Query,
    semantics: Semantics,
    inner: Algorithm,
) -> DagSearchOutcome {
    let mut cache = ComponentResultCache::new(cluster.components().len());
    let Some(kws) = resolve_keywords(cluster, query) else {
        return DagSearchOutcome {
            results: ResultSet::empty(),
            cache,
        };
    };
    if cluster.components().is_empty() {
        return DagSearchOutcome {
            results: ResultSet::empty(),
            cache,
        };
    }
    let rcpm = cluster.rcpm();

    let open = |rc: usize, cache: &mut ComponentResultCache| -> Frame {
        cache.visits[rc] += 1;
        let local = match component_lists(cluster, rc, &kws) {
            Some(lists) => run_kernel(semantics, inner, &lists),
            None => Vec::new(),
        };
        debug_assert!(local.windows(2).all(|w| w[0] < w[1]));
        let root = cluster.component(rc).root;
        let start = match (semantics, local.first()) {
            (Semantics::Slca, Some(&first)) if first == root => local.len(),
            (Semantics::Elca, Some(&first)) if first == root => 1,
            _ => 0,
        };
        Frame {
            rc,
            local,
            next: start,
            out: Vec::new(),
            copied: 0,
            spliced: false,
        }
    };

    let mut in_progress = vec![false; cluster.components().len()];
    in_progress[0] = true;
    let mut stack = vec![open(0, &mut cache)];
    // a dummy's expansion lies inside its subtree, which holds no other local
    // result, so splicing in place keeps every list ascending
    'frames: while let Some(top) = stack.last_mut() {
        while top.next < top.local.len() {
            let i = top.next;
            if let Some(entry) = rcpm.get(top.local[i]) {
                let Some(nested) = cache.get(entry.component as usize) else {
                    let nested = entry.component as usize;
                    assert!(!in_progress[nested], "component nesting is cyclic");
                    in_progress[nested] = true;
                    let frame = open(nested, &mut cache);
                    stack.push(frame);
                    continue 'frames;
                };
                if !top.spliced {
                    top.spliced = true;
                    top.out.reserve(top.local.len() + nested.len());
                }
                top.out.extend_from_slice(&top.local[top.copied..i]);
                match *nested {
                    [n] => top.out.push(n + entry.offset),
                    _ => top.out.extend(nested.iter().map(|&n| n + entry.offset)),
                }
                top.copied = i + 1;
            }
            top.next += 1;
        }
        let mut frame = stack.pop().expect("frame on stack");
        let resolved = if frame.spliced {
            frame.out.extend_from_slice(&frame.local[frame.copied..]);
            frame.out
        } else {
            frame.local
        };
        debug_assert!(
            resolved.windows(2).all(|w| w[0] < w[1]),
            "expansion broke ordering"
        );
        in_progress[frame.rc] = false;
        cache.results[frame.rc] = Some(resolved);
    }

    let ids = cache.results[0].take().unwrap_or_default();
    let results = if ids.windows(2).all(|w| w[0] < w[1]) {
        ResultSet::from_sorted(ids)
    } else {
        debug_assert!(false, "spliced results out of order");
        ResultSet::from_unsorted(ids)
    };
    DagSearchOutcome { results, cache }
}

pub fn dag_search(
    cluster: &IdCluster,
    query: &Query,
    semantics: Semantics,
    inner: Algorithm,
) -> ResultSet {
    dag_search_traced(cluster, query, semantics, inner).results
}

/// DAG variant of FwdSLCA.
pub fn dag_fwd_slca(cluster: &IdCluster, query: &Query) -> ResultSet {
    dag_search(cluster, query, Semantics::Slca, Algorithm::Fwd)
}

/// DAG variant of FwdELCA.
pub fn dag_fwd_elca(cluster: &IdCluster, query: &Query) -> ResultSet {
    dag_search(cluster, query, Semantics::Elca, Algorithm::Fwd)
}

pub fn dag_bwd_slca(cluster: &IdCluster, query: &Query) -> ResultSet {
    dag_search(cluster, query, Semantics::Slca, Algorithm::Bwd)
}

pub fn dag_bwd_slca_plus(cluster: &IdCluster, query: &Query) -> ResultSet {
    dag_search(cluster, query, Semantics::Slca, Algorithm::BwdPlus)
}

pub fn dag_bwd_elca(cluster: &IdCluster, query: &Query) -> ResultSet {
    dag_search(cluster, query, Semantics::Elca, Algorithm::BwdPlus)
}
