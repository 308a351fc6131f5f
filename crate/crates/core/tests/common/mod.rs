#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use idcluster::dag_search::dag_search;
use idcluster::search::{search, Algorithm, Semantics};
pub use idcluster::{
    build_idcluster, build_tree_index, compress, CompressedDag, DocumentTree, IdCluster, KeywordId,
    NodeId, Query, ResultSet, TreeIndex,
};

pub mod oracle;

use oracle::{ca_oracle, elca_oracle, slca_oracle};

pub const FIXTURE: &str = include_str!("../data/fixture.xml");

pub const SLCA_VARIANTS: [Algorithm; 3] = [Algorithm::Fwd, Algorithm::Bwd, Algorithm::BwdPlus];
pub const ELCA_VARIANTS: [Algorithm; 2] = [Algorithm::Fwd, Algorithm::BwdPlus];

pub struct Indexed {
    pub doc: DocumentTree,
    pub dag: CompressedDag,
    pub tree: TreeIndex,
    pub cluster: IdCluster,
}

pub fn index(doc: DocumentTree) -> Indexed {
    let dag = compress(&doc);
    let tree = build_tree_index(&doc);
    let cluster = build_idcluster(&dag);
    Indexed {
        doc,
        dag,
        tree,
        cluster,
    }
}

/// Every tree and DAG algorithm against the oracles, plus SLCA ⊆ ELCA ⊆ CA.
pub fn check_query(ix: &Indexed, q: &Query) -> Result<(), String> {
    let ca = ca_oracle(&ix.doc, q);
    let slca = slca_oracle(&ix.doc, q);
    let elca = elca_oracle(&ix.doc, q);
    for (sem, algos, expected) in [
        (Semantics::Slca, &SLCA_VARIANTS[..], &slca),
        (Semantics::Elca, &ELCA_VARIANTS[..], &elca),
    ] {
        for &a in algos {
            let t = search(&ix.tree, q, sem, a);
            if &t != expected {
                return Err(format!(
                    "tree {a} {sem} on '{q}': {:?} != oracle {:?}",
                    t.ids(),
                    expected.ids()
                ));
            }
            let d = dag_search(&ix.cluster, q, sem, a);
            if &d != expected {
                return Err(format!(
                    "dag {a} {sem} on '{q}': {:?} != oracle {:?}",
                    d.ids(),
                    expected.ids()
                ));
            }
        }
    }
    if !slca.is_subset_of(&elca) || !elca.is_subset_of(&ca) {
        return Err(format!("containment chain broken on '{q}'"));
    }
    Ok(())
}

pub fn check_unfold(ix: &Indexed) -> Result<(), String> {
    let unfolded = ix.dag.unfold();
    if unfolded.len() != ix.doc.len() {
        return Err(format!(
            "unfolded {} nodes, document has {}",
            unfolded.len(),
            ix.doc.len()
        ));
    }
    for (u, n) in unfolded.iter().zip(ix.doc.nodes()) {
        if (u.id, u.parent, u.kind, u.label, &u.keywords)
            != (n.id, n.parent, n.kind, n.label, &n.keywords)
        {
            return Err(format!("unfold differs at node {}", n.id));
        }
    }
    Ok(())
}

/// No two DAG nodes are identical (same kind, label, keywords and child targets).
pub fn check_minimal(dag: &CompressedDag) -> Result<(), String> {
    let mut seen = HashSet::new();
    for n in dag.nodes() {
        let key = (
            n.kind,
            n.label,
            n.keywords.clone(),
            n.children.iter().map(|e| e.target).collect::<Vec<_>>(),
        );
        if !seen.insert(key) {
            return Err(format!("DAG node {} duplicates an earlier node", n.id));
        }
    }
    Ok(())
}

/// Components partition the DAG; each is connected and occurrence-homogeneous.
pub fn check_components(ix: &Indexed) -> Result<(), String> {
    let dag = &ix.dag;
    let mut owner = vec![usize::MAX; dag.nodes().len()];
    for (rc, comp) in ix.cluster.components().iter().enumerate() {
        for &m in &comp.members {
            let i = dag
                .index_of(m)
                .ok_or(format!("member {m} not a DAG node"))?;
            if owner[i] != usize::MAX {
                return Err(format!("DAG node {m} in two components"));
            }
            owner[i] = rc;
            if dag.nodes()[i].occurrence_count != comp.occurrence_count {
                return Err(format!(
                    "member {m} of component {rc} has a different count"
                ));
            }
        }
    }
    if owner.contains(&usize::MAX) {
        return Err("DAG node outside every component".into());
    }
    // connected: every non-root member has a DAG parent in the same component
    let mut linked = vec![false; owner.len()];
    for (i, n) in dag.nodes().iter().enumerate() {
        for e in &n.children {
            if owner[e.target as usize] == owner[i] {
                linked[e.target as usize] = true;
            }
        }
    }
    for (rc, comp) in ix.cluster.components().iter().enumerate() {
        for &m in &comp.members {
            if m != comp.root && !linked[dag.index_of(m).unwrap()] {
                return Err(format!("member {m} of component {rc} is disconnected"));
            }
        }
    }
    Ok(())
}

/// IDs of component `rc`'s list for `kw`, with dummies expanded recursively
/// and shifted by `shift`.
fn expand(
    cluster: &IdCluster,
    rc: usize,
    kw: idcluster::KeywordId,
    shift: NodeId,
    out: &mut BTreeSet<NodeId>,
) {
    let Some(list) = cluster.component(rc).list(kw) else {
        return;
    };
    for &id in &list.ids {
        match cluster.rcpm().get(id).filter(|_| cluster.is_dummy(rc, id)) {
            Some(e) => expand(cluster, e.component as usize, kw, shift + e.offset, out),
            None => {
                out.insert(id + shift);
            }
        }
    }
}

/// Expanding the root component's lists reproduces the tree lists.
pub fn check_dummy_expansion(ix: &Indexed) -> Result<(), String> {
    for (kw, word, list) in ix.tree.lists() {
        let mut got = BTreeSet::new();
        expand(&ix.cluster, 0, kw, 0, &mut got);
        if !got.iter().copied().eq(list.ids.iter().copied()) {
            return Err(format!(
                "expanded list for '{word}' differs from the tree list"
            ));
        }
    }
    Ok(())
}

/// Cluster entries never exceed tree entries plus, for every edge crossing
/// into a nested component, the number of distinct keywords below that edge.
pub fn check_entry_bound(ix: &Indexed) -> Result<(), String> {
    let (doc, dag, cluster) = (&ix.doc, &ix.dag, &ix.cluster);
    let mut crossing = 0u64;
    for (parent, e) in dag.edges() {
        let child = &dag.nodes()[e.target as usize];
        if child.occurrence_count != parent.occurrence_count {
            let end = doc.node(child.id).end;
            let kws: HashSet<_> = (child.id..end)
                .flat_map(|id| doc.node(id).keywords.iter().copied())
                .collect();
            crossing += kws.len() as u64;
        }
    }
    let tree = ix.tree.total_entries();
    let real = cluster.total_entries() - cluster.dummy_entries();
    if real > tree || cluster.total_entries() > tree + crossing {
        return Err(format!(
            "cluster {} (real {real}) vs tree {tree} + crossing {crossing}",
            cluster.total_entries()
        ));
    }
    Ok(())
}
