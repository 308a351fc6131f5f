//! DAG compression and redundancy-component index construction.
//!
//! Pass 1 ([`compress`]) merges identical subtrees bottom-up. Two nodes are
//! identical when they have the same kind, label and directly contained
//! keyword set and their child lists are identical position by position. The
//! first occurrence in document order is kept; every later occurrence is
//! replaced by an *offset edge* to it carrying `removed_id - kept_id`. Each
//! kept node records how many times its subtree occurs in the document.
//!
//! Pass 2 ([`build_idcluster`]) groups connected nodes with equal occurrence
//! counts into redundancy components. Each component gets its own IDLists.
//! An edge leaving a component for a nested one becomes a *dummy* entry whose
//! ID is the nested root's ID shifted by the edge offset; the dummy is keyed in
//! the global component pointer map ([`Rcpm`]) to `(nested component, offset)`.
//!
//! All IDs inside a component's lists are original IDs within the first
//! occurrence of the component's root, so nested results map to the parent
//! frame by adding the offset of the referencing edge.

use std::collections::HashMap;

use crate::doc::{DocumentTree, NodeId, NodeKind};
use crate::idlist::{IdList, ListBuilder};
use crate::vocab::{KeywordId, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DagEdge {
    /// Index into [`CompressedDag::nodes`].
    pub target: u32,
    /// `0` for a plain edge.
    pub offset: u32,
}

impl DagEdge {
    pub fn is_offset_edge(&self) -> bool {
        self.offset != 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagNode {
    /// ID of the first occurrence in the original document.
    pub id: NodeId,
    pub kind: NodeKind,
    pub label: KeywordId,
    pub keywords: Box<[KeywordId]>,
    pub children: Vec<DagEdge>,
    pub occurrence_count: u32,
}

/// Result of pass 1. Nodes are stored in ascending ID order; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedDag {
    nodes: Vec<DagNode>,
    vocab: Vocabulary,
    node_count: u32,
}

#[derive(Hash, PartialEq, Eq)]
struct NodeKey {
    kind: NodeKind,
    label: KeywordId,
    keywords: Box<[KeywordId]>,
    children: Box<[u32]>,
}

/// One node of an unfolded DAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnfoldedNode {
    pub id: NodeId,
    pub parent: NodeId,
    pub kind: NodeKind,
    pub label: KeywordId,
    pub keywords: Box<[KeywordId]>,
}

impl CompressedDag {
    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    pub fn root(&self) -> &DagNode {
        &self.nodes[0]
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Node count of the original document.
    pub fn original_node_count(&self) -> u32 {
        self.node_count
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&DagNode, &DagEdge)> {
        self.nodes
            .iter()
            .flat_map(|n| n.children.iter().map(move |e| (n, e)))
    }

    pub fn offset_edge_count(&self) -> usize {
        self.edges().filter(|(_, e)| e.is_offset_edge()).count()
    }

    /// Expands shared nodes back into a tree, adding accumulated offsets to IDs.
    /// Output is in pre-order.
    pub fn unfold(&self) -> Vec<UnfoldedNode> {
        let mut out = Vec::with_capacity(self.node_count as usize);
        let mut stack: Vec<(u32, u32, NodeId)> = vec![(0, 0, 0)];
        while let Some((idx, acc, parent)) = stack.pop() {
            let node = &self.nodes[idx as usize];
            let id = node.id + acc;
            out.push(UnfoldedNode {
                id,
                parent,
                kind: node.kind,
                label: node.label,
                keywords: node.keywords.clone(),
            });
            for e in node.children.iter().rev() {
                stack.push((e.target, acc + e.offset, id));
            }
        }
        out
    }

    /// Number of occurrences of each node, recomputed by summing parent
    /// counts over incoming edges in topological order.
    pub fn path_weighted_counts(&self) -> Vec<u64> {
        let n = self.nodes.len();
        let mut indegree = vec![0u32; n];
        for (_, e) in self.edges() {
            indegree[e.target as usize] += 1;
        }
        let mut counts = vec![0u64; n];
        let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        for &r in &ready {
            counts[r] = 1;
        }
        while let Some(i) = ready.pop() {
            for e in &self.nodes[i].children {
                let t = e.target as usize;
                counts[t] += counts[i];
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    ready.push(t);
                }
            }
        }
        counts
    }
}

/// Pass 1: bottom-up hash-consing of identical subtrees.
pub fn compress(doc: &DocumentTree) -> CompressedDag {
    let n = doc.len();
    let mut class = vec![0u32; n];
    let mut table: HashMap<NodeKey, u32> = HashMap::new();
    // children have larger IDs, so reverse ID order visits them first
    for id in (1..=n as NodeId).rev() {
        let node = doc.node(id);
        let children: Box<[u32]> = doc.children(id).map(|c| class[c as usize - 1]).collect();
        let key = NodeKey {
            kind: node.kind,
            label: node.label,
            keywords: node.keywords.clone(),
            children,
        };
        let next = table.len() as u32;
        class[id as usize - 1] = *table.entry(key).or_insert(next);
    }
    let classes = table.len();
    drop(table);

    const UNSET: u32 = u32::MAX;
    let mut canonical = vec![UNSET; classes];
    let mut counts = vec![0u32; classes];
    let mut nodes: Vec<DagNode> = Vec::with_capacity(classes);
    let mut node_class = Vec::with_capacity(classes);
    for node in doc.nodes() {
        let c = class[node.id as usize - 1] as usize;
        counts[c] += 1;
        if canonical[c] == UNSET {
            canonical[c] = nodes.len() as u32;
            node_class.push(c);
            nodes.push(DagNode {
                id: node.id,
                kind: node.kind,
                label: node.label,
                keywords: node.keywords.clone(),
                children: Vec::new(),
                occurrence_count: 0,
            });
        }
    }
    for i in 0..nodes.len() {
        let id = nodes[i].id;
        let children = doc
            .children(id)
            .map(|ch| {
                let target = canonical[class[ch as usize - 1] as usize];
                DagEdge {
                    target,
                    offset: ch - nodes[target as usize].id,
                }
            })
            .collect();
        nodes[i].children = children;
        nodes[i].occurrence_count = counts[node_class[i]];
    }
    CompressedDag {
        nodes,
        vocab: doc.vocabulary().clone(),
        node_count: n as u32,
    }
}

/// One redundancy component: a maximal connected set of DAG nodes sharing an
/// occurrence count, with IDLists that include dummy entries for nested components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub root: NodeId,
    pub occurrence_count: u32,
    /// Member node IDs in ascending order.
    pub members: Vec<NodeId>,
    pub lists: HashMap<KeywordId, IdList>,
}

impl Component {
    pub fn list(&self, kw: KeywordId) -> Option<&IdList> {
        self.lists.get(&kw)
    }

    pub fn total_entries(&self) -> u64 {
        self.lists.values().map(|l| l.len() as u64).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RcpmEntry {
    pub dummy: NodeId,
    pub component: u32,
    pub offset: u32,
}

/// Redundancy component pointer map: dummy ID -> (nested component, offset).
///
/// Entries are kept sorted by dummy ID. For lookups, a membership bitmap
/// (small enough to stay cached) guards a dense ID-indexed table of component
/// indices; the offset follows from the component's root ID.
#[derive(Debug, Clone, Default)]
pub struct Rcpm {
    entries: Vec<RcpmEntry>,
    present: Vec<u64>,
    slots: Vec<u32>,
    roots: Vec<NodeId>,
}

impl PartialEq for Rcpm {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for Rcpm {}

impl Rcpm {
    /// `roots[c]` is the root ID of component `c`. Every entry must satisfy
    /// `dummy == roots[component] + offset`, and dummy IDs must be distinct
    /// and at most `node_count`.
    pub fn from_entries(mut entries: Vec<RcpmEntry>, node_count: u32, roots: Vec<NodeId>) -> Self {
        entries.sort_unstable_by_key(|e| e.dummy);
        let len = node_count as usize + 1;
        let mut slots = vec![0u32; len];
        let mut present = vec![0u64; len.div_ceil(64)];
        for e in &entries {
            debug_assert_eq!(roots[e.component as usize] + e.offset, e.dummy);
            let d = e.dummy as usize;
            slots[d] = e.component;
            present[d / 64] |= 1 << (d % 64);
        }
        Rcpm {
            entries,
            present,
            slots,
            roots,
        }
    }

    #[inline]
    pub fn get(&self, id: NodeId) -> Option<RcpmEntry> {
        let d = id as usize;
        match self.present.get(d / 64) {
            Some(&bits) if bits & (1 << (d % 64)) != 0 => {
                let component = self.slots[d];
                Some(RcpmEntry {
                    dummy: id,
                    component,
                    offset: id - self.roots[component as usize],
                })
            }
            _ => None,
        }
    }

    pub fn entries(&self) -> &[RcpmEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The DAG-based index: per-component IDLists plus one RCPM.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdCluster {
    pub(crate) vocab: Vocabulary,
    pub(crate) components: Vec<Component>,
    pub(crate) rcpm: Rcpm,
    pub(crate) node_count: u32,
}

impl IdCluster {
    pub(crate) fn from_parts(
        vocab: Vocabulary,
        components: Vec<Component>,
        rcpm: Rcpm,
        node_count: u32,
    ) -> Self {
        IdCluster {
            vocab,
            components,
            rcpm,
            node_count,
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, rc: usize) -> &Component {
        &self.components[rc]
    }

    pub fn rcpm(&self) -> &Rcpm {
        &self.rcpm
    }

    pub fn node_count(&self) -> u32 {
        self.node_count
    }

    /// True when `id` in component `rc`'s lists stands for a nested component.
    #[inline]
    pub fn is_dummy(&self, rc: usize, id: NodeId) -> bool {
        id != self.components[rc].root && self.rcpm.get(id).is_some()
    }

    pub fn total_entries(&self) -> u64 {
        self.components.iter().map(|c| c.total_entries()).sum()
    }

    pub fn dummy_entries(&self) -> u64 {
        self.components
            .iter()
            .enumerate()
            .map(|(rc, c)| {
                c.lists
                    .values()
                    .map(|l| l.ids.iter().filter(|&&id| self.is_dummy(rc, id)).count() as u64)
                    .sum::<u64>()
            })
            .sum()
    }

    /// Entry count of one keyword's lists across all components.
    pub fn keyword_entries(&self, kw: KeywordId) -> u64 {
        self.components
            .iter()
            .filter_map(|c| c.list(kw))
            .map(|l| l.len() as u64)
            .sum()
    }
}

enum Item {
    Member {
        dag: u32,
        parent: Option<u32>,
    },
    Dummy {
        id: NodeId,
        parent: u32,
        nested: u32,
    },
}

enum Visit {
    Member {
        dag: u32,
        parent: Option<u32>,
    },
    Dummy {
        target: u32,
        offset: u32,
        parent: u32,
    },
}

/// Pass 2: split the DAG into redundancy components and index each one.
pub fn build_idcluster(dag: &CompressedDag) -> IdCluster {
    const NONE: u32 = u32::MAX;
    let nodes = dag.nodes();
    let mut comp_of = vec![NONE; nodes.len()];
    let mut roots: Vec<u32> = Vec::new();
    let mut drafts: Vec<Vec<Item>> = Vec::new();
    let mut rcpm_entries = Vec::new();

    if !nodes.is_empty() {
        comp_of[0] = 0;
        roots.push(0);
    }

    // Discover components breadth-first from the document root; component 0
    // is the root component.
    let mut rc = 0;
    while rc < roots.len() {
        let mut items = Vec::new();
        let mut stack = vec![Visit::Member {
            dag: roots[rc],
            parent: None,
        }];
        while let Some(visit) = stack.pop() {
            match visit {
                Visit::Member { dag: idx, parent } => {
                    let node = &nodes[idx as usize];
                    let item = items.len() as u32;
                    items.push(Item::Member { dag: idx, parent });
                    for e in node.children.iter().rev() {
                        let child = &nodes[e.target as usize];
                        if child.occurrence_count == node.occurrence_count {
                            debug_assert_eq!(e.offset, 0, "intra-component edges carry no offset");
                            stack.push(Visit::Member {
                                dag: e.target,
                                parent: Some(item),
                            });
                        } else {
                            stack.push(Visit::Dummy {
                                target: e.target,
                                offset: e.offset,
                                parent: item,
                            });
                        }
                    }
                }
                Visit::Dummy {
                    target,
                    offset,
                    parent,
                } => {
                    if comp_of[target as usize] == NONE {
                        comp_of[target as usize] = roots.len() as u32;
                        roots.push(target);
                    }
                    let nested = comp_of[target as usize];
                    let id = nodes[target as usize].id + offset;
                    items.push(Item::Dummy { id, parent, nested });
                    rcpm_entries.push(RcpmEntry {
                        dummy: id,
                        component: nested,
                        offset,
                    });
                }
            }
        }
        drafts.push(items);
        rc += 1;
    }

    // Keyword totals of every nested component's unfolded subtree. Nested
    // components have strictly larger occurrence counts than the components
    // referencing them, so descending count order resolves them first.
    let mut order: Vec<usize> = (1..roots.len()).collect();
    order.sort_by_key(|&c| std::cmp::Reverse(nodes[roots[c] as usize].occurrence_count));
    let mut totals: Vec<Vec<(KeywordId, u32)>> = vec![Vec::new(); roots.len()];
    for &c in &order {
        let mut acc: HashMap<KeywordId, u32> = HashMap::new();
        for item in &drafts[c] {
            match *item {
                Item::Member { dag, .. } => {
                    for &kw in nodes[dag as usize].keywords.iter() {
                        *acc.entry(kw).or_default() += 1;
                    }
                }
                Item::Dummy { nested, .. } => {
                    debug_assert!(nested as usize != c);
                    for &(kw, n) in &totals[nested as usize] {
                        *acc.entry(kw).or_default() += n;
                    }
                }
            }
        }
        let mut t: Vec<_> = acc.into_iter().collect();
        t.sort_unstable();
        totals[c] = t;
    }

    let mut components = Vec::with_capacity(roots.len());
    for (c, items) in drafts.into_iter().enumerate() {
        let mut b = ListBuilder::new();
        let mut members = Vec::new();
        for item in &items {
            match *item {
                Item::Member { dag, parent } => {
                    let node = &nodes[dag as usize];
                    members.push(node.id);
                    let it = b.push_item(node.id, parent);
                    for &kw in node.keywords.iter() {
                        b.add(it, kw, 1);
                    }
                }
                Item::Dummy { id, parent, nested } => {
                    let it = b.push_item(id, Some(parent));
                    for &(kw, n) in &totals[nested as usize] {
                        b.add(it, kw, n);
                    }
                }
            }
        }
        let root = &nodes[roots[c] as usize];
        components.push(Component {
            root: root.id,
            occurrence_count: root.occurrence_count,
            members,
            lists: b.finish(),
        });
    }

    let component_roots = components.iter().map(|c| c.root).collect();
    IdCluster::from_parts(
        dag.vocabulary().clone(),
        components,
        Rcpm::from_entries(rcpm_entries, dag.original_node_count(), component_roots),
        dag.original_node_count(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doc::parse_document;
    use crate::idlist::build_tree_index;

    const FIXTURE: &str = r#"<releases><release id="r1"><artist><bio>USA English</bio><name>Tom Hanks</name><role kind="main">actor</role></artist><country>USA</country><language>English</language><artist><bio>USA English</bio><name>Tom Hanks</name><role kind="main">actor</role></artist></release><release id="r2"><title>Forrest Gump</title></release></releases>"#;

    fn doc(xml: &str) -> DocumentTree {
        parse_document(xml.as_bytes()).unwrap()
    }

    #[test]
    fn sibling_duplicates_share_one_node() {
        let dag = compress(&doc("<a><b>w</b><b>w</b></a>"));
        assert_eq!(dag.nodes().len(), 2);
        let root = dag.root();
        assert_eq!(
            root.children,
            vec![
                DagEdge {
                    target: 1,
                    offset: 0
                },
                DagEdge {
                    target: 1,
                    offset: 1
                }
            ]
        );
        assert_eq!(dag.nodes()[1].occurrence_count, 2);
        assert_eq!(dag.offset_edge_count(), 1);
    }

    #[test]
    fn same_tokens_different_label_are_distinct() {
        let dag = compress(&doc("<a><b>w</b><c>w</c></a>"));
        assert_eq!(dag.nodes().len(), 3);
    }

    #[test]
    fn fixture_compression() {
        let d = doc(FIXTURE);
        assert_eq!(d.len(), 18);
        let dag = compress(&d);
        // artist subtree 11..=15 folds onto 4..=8
        assert_eq!(dag.nodes().len(), 13);
        let artist = &dag.nodes()[dag.index_of(4).unwrap()];
        assert_eq!(artist.occurrence_count, 2);
        let release = &dag.nodes()[dag.index_of(2).unwrap()];
        let offsets: Vec<_> = release.children.iter().map(|e| e.offset).collect();
        assert_eq!(offsets, vec![0, 0, 0, 0, 7]);
        let counts = dag.path_weighted_counts();
        for (i, n) in dag.nodes().iter().enumerate() {
            assert_eq!(counts[i], n.occurrence_count as u64);
        }
    }

    #[test]
    fn unfold_restores_the_tree() {
        for xml in [
            FIXTURE,
            "<a><b>w</b><b>w</b></a>",
            "<a><x><b>w</b></x><b>w</b><x><b>w</b></x></a>",
        ] {
            let d = doc(xml);
            let unfolded = compress(&d).unfold();
            let expected: Vec<_> = d
                .nodes()
                .iter()
                .map(|n| UnfoldedNode {
                    id: n.id,
                    parent: n.parent,
                    kind: n.kind,
                    label: n.label,
                    keywords: n.keywords.clone(),
                })
                .collect();
            assert_eq!(unfolded, expected, "{xml}");
        }
    }

    #[test]
    fn fixture_components_and_pointer_map() {
        let d = doc(FIXTURE);
        let cluster = build_idcluster(&compress(&d));
        assert_eq!(cluster.components().len(), 2);
        let rc1 = cluster.component(1);
        assert_eq!((rc1.root, rc1.occurrence_count), (4, 2));
        assert_eq!(rc1.members, vec![4, 5, 6, 7, 8]);
        let entries: Vec<_> = cluster
            .rcpm()
            .entries()
            .iter()
            .map(|e| (e.dummy, e.component, e.offset))
            .collect();
        assert_eq!(entries, vec![(4, 1, 0), (11, 1, 7)]);

        let usa = d.vocabulary().get("USA").unwrap();
        let rc0_usa = cluster.component(0).list(usa).unwrap();
        assert_eq!(rc0_usa.ids, vec![1, 2, 4, 9, 11]);
        assert!(cluster.is_dummy(0, 4) && cluster.is_dummy(0, 11));
        assert!(!cluster.is_dummy(1, 4));
        assert_eq!(rc1.list(usa).unwrap().ids, vec![4, 5]);
        // dummies carry the nested component's keyword total
        assert_eq!(rc0_usa.self_counts(), vec![0, 0, 1, 1, 1]);
        assert_eq!(build_tree_index(&d).lookup("USA").len(), 7);
    }

    #[test]
    fn redundancy_free_document_is_one_component() {
        let d = doc("<a><b>x y</b><c k=\"z\">y</c></a>");
        let tree = build_tree_index(&d);
        let cluster = build_idcluster(&compress(&d));
        assert_eq!(cluster.components().len(), 1);
        assert!(cluster.rcpm().is_empty());
        for (kw, _, list) in tree.lists() {
            assert_eq!(cluster.component(0).list(kw), Some(list));
        }
    }
}
