//! Set-intersection SLCA and ELCA search over IDLists.
//!
//! Common ancestors (CA) are the nodes present in every query keyword's list.
//! The forward algorithms enumerate CAs in ascending ID order by repeatedly
//! taking the largest current ID and binary searching for it in the other
//! lists; the backward algorithms enumerate them in descending order.
//!
//! The kernels work on plain `&[&IdList]` slices so the same code runs over
//! a whole-document [`TreeIndex`] and over a single redundancy component of an
//! [`IdCluster`](crate::IdCluster).
//!
//! Kernel contract: every list non-empty, ancestor-closed (every entry's parent
//! is also in the list unless it is the indexed root) and sorted by ID.

use crate::doc::NodeId;
use crate::idlist::{IdList, TreeIndex};
use crate::query::{Query, ResultSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semantics {
    Slca,
    Elca,
}

/// Which baseline kernel to run. For ELCA, `Bwd` and `BwdPlus` both mean the
/// backward algorithm with the narrowed binary search (ancestor skipping is
/// not applicable to ELCA).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Fwd,
    Bwd,
    BwdPlus,
}

impl std::str::FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "slca" => Ok(Semantics::Slca),
            "elca" => Ok(Semantics::Elca),
            _ => Err(format!("unknown semantics `{s}` (expected slca or elca)")),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fwd" => Ok(Algorithm::Fwd),
            "bwd" => Ok(Algorithm::Bwd),
            "bwd+" => Ok(Algorithm::BwdPlus),
            _ => Err(format!(
                "unknown algorithm `{s}` (expected fwd, bwd or bwd+)"
            )),
        }
    }
}

impl std::fmt::Display for Semantics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Semantics::Slca => "slca",
            Semantics::Elca => "elca",
        })
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Fwd => "fwd",
            Algorithm::Bwd => "bwd",
            Algorithm::BwdPlus => "bwd+",
        })
    }
}

/// Forward cursors, one per list.
#[derive(Debug)]
pub struct CursorSet<'a> {
    lists: &'a [&'a IdList],
    pos: Vec<usize>,
}

impl<'a> CursorSet<'a> {
    pub fn new(lists: &'a [&'a IdList]) -> Self {
        CursorSet {
            lists,
            pos: vec![0; lists.len()],
        }
    }

    pub fn positions(&self) -> &[usize] {
        &self.pos
    }

    /// `fwdGetCA`: moves every cursor to the next node present in all lists
    /// and returns its ID, or `None` once any list is exhausted.
    pub fn next_ca(&mut self) -> Option<NodeId> {
        let first = self.lists.first()?;
        let mut target = *first.ids.get(self.pos[0])?;
        'align: loop {
            for (i, list) in self.lists.iter().enumerate() {
                let from = self.pos[i];
                let ids = &list.ids[from.min(list.ids.len())..];
                let p = from + ids.partition_point(|&id| id < target);
                self.pos[i] = p;
                let id = *list.ids.get(p)?;
                if id > target {
                    target = id;
                    continue 'align;
                }
            }
            return Some(target);
        }
    }

    /// Steps every cursor past the current CA.
    pub fn advance(&mut self) {
        for p in &mut self.pos {
            *p += 1;
        }
    }
}

/// Backward cursors. `anc` tracks, per list, the deepest entry on the parent
/// chain of the most recently reported CA; those entries are CAs that can
/// never be SLCAs and are skipped without binary searching.
struct RevCursors<'a> {
    lists: &'a [&'a IdList],
    pos: Vec<isize>,
    anc: Vec<isize>,
    skip_ancestors: bool,
    narrow: bool,
}

impl<'a> RevCursors<'a> {
    fn new(lists: &'a [&'a IdList], skip_ancestors: bool, narrow: bool) -> Self {
        RevCursors {
            lists,
            pos: lists.iter().map(|l| l.len() as isize - 1).collect(),
            anc: vec![-1; lists.len()],
            skip_ancestors,
            narrow,
        }
    }

    fn skip(&mut self, i: usize) {
        let pid = &self.lists[i].pid_pos;
        loop {
            while self.anc[i] > self.pos[i] {
                self.anc[i] = pid[self.anc[i] as usize] as isize;
            }
            if self.anc[i] >= 0 && self.anc[i] == self.pos[i] {
                self.pos[i] -= 1;
                self.anc[i] = pid[self.anc[i] as usize] as isize;
            } else {
                return;
            }
        }
    }

    /// Largest position `<= self.pos[i]` whose id is `<= target`, or -1.
    fn seek(&self, i: usize, target: NodeId) -> isize {
        let list = self.lists[i];
        let hi = self.pos[i];
        let mut lo = 0isize;
        let mut hi_excl = hi + 1;
        if self.narrow {
            // The parent entry bounds the window: either the answer lies in
            // [parent, hi] or strictly before the parent.
            let p = list.pid_pos[hi as usize] as isize;
            if p >= 0 {
                if list.ids[p as usize] <= target {
                    lo = p;
                } else {
                    hi_excl = p;
                }
            }
        }
        let window = &list.ids[lo as usize..hi_excl as usize];
        lo + window.partition_point(|&id| id <= target) as isize - 1
    }

    /// Previous CA in descending order, skipping known ancestors when enabled.
    fn prev_ca(&mut self) -> Option<NodeId> {
        'align: loop {
            if self.skip_ancestors {
                for i in 0..self.lists.len() {
                    self.skip(i);
                }
            }
            let mut target = NodeId::MAX;
            for (i, list) in self.lists.iter().enumerate() {
                if self.pos[i] < 0 {
                    return None;
                }
                target = target.min(list.ids[self.pos[i] as usize]);
            }
            for i in 0..self.lists.len() {
                let p = self.seek(i, target);
                self.pos[i] = p;
                if p < 0 {
                    return None;
                }
                let id = self.lists[i].ids[p as usize];
                if id < target {
                    continue 'align;
                }
            }
            if self.skip_ancestors {
                self.skip(0);
                if self.lists[0].ids.get(self.pos[0] as usize) != Some(&target) || self.pos[0] < 0 {
                    // landed on a skippable ancestor
                    continue 'align;
                }
            }
            return Some(target);
        }
    }

    /// Called after a CA has been consumed.
    fn step(&mut self) {
        for i in 0..self.lists.len() {
            if self.skip_ancestors {
                self.anc[i] = self.lists[i].pid_pos[self.pos[i] as usize] as isize;
            }
            self.pos[i] -= 1;
        }
    }
}

/// All CA node IDs in ascending order.
pub fn common_ancestors(lists: &[&IdList]) -> Vec<NodeId> {
    if lists.iter().any(|l| l.is_empty()) {
        return Vec::new();
    }
    let mut c = CursorSet::new(lists);
    let mut out = Vec::new();
    while let Some(id) = c.next_ca() {
        out.push(id);
        c.advance();
    }
    out
}

/// FwdSLCA.
///
/// Because CAs are ancestor-closed (every ancestor of a CA is a CA), if the
/// CA following `u` in pre-order descends from `u` then its parent is
/// itself a CA between `u` and it, which can only be `u`. So `u` is an SLCA
/// exactly when the next CA's parent entry is not `u`.
pub fn slca_fwd(lists: &[&IdList]) -> Vec<NodeId> {
    if lists.is_empty() || lists.iter().any(|l| l.is_empty()) {
        return Vec::new();
    }
    let driver = lists[0];
    let mut c = CursorSet::new(lists);
    let mut out = Vec::new();
    let mut prev: Option<(NodeId, usize)> = None;
    while let Some(v) = c.next_ca() {
        let pos = c.positions()[0];
        if let Some((u, upos)) = prev {
            if driver.pid_pos[pos] != upos as i32 {
                out.push(u);
            }
        }
        prev = Some((v, pos));
        c.advance();
    }
    if let Some((u, _)) = prev {
        out.push(u);
    }
    out
}

/// BwdSLCA (`narrow = false`) and BwdSLCA+ (`narrow = true`).
///
/// In descending order every CA that is not an ancestor of an already
/// reported CA is an SLCA; ancestors are skipped through the parent chain.
fn slca_bwd_impl(lists: &[&IdList], narrow: bool) -> Vec<NodeId> {
    if lists.is_empty() || lists.iter().any(|l| l.is_empty()) {
        return Vec::new();
    }
    let mut c = RevCursors::new(lists, true, narrow);
    let mut out = Vec::new();
    while let Some(v) = c.prev_ca() {
        out.push(v);
        c.step();
    }
    out.reverse();
    out
}

pub fn slca_bwd(lists: &[&IdList]) -> Vec<NodeId> {
    slca_bwd_impl(lists, false)
}

pub fn slca_bwd_plus(lists: &[&IdList]) -> Vec<NodeId> {
    slca_bwd_impl(lists, true)
}

/// One ELCA stack frame: a CA node with its own per-keyword `n_desc` and the
/// accumulated `n_desc` of its CA children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElcaStackFrame {
    pub id: NodeId,
    pub pos0: usize,
    pub own_counts: Vec<u32>,
    pub child_ca_counts: Vec<u32>,
}

impl ElcaStackFrame {
    /// ELCA iff for every keyword some direct occurrence lies outside all CA children.
    pub fn is_elca(&self) -> bool {
        self.own_counts
            .iter()
            .zip(&self.child_ca_counts)
            .all(|(&own, &child)| {
                debug_assert!(child <= own);
                own > child
            })
    }
}

/// FwdELCA.
pub fn elca_fwd(lists: &[&IdList]) -> Vec<NodeId> {
    if lists.is_empty() || lists.iter().any(|l| l.is_empty()) {
        return Vec::new();
    }
    let driver = lists[0];
    let k = lists.len();
    let mut c = CursorSet::new(lists);
    let mut stack: Vec<ElcaStackFrame> = Vec::new();
    let mut out = Vec::new();

    fn pop(stack: &mut Vec<ElcaStackFrame>, out: &mut Vec<NodeId>) {
        let frame = stack.pop().expect("non-empty stack");
        if frame.is_elca() {
            out.push(frame.id);
        }
        if let Some(parent) = stack.last_mut() {
            for (acc, own) in parent.child_ca_counts.iter_mut().zip(&frame.own_counts) {
                *acc += own;
            }
        }
    }

    while let Some(v) = c.next_ca() {
        let pos = c.positions();
        let parent = driver.pid_pos[pos[0]];
        while stack.last().is_some_and(|top| top.pos0 as i32 != parent) {
            pop(&mut stack, &mut out);
        }
        stack.push(ElcaStackFrame {
            id: v,
            pos0: pos[0],
            own_counts: (0..k).map(|i| lists[i].n_desc[pos[i]]).collect(),
            child_ca_counts: vec![0; k],
        });
        c.advance();
    }
    while !stack.is_empty() {
        pop(&mut stack, &mut out);
    }
    out.sort_unstable();
    out
}

/// BwdELCA: descending CA enumeration with the narrowed binary search.
///
/// CA children of a node are all reported before it, and they are exactly
/// the pending frames on top of the stack whose parent entry is that node.
pub fn elca_bwd(lists: &[&IdList]) -> Vec<NodeId> {
    if lists.is_empty() || lists.iter().any(|l| l.is_empty()) {
        return Vec::new();
    }
    let driver = lists[0];
    let k = lists.len();
    let mut c = RevCursors::new(lists, false, true);
    let mut pending: Vec<ElcaStackFrame> = Vec::new();
    let mut out = Vec::new();
    while let Some(v) = c.prev_ca() {
        let pos0 = c.pos[0] as usize;
        let mut frame = ElcaStackFrame {
            id: v,
            pos0,
            own_counts: (0..k).map(|i| lists[i].n_desc[c.pos[i] as usize]).collect(),
            child_ca_counts: vec![0; k],
        };
        while let Some(top) = pending.last() {
            if driver.pid_pos[top.pos0] != pos0 as i32 {
                break;
            }
            let child = pending.pop().unwrap();
            for (acc, own) in frame.child_ca_counts.iter_mut().zip(&child.own_counts) {
                *acc += own;
            }
        }
        if frame.is_elca() {
            out.push(v);
        }
        pending.push(frame);
        c.step();
    }
    out.reverse();
    out
}

/// Runs one kernel over prepared lists.
pub fn run_kernel(semantics: Semantics, algorithm: Algorithm, lists: &[&IdList]) -> Vec<NodeId> {
    match (semantics, algorithm) {
        (Semantics::Slca, Algorithm::Fwd) => slca_fwd(lists),
        (Semantics::Slca, Algorithm::Bwd) => slca_bwd(lists),
        (Semantics::Slca, Algorithm::BwdPlus) => slca_bwd_plus(lists),
        (Semantics::Elca, Algorithm::Fwd) => elca_fwd(lists),
        (Semantics::Elca, Algorithm::Bwd | Algorithm::BwdPlus) => elca_bwd(lists),
    }
}

/// Looks up the query's lists, shortest first. `None` if any keyword is absent.
pub fn query_lists<'a>(index: &'a TreeIndex, query: &Query) -> Option<Vec<&'a IdList>> {
    let mut lists = Vec::with_capacity(query.len());
    for kw in query.keywords() {
        let l = index.lookup(kw);
        if l.is_empty() {
            return None;
        }
        lists.push(l);
    }
    lists.sort_by_key(|l| l.len());
    Some(lists)
}

pub fn search(
    index: &TreeIndex,
    query: &Query,
    semantics: Semantics,
    algorithm: Algorithm,
) -> ResultSet {
    match query_lists(index, query) {
        Some(lists) => ResultSet::from_sorted(run_kernel(semantics, algorithm, &lists)),
        None => ResultSet::empty(),
    }
}

pub fn fwd_slca(index: &TreeIndex, query: &Query) -> ResultSet {
    search(index, query, Semantics::Slca, Algorithm::Fwd)
}

pub fn bwd_slca(index: &TreeIndex, query: &Query) -> ResultSet {
    search(index, query, Semantics::Slca, Algorithm::Bwd)
}

pub fn bwd_slca_plus(index: &TreeIndex, query: &Query) -> ResultSet {
    search(index, query, Semantics::Slca, Algorithm::BwdPlus)
}

pub fn fwd_elca(index: &TreeIndex, query: &Query) -> ResultSet {
    search(index, query, Semantics::Elca, Algorithm::Fwd)
}

pub fn bwd_elca(index: &TreeIndex, query: &Query) -> ResultSet {
    search(index, query, Semantics::Elca, Algorithm::BwdPlus)
}

/// All CA nodes of the query, ascending.
pub fn ca(index: &TreeIndex, query: &Query) -> ResultSet {
    match query_lists(index, query) {
        Some(lists) => ResultSet::from_unsorted(common_ancestors(&lists)),
        None => ResultSet::empty(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doc::parse_document;
    use crate::idlist::build_tree_index;

    fn idx(xml: &str) -> TreeIndex {
        build_tree_index(&parse_document(xml.as_bytes()).unwrap())
    }

    fn all_slca(index: &TreeIndex, q: &Query) -> [ResultSet; 3] {
        [
            fwd_slca(index, q),
            bwd_slca(index, q),
            bwd_slca_plus(index, q),
        ]
    }

    #[test]
    fn single_keyword_slca_is_deepest_containers() {
        let index = idx("<a><b>w</b><c>w</c></a>");
        let q = Query::new(["w"]).unwrap();
        for r in all_slca(&index, &q) {
            assert_eq!(r.ids(), &[2, 3]);
        }
    }

    #[test]
    fn chain_elca() {
        let index = idx("<a><b>w</b></a>");
        let q = Query::new(["w"]).unwrap();
        assert_eq!(fwd_elca(&index, &q).ids(), &[2]);
        assert_eq!(bwd_elca(&index, &q).ids(), &[2]);
    }

    #[test]
    fn one_keyword_cursor_walks_the_list() {
        let index = idx("<a><b>w</b><c>w</c></a>");
        let l = index.lookup("w");
        let lists = [l];
        let mut c = CursorSet::new(&lists);
        let mut seen = Vec::new();
        while let Some(id) = c.next_ca() {
            seen.push(id);
            c.advance();
        }
        assert_eq!(seen, l.ids);
    }

    #[test]
    fn fixture_cursor_stream() {
        let index = idx(include_str!("../tests/data/fixture.xml"));
        let lists = [index.lookup("USA"), index.lookup("English")];
        let mut c = CursorSet::new(&lists);
        let mut seen = Vec::new();
        while let Some(id) = c.next_ca() {
            seen.push(id);
            c.advance();
        }
        assert_eq!(seen, [1, 2, 4, 5, 11, 12]);
        assert_eq!(c.next_ca(), None);
    }

    #[test]
    fn disjoint_lists_have_no_ca() {
        let index = idx("<r><a>x</a><b>y</b></r>");
        // lists for x and y share only the root
        let lists = [index.lookup("x"), index.lookup("y")];
        let mut c = CursorSet::new(&lists);
        assert_eq!(c.next_ca(), Some(1));
        c.advance();
        assert_eq!(c.next_ca(), None);

        let lists = [index.lookup("a"), index.lookup("b")];
        assert!(common_ancestors(&lists).ids_eq(&[1]));
    }

    trait IdsEq {
        fn ids_eq(&self, other: &[NodeId]) -> bool;
    }
    impl IdsEq for Vec<NodeId> {
        fn ids_eq(&self, other: &[NodeId]) -> bool {
            self.as_slice() == other
        }
    }

    #[test]
    fn unknown_keyword_yields_empty() {
        let index = idx("<a>w</a>");
        let q = Query::new(["w", "nope"]).unwrap();
        for r in all_slca(&index, &q) {
            assert!(r.is_empty());
        }
        assert!(fwd_elca(&index, &q).is_empty());
        assert!(bwd_elca(&index, &q).is_empty());
    }

    #[test]
    fn elca_inner_node_with_own_occurrences() {
        // r contains x,y itself and in child b; both are ELCA, only b is SLCA
        let index = idx("<r>x y<b>x y</b></r>");
        let q = Query::new(["x", "y"]).unwrap();
        assert_eq!(fwd_elca(&index, &q).ids(), &[1, 2]);
        assert_eq!(bwd_elca(&index, &q).ids(), &[1, 2]);
        for r in all_slca(&index, &q) {
            assert_eq!(r.ids(), &[2]);
        }
    }

    #[test]
    fn backward_skips_interleaved_ancestors() {
        let xml = "<r><a><b>x y</b><c>z</c><d><e>x y</e></d></a><f>x</f><g>y<h>x</h></g></r>";
        let index = idx(xml);
        let q = Query::new(["x", "y"]).unwrap();
        for r in all_slca(&index, &q) {
            assert_eq!(r.ids(), &[3, 6, 8]);
        }
        assert_eq!(fwd_elca(&index, &q).ids(), &[3, 6, 8]);
        assert_eq!(bwd_elca(&index, &q).ids(), &[3, 6, 8]);
    }
}
