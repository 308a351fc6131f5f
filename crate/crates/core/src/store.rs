//! Versioned binary persistence for [`TreeIndex`] and [`IdCluster`].
//!
//! All integers are little-endian 32-bit. Layout:
//!
//! ```text
//! "IDCX"  version:u32  kind:u32 (1 = tree, 2 = cluster)  node_count:u32
//! keyword_count:u32  { byte_len:u32 utf8[byte_len] } * keyword_count
//! kind 1: lists
//! kind 2: component_count:u32
//!         { root:u32 occurrence_count:u32 member_count:u32 member:u32*  lists } * component_count
//!         rcpm_count:u32 { dummy:u32 component:u32 offset:u32 } * rcpm_count
//! lists:  list_count:u32 { keyword:u32 len:u32 id:u32*len pid_pos:i32*len n_desc:u32*len } * list_count
//! ```
//!
//! Lists are written in ascending keyword order; only non-empty lists are stored.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::dag::{Component, IdCluster, Rcpm, RcpmEntry};
use crate::error::StoreError;
use crate::idlist::{IdList, TreeIndex};
use crate::vocab::{KeywordId, Vocabulary};

pub const MAGIC: [u8; 4] = *b"IDCX";
pub const VERSION: u32 = 1;
pub const KIND_TREE: u32 = 1;
pub const KIND_CLUSTER: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoredIndex {
    Tree(TreeIndex),
    Cluster(IdCluster),
}

impl StoredIndex {
    pub fn kind_name(&self) -> &'static str {
        match self {
            StoredIndex::Tree(_) => "tree",
            StoredIndex::Cluster(_) => "cluster",
        }
    }
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u32s(&mut self, vs: &[u32]) {
        for &v in vs {
            self.u32(v);
        }
    }

    fn i32s(&mut self, vs: &[i32]) {
        for &v in vs {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn header(&mut self, kind: u32, node_count: u32, vocab: &Vocabulary) {
        self.buf.extend_from_slice(&MAGIC);
        self.u32(VERSION);
        self.u32(kind);
        self.u32(node_count);
        self.u32(vocab.len() as u32);
        for (_, w) in vocab.iter() {
            self.u32(w.len() as u32);
            self.buf.extend_from_slice(w.as_bytes());
        }
    }

    fn lists<'a>(&mut self, lists: impl Iterator<Item = (KeywordId, &'a IdList)>) {
        let mut lists: Vec<_> = lists.filter(|(_, l)| !l.is_empty()).collect();
        lists.sort_unstable_by_key(|(k, _)| *k);
        self.u32(lists.len() as u32);
        for (kw, l) in lists {
            self.u32(kw.0);
            self.u32(l.len() as u32);
            self.u32s(&l.ids);
            self.i32s(&l.pid_pos);
            self.u32s(&l.n_desc);
        }
    }
}

pub fn encode(index: &StoredIndex) -> Vec<u8> {
    let mut w = Writer { buf: Vec::new() };
    match index {
        StoredIndex::Tree(t) => {
            w.header(KIND_TREE, t.node_count(), t.vocabulary());
            w.lists(t.lists().map(|(k, _, l)| (k, l)));
        }
        StoredIndex::Cluster(c) => {
            w.header(KIND_CLUSTER, c.node_count(), c.vocabulary());
            w.u32(c.components().len() as u32);
            for comp in c.components() {
                w.u32(comp.root);
                w.u32(comp.occurrence_count);
                w.u32(comp.members.len() as u32);
                w.u32s(&comp.members);
                w.lists(comp.lists.iter().map(|(&k, l)| (k, l)));
            }
            w.u32(c.rcpm().len() as u32);
            for e in c.rcpm().entries() {
                w.u32(e.dummy);
                w.u32(e.component);
                w.u32(e.offset);
            }
        }
    }
    w.buf
}

/// Exact encoded size, computed from field counts.
pub fn encoded_len(index: &StoredIndex) -> u64 {
    let lists_len = |lists: &mut dyn Iterator<Item = &IdList>| -> u64 {
        4 + lists
            .filter(|l| !l.is_empty())
            .map(|l| 8 + 12 * l.len() as u64)
            .sum::<u64>()
    };
    let header = |vocab: &Vocabulary| -> u64 {
        20 + vocab.iter().map(|(_, w)| 4 + w.len() as u64).sum::<u64>()
    };
    match index {
        StoredIndex::Tree(t) => {
            header(t.vocabulary()) + lists_len(&mut t.lists().map(|(_, _, l)| l))
        }
        StoredIndex::Cluster(c) => {
            header(c.vocabulary())
                + 4
                + c.components()
                    .iter()
                    .map(|comp| {
                        12 + 4 * comp.members.len() as u64 + lists_len(&mut comp.lists.values())
                    })
                    .sum::<u64>()
                + 4
                + 12 * c.rcpm().len() as u64
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn corrupt(msg: impl Into<String>) -> StoreError {
    StoreError::Corrupt(msg.into())
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], StoreError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| corrupt(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, StoreError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn count(&mut self, elem_size: usize) -> Result<usize, StoreError> {
        let n = self.u32()? as usize;
        // reject counts that cannot possibly fit in the remaining bytes
        if n.saturating_mul(elem_size) > self.buf.len() - self.pos {
            return Err(corrupt(format!(
                "count {n} exceeds file size at byte {}",
                self.pos - 4
            )));
        }
        Ok(n)
    }

    fn u32s(&mut self, n: usize) -> Result<Vec<u32>, StoreError> {
        let bytes = self.take(n * 4)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn i32s(&mut self, n: usize) -> Result<Vec<i32>, StoreError> {
        let bytes = self.take(n * 4)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn lists(&mut self, vocab_len: usize) -> Result<HashMap<KeywordId, IdList>, StoreError> {
        let n = self.count(8)?;
        let mut out = HashMap::with_capacity(n);
        let mut last: Option<u32> = None;
        for _ in 0..n {
            let kw = self.u32()?;
            if kw as usize >= vocab_len || last.is_some_and(|l| l >= kw) {
                return Err(corrupt(format!("bad keyword index {kw}")));
            }
            last = Some(kw);
            let len = self.count(12)?;
            let list = IdList {
                ids: self.u32s(len)?,
                pid_pos: self.i32s(len)?,
                n_desc: self.u32s(len)?,
            };
            list.check_invariants()
                .map_err(|e| corrupt(format!("list for keyword {kw}: {e}")))?;
            out.insert(KeywordId(kw), list);
        }
        Ok(out)
    }
}

pub fn decode(bytes: &[u8]) -> Result<StoredIndex, StoreError> {
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(StoreError::BadMagic);
    }
    let mut r = Reader { buf: bytes, pos: 4 };
    let version = r.u32()?;
    if version != VERSION {
        return Err(StoreError::UnsupportedVersion {
            found: version,
            expected: VERSION,
        });
    }
    let kind = r.u32()?;
    if kind != KIND_TREE && kind != KIND_CLUSTER {
        return Err(StoreError::UnknownKind(kind));
    }
    let node_count = r.u32()?;
    let vocab_len = r.count(4)?;
    let mut vocab = Vocabulary::new();
    for i in 0..vocab_len {
        let len = r.count(1)?;
        let word = std::str::from_utf8(r.take(len)?)
            .map_err(|_| corrupt(format!("keyword {i} is not UTF-8")))?;
        if vocab.intern(word).index() != i {
            return Err(corrupt(format!("duplicate keyword `{word}`")));
        }
    }
    let index = if kind == KIND_TREE {
        let mut by_kw = r.lists(vocab_len)?;
        let lists = (0..vocab_len as u32)
            .map(|k| by_kw.remove(&KeywordId(k)).unwrap_or_default())
            .collect();
        StoredIndex::Tree(TreeIndex::from_parts(vocab, lists, node_count))
    } else {
        let n = r.count(16)?;
        let mut components = Vec::with_capacity(n);
        for _ in 0..n {
            let root = r.u32()?;
            let occurrence_count = r.u32()?;
            let m = r.count(4)?;
            let members = r.u32s(m)?;
            let lists = r.lists(vocab_len)?;
            components.push(Component {
                root,
                occurrence_count,
                members,
                lists,
            });
        }
        let m = r.count(12)?;
        let mut entries = Vec::with_capacity(m);
        for _ in 0..m {
            let e = RcpmEntry {
                dummy: r.u32()?,
                component: r.u32()?,
                offset: r.u32()?,
            };
            let consistent = components
                .get(e.component as usize)
                .and_then(|c| c.root.checked_add(e.offset))
                == Some(e.dummy);
            if !consistent || e.dummy == 0 || e.dummy > node_count {
                return Err(corrupt(format!("bad pointer-map entry {e:?}")));
            }
            if entries
                .last()
                .is_some_and(|p: &RcpmEntry| p.dummy >= e.dummy)
            {
                return Err(corrupt(String::from(
                    "pointer-map entries not strictly ascending",
                )));
            }
            entries.push(e);
        }
        let roots = components.iter().map(|c| c.root).collect();
        StoredIndex::Cluster(IdCluster::from_parts(
            vocab,
            components,
            Rcpm::from_entries(entries, node_count, roots),
            node_count,
        ))
    };
    if r.pos != bytes.len() {
        return Err(corrupt(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(index)
}

/// Writes atomically (temporary file in the target directory, then rename).
/// Returns the number of bytes written.
pub fn save(index: &StoredIndex, path: &Path) -> Result<u64, StoreError> {
    let bytes = encode(index);
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| StoreError::Io(e.error))?;
    Ok(bytes.len() as u64)
}

pub fn load(path: &Path) -> Result<StoredIndex, StoreError> {
    let bytes = std::fs::read(path)?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::{build_idcluster, compress};
    use crate::doc::parse_document;
    use crate::idlist::build_tree_index;

    fn both(xml: &str) -> (StoredIndex, StoredIndex) {
        let doc = parse_document(xml.as_bytes()).unwrap();
        (
            StoredIndex::Tree(build_tree_index(&doc)),
            StoredIndex::Cluster(build_idcluster(&compress(&doc))),
        )
    }

    #[test]
    fn round_trip_and_size_formula() {
        let (t, c) = both("<a><b>w x</b><b>w x</b><c k=\"v\">w</c></a>");
        for idx in [t, c] {
            let bytes = encode(&idx);
            assert_eq!(bytes.len() as u64, encoded_len(&idx));
            assert_eq!(decode(&bytes).unwrap(), idx);
        }
    }

    #[test]
    fn redundancy_free_cluster_costs_one_component_header() {
        let doc = parse_document(b"<a><b>w x</b><c k=\"v\">y</c></a>").unwrap();
        let tree = encode(&StoredIndex::Tree(build_tree_index(&doc)));
        let cluster = encode(&StoredIndex::Cluster(build_idcluster(&compress(&doc))));
        // component count, root, count, member count, one member ID per node, RCPM count
        assert_eq!(cluster.len(), tree.len() + 4 + 12 + 4 * doc.len() + 4);
    }

    #[test]
    fn save_reports_file_size() {
        let (_, c) = both("<a><b>w</b><b>w</b></a>");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.idx");
        let n = save(&c, &path).unwrap();
        assert_eq!(n, std::fs::metadata(&path).unwrap().len());
        assert_eq!(load(&path).unwrap(), c);
        assert!(matches!(
            load(&dir.path().join("missing")),
            Err(StoreError::Io(_))
        ));
    }

    #[test]
    fn rejects_bad_magic_version_and_truncation() {
        let (t, _) = both("<a>w</a>");
        let bytes = encode(&t);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(StoreError::BadMagic)));
        let mut bad = bytes.clone();
        bad[4..8].copy_from_slice(&99u32.to_le_bytes());
        assert!(matches!(
            decode(&bad),
            Err(StoreError::UnsupportedVersion { found: 99, .. })
        ));
        let mut bad = bytes.clone();
        bad[8..12].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(decode(&bad), Err(StoreError::UnknownKind(7))));
        for cut in 4..bytes.len() {
            assert!(
                matches!(decode(&bytes[..cut]), Err(StoreError::Corrupt(_))),
                "cut at {cut}"
            );
        }
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode(&long), Err(StoreError::Corrupt(_))));
    }
}
