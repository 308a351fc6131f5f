use std::ops::Deref;

use crate::doc::NodeId;
use crate::error::QueryError;

/// A validated keyword query: at least one keyword, none empty, duplicates removed
/// (a repeated keyword adds no constraint). Original order of first occurrence is kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    keywords: Vec<String>,
}

impl Query {
    pub fn new<I, S>(keywords: I) -> Result<Self, QueryError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out: Vec<String> = Vec::new();
        for kw in keywords {
            let kw = kw.as_ref();
            if kw.is_empty() {
                return Err(QueryError::EmptyKeyword);
            }
            if !out.iter().any(|k| k == kw) {
                out.push(kw.to_owned());
            }
        }
        if out.is_empty() {
            return Err(QueryError::NoKeywords);
        }
        Ok(Query { keywords: out })
    }

    /// Splits a query line at whitespace.
    pub fn parse(line: &str) -> Result<Self, QueryError> {
        Self::new(line.split_whitespace())
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl std::fmt::Display for Query {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.keywords.join(" "))
    }
}

/// Strictly ascending, duplicate-free list of original-document node IDs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ResultSet(Vec<NodeId>);

impl ResultSet {
    pub fn empty() -> Self {
        ResultSet(Vec::new())
    }

    /// Sorts and deduplicates.
    pub fn from_unsorted(mut ids: Vec<NodeId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        ResultSet(ids)
    }

    /// Wraps IDs that are already strictly ascending.
    pub fn from_sorted(ids: Vec<NodeId>) -> Self {
        debug_assert!(
            ids.windows(2).all(|w| w[0] < w[1]),
            "IDs not strictly ascending"
        );
        ResultSet(ids)
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<NodeId> {
        self.0
    }

    pub fn is_subset_of(&self, other: &ResultSet) -> bool {
        self.0.iter().all(|id| other.0.binary_search(id).is_ok())
    }
}

impl Deref for ResultSet {
    type Target = [NodeId];

    fn deref(&self) -> &[NodeId] {
        &self.0
    }
}

impl From<Vec<NodeId>> for ResultSet {
    fn from(ids: Vec<NodeId>) -> Self {
        ResultSet::from_unsorted(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_validation() {
        assert!(matches!(
            Query::new(Vec::<&str>::new()),
            Err(QueryError::NoKeywords)
        ));
        assert!(matches!(
            Query::new(["a", ""]),
            Err(QueryError::EmptyKeyword)
        ));
        let q = Query::new(["b", "a", "b"]).unwrap();
        assert_eq!(q.keywords(), ["b", "a"]);
        assert_eq!(Query::parse("  x\ty ").unwrap().keywords(), ["x", "y"]);
    }

    #[test]
    fn result_set_normalizes() {
        let r = ResultSet::from_unsorted(vec![12, 5, 12, 2]);
        assert_eq!(r.ids(), &[2, 5, 12]);
        assert!(ResultSet::from(vec![5]).is_subset_of(&r));
        assert!(!ResultSet::from(vec![4]).is_subset_of(&r));
    }
}
