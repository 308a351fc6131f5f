//! Keyword search over XML trees with SLCA and ELCA semantics.
//!
//! Two index flavours are provided:
//!
//! * [`TreeIndex`]: one inverted list per keyword over the whole document, searched
//!   with the set-intersection algorithms in [`search`].
//! * [`IdCluster`]: the document is first DAG-compressed so that repeated subtrees
//!   are stored once, then split into redundancy components. Each component is
//!   indexed and searched at most once per query and results are mapped back to
//!   original node IDs through the component pointer map ([`dag_search`]).
//!
//! Both produce identical result sets.

pub mod bench;
pub mod dag;
pub mod dag_search;
pub mod doc;
pub mod error;
pub mod idlist;
pub mod query;
pub mod search;
pub mod stats;
pub mod store;
pub mod synth;
pub mod vocab;

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
mod oracle;

pub use dag::{build_idcluster, compress, Component, CompressedDag, IdCluster, Rcpm};
pub use doc::{parse_document, tokenize, DocumentTree, NodeId, NodeKind, TreeBuilder};
pub use error::{Error, ParseError, QueryError, StoreError};
pub use idlist::{build_tree_index, IdList, TreeIndex};
pub use query::{Query, ResultSet};
pub use vocab::{KeywordId, Vocabulary};
