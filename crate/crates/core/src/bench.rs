//! Benchmark harness: query classification, corpus scaling and timed runs of
//! every tree and DAG algorithm over a query set.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::dag::IdCluster;
use crate::dag_search::{dag_search, dag_search_traced};
use crate::doc::{parse_document, DocumentTree, NodeKind, TreeBuilder};
use crate::error::{Error, QueryError};
use crate::idlist::TreeIndex;
use crate::query::{Query, ResultSet};
use crate::search::{search, Algorithm, Semantics};
use crate::stats::{query_savings, saving, savings_report, KeywordSavings, QuerySavings};

/// How far compression reaches into a query's relevant nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryCategory {
    /// No node containing a query keyword was compressed.
    Cat1,
    /// Some keyword occurs in a nested component, but no common ancestor does.
    Cat2,
    /// Some nested component contains every keyword, so common ancestors were compressed.
    Cat3,
}

impl fmt::Display for QueryCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryCategory::Cat1 => "cat1",
            QueryCategory::Cat2 => "cat2",
            QueryCategory::Cat3 => "cat3",
        })
    }
}

pub fn classify_query(cluster: &IdCluster, query: &Query) -> QueryCategory {
    let Some(kws) = query
        .keywords()
        .iter()
        .map(|k| cluster.vocabulary().get(k))
        .collect::<Option<Vec<_>>>()
    else {
        return QueryCategory::Cat1;
    };
    let mut any = false;
    for comp in cluster.components().iter().skip(1) {
        let present = kws.iter().filter(|&&k| comp.list(k).is_some()).count();
        if present == kws.len() {
            return QueryCategory::Cat3;
        }
        any |= present > 0;
    }
    if any {
        QueryCategory::Cat2
    } else {
        QueryCategory::Cat1
    }
}

/// Keeps the root and its first `ceil(fraction * n)` element children, where
/// `n` is the number of element children of the root.
pub fn scale_corpus(doc: &DocumentTree, fraction: f64) -> Result<DocumentTree, Error> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} not in (0, 1]"
        )));
    }
    let root = DocumentTree::ROOT;
    let records: Vec<_> = doc
        .children(root)
        .filter(|&c| doc.node(c).kind == NodeKind::Element)
        .collect();
    let keep = ((fraction * records.len() as f64).ceil() as usize).min(records.len());
    // documents are numbered in pre-order, so the kept part is an ID prefix
    let cut = match keep {
        0 => doc
            .children(root)
            .take_while(|&c| doc.node(c).kind == NodeKind::Attribute)
            .last()
            .map_or(root + 1, |a| a + 1),
        k => doc.node(records[k - 1]).end,
    };

    let mut b = TreeBuilder::new();
    let mut open: Vec<u32> = Vec::new();
    for node in &doc.nodes()[..cut as usize - 1] {
        while open.last().is_some_and(|&end| end <= node.id) {
            open.pop();
            b.end_element().expect("balanced prefix");
        }
        let name = doc.vocabulary().resolve(node.label);
        match node.kind {
            NodeKind::Attribute => {
                b.attribute(name, &node.text)
                    .expect("attribute precedes children");
            }
            NodeKind::Element => {
                b.start_element(name).expect("single root");
                b.text(&node.text).expect("open element");
                open.push(node.end);
            }
        }
    }
    for _ in open {
        b.end_element().expect("balanced prefix");
    }
    Ok(b.finish().expect("non-empty prefix"))
}

/// Reads the XML at `input`, scales it with [`scale_corpus`] and writes the
/// result to `output`. Returns the number of bytes written.
pub fn scale_file(input: &Path, fraction: f64, output: &Path) -> Result<u64, Error> {
    let doc = parse_document(&std::fs::read(input)?)?;
    let xml = scale_corpus(&doc, fraction)?.to_xml();
    std::fs::write(output, &xml)?;
    Ok(xml.len() as u64)
}

/// Parses a query file: one query per line, keywords separated by
/// whitespace, `#` starts a comment, blank lines are skipped.
pub fn parse_queries(text: &str) -> Result<Vec<Query>, QueryError> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(Query::parse)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Tree,
    Dag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contender {
    pub backend: Backend,
    pub semantics: Semantics,
    pub algorithm: Algorithm,
}

impl Contender {
    pub fn name(&self) -> String {
        let prefix = match self.backend {
            Backend::Tree => "",
            Backend::Dag => "dag_",
        };
        let algo = match self.algorithm {
            Algorithm::Fwd => "fwd",
            Algorithm::Bwd => "bwd",
            Algorithm::BwdPlus => "bwd_plus",
        };
        format!("{prefix}{algo}_{}", self.semantics)
    }

    pub fn run(&self, tree: &TreeIndex, cluster: &IdCluster, query: &Query) -> ResultSet {
        match self.backend {
            Backend::Tree => search(tree, query, self.semantics, self.algorithm),
            Backend::Dag => dag_search(cluster, query, self.semantics, self.algorithm),
        }
    }
}

/// Every algorithm, tree and DAG variants.
pub fn all_contenders() -> Vec<Contender> {
    let mut out = Vec::new();
    for backend in [Backend::Tree, Backend::Dag] {
        for algorithm in [Algorithm::Fwd, Algorithm::Bwd, Algorithm::BwdPlus] {
            out.push(Contender {
                backend,
                semantics: Semantics::Slca,
                algorithm,
            });
        }
        for algorithm in [Algorithm::Fwd, Algorithm::BwdPlus] {
            out.push(Contender {
                backend,
                semantics: Semantics::Elca,
                algorithm,
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Timing {
    pub contender: Contender,
    pub mean: Duration,
    pub results: usize,
}

#[derive(Debug, Clone)]
pub struct QueryReport {
    pub query: Query,
    pub category: QueryCategory,
    pub timings: Vec<Timing>,
    pub slca_components_searched: usize,
    pub elca_components_searched: usize,
    pub savings: QuerySavings,
    /// Index savings of each distinct query keyword known to the document.
    pub keywords: Vec<KeywordSavings>,
}

impl QueryReport {
    pub fn timing(&self, c: Contender) -> Option<&Timing> {
        self.timings.iter().find(|t| t.contender == c)
    }

    fn components_searched(&self, c: Contender) -> usize {
        match (c.backend, c.semantics) {
            (Backend::Tree, _) => 0,
            (Backend::Dag, Semantics::Slca) => self.slca_components_searched,
            (Backend::Dag, Semantics::Elca) => self.elca_components_searched,
        }
    }

    /// List-entry saving summed over the query keywords.
    pub fn path_saving(&self) -> f64 {
        let t = self.keywords.iter().map(|k| k.tree_entries).sum();
        let c = self.keywords.iter().map(|k| k.cluster_entries).sum();
        saving(t, c)
    }

    /// Direct-occurrence saving summed over the query keywords.
    pub fn nodes_saving(&self) -> f64 {
        let t = self.keywords.iter().map(|k| k.tree_direct).sum();
        let c = self.keywords.iter().map(|k| k.cluster_direct).sum();
        saving(t, c)
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub runs: u32,
    pub queries: Vec<QueryReport>,
}

impl BenchReport {
    /// One CSV row per (query, contender).
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "query,category,algorithm,mean_us,results,components_searched,s_ca,s_elca,s_slca,s_nodes,s_path"
        )?;
        for r in &self.queries {
            for t in &r.timings {
                writeln!(
                    w,
                    "\"{}\",{},{},{:.3},{},{},{:.2},{:.2},{:.2},{:.2},{:.2}",
                    r.query.to_string().replace('"', "\"\""),
                    r.category,
                    t.contender.name(),
                    t.mean.as_secs_f64() * 1e6,
                    t.results,
                    r.components_searched(t.contender),
                    r.savings.s_ca(),
                    r.savings.s_elca(),
                    r.savings.s_slca(),
                    r.nodes_saving(),
                    r.path_saving()
                )?;
            }
        }
        w.flush()
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mean of {} warm runs", self.runs)?;
        for r in &self.queries {
            writeln!(
                f,
                "{} [{}] S_ca={:.1}% S_elca={:.1}% S_slca={:.1}% S_nodes={:.1}% S_path={:.1}%",
                r.query,
                r.category,
                r.savings.s_ca(),
                r.savings.s_elca(),
                r.savings.s_slca(),
                r.nodes_saving(),
                r.path_saving()
            )?;
            for t in &r.timings {
                write!(
                    f,
                    "  {:<18} {:>12.3} us  results={}",
                    t.contender.name(),
                    t.mean.as_secs_f64() * 1e6,
                    t.results
                )?;
                if t.contender.backend == Backend::Dag {
                    write!(f, " components={}", r.components_searched(t.contender))?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Mean wall time of `runs` calls after one warm-up call.
pub fn time_mean<T>(runs: u32, mut f: impl FnMut() -> T) -> (Duration, T) {
    let warm = f();
    let runs = runs.max(1);
    let start = Instant::now();
    for _ in 0..runs {
        std::hint::black_box(f());
    }
    (start.elapsed() / runs, warm)
}

/// Times every contender on every query. Result sets are compared before any
/// timing starts; a disagreement aborts with [`Error::Mismatch`].
pub fn run_bench(
    tree: &TreeIndex,
    cluster: &IdCluster,
    queries: &[Query],
    contenders: &[Contender],
    runs: u32,
) -> Result<BenchReport, Error> {
    let stats = savings_report(tree, cluster)?;
    let mut reports = Vec::with_capacity(queries.len());
    for query in queries {
        verify_agreement(tree, cluster, query, contenders)?;
        let timings = contenders
            .iter()
            .map(|&c| {
                let (mean, result) = time_mean(runs, || c.run(tree, cluster, query));
                Timing {
                    contender: c,
                    mean,
                    results: result.len(),
                }
            })
            .collect();
        let searched = |sem| {
            dag_search_traced(cluster, query, sem, Algorithm::Fwd)
                .cache
                .components_searched()
        };
        let mut words: Vec<&str> = query.keywords().iter().map(String::as_str).collect();
        words.sort_unstable();
        words.dedup();
        reports.push(QueryReport {
            query: query.clone(),
            category: classify_query(cluster, query),
            timings,
            slca_components_searched: searched(Semantics::Slca),
            elca_components_searched: searched(Semantics::Elca),
            savings: query_savings(tree, cluster, query),
            keywords: words
                .into_iter()
                .filter_map(|w| stats.keyword(w).cloned())
                .collect(),
        });
    }
    Ok(BenchReport {
        runs,
        queries: reports,
    })
}

fn verify_agreement(
    tree: &TreeIndex,
    cluster: &IdCluster,
    query: &Query,
    contenders: &[Contender],
) -> Result<(), Error> {
    for sem in [Semantics::Slca, Semantics::Elca] {
        let mut same = contenders.iter().filter(|c| c.semantics == sem);
        let Some(first) = same.next() else { continue };
        let expected = first.run(tree, cluster, query);
        for c in same {
            let got = c.run(tree, cluster, query);
            if got != expected {
                return Err(Error::Mismatch(format!(
                    "query '{query}': {} returned {} results, {} returned {}",
                    first.name(),
                    expected.len(),
                    c.name(),
                    got.len()
                )));
            }
        }
    }
    Ok(())
}
