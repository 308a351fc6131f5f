use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use idcluster::bench::{all_contenders, parse_queries, run_bench, scale_corpus, scale_file};
use idcluster::dag_search::dag_search;
use idcluster::search::{search, Algorithm, Semantics};
use idcluster::stats::{savings_report, SavingsStats};
use idcluster::store::{load, save, StoredIndex};
use idcluster::synth::{generate_corpus, CorpusParams};
use idcluster::{build_idcluster, build_tree_index, compress, parse_document, DocumentTree, Query};

#[derive(Parser)]
#[command(
    name = "idcluster",
    version,
    about = "Keyword search over XML with redundancy-compressed indices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum IndexKind {
    Tree,
    Cluster,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from an XML file ("-" reads stdin) and save it.
    Index {
        xml: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "cluster")]
        kind: IndexKind,
    },
    /// Run a keyword query against a saved index; prints one ID per line.
    Query {
        index: PathBuf,
        /// slca or elca
        #[arg(long, default_value = "slca")]
        semantics: Semantics,
        /// fwd, bwd or bwd+
        #[arg(long, default_value = "fwd")]
        algo: Algorithm,
        #[arg(long, num_args = 1.., required = true)]
        keywords: Vec<String>,
    },
    /// Print index sizes and compression savings for an XML document.
    Stats {
        xml: PathBuf,
        /// Also list per-keyword savings.
        #[arg(long)]
        keywords: bool,
    },
    /// Time every algorithm on a query file.
    Bench {
        xml: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, default_value_t = 100)]
        runs: u32,
        /// Write per-query rows to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Use only this leading fraction of the root's records.
        #[arg(long)]
        scale: Option<f64>,
    },
    /// Keep the leading fraction of the root's records and write them to a new file.
    Scale {
        xml: PathBuf,
        #[arg(long)]
        fraction: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic record-oriented XML corpus to stdout.
    Generate {
        #[arg(long, default_value_t = 1 << 20)]
        bytes: usize,
        #[arg(long, default_value_t = 0.5)]
        dup_ratio: f64,
        #[arg(long, default_value_t = 2.0)]
        skew: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn read_doc(path: &Path) -> Result<DocumentTree> {
    let bytes = if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).context("reading stdin")?;
        buf
    } else {
        fs::read(path).with_context(|| format!("reading {}", path.display()))?
    };
    Ok(parse_document(&bytes)?)
}

fn print_stats(out: &mut impl Write, s: &SavingsStats, with_keywords: bool) -> io::Result<()> {
    writeln!(out, "components={}", s.components)?;
    writeln!(out, "rcpm_entries={}", s.rcpm_entries)?;
    writeln!(out, "tree_entries={}", s.tree_entries)?;
    writeln!(
        out,
        "cluster_entries={} (dummy {})",
        s.cluster_entries, s.cluster_dummy_entries
    )?;
    writeln!(out, "entry_saving={:.2}%", s.entry_saving())?;
    for sem in [Semantics::Slca, Semantics::Elca] {
        writeln!(
            out,
            "{sem}_bytes tree={} cluster={} (lists {} + rcpm {})",
            s.tree_bytes(sem),
            s.cluster_bytes(sem),
            s.cluster_list_bytes(sem),
            s.rcpm_bytes()
        )?;
    }
    if with_keywords {
        writeln!(out, "keyword\ttree\tcluster\tS_path\tS_nodes")?;
        for k in &s.per_keyword {
            writeln!(
                out,
                "{}\t{}\t{}\t{:.2}\t{:.2}",
                k.keyword,
                k.tree_entries,
                k.cluster_entries,
                k.path_saving(),
                k.nodes_saving()
            )?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Index {
            xml,
            out: dest,
            kind,
        } => {
            let doc = read_doc(&xml)?;
            let index = match kind {
                IndexKind::Tree => StoredIndex::Tree(build_tree_index(&doc)),
                IndexKind::Cluster => StoredIndex::Cluster(build_idcluster(&compress(&doc))),
            };
            let bytes =
                save(&index, &dest).with_context(|| format!("writing {}", dest.display()))?;
            writeln!(
                out,
                "wrote {} index ({} nodes, {bytes} bytes) to {}",
                index.kind_name(),
                doc.len(),
                dest.display()
            )?;
        }
        Command::Query {
            index,
            semantics,
            algo,
            keywords,
        } => {
            let query = Query::new(&keywords)?;
            let index = load(&index).with_context(|| format!("loading {}", index.display()))?;
            let results = match &index {
                StoredIndex::Tree(t) => search(t, &query, semantics, algo),
                StoredIndex::Cluster(c) => dag_search(c, &query, semantics, algo),
            };
            for id in results.ids() {
                writeln!(out, "{id}")?;
            }
            writeln!(out, "count={}", results.len())?;
        }
        Command::Stats { xml, keywords } => {
            let doc = read_doc(&xml)?;
            let tree = build_tree_index(&doc);
            let cluster = build_idcluster(&compress(&doc));
            writeln!(out, "nodes={}", doc.len())?;
            print_stats(&mut out, &savings_report(&tree, &cluster)?, keywords)?;
        }
        Command::Bench {
            xml,
            queries,
            runs,
            csv,
            scale,
        } => {
            let mut doc = read_doc(&xml)?;
            if let Some(f) = scale {
                doc = scale_corpus(&doc, f)?;
            }
            let text = fs::read_to_string(&queries)
                .with_context(|| format!("reading {}", queries.display()))?;
            let queries = parse_queries(&text)?;
            if queries.is_empty() {
                bail!("query file contains no queries");
            }
            let tree = build_tree_index(&doc);
            let cluster = build_idcluster(&compress(&doc));
            drop(doc);
            let report = run_bench(&tree, &cluster, &queries, &all_contenders(), runs)?;
            write!(out, "{report}")?;
            if let Some(path) = csv {
                let f = fs::File::create(&path)
                    .with_context(|| format!("creating {}", path.display()))?;
                report.write_csv(io::BufWriter::new(f))?;
            }
        }
        Command::Scale {
            xml,
            fraction,
            out: dest,
        } => {
            let bytes = scale_file(&xml, fraction, &dest)
                .with_context(|| format!("scaling {}", xml.display()))?;
            writeln!(out, "wrote {bytes} bytes to {}", dest.display())?;
        }
        Command::Generate {
            bytes,
            dup_ratio,
            skew,
            seed,
        } => {
            if !(0.0..=1.0).contains(&dup_ratio) {
                bail!("--dup-ratio must be within [0, 1]");
            }
            let xml = generate_corpus(&CorpusParams {
                target_bytes: bytes,
                dup_ratio,
                skew,
                seed,
            });
            out.write_all(xml.as_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
