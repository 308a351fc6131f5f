//! Synthetic documents: small random trees with injected duplicate subtrees
//! (for equivalence testing) and a record-oriented music-catalogue corpus
//! (for benchmarking).

use std::fmt::Write as _;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::doc::{DocumentTree, TreeBuilder};
use crate::query::Query;

#[derive(Debug, Clone)]
struct GenNode {
    label: &'static str,
    text: String,
    attrs: Vec<(&'static str, String)>,
    children: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct RandomTreeParams {
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Probability that a growth step copies an existing subtree instead of adding a leaf.
    pub dup_probability: f64,
}

impl Default for RandomTreeParams {
    fn default() -> Self {
        RandomTreeParams {
            min_nodes: 50,
            max_nodes: 500,
            dup_probability: 0.4,
        }
    }
}

const LABELS: [&str; 5] = ["a", "b", "c", "d", "e"];
const ATTRS: [&str; 2] = ["k", "m"];
const WORDS: [&str; 8] = ["w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7"];

fn skewed(rng: &mut impl Rng, n: usize, skew: f64) -> usize {
    let u: f64 = rng.random();
    ((u.powf(skew) * n as f64) as usize).min(n - 1)
}

fn random_text(rng: &mut impl Rng) -> String {
    let n = [0, 0, 1, 1, 1, 2, 3][rng.random_range(0..7)];
    (0..n)
        .map(|_| WORDS[skewed(rng, WORDS.len(), 1.6)])
        .collect::<Vec<_>>()
        .join(" ")
}

fn subtree_size(arena: &[GenNode], root: usize) -> usize {
    let mut stack = vec![root];
    let mut n = 0;
    while let Some(i) = stack.pop() {
        n += 1 + arena[i].attrs.len();
        stack.extend(&arena[i].children);
    }
    n
}

fn clone_subtree(arena: &mut Vec<GenNode>, root: usize) -> usize {
    let mut copy = arena[root].clone();
    let kids = std::mem::take(&mut copy.children);
    let idx = arena.len();
    arena.push(copy);
    for k in kids {
        let c = clone_subtree(arena, k);
        arena[idx].children.push(c);
    }
    idx
}

/// Random document of `min_nodes..=max_nodes` nodes (attributes included).
pub fn random_document(rng: &mut impl Rng, params: &RandomTreeParams) -> DocumentTree {
    let target = rng.random_range(params.min_nodes..=params.max_nodes);
    let mut arena = vec![GenNode {
        label: "r",
        text: String::new(),
        attrs: Vec::new(),
        children: Vec::new(),
    }];
    let mut size = 1;
    while size < target {
        let parent = rng.random_range(0..arena.len());
        if rng.random_bool(params.dup_probability) && arena.len() > 1 {
            let src = rng.random_range(1..arena.len());
            let n = subtree_size(&arena, src);
            if size + n <= params.max_nodes {
                let c = clone_subtree(&mut arena, src);
                arena[parent].children.push(c);
                size += n;
                continue;
            }
        }
        let mut node = GenNode {
            label: LABELS[skewed(rng, LABELS.len(), 1.3)],
            text: random_text(rng),
            attrs: Vec::new(),
            children: Vec::new(),
        };
        if rng.random_bool(0.15) && size + 2 <= params.max_nodes {
            node.attrs
                .push((ATTRS[rng.random_range(0..ATTRS.len())], random_text(rng)));
            size += 1;
        }
        arena.push(node);
        let idx = arena.len() - 1;
        arena[parent].children.push(idx);
        size += 1;
    }
    emit(&arena)
}

fn emit(arena: &[GenNode]) -> DocumentTree {
    enum Step {
        Open(usize),
        Close,
    }
    let mut b = TreeBuilder::new();
    let mut stack = vec![Step::Open(0)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Open(i) => {
                let n = &arena[i];
                b.start_element(n.label).unwrap();
                for (k, v) in &n.attrs {
                    b.attribute(k, v).unwrap();
                }
                b.text(&n.text).unwrap();
                stack.push(Step::Close);
                for &c in n.children.iter().rev() {
                    stack.push(Step::Open(c));
                }
            }
            Step::Close => {
                b.end_element().unwrap();
            }
        }
    }
    b.finish().unwrap()
}

/// Random query of 1..=4 keywords drawn from the keywords the random tree
/// generator uses (labels and text words), so most queries have results.
pub fn random_query(rng: &mut impl Rng) -> Query {
    let n = rng.random_range(1..=4);
    let kws: Vec<&str> = (0..n)
        .map(|_| {
            if rng.random_bool(0.2) {
                LABELS[rng.random_range(0..LABELS.len())]
            } else {
                WORDS[skewed(rng, WORDS.len(), 1.3)]
            }
        })
        .collect();
    Query::new(kws).expect("non-empty keywords")
}

/// Parameters of the record-oriented corpus.
#[derive(Debug, Clone)]
pub struct CorpusParams {
    /// Approximate output size in bytes.
    pub target_bytes: usize,
    /// Probability that a record's format, genre and artist blocks come from a
    /// small shared pool (and thus repeat verbatim) rather than being unique.
    pub dup_ratio: f64,
    /// Exponent of the word-frequency skew; larger means more skewed.
    pub skew: f64,
    pub seed: u64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            target_bytes: 1 << 20,
            dup_ratio: 0.5,
            skew: 2.0,
            seed: 7,
        }
    }
}

const FORMAT_NAMES: [&str; 4] = ["Vinyl", "CD", "Cassette", "File"];
const DESCRIPTIONS: [&str; 8] = [
    "7\"",
    "12\"",
    "45 RPM",
    "33 ⅓ RPM",
    "LP",
    "Single",
    "Album",
    "EP",
];
const GENRES: [&str; 6] = [
    "Electronic",
    "Rock",
    "Jazz",
    "Pop",
    "Funk / Soul",
    "Hip Hop",
];
const STYLES: [&str; 8] = [
    "House", "Techno", "Ambient", "Disco", "Punk", "Soul", "Trance", "Dub",
];
const COUNTRIES: [&str; 6] = ["UK", "US", "Germany", "France", "Japan", "Italy"];
const TITLE_WORDS: [&str; 16] = [
    "love", "night", "dance", "blue", "dream", "the", "of", "city", "sound", "fire", "heart",
    "remix", "light", "time", "mix", "edit",
];

fn format_block(rng: &mut impl Rng, unique: Option<usize>, skew: f64) -> String {
    let name = FORMAT_NAMES[skewed(rng, FORMAT_NAMES.len(), skew)];
    let mut s = String::new();
    match unique {
        Some(u) => {
            let _ = write!(
                s,
                "<formats><format name=\"{name}\" qty=\"{}\" text=\"batch-{u}\">",
                rng.random_range(1..4)
            );
        }
        None => {
            let _ = write!(s, "<formats><format name=\"{name}\" qty=\"1\">");
        }
    }
    s.push_str("<descriptions>");
    let n = rng.random_range(1..=3);
    for _ in 0..n {
        let d = DESCRIPTIONS[skewed(rng, DESCRIPTIONS.len(), skew)];
        let _ = write!(s, "<description>{}</description>", d.replace('"', "&quot;"));
    }
    s.push_str("</descriptions></format></formats>");
    s
}

fn genre_block(rng: &mut impl Rng, skew: f64) -> String {
    let mut s = String::from("<genres>");
    let _ = write!(
        s,
        "<genre>{}</genre>",
        GENRES[skewed(rng, GENRES.len(), skew)]
    );
    s.push_str("</genres><styles>");
    for _ in 0..rng.random_range(1..=2) {
        let _ = write!(
            s,
            "<style>{}</style>",
            STYLES[skewed(rng, STYLES.len(), skew)]
        );
    }
    s.push_str("</styles>");
    s
}

fn artist_block(rng: &mut impl Rng, id: usize, skew: f64) -> String {
    let w1 = TITLE_WORDS[skewed(rng, TITLE_WORDS.len(), skew)];
    format!("<artists><artist><id>{id}</id><name>DJ {w1} a{id}</name><role/></artist></artists>")
}

/// Generates a `<releases>` document of roughly `target_bytes` bytes.
pub fn generate_corpus(params: &CorpusParams) -> String {
    let mut rng = StdRng::seed_from_u64(params.seed);
    let skew = params.skew;
    let formats: Vec<String> = (0..12)
        .map(|_| format_block(&mut rng, None, skew))
        .collect();
    let genres: Vec<String> = (0..10).map(|_| genre_block(&mut rng, skew)).collect();
    let artists: Vec<String> = (0..50).map(|i| artist_block(&mut rng, i, skew)).collect();

    let mut out = String::with_capacity(params.target_bytes + 4096);
    out.push_str("<releases>\n");
    let mut n = 0usize;
    while out.len() < params.target_bytes {
        n += 1;
        let _ = write!(out, "<release id=\"r{n}\" status=\"Accepted\">");
        let _ = write!(
            out,
            "<images><image height=\"600\" type=\"primary\" uri=\"http://img.example/R-{n}.jpg\" width=\"600\"/></images>"
        );
        if rng.random_bool(params.dup_ratio) {
            out.push_str(&artists[skewed(&mut rng, artists.len(), skew)]);
        } else {
            let a = artist_block(&mut rng, 1000 + n, skew);
            out.push_str(&a);
        }
        out.push_str("<title>");
        for i in 0..rng.random_range(1..=4) {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(TITLE_WORDS[skewed(&mut rng, TITLE_WORDS.len(), skew)]);
        }
        let _ = write!(out, " t{n}</title>");
        let _ = write!(
            out,
            "<labels><label catno=\"CAT-{n}\" name=\"Label {}\"/></labels>",
            rng.random_range(0..200)
        );
        if rng.random_bool(params.dup_ratio) {
            out.push_str(&formats[skewed(&mut rng, formats.len(), skew)]);
        } else {
            let f = format_block(&mut rng, Some(n), skew);
            out.push_str(&f);
        }
        if rng.random_bool(params.dup_ratio) {
            out.push_str(&genres[skewed(&mut rng, genres.len(), skew)]);
        } else {
            let g = genre_block(&mut rng, skew);
            let _ = write!(out, "<notes>n{n}</notes>{g}");
        }
        let _ = write!(
            out,
            "<country>{}</country><released>{}</released>",
            COUNTRIES[skewed(&mut rng, COUNTRIES.len(), skew)],
            1960 + rng.random_range(0..60)
        );
        out.push_str("<tracklist>");
        for t in 0..rng.random_range(1..=4) {
            let _ = write!(
                out,
                "<track><position>{}</position><title>{} {}</title><duration>{}:{:02}</duration></track>",
                ["A1", "A2", "B1", "B2"][t],
                TITLE_WORDS[skewed(&mut rng, TITLE_WORDS.len(), skew)],
                TITLE_WORDS[skewed(&mut rng, TITLE_WORDS.len(), skew)],
                rng.random_range(2..9),
                rng.random_range(0..60)
            );
        }
        out.push_str("</tracklist></release>\n");
    }
    out.push_str("</releases>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doc::parse_document;

    #[test]
    fn random_documents_respect_size_bounds() {
        let mut rng = StdRng::seed_from_u64(1);
        let params = RandomTreeParams::default();
        for _ in 0..20 {
            let doc = random_document(&mut rng, &params);
            assert!(
                doc.len() >= params.min_nodes && doc.len() <= params.max_nodes,
                "{}",
                doc.len()
            );
        }
    }

    #[test]
    fn corpus_parses_and_is_deterministic() {
        let params = CorpusParams {
            target_bytes: 20_000,
            ..Default::default()
        };
        let a = generate_corpus(&params);
        assert_eq!(a, generate_corpus(&params));
        assert!(a.len() >= 20_000);
        let doc = parse_document(a.as_bytes()).unwrap();
        assert!(doc.len() > 100);
        assert!(doc.vocabulary().get("7\"").is_some());
    }
}
