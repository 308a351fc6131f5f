mod common;

use common::oracle::{ca_oracle, elca_oracle, slca_oracle};
use common::*;
use idcluster::dag_search::dag_search_traced;
use idcluster::search::{Algorithm, Semantics};
use idcluster::stats::savings_report;
use idcluster::{parse_document, Error, Query};

fn fixture() -> Indexed {
    index(parse_document(FIXTURE.as_bytes()).unwrap())
}

#[test]
fn golden_results() {
    let ix = fixture();
    let q = Query::parse("USA English").unwrap();
    assert_eq!(ca_oracle(&ix.doc, &q).ids(), [1, 2, 4, 5, 11, 12]);
    for a in SLCA_VARIANTS {
        assert_eq!(
            idcluster::search::search(&ix.tree, &q, Semantics::Slca, a).ids(),
            [5, 12]
        );
        assert_eq!(
            idcluster::dag_search::dag_search(&ix.cluster, &q, Semantics::Slca, a).ids(),
            [5, 12]
        );
    }
    for a in ELCA_VARIANTS {
        assert_eq!(
            idcluster::search::search(&ix.tree, &q, Semantics::Elca, a).ids(),
            [2, 5, 12]
        );
        assert_eq!(
            idcluster::dag_search::dag_search(&ix.cluster, &q, Semantics::Elca, a).ids(),
            [2, 5, 12]
        );
    }
    assert_eq!(check_query(&ix, &q), Ok(()));
}

#[test]
fn fixture_cluster_shape() {
    let ix = fixture();
    assert!(ix.cluster.components().len() >= 2);
    let e = ix.cluster.rcpm().entries();
    assert_eq!(e.len(), 2);
    assert_eq!((e[0].offset, e[1].offset), (0, 7));
    assert_eq!(e[0].component, e[1].component);
    for sem in [Semantics::Slca, Semantics::Elca] {
        let out = dag_search_traced(
            &ix.cluster,
            &Query::parse("USA English").unwrap(),
            sem,
            Algorithm::Fwd,
        );
        assert_eq!(out.cache.visits()[e[0].component as usize], 1);
    }
}

#[test]
fn fixture_structure() {
    let ix = fixture();
    assert_eq!(check_unfold(&ix), Ok(()));
    assert_eq!(check_minimal(&ix.dag), Ok(()));
    assert_eq!(check_components(&ix), Ok(()));
    assert_eq!(check_dummy_expansion(&ix), Ok(()));
    assert_eq!(check_entry_bound(&ix), Ok(()));
}

#[test]
fn fixture_savings_match_recount() {
    let ix = fixture();
    let s = savings_report(&ix.tree, &ix.cluster).unwrap();
    let tree: usize = ix.tree.lists().map(|(_, _, l)| l.len()).sum();
    let cluster: usize = ix
        .cluster
        .components()
        .iter()
        .flat_map(|c| c.lists.values())
        .map(|l| l.len())
        .sum();
    assert_eq!(s.tree_entries, tree as u64);
    assert_eq!(s.cluster_entries, cluster as u64);
    assert_eq!(s.rcpm_entries, 2);
    let usa = s.keyword("USA").unwrap();
    assert_eq!(
        (
            usa.tree_entries,
            usa.cluster_entries,
            usa.cluster_dummy_entries
        ),
        (7, 7, 2)
    );
    assert_eq!((usa.tree_direct, usa.cluster_direct), (3, 2));
}

#[test]
fn duplicated_record_savings() {
    // r(1) rec(2) a(3) b(4) rec(5) a(6) b(7); the two records fold into one component
    let ix = index(
        parse_document(b"<r><rec><a>x</a><b>y z</b></rec><rec><a>x</a><b>y z</b></rec></r>")
            .unwrap(),
    );
    let s = savings_report(&ix.tree, &ix.cluster).unwrap();
    // tree: r {1}, rec {1,2,5}, and five 5-entry lists
    assert_eq!(s.tree_entries, 1 + 3 + 5 * 5);
    // root component: r {1} plus {1, dummy 2, dummy 5} for the six other keywords;
    // record component: rec {2} plus five 2-entry lists
    assert_eq!(s.cluster_entries, (1 + 6 * 3) + (1 + 5 * 2));
    assert_eq!(s.cluster_dummy_entries, 12);
    let x = s.keyword("x").unwrap();
    assert_eq!(x.nodes_saving(), 50.0);
    assert_eq!(x.path_saving(), 0.0);
    assert_eq!(s.tree_bytes(Semantics::Slca), 29 * 8);
    assert_eq!(s.cluster_bytes(Semantics::Slca), 30 * 8 + 2 * 8);
    assert_eq!(s.cluster_bytes(Semantics::Elca), 30 * 12 + 2 * 8);
}

#[test]
fn redundancy_free_saves_nothing() {
    let ix = index(parse_document(b"<r><a>x</a><b>y</b></r>").unwrap());
    let s = savings_report(&ix.tree, &ix.cluster).unwrap();
    assert!(s
        .per_keyword
        .iter()
        .all(|k| k.path_saving() == 0.0 && k.nodes_saving() == 0.0));
    assert_eq!(s.rcpm_entries, 0);
}

#[test]
fn savings_reject_other_documents() {
    let a = index(parse_document(b"<r><a>x</a></r>").unwrap());
    let b = index(parse_document(b"<r><a>x</a><a>x</a></r>").unwrap());
    assert!(matches!(
        savings_report(&a.tree, &b.cluster),
        Err(Error::Mismatch(_))
    ));
}

#[test]
fn oracles_on_tiny_documents() {
    let q = Query::new(["w"]).unwrap();
    let single = parse_document(b"<a>w</a>").unwrap();
    assert_eq!(ca_oracle(&single, &q).ids(), [1]);
    assert_eq!(slca_oracle(&single, &q).ids(), [1]);
    assert_eq!(elca_oracle(&single, &q).ids(), [1]);

    let chain = parse_document(b"<a><b>w</b></a>").unwrap();
    assert_eq!(ca_oracle(&chain, &q).ids(), [1, 2]);
    assert_eq!(slca_oracle(&chain, &q).ids(), [2]);
    assert_eq!(elca_oracle(&chain, &q).ids(), [2]);

    let absent = Query::new(["w", "v"]).unwrap();
    assert!(ca_oracle(&single, &absent).is_empty());
    assert!(elca_oracle(&single, &absent).is_empty());
}
