mod common;

use common::{corner, flipped};
use hafvsd::model::{
    classify_vertex, s_components_at, CoreError, SSign, SceneDocument, VertexKind, SCHEMA_VERSION,
};
use hafvsd::{build_scene, corpus, parse_scene};

#[test]
fn fig3_classification() {
    let s = corpus::scene("fig3");
    assert_eq!(s.points.len(), 7);
    assert_eq!(s.components.len(), 3);
    assert_eq!(s.transversal_saddles(), vec!["3", "4"]);
    let mut nodes = s.nodes();
    nodes.sort();
    assert_eq!(nodes, vec!["2", "5", "6", "7"]);
    assert_eq!(s.class("1").unwrap().kind, VertexKind::TangentialSaddle);
}

#[test]
fn exceptional_scene() {
    let s = corpus::scene("exceptional");
    assert!(s.edges.is_empty());
    assert_eq!(s.points.len(), 2);
    assert!(s.is_exceptional());
}

#[test]
fn dangling_component() {
    let mut doc = corpus::document("fig3");
    doc.edges[0].components = vec!["D9".into()];
    assert!(matches!(build_scene(&doc), Err(CoreError::DanglingReference { .. })));
}

#[test]
fn duplicate_and_malformed_ids() {
    let mut doc = corpus::document("fig3");
    let again = doc.points[0].clone();
    doc.points.push(again);
    assert!(matches!(build_scene(&doc), Err(CoreError::DuplicateId(_))));

    let text = corpus::text("fig3").replace("\"e23\"", "\"e@23\"");
    assert!(parse_scene(&text).is_err());
}

#[test]
fn schema_is_enforced() {
    let mut doc = corpus::document("fig3");
    doc.schema = SCHEMA_VERSION + 1;
    assert!(matches!(build_scene(&doc), Err(CoreError::SchemaViolation(_))));
    let text = corpus::text("fig3").replacen('{', "{\"colour\": 1,", 1);
    assert!(matches!(SceneDocument::from_json(&text), Err(CoreError::SchemaViolation(_))));
}

#[test]
fn classes() {
    let s = corpus::scene("fig3");
    // All three eigenvalues negative.
    let c = classify_vertex(&s, "5").unwrap();
    assert_eq!(c.kind, VertexKind::DNodeAttractor);
    assert!(!c.is_3d_saddle);

    // Trace point with W² transversal: stable in fig3, unstable once flipped.
    let c = classify_vertex(&s, "4").unwrap();
    assert_eq!(c.kind, VertexKind::TransversalSaddle);
    assert_eq!(c.w2_stable(), Some(true));
    let f = build_scene(&flipped(&corpus::document("fig3"))).unwrap();
    let c = classify_vertex(&f, "4").unwrap();
    assert_eq!(c.kind, VertexKind::TransversalSaddle);
    assert_eq!(c.w2_stable(), Some(false));

    // A corner whose W² is one of its components.
    let k = corner((-1, 1), (1, 1), (2, 1));
    let s = build_scene(&k.doc).unwrap();
    assert_eq!(classify_vertex(&s, k.point).unwrap().kind, VertexKind::TangentialSaddle);
}

#[test]
fn s_component_counts() {
    let s = corpus::scene("fig3");
    let signs = |p: &str| s_components_at(&s, p).into_iter().map(|c| c.sign).collect::<Vec<_>>();
    assert_eq!(signs("3").len(), 2);
    assert!(signs("3").contains(&SSign::Plus) && signs("3").contains(&SSign::Minus));
    assert_eq!(signs("5"), vec![SSign::Only]);
    let k = corner((-1, 1), (1, 1), (2, 1));
    let s = build_scene(&k.doc).unwrap();
    assert_eq!(s_components_at(&s, k.point).len(), 1);
}

#[test]
fn documents_round_trip() {
    for name in corpus::NAMES {
        let doc = corpus::document(name);
        let s = build_scene(&doc).unwrap();
        let back = s.to_document();
        assert_eq!(build_scene(&back).unwrap(), s, "{name}");
        let again = SceneDocument::from_json(&back.to_json()).unwrap();
        assert_eq!(again, back, "{name}");
    }
}

#[test]
fn edge_ends_follow_declared_axes() {
    let s = corpus::scene("fig3");
    let (_, end) = s.end_at("u2", "4").unwrap();
    assert_eq!(end.axis.as_deref(), Some("u"));
    assert_eq!(end.role, hafvsd::model::EndRole::W1);
    assert_eq!(s.out_edges("6").len(), 5);
    assert_eq!(s.in_edges("5").len(), 3);
}
