mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use common::brute_length;
use hafvsd::generate::random_scene;
use hafvsd::graph::{
    edge_complement, face_limits, filtration, find_cycle, length, lengths, s_leq, Subgraph,
};
use hafvsd::model::SceneDocument;
use hafvsd::{build_scene, corpus};

/// fig3 cut down to the chain `4 → 1 → 5`.
fn chain() -> SceneDocument {
    let mut doc = corpus::document("fig3");
    doc.points.retain(|p| ["4", "1", "5"].contains(&p.id.as_str()));
    doc.edges.retain(|e| ["u1", "t1"].contains(&e.id.as_str()));
    doc.faces.clear();
    doc
}

#[test]
fn lengths_match_brute_force() {
    let mut docs: Vec<SceneDocument> = corpus::VALID.iter().map(|n| corpus::document(n)).collect();
    docs.extend((0..50).map(random_scene));
    for doc in docs {
        let s = build_scene(&doc).unwrap();
        let len = lengths(&s).unwrap();
        for p in &doc.points {
            assert_eq!(len[&p.id], brute_length(&doc, &p.id), "{:?} {}", doc.name, p.id);
        }
    }
}

#[test]
fn length_examples() {
    let s = corpus::scene("fig3");
    assert_eq!(length(&s, "5").unwrap(), 0);
    assert_eq!(length(&s, "1").unwrap(), 1);
    // 6 → 4 → 1 → 5 is the longest walk down from the top repeller.
    assert_eq!(length(&s, "6").unwrap(), 3);
    assert!(length(&s, "nope").is_err());
}

#[test]
fn exceptional_filtration_has_one_term() {
    let f = filtration(&corpus::scene("exceptional")).unwrap();
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].vertices.len(), 2);
    assert!(f[0].edges.is_empty());
}

#[test]
fn chain_filtration_and_complement() {
    let s = build_scene(&chain()).unwrap();
    let f = filtration(&s).unwrap();
    let set = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<BTreeSet<_>>();
    assert_eq!(f.len(), 3);
    assert_eq!(f[0].vertices, set(&["5"]));
    assert!(f[0].edges.is_empty());
    assert_eq!((f[1].vertices.clone(), f[1].edges.clone()), (set(&["1", "5"]), set(&["t1"])));
    assert_eq!(f[2], Subgraph::full(&s));

    let rest = edge_complement(&s, &f[1]);
    assert_eq!(rest.edges, set(&["u1"]));
    assert_eq!(rest.vertices, set(&["4", "1"]));
}

#[test]
fn filtration_is_increasing() {
    for name in corpus::VALID {
        let s = corpus::scene(name);
        let f = filtration(&s).unwrap();
        for w in f.windows(2) {
            assert!(w[0].is_subgraph_of(&w[1]));
        }
        assert_eq!(f.last().unwrap(), &Subgraph::full(&s), "{name}");
        // New edges of Ωʲ start at length-j vertices.
        let len = lengths(&s).unwrap();
        for (j, w) in f.windows(2).enumerate() {
            for e in w[1].edges.difference(&w[0].edges) {
                assert_eq!(len[&s.edge(e).unwrap().alpha], j + 1);
            }
        }
    }
}

#[test]
fn complement_extremes() {
    let s = corpus::scene("fig3");
    assert!(edge_complement(&s, &Subgraph::full(&s)).is_empty());
    let all = edge_complement(&s, &Subgraph::default());
    assert_eq!(all.edges.len(), s.edges.len());
    assert_eq!(all.vertices.len(), 7);
}

/// Reachability between s-components by breadth-first search over edge germs.
fn reach(s: &hafvsd::Scene, nu: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::from([nu.to_string()]);
    let starts = s.edges.iter().filter(|e| s.edge_end(&e.id, hafvsd::model::End::Alpha).unwrap().s_components.iter().any(|x| x == nu));
    let mut queue: VecDeque<&str> = starts.map(|e| e.id.as_str()).collect();
    let mut seen = BTreeSet::new();
    while let Some(e) = queue.pop_front() {
        if !seen.insert(e) {
            continue;
        }
        out.extend(s.edge_end(e, hafvsd::model::End::Omega).unwrap().s_components.iter().cloned());
        let w = &s.edge(e).unwrap().omega;
        queue.extend(s.edges.iter().filter(|x| x.alpha == *w).map(|x| x.id.as_str()));
    }
    out
}

#[test]
fn s_order() {
    let s = corpus::scene("fig3");
    assert!(s_leq(&s, "4+", "4+").unwrap());
    assert!(s_leq(&s, "1", "5").unwrap());
    assert!(!s_leq(&s, "5", "7").unwrap());
    assert!(!s_leq(&s, "7", "6").unwrap());
    let comps: Vec<String> = s.all_s_components().into_iter().map(|c| c.id).collect();
    let table: BTreeMap<&str, BTreeSet<String>> = comps.iter().map(|c| (c.as_str(), reach(&s, c))).collect();
    for a in &comps {
        for b in &comps {
            assert_eq!(s_leq(&s, a, b).unwrap(), table[a.as_str()].contains(b), "{a} ≤ {b}");
        }
    }
}

#[test]
fn face_limit_examples() {
    let s = corpus::scene("fig3");
    let (a, w) = face_limits(&s, "F1").unwrap();
    assert_eq!((a.id.as_str(), w.id.as_str()), ("2", "5"));
    let (a, w) = face_limits(&corpus::scene("exceptional"), "G").unwrap();
    assert_eq!((a.id.as_str(), w.id.as_str()), ("r", "a"));
}

#[test]
fn cycles_are_found() {
    assert!(find_cycle(&corpus::scene("fig3")).is_none());
    let mut doc = chain();
    let mut back = doc.edges[0].clone();
    back.id = "back".into();
    std::mem::swap(&mut back.alpha, &mut back.omega);
    back.alpha = "5".into();
    back.omega = "4".into();
    back.alpha_direction = None;
    back.omega_direction = None;
    doc.edges.push(back);
    let s = build_scene(&doc).unwrap();
    let c = find_cycle(&s).expect("cycle");
    assert!(c.contains(&"back".to_string()));
    assert!(lengths(&s).is_err());
}
