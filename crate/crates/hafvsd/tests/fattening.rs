use std::collections::BTreeSet;

use hafvsd::fattening::{
    build_distinguished, check_good_saturations, classify_fattening_frontier, disjoint_family_report,
    enumerate_free_doors, extend_support, lid_id, stain_itineraries, Association, FattenError, Flow, Generator,
    PieceKind, PointType, Slot, StopLabel,
};
use hafvsd::model::{Injection, InjectionKind, SceneDocument};
use hafvsd::{build_scene, corpus, Scene};

#[test]
fn exceptional_model() {
    let s = corpus::scene("exceptional");
    let m = build_distinguished(&s).unwrap();
    assert_eq!(m.chimneys.len(), 2);
    assert!(m.tubes.is_empty());
    assert!(m.distinguished);
    let free = enumerate_free_doors(&m).unwrap();
    assert_eq!(free.len(), 2);
    assert!(free.iter().all(|d| d.association == Association::Face("G".into())));
    assert_eq!(extend_support(&m).unwrap().discs.len(), 2);
    assert!(disjoint_family_report(&m).unwrap().passed);
}

#[test]
fn fig3_counts() {
    let s = corpus::scene("fig3");
    let m = build_distinguished(&s).unwrap();
    assert_eq!(m.chimneys.len(), 9);
    assert_eq!(m.tubes.len(), s.edges.len());
    assert!(m.predistinguished && m.distinguished);
    let free = enumerate_free_doors(&m).unwrap();
    assert_eq!(free.len(), 2 * s.faces.len() + 4);
    let saddle_doors = free.iter().filter(|d| matches!(d.association, Association::Saddle(_))).count();
    assert_eq!(saddle_doors, 4);
}

#[test]
fn w2_edges_end_in_equal_base_pairs() {
    let s = corpus::scene("fig3");
    let m = build_distinguished(&s).unwrap();
    for p in s.transversal_saddles() {
        for e in s.edges_with_role(p, hafvsd::model::EndRole::W2) {
            let t = &m.tubes[&e.id];
            let at_p = if e.alpha == p { &t.out_doors } else { &t.in_doors };
            assert_eq!(at_p.len(), 2, "{}", e.id);
            let bases: BTreeSet<_> = at_p.iter().map(|d| m.doors[d].base.clone()).collect();
            assert_eq!(bases.len(), 1);
            assert!(bases.iter().next().unwrap().is_some());
        }
    }
}

/// Edges meeting the closure of `ν`, counted from edge ends.
fn edges_meeting(s: &Scene, nu: &str) -> usize {
    s.edges
        .iter()
        .map(|e| {
            [hafvsd::model::End::Alpha, hafvsd::model::End::Omega]
                .iter()
                .filter(|&&end| s.edge_end(&e.id, end).unwrap().s_components.iter().any(|x| x == nu))
                .count()
        })
        .sum()
}

#[test]
fn unfree_doors_match_edges() {
    for name in corpus::VALID {
        let s = corpus::scene(name);
        let m = build_distinguished(&s).unwrap();
        for nu in m.chimneys.keys() {
            assert_eq!(m.unfree_doors_at(nu), edges_meeting(&s, nu), "{name} {nu}");
        }
    }
}

#[test]
fn not_distinguished_without_validation() {
    let s = corpus::scene("resonant_chain");
    assert!(matches!(build_distinguished(&s), Err(FattenError::ValidationFailed(_))));
}

#[test]
fn frontier_types() {
    let s = corpus::scene("fig3");
    let m = build_distinguished(&s).unwrap();
    let pieces = classify_fattening_frontier(&m).unwrap();
    let set = |xs: &[PointType]| xs.iter().copied().collect::<BTreeSet<_>>();

    let mut saddle_in = 0;
    for p in pieces.iter().filter(|p| p.kind == PieceKind::FreeDoor) {
        let door = &m.doors[&p.id];
        let saddle = s.class(&m.chimneys[&door.chimney].point).unwrap().is_saddle();
        if saddle && door.direction == Flow::In {
            assert_eq!(p.types().collect::<BTreeSet<_>>(), set(&[PointType::EI, PointType::ET, PointType::TI, PointType::TT]), "{}", p.id);
            saddle_in += 1;
        }
    }
    assert!(saddle_in > 0);

    for (nu, c) in &m.chimneys {
        let class = s.class(&c.point).unwrap();
        if !class.is_node() {
            continue;
        }
        let lid = pieces.iter().find(|p| p.id == lid_id(nu)).unwrap();
        if class.is_3d_saddle {
            let rail: BTreeSet<_> = lid.segments.iter().filter(|g| g.part != hafvsd::fattening::Part::Interior).map(|g| g.ty).collect();
            assert!(rail == set(&[PointType::TE]) || rail == set(&[PointType::ET]), "{nu}: {rail:?}");
        } else if class.kind == hafvsd::model::VertexKind::DNodeRepeller {
            let interior = lid.segments.iter().find(|g| g.part == hafvsd::fattening::Part::Interior).unwrap();
            assert_eq!(interior.ty, PointType::IE);
        }
    }
}

#[test]
fn fixed_marks_have_disjoint_jambs() {
    let s = corpus::scene("fig3");
    let m = build_distinguished(&s).unwrap();
    let its = stain_itineraries(&m).unwrap();
    let fixed: Vec<_> = its.iter().filter(|i| i.generator.is_fixed()).collect();
    assert_eq!(fixed.len(), 4);
    for it in &fixed {
        // Every Π at 3 and 4 is one edge to a node, so one stop.
        assert_eq!(it.stops.len(), 1, "{}", it.id);
        assert_eq!(it.stops[0].label, StopLabel::WellPositioned);
    }
    for (k, a) in fixed.iter().enumerate() {
        for b in &fixed[k + 1..] {
            assert!(a.jamb_slots().is_disjoint(&b.jamb_slots()));
        }
    }
}

#[test]
fn out_door_jambs_run_along_their_face() {
    let s = corpus::scene("fig3");
    let m = build_distinguished(&s).unwrap();
    let its = stain_itineraries(&m).unwrap();
    let mut seen = 0;
    for it in &its {
        let Generator::FreeDoorJamb { door, .. } = &it.generator else { continue };
        let d = &m.doors[door];
        let Association::Face(f) = &d.association else { continue };
        if d.direction != Flow::Out {
            continue;
        }
        let face = s.face(f).unwrap();
        assert_eq!(it.terminal, face.omega);
        let last = it.stops.last().unwrap();
        assert_eq!(last.label, StopLabel::UnfixedDoorjamb);
        assert!(matches!(&last.slot, Slot::Jamb(j) if j.starts_with(&format!("J:{f}/"))));
        assert!(it.stops[..it.stops.len() - 1].iter().all(|x| x.label == StopLabel::Handrail));
        seen += 1;
    }
    assert_eq!(seen, 2 * s.faces.len());
}

#[test]
fn good_saturations_on_corpus() {
    for name in corpus::VALID {
        let s = corpus::scene(name);
        let m = build_distinguished(&s).unwrap();
        let r = check_good_saturations(&m).unwrap();
        assert!(r.passed, "{name}: {:?}", r.violations);
    }
    let s = corpus::scene("gsat_conflict");
    let r = check_good_saturations(&build_distinguished(&s).unwrap()).unwrap();
    assert!(r.has_rule("gsat.gsfm"));
}

fn with_injection(generators: &[String], door: &str, kind: InjectionKind) -> SceneDocument {
    let mut doc = corpus::document("fig3");
    doc.injections.push(Injection { kind, generators: generators.to_vec(), door: Some(door.into()) });
    doc
}

fn jamb_generators_by_face(m: &hafvsd::fattening::FatteningModel) -> Vec<(String, String)> {
    stain_itineraries(m)
        .unwrap()
        .into_iter()
        .filter_map(|it| match &it.generator {
            Generator::FreeDoorJamb { door, .. } => m.doors[door].face().map(|f| (f.to_string(), it.id.clone())),
            _ => None,
        })
        .collect()
}

#[test]
fn injected_free_door_conflict() {
    let s = corpus::scene("fig3");
    let m = build_distinguished(&s).unwrap();
    let gens = jamb_generators_by_face(&m);
    let a = gens.iter().find(|(f, _)| f == "F1").unwrap().1.clone();
    let b = gens.iter().find(|(f, _)| f == "R3").unwrap().1.clone();
    let doc = with_injection(&[a, b], "U:a3@6", InjectionKind::SharedJamb);
    let s = build_scene(&doc).unwrap();
    let r = check_good_saturations(&build_distinguished(&s).unwrap()).unwrap();
    assert!(r.has_rule("gsat.gsfd"), "{:?}", r.violations);
    assert!(!r.has_rule("gsat.gsfm"));
}

#[test]
fn injected_mark_and_door_conflict() {
    let s = corpus::scene("fig3");
    let m = build_distinguished(&s).unwrap();
    let b = jamb_generators_by_face(&m).into_iter().find(|(f, _)| f == "R1").unwrap().1;
    let doc = with_injection(&["fixed:3:e23".into(), b], "U:a3@6", InjectionKind::SharedJamb);
    let s = build_scene(&doc).unwrap();
    let r = check_good_saturations(&build_distinguished(&s).unwrap()).unwrap();
    assert!(r.has_rule("gsat.gsfmfd"), "{:?}", r.violations);
}

#[test]
fn injected_contact_is_a_note_and_unknown_names_fail() {
    let doc = with_injection(&["fixed:3:e23".into(), "fixed:4:s1".into()], "U:a3@6", InjectionKind::FreeDoorContact);
    let s = build_scene(&doc).unwrap();
    let r = check_good_saturations(&build_distinguished(&s).unwrap()).unwrap();
    assert!(r.passed);
    assert!(r.violations.iter().any(|v| v.rule == "gsat.shared-door"));

    let doc = with_injection(&["fixed:9:zz".into()], "U:nope@6", InjectionKind::SharedJamb);
    let s = build_scene(&doc).unwrap();
    let r = check_good_saturations(&build_distinguished(&s).unwrap()).unwrap();
    assert_eq!(r.errors().filter(|v| v.rule == "gsat.injection").count(), 2);
}

#[test]
fn extended_support_fig3() {
    let s = corpus::scene("fig3");
    let m = build_distinguished(&s).unwrap();
    let r = extend_support(&m).unwrap();
    assert_eq!(r.discs.len(), 6);
    assert_eq!(r.absorbed.len(), s.faces.len());
    assert_eq!(r.absorbed_doors, 2 * s.faces.len());
    let points: Vec<&str> = r.discs.iter().map(|d| d.point.as_str()).collect();
    assert_eq!(points, vec!["2", "3", "4", "5", "6", "7"]);
    for d in r.discs.iter().filter(|d| d.dim_w == 2) {
        assert_eq!(d.tt_points.len(), 4);
        assert!(d.segments.iter().filter(|g| g.part == hafvsd::fattening::Part::Line).all(|g| g.meets_i_p));
    }
}

#[test]
fn extension_needs_good_saturations() {
    let s = corpus::scene("gsat_conflict");
    let m = build_distinguished(&s).unwrap();
    assert!(matches!(extend_support(&m), Err(FattenError::GoodSaturationsRequired(_))));
    assert!(!disjoint_family_report(&m).unwrap().passed);
}

#[test]
fn disjoint_family() {
    let s = corpus::scene("fig3");
    let r = disjoint_family_report(&build_distinguished(&s).unwrap()).unwrap();
    assert!(r.passed, "{:?}", r.violations);
    // Π supports of 3 and 4 both close up at the repeller 6.
    assert!(r.violations.iter().any(|v| v.rule == "disjoint.closure"));
}
