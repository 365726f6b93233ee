//! Hypothesis checks and the structural consequences of the graph lemma.
//! Violations accumulate; nothing here fails early.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::{find_cycle, is_edge_path, repeller_attractor_path};
use crate::marks::find_resonances;
use crate::model::{CoreError, EdgeKind, End, EndRole, Restriction, Scene, Sign, VertexKind};
use crate::report::ValidationReport;
use crate::scalar::fmt_q;

fn has_zero_eigenvalue(scene: &Scene, p: &str) -> bool {
    scene.point(p).is_some_and(|pt| pt.directions.iter().any(|d| d.eigenvalue.sign() == 0))
}

pub fn check_hyperbolicity(scene: &Scene) -> ValidationReport {
    let mut r = ValidationReport::new();
    for p in &scene.points {
        for d in &p.directions {
            if d.eigenvalue.sign() == 0 {
                r.error("hyperbolicity.zero-eigenvalue", &[&p.id, &d.id], "eigenvalue with zero real part");
            }
        }
    }
    r
}

/// Local consistency of the declared data: classes, edge germs, sides.
pub fn check_structure(scene: &Scene) -> ValidationReport {
    let mut r = ValidationReport::new();
    for p in &scene.points {
        if has_zero_eigenvalue(scene, &p.id) {
            continue;
        }
        match scene.class(&p.id) {
            Err(e) => r.error("structure.class", &[&p.id], e.to_string()),
            Ok(c) => {
                if let (Some(decl), Some(der)) = (p.dim_w, c.dim_w) {
                    if decl != der {
                        r.error("structure.dim-w", &[&p.id], format!("declared dim_w {decl}, derived {der}"));
                    }
                } else if p.dim_w.is_some() && c.dim_w.is_none() {
                    r.error("structure.dim-w", &[&p.id], "tangential saddles carry no dim_w");
                }
            }
        }
    }
    for e in &scene.edges {
        if has_zero_eigenvalue(scene, &e.alpha) || has_zero_eigenvalue(scene, &e.omega) {
            continue;
        }
        for end in [End::Alpha, End::Omega] {
            let pid = e.endpoint(end);
            let ee = match scene.edge_end(&e.id, end) {
                Ok(x) => x,
                Err(CoreError::EdgeEnd { reason, .. }) if scene.class(pid).is_ok() => {
                    r.error("structure.edge-end", &[&e.id, pid], reason);
                    continue;
                }
                Err(_) => continue,
            };
            let declared = match end {
                End::Alpha => &e.alpha_direction,
                End::Omega => &e.omega_direction,
            };
            if let Some(d) = declared {
                if ee.axis.as_ref() != Some(d) {
                    r.error(
                        "structure.direction",
                        &[&e.id, pid],
                        format!("declared direction `{d}`, derived {:?}", ee.axis),
                    );
                }
            }
            let want: i8 = if end == End::Alpha { 1 } else { -1 };
            let pt = scene.point(pid).unwrap();
            let ok = match &ee.axis {
                Some(a) => pt.direction(a).unwrap().eigenvalue.sign() == want,
                None => {
                    let need = if want > 0 { Restriction::Repeller } else { Restriction::Attractor };
                    scene.restriction(pid, &e.components[0]).ok() == Some(need)
                }
            };
            if !ok {
                r.error("structure.orientation", &[&e.id, pid], "edge orientation disagrees with eigenvalue signs");
            }
        }
    }
    for p in scene.transversal_saddles() {
        let mut sides: Vec<Option<Sign>> = scene
            .edges_with_role(p, EndRole::W1)
            .iter()
            .map(|e| if e.alpha == p { e.side_at_alpha } else { e.side_at_omega })
            .collect();
        sides.sort();
        if sides.len() == 2 && sides[0] == sides[1] {
            r.error("structure.sides", &[p], "both W¹ edges declare the same side");
        }
    }
    r
}

pub fn check_acyclicity(scene: &Scene) -> ValidationReport {
    let mut r = ValidationReport::new();
    if let Some(cycle) = find_cycle(scene) {
        let ids: Vec<&str> = cycle.iter().map(String::as_str).collect();
        r.error("acyclicity.cycle", &ids, format!("directed cycle {}", cycle.join(" -> ")));
    }
    r
}

pub fn check_index_formula(scene: &Scene) -> ValidationReport {
    let mut r = ValidationReport::new();
    let n = scene.nodes().len() as i64;
    let s = scene.transversal_saddles().len() as i64;
    if n - s != 2 {
        r.error("index-formula", &[], format!("#N - #S_tr = {n} - {s} = {}, expected 2", n - s));
    }
    for (k, name) in [(VertexKind::DNodeAttractor, "attractor"), (VertexKind::DNodeRepeller, "repeller")] {
        if !scene.points.iter().any(|p| matches!(scene.class(&p.id), Ok(c) if c.kind == k)) {
            r.error("index-formula", &[], format!("no {name} node"));
        }
    }
    r
}

pub fn check_transversal_degree(scene: &Scene) -> ValidationReport {
    let mut r = ValidationReport::new();
    for p in &scene.points {
        let Ok(c) = scene.class(&p.id) else { continue };
        let outs = scene.out_edges(&p.id).len();
        let ins = scene.in_edges(&p.id).len();
        let w1 = scene.edges_with_role(&p.id, EndRole::W1);
        match c.kind {
            VertexKind::TransversalSaddle => {
                if outs != 2 || ins != 2 {
                    r.error("degree.transversal", &[&p.id], format!("in = {ins}, out = {outs}; expected 2 and 2"));
                }
                let w2 = scene.edges_with_role(&p.id, EndRole::W2);
                let w2_in = c.w2_stable() == Some(true);
                if w1.len() != 2 || w2.len() != 2 || w2.iter().any(|e| (e.omega == p.id) != w2_in) {
                    r.error("degree.transversal", &[&p.id], "edges do not split 2 + 2 along W¹ and W²");
                }
            }
            VertexKind::TangentialSaddle => {
                if w1.len() != 1 {
                    r.error("degree.tangential", &[&p.id], format!("{} edges along W¹, expected 1", w1.len()));
                }
            }
            VertexKind::DNodeAttractor => {
                if outs > 0 {
                    r.error("degree.attractor", &[&p.id], "an edge starts at an attractor");
                }
            }
            VertexKind::DNodeRepeller => {
                if ins > 0 {
                    r.error("degree.repeller", &[&p.id], "an edge ends at a repeller");
                }
            }
        }
    }
    r
}

pub fn check_morse_smale(scene: &Scene) -> ValidationReport {
    let mut r = ValidationReport::new();
    for e in scene.edges.iter().filter(|e| e.kind == EdgeKind::Trace) {
        let c = &e.components[0];
        let (Ok(a), Ok(b)) = (scene.restriction(&e.alpha, c), scene.restriction(&e.omega, c)) else { continue };
        let sa = a == Restriction::Saddle;
        let sb = b == Restriction::Saddle;
        if sa && sb {
            r.error("morse-smale.saddle-connection", &[&e.id], "trace edge joins two saddles of the restriction");
        } else if !sa && !sb {
            r.error("morse-smale.trace-endpoints", &[&e.id], "trace edge has no saddle endpoint");
        }
    }
    r
}

pub fn check_faces(scene: &Scene) -> ValidationReport {
    let mut r = ValidationReport::new();
    let exceptional_shape = scene.points.len() == 2 && scene.edges.is_empty();
    for f in &scene.faces {
        if f.exceptional {
            if !exceptional_shape || scene.faces.len() != 1 {
                r.error("faces.exceptional", &[&f.id], "exceptional face outside the two-vertex scene");
            }
            continue;
        }
        for (k, path) in f.boundary_paths.iter().enumerate() {
            let first = scene.edge(&path[0]).unwrap();
            let last = scene.edge(path.last().unwrap()).unwrap();
            if !is_edge_path(scene, path) || first.alpha != f.alpha || last.omega != f.omega {
                r.error("faces.path", &[&f.id], format!("boundary path {k} is not a path from `{}` to `{}`", f.alpha, f.omega));
            }
            for id in path {
                if !scene.edge(id).unwrap().components.contains(&f.component) {
                    r.error("faces.component", &[&f.id, id], format!("edge not contained in `{}`", f.component));
                }
            }
        }
        if f.boundary_paths[0] == f.boundary_paths[1] {
            r.error("faces.path", &[&f.id], "both boundary paths coincide");
        }
        for v in [&f.alpha, &f.omega] {
            if matches!(scene.restriction(v, &f.component), Ok(Restriction::Saddle)) {
                r.error("faces.endpoints", &[&f.id, v], "face limit is a saddle of the restriction");
            }
        }
    }
    if exceptional_shape {
        if !scene.faces.iter().any(|f| f.exceptional) {
            r.error("faces.exceptional", &[], "two-vertex scene without the exceptional face");
        }
        return r;
    }
    let mut count: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for f in scene.faces.iter().filter(|f| !f.exceptional) {
        for id in f.boundary_paths.iter().flatten() {
            *count.entry((id.as_str(), f.component.as_str())).or_default() += 1;
        }
    }
    for e in &scene.edges {
        let want = if e.kind == EdgeKind::Trace { 2 } else { 1 };
        for c in &e.components {
            let n = count.get(&(e.id.as_str(), c.as_str())).copied().unwrap_or(0);
            if n != want {
                r.error("faces.edge-count", &[&e.id, c], format!("occurs {n} times on faces of `{c}`, expected {want}"));
            }
        }
    }
    let euler = scene.points.len() as i64 - scene.edges.len() as i64 + scene.faces.len() as i64;
    if euler != 2 {
        r.error("faces.euler", &[], format!("V - E + F = {euler}, expected 2"));
    }
    r
}

pub fn check_resonance(scene: &Scene) -> ValidationReport {
    let mut r = ValidationReport::new();
    for chain in find_resonances(scene) {
        let ids: Vec<&str> = chain.path.iter().map(String::as_str).collect();
        let trace: Vec<String> = chain.rho_trace.iter().map(|q| format!("{}@{}", fmt_q(&q.value), q.component)).collect();
        r.error("resonance.chain", &ids, format!("s-resonant chain, rho trace [{}]", trace.join(", ")));
    }
    r
}

/// Every saddle lies on a repeller-to-attractor path.
pub fn check_paths(scene: &Scene) -> ValidationReport {
    let mut r = ValidationReport::new();
    if find_cycle(scene).is_some() {
        return r;
    }
    for p in &scene.points {
        if matches!(scene.class(&p.id), Ok(c) if c.is_saddle()) && repeller_attractor_path(scene, &p.id).is_none() {
            r.error("paths.repeller-attractor", &[&p.id], "no repeller-to-attractor path through this saddle");
        }
    }
    r
}

pub fn validate_all(scene: &Scene) -> ValidationReport {
    let mut r = ValidationReport::new();
    for sub in [
        check_structure(scene),
        check_hyperbolicity(scene),
        check_acyclicity(scene),
        check_morse_smale(scene),
        check_resonance(scene),
        check_index_formula(scene),
        check_transversal_degree(scene),
        check_faces(scene),
        check_paths(scene),
    ] {
        r.merge(sub);
    }
    r
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisStatus {
    pub name: &'static str,
    pub holds: bool,
}

pub const HYPOTHESES: [(&str, &str); 5] = [
    ("non-dicritical", "structure."),
    ("hyperbolic", "hyperbolicity."),
    ("acyclic", "acyclicity."),
    ("morse-smale", "morse-smale."),
    ("no-s-resonance", "resonance."),
];

pub const CONSEQUENCES: [(&str, &str); 4] = [
    ("index-formula", "index-formula"),
    ("degrees", "degree."),
    ("faces", "faces."),
    ("paths", "paths."),
];

pub fn hypotheses(report: &ValidationReport) -> Vec<HypothesisStatus> {
    HYPOTHESES.iter().map(|(n, pre)| HypothesisStatus { name: n, holds: !report.has_rule(pre) }).collect()
}

pub fn consequences(report: &ValidationReport) -> Vec<HypothesisStatus> {
    CONSEQUENCES.iter().map(|(n, pre)| HypothesisStatus { name: n, holds: !report.has_rule(pre) }).collect()
}
