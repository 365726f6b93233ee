#![allow(dead_code)]

use std::collections::BTreeSet;

use hafvsd::generate::{polytope_scene, Polytope};
use hafvsd::model::{RationalLit, RawEigenvalue, SceneDocument};
use hafvsd::scalar::q;
use hafvsd::Q;
use num_traits::{One, Signed, Zero};

pub fn set_eigenvalue(doc: &mut SceneDocument, point: &str, dir: &str, num: i64, den: i64) {
    let p = doc.points.iter_mut().find(|p| p.id == point).expect("point");
    let d = p.directions.iter_mut().find(|d| d.id == dir).expect("direction");
    d.eigenvalue = RawEigenvalue::Rational(RationalLit { num, den });
}

pub fn eigenvalue(doc: &SceneDocument, point: &str, dir: &str) -> Q {
    let p = doc.points.iter().find(|p| p.id == point).expect("point");
    match &p.directions.iter().find(|d| d.id == dir).expect("direction").eigenvalue {
        RawEigenvalue::Rational(r) => q(r.num, r.den),
        RawEigenvalue::Sign(_) => panic!("`{point}`/`{dir}` has no rational eigenvalue"),
    }
}

/// Tetrahedron ordered `v0 > v1 > v2 > v3`. At `v1` the edge from `v0`
/// arrives along W¹ and the edges to `v2`, `v3` leave along W².
pub struct Corner {
    pub doc: SceneDocument,
    pub point: &'static str,
    pub sigma: &'static str,
    /// Components of `σ`, as `(D_i, D_j)`.
    pub comps: (String, String),
    /// Outgoing edges lying in `D_i` and `D_j`.
    pub taus: (String, String),
}

/// `(α, λ_i, λ_j)` written as `(num, den)` pairs.
pub fn corner(alpha: (i64, i64), li: (i64, i64), lj: (i64, i64)) -> Corner {
    let mut doc = polytope_scene(&Polytope::tetrahedron(), &[3, 2, 1, 0], || (1, 1)).expect("tetrahedron scene");
    let sigma = doc.edges.iter().find(|e| e.id == "e0_1").unwrap().clone();
    let (di, dj) = (sigma.components[0].clone(), sigma.components[1].clone());
    let p = doc.points.iter().find(|p| p.id == "v1").unwrap().clone();
    let axis_in = |c: &str| {
        p.directions
            .iter()
            .find(|d| d.id != "to0" && d.containment.iter().any(|x| x == c))
            .unwrap()
            .id
            .clone()
    };
    let (ai, aj) = (axis_in(&di), axis_in(&dj));
    set_eigenvalue(&mut doc, "v1", "to0", alpha.0, alpha.1);
    set_eigenvalue(&mut doc, "v1", &ai, li.0, li.1);
    set_eigenvalue(&mut doc, "v1", &aj, lj.0, lj.1);
    let edge_for = |axis: &str| format!("e1_{}", axis.trim_start_matches("to"));
    Corner {
        point: "v1",
        sigma: "e0_1",
        taus: (edge_for(&ai), edge_for(&aj)),
        comps: (di, dj),
        doc,
    }
}

/// Longest directed path from `p`, by exhaustive recursion.
pub fn brute_length(doc: &SceneDocument, p: &str) -> usize {
    doc.edges
        .iter()
        .filter(|e| e.alpha == p)
        .map(|e| 1 + brute_length(doc, &e.omega))
        .max()
        .unwrap_or(0)
}

/// Every directed edge path with `n` edges.
pub fn paths_of_len(doc: &SceneDocument, n: usize) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = doc.edges.iter().map(|e| vec![e.id.clone()]).collect();
    for _ in 1..n {
        out = out
            .into_iter()
            .flat_map(|path| {
                let end = doc
                    .edges
                    .iter()
                    .find(|e| e.id == *path.last().unwrap())
                    .unwrap()
                    .omega
                    .clone();
                doc.edges.iter().filter(move |e| e.alpha == end).map(move |e| {
                    let mut p = path.clone();
                    p.push(e.id.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Hand iteration of the quasi-order recursion, read straight off the
/// document: at each vertex the pair `(ρ, D)` is re-expressed against the
/// component shared by the two edges, then pushed through `ρ ↦ (λ′ − λρ)/α`
/// (W¹ in, W² out) or its inverse (W² in, W¹ out). `None` when a step leaves
/// the domain or hits the critical weight.
pub fn hand_propagate(doc: &SceneDocument, path: &[String], rho0: Q, comp0: &str) -> Option<Vec<(Q, String)>> {
    let edge = |id: &str| doc.edges.iter().find(|e| e.id == id).unwrap();
    let mut out = vec![(rho0, comp0.to_string())];
    for w in path.windows(2) {
        let (a, b) = (edge(&w[0]), edge(&w[1]));
        let v = &a.omega;
        let shared: Vec<&String> = a.components.iter().filter(|c| b.components.contains(c)).collect();
        assert_eq!(shared.len(), 1, "edges {} and {} share one component", a.id, b.id);
        let shared = shared[0].clone();
        let (mut rho, comp) = out.last().unwrap().clone();
        if comp != shared {
            rho = Q::one() / rho;
        }
        let d_in = a.omega_direction.as_deref().unwrap();
        let d_out = b.alpha_direction.as_deref().unwrap();
        let pt = doc.points.iter().find(|p| p.id == *v).unwrap();
        let third = pt
            .directions
            .iter()
            .find(|d| d.id != d_in && d.id != d_out)
            .unwrap()
            .id
            .clone();
        let (e_in, e_out, e_third) = (
            eigenvalue(doc, v, d_in),
            eigenvalue(doc, v, d_out),
            eigenvalue(doc, v, &third),
        );
        let in_is_w1 = (e_in.is_positive() != e_out.is_positive()) && (e_in.is_positive() != e_third.is_positive());
        let next = if in_is_w1 {
            let w = e_third.clone() / e_out.clone();
            if rho <= w {
                return None;
            }
            (e_third - e_out * rho) / e_in
        } else {
            if rho <= Q::zero() {
                return None;
            }
            e_third / e_in.clone() - rho * e_out / e_in
        };
        out.push((next, shared));
    }
    Some(out)
}

/// Vertices of a simple polytope scene whose three axes split signs 1 + 2.
pub fn saddles(doc: &SceneDocument) -> BTreeSet<String> {
    doc.points
        .iter()
        .filter(|p| {
            let pos = p
                .directions
                .iter()
                .filter(|d| matches!(&d.eigenvalue, RawEigenvalue::Rational(r) if r.num > 0))
                .count();
            pos == 1 || pos == 2
        })
        .map(|p| p.id.clone())
        .collect()
}

/// The same scene for the field `−𝓛`: eigenvalues negated, edges and faces
/// reversed.
pub fn flipped(doc: &SceneDocument) -> SceneDocument {
    use hafvsd::model::{DeclaredClass, Sign};
    let mut d = doc.clone();
    for p in &mut d.points {
        for dir in &mut p.directions {
            match &mut dir.eigenvalue {
                RawEigenvalue::Rational(r) => r.num = -r.num,
                RawEigenvalue::Sign(s) => {
                    s.sign = match s.sign {
                        Sign::Plus => Sign::Minus,
                        Sign::Minus => Sign::Plus,
                    }
                }
            }
        }
        p.class = p.class.map(|c| match c {
            DeclaredClass::Attractor => DeclaredClass::Repeller,
            DeclaredClass::Repeller => DeclaredClass::Attractor,
            other => other,
        });
    }
    for e in &mut d.edges {
        std::mem::swap(&mut e.alpha, &mut e.omega);
        std::mem::swap(&mut e.alpha_direction, &mut e.omega_direction);
        std::mem::swap(&mut e.side_at_alpha, &mut e.side_at_omega);
    }
    for f in &mut d.faces {
        std::mem::swap(&mut f.alpha, &mut f.omega);
        for path in &mut f.boundary_paths {
            path.reverse();
        }
    }
    d
}
