//! Seeded random scenes.
//!
//! Two families: simple polytopes whose faces are the divisor components and
//! whose vertices are corner points, oriented by a random height function; and
//! the bundled templates with fresh eigenvalue magnitudes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus;
use crate::model::{
    build_scene, EdgeKind, RationalLit, RawComponent, RawDirection, RawEdge, RawEigenvalue, RawFace, RawPoint,
    SceneDocument, SCHEMA_VERSION,
};
use crate::validate::validate_all;

/// A simple 3-valent polytope given by its faces as vertex cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    pub name: String,
    pub vertices: usize,
    pub faces: Vec<Vec<usize>>,
}

impl Polytope {
    pub fn tetrahedron() -> Polytope {
        Polytope {
            name: "tetrahedron".into(),
            vertices: 4,
            faces: vec![vec![0, 1, 2], vec![0, 3, 1], vec![0, 2, 3], vec![1, 3, 2]],
        }
    }

    /// n-gonal prism: bottom ring `0..n`, top ring `n..2n`.
    pub fn prism(n: usize) -> Polytope {
        let mut faces = vec![(0..n).collect::<Vec<_>>(), (n..2 * n).rev().collect()];
        for i in 0..n {
            let j = (i + 1) % n;
            faces.push(vec![i, n + i, n + j, j]);
        }
        Polytope { name: format!("prism{n}"), vertices: 2 * n, faces }
    }

    pub fn family() -> Vec<Polytope> {
        vec![Polytope::tetrahedron(), Polytope::prism(3), Polytope::prism(4), Polytope::prism(5), Polytope::prism(6)]
    }

    /// Undirected edges `(a, b)` with `a < b`, each with its two faces.
    pub fn edges(&self) -> Vec<((usize, usize), [usize; 2])> {
        let mut out: Vec<((usize, usize), Vec<usize>)> = Vec::new();
        for (fi, f) in self.faces.iter().enumerate() {
            for k in 0..f.len() {
                let (a, b) = (f[k], f[(k + 1) % f.len()]);
                let key = (a.min(b), a.max(b));
                match out.iter_mut().find(|(e, _)| *e == key) {
                    Some((_, fs)) => fs.push(fi),
                    None => out.push((key, vec![fi])),
                }
            }
        }
        out.sort();
        out.into_iter().map(|(e, fs)| (e, [fs[0], fs[1]])).collect()
    }
}

fn edge_id(a: usize, b: usize) -> String {
    format!("e{}_{}", a.min(b), a.max(b))
}

/// Orients every edge from the higher to the lower vertex. `None` unless each
/// face has a single top and bottom and the graph has exactly two nodes.
pub fn polytope_scene(poly: &Polytope, heights: &[i64], mut magnitude: impl FnMut() -> (i64, i64)) -> Option<SceneDocument> {
    let edges = poly.edges();
    let face_id = |f: usize| format!("P{f}");
    let vid = |v: usize| format!("v{v}");
    let mut faces = Vec::new();
    for (fi, f) in poly.faces.iter().enumerate() {
        let n = f.len();
        let top = (0..n).max_by_key(|&k| heights[f[k]])?;
        let bot = (0..n).min_by_key(|&k| heights[f[k]])?;
        let walk = |step: usize| -> Option<Vec<String>> {
            let mut path = Vec::new();
            let mut k = top;
            while k != bot {
                let j = (k + step) % n;
                if heights[f[j]] >= heights[f[k]] {
                    return None;
                }
                path.push(edge_id(f[k], f[j]));
                k = j;
            }
            Some(path)
        };
        let p1 = walk(1)?;
        let p2 = walk(n - 1)?;
        faces.push(RawFace {
            id: format!("F{fi}"),
            component: face_id(fi),
            alpha: vid(f[top]),
            omega: vid(f[bot]),
            boundary_paths: vec![p1, p2],
            exceptional: false,
        });
    }
    let mut points = Vec::new();
    let mut nodes = 0;
    for v in 0..poly.vertices {
        let mut dirs = Vec::new();
        let mut comps = Vec::new();
        let mut signs = Vec::new();
        for ((a, b), fs) in edges.iter().filter(|((a, b), _)| *a == v || *b == v) {
            let other = if *a == v { *b } else { *a };
            let out = heights[v] > heights[other];
            signs.push(out);
            let (num, den) = magnitude();
            dirs.push(RawDirection {
                id: format!("to{other}"),
                eigenvalue: RawEigenvalue::Rational(RationalLit { num: if out { num } else { -num }, den }),
                containment: fs.iter().map(|&f| face_id(f)).collect(),
            });
            for &f in fs {
                if !comps.contains(&face_id(f)) {
                    comps.push(face_id(f));
                }
            }
        }
        if signs.iter().all(|&s| s == signs[0]) {
            nodes += 1;
        }
        comps.sort();
        points.push(RawPoint { id: vid(v), components: comps, directions: dirs, dim_w: None, class: None });
    }
    if nodes != 2 {
        return None;
    }
    let raw_edges = edges
        .iter()
        .map(|((a, b), fs)| {
            let (hi, lo) = if heights[*a] > heights[*b] { (*a, *b) } else { (*b, *a) };
            RawEdge {
                id: edge_id(*a, *b),
                alpha: vid(hi),
                omega: vid(lo),
                kind: EdgeKind::Skeleton,
                components: fs.iter().map(|&f| face_id(f)).collect(),
                alpha_direction: Some(format!("to{lo}")),
                omega_direction: Some(format!("to{hi}")),
                side_at_alpha: None,
                side_at_omega: None,
            }
        })
        .collect();
    Some(SceneDocument {
        schema: SCHEMA_VERSION,
        name: Some(poly.name.clone()),
        components: (0..poly.faces.len())
            .map(|f| RawComponent { id: face_id(f), label: format!("face {f}") })
            .collect(),
        points,
        edges: raw_edges,
        faces,
        injections: Vec::new(),
    })
}

fn random_magnitude(rng: &mut ChaCha8Rng) -> (i64, i64) {
    (rng.gen_range(1..=12), rng.gen_range(1..=6))
}

/// Template with every rational eigenvalue magnitude redrawn, signs kept.
pub fn reweighted(template: &SceneDocument, rng: &mut ChaCha8Rng) -> SceneDocument {
    let mut doc = template.clone();
    for p in &mut doc.points {
        p.class = None;
        for d in &mut p.directions {
            if let RawEigenvalue::Rational(r) = &mut d.eigenvalue {
                let (n, den) = random_magnitude(rng);
                r.num = if r.num < 0 { -n } else { n };
                r.den = den;
            }
        }
    }
    doc
}

fn is_valid(doc: &SceneDocument) -> bool {
    build_scene(doc).map(|s| validate_all(&s).passed).unwrap_or(false)
}

/// A valid random scene with at most 12 vertices, determined by `seed`.
pub fn random_scene(seed: u64) -> SceneDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let polys = Polytope::family();
    let templates = [corpus::document("fig3"), corpus::document("nonresonant_chain")];
    loop {
        let pick = rng.gen_range(0..10);
        let doc = if pick < 6 {
            let poly = polys.choose(&mut rng).unwrap();
            let mut found = None;
            for _ in 0..500 {
                let mut heights: Vec<i64> = (0..poly.vertices as i64).collect();
                heights.shuffle(&mut rng);
                if let Some(d) = polytope_scene(poly, &heights, || random_magnitude(&mut rng)) {
                    found = Some(d);
                    break;
                }
            }
            match found {
                Some(d) => d,
                None => continue,
            }
        } else {
            reweighted(&templates[usize::from(pick >= 8)], &mut rng)
        };
        if is_valid(&doc) {
            let mut doc = doc;
            doc.name = Some(format!("random-{seed}-{}", doc.name.unwrap_or_default()));
            return doc;
        }
    }
}
