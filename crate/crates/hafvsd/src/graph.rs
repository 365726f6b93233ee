//! The oriented graph Ω: lengths, filtration layers, edge complements, the
//! order on s-components and face limits.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::model::{CoreError, End, Scene, SComponent, VertexKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has a directed cycle through edges {0:?}")]
    CyclicGraph(Vec<String>),
    #[error("face `{0}`: side data does not determine a unique s-component")]
    AmbiguousSide(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Subgraph {
    pub vertices: BTreeSet<String>,
    pub edges: BTreeSet<String>,
}

impl Subgraph {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.edges.is_empty()
    }

    /// Whole graph.
    pub fn full(scene: &Scene) -> Subgraph {
        Subgraph {
            vertices: scene.points.iter().map(|p| p.id.clone()).collect(),
            edges: scene.edges.iter().map(|e| e.id.clone()).collect(),
        }
    }

    /// Subgraph generated by a set of edges: the edges plus their endpoints.
    pub fn generated_by_edges<'a>(scene: &Scene, edges: impl IntoIterator<Item = &'a String>) -> Subgraph {
        let mut g = Subgraph::default();
        for id in edges {
            if let Some(e) = scene.edge(id) {
                g.edges.insert(e.id.clone());
                g.vertices.insert(e.alpha.clone());
                g.vertices.insert(e.omega.clone());
            }
        }
        g
    }

    pub fn is_subgraph_of(&self, other: &Subgraph) -> bool {
        self.vertices.is_subset(&other.vertices) && self.edges.is_subset(&other.edges)
    }
}

/// An ordered sequence of edge ids.
pub type EdgePath = Vec<String>;

/// Checks `α(σ_{j+1}) = ω(σ_j)` along the path.
pub fn is_edge_path(scene: &Scene, path: &[String]) -> bool {
    path.iter().all(|id| scene.edge(id).is_some())
        && path.windows(2).all(|w| scene.edge(&w[0]).unwrap().omega == scene.edge(&w[1]).unwrap().alpha)
}

/// Vertices visited by a path, starting with `α(σ_1)`.
pub fn path_vertices(scene: &Scene, path: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, id) in path.iter().enumerate() {
        let e = scene.edge(id).expect("edge exists");
        if i == 0 {
            out.push(e.alpha.clone());
        }
        out.push(e.omega.clone());
    }
    out
}

/// Some directed cycle, as a list of edge ids, if one exists.
pub fn find_cycle(scene: &Scene) -> Option<Vec<String>> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&str, u8> = scene.points.iter().map(|p| (p.id.as_str(), 0)).collect();
    let mut via: BTreeMap<&str, &str> = BTreeMap::new();
    for start in scene.points.iter().map(|p| p.id.as_str()) {
        if state[start] != 0 {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        state.insert(start, 1);
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            let outs = scene.out_edges(v);
            if *i < outs.len() {
                let eid = outs[*i].as_str();
                *i += 1;
                let w = scene.edge(eid).unwrap().omega.as_str();
                match state[w] {
                    0 => {
                        state.insert(w, 1);
                        via.insert(w, eid);
                        stack.push((w, 0));
                    }
                    1 => {
                        let mut cycle = vec![eid.to_string()];
                        let mut x = v;
                        while x != w {
                            let e = via[x];
                            cycle.push(e.to_string());
                            x = scene.edge(e).unwrap().alpha.as_str();
                        }
                        cycle.reverse();
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                state.insert(v, 2);
                stack.pop();
            }
        }
    }
    None
}

/// Longest-path length of every vertex.
pub fn lengths(scene: &Scene) -> Result<BTreeMap<String, usize>, GraphError> {
    if let Some(c) = find_cycle(scene) {
        return Err(GraphError::CyclicGraph(c));
    }
    // Kahn order on the reversed graph: sinks first.
    let mut remaining: BTreeMap<&str, usize> =
        scene.points.iter().map(|p| (p.id.as_str(), scene.out_edges(&p.id).len())).collect();
    let mut queue: VecDeque<&str> = remaining.iter().filter(|(_, &n)| n == 0).map(|(&p, _)| p).collect();
    let mut len: BTreeMap<String, usize> = BTreeMap::new();
    while let Some(v) = queue.pop_front() {
        let l = scene
            .out_edges(v)
            .iter()
            .map(|e| len[&scene.edge(e).unwrap().omega] + 1)
            .max()
            .unwrap_or(0);
        len.insert(v.to_string(), l);
        for e in scene.in_edges(v) {
            let a = scene.edge(e).unwrap().alpha.as_str();
            let n = remaining.get_mut(a).unwrap();
            *n -= 1;
            if *n == 0 {
                queue.push_back(a);
            }
        }
    }
    Ok(len)
}

pub fn length(scene: &Scene, p: &str) -> Result<usize, GraphError> {
    scene.try_point(p)?;
    Ok(lengths(scene)?[p])
}

/// `[Ω⁰, …, Ωˡ]`.
pub fn filtration(scene: &Scene) -> Result<Vec<Subgraph>, GraphError> {
    let len = lengths(scene)?;
    let top = len.values().copied().max().unwrap_or(0);
    let layers = (0..=top)
        .map(|j| {
            let vertices: BTreeSet<String> = len.iter().filter(|(_, &l)| l <= j).map(|(p, _)| p.clone()).collect();
            let edges = scene.edges.iter().filter(|e| vertices.contains(&e.alpha)).map(|e| e.id.clone()).collect();
            Subgraph { vertices, edges }
        })
        .collect();
    Ok(layers)
}

/// Subgraph generated by `E(Ω) ∖ E(G)`.
pub fn edge_complement(scene: &Scene, g: &Subgraph) -> Subgraph {
    let rest: Vec<String> = scene.edges.iter().filter(|e| !g.edges.contains(&e.id)).map(|e| e.id.clone()).collect();
    Subgraph::generated_by_edges(scene, &rest)
}

/// `α̃(σ)`: s-components at the start of `σ` that the edge germ touches.
pub fn alpha_tilde<'a>(scene: &'a Scene, edge: &str) -> Result<&'a [String], CoreError> {
    Ok(&scene.edge_end(edge, End::Alpha)?.s_components)
}

pub fn omega_tilde<'a>(scene: &'a Scene, edge: &str) -> Result<&'a [String], CoreError> {
    Ok(&scene.edge_end(edge, End::Omega)?.s_components)
}

/// Reachability closure of the order on s-components.
#[derive(Debug, Clone, Serialize)]
pub struct SOrder {
    above: BTreeMap<String, BTreeSet<String>>,
}

impl SOrder {
    pub fn build(scene: &Scene) -> Result<SOrder, CoreError> {
        let mut above: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for nu in scene.all_s_components() {
            let mut seen: BTreeSet<&str> = BTreeSet::new();
            let mut queue: VecDeque<&str> = VecDeque::new();
            for e in &scene.edges {
                if alpha_tilde(scene, &e.id)?.contains(&nu.id) {
                    queue.push_back(&e.id);
                }
            }
            let mut reach = BTreeSet::from([nu.id.clone()]);
            while let Some(eid) = queue.pop_front() {
                if !seen.insert(eid) {
                    continue;
                }
                reach.extend(omega_tilde(scene, eid)?.iter().cloned());
                let w = &scene.edge(eid).unwrap().omega;
                queue.extend(scene.out_edges(w).iter().map(String::as_str));
            }
            above.insert(nu.id, reach);
        }
        Ok(SOrder { above })
    }

    pub fn leq(&self, nu: &str, mu: &str) -> bool {
        nu == mu || self.above.get(nu).is_some_and(|s| s.contains(mu))
    }
}

pub fn s_leq(scene: &Scene, nu: &str, mu: &str) -> Result<bool, CoreError> {
    Ok(SOrder::build(scene)?.leq(nu, mu))
}

/// `(α̃(Γ), ω̃(Γ))`.
pub fn face_limits(scene: &Scene, face: &str) -> Result<(SComponent, SComponent), GraphError> {
    let f = scene.try_face(face)?;
    let pick = |p: &str, end: End| -> Result<SComponent, GraphError> {
        let cands = scene.s_components_at(p);
        if cands.len() == 1 {
            return Ok(cands.into_iter().next().unwrap());
        }
        let mut common: Option<BTreeSet<String>> = None;
        for path in &f.boundary_paths {
            let eid = if end == End::Alpha { path.first() } else { path.last() };
            let Some(eid) = eid else { continue };
            let touched: BTreeSet<String> = scene.edge_end(eid, end)?.s_components.iter().cloned().collect();
            common = Some(match common {
                None => touched,
                Some(c) => c.intersection(&touched).cloned().collect(),
            });
        }
        match common {
            Some(c) if c.len() == 1 => {
                let id = c.into_iter().next().unwrap();
                Ok(cands.into_iter().find(|s| s.id == id).unwrap())
            }
            _ => Err(GraphError::AmbiguousSide(face.to_string())),
        }
    };
    Ok((pick(&f.alpha, End::Alpha)?, pick(&f.omega, End::Omega)?))
}

/// A path through `p` from a repeller node to an attractor node, if any.
pub fn repeller_attractor_path(scene: &Scene, p: &str) -> Option<EdgePath> {
    let is_kind = |v: &str, k: VertexKind| matches!(scene.class(v), Ok(c) if c.kind == k);
    let search = |forward: bool| -> Option<EdgePath> {
        let target = if forward { VertexKind::DNodeAttractor } else { VertexKind::DNodeRepeller };
        let mut prev: BTreeMap<String, String> = BTreeMap::new();
        let mut queue = VecDeque::from([p.to_string()]);
        let mut seen = BTreeSet::from([p.to_string()]);
        while let Some(v) = queue.pop_front() {
            let edges = if forward { scene.out_edges(&v) } else { scene.in_edges(&v) };
            if is_kind(&v, target) {
                let mut path = Vec::new();
                let mut x = v.clone();
                while let Some(e) = prev.get(&x) {
                    path.push(e.clone());
                    let ed = scene.edge(e).unwrap();
                    x = if forward { ed.alpha.clone() } else { ed.omega.clone() };
                }
                if forward {
                    path.reverse();
                }
                return Some(path);
            }
            for e in edges {
                let ed = scene.edge(e).unwrap();
                let w = if forward { &ed.omega } else { &ed.alpha };
                if seen.insert(w.clone()) {
                    prev.insert(w.clone(), e.clone());
                    queue.push_back(w.clone());
                }
            }
        }
        None
    };
    let back = search(false)?;
    let fwd = search(true)?;
    let mut path = back;
    path.extend(fwd);
    Some(path)
}
