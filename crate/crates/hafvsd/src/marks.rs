//! Weights, quasi-order transitions, s-resonance and the saturation paths
//! `Θ(ν)` and `Πⁱ_p`.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::graph::EdgePath;
use crate::model::{CoreError, Edge, EdgeKind, End, EndRole, Scene, VertexClass};
use crate::report::ValidationReport;
use crate::scalar::{fmt_q, Scalar, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarkError {
    #[error("`{0}` is not in S′ (no W¹ in the skeleton)")]
    NotInSPrime(String),
    #[error("eigenvalue of `{direction}` at `{point}` is not rational")]
    IrrationalEigenvalue { point: String, direction: String },
    #[error("`{0}` is not a corner saddle")]
    NotACorner(String),
    #[error("resonant step at `{point}`: quasi-order {rho} equals weight")]
    ResonantStep { point: String, rho: String },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("path {0:?} is not a skeleton path")]
    NotSkeletonPath(Vec<String>),
    #[error("not a saddle-connection chain: {0}")]
    NotSaddleConnectionChain(String),
    #[error("`{0}` is not a D-saddle")]
    NotASaddle(String),
    #[error("`{0}` is not a transversal saddle")]
    NotTransversalSaddle(String),
    #[error("trace edge `{edge}` runs into transversal saddle `{point}`")]
    RemarkViolation { edge: String, point: String },
    #[error("inconsistent scene: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

fn ser_q<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

// ---------------------------------------------------------------------------
// Generic transition algebra

/// `ρ ↦ (λ_ε′ − λ_ε ρ)/α` on `(w, ∞)` with `w = λ_ε′/λ_ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub alpha: T,
    pub lambda_eps: T,
    pub lambda_eps_prime: T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransitionFailure {
    Resonant,
    OutOfDomain,
}

impl<T: Scalar> Transition<T> {
    pub fn new(alpha: T, lambda_eps: T, lambda_eps_prime: T) -> Self {
        Transition { alpha, lambda_eps, lambda_eps_prime }
    }

    /// The critical quasi-order `w_{D_ε}(p)`.
    pub fn weight(&self) -> T {
        self.lambda_eps_prime.clone() / self.lambda_eps.clone()
    }

    /// `(a, b)` with `ρ̃ = aρ + b`.
    pub fn coefficients(&self) -> (T, T) {
        (
            -self.lambda_eps.clone() / self.alpha.clone(),
            self.lambda_eps_prime.clone() / self.alpha.clone(),
        )
    }

    pub fn eval(&self, rho: &T) -> T {
        (self.lambda_eps_prime.clone() - self.lambda_eps.clone() * rho.clone()) / self.alpha.clone()
    }

    pub fn apply(&self, rho: &T) -> Result<T, TransitionFailure> {
        let w = self.weight();
        if *rho == w {
            Err(TransitionFailure::Resonant)
        } else if *rho < w {
            Err(TransitionFailure::OutOfDomain)
        } else {
            Ok(self.eval(rho))
        }
    }

    /// `λ_ε′/λ_ε − ρ̃ α/λ_ε`, defined for `ρ̃ > 0`.
    pub fn inverse(&self, rho_tilde: &T) -> Result<T, TransitionFailure> {
        if *rho_tilde <= T::zero() {
            return Err(TransitionFailure::OutOfDomain);
        }
        Ok(self.weight() - rho_tilde.clone() * self.alpha.clone() / self.lambda_eps.clone())
    }
}

// ---------------------------------------------------------------------------
// Scene-level records

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Weight {
    #[serde(serialize_with = "ser_q")]
    pub value: Q,
    pub point: String,
    pub component: String,
}

/// Quasi-order of an angle mark on `edge`, measured against `component`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuasiOrder {
    #[serde(serialize_with = "ser_q")]
    pub value: Q,
    pub component: String,
    pub edge: String,
}

impl QuasiOrder {
    pub fn new(value: Q, component: &str, edge: &str) -> Self {
        QuasiOrder { value, component: component.to_string(), edge: edge.to_string() }
    }

    /// Same mark measured against the other component of a skeleton edge.
    pub fn flipped(&self, scene: &Scene) -> Result<QuasiOrder, MarkError> {
        let e = scene.try_edge(&self.edge)?;
        let other = e
            .components
            .iter()
            .find(|c| **c != self.component)
            .ok_or_else(|| MarkError::DomainError(format!("edge `{}` has one component", e.id)))?;
        Ok(QuasiOrder::new(Q::one() / self.value.clone(), other, &self.edge))
    }

    /// Value with respect to `c`, flipping if needed.
    pub fn against(&self, scene: &Scene, c: &str) -> Result<Q, MarkError> {
        if self.component == c {
            Ok(self.value.clone())
        } else {
            let f = self.flipped(scene)?;
            if f.component == c {
                Ok(f.value)
            } else {
                Err(MarkError::DomainError(format!("`{c}` does not contain edge `{}`", self.edge)))
            }
        }
    }
}

impl fmt::Display for QuasiOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} w.r.t. {} on {}", fmt_q(&self.value), self.component, self.edge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkKind {
    TraceMark,
    AngleMark,
    FixedMark,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkDescriptor {
    pub kind: MarkKind,
    pub anchor: String,
    pub attachment: String,
}

/// Marks anchored at the scene's saddles: a trace mark per s-component of a
/// 3D saddle, an angle mark per S′ W¹ edge, a fixed mark per W² edge at `S_tr`.
pub fn mark_descriptors(scene: &Scene) -> Vec<MarkDescriptor> {
    let mut out = Vec::new();
    for p in &scene.points {
        let Ok(c) = scene.class(&p.id) else { continue };
        if !c.is_3d_saddle {
            continue;
        }
        for nu in scene.s_components_at(&p.id) {
            if c.is_saddle() {
                out.push(MarkDescriptor { kind: MarkKind::TraceMark, anchor: nu.id.clone(), attachment: format!("W2:{}", p.id) });
            }
        }
        if scene.is_s_prime(&p.id) {
            for e in scene.edges_with_role(&p.id, EndRole::W1) {
                out.push(MarkDescriptor { kind: MarkKind::AngleMark, anchor: p.id.clone(), attachment: e.id.clone() });
            }
        }
        if c.is_transversal() {
            for e in scene.edges_with_role(&p.id, EndRole::W2) {
                out.push(MarkDescriptor { kind: MarkKind::FixedMark, anchor: p.id.clone(), attachment: e.id.clone() });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Local data at S′ points

/// W¹ axis data of an S′ point: the two components and their W² axes.
struct SPrimeFrame {
    alpha: Q,
    comps: [String; 2],
    tau_axes: [String; 2],
    lambdas: [Q; 2],
}

fn real_eig(scene: &Scene, p: &str, dir: &str) -> Result<Q, MarkError> {
    scene
        .eigenvalue(p, dir)
        .cloned()
        .ok_or_else(|| MarkError::IrrationalEigenvalue { point: p.to_string(), direction: dir.to_string() })
}

fn frame(scene: &Scene, p: &str) -> Result<SPrimeFrame, MarkError> {
    if !scene.is_s_prime(p) {
        return Err(MarkError::NotInSPrime(p.to_string()));
    }
    let pt = scene.try_point(p)?;
    let class = scene.class(p)?;
    let w1 = pt.direction(class.w1.as_deref().unwrap()).unwrap();
    let comps = [w1.containment[0].clone(), w1.containment[1].clone()];
    let mut tau_axes = [String::new(), String::new()];
    let mut lambdas = [Q::zero(), Q::zero()];
    for k in 0..2 {
        let d = pt
            .directions
            .iter()
            .find(|d| d.id != w1.id && d.containment.contains(&comps[k]))
            .ok_or_else(|| MarkError::Inconsistent(format!("no W² axis in `{}` at `{p}`", comps[k])))?;
        tau_axes[k] = d.id.clone();
        lambdas[k] = real_eig(scene, p, &d.id)?;
    }
    Ok(SPrimeFrame { alpha: real_eig(scene, p, &w1.id)?, comps, tau_axes, lambdas })
}

impl SPrimeFrame {
    fn index(&self, c: &str) -> Result<usize, MarkError> {
        self.comps
            .iter()
            .position(|x| x == c)
            .ok_or_else(|| MarkError::DomainError(format!("`{c}` does not contain W¹")))
    }

    fn transition(&self, k: usize) -> Transition<Q> {
        Transition::new(self.alpha.clone(), self.lambdas[k].clone(), self.lambdas[1 - k].clone())
    }
}

pub fn weight(scene: &Scene, p: &str, component: &str) -> Result<Weight, MarkError> {
    let f = frame(scene, p)?;
    let k = f.index(component)?;
    Ok(Weight { value: f.transition(k).weight(), point: p.to_string(), component: component.to_string() })
}

/// The edge at `p` whose germ follows `axis`.
fn edge_on_axis<'a>(scene: &'a Scene, p: &str, axis: &str) -> Result<&'a Edge, MarkError> {
    scene
        .edges_at(p)
        .into_iter()
        .find(|e| matches!(scene.end_at(&e.id, p), Ok((_, end)) if end.axis.as_deref() == Some(axis)))
        .ok_or_else(|| MarkError::Inconsistent(format!("no edge along axis `{axis}` at `{p}`")))
}

fn w1_edge_on_side<'a>(scene: &'a Scene, p: &str, nu: &str) -> Result<&'a Edge, MarkError> {
    scene
        .edges_with_role(p, EndRole::W1)
        .into_iter()
        .find(|e| matches!(scene.end_at(&e.id, p), Ok((_, end)) if end.s_components.iter().any(|s| s == nu)))
        .ok_or_else(|| MarkError::Inconsistent(format!("no W¹ edge on side `{nu}`")))
}

fn unique_w1_edge<'a>(scene: &'a Scene, p: &str) -> Result<&'a Edge, MarkError> {
    let es = scene.edges_with_role(p, EndRole::W1);
    match es.as_slice() {
        [e] => Ok(e),
        _ => Err(MarkError::Inconsistent(format!("`{p}` has {} W¹ edges, expected 1", es.len()))),
    }
}

/// Quasi-orders `(ρ_i, ρ_j)` of a saturated trace mark on the W¹ edge of `ν`.
pub fn trace_to_angle(scene: &Scene, p: &str, nu: &str) -> Result<(QuasiOrder, QuasiOrder), MarkError> {
    let f = frame(scene, p)?;
    let sigma = w1_edge_on_side(scene, p, nu)?;
    let wi = f.transition(0).weight();
    let wj = f.transition(1).weight();
    Ok((QuasiOrder::new(wi, &f.comps[0], &sigma.id), QuasiOrder::new(wj, &f.comps[1], &sigma.id)))
}

/// Chooses `ε` for a mark arriving along W¹ at `p`; returns `(ε, ρ_ε)`.
fn select_branch(scene: &Scene, f: &SPrimeFrame, p: &str, rho: &QuasiOrder) -> Result<(usize, Q), MarkError> {
    let ri = rho.against(scene, &f.comps[0])?;
    let wi = f.transition(0).weight();
    if ri == wi {
        return Err(MarkError::ResonantStep { point: p.to_string(), rho: fmt_q(&ri) });
    }
    if ri > wi {
        Ok((0, ri))
    } else {
        Ok((1, Q::one() / ri))
    }
}

fn check_w1_edge(scene: &Scene, sigma: &str, p: &str) -> Result<(), MarkError> {
    let (_, end) = scene.end_at(sigma, p)?;
    if end.role != EndRole::W1 {
        return Err(MarkError::DomainError(format!("edge `{sigma}` does not follow W¹ at `{p}`")));
    }
    Ok(())
}

/// Passes an angle mark on the W¹ edge `σ` through the corner saddle `p`.
pub fn transition(scene: &Scene, sigma: &str, p: &str, rho: &QuasiOrder) -> Result<(String, QuasiOrder), MarkError> {
    let f = frame(scene, p)?;
    if scene.try_point(p)?.e() != 3 {
        return Err(MarkError::NotACorner(p.to_string()));
    }
    check_w1_edge(scene, sigma, p)?;
    if rho.edge != sigma {
        return Err(MarkError::DomainError(format!("quasi-order is attached to `{}`, not `{sigma}`", rho.edge)));
    }
    let (k, r) = select_branch(scene, &f, p, rho)?;
    let tau = edge_on_axis(scene, p, &f.tau_axes[k])?;
    let out = f.transition(k).eval(&r);
    Ok((tau.id.clone(), QuasiOrder::new(out, &f.comps[k], &tau.id)))
}

/// Exact inverse of [`transition`]: the W¹ quasi-order sent to `ρ̃` on `τ`.
pub fn inverse_transition(scene: &Scene, tau: &str, p: &str, rho_tilde: &QuasiOrder) -> Result<QuasiOrder, MarkError> {
    let f = frame(scene, p)?;
    if scene.try_point(p)?.e() != 3 {
        return Err(MarkError::NotACorner(p.to_string()));
    }
    let (_, end) = scene.end_at(tau, p)?;
    let k = f
        .tau_axes
        .iter()
        .position(|a| Some(a) == end.axis.as_ref())
        .ok_or_else(|| MarkError::DomainError(format!("`{tau}` is not a W² edge at `{p}`")))?;
    if rho_tilde.edge != tau {
        return Err(MarkError::DomainError(format!("quasi-order is attached to `{}`, not `{tau}`", rho_tilde.edge)));
    }
    let rt = rho_tilde.against(scene, &f.comps[k])?;
    let rho = f
        .transition(k)
        .inverse(&rt)
        .map_err(|_| MarkError::DomainError(format!("ρ̃ = {} is not positive", fmt_q(&rt))))?;
    let w1 = unique_w1_edge(scene, p)?;
    Ok(QuasiOrder::new(rho, &f.comps[k], &w1.id))
}

// ---------------------------------------------------------------------------
// Propagation and resonance

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Propagation {
    Completed { trace: Vec<QuasiOrder> },
    ResonantAt { step: usize, trace: Vec<QuasiOrder> },
    Escaped { step: usize, escape_edge: String, trace: Vec<QuasiOrder> },
}

fn is_saddle_connection(scene: &Scene, e: &Edge) -> bool {
    e.components.iter().any(|c| {
        [&e.alpha, &e.omega]
            .iter()
            .all(|p| matches!(scene.restriction(p, c), Ok(crate::model::Restriction::Saddle)))
    })
}

/// Iterates the quasi-order recursion along a skeleton chain.
pub fn propagate_quasi_order(scene: &Scene, path: &[String], rho0: &QuasiOrder) -> Result<Propagation, MarkError> {
    let edges: Vec<&Edge> = path.iter().map(|id| scene.try_edge(id)).collect::<Result<_, _>>()?;
    if edges.is_empty() || edges.iter().any(|e| e.kind != EdgeKind::Skeleton) || !crate::graph::is_edge_path(scene, path) {
        return Err(MarkError::NotSkeletonPath(path.to_vec()));
    }
    if rho0.edge != edges[0].id {
        return Err(MarkError::DomainError(format!("ρ₀ is attached to `{}`", rho0.edge)));
    }
    let mut trace = vec![rho0.clone()];
    for k in 1..edges.len() {
        let (prev, next) = (edges[k - 1], edges[k]);
        let v = &prev.omega;
        let r_in = scene.edge_end(&prev.id, End::Omega)?.role;
        let r_out = scene.edge_end(&next.id, End::Alpha)?.role;
        let cur = trace.last().unwrap().clone();
        let nq = match (r_in, r_out) {
            (EndRole::W1, EndRole::W2) => {
                let f = frame(scene, v)?;
                let (_, end) = scene.end_at(&next.id, v)?;
                let k_eps = f.tau_axes.iter().position(|a| Some(a) == end.axis.as_ref()).unwrap();
                let r = cur.against(scene, &f.comps[k_eps])?;
                let t = f.transition(k_eps);
                match t.apply(&r) {
                    Ok(x) => QuasiOrder::new(x, &f.comps[k_eps], &next.id),
                    Err(TransitionFailure::Resonant) => return Ok(Propagation::ResonantAt { step: k, trace }),
                    Err(TransitionFailure::OutOfDomain) => {
                        let esc = edge_on_axis(scene, v, &f.tau_axes[1 - k_eps])?;
                        return Ok(Propagation::Escaped { step: k, escape_edge: esc.id.clone(), trace });
                    }
                }
            }
            (EndRole::W2, EndRole::W1) => inverse_transition(scene, &prev.id, v, &cur)
                .map(|q| QuasiOrder::new(q.value, &q.component, &next.id))?,
            _ => {
                return Err(MarkError::NotSaddleConnectionChain(format!(
                    "edges `{}` and `{}` do not meet through W¹/W² at `{v}`",
                    prev.id, next.id
                )))
            }
        };
        trace.push(nq);
    }
    Ok(Propagation::Completed { trace })
}

fn chain_endpoints(scene: &Scene, path: &[String]) -> Result<(String, String), MarkError> {
    let first = scene.try_edge(path.first().ok_or_else(|| MarkError::NotSaddleConnectionChain("empty".into()))?)?;
    let last = scene.try_edge(path.last().unwrap())?;
    let (p, q) = (first.alpha.clone(), last.omega.clone());
    for (e, end, pt) in [(first, End::Alpha, &p), (last, End::Omega, &q)] {
        if !scene.is_s_prime(pt) || scene.edge_end(&e.id, end)?.role != EndRole::W1 {
            return Err(MarkError::NotSaddleConnectionChain(format!("`{}` does not meet W¹ of an S′ point at `{pt}`", e.id)));
        }
    }
    Ok((p, q))
}

/// Whether the chain is an s-resonant multiple saddle connection.
pub fn is_s_resonant(scene: &Scene, path: &[String]) -> Result<bool, MarkError> {
    let (p, q) = chain_endpoints(scene, path)?;
    let first = scene.try_edge(&path[0])?;
    let d0 = &first.components[0];
    let rho0 = QuasiOrder::new(weight(scene, &p, d0)?.value, d0, &first.id);
    match propagate_quasi_order(scene, path, &rho0)? {
        Propagation::Completed { trace } => {
            let last = trace.last().unwrap();
            Ok(last.value == weight(scene, &q, &last.component)?.value)
        }
        _ => Ok(false),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResonantChain {
    pub path: EdgePath,
    pub rho_trace: Vec<QuasiOrder>,
}

/// All resonant chains of skeleton saddle connections, in deterministic order.
pub fn find_resonances(scene: &Scene) -> Vec<ResonantChain> {
    let mut found = Vec::new();
    for p in &scene.points {
        let Ok(c) = scene.class(&p.id) else { continue };
        if !scene.is_s_prime(&p.id) || c.w1_stable() != Some(false) {
            continue;
        }
        for e in scene.edges_with_role(&p.id, EndRole::W1) {
            if e.alpha != p.id || !is_saddle_connection(scene, e) {
                continue;
            }
            let d0 = &e.components[0];
            let Ok(w) = weight(scene, &p.id, d0) else { continue };
            let mut path = vec![e.id.clone()];
            let mut trace = vec![QuasiOrder::new(w.value, d0, &e.id)];
            resonance_dfs(scene, &mut path, &mut trace, &mut found);
        }
    }
    found.sort_by(|a, b| a.path.cmp(&b.path));
    found
}

fn resonance_dfs(scene: &Scene, path: &mut Vec<String>, trace: &mut Vec<QuasiOrder>, found: &mut Vec<ResonantChain>) {
    if path.len() > scene.edges.len() {
        return;
    }
    let sigma = scene.edge(path.last().unwrap()).unwrap();
    let v = sigma.omega.clone();
    let Ok(end) = scene.edge_end(&sigma.id, End::Omega) else { return };
    let rho = trace.last().unwrap().clone();
    let Ok(f) = frame(scene, &v) else { return };
    let corner = scene.point(&v).map(|p| p.e() == 3).unwrap_or(false);
    let next: Option<(String, QuasiOrder)> = match end.role {
        EndRole::W1 => {
            let Ok(k) = f.index(&rho.component) else { return };
            if rho.value == f.transition(k).weight() {
                found.push(ResonantChain { path: path.clone(), rho_trace: trace.clone() });
                return;
            }
            if !corner {
                return;
            }
            transition(scene, &sigma.id, &v, &rho).ok()
        }
        EndRole::W2 if corner => inverse_transition(scene, &sigma.id, &v, &rho)
            .ok()
            .map(|q| (q.edge.clone(), q)),
        _ => None,
    };
    if let Some((eid, q)) = next {
        let e = scene.edge(&eid).unwrap();
        if e.alpha == v && is_saddle_connection(scene, e) {
            path.push(eid);
            trace.push(q);
            resonance_dfs(scene, path, trace, found);
            path.pop();
            trace.pop();
        }
    }
}

// ---------------------------------------------------------------------------
// Θ and Π

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThetaPath {
    pub s_component: String,
    pub path: EdgePath,
    /// Terminal D-node `q(ν)`.
    pub terminal: String,
    /// Whether the path runs against the orientation of the edges.
    pub reversed: bool,
    /// Quasi-order carried on each skeleton edge of the path.
    pub quasi_orders: Vec<Option<QuasiOrder>>,
}

fn view_ends(e: &Edge, reversed: bool) -> (&str, &str) {
    if reversed {
        (&e.omega, &e.alpha)
    } else {
        (&e.alpha, &e.omega)
    }
}

fn saddle_class<'a>(scene: &'a Scene, p: &str) -> Result<&'a VertexClass, MarkError> {
    let c = scene.class(p)?;
    if c.is_node() {
        return Err(MarkError::NotASaddle(p.to_string()));
    }
    Ok(c)
}

fn initial_quasi_order(scene: &Scene, p: &str, e: &Edge) -> Result<Option<QuasiOrder>, MarkError> {
    if scene.is_s_prime(p) && e.is_skeleton() {
        let d = &e.components[0];
        Ok(Some(QuasiOrder::new(weight(scene, p, d)?.value, d, &e.id)))
    } else {
        Ok(None)
    }
}

/// `Θ(ν)` for an s-component at a D-saddle.
pub fn theta_path(scene: &Scene, nu: &str) -> Result<ThetaPath, MarkError> {
    let s = scene.s_component(nu).ok_or_else(|| CoreError::UnknownPoint(nu.to_string()))?;
    let p = s.point.clone();
    let class = saddle_class(scene, &p)?;
    let reversed = class.w1_stable() == Some(true);
    let mut sigma = w1_edge_on_side(scene, &p, nu)?;
    let mut q = initial_quasi_order(scene, &p, sigma)?;
    let mut path = Vec::new();
    let mut qos = Vec::new();
    loop {
        let (start, p1) = view_ends(sigma, reversed);
        if path.is_empty() && start != p {
            return Err(MarkError::Inconsistent(format!("`{}` does not leave `{p}` along W¹", sigma.id)));
        }
        path.push(sigma.id.clone());
        qos.push(q.clone());
        if path.len() > scene.edges.len() {
            return Err(MarkError::Inconsistent("Θ does not terminate".into()));
        }
        let c1 = scene.class(p1)?;
        if c1.is_node() {
            let attracting = (c1.kind == crate::model::VertexKind::DNodeAttractor) != reversed;
            if !attracting {
                return Err(MarkError::Inconsistent(format!("Θ({nu}) ends at `{p1}`, not an attractor of its view")));
            }
            return Ok(ThetaPath { s_component: nu.to_string(), path, terminal: p1.to_string(), reversed, quasi_orders: qos });
        }
        let (_, end) = scene.end_at(&sigma.id, p1)?;
        let next: &Edge;
        match (sigma.kind, end.role) {
            (EdgeKind::Trace, _) if c1.is_transversal() => {
                return Err(MarkError::RemarkViolation { edge: sigma.id.clone(), point: p1.to_string() })
            }
            (EdgeKind::Trace, EndRole::W1) => {
                return Err(MarkError::Inconsistent(format!("trace edge `{}` reaches `{p1}` along W¹", sigma.id)))
            }
            (EdgeKind::Trace, _) => {
                next = unique_w1_edge(scene, p1)?;
                q = initial_quasi_order(scene, p1, next)?;
            }
            (EdgeKind::Skeleton, EndRole::W2) => {
                next = unique_w1_edge(scene, p1)?;
                q = if scene.is_s_prime(p1) {
                    let cur = q.ok_or_else(|| MarkError::Inconsistent(format!("no quasi-order on `{}`", sigma.id)))?;
                    let back = inverse_transition(scene, &sigma.id, p1, &cur)?;
                    Some(QuasiOrder::new(back.value, &back.component, &next.id))
                } else {
                    None
                };
            }
            (EdgeKind::Skeleton, EndRole::W1) => {
                let cur = q.ok_or_else(|| MarkError::Inconsistent(format!("no quasi-order on `{}`", sigma.id)))?;
                let f = frame(scene, p1)?;
                let (k, r) = select_branch(scene, &f, p1, &cur)?;
                next = edge_on_axis(scene, p1, &f.tau_axes[k])?;
                q = if next.is_skeleton() {
                    Some(QuasiOrder::new(f.transition(k).eval(&r), &f.comps[k], &next.id))
                } else {
                    None
                };
            }
            (EdgeKind::Skeleton, EndRole::Node) => {
                return Err(MarkError::Inconsistent(format!("`{}` meets saddle `{p1}` off its axes", sigma.id)))
            }
        }
        if view_ends(next, reversed).0 != p1 {
            return Err(MarkError::Inconsistent(format!("`{}` does not leave `{p1}` in the flow direction", next.id)));
        }
        sigma = next;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PiPaths {
    pub point: String,
    pub paths: [EdgePath; 2],
    pub reversed: bool,
}

/// `(Π¹_p, Π²_p)` for a transversal saddle.
pub fn pi_paths(scene: &Scene, p: &str) -> Result<PiPaths, MarkError> {
    let class = scene.class(p)?;
    if !class.is_transversal() {
        return Err(MarkError::NotTransversalSaddle(p.to_string()));
    }
    let reversed = class.w2_stable() == Some(true);
    let sigmas = scene.edges_with_role(p, EndRole::W2);
    if sigmas.len() != 2 {
        return Err(MarkError::Inconsistent(format!("`{p}` has {} W² edges", sigmas.len())));
    }
    let mut out: [EdgePath; 2] = Default::default();
    for (i, s) in sigmas.iter().enumerate() {
        let (_, far) = view_ends(s, reversed);
        let mut path = vec![s.id.clone()];
        let c = scene.class(far)?;
        if c.is_transversal() {
            return Err(MarkError::RemarkViolation { edge: s.id.clone(), point: far.to_string() });
        }
        if c.is_tangential() {
            path.extend(theta_path(scene, far)?.path);
        }
        out[i] = path;
    }
    Ok(PiPaths { point: p.to_string(), paths: out, reversed })
}

/// Violations of the Θ rules for a given path.
pub fn theta_path_violations(scene: &Scene, t: &ThetaPath) -> ValidationReport {
    let mut r = ValidationReport::new();
    let nu = t.s_component.as_str();
    let mut seen = BTreeSet::new();
    let mut prev_end: Option<String> = None;
    for (i, id) in t.path.iter().enumerate() {
        let Some(e) = scene.edge(id) else {
            r.error("theta.edge", &[nu, id], "unknown edge");
            return r;
        };
        let (a, b) = view_ends(e, t.reversed);
        if let Some(pe) = &prev_end {
            if pe != a {
                r.error("theta.path", &[nu, id], "consecutive edges do not meet");
            }
        }
        if i == 0 && !seen.insert(a.to_string()) {
            r.error("theta.simple", &[nu, a], "vertex repeated");
        }
        if !seen.insert(b.to_string()) {
            r.error("theta.simple", &[nu, b], "vertex repeated");
        }
        if e.kind == EdgeKind::Trace && matches!(scene.class(b), Ok(c) if c.is_transversal()) {
            r.error("theta.remark", &[nu, id, b], "trace edge runs into a transversal saddle");
        }
        prev_end = Some(b.to_string());
    }
    match prev_end {
        Some(last) => {
            if last != t.terminal {
                r.error("theta.terminal", &[nu, &t.terminal], "terminal does not match path end");
            }
            if !matches!(scene.class(&last), Ok(c) if c.is_node()) {
                r.error("theta.terminal", &[nu, &last], "Θ does not end at a D-node");
            }
        }
        None => r.error("theta.path", &[nu], "empty path"),
    }
    r
}

/// Recomputes every `Θ(ν)` and checks it.
pub fn check_theta_wellformed(scene: &Scene) -> ValidationReport {
    let mut r = ValidationReport::new();
    for s in scene.all_s_components() {
        match scene.class(&s.point) {
            Ok(c) if c.is_saddle() => {}
            _ => continue,
        }
        match theta_path(scene, &s.id) {
            Ok(t) => r.merge(theta_path_violations(scene, &t)),
            Err(e) => r.error("theta.compute", &[&s.id], e.to_string()),
        }
    }
    r
}
