//! Scene documents, the indexed [`Scene`], and everything derived locally at a
//! singular point: vertex classes, s-components and edge-end roles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{q, Q};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("dangling reference: {entity} refers to unknown {reference}")]
    DanglingReference { entity: String, reference: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("local structure at `{point}`: {reason}")]
    LocalStructure { point: String, reason: String },
    #[error("inconsistent eigenvalue signs at `{point}`: {reason}")]
    InconsistentEigenvalueSigns { point: String, reason: String },
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("unknown face `{0}`")]
    UnknownFace(String),
    #[error("edge `{edge}`: {reason}")]
    EdgeEnd { edge: String, reason: String },
}

// ---------------------------------------------------------------------------
// Raw document

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDocument {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub components: Vec<RawComponent>,
    pub points: Vec<RawPoint>,
    pub edges: Vec<RawEdge>,
    pub faces: Vec<RawFace>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub injections: Vec<Injection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawComponent {
    pub id: String,
    #[serde(default)]
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPoint {
    pub id: String,
    pub components: Vec<String>,
    pub directions: Vec<RawDirection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_w: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<DeclaredClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDirection {
    pub id: String,
    pub eigenvalue: RawEigenvalue,
    /// Empty means transversal to the divisor.
    #[serde(default)]
    pub containment: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawEigenvalue {
    Rational(RationalLit),
    Sign(SignLit),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalLit {
    pub num: i64,
    pub den: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignLit {
    pub sign: Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeclaredClass {
    Attractor,
    Repeller,
    TransversalSaddle,
    TangentialSaddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Skeleton,
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEdge {
    pub id: String,
    pub alpha: String,
    pub omega: String,
    pub kind: EdgeKind,
    pub components: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_direction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_direction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_at_alpha: Option<Sign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_at_omega: Option<Sign>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFace {
    pub id: String,
    pub component: String,
    pub alpha: String,
    pub omega: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary_paths: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exceptional: bool,
}

/// Test hook: a stain conflict applied after itineraries are computed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injection {
    pub kind: InjectionKind,
    pub generators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub door: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InjectionKind {
    SharedJamb,
    FreeDoorContact,
}

impl SceneDocument {
    pub fn from_json(text: &str) -> Result<Self, CoreError> {
        serde_json::from_str(text).map_err(|e| CoreError::SchemaViolation(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }
}

// ---------------------------------------------------------------------------
// Built scene

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisorComponent {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Eigenvalue {
    Real(#[serde(serialize_with = "ser_q")] Q),
    /// Only the sign of the real part is known (complex pair).
    RealPartSign(Sign),
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::scalar::fmt_q(x))
}

impl Eigenvalue {
    /// +1, -1, or 0 for a vanishing real part.
    pub fn sign(&self) -> i8 {
        match self {
            Eigenvalue::Real(x) if x.is_zero() => 0,
            Eigenvalue::Real(x) if x.is_positive() => 1,
            Eigenvalue::Real(_) => -1,
            Eigenvalue::RealPartSign(Sign::Plus) => 1,
            Eigenvalue::RealPartSign(Sign::Minus) => -1,
        }
    }

    pub fn real(&self) -> Option<&Q> {
        match self {
            Eigenvalue::Real(x) => Some(x),
            Eigenvalue::RealPartSign(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Direction {
    pub id: String,
    pub eigenvalue: Eigenvalue,
    pub containment: Vec<String>,
}

impl Direction {
    pub fn is_transversal(&self) -> bool {
        self.containment.is_empty()
    }

    pub fn in_skeleton(&self) -> bool {
        self.containment.len() >= 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SingularPoint {
    pub id: String,
    pub components: Vec<String>,
    pub directions: Vec<Direction>,
    pub dim_w: Option<u8>,
    pub declared_class: Option<DeclaredClass>,
}

impl SingularPoint {
    /// Corner index: number of divisor components through the point.
    pub fn e(&self) -> usize {
        self.components.len()
    }

    pub fn direction(&self, id: &str) -> Option<&Direction> {
        self.directions.iter().find(|d| d.id == id)
    }

    /// The two directions spanning component `c` at this point.
    pub fn directions_in(&self, c: &str) -> Vec<&Direction> {
        self.directions
            .iter()
            .filter(|d| d.containment.iter().any(|x| x == c))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub id: String,
    pub alpha: String,
    pub omega: String,
    pub kind: EdgeKind,
    pub components: Vec<String>,
    pub alpha_direction: Option<String>,
    pub omega_direction: Option<String>,
    pub side_at_alpha: Option<Sign>,
    pub side_at_omega: Option<Sign>,
}

impl Edge {
    pub fn endpoint(&self, end: End) -> &str {
        match end {
            End::Alpha => &self.alpha,
            End::Omega => &self.omega,
        }
    }

    pub fn is_skeleton(&self) -> bool {
        self.kind == EdgeKind::Skeleton
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Face {
    pub id: String,
    pub component: String,
    pub alpha: String,
    pub omega: String,
    pub boundary_paths: Vec<Vec<String>>,
    pub exceptional: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum End {
    Alpha,
    Omega,
}

impl End {
    pub fn other(self) -> End {
        match self {
            End::Alpha => End::Omega,
            End::Omega => End::Alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexKind {
    DNodeAttractor,
    DNodeRepeller,
    TransversalSaddle,
    TangentialSaddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
}

impl Stability {
    fn of_sign(s: i8) -> Stability {
        if s < 0 {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    }

    pub fn flip(self) -> Stability {
        match self {
            Stability::Stable => Stability::Unstable,
            Stability::Unstable => Stability::Stable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexClass {
    pub kind: VertexKind,
    pub is_3d_saddle: bool,
    /// Orientation of W² whenever eigenvalue signs split 1 + 2.
    pub stable_or_unstable_w2: Option<Stability>,
    /// The odd-sign axis, if any.
    pub w1: Option<String>,
    pub w2: Vec<String>,
    pub corner_index: usize,
    /// Dimension of W(p); absent for tangential saddles.
    pub dim_w: Option<u8>,
}

impl VertexClass {
    pub fn is_node(&self) -> bool {
        matches!(self.kind, VertexKind::DNodeAttractor | VertexKind::DNodeRepeller)
    }

    pub fn is_saddle(&self) -> bool {
        !self.is_node()
    }

    pub fn is_transversal(&self) -> bool {
        self.kind == VertexKind::TransversalSaddle
    }

    pub fn is_tangential(&self) -> bool {
        self.kind == VertexKind::TangentialSaddle
    }

    pub fn w1_stable(&self) -> Option<bool> {
        self.stable_or_unstable_w2.map(|s| s == Stability::Unstable)
    }

    pub fn w2_stable(&self) -> Option<bool> {
        self.stable_or_unstable_w2.map(|s| s == Stability::Stable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Restriction {
    Saddle,
    Attractor,
    Repeller,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SSign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "only")]
    Only,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SComponent {
    pub id: String,
    pub point: String,
    pub sign: SSign,
}

pub fn scomp_id(point: &str, sign: SSign) -> String {
    match sign {
        SSign::Plus => format!("{point}+"),
        SSign::Minus => format!("{point}-"),
        SSign::Only => point.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EndRole {
    W1,
    W2,
    /// Generic approach to a node of the restriction.
    Node,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeEnd {
    pub point: String,
    pub axis: Option<String>,
    pub role: EndRole,
    pub s_components: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub schema: u32,
    pub name: String,
    pub components: Vec<DivisorComponent>,
    pub points: Vec<SingularPoint>,
    pub edges: Vec<Edge>,
    pub faces: Vec<Face>,
    pub injections: Vec<Injection>,
    point_ix: BTreeMap<String, usize>,
    edge_ix: BTreeMap<String, usize>,
    face_ix: BTreeMap<String, usize>,
    out_edges: BTreeMap<String, Vec<String>>,
    in_edges: BTreeMap<String, Vec<String>>,
    classes: BTreeMap<String, Result<VertexClass, CoreError>>,
    ends: BTreeMap<String, [Result<EdgeEnd, CoreError>; 2]>,
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a String>) -> Result<(), CoreError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(CoreError::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

fn dangling(entity: &str, reference: &str) -> CoreError {
    CoreError::DanglingReference { entity: entity.to_string(), reference: reference.to_string() }
}

/// Parses and indexes a JSON scene document.
pub fn parse_scene(text: &str) -> Result<Scene, CoreError> {
    build_scene(&SceneDocument::from_json(text)?)
}

pub fn build_scene(raw: &SceneDocument) -> Result<Scene, CoreError> {
    if raw.schema != SCHEMA_VERSION {
        return Err(CoreError::SchemaViolation(format!("unsupported schema version {}", raw.schema)));
    }
    let all_ids = raw
        .components
        .iter()
        .map(|c| &c.id)
        .chain(raw.points.iter().map(|p| &p.id))
        .chain(raw.edges.iter().map(|e| &e.id))
        .chain(raw.faces.iter().map(|f| &f.id));
    check_unique(all_ids.clone())?;
    for id in all_ids {
        if id.is_empty() || id.contains(['+', '-', '@', '#', ':']) {
            return Err(CoreError::SchemaViolation(format!("id `{id}` may not contain + - @ # :")));
        }
    }

    let mut components: Vec<DivisorComponent> = raw
        .components
        .iter()
        .map(|c| DivisorComponent { id: c.id.clone(), label: c.label.clone() })
        .collect();
    components.sort_by(|a, b| a.id.cmp(&b.id));
    let comp_ids: BTreeSet<&str> = components.iter().map(|c| c.id.as_str()).collect();

    let mut points = Vec::new();
    for rp in &raw.points {
        points.push(build_point(rp, &comp_ids)?);
    }
    points.sort_by(|a, b| a.id.cmp(&b.id));
    let point_ix: BTreeMap<String, usize> =
        points.iter().enumerate().map(|(i, p)| (p.id.clone(), i)).collect();

    let mut edges = Vec::new();
    for re in &raw.edges {
        for r in [&re.alpha, &re.omega] {
            if !point_ix.contains_key(r) {
                return Err(dangling(&re.id, r));
            }
        }
        for c in &re.components {
            if !comp_ids.contains(c.as_str()) {
                return Err(dangling(&re.id, c));
            }
        }
        if re.alpha == re.omega {
            return Err(CoreError::SchemaViolation(format!("edge `{}` has alpha = omega", re.id)));
        }
        let mut comps = re.components.clone();
        comps.sort();
        comps.dedup();
        let want = match re.kind {
            EdgeKind::Skeleton => 2,
            EdgeKind::Trace => 1,
        };
        if comps.len() != want || re.components.len() != want {
            return Err(CoreError::SchemaViolation(format!(
                "edge `{}`: {:?} edge needs {want} components",
                re.id, re.kind
            )));
        }
        for (end, dir) in [(&re.alpha, &re.alpha_direction), (&re.omega, &re.omega_direction)] {
            if let Some(d) = dir {
                if points[point_ix[end]].direction(d).is_none() {
                    return Err(dangling(&re.id, d));
                }
            }
        }
        edges.push(Edge {
            id: re.id.clone(),
            alpha: re.alpha.clone(),
            omega: re.omega.clone(),
            kind: re.kind,
            components: comps,
            alpha_direction: re.alpha_direction.clone(),
            omega_direction: re.omega_direction.clone(),
            side_at_alpha: re.side_at_alpha,
            side_at_omega: re.side_at_omega,
        });
    }
    edges.sort_by(|a, b| a.id.cmp(&b.id));
    let edge_ix: BTreeMap<String, usize> =
        edges.iter().enumerate().map(|(i, e)| (e.id.clone(), i)).collect();

    let mut faces = Vec::new();
    for rf in &raw.faces {
        if !comp_ids.contains(rf.component.as_str()) {
            return Err(dangling(&rf.id, &rf.component));
        }
        for r in [&rf.alpha, &rf.omega] {
            if !point_ix.contains_key(r) {
                return Err(dangling(&rf.id, r));
            }
        }
        if rf.exceptional {
            if !rf.boundary_paths.is_empty() {
                return Err(CoreError::SchemaViolation(format!(
                    "exceptional face `{}` cannot list boundary paths",
                    rf.id
                )));
            }
        } else {
            if rf.boundary_paths.len() != 2 || rf.boundary_paths.iter().any(|p| p.is_empty()) {
                return Err(CoreError::SchemaViolation(format!(
                    "face `{}` needs two non-empty boundary paths",
                    rf.id
                )));
            }
            for e in rf.boundary_paths.iter().flatten() {
                if !edge_ix.contains_key(e) {
                    return Err(dangling(&rf.id, e));
                }
            }
        }
        faces.push(Face {
            id: rf.id.clone(),
            component: rf.component.clone(),
            alpha: rf.alpha.clone(),
            omega: rf.omega.clone(),
            boundary_paths: rf.boundary_paths.clone(),
            exceptional: rf.exceptional,
        });
    }
    faces.sort_by(|a, b| a.id.cmp(&b.id));
    let face_ix = faces.iter().enumerate().map(|(i, f)| (f.id.clone(), i)).collect();

    let mut out_edges: BTreeMap<String, Vec<String>> =
        points.iter().map(|p| (p.id.clone(), Vec::new())).collect();
    let mut in_edges = out_edges.clone();
    for e in &edges {
        out_edges.get_mut(&e.alpha).unwrap().push(e.id.clone());
        in_edges.get_mut(&e.omega).unwrap().push(e.id.clone());
    }

    let classes: BTreeMap<String, Result<VertexClass, CoreError>> =
        points.iter().map(|p| (p.id.clone(), derive_class(p))).collect();

    let mut scene = Scene {
        schema: raw.schema,
        name: raw.name.clone().unwrap_or_default(),
        components,
        points,
        edges,
        faces,
        injections: raw.injections.clone(),
        point_ix,
        edge_ix,
        face_ix,
        out_edges,
        in_edges,
        classes,
        ends: BTreeMap::new(),
    };
    let ends = scene
        .edges
        .iter()
        .map(|e| (e.id.clone(), [derive_end(&scene, e, End::Alpha), derive_end(&scene, e, End::Omega)]))
        .collect();
    scene.ends = ends;
    Ok(scene)
}

fn build_point(rp: &RawPoint, comp_ids: &BTreeSet<&str>) -> Result<SingularPoint, CoreError> {
    let local = |reason: String| CoreError::LocalStructure { point: rp.id.clone(), reason };
    for c in &rp.components {
        if !comp_ids.contains(c.as_str()) {
            return Err(dangling(&rp.id, c));
        }
    }
    let mut comps = rp.components.clone();
    comps.sort();
    comps.dedup();
    if comps.len() != rp.components.len() || comps.is_empty() || comps.len() > 3 {
        return Err(local(format!("needs 1 to 3 distinct components, got {}", rp.components.len())));
    }
    if rp.directions.len() != 3 {
        return Err(local(format!("needs 3 directions, got {}", rp.directions.len())));
    }
    check_unique(rp.directions.iter().map(|d| &d.id))?;
    let mut directions = Vec::new();
    for rd in &rp.directions {
        let mut cont = rd.containment.clone();
        cont.sort();
        cont.dedup();
        for c in &cont {
            if !comps.contains(c) {
                return Err(local(format!("direction `{}` lies in `{c}`, which is not through the point", rd.id)));
            }
        }
        if cont.len() > 2 {
            return Err(local(format!("direction `{}` lies in more than two components", rd.id)));
        }
        let eigenvalue = match &rd.eigenvalue {
            RawEigenvalue::Rational(r) => {
                if r.den == 0 {
                    return Err(CoreError::SchemaViolation(format!("zero denominator at `{}`", rp.id)));
                }
                Eigenvalue::Real(q(r.num, r.den))
            }
            RawEigenvalue::Sign(s) => Eigenvalue::RealPartSign(s.sign),
        };
        directions.push(Direction { id: rd.id.clone(), eigenvalue, containment: cont });
    }
    directions.sort_by(|a, b| a.id.cmp(&b.id));
    for c in &comps {
        let n = directions.iter().filter(|d| d.containment.contains(c)).count();
        if n != 2 {
            return Err(local(format!("component `{c}` must be spanned by two directions, found {n}")));
        }
    }
    let in_skeleton = directions.iter().filter(|d| d.in_skeleton()).count();
    let expected_skeleton = match comps.len() {
        1 => 0,
        2 => 1,
        _ => 3,
    };
    if in_skeleton != expected_skeleton {
        return Err(local(format!(
            "{} skeleton directions for a point on {} components",
            in_skeleton,
            comps.len()
        )));
    }
    if let Some(d) = rp.dim_w {
        if !(1..=3).contains(&d) {
            return Err(CoreError::SchemaViolation(format!("dim_w at `{}` must be 1, 2 or 3", rp.id)));
        }
    }
    Ok(SingularPoint {
        id: rp.id.clone(),
        components: comps,
        directions,
        dim_w: rp.dim_w,
        declared_class: rp.class,
    })
}

fn derive_class(p: &SingularPoint) -> Result<VertexClass, CoreError> {
    let bad = |reason: String| CoreError::InconsistentEigenvalueSigns { point: p.id.clone(), reason };
    let signs: Vec<i8> = p.directions.iter().map(|d| d.eigenvalue.sign()).collect();
    if let Some(i) = signs.iter().position(|&s| s == 0) {
        return Err(bad(format!("direction `{}` has zero real part", p.directions[i].id)));
    }
    let e = p.e();
    let class = if signs.iter().all(|&s| s == signs[0]) {
        VertexClass {
            kind: if signs[0] < 0 { VertexKind::DNodeAttractor } else { VertexKind::DNodeRepeller },
            is_3d_saddle: false,
            stable_or_unstable_w2: None,
            w1: None,
            w2: Vec::new(),
            corner_index: e,
            dim_w: Some(3),
        }
    } else {
        let plus = signs.iter().filter(|&&s| s > 0).count();
        let odd_sign: i8 = if plus == 1 { 1 } else { -1 };
        let w1 = p.directions.iter().zip(&signs).find(|(_, &s)| s == odd_sign).unwrap().0;
        let w2: Vec<&Direction> = p.directions.iter().filter(|d| d.id != w1.id).collect();
        let w2_stab = Stability::of_sign(-odd_sign);
        let w2_ids = w2.iter().map(|d| d.id.clone()).collect();
        if w1.is_transversal() {
            VertexClass {
                kind: if w2_stab == Stability::Stable {
                    VertexKind::DNodeAttractor
                } else {
                    VertexKind::DNodeRepeller
                },
                is_3d_saddle: true,
                stable_or_unstable_w2: Some(w2_stab),
                w1: Some(w1.id.clone()),
                w2: w2_ids,
                corner_index: e,
                dim_w: Some(1),
            }
        } else {
            let tangential = w2[0].containment.iter().any(|c| w2[1].containment.contains(c));
            VertexClass {
                kind: if tangential { VertexKind::TangentialSaddle } else { VertexKind::TransversalSaddle },
                is_3d_saddle: true,
                stable_or_unstable_w2: Some(w2_stab),
                w1: Some(w1.id.clone()),
                w2: w2_ids,
                corner_index: e,
                dim_w: if tangential { None } else { Some(2) },
            }
        }
    };
    if let Some(decl) = p.declared_class {
        let ok = match decl {
            DeclaredClass::Attractor => class.kind == VertexKind::DNodeAttractor,
            DeclaredClass::Repeller => class.kind == VertexKind::DNodeRepeller,
            DeclaredClass::TransversalSaddle => class.kind == VertexKind::TransversalSaddle,
            DeclaredClass::TangentialSaddle => class.kind == VertexKind::TangentialSaddle,
        };
        if !ok {
            return Err(bad(format!("declared {decl:?} but eigenvalues give {:?}", class.kind)));
        }
    }
    Ok(class)
}

fn restriction_of(p: &SingularPoint, c: &str) -> Restriction {
    let ds = p.directions_in(c);
    let s: Vec<i8> = ds.iter().map(|d| d.eigenvalue.sign()).collect();
    match (s[0] > 0, s[1] > 0) {
        (true, true) => Restriction::Repeller,
        (false, false) => Restriction::Attractor,
        _ => Restriction::Saddle,
    }
}

fn derive_end(scene: &Scene, e: &Edge, end: End) -> Result<EdgeEnd, CoreError> {
    let err = |reason: String| CoreError::EdgeEnd { edge: e.id.clone(), reason };
    let pid = e.endpoint(end);
    let p = scene.point(pid).expect("resolved at build");
    let class = scene.class(pid).map_err(|x| err(x.to_string()))?;
    for c in &e.components {
        if !p.components.contains(c) {
            return Err(err(format!("component `{c}` does not pass through `{pid}`")));
        }
    }
    let axis = match e.kind {
        EdgeKind::Skeleton => {
            let found: Vec<&Direction> =
                p.directions.iter().filter(|d| e.components.iter().all(|c| d.containment.contains(c))).collect();
            match found.as_slice() {
                [d] => Some(d.id.clone()),
                _ => return Err(err(format!("no skeleton axis at `{pid}`"))),
            }
        }
        EdgeKind::Trace => {
            let c = &e.components[0];
            if restriction_of(p, c) == Restriction::Saddle {
                let want = if end == End::Alpha { 1 } else { -1 };
                let d = p
                    .directions_in(c)
                    .into_iter()
                    .find(|d| d.eigenvalue.sign() == want)
                    .expect("saddle has both signs");
                if d.in_skeleton() {
                    return Err(err(format!("trace edge would follow the skeleton axis `{}` at `{pid}`", d.id)));
                }
                Some(d.id.clone())
            } else {
                None
            }
        }
    };
    let role = match (&axis, &class.w1) {
        (Some(a), Some(w1)) if a == w1 => EndRole::W1,
        (Some(_), Some(_)) => EndRole::W2,
        _ => EndRole::Node,
    };
    let s_components = if class.is_transversal() {
        match role {
            EndRole::W1 => {
                let side = match end {
                    End::Alpha => e.side_at_alpha,
                    End::Omega => e.side_at_omega,
                };
                match side {
                    Some(Sign::Plus) => vec![scomp_id(pid, SSign::Plus)],
                    Some(Sign::Minus) => vec![scomp_id(pid, SSign::Minus)],
                    None => return Err(err(format!("W1 edge at transversal saddle `{pid}` needs a side"))),
                }
            }
            _ => vec![scomp_id(pid, SSign::Plus), scomp_id(pid, SSign::Minus)],
        }
    } else {
        vec![pid.to_string()]
    };
    Ok(EdgeEnd { point: pid.to_string(), axis, role, s_components })
}

impl Scene {
    pub fn point(&self, id: &str) -> Option<&SingularPoint> {
        self.point_ix.get(id).map(|&i| &self.points[i])
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edge_ix.get(id).map(|&i| &self.edges[i])
    }

    pub fn face(&self, id: &str) -> Option<&Face> {
        self.face_ix.get(id).map(|&i| &self.faces[i])
    }

    pub fn try_point(&self, id: &str) -> Result<&SingularPoint, CoreError> {
        self.point(id).ok_or_else(|| CoreError::UnknownPoint(id.to_string()))
    }

    pub fn try_edge(&self, id: &str) -> Result<&Edge, CoreError> {
        self.edge(id).ok_or_else(|| CoreError::UnknownEdge(id.to_string()))
    }

    pub fn try_face(&self, id: &str) -> Result<&Face, CoreError> {
        self.face(id).ok_or_else(|| CoreError::UnknownFace(id.to_string()))
    }

    pub fn class(&self, p: &str) -> Result<&VertexClass, CoreError> {
        match self.classes.get(p) {
            Some(Ok(c)) => Ok(c),
            Some(Err(e)) => Err(e.clone()),
            None => Err(CoreError::UnknownPoint(p.to_string())),
        }
    }

    pub fn edge_end(&self, edge: &str, end: End) -> Result<&EdgeEnd, CoreError> {
        let pair = self.ends.get(edge).ok_or_else(|| CoreError::UnknownEdge(edge.to_string()))?;
        let r = match end {
            End::Alpha => &pair[0],
            End::Omega => &pair[1],
        };
        r.as_ref().map_err(Clone::clone)
    }

    /// The end of `edge` sitting at point `p`.
    pub fn end_at(&self, edge: &str, p: &str) -> Result<(End, &EdgeEnd), CoreError> {
        let e = self.try_edge(edge)?;
        if e.alpha == p {
            Ok((End::Alpha, self.edge_end(edge, End::Alpha)?))
        } else if e.omega == p {
            Ok((End::Omega, self.edge_end(edge, End::Omega)?))
        } else {
            Err(CoreError::EdgeEnd { edge: edge.to_string(), reason: format!("not adjacent to `{p}`") })
        }
    }

    pub fn out_edges(&self, p: &str) -> &[String] {
        self.out_edges.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn in_edges(&self, p: &str) -> &[String] {
        self.in_edges.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Edges adjacent to `p`, sorted by id.
    pub fn edges_at(&self, p: &str) -> Vec<&Edge> {
        let mut v: Vec<&Edge> = self.edges.iter().filter(|e| e.alpha == p || e.omega == p).collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    /// Restriction of the foliation to component `c` at `p`.
    pub fn restriction(&self, p: &str, c: &str) -> Result<Restriction, CoreError> {
        let pt = self.try_point(p)?;
        if !pt.components.iter().any(|x| x == c) {
            return Err(CoreError::LocalStructure { point: p.to_string(), reason: format!("not on `{c}`") });
        }
        self.class(p)?;
        Ok(restriction_of(pt, c))
    }

    pub fn is_s_prime(&self, p: &str) -> bool {
        match (self.point(p), self.class(p)) {
            (Some(pt), Ok(c)) if c.is_saddle() => c
                .w1
                .as_ref()
                .and_then(|w| pt.direction(w))
                .map(|d| d.in_skeleton())
                .unwrap_or(false),
            _ => false,
        }
    }

    /// Edges adjacent to `p` whose end at `p` has the given role.
    pub fn edges_with_role(&self, p: &str, role: EndRole) -> Vec<&Edge> {
        self.edges_at(p)
            .into_iter()
            .filter(|e| matches!(self.end_at(&e.id, p), Ok((_, end)) if end.role == role))
            .collect()
    }

    pub fn nodes(&self) -> Vec<&str> {
        self.points.iter().filter(|p| matches!(self.class(&p.id), Ok(c) if c.is_node())).map(|p| p.id.as_str()).collect()
    }

    pub fn transversal_saddles(&self) -> Vec<&str> {
        self.points
            .iter()
            .filter(|p| matches!(self.class(&p.id), Ok(c) if c.is_transversal()))
            .map(|p| p.id.as_str())
            .collect()
    }

    pub fn is_exceptional(&self) -> bool {
        self.faces.iter().any(|f| f.exceptional)
    }

    pub fn s_components_at(&self, p: &str) -> Vec<SComponent> {
        match self.class(p) {
            Ok(c) if c.is_transversal() => [SSign::Plus, SSign::Minus]
                .into_iter()
                .map(|s| SComponent { id: scomp_id(p, s), point: p.to_string(), sign: s })
                .collect(),
            _ => vec![SComponent { id: p.to_string(), point: p.to_string(), sign: SSign::Only }],
        }
    }

    pub fn all_s_components(&self) -> Vec<SComponent> {
        self.points.iter().flat_map(|p| self.s_components_at(&p.id)).collect()
    }

    pub fn s_component(&self, id: &str) -> Option<SComponent> {
        let base = id.trim_end_matches(['+', '-']);
        self.point(base)?;
        self.s_components_at(base).into_iter().find(|s| s.id == id)
    }

    /// Real eigenvalue of a direction; `None` for sign-only markers.
    pub fn eigenvalue(&self, p: &str, dir: &str) -> Option<&Q> {
        self.point(p)?.direction(dir)?.eigenvalue.real()
    }

    pub fn to_document(&self) -> SceneDocument {
        SceneDocument {
            schema: self.schema,
            name: if self.name.is_empty() { None } else { Some(self.name.clone()) },
            components: self
                .components
                .iter()
                .map(|c| RawComponent { id: c.id.clone(), label: c.label.clone() })
                .collect(),
            points: self
                .points
                .iter()
                .map(|p| RawPoint {
                    id: p.id.clone(),
                    components: p.components.clone(),
                    directions: p
                        .directions
                        .iter()
                        .map(|d| RawDirection {
                            id: d.id.clone(),
                            eigenvalue: match &d.eigenvalue {
                                Eigenvalue::Real(x) => RawEigenvalue::Rational(RationalLit {
                                    num: x.numer().to_i64().expect("fits i64"),
                                    den: x.denom().to_i64().expect("fits i64"),
                                }),
                                Eigenvalue::RealPartSign(s) => RawEigenvalue::Sign(SignLit { sign: *s }),
                            },
                            containment: d.containment.clone(),
                        })
                        .collect(),
                    dim_w: p.dim_w,
                    class: p.declared_class,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| RawEdge {
                    id: e.id.clone(),
                    alpha: e.alpha.clone(),
                    omega: e.omega.clone(),
                    kind: e.kind,
                    components: e.components.clone(),
                    alpha_direction: e.alpha_direction.clone(),
                    omega_direction: e.omega_direction.clone(),
                    side_at_alpha: e.side_at_alpha,
                    side_at_omega: e.side_at_omega,
                })
                .collect(),
            faces: self
                .faces
                .iter()
                .map(|f| RawFace {
                    id: f.id.clone(),
                    component: f.component.clone(),
                    alpha: f.alpha.clone(),
                    omega: f.omega.clone(),
                    boundary_paths: f.boundary_paths.clone(),
                    exceptional: f.exceptional,
                })
                .collect(),
            injections: self.injections.clone(),
        }
    }
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VertexKind::DNodeAttractor => "D-node-attractor",
            VertexKind::DNodeRepeller => "D-node-repeller",
            VertexKind::TransversalSaddle => "transversal-saddle",
            VertexKind::TangentialSaddle => "tangential-saddle",
        };
        f.write_str(s)
    }
}

pub fn classify_vertex(scene: &Scene, p: &str) -> Result<VertexClass, CoreError> {
    scene.class(p).cloned()
}

pub fn s_components_at(scene: &Scene, p: &str) -> Vec<SComponent> {
    scene.s_components_at(p)
}
