//! Symbolic distinguished fattenings: chimneys per s-component, tubes per
//! edge, and the door/jamb records that glue them.
//!
//! Ids: unfree door `U:{edge}@{ν}`, face door `F:{face}@{ν}`, transversal
//! free door `T:{ν}`; jambs `J:{face}/{k}@{ν}` at a face limit,
//! `J:{face}/{k}.{i}@{ν}` at an interior vertex of boundary path `k`, and
//! `J:{edge}@{ν}` beside a transversal free door.

mod frontier;
mod stains;

pub use frontier::*;
pub use stains::*;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{face_limits, lengths, GraphError};
use crate::marks::MarkError;
use crate::model::{CoreError, End, EndRole, Scene, VertexKind};
use crate::report::ValidationReport;
use crate::validate::validate_all;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FattenError {
    #[error("scene fails validation ({0} errors)")]
    ValidationFailed(usize),
    #[error("fattening is not distinguished: {0}")]
    NotDistinguished(String),
    #[error("good saturations do not hold ({0} errors)")]
    GoodSaturationsRequired(usize),
    #[error("inconsistent door bookkeeping: {0}")]
    Bookkeeping(String),
    #[error(transparent)]
    Mark(#[from] MarkError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FenceTopology {
    Disc,
    Cylinder,
}

/// Whether the flow crosses a frontier piece into (`In`) or out of the chimney.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flow {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chimney {
    pub s_component: String,
    pub point: String,
    pub fence_topology: FenceTopology,
    pub doorjambs: u8,
    pub lid: bool,
    pub fence_direction: Flow,
    pub lid_direction: Flow,
    pub doors: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Fence,
    Lid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Freedom {
    Free,
    Unfree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "id")]
pub enum Association {
    Edge(String),
    Face(String),
    Saddle(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Door {
    pub id: String,
    pub chimney: String,
    pub location: Location,
    pub freedom: Freedom,
    pub direction: Flow,
    pub association: Association,
    pub jambs: Vec<String>,
    pub handrail: String,
    /// Shared by the two doors of an equal-base pair.
    pub base: Option<String>,
    pub center: Option<String>,
}

impl Door {
    pub fn is_free(&self) -> bool {
        self.freedom == Freedom::Free
    }

    pub fn face(&self) -> Option<&str> {
        match &self.association {
            Association::Face(f) => Some(f),
            _ => None,
        }
    }
}

/// A doorjamb shared by two doors of one chimney. Fixed when both doors are
/// unfree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Jamb {
    pub id: String,
    pub chimney: String,
    pub doors: [String; 2],
    pub fixed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tube {
    pub edge: String,
    pub out_doors: Vec<String>,
    pub in_doors: Vec<String>,
}

/// One step of the filtration recursion: the chimneys at vertices of length
/// `level` and the tubes leaving them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub level: usize,
    pub chimneys: Vec<String>,
    pub tubes: Vec<String>,
    pub predistinguished: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FatteningModel<'a> {
    #[serde(skip)]
    pub scene: &'a Scene,
    pub chimneys: BTreeMap<String, Chimney>,
    pub doors: BTreeMap<String, Door>,
    pub jambs: BTreeMap<String, Jamb>,
    pub tubes: BTreeMap<String, Tube>,
    pub stages: Vec<Stage>,
    pub predistinguished: bool,
    pub distinguished: bool,
    pub defects: Vec<String>,
}

pub fn unfree_door_id(edge: &str, nu: &str) -> String {
    format!("U:{edge}@{nu}")
}

pub fn face_door_id(face: &str, nu: &str) -> String {
    format!("F:{face}@{nu}")
}

pub fn saddle_door_id(nu: &str) -> String {
    format!("T:{nu}")
}

fn bk(msg: String) -> FattenError {
    FattenError::Bookkeeping(msg)
}

impl<'a> FatteningModel<'a> {
    pub fn door(&self, id: &str) -> Option<&Door> {
        self.doors.get(id)
    }

    pub fn free_doors(&self) -> impl Iterator<Item = &Door> {
        self.doors.values().filter(|d| d.is_free())
    }

    pub fn unfree_doors_at(&self, nu: &str) -> usize {
        self.doors.values().filter(|d| d.chimney == nu && !d.is_free()).count()
    }

    fn new_door(&mut self, door: Door) -> Result<(), FattenError> {
        if self.doors.contains_key(&door.id) {
            return Err(bk(format!("door `{}` created twice", door.id)));
        }
        self.doors.insert(door.id.clone(), door);
        Ok(())
    }

    fn new_jamb(&mut self, id: String, chimney: &str, a: String, b: String) -> Result<(), FattenError> {
        for d in [&a, &b] {
            let door = self.doors.get_mut(d).ok_or_else(|| bk(format!("jamb `{id}` references missing door `{d}`")))?;
            if door.chimney != chimney {
                return Err(bk(format!("jamb `{id}` joins door `{d}` of another chimney")));
            }
            door.jambs.push(id.clone());
        }
        let fixed = !self.doors[&a].is_free() && !self.doors[&b].is_free();
        self.jambs.insert(id.clone(), Jamb { id, chimney: chimney.to_string(), doors: [a, b], fixed });
        Ok(())
    }

    /// The other door sharing jamb `jamb` with `door`.
    pub fn across(&self, jamb: &str, door: &str) -> Option<&str> {
        let j = self.jambs.get(jamb)?;
        if j.doors[0] == door {
            Some(&j.doors[1])
        } else if j.doors[1] == door {
            Some(&j.doors[0])
        } else {
            None
        }
    }
}

fn single(list: &[String], what: impl FnOnce() -> String) -> Result<String, FattenError> {
    match list {
        [one] => Ok(one.clone()),
        _ => Err(bk(what())),
    }
}

/// Builds the distinguished fattening of a validated scene.
pub fn build_distinguished(scene: &Scene) -> Result<FatteningModel<'_>, FattenError> {
    let report = validate_all(scene);
    if !report.passed {
        return Err(FattenError::ValidationFailed(report.errors().count()));
    }
    let mut m = FatteningModel {
        scene,
        chimneys: BTreeMap::new(),
        doors: BTreeMap::new(),
        jambs: BTreeMap::new(),
        tubes: BTreeMap::new(),
        stages: Vec::new(),
        predistinguished: false,
        distinguished: false,
        defects: Vec::new(),
    };

    for nu in scene.all_s_components() {
        let class = scene.class(&nu.point)?;
        let node = class.is_node();
        let fence_direction = match class.kind {
            VertexKind::DNodeAttractor => Flow::In,
            VertexKind::DNodeRepeller => Flow::Out,
            _ if class.w2_stable() == Some(true) => Flow::In,
            _ => Flow::Out,
        };
        let lid_direction = match (class.is_3d_saddle, fence_direction) {
            (false, d) => d,
            (true, Flow::In) => Flow::Out,
            (true, Flow::Out) => Flow::In,
        };
        m.chimneys.insert(
            nu.id.clone(),
            Chimney {
                s_component: nu.id.clone(),
                point: nu.point.clone(),
                fence_topology: if node { FenceTopology::Cylinder } else { FenceTopology::Disc },
                doorjambs: if node { 0 } else { 2 },
                lid: true,
                fence_direction,
                lid_direction,
                doors: Vec::new(),
            },
        );
    }

    for e in &scene.edges {
        let mut tube = Tube { edge: e.id.clone(), out_doors: Vec::new(), in_doors: Vec::new() };
        for end in [End::Alpha, End::Omega] {
            let ee = scene.edge_end(&e.id, end)?;
            let saddle = scene.class(&ee.point)?.is_saddle();
            for nu in &ee.s_components {
                let id = unfree_door_id(&e.id, nu);
                m.new_door(Door {
                    id: id.clone(),
                    chimney: nu.clone(),
                    location: if saddle && ee.role == EndRole::W1 { Location::Lid } else { Location::Fence },
                    freedom: Freedom::Unfree,
                    direction: if end == End::Alpha { Flow::Out } else { Flow::In },
                    association: Association::Edge(e.id.clone()),
                    jambs: Vec::new(),
                    handrail: format!("H:{id}"),
                    base: (ee.s_components.len() == 2).then(|| format!("B:{}@{}", e.id, ee.point)),
                    center: Some(e.id.clone()),
                })?;
                if end == End::Alpha {
                    tube.out_doors.push(id);
                } else {
                    tube.in_doors.push(id);
                }
            }
        }
        m.tubes.insert(e.id.clone(), tube);
    }

    for p in scene.transversal_saddles() {
        for nu in scene.s_components_at(p) {
            let id = saddle_door_id(&nu.id);
            let direction = m.chimneys[&nu.id].fence_direction;
            m.new_door(Door {
                id: id.clone(),
                chimney: nu.id.clone(),
                location: Location::Fence,
                freedom: Freedom::Free,
                direction,
                association: Association::Saddle(p.to_string()),
                jambs: Vec::new(),
                handrail: format!("H:{id}"),
                base: Some(format!("B:{p}")),
                center: None,
            })?;
            for sigma in scene.edges_with_role(p, EndRole::W2) {
                m.new_jamb(format!("J:{}@{}", sigma.id, nu.id), &nu.id, unfree_door_id(&sigma.id, &nu.id), id.clone())?;
            }
        }
    }

    for f in &scene.faces {
        let (a, w) = face_limits(scene, &f.id)?;
        for (nu, direction) in [(&a, Flow::Out), (&w, Flow::In)] {
            let id = face_door_id(&f.id, &nu.id);
            m.new_door(Door {
                id: id.clone(),
                chimney: nu.id.clone(),
                location: Location::Fence,
                freedom: Freedom::Free,
                direction,
                association: Association::Face(f.id.clone()),
                jambs: Vec::new(),
                handrail: format!("H:{id}"),
                base: None,
                center: None,
            })?;
        }
        for (k, path) in f.boundary_paths.iter().enumerate() {
            let (Some(first), Some(last)) = (path.first(), path.last()) else { continue };
            m.new_jamb(format!("J:{}/{k}@{}", f.id, a.id), &a.id, unfree_door_id(first, &a.id), face_door_id(&f.id, &a.id))?;
            m.new_jamb(format!("J:{}/{k}@{}", f.id, w.id), &w.id, unfree_door_id(last, &w.id), face_door_id(&f.id, &w.id))?;
            for i in 1..path.len() {
                let into = &scene.edge_end(&path[i - 1], End::Omega)?.s_components;
                let from = &scene.edge_end(&path[i], End::Alpha)?.s_components;
                let common: Vec<String> = into.iter().filter(|s| from.contains(s)).cloned().collect();
                let nu = single(&common, || format!("face `{}` path {k} turns between s-components at step {i}", f.id))?;
                m.new_jamb(
                    format!("J:{}/{k}.{i}@{nu}", f.id),
                    &nu,
                    unfree_door_id(&path[i - 1], &nu),
                    unfree_door_id(&path[i], &nu),
                )?;
            }
        }
    }

    let ids: Vec<(String, String)> = m.doors.values().map(|d| (d.chimney.clone(), d.id.clone())).collect();
    for (c, d) in ids {
        m.chimneys.get_mut(&c).ok_or_else(|| bk(format!("door `{d}` at unknown chimney `{c}`")))?.doors.push(d);
    }

    let len = lengths(scene)?;
    let top = len.values().copied().max().unwrap_or(0);
    for level in 0..=top {
        let chimneys: Vec<String> = m
            .chimneys
            .values()
            .filter(|c| len.get(&c.point) == Some(&level))
            .map(|c| c.s_component.clone())
            .collect();
        let tubes: Vec<String> = scene.edges.iter().filter(|e| len.get(&e.alpha) == Some(&level)).map(|e| e.id.clone()).collect();
        let predistinguished = tubes.iter().all(|t| {
            let om = &scene.edge(t).unwrap().omega;
            len.get(om).is_some_and(|&l| l < level)
        });
        m.stages.push(Stage { level, chimneys, tubes, predistinguished });
    }

    m.defects = distinguished_defects(&m);
    m.predistinguished = m.stages.iter().all(|s| s.predistinguished);
    m.distinguished = m.predistinguished && m.defects.is_empty();
    Ok(m)
}

fn distinguished_defects(m: &FatteningModel) -> Vec<String> {
    let scene = m.scene;
    let mut out = Vec::new();
    let mut used: BTreeMap<&str, &str> = BTreeMap::new();
    for t in m.tubes.values() {
        let e = scene.edge(&t.edge).unwrap();
        for (doors, end) in [(&t.out_doors, End::Alpha), (&t.in_doors, End::Omega)] {
            let p = e.endpoint(end);
            if doors.is_empty() {
                out.push(format!("(b) tube `{}` has no door at `{p}`", t.edge));
            }
            for d in doors {
                if let Some(prev) = used.insert(d, &t.edge) {
                    out.push(format!("(a) door `{d}` used by tubes `{prev}` and `{}`", t.edge));
                }
                match m.doors.get(d) {
                    Some(door) if m.chimneys[&door.chimney].point == p => {}
                    _ => out.push(format!("(b) tube `{}` ends in `{d}`, not a door at `{p}`", t.edge)),
                }
            }
            let at_tr = scene.class(p).is_ok_and(|c| c.is_transversal());
            let w2 = scene.edge_end(&t.edge, end).is_ok_and(|x| x.role == EndRole::W2);
            if at_tr && w2 {
                let bases: Vec<_> = doors.iter().filter_map(|d| m.doors.get(d).and_then(|x| x.base.clone())).collect();
                if doors.len() != 2 || bases.len() != 2 || bases[0] != bases[1] {
                    out.push(format!("(c) tube `{}` lacks an equal-base pair at `{p}`", t.edge));
                }
            }
        }
    }
    for c in m.chimneys.values() {
        let meeting = scene
            .edges
            .iter()
            .flat_map(|e| [End::Alpha, End::Omega].map(|end| scene.edge_end(&e.id, end)))
            .filter(|x| x.as_ref().is_ok_and(|x| x.s_components.contains(&c.s_component)))
            .count();
        if meeting != m.unfree_doors_at(&c.s_component) {
            out.push(format!("(d) chimney `{}` has {} unfree doors for {meeting} edges", c.s_component, m.unfree_doors_at(&c.s_component)));
        }
        if (c.fence_topology == FenceTopology::Cylinder) != scene.class(&c.point).is_ok_and(|k| k.is_node()) {
            out.push(format!("chimney `{}` has the wrong fence topology", c.s_component));
        }
    }
    for f in &scene.faces {
        let n = m.free_doors().filter(|d| d.face() == Some(&f.id)).count();
        if n != 2 {
            out.push(format!("face `{}` has {n} free doors", f.id));
        }
    }
    for p in scene.transversal_saddles() {
        for nu in scene.s_components_at(p) {
            let n = m.free_doors().filter(|d| d.chimney == nu.id && d.association == Association::Saddle(p.to_string())).count();
            if n != 1 {
                out.push(format!("s-component `{}` has {n} transversal free doors", nu.id));
            }
        }
    }
    out
}

/// Free doors, sorted by id.
pub fn enumerate_free_doors<'m>(model: &'m FatteningModel) -> Result<Vec<&'m Door>, FattenError> {
    require_distinguished(model)?;
    Ok(model.free_doors().collect())
}

fn require_distinguished(model: &FatteningModel) -> Result<(), FattenError> {
    if model.distinguished {
        Ok(())
    } else {
        Err(FattenError::NotDistinguished(model.defects.join("; ")))
    }
}

/// Structural report of a model, for the `fatten` command.
pub fn model_report(model: &FatteningModel) -> ValidationReport {
    let mut r = ValidationReport::new();
    for d in &model.defects {
        r.error("fatten.distinguished", &[], d.clone());
    }
    r
}
