//! Point types on the transversal frontier and the extended support.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use super::stains::{check_good_saturations, face_doors, stain_itineraries, Generator, StainItinerary};
use super::{require_distinguished, saddle_door_id, FattenError, FatteningModel, Flow};
use crate::model::EndRole;
use crate::report::ValidationReport;

/// Type of a frontier point: where each side of its leaf lies (exterior,
/// interior or tangential frontier), in flow order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointType {
    EI,
    IE,
    ET,
    TE,
    TI,
    IT,
    TT,
    EE,
    II,
}

impl PointType {
    pub fn as_str(self) -> &'static str {
        match self {
            PointType::EI => "e-i",
            PointType::IE => "i-e",
            PointType::ET => "e-t",
            PointType::TE => "t-e",
            PointType::TI => "t-i",
            PointType::IT => "i-t",
            PointType::TT => "t-t",
            PointType::EE => "e-e",
            PointType::II => "i-i",
        }
    }

    fn crossing(dir: Flow) -> PointType {
        match dir {
            Flow::In => PointType::EI,
            Flow::Out => PointType::IE,
        }
    }

    fn rail(dir: Flow) -> PointType {
        match dir {
            Flow::In => PointType::ET,
            Flow::Out => PointType::TE,
        }
    }

    fn jamb(dir: Flow) -> PointType {
        match dir {
            Flow::In => PointType::TI,
            Flow::Out => PointType::IT,
        }
    }
}

impl Serialize for PointType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Part {
    Interior,
    Handrail,
    Jamb,
    Boundary,
    Line,
    Ip,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub id: String,
    pub part: Part,
    #[serde(rename = "type")]
    pub ty: PointType,
    pub meets_i_p: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TtPoint {
    pub door: String,
    pub jamb: String,
    pub on_i_p: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PieceKind {
    FreeDoor,
    Lid,
}

/// Typed partition of one free door or node lid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrontierPiece {
    pub id: String,
    pub kind: PieceKind,
    pub chimney: String,
    pub segments: Vec<Segment>,
    pub tt_points: Vec<TtPoint>,
}

impl FrontierPiece {
    pub fn types(&self) -> impl Iterator<Item = PointType> + '_ {
        self.segments.iter().map(|s| s.ty).chain(self.tt_points.iter().map(|_| PointType::TT))
    }
}

fn seg(id: String, part: Part, ty: PointType) -> Segment {
    Segment { id, part, ty, meets_i_p: false }
}

pub fn lid_id(nu: &str) -> String {
    format!("L:{nu}")
}

fn lid_piece(model: &FatteningModel, nu: &str) -> Result<FrontierPiece, FattenError> {
    let c = &model.chimneys[nu];
    let class = model.scene.class(&c.point)?;
    let id = lid_id(nu);
    let boundary = if class.is_3d_saddle { PointType::rail(c.lid_direction) } else { PointType::crossing(c.lid_direction) };
    Ok(FrontierPiece {
        id: id.clone(),
        kind: PieceKind::Lid,
        chimney: nu.to_string(),
        segments: vec![
            seg(format!("{id}:interior"), Part::Interior, PointType::crossing(c.lid_direction)),
            seg(format!("{id}:boundary"), Part::Boundary, boundary),
        ],
        tt_points: Vec::new(),
    })
}

fn door_piece(model: &FatteningModel, door: &str) -> FrontierPiece {
    let d = &model.doors[door];
    let mut segments = vec![
        seg(format!("{door}:interior"), Part::Interior, PointType::crossing(d.direction)),
        seg(d.handrail.clone(), Part::Handrail, PointType::rail(d.direction)),
    ];
    let mut tt_points = Vec::new();
    for j in &d.jambs {
        segments.push(seg(j.clone(), Part::Jamb, PointType::jamb(d.direction)));
        tt_points.push(TtPoint { door: door.to_string(), jamb: j.clone(), on_i_p: false });
    }
    FrontierPiece { id: door.to_string(), kind: PieceKind::FreeDoor, chimney: d.chimney.clone(), segments, tt_points }
}

/// Typed partition of every free door and every node lid.
pub fn classify_fattening_frontier(model: &FatteningModel) -> Result<Vec<FrontierPiece>, FattenError> {
    require_distinguished(model)?;
    let mut out: Vec<FrontierPiece> = model.free_doors().map(|d| door_piece(model, &d.id)).collect();
    for c in model.chimneys.values() {
        if model.scene.class(&c.point)?.is_node() {
            out.push(lid_piece(model, &c.s_component)?);
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscKind {
    Lid,
    FreeDoorPair,
}

/// The transversal disc `T_p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disc {
    pub point: String,
    pub kind: DiscKind,
    pub dim_w: u8,
    pub pieces: Vec<String>,
    pub segments: Vec<Segment>,
    pub tt_points: Vec<TtPoint>,
}

impl Disc {
    pub fn types(&self) -> impl Iterator<Item = PointType> + '_ {
        self.segments.iter().map(|s| s.ty).chain(self.tt_points.iter().map(|_| PointType::TT))
    }

    /// Types of the points of `∂T_p`.
    pub fn boundary_types(&self) -> impl Iterator<Item = PointType> + '_ {
        self.segments
            .iter()
            .filter(|s| matches!(s.part, Part::Boundary | Part::Handrail | Part::Line))
            .map(|s| s.ty)
            .chain(self.tt_points.iter().map(|_| PointType::TT))
    }
}

/// A face's out-door absorbed onto its in-door.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Absorption {
    pub face: String,
    pub out_door: String,
    pub in_door: String,
    pub jambs: Vec<(String, String)>,
    pub handrail: (String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrontierReport {
    pub discs: Vec<Disc>,
    pub absorbed: Vec<Absorption>,
    pub absorbed_doors: usize,
}

impl FrontierReport {
    pub fn all_types(&self) -> impl Iterator<Item = PointType> + '_ {
        self.discs.iter().flat_map(|d| d.types())
    }
}

fn absorption(model: &FatteningModel, face: &str) -> Result<Absorption, FattenError> {
    let (out_door, in_door) = face_doors(model, face).ok_or_else(|| super::bk(format!("face `{face}` lacks its door pair")))?;
    let (o, i) = (&model.doors[&out_door], &model.doors[&in_door]);
    let key = |j: &str| j.split('@').next().unwrap_or(j).to_string();
    let ins: BTreeMap<String, String> = i.jambs.iter().map(|j| (key(j), j.clone())).collect();
    let mut jambs = Vec::new();
    for j in &o.jambs {
        let partner = ins.get(&key(j)).ok_or_else(|| super::bk(format!("jamb `{j}` has no partner on `{in_door}`")))?;
        jambs.push((j.clone(), partner.clone()));
    }
    Ok(Absorption { face: face.to_string(), handrail: (o.handrail.clone(), i.handrail.clone()), out_door, in_door, jambs })
}

fn saddle_disc(model: &FatteningModel, p: &str) -> Result<Disc, FattenError> {
    let scene = model.scene;
    let comps = scene.s_components_at(p);
    let doors: Vec<String> = comps.iter().map(|nu| saddle_door_id(&nu.id)).collect();
    let dir = model.doors[&doors[0]].direction;
    let mut segments = Vec::new();
    let mut tt_points = Vec::new();
    for d in &doors {
        let door = &model.doors[d];
        segments.push(seg(format!("{d}:interior"), Part::Interior, PointType::crossing(dir)));
        segments.push(seg(door.handrail.clone(), Part::Handrail, PointType::rail(dir)));
        for j in &door.jambs {
            tt_points.push(TtPoint { door: d.clone(), jamb: j.clone(), on_i_p: false });
        }
    }
    for (k, sigma) in scene.edges_with_role(p, EndRole::W2).iter().enumerate() {
        let mut line = seg(format!("L{}:{p}", k + 1), Part::Line, PointType::jamb(dir));
        line.meets_i_p = true;
        segments.push(line);
        debug_assert!(comps.iter().all(|nu| model.jambs.contains_key(&format!("J:{}@{}", sigma.id, nu.id))));
    }
    segments.push(seg(format!("I:{p}"), Part::Ip, PointType::crossing(dir)));
    Ok(Disc { point: p.to_string(), kind: DiscKind::FreeDoorPair, dim_w: 2, pieces: doors, segments, tt_points })
}

/// Absorbs every face door pair into the tangential frontier and reports the
/// remaining transversal discs.
pub fn extend_support(model: &FatteningModel) -> Result<FrontierReport, FattenError> {
    require_distinguished(model)?;
    let gs = check_good_saturations(model)?;
    if !gs.passed {
        return Err(FattenError::GoodSaturationsRequired(gs.errors().count()));
    }
    let scene = model.scene;
    let absorbed = scene.faces.iter().map(|f| absorption(model, &f.id)).collect::<Result<Vec<_>, _>>()?;
    let mut discs = Vec::new();
    for c in model.chimneys.values() {
        let class = scene.class(&c.point)?;
        if class.is_node() {
            let piece = lid_piece(model, &c.s_component)?;
            discs.push(Disc {
                point: c.point.clone(),
                kind: DiscKind::Lid,
                dim_w: class.dim_w.unwrap_or(3),
                pieces: vec![piece.id],
                segments: piece.segments,
                tt_points: Vec::new(),
            });
        }
    }
    for p in scene.transversal_saddles() {
        discs.push(saddle_disc(model, p)?);
    }
    discs.sort_by(|a, b| a.point.cmp(&b.point));
    Ok(FrontierReport { absorbed_doors: 2 * absorbed.len(), discs, absorbed })
}

/// Jamb-slot disjointness of `{Sat(W(p))} ∪ {Sat(Lⁱ_p ∖ I_p)}` over `p ∈ S_tr`.
pub fn disjoint_family_report(model: &FatteningModel) -> Result<ValidationReport, FattenError> {
    let scene = model.scene;
    let its = stain_itineraries(model)?;
    let mut members: Vec<(String, Vec<&StainItinerary>)> = Vec::new();
    for p in scene.transversal_saddles() {
        let w: Vec<_> = its.iter().filter(|i| matches!(&i.generator, Generator::FixedMark { point, .. } if point == p)).collect();
        members.push((format!("W({p})"), w));
        for (k, sigma) in scene.edges_with_role(p, EndRole::W2).iter().enumerate() {
            let line: Vec<String> = scene.s_components_at(p).iter().map(|nu| format!("J:{}@{}", sigma.id, nu.id)).collect();
            let ls: Vec<_> = its
                .iter()
                .filter(|i| matches!(&i.generator, Generator::FreeDoorJamb { jamb, .. } if line.contains(jamb)))
                .collect();
            members.push((format!("L{}({p})", k + 1), ls));
        }
    }
    let mut r = ValidationReport::new();
    for (a, (na, ia)) in members.iter().enumerate() {
        for (nb, ib) in &members[a + 1..] {
            let slots_a: Vec<&str> = ia.iter().flat_map(|i| i.jamb_slots()).collect();
            for j in ib.iter().flat_map(|i| i.jamb_slots()) {
                if slots_a.contains(&j) {
                    r.error("disjoint.family", &[na, nb, j], "saturations share a jamb slot");
                }
            }
            let doors = |s: &[&StainItinerary]| -> Vec<String> { s.iter().flat_map(|i| i.stops.iter().map(|x| x.door.clone())).collect() };
            let da = doors(ia);
            if doors(ib).iter().any(|d| da.contains(d)) {
                r.note("disjoint.closure", &[na, nb], "closures meet in a shared door");
            }
        }
    }
    Ok(r)
}
