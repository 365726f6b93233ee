//! Stain itineraries and the good-saturation consequences.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{unfree_door_id, Association, FattenError, FatteningModel, Flow};
use crate::marks::{pi_paths, theta_path};
use crate::model::{End, InjectionKind};
use crate::report::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Generator {
    /// Fixed mark at a transversal saddle on one of its W² edges.
    FixedMark { point: String, edge: String },
    FreeDoorJamb { door: String, jamb: String },
}

impl Generator {
    pub fn id(&self) -> String {
        match self {
            Generator::FixedMark { point, edge } => format!("fixed:{point}:{edge}"),
            Generator::FreeDoorJamb { jamb, .. } => format!("jamb:{jamb}"),
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, Generator::FixedMark { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopLabel {
    WellPositioned,
    UnfixedDoorjamb,
    Handrail,
    Injected,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "id")]
pub enum Slot {
    Interior,
    Handrail,
    Jamb(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stop {
    pub chimney: String,
    pub door: String,
    pub slot: Slot,
    pub label: StopLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StainItinerary {
    pub id: String,
    pub generator: Generator,
    pub stops: Vec<Stop>,
    pub terminal: String,
}

impl StainItinerary {
    pub fn jamb_slots(&self) -> BTreeSet<&str> {
        self.stops
            .iter()
            .filter_map(|s| match &s.slot {
                Slot::Jamb(j) => Some(j.as_str()),
                _ => None,
            })
            .collect()
    }
}

/// Arrival stops along `path` traversed in its view.
fn path_stops(model: &FatteningModel, path: &[String], reversed: bool) -> Result<(Vec<Stop>, String), FattenError> {
    let scene = model.scene;
    let mut stops = Vec::new();
    let mut last = String::new();
    for e in path {
        let end = if reversed { End::Alpha } else { End::Omega };
        let ee = scene.edge_end(e, end)?;
        for nu in &ee.s_components {
            stops.push(Stop {
                chimney: nu.clone(),
                door: unfree_door_id(e, nu),
                slot: Slot::Interior,
                label: StopLabel::WellPositioned,
            });
        }
        last = ee.point.clone();
    }
    Ok((stops, last))
}

fn fixed_marks(model: &FatteningModel) -> Result<Vec<StainItinerary>, FattenError> {
    let scene = model.scene;
    let mut out = Vec::new();
    for p in scene.transversal_saddles() {
        let pi = pi_paths(scene, p)?;
        for path in &pi.paths {
            let (stops, terminal) = path_stops(model, path, pi.reversed)?;
            let generator = Generator::FixedMark { point: p.to_string(), edge: path[0].clone() };
            out.push(StainItinerary { id: generator.id(), generator, stops, terminal });
        }
    }
    Ok(out)
}

fn jamb_itinerary(model: &FatteningModel, door_id: &str, jamb: &str) -> Result<Option<StainItinerary>, FattenError> {
    let scene = model.scene;
    let door = &model.doors[door_id];
    let chimney = &model.chimneys[&door.chimney];
    let saddle = scene.class(&chimney.point)?.is_saddle();
    let generator = Generator::FreeDoorJamb { door: door_id.to_string(), jamb: jamb.to_string() };
    let (stops, terminal) = match (chimney.fence_direction, &door.association) {
        (Flow::In, _) if saddle => {
            let t = theta_path(scene, &chimney.s_component)?;
            path_stops(model, &t.path, t.reversed)?
        }
        (Flow::In, _) => return Ok(None),
        (Flow::Out, Association::Saddle(p)) => {
            let beside = model.across(jamb, door_id).ok_or_else(|| super::bk(format!("`{jamb}` not at `{door_id}`")))?;
            let Association::Edge(sigma) = &model.doors[beside].association else {
                return Err(super::bk(format!("`{jamb}` is not beside a W² door")));
            };
            let e = scene.try_edge(sigma)?;
            let far = if e.alpha == *p { End::Omega } else { End::Alpha };
            let ee = scene.edge_end(sigma, far)?;
            let stops = ee
                .s_components
                .iter()
                .map(|nu| Stop { chimney: nu.clone(), door: unfree_door_id(sigma, nu), slot: Slot::Handrail, label: StopLabel::Handrail })
                .collect();
            (stops, ee.point.clone())
        }
        (Flow::Out, Association::Face(f)) => {
            let face = scene.try_face(f)?;
            let k: usize = jamb
                .strip_prefix(&format!("J:{f}/"))
                .and_then(|r| r.split('@').next())
                .and_then(|k| k.parse().ok())
                .ok_or_else(|| super::bk(format!("`{jamb}` is not a face-limit jamb")))?;
            let path = &face.boundary_paths[k];
            let mut stops = Vec::new();
            let mut terminal = String::new();
            for (i, e) in path.iter().enumerate() {
                let ee = scene.edge_end(e, End::Omega)?;
                terminal = ee.point.clone();
                if i + 1 == path.len() {
                    let w = model.doors.values().find(|d| d.face() == Some(f) && d.direction == Flow::In);
                    let w = w.ok_or_else(|| super::bk(format!("face `{f}` has no in-door")))?;
                    stops.push(Stop {
                        chimney: w.chimney.clone(),
                        door: unfree_door_id(e, &w.chimney),
                        slot: Slot::Jamb(format!("J:{f}/{k}@{}", w.chimney)),
                        label: StopLabel::UnfixedDoorjamb,
                    });
                } else {
                    let nu = interior_nu(model, f, k, i + 1)?;
                    stops.push(Stop { chimney: nu.clone(), door: unfree_door_id(e, &nu), slot: Slot::Handrail, label: StopLabel::Handrail });
                }
            }
            (stops, terminal)
        }
        (Flow::Out, Association::Edge(_)) => return Ok(None),
    };
    Ok(Some(StainItinerary { id: generator.id(), generator, stops, terminal }))
}

fn interior_nu(model: &FatteningModel, face: &str, k: usize, i: usize) -> Result<String, FattenError> {
    let prefix = format!("J:{face}/{k}.{i}@");
    model
        .jambs
        .keys()
        .find_map(|j| j.strip_prefix(&prefix).map(str::to_string))
        .ok_or_else(|| super::bk(format!("missing jamb {prefix}…")))
}

/// Every stain itinerary, plus the stops added by the scene's injections.
pub fn stain_itineraries(model: &FatteningModel) -> Result<Vec<StainItinerary>, FattenError> {
    let mut out = fixed_marks(model)?;
    for door in model.free_doors() {
        for j in &door.jambs {
            if let Some(it) = jamb_itinerary(model, &door.id, j)? {
                out.push(it);
            }
        }
    }
    for inj in &model.scene.injections {
        let Some(door) = inj.door.as_ref().and_then(|d| model.doors.get(d)) else { continue };
        let slot = match inj.kind {
            InjectionKind::SharedJamb => match door.jambs.first() {
                Some(j) => Slot::Jamb(j.clone()),
                None => continue,
            },
            InjectionKind::FreeDoorContact => Slot::Interior,
        };
        for it in out.iter_mut().filter(|it| inj.generators.contains(&it.id)) {
            it.stops.push(Stop { chimney: door.chimney.clone(), door: door.id.clone(), slot: slot.clone(), label: StopLabel::Injected });
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

fn generator_door<'m>(model: &'m FatteningModel, it: &StainItinerary) -> Option<&'m super::Door> {
    match &it.generator {
        Generator::FreeDoorJamb { door, .. } => model.doors.get(door),
        Generator::FixedMark { .. } => None,
    }
}

/// `(gsfm)`, `(gsfd)` and `(gsfmfd)` over the stain itineraries.
pub fn check_good_saturations(model: &FatteningModel) -> Result<ValidationReport, FattenError> {
    let mut r = ValidationReport::new();
    let its = stain_itineraries(model)?;
    let ids: BTreeSet<String> = its.iter().map(|i| i.id.clone()).collect();
    for inj in &model.scene.injections {
        for g in &inj.generators {
            if !ids.contains(g) {
                r.error("gsat.injection", &[g], "injection names an unknown generator");
            }
        }
        match &inj.door {
            Some(d) if model.doors.contains_key(d) => {}
            Some(d) => r.error("gsat.injection", &[d], "injection names an unknown door"),
            None => r.error("gsat.injection", &[], "injection without a door"),
        }
    }

    for it in &its {
        let mut seen = BTreeSet::new();
        for s in &it.stops {
            if !seen.insert(&s.chimney) && s.label != StopLabel::Injected {
                r.error("gsat.precondition", &[&it.id, &s.chimney], "itinerary revisits a chimney");
            }
        }
        if it.generator.is_fixed() {
            let Generator::FixedMark { point, .. } = &it.generator else { unreachable!() };
            for s in &it.stops {
                let d = &model.doors[&s.door];
                if d.is_free() && model.chimneys[&d.chimney].point != *point {
                    r.error("gsat.gsfmfd", &[&it.id, &d.id], "case gsfmfd: fixed-mark stain reaches a foreign free door");
                }
            }
        } else if let Some(own) = generator_door(model, it) {
            for s in &it.stops {
                let Slot::Jamb(j) = &s.slot else { continue };
                let jamb = &model.jambs[j];
                for d in &jamb.doors {
                    let other = &model.doors[d];
                    if !other.is_free() || other.id == own.id {
                        continue;
                    }
                    if other.face().is_some() && other.face() == own.face() {
                        r.note("gsat.sanctioned", &[&it.id, &other.id], "out-door to in-door pairing of one face");
                    } else {
                        r.error("gsat.gsfd", &[&it.id, &other.id], "case gsfd: free-door stain lands in a foreign free-door jamb");
                    }
                }
            }
        }
    }

    let mut by_slot: BTreeMap<&str, Vec<&StainItinerary>> = BTreeMap::new();
    for it in &its {
        for j in it.jamb_slots() {
            by_slot.entry(j).or_default().push(it);
        }
    }
    for (slot, users) in &by_slot {
        for (a, ia) in users.iter().enumerate() {
            for ib in &users[a + 1..] {
                let (da, db) = (generator_door(model, ia), generator_door(model, ib));
                let rule = match (ia.generator.is_fixed(), ib.generator.is_fixed()) {
                    (true, true) => "gsat.gsfm",
                    (false, false) => {
                        let (da, db) = (da.unwrap(), db.unwrap());
                        if da.id == db.id {
                            continue;
                        }
                        if da.face().is_some() && da.face() == db.face() {
                            r.note("gsat.sanctioned", &[&ia.id, &ib.id, slot], "shared jamb slot within one face");
                            continue;
                        }
                        "gsat.gsfd"
                    }
                    _ => "gsat.gsfmfd",
                };
                let case = rule.trim_start_matches("gsat.");
                r.error(rule, &[&ia.id, &ib.id, slot], format!("case {case}: stains share a jamb slot"));
            }
        }
    }

    let mut by_door: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for it in &its {
        for s in it.stops.iter().filter(|s| s.slot == Slot::Interior) {
            by_door.entry(&s.door).or_default().insert(&it.id);
        }
    }
    for (door, users) in by_door.iter().filter(|(_, u)| u.len() > 1) {
        let mut ents: Vec<&str> = vec![door];
        ents.extend(users.iter().copied());
        r.note("gsat.shared-door", &ents, "well-positioned stains share a door");
    }
    Ok(r)
}

/// Face door ids for `face`: `(out-door, in-door)`.
pub fn face_doors(model: &FatteningModel, face: &str) -> Option<(String, String)> {
    let find = |dir: Flow| {
        model
            .doors
            .values()
            .find(|d| d.face() == Some(face) && d.direction == dir)
            .map(|d| d.id.clone())
    };
    Some((find(Flow::Out)?, find(Flow::In)?))
}
