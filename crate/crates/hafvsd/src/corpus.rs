//! Scenes bundled with the crate.

use crate::model::{parse_scene, Scene, SceneDocument};

pub const NAMES: [&str; 10] = [
    "fig3",
    "exceptional",
    "resonant_chain",
    "nonresonant_chain",
    "morse_smale_violation",
    "corner_chain",
    "gsat_conflict",
    "random_11",
    "random_23",
    "random_42",
];

/// Scenes expected to pass every check.
pub const VALID: [&str; 7] =
    ["fig3", "exceptional", "nonresonant_chain", "corner_chain", "random_11", "random_23", "random_42"];

/// Seeds of the bundled random scenes.
pub const RANDOM_SEEDS: [u64; 3] = [11, 23, 42];

pub fn text(name: &str) -> &'static str {
    match name {
        "fig3" => include_str!("../../../scenes/fig3.json"),
        "exceptional" => include_str!("../../../scenes/exceptional.json"),
        "resonant_chain" => include_str!("../../../scenes/resonant_chain.json"),
        "nonresonant_chain" => include_str!("../../../scenes/nonresonant_chain.json"),
        "morse_smale_violation" => include_str!("../../../scenes/morse_smale_violation.json"),
        "corner_chain" => include_str!("../../../scenes/corner_chain.json"),
        "gsat_conflict" => include_str!("../../../scenes/gsat_conflict.json"),
        "random_11" => include_str!("../../../scenes/random_11.json"),
        "random_23" => include_str!("../../../scenes/random_23.json"),
        "random_42" => include_str!("../../../scenes/random_42.json"),
        _ => panic!("no bundled scene `{name}`"),
    }
}

pub fn document(name: &str) -> SceneDocument {
    SceneDocument::from_json(text(name)).expect("bundled scene parses")
}

pub fn scene(name: &str) -> Scene {
    parse_scene(text(name)).expect("bundled scene builds")
}
