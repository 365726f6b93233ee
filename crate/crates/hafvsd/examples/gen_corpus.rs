//! Regenerates the generated part of `scenes/`.
//!
//! cargo run -p hafvsd --example gen_corpus

use std::fs;
use std::path::Path;

use hafvsd::corpus::RANDOM_SEEDS;
use hafvsd::generate::{polytope_scene, random_scene, Polytope};
use hafvsd::marks::theta_path;
use hafvsd::model::{build_scene, EdgeKind, End, EndRole};
use hafvsd::validate::validate_all;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn write(dir: &Path, name: &str, json: String) {
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, json + "\n").unwrap();
    println!("wrote {}", path.display());
}

/// First pentagonal-prism scene with a Θ path that passes a corner through
/// its W¹ axis and carries at least three edges.
fn corner_chain() -> String {
    let poly = Polytope::prism(5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    loop {
        let mut heights: Vec<i64> = (0..10).collect();
        heights.shuffle(&mut rng);
        let Some(mut doc) = polytope_scene(&poly, &heights, || (rng.gen_range(1..=9), rng.gen_range(1..=3))) else {
            continue;
        };
        let scene = build_scene(&doc).unwrap();
        if !validate_all(&scene).passed {
            continue;
        }
        let hit = scene.all_s_components().iter().any(|nu| {
            theta_path(&scene, &nu.id).is_ok_and(|t| {
                t.path.len() >= 3
                    && t.path[..t.path.len() - 1].iter().any(|e| {
                        let edge = scene.edge(e).unwrap();
                        let end = if t.reversed { End::Alpha } else { End::Omega };
                        edge.kind == EdgeKind::Skeleton && scene.edge_end(e, end).unwrap().role == EndRole::W1
                    })
            })
        });
        if hit {
            doc.name = Some("corner-chain".into());
            return doc.to_json();
        }
    }
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes");
    for seed in RANDOM_SEEDS {
        write(&dir, &format!("random_{seed}"), random_scene(seed).to_json());
    }
    write(&dir, "corner_chain", corner_chain());
}
