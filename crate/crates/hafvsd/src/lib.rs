//! Combinatorial analysis of reduced three-dimensional vector-field
//! singularities presented by a divisor, its singular points and the oriented
//! graph of distinguished leaves.

pub mod corpus;
pub mod fattening;
pub mod generate;
pub mod graph;
pub mod marks;
pub mod model;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod validate;

pub use model::{build_scene, parse_scene, Scene, SceneDocument};
pub use report::ValidationReport;
pub use scalar::Q;

pub type ExactTransition = marks::Transition<Q>;

pub type LinearModel = oracle::LinearSaddleModel<f64>;
pub type LinearModel32 = oracle::LinearSaddleModel<f32>;
pub type ExactModel = oracle::LinearSaddleModel<Q>;
