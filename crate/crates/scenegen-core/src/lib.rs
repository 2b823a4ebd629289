//! Contextual scene augmentation engine: spatial scene-graph feature
//! extraction, KDE-based spatial priors, and probabilistic pose prediction.

pub mod augment;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod kde;
pub mod knowledge;
pub mod scene;
pub mod server;
pub mod scene_graph;

pub use error::SceneGenError;
