//! Remove-and-repredict evaluation over K folds with feature-selection
//! ablations, producing per-sample records and summary tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::augment::{best_orientation, orientation_scores, place, SamplingSpec};
use crate::dataset::kfold;
use crate::error::SceneGenError;
use crate::geometry::{angular_distance, Thresholds};
use crate::knowledge::{train, FeatureSelection};
use crate::scene::{Category, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalTask {
    Position,
    Orientation,
}

/// One named feature-selection variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    pub selection: FeatureSelection,
}

fn position_variant(name: &str) -> Variant {
    let mut selection = FeatureSelection::default();
    selection.position = FeatureSelection::parse_position(name).expect("known variant");
    Variant { name: name.to_string(), selection }
}

fn orientation_variant(name: &str) -> Variant {
    let mut selection = FeatureSelection::default();
    selection.orientation = FeatureSelection::parse_orientation(name).expect("known variant");
    Variant { name: name.to_string(), selection }
}

/// The standard position ablation rows.
pub fn default_position_variants() -> Vec<Variant> {
    ["AD+S+RP", "AD+RP", "S+RP", "RP"].iter().map(|n| position_variant(n)).collect()
}

/// The standard orientation ablation rows.
pub fn default_orientation_variants() -> Vec<Variant> {
    ["F+C+RP", "F", "F+C", "F+C+NT", "F+C+DS", "F+C+DS+NT"]
        .iter()
        .map(|n| orientation_variant(n))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationConfig {
    pub task: EvalTask,
    pub variants: Vec<Variant>,
    pub k: usize,
    pub seed: u64,
    pub top_k: usize,
    pub sampling: SamplingSpec,
}

impl AblationConfig {
    pub fn position_default() -> Self {
        Self {
            task: EvalTask::Position,
            variants: default_position_variants(),
            k: 4,
            seed: 0,
            top_k: 5,
            sampling: SamplingSpec::default(),
        }
    }

    pub fn orientation_default() -> Self {
        Self {
            task: EvalTask::Orientation,
            variants: default_orientation_variants(),
            k: 4,
            seed: 0,
            top_k: 5,
            sampling: SamplingSpec::default(),
        }
    }
}

/// One evaluated object. For position runs `top1`/`top5` are distances in
/// meters; for orientation runs `top1` is the angular error in radians and
/// `top5` mirrors it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub variant: String,
    pub fold: usize,
    pub scene_index: usize,
    pub object_id: String,
    pub category: Category,
    pub top1: f64,
    pub top5: f64,
}

/// Mean errors for one (variant, category) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub samples: usize,
    pub mean_top1: f64,
    pub mean_top5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: EvalTask,
    pub k: usize,
    pub seed: u64,
    pub samples: Vec<SampleRecord>,
    /// Objects skipped because a fold left their category untrained,
    /// keyed by variant name.
    pub skipped: BTreeMap<String, usize>,
}

impl EvalReport {
    /// Per-(variant, category) means; the `None` category key is the overall
    /// row.
    pub fn summary(&self) -> BTreeMap<(String, Option<String>), CellSummary> {
        let mut acc: BTreeMap<(String, Option<String>), (usize, f64, f64)> = BTreeMap::new();
        for s in &self.samples {
            for key in [
                (s.variant.clone(), Some(s.category.name().to_string())),
                (s.variant.clone(), None),
            ] {
                let e = acc.entry(key).or_insert((0, 0.0, 0.0));
                e.0 += 1;
                e.1 += s.top1;
                e.2 += s.top5;
            }
        }
        acc.into_iter()
            .map(|(k, (n, t1, t5))| {
                (k, CellSummary { samples: n, mean_top1: t1 / n as f64, mean_top5: t5 / n as f64 })
            })
            .collect()
    }

    /// Tab-separated summary table, one row per variant, one column pair per
    /// category plus an overall pair.
    pub fn table_dsv(&self) -> String {
        let summary = self.summary();
        let mut categories: Vec<String> = summary
            .keys()
            .filter_map(|(_, c)| c.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        categories.push("Overall".to_string());
        let mut variants: Vec<String> = Vec::new();
        for s in &self.samples {
            if !variants.contains(&s.variant) {
                variants.push(s.variant.clone());
            }
        }
        let (c1, c5) = match self.task {
            EvalTask::Position => ("top1_m", "top5_m"),
            EvalTask::Orientation => ("angle_rad", "angle_rad_top5"),
        };
        let mut out = String::from("variant");
        for c in &categories {
            out.push_str(&format!("\t{c}:{c1}\t{c}:{c5}"));
        }
        out.push('\n');
        for v in &variants {
            out.push_str(v);
            for c in &categories {
                let key = if c == "Overall" {
                    (v.clone(), None)
                } else {
                    (v.clone(), Some(c.clone()))
                };
                match summary.get(&key) {
                    Some(cell) => out
                        .push_str(&format!("\t{:.6}\t{:.6}", cell.mean_top1, cell.mean_top5)),
                    None => out.push_str("\t-\t-"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Sorted per-sample top-1 errors for one variant, for CDF plotting.
    pub fn cdf_data(&self, variant: &str) -> Vec<f64> {
        let mut xs: Vec<f64> = self
            .samples
            .iter()
            .filter(|s| s.variant == variant)
            .map(|s| s.top1)
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs
    }
}

fn scene_without(scene: &Scene, index: usize) -> Scene {
    let mut copy = scene.clone();
    copy.objects.remove(index);
    copy
}

/// Removes each validation object, re-predicts its position with its true
/// half extents, and records the distance to the true center for the top-1
/// pose and the nearest of the top-5.
pub fn eval_position(
    corpus: &[Scene],
    config: &AblationConfig,
    thresholds: &Thresholds,
) -> Result<EvalReport, SceneGenError> {
    run_eval(corpus, config, thresholds, EvalTask::Position)
}

/// Holds each validation object's position, re-predicts its facing angle,
/// and records the angular distance to the labeled facing.
pub fn eval_orientation(
    corpus: &[Scene],
    config: &AblationConfig,
    thresholds: &Thresholds,
) -> Result<EvalReport, SceneGenError> {
    run_eval(corpus, config, thresholds, EvalTask::Orientation)
}

fn run_eval(
    corpus: &[Scene],
    config: &AblationConfig,
    thresholds: &Thresholds,
    task: EvalTask,
) -> Result<EvalReport, SceneGenError> {
    let split = kfold(corpus.len(), config.k, config.seed)?;
    let mut spec = config.sampling.clone();
    spec.top_k = config.top_k;
    let mut samples = Vec::new();
    let mut skipped: BTreeMap<String, usize> = BTreeMap::new();

    for variant in &config.variants {
        let skip = skipped.entry(variant.name.clone()).or_insert(0);
        for (fold_idx, fold) in split.folds.iter().enumerate() {
            let train_scenes: Vec<Scene> = split
                .folds
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != fold_idx)
                .flat_map(|(_, f)| f.iter().map(|&s| corpus[s].clone()))
                .collect();
            let (model, _) =
                train(&train_scenes, thresholds, &variant.selection, "eval-fold")?;

            for &scene_index in fold {
                let scene = &corpus[scene_index];
                for (oi, obj) in scene.objects.iter().enumerate() {
                    match task {
                        EvalTask::Position => {
                            if !model.is_trained(obj.category) {
                                *skip += 1;
                                continue;
                            }
                            let holdout = scene_without(scene, oi);
                            let (rec, _) = match place(
                                &holdout,
                                obj.category,
                                &model,
                                &spec,
                                thresholds,
                                Some(obj.boxed.half_extents),
                            ) {
                                Ok(r) => r,
                                Err(SceneGenError::NoValidCell { .. }) => {
                                    *skip += 1;
                                    continue;
                                }
                                Err(e) => return Err(e),
                            };
                            if rec.poses.is_empty() {
                                *skip += 1;
                                continue;
                            }
                            let truth = obj.boxed.center;
                            let top1 = rec.poses[0].position.distance_to(truth);
                            let top5 = rec
                                .poses
                                .iter()
                                .map(|p| p.position.distance_to(truth))
                                .fold(f64::INFINITY, f64::min);
                            samples.push(SampleRecord {
                                variant: variant.name.clone(),
                                fold: fold_idx,
                                scene_index,
                                object_id: obj.id.clone(),
                                category: obj.category,
                                top1,
                                top5,
                            });
                        }
                        EvalTask::Orientation => {
                            let Some(truth) = obj.facing_angle() else { continue };
                            if !obj.category.is_asymmetric() {
                                continue;
                            }
                            if !model.has_orientation_model(obj.category) {
                                *skip += 1;
                                continue;
                            }
                            let holdout = scene_without(scene, oi);
                            let scores = orientation_scores(
                                &holdout,
                                obj.category,
                                obj.boxed.center,
                                &model,
                                &spec,
                                thresholds,
                                Some(obj.boxed.half_extents),
                            )?;
                            let (theta, _) = best_orientation(&scores);
                            let err = angular_distance(theta, truth);
                            samples.push(SampleRecord {
                                variant: variant.name.clone(),
                                fold: fold_idx,
                                scene_index,
                                object_id: obj.id.clone(),
                                category: obj.category,
                                top1: err,
                                top5: err,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(EvalReport { task, k: config.k, seed: config.seed, samples, skipped })
}
