//! Pose sampling and scoring: lay a grid over the room, score candidate
//! positions under the position prior, score orientations at chosen
//! positions, and recommend placements.

use serde::{Deserialize, Serialize};

use crate::error::SceneGenError;
use crate::geometry::{OrientedBox, Point2, Thresholds, TAU};
use crate::knowledge::KnowledgeModel;
use crate::scene::{Category, Scene, SceneObject, Symmetry};
use crate::scene_graph::{self};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollisionPolicy {
    /// Any footprint overlap with an existing object invalidates a cell.
    RejectOverlap,
    /// Overlaps are allowed for pairs on the allow list.
    AllowListedPairs,
}

/// Sampling configuration for heat maps and placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    /// Approximate number of valid in-polygon cells the grid aims for.
    pub target_samples: usize,
    /// Number of uniform angles scored in [0, 2pi).
    pub orientation_count: usize,
    pub collision_policy: CollisionPolicy,
    /// Category pairs whose footprints may overlap (natural stacking).
    pub overlap_allow_list: Vec<(Category, Category)>,
    pub random_seed: u64,
    /// When true, orientations are scored at every valid cell instead of only
    /// at the chosen positions.
    pub joint_sampling: bool,
    pub top_k: usize,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            target_samples: 250,
            orientation_count: 16,
            collision_policy: CollisionPolicy::AllowListedPairs,
            overlap_allow_list: vec![
                (Category::Decor, Category::Table),
                (Category::Decor, Category::Storage),
                (Category::Picture, Category::Storage),
            ],
            random_seed: 0,
            joint_sampling: false,
            top_k: 5,
        }
    }
}

impl SamplingSpec {
    pub fn validate(&self) -> Result<(), SceneGenError> {
        if self.target_samples < 1 {
            return Err(SceneGenError::Contract("target_samples must be >= 1".into()));
        }
        if self.orientation_count < 4 {
            return Err(SceneGenError::Contract("orientation_count must be >= 4".into()));
        }
        Ok(())
    }

    fn overlap_allowed(&self, a: Category, b: Category) -> bool {
        match self.collision_policy {
            CollisionPolicy::RejectOverlap => false,
            CollisionPolicy::AllowListedPairs => self
                .overlap_allow_list
                .iter()
                .any(|(x, y)| (*x == a && *y == b) || (*x == b && *y == a)),
        }
    }
}

/// One sampled grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatMapCell {
    pub position: Point2,
    pub raw: f64,
    /// raw / max(raw) over valid cells; 0 for invalid cells.
    pub normalized: f64,
    pub valid: bool,
}

/// Grid of scored candidate positions for one category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatMap {
    pub category: Category,
    pub origin: Point2,
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major cells, index = iy * nx + ix.
    pub cells: Vec<HeatMapCell>,
    /// Index of the highest-scoring valid cell (lowest index on ties).
    pub best_cell: Option<usize>,
}

impl HeatMap {
    /// Valid cell indices ordered by descending score, ties by grid index.
    pub fn ranked_cells(&self) -> Vec<usize> {
        let mut idx: Vec<usize> =
            (0..self.cells.len()).filter(|&i| self.cells[i].valid).collect();
        idx.sort_by(|&a, &b| {
            self.cells[b]
                .raw
                .partial_cmp(&self.cells[a].raw)
                .unwrap()
                .then(a.cmp(&b))
        });
        idx
    }
}

/// One ranked candidate pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecommendedPose {
    pub position: Point2,
    pub theta_a: f64,
    pub position_score: f64,
    pub orientation_score: f64,
    pub grid_index: usize,
}

/// Top-k poses for one category, scores nonincreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRecommendation {
    pub category: Category,
    pub poses: Vec<RecommendedPose>,
}

fn candidate_object(
    category: Category,
    model: &KnowledgeModel,
    position: Point2,
    theta_a: f64,
    half_extents: Option<[f64; 3]>,
    facing: bool,
) -> Result<SceneObject, SceneGenError> {
    let geom = model.category_geometry(category);
    let he = half_extents.unwrap_or(geom.mean_half_extents);
    Ok(SceneObject {
        id: "__candidate__".to_string(),
        category,
        boxed: OrientedBox::new(position, geom.mean_center_z, he, theta_a)?,
        has_known_facing: facing,
    })
}

fn cell_is_valid(
    candidate: &SceneObject,
    scene: &Scene,
    spec: &SamplingSpec,
) -> bool {
    if !scene.shell.contains(candidate.boxed.center) {
        return false;
    }
    for obj in &scene.objects {
        if candidate.boxed.footprint_intersects(&obj.boxed)
            && !spec.overlap_allowed(candidate.category, obj.category)
        {
            return false;
        }
    }
    true
}

/// Scores candidate positions for a new object of `category` on a uniform
/// grid over the room's bounding rectangle. Only the candidate's features are
/// recomputed; existing objects' features are left untouched.
pub fn position_heatmap(
    scene: &Scene,
    category: Category,
    model: &KnowledgeModel,
    spec: &SamplingSpec,
    thresholds: &Thresholds,
    half_extents: Option<[f64; 3]>,
) -> Result<HeatMap, SceneGenError> {
    spec.validate()?;
    model.check_thresholds(thresholds)?;
    if !model.is_trained(category) {
        return Err(SceneGenError::UntrainedCategory(category.name().to_string()));
    }

    let area = scene.shell.area();
    let cell_size = (area / spec.target_samples as f64).sqrt();
    let (lo, hi) = scene.shell.bounding_rect();
    let nx = (((hi.x - lo.x) / cell_size).ceil() as usize).max(1);
    let ny = (((hi.y - lo.y) / cell_size).ceil() as usize).max(1);

    let groups = scene_graph::group_index(scene);
    let mut cells = Vec::with_capacity(nx * ny);
    let mut best: Option<(usize, f64)> = None;
    let mut max_raw = 0.0f64;
    let mut any_valid = false;
    for iy in 0..ny {
        for ix in 0..nx {
            let position = Point2::new(
                lo.x + (ix as f64 + 0.5) * cell_size,
                lo.y + (iy as f64 + 0.5) * cell_size,
            );
            let candidate = candidate_object(category, model, position, 0.0, half_extents, false)?;
            let valid = cell_is_valid(&candidate, scene, spec);
            let raw = if valid {
                any_valid = true;
                let d_p = scene_graph::position_features(&candidate, scene, &groups, thresholds);
                model.likelihood_position(category, &d_p)?
            } else {
                0.0
            };
            let index = cells.len();
            if valid {
                max_raw = max_raw.max(raw);
                match best {
                    Some((_, b)) if raw <= b => {}
                    _ => best = Some((index, raw)),
                }
            }
            cells.push(HeatMapCell { position, raw, normalized: 0.0, valid });
        }
    }
    if !any_valid {
        return Err(SceneGenError::NoValidCell { step: 0, category: category.name().to_string() });
    }
    for c in cells.iter_mut() {
        if c.valid && max_raw > 0.0 {
            c.normalized = c.raw / max_raw;
        }
    }
    Ok(HeatMap {
        category,
        origin: lo,
        cell_size,
        nx,
        ny,
        cells,
        best_cell: best.map(|(i, _)| i),
    })
}

/// Inward normal angle of the wall closest to a box at `position`.
fn wall_opposed_angle(
    scene: &Scene,
    boxed: &OrientedBox,
) -> f64 {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (i, w) in scene.shell.walls().iter().enumerate() {
        let d = crate::geometry::shortest_distance(boxed, w);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    let wall = scene.shell.walls()[best];
    let dir = wall.direction();
    let mid = Point2::new((wall.start.x + wall.end.x) / 2.0, (wall.start.y + wall.end.y) / 2.0);
    // Pick the perpendicular pointing into the room.
    let n = dir.perp_ccw();
    let probe = Point2::new(mid.x + 0.01 * n.x, mid.y + 0.01 * n.y);
    let inward = if scene.shell.contains(probe) { n } else { n.negate() };
    inward.angle()
}

/// Scores orientations for a new object fixed at `position`.
///
/// Asymmetric categories get `orientation_count` uniform angles scored under
/// the orientation prior; Inside-Facing categories get the single
/// wall-opposed angle with score 1; Symmetric categories get an empty list.
pub fn orientation_scores(
    scene: &Scene,
    category: Category,
    position: Point2,
    model: &KnowledgeModel,
    spec: &SamplingSpec,
    thresholds: &Thresholds,
    half_extents: Option<[f64; 3]>,
) -> Result<Vec<(f64, f64)>, SceneGenError> {
    spec.validate()?;
    model.check_thresholds(thresholds)?;
    match category.symmetry() {
        Symmetry::Symmetric | Symmetry::Other => Ok(Vec::new()),
        Symmetry::InsideFacing => {
            let candidate = candidate_object(category, model, position, 0.0, half_extents, false)?;
            Ok(vec![(wall_opposed_angle(scene, &candidate.boxed), 1.0)])
        }
        Symmetry::Asymmetric => {
            if !model.has_orientation_model(category) {
                return Err(SceneGenError::UntrainedCategory(category.name().to_string()));
            }
            let groups = scene_graph::group_index(scene);
            let mut out = Vec::with_capacity(spec.orientation_count);
            for k in 0..spec.orientation_count {
                let theta = k as f64 * TAU / spec.orientation_count as f64;
                let candidate =
                    candidate_object(category, model, position, theta, half_extents, true)?;
                let d_o =
                    scene_graph::orientation_features(&candidate, scene, &groups, thresholds)?;
                out.push((theta, model.likelihood_orientation(category, &d_o)?));
            }
            Ok(out)
        }
    }
}

/// Best angle from an orientation score list: highest score, lowest angle
/// index on ties. Falls back to angle 0 for empty lists (Symmetric objects).
pub fn best_orientation(scores: &[(f64, f64)]) -> (f64, f64) {
    let mut best = (0.0, 1.0);
    let mut best_score = f64::NEG_INFINITY;
    for &(theta, score) in scores {
        if score > best_score {
            best_score = score;
            best = (theta, score);
        }
    }
    if best_score == f64::NEG_INFINITY {
        (0.0, 1.0)
    } else {
        best
    }
}

/// Runs the position pass, then orients the top-k cells; the input scene is
/// never mutated.
pub fn place(
    scene: &Scene,
    category: Category,
    model: &KnowledgeModel,
    spec: &SamplingSpec,
    thresholds: &Thresholds,
    half_extents: Option<[f64; 3]>,
) -> Result<(PlacementRecommendation, HeatMap), SceneGenError> {
    let map = position_heatmap(scene, category, model, spec, thresholds, half_extents)?;
    let ranked = map.ranked_cells();
    let mut poses = Vec::new();
    for &idx in ranked.iter().take(spec.top_k) {
        let cell = map.cells[idx];
        let scores =
            orientation_scores(scene, category, cell.position, model, spec, thresholds, half_extents)?;
        let (theta, oscore) = best_orientation(&scores);
        poses.push(RecommendedPose {
            position: cell.position,
            theta_a: theta,
            position_score: cell.normalized,
            orientation_score: oscore,
            grid_index: idx,
        });
    }
    Ok((PlacementRecommendation { category, poses }, map))
}

/// Artifacts of one committed step of iterative augmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepArtifact {
    pub step: usize,
    pub category: Category,
    pub committed: RecommendedPose,
    pub heatmap: HeatMap,
}

/// A step that found no valid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFailure {
    pub step: usize,
    pub category: Category,
}

impl StepFailure {
    pub fn into_error(&self) -> SceneGenError {
        SceneGenError::NoValidCell { step: self.step, category: self.category.name().to_string() }
    }
}

/// Outcome of iterative augmentation; `failure` is set when a step found no
/// valid cell, with all earlier steps committed into `scene`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterativeOutcome {
    pub scene: Scene,
    pub steps: Vec<StepArtifact>,
    pub failure: Option<StepFailure>,
}

/// Places each category in order, committing the best pose before the next
/// step so committed objects shape later features and collision checks.
pub fn place_iterative(
    scene: &Scene,
    categories: &[Category],
    model: &KnowledgeModel,
    spec: &SamplingSpec,
    thresholds: &Thresholds,
) -> Result<IterativeOutcome, SceneGenError> {
    let mut current = scene.clone();
    let mut steps = Vec::new();
    for (step, &category) in categories.iter().enumerate() {
        match place(&current, category, model, spec, thresholds, None) {
            Ok((rec, map)) => {
                let pose = rec.poses.first().copied().ok_or_else(|| {
                    SceneGenError::NoValidCell { step, category: category.name().to_string() }
                })?;
                let geom = model.category_geometry(category);
                let committed = SceneObject {
                    id: format!("aug-{}-{}", step + 1, category.name()),
                    category,
                    boxed: OrientedBox::new(
                        pose.position,
                        geom.mean_center_z,
                        geom.mean_half_extents,
                        pose.theta_a,
                    )?,
                    has_known_facing: category.is_asymmetric(),
                };
                current.objects.push(committed);
                steps.push(StepArtifact { step, category, committed: pose, heatmap: map });
            }
            Err(SceneGenError::NoValidCell { .. }) => {
                return Ok(IterativeOutcome {
                    scene: current,
                    steps,
                    failure: Some(StepFailure { step, category }),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(IterativeOutcome { scene: current, steps, failure: None })
}
