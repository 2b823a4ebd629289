//! Corpus I/O, validation, fold splitting, and a rule-driven synthetic scene
//! generator.
//!
//! Scene files are JSON documents with this layout (schema_version 1):
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "room_type": "bedroom",
//!   "floor": [[0.0, 0.0], [4.0, 0.0], [4.0, 3.0], [0.0, 3.0]],
//!   "objects": [
//!     {
//!       "id": "bed-1",
//!       "category": "Bed",
//!       "center": [1.0, 1.5, 0.3],
//!       "half_extents": [0.9, 1.0, 0.3],
//!       "theta_a": 1.5707963,
//!       "has_known_facing": true
//!     }
//!   ]
//! }
//! ```

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SceneGenError;
use crate::geometry::{OrientedBox, Point2, RoomShell, Thresholds};
use crate::scene::{Category, Scene, SceneObject};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub id: String,
    pub category: String,
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
    pub theta_a: f64,
    pub has_known_facing: bool,
}

/// On-disk form of a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub schema_version: u32,
    pub room_type: String,
    pub floor: Vec<[f64; 2]>,
    pub objects: Vec<ObjectRecord>,
}

impl SceneRecord {
    pub fn from_scene(scene: &Scene) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            room_type: scene.room_type.clone(),
            floor: scene.shell.floor_polygon().iter().map(|p| [p.x, p.y]).collect(),
            objects: scene
                .objects
                .iter()
                .map(|o| ObjectRecord {
                    id: o.id.clone(),
                    category: o.category.name().to_string(),
                    center: [o.boxed.center.x, o.boxed.center.y, o.boxed.center_z],
                    half_extents: o.boxed.half_extents,
                    theta_a: o.boxed.theta_a,
                    has_known_facing: o.has_known_facing,
                })
                .collect(),
        }
    }

    pub fn to_scene(&self) -> Result<Scene, SceneGenError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SceneGenError::FormatVersion {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let shell = RoomShell::from_polygon(
            self.floor.iter().map(|v| Point2::new(v[0], v[1])).collect(),
        )?;
        let mut objects = Vec::with_capacity(self.objects.len());
        for rec in &self.objects {
            let category = Category::from_name(&rec.category)?;
            objects.push(SceneObject {
                id: rec.id.clone(),
                category,
                boxed: OrientedBox::new(
                    Point2::new(rec.center[0], rec.center[1]),
                    rec.center[2],
                    rec.half_extents,
                    rec.theta_a,
                )?,
                has_known_facing: rec.has_known_facing,
            });
        }
        Scene::new(shell, objects, self.room_type.clone())
    }

    pub fn to_json(&self) -> Result<String, SceneGenError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, SceneGenError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Writes a scene file atomically (write to a sibling temp file, then rename).
pub fn save_scene(scene: &Scene, path: &Path) -> Result<(), SceneGenError> {
    let record = SceneRecord::from_scene(scene);
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, record.to_json()?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_scene(path: &Path) -> Result<Scene, SceneGenError> {
    SceneRecord::from_json(&std::fs::read_to_string(path)?)?.to_scene()
}

/// Area bounds applied while loading; rooms outside are rejected as outliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusFilter {
    pub min_area: f64,
    pub max_area: f64,
}

impl Default for CorpusFilter {
    fn default() -> Self {
        Self { min_area: 4.0, max_area: 100.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectRecord {
    pub file: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ValidationReport {
    pub accepted: Vec<String>,
    pub rejects: Vec<RejectRecord>,
}

/// Loads every `.json` scene file under `dir` (sorted by name), validating
/// each and filtering by floor area. Bad files are reported and skipped; zero
/// valid scenes is fatal.
pub fn load_corpus(
    dir: &Path,
    filter: &CorpusFilter,
) -> Result<(Vec<Scene>, ValidationReport), SceneGenError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();

    let mut scenes = Vec::new();
    let mut report = ValidationReport::default();
    for path in paths {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        match load_scene(&path) {
            Ok(scene) => {
                let area = scene.shell.area();
                if area < filter.min_area || area > filter.max_area {
                    report.rejects.push(RejectRecord {
                        file: name,
                        reason: format!(
                            "outlier area {area:.2} m^2 outside [{}, {}]",
                            filter.min_area, filter.max_area
                        ),
                    });
                } else {
                    report.accepted.push(name);
                    scenes.push(scene);
                }
            }
            Err(e) => {
                let reason = match &e {
                    SceneGenError::UnknownCategory(c) => format!("unknown category \"{c}\""),
                    other => other.to_string(),
                };
                report.rejects.push(RejectRecord { file: name, reason });
            }
        }
    }
    if scenes.is_empty() {
        return Err(SceneGenError::InvalidScene(format!(
            "no valid scenes in {} ({} rejected)",
            dir.display(),
            report.rejects.len()
        )));
    }
    Ok((scenes, report))
}

/// K partitions of corpus indices from a seeded shuffle plus round-robin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

pub fn kfold(corpus_size: usize, k: usize, seed: u64) -> Result<FoldSplit, SceneGenError> {
    if k < 2 {
        return Err(SceneGenError::Contract("kfold needs K >= 2".into()));
    }
    if k > corpus_size {
        return Err(SceneGenError::Contract(format!(
            "K = {k} exceeds corpus size {corpus_size}"
        )));
    }
    let mut order: Vec<usize> = (0..corpus_size).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (i, idx) in order.into_iter().enumerate() {
        folds[i % k].push(idx);
    }
    Ok(FoldSplit { folds, seed })
}

/// Where a rule puts its objects in the room.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlacementRule {
    /// Within rho of two adjacent walls, facing into the room.
    Corner,
    /// Far from every wall.
    Middle,
    /// Within rho of exactly one wall, facing into the room.
    AgainstWall,
    /// Within epsilon of an already placed object of the given category,
    /// facing its center.
    NearFacing(Category),
    /// Resting on top of an already placed object of the given category,
    /// footprint fully inside the supporter's.
    OnTop(Category),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthRule {
    pub category: Category,
    pub placement: PlacementRule,
    pub count_range: (usize, usize),
    /// Half-extent bounds along (a, b, z).
    pub half_extent_min: [f64; 3],
    pub half_extent_max: [f64; 3],
}

/// A complete generator configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthRuleSet {
    /// Uniform side-length bounds of the rectangular rooms.
    pub room_side_range: (f64, f64),
    pub rules: Vec<SynthRule>,
    pub room_type: String,
}

impl SynthRuleSet {
    /// Storage always in a corner, one Table always in the middle.
    pub fn position_recovery() -> Self {
        Self {
            room_side_range: (4.0, 6.0),
            room_type: "synthetic".into(),
            rules: vec![
                SynthRule {
                    category: Category::Storage,
                    placement: PlacementRule::Corner,
                    count_range: (1, 2),
                    half_extent_min: [0.2, 0.2, 0.4],
                    half_extent_max: [0.3, 0.3, 0.9],
                },
                SynthRule {
                    category: Category::Table,
                    placement: PlacementRule::Middle,
                    count_range: (1, 1),
                    half_extent_min: [0.4, 0.3, 0.3],
                    half_extent_max: [0.7, 0.5, 0.4],
                },
            ],
        }
    }

    /// One middle Table per room with Chairs beside it, facing it.
    pub fn orientation_recovery() -> Self {
        Self {
            room_side_range: (4.0, 6.0),
            room_type: "synthetic".into(),
            rules: vec![
                SynthRule {
                    category: Category::Table,
                    placement: PlacementRule::Middle,
                    count_range: (1, 1),
                    half_extent_min: [0.4, 0.3, 0.3],
                    half_extent_max: [0.7, 0.5, 0.4],
                },
                SynthRule {
                    category: Category::Chair,
                    placement: PlacementRule::NearFacing(Category::Table),
                    count_range: (1, 2),
                    half_extent_min: [0.2, 0.2, 0.4],
                    half_extent_max: [0.25, 0.25, 0.5],
                },
            ],
        }
    }

    /// Corner Storage with a Picture on it, middle Table with Chairs facing
    /// it and Decor on it.
    pub fn combined() -> Self {
        let mut set = Self::position_recovery();
        // Narrow height spread keeps stacked supports within the gap
        // tolerance of a mean-geometry candidate.
        set.rules[0].half_extent_min = [0.2, 0.2, 0.6];
        set.rules[0].half_extent_max = [0.3, 0.3, 0.7];
        set.rules.push(SynthRule {
            category: Category::Chair,
            placement: PlacementRule::NearFacing(Category::Table),
            count_range: (1, 2),
            half_extent_min: [0.2, 0.2, 0.4],
            half_extent_max: [0.25, 0.25, 0.5],
        });
        set.rules.push(SynthRule {
            category: Category::Decor,
            placement: PlacementRule::OnTop(Category::Table),
            count_range: (1, 1),
            half_extent_min: [0.05, 0.05, 0.05],
            half_extent_max: [0.1, 0.1, 0.15],
        });
        set.rules.push(SynthRule {
            category: Category::Picture,
            placement: PlacementRule::OnTop(Category::Storage),
            count_range: (1, 1),
            half_extent_min: [0.05, 0.05, 0.05],
            half_extent_max: [0.1, 0.1, 0.1],
        });
        set
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementManifest {
    pub object_id: String,
    pub rule_index: usize,
    pub category: Category,
    pub placement: PlacementRule,
    /// Id of the object a NearFacing placement targets.
    pub target_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub scene_index: usize,
    pub placements: Vec<PlacementManifest>,
}

/// Ground truth for every rule instantiation of a generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub schema_version: u32,
    pub seed: u64,
    pub scenes: Vec<SceneManifest>,
}

const MAX_PLACEMENT_TRIES: usize = 400;

struct RoomCtx {
    shell: RoomShell,
    side_x: f64,
    side_y: f64,
}

fn sample_half_extents(rule: &SynthRule, rng: &mut ChaCha8Rng) -> [f64; 3] {
    let mut he = [0.0; 3];
    for i in 0..3 {
        he[i] = rng.gen_range(rule.half_extent_min[i]..=rule.half_extent_max[i]);
    }
    he
}

fn collides(boxed: &OrientedBox, placed: &[SceneObject]) -> bool {
    placed.iter().any(|o| boxed.footprint_intersects(&o.boxed))
}

fn footprint_inside(boxed: &OrientedBox, shell: &RoomShell) -> bool {
    boxed.footprint_corners().iter().all(|c| shell.contains(*c))
}

/// Tries one placement of `rule`; None means the draw failed and the caller
/// retries with fresh randomness.
fn try_place(
    rule: &SynthRule,
    room: &RoomCtx,
    placed: &[SceneObject],
    t: &Thresholds,
    rng: &mut ChaCha8Rng,
) -> Option<(OrientedBox, f64, Option<usize>)> {
    let he = sample_half_extents(rule, rng);
    let margin = t.rho + 0.2;
    match rule.placement {
        PlacementRule::Corner => {
            // Distances to the two adjacent walls, strictly inside rho but
            // far enough that the footprint stays in the room.
            let max_h = he[0].max(he[1]);
            if max_h + 0.02 >= t.rho {
                return None;
            }
            let dx = rng.gen_range((max_h + 0.02)..t.rho * 0.95);
            let dy = rng.gen_range((max_h + 0.02)..t.rho * 0.95);
            let corner = rng.gen_range(0..4u8);
            let (cx, cy, theta) = match corner {
                0 => (dx, dy, rng.gen_range(0.0..std::f64::consts::FRAC_PI_2)),
                1 => (room.side_x - dx, dy, std::f64::consts::FRAC_PI_2),
                2 => (room.side_x - dx, room.side_y - dy, std::f64::consts::PI),
                _ => (dx, room.side_y - dy, 3.0 * std::f64::consts::FRAC_PI_2),
            };
            // Keep the box axis-aligned so the footprint stays in the corner.
            let theta = (theta / std::f64::consts::FRAC_PI_2).floor()
                * std::f64::consts::FRAC_PI_2;
            let boxed =
                OrientedBox::new(Point2::new(cx, cy), he[2], he, theta).ok()?;
            (footprint_inside(&boxed, &room.shell) && !collides(&boxed, placed))
                .then_some((boxed, theta, None))
        }
        PlacementRule::Middle => {
            if room.side_x <= 2.0 * margin || room.side_y <= 2.0 * margin {
                return None;
            }
            let cx = rng.gen_range(margin..(room.side_x - margin));
            let cy = rng.gen_range(margin..(room.side_y - margin));
            let theta = rng.gen_range(0.0..crate::geometry::TAU);
            let boxed = OrientedBox::new(Point2::new(cx, cy), he[2], he, theta).ok()?;
            (footprint_inside(&boxed, &room.shell) && !collides(&boxed, placed))
                .then_some((boxed, theta, None))
        }
        PlacementRule::AgainstWall => {
            let max_h = he[0].max(he[1]);
            if max_h + 0.02 >= t.rho || room.side_x <= 2.0 * margin {
                return None;
            }
            let d = rng.gen_range((max_h + 0.02)..t.rho * 0.95);
            let along = rng.gen_range(margin..(room.side_x - margin));
            // South wall only; rooms are rotation-agnostic for training.
            let boxed = OrientedBox::new(
                Point2::new(along, d),
                he[2],
                he,
                std::f64::consts::FRAC_PI_2,
            )
            .ok()?;
            (footprint_inside(&boxed, &room.shell) && !collides(&boxed, placed))
                .then_some((boxed, std::f64::consts::FRAC_PI_2, None))
        }
        PlacementRule::NearFacing(target_cat) => {
            let targets: Vec<usize> = placed
                .iter()
                .enumerate()
                .filter(|(_, o)| o.category == target_cat)
                .map(|(i, _)| i)
                .collect();
            if targets.is_empty() {
                return None;
            }
            let ti = targets[rng.gen_range(0..targets.len())];
            let target = &placed[ti];
            let dir = rng.gen_range(0.0..crate::geometry::TAU);
            let reach = target.boxed.half_extents[0].max(target.boxed.half_extents[1])
                + he[0].max(he[1])
                + rng.gen_range(0.05..0.4);
            let cx = target.boxed.center.x + reach * dir.cos();
            let cy = target.boxed.center.y + reach * dir.sin();
            let theta = (target.boxed.center.y - cy).atan2(target.boxed.center.x - cx);
            let boxed = OrientedBox::new(Point2::new(cx, cy), he[2], he, theta).ok()?;
            let gap = crate::geometry::shortest_distance(&boxed, &target.boxed);
            (gap <= t.epsilon
                && footprint_inside(&boxed, &room.shell)
                && !collides(&boxed, placed))
            .then_some((boxed, theta, Some(ti)))
        }
        PlacementRule::OnTop(target_cat) => {
            let targets: Vec<usize> = placed
                .iter()
                .enumerate()
                .filter(|(_, o)| o.category == target_cat)
                .map(|(i, _)| i)
                .collect();
            if targets.is_empty() {
                return None;
            }
            let ti = targets[rng.gen_range(0..targets.len())];
            let target = &placed[ti];
            // Inset by the footprint half diagonal so the object stays fully
            // on the supporter at any rotation.
            let inset = (he[0] * he[0] + he[1] * he[1]).sqrt();
            let ua = target.boxed.half_extents[0] - inset;
            let ub = target.boxed.half_extents[1] - inset;
            if ua <= 0.0 || ub <= 0.0 {
                return None;
            }
            let u = rng.gen_range(-ua..=ua);
            let v = rng.gen_range(-ub..=ub);
            let (a, b) = (target.boxed.axis_a(), target.boxed.axis_b());
            let center = Point2::new(
                target.boxed.center.x + u * a.x + v * b.x,
                target.boxed.center.y + u * a.y + v * b.y,
            );
            let theta = rng.gen_range(0.0..crate::geometry::TAU);
            let center_z = target.boxed.z_top() + he[2];
            let boxed = OrientedBox::new(center, center_z, he, theta).ok()?;
            let clear = placed
                .iter()
                .enumerate()
                .all(|(i, o)| i == ti || !boxed.footprint_intersects(&o.boxed));
            clear.then_some((boxed, theta, Some(ti)))
        }
    }
}

/// Generates `room_count` rooms following the rule set. Deterministic per
/// seed. Fails naming the rule when a placement cannot be satisfied after
/// bounded retries.
pub fn synthesize(
    rules: &SynthRuleSet,
    room_count: usize,
    seed: u64,
) -> Result<(Vec<Scene>, SynthManifest), SceneGenError> {
    let t = Thresholds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scenes = Vec::with_capacity(room_count);
    let mut manifest =
        SynthManifest { schema_version: SCHEMA_VERSION, seed, scenes: Vec::new() };

    for scene_index in 0..room_count {
        let side_x = rng.gen_range(rules.room_side_range.0..=rules.room_side_range.1);
        let side_y = rng.gen_range(rules.room_side_range.0..=rules.room_side_range.1);
        let shell = RoomShell::from_polygon(vec![
            Point2::new(0.0, 0.0),
            Point2::new(side_x, 0.0),
            Point2::new(side_x, side_y),
            Point2::new(0.0, side_y),
        ])?;
        let room = RoomCtx { shell, side_x, side_y };

        let mut objects: Vec<SceneObject> = Vec::new();
        let mut placements = Vec::new();
        for (rule_index, rule) in rules.rules.iter().enumerate() {
            let count = rng.gen_range(rule.count_range.0..=rule.count_range.1);
            for n in 0..count {
                let mut placed = None;
                for _ in 0..MAX_PLACEMENT_TRIES {
                    if let Some(hit) = try_place(rule, &room, &objects, &t, &mut rng) {
                        placed = Some(hit);
                        break;
                    }
                }
                let (boxed, _theta, target) = placed.ok_or_else(|| {
                    SceneGenError::Unsatisfiable(format!(
                        "rule {rule_index} ({} {:?}) in room {scene_index} after {MAX_PLACEMENT_TRIES} tries",
                        rule.category.name(),
                        rule.placement
                    ))
                })?;
                let id = format!("r{scene_index}-{}-{n}", rule.category.name());
                placements.push(PlacementManifest {
                    object_id: id.clone(),
                    rule_index,
                    category: rule.category,
                    placement: rule.placement,
                    target_id: target.map(|i| objects[i].id.clone()),
                });
                objects.push(SceneObject {
                    id,
                    category: rule.category,
                    boxed,
                    has_known_facing: true,
                });
            }
        }
        scenes.push(Scene::new(room.shell, objects, rules.room_type.clone())?);
        manifest.scenes.push(SceneManifest { scene_index, placements });
    }
    Ok((scenes, manifest))
}
