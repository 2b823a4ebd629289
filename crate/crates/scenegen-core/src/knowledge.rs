//! Knowledge model: pooled per-category feature-vector collections with
//! fitted densities, likelihood queries, marginal prior reports, and a
//! versioned binary file format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::SceneGenError;
use crate::geometry::Thresholds;
use crate::kde::{self, DensityModel, VariableKind};
use crate::scene::{Category, Scene};
use crate::scene_graph::{self, OrientationFeatures, PositionFeatures};

pub mod format;

/// Manually tuned bandwidth for AverageDistance columns, damping the
/// missing-group sentinel's influence on the rest of the distribution.
pub const AVERAGE_DISTANCE_BANDWIDTH: f64 = 0.1;

/// Minimum pooled rows before a density is fitted for a category.
pub const MIN_ROWS_TO_FIT: usize = 2;

/// Which position-feature blocks enter the model columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionSelection {
    pub rp: bool,
    pub ad: bool,
    pub sp: bool,
    pub s: bool,
}

/// Which orientation-feature blocks enter the model columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientationSelection {
    pub rp: bool,
    pub tc: bool,
    pub ds: bool,
    pub f: bool,
    pub nt: bool,
}

/// Feature subsets used for training and queries. Columns always appear in
/// the canonical block order (RP, AD, SP, S) / (RP, TC, DS, F, NT) with
/// unselected blocks dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub position: PositionSelection,
    pub orientation: OrientationSelection,
}

impl Default for FeatureSelection {
    /// The shipped configuration: position AD+S+RP, orientation F+C+RP.
    fn default() -> Self {
        Self {
            position: PositionSelection { rp: true, ad: true, sp: false, s: true },
            orientation: OrientationSelection { rp: true, tc: true, ds: false, f: true, nt: false },
        }
    }
}

impl FeatureSelection {
    pub fn validate(&self) -> Result<(), SceneGenError> {
        let p = &self.position;
        let o = &self.orientation;
        if !(p.rp || p.ad || p.sp || p.s) || !(o.rp || o.tc || o.ds || o.f || o.nt) {
            return Err(SceneGenError::Contract("feature selection must be nonempty".into()));
        }
        Ok(())
    }

    /// Parses variant names like "AD+S+RP" or "F+C+RP" (position and
    /// orientation tokens may be mixed; unknown tokens are errors).
    pub fn parse_position(spec: &str) -> Result<PositionSelection, SceneGenError> {
        let mut sel = PositionSelection { rp: false, ad: false, sp: false, s: false };
        for tok in spec.split('+') {
            match tok.trim().to_ascii_uppercase().as_str() {
                "RP" => sel.rp = true,
                "AD" => sel.ad = true,
                "SP" => sel.sp = true,
                "S" => sel.s = true,
                other => {
                    return Err(SceneGenError::Contract(format!(
                        "unknown position feature '{other}'"
                    )))
                }
            }
        }
        Ok(sel)
    }

    pub fn parse_orientation(spec: &str) -> Result<OrientationSelection, SceneGenError> {
        let mut sel = OrientationSelection { rp: false, tc: false, ds: false, f: false, nt: false };
        for tok in spec.split('+') {
            match tok.trim().to_ascii_uppercase().as_str() {
                "RP" => sel.rp = true,
                "TC" | "C" => sel.tc = true,
                "DS" => sel.ds = true,
                "F" => sel.f = true,
                "NT" => sel.nt = true,
                other => {
                    return Err(SceneGenError::Contract(format!(
                        "unknown orientation feature '{other}'"
                    )))
                }
            }
        }
        Ok(sel)
    }

    /// Column labels, kinds, and bandwidth overrides for position densities.
    pub fn position_columns(&self) -> Vec<(String, VariableKind, Option<f64>)> {
        let mut cols = Vec::new();
        if self.position.rp {
            cols.push(("RP".to_string(), VariableKind::OrderedDiscrete, None));
        }
        if self.position.ad {
            for c in Category::ALL {
                cols.push((
                    format!("AD[{}]", c.name()),
                    VariableKind::Continuous,
                    Some(AVERAGE_DISTANCE_BANDWIDTH),
                ));
            }
        }
        if self.position.sp {
            for c in Category::ALL {
                cols.push((format!("SP[{}]", c.name()), VariableKind::OrderedDiscrete, None));
            }
        }
        if self.position.s {
            for c in Category::ALL {
                cols.push((format!("S[{}]", c.name()), VariableKind::OrderedDiscrete, None));
            }
        }
        cols
    }

    pub fn orientation_columns(&self) -> Vec<(String, VariableKind, Option<f64>)> {
        let mut cols = Vec::new();
        if self.orientation.rp {
            cols.push(("RP".to_string(), VariableKind::OrderedDiscrete, None));
        }
        if self.orientation.tc {
            cols.push(("TC".to_string(), VariableKind::OrderedDiscrete, None));
        }
        if self.orientation.ds {
            cols.push(("DS[Same]".to_string(), VariableKind::OrderedDiscrete, None));
            cols.push(("DS[Opp]".to_string(), VariableKind::OrderedDiscrete, None));
        }
        if self.orientation.f {
            for c in Category::ALL {
                cols.push((format!("F[{}]", c.name()), VariableKind::OrderedDiscrete, None));
            }
        }
        if self.orientation.nt {
            for c in Category::ALL {
                cols.push((format!("NT[{}]", c.name()), VariableKind::OrderedDiscrete, None));
            }
        }
        cols
    }

    /// Projects a full d_p onto the selected columns.
    pub fn project_position(&self, f: &PositionFeatures) -> Vec<f64> {
        let mut v = Vec::new();
        if self.position.rp {
            v.push(f.room_position as f64);
        }
        if self.position.ad {
            v.extend_from_slice(&f.average_distance);
        }
        if self.position.sp {
            v.extend(f.support.iter().map(|s| *s as f64));
        }
        if self.position.s {
            v.extend(f.surrounded_by.iter().map(|s| *s as f64));
        }
        v
    }

    /// Projects a full d_o onto the selected columns.
    pub fn project_orientation(&self, f: &OrientationFeatures) -> Vec<f64> {
        let mut v = Vec::new();
        if self.orientation.rp {
            v.push(f.room_position as f64);
        }
        if self.orientation.tc {
            v.push(f.towards_center as f64);
        }
        if self.orientation.ds {
            v.push(f.direction_similarity.0 as f64);
            v.push(f.direction_similarity.1 as f64);
        }
        if self.orientation.f {
            v.extend(f.facing.iter().map(|s| *s as f64));
        }
        if self.orientation.nt {
            v.extend(f.next_to.iter().map(|s| *s as f64));
        }
        v
    }
}

/// Per-category geometry statistics from the training corpus, used as the
/// default footprint for hypothesized objects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryGeometry {
    pub mean_half_extents: [f64; 3],
    pub mean_center_z: f64,
    pub count: usize,
}

impl Default for CategoryGeometry {
    fn default() -> Self {
        // Fallback footprint for categories absent from training data.
        Self { mean_half_extents: [0.3, 0.3, 0.3], mean_center_z: 0.3, count: 0 }
    }
}

/// Trained spatial priors for all categories.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeModel {
    pub selection: FeatureSelection,
    pub thresholds: Thresholds,
    pub dataset_id: String,
    /// Indexed by category index; Other never carries models.
    position_rows: Vec<Vec<Vec<f64>>>,
    position_density: Vec<Option<DensityModel>>,
    orientation_rows: Vec<Vec<Vec<f64>>>,
    orientation_density: Vec<Option<DensityModel>>,
    geometry: Vec<CategoryGeometry>,
}

/// Warnings produced while training (for example untrained categories).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub position_rows: BTreeMap<String, usize>,
    pub orientation_rows: BTreeMap<String, usize>,
    pub untrained: Vec<String>,
}

/// Pools scene-graph rows across scenes and fits one position density per
/// category plus one orientation density per Asymmetric category.
pub fn train(
    scenes: &[Scene],
    thresholds: &Thresholds,
    selection: &FeatureSelection,
    dataset_id: &str,
) -> Result<(KnowledgeModel, TrainingReport), SceneGenError> {
    if scenes.is_empty() {
        return Err(SceneGenError::Contract("training corpus is empty".into()));
    }
    thresholds.validate()?;
    selection.validate()?;

    let m = Category::COUNT;
    let mut position_rows: Vec<Vec<Vec<f64>>> = vec![Vec::new(); m];
    let mut orientation_rows: Vec<Vec<Vec<f64>>> = vec![Vec::new(); m];
    let mut ext_sum = vec![[0.0f64; 3]; m];
    let mut z_sum = vec![0.0f64; m];
    let mut counts = vec![0usize; m];

    for scene in scenes {
        let graph = scene_graph::extract_features(scene, thresholds)?;
        for (i, obj) in scene.objects.iter().enumerate() {
            let ci = obj.category.index();
            for k in 0..3 {
                ext_sum[ci][k] += obj.boxed.half_extents[k];
            }
            z_sum[ci] += obj.boxed.center_z;
            counts[ci] += 1;
            if obj.category == Category::Other {
                continue;
            }
            position_rows[ci].push(selection.project_position(&graph.position[i]));
        }
        for (i, feats) in &graph.orientation {
            let ci = scene.objects[*i].category.index();
            orientation_rows[ci].push(selection.project_orientation(feats));
        }
    }

    let pos_cols = selection.position_columns();
    let ori_cols = selection.orientation_columns();
    let fit_rows = |rows: &Vec<Vec<f64>>,
                    cols: &[(String, VariableKind, Option<f64>)]|
     -> Result<Option<DensityModel>, SceneGenError> {
        if rows.len() < MIN_ROWS_TO_FIT {
            return Ok(None);
        }
        let kinds: Vec<VariableKind> = cols.iter().map(|c| c.1).collect();
        let labels: Vec<String> = cols.iter().map(|c| c.0.clone()).collect();
        let overrides: Vec<Option<f64>> = cols.iter().map(|c| c.2).collect();
        kde::fit(rows, &kinds, &labels, &overrides).map(Some)
    };

    let mut position_density = Vec::with_capacity(m);
    let mut orientation_density = Vec::with_capacity(m);
    let mut report = TrainingReport {
        position_rows: BTreeMap::new(),
        orientation_rows: BTreeMap::new(),
        untrained: Vec::new(),
    };
    let mut any_trained = false;
    for cat in Category::ALL {
        let ci = cat.index();
        let pd = if cat == Category::Other { None } else { fit_rows(&position_rows[ci], &pos_cols)? };
        let od = if cat.is_asymmetric() { fit_rows(&orientation_rows[ci], &ori_cols)? } else { None };
        if cat != Category::Other {
            report.position_rows.insert(cat.name().to_string(), position_rows[ci].len());
            if cat.is_asymmetric() {
                report.orientation_rows.insert(cat.name().to_string(), orientation_rows[ci].len());
            }
            if pd.is_none() {
                report.untrained.push(cat.name().to_string());
            } else {
                any_trained = true;
            }
        }
        position_density.push(pd);
        orientation_density.push(od);
    }
    if !any_trained {
        return Err(SceneGenError::Contract(
            "no category has enough rows to fit a density".into(),
        ));
    }

    let geometry = (0..m)
        .map(|ci| {
            if counts[ci] == 0 {
                CategoryGeometry::default()
            } else {
                let n = counts[ci] as f64;
                CategoryGeometry {
                    mean_half_extents: [
                        ext_sum[ci][0] / n,
                        ext_sum[ci][1] / n,
                        ext_sum[ci][2] / n,
                    ],
                    mean_center_z: z_sum[ci] / n,
                    count: counts[ci],
                }
            }
        })
        .collect();

    let model = KnowledgeModel {
        selection: *selection,
        thresholds: *thresholds,
        dataset_id: dataset_id.to_string(),
        position_rows,
        position_density,
        orientation_rows,
        orientation_density,
        geometry,
    };
    Ok((model, report))
}

impl KnowledgeModel {
    pub fn is_trained(&self, category: Category) -> bool {
        self.position_density[category.index()].is_some()
    }

    pub fn has_orientation_model(&self, category: Category) -> bool {
        self.orientation_density[category.index()].is_some()
    }

    pub fn category_geometry(&self, category: Category) -> &CategoryGeometry {
        &self.geometry[category.index()]
    }

    pub fn position_row_count(&self, category: Category) -> usize {
        self.position_rows[category.index()].len()
    }

    pub fn orientation_row_count(&self, category: Category) -> usize {
        self.orientation_rows[category.index()].len()
    }

    pub fn position_rows(&self, category: Category) -> &[Vec<f64>] {
        &self.position_rows[category.index()]
    }

    pub fn orientation_rows(&self, category: Category) -> &[Vec<f64>] {
        &self.orientation_rows[category.index()]
    }

    /// Likelihood of a position feature vector under a category's prior.
    pub fn likelihood_position(
        &self,
        category: Category,
        features: &PositionFeatures,
    ) -> Result<f64, SceneGenError> {
        let density = self.position_density[category.index()]
            .as_ref()
            .ok_or_else(|| SceneGenError::UntrainedCategory(category.name().to_string()))?;
        density.pdf(&self.selection.project_position(features))
    }

    /// Likelihood of an orientation feature vector; only Asymmetric
    /// categories carry orientation priors.
    pub fn likelihood_orientation(
        &self,
        category: Category,
        features: &OrientationFeatures,
    ) -> Result<f64, SceneGenError> {
        if !category.is_asymmetric() {
            return Err(SceneGenError::RuleDeterminedOrientation(category.name().to_string()));
        }
        let density = self.orientation_density[category.index()]
            .as_ref()
            .ok_or_else(|| SceneGenError::UntrainedCategory(category.name().to_string()))?;
        density.pdf(&self.selection.project_orientation(features))
    }

    /// Guards queries whose features were extracted with other thresholds.
    pub fn check_thresholds(&self, t: &Thresholds) -> Result<(), SceneGenError> {
        if self.thresholds == *t {
            Ok(())
        } else {
            Err(SceneGenError::ThresholdMismatch)
        }
    }

    /// Empirical marginal tables from the stored sample matrices.
    pub fn priors_summary(&self) -> PriorsSummary {
        let pos_labels: Vec<String> =
            self.selection.position_columns().into_iter().map(|c| c.0).collect();
        let ori_labels: Vec<String> =
            self.selection.orientation_columns().into_iter().map(|c| c.0).collect();
        let mut categories = BTreeMap::new();
        for cat in Category::ALL {
            if cat == Category::Other {
                continue;
            }
            let ci = cat.index();
            if self.position_rows[ci].is_empty() && self.orientation_rows[ci].is_empty() {
                continue;
            }
            let mut entry = CategoryPriors::default();
            if let Some(rp_col) = pos_labels.iter().position(|l| l == "RP") {
                entry.room_position = histogram(&self.position_rows[ci], rp_col);
            }
            // SurroundedBy and Facing marginals pool counts over all groups.
            let s_cols: Vec<usize> = pos_labels
                .iter()
                .enumerate()
                .filter(|(_, l)| l.starts_with("S["))
                .map(|(j, _)| j)
                .collect();
            if !s_cols.is_empty() {
                entry.surrounded_by = histogram_sum(&self.position_rows[ci], &s_cols);
            }
            let f_cols: Vec<usize> = ori_labels
                .iter()
                .enumerate()
                .filter(|(_, l)| l.starts_with("F["))
                .map(|(j, _)| j)
                .collect();
            if !f_cols.is_empty() && !self.orientation_rows[ci].is_empty() {
                entry.facing = histogram_sum(&self.orientation_rows[ci], &f_cols);
            }
            if let Some(tc_col) = ori_labels.iter().position(|l| l == "TC") {
                if !self.orientation_rows[ci].is_empty() {
                    let n = self.orientation_rows[ci].len() as f64;
                    let ones =
                        self.orientation_rows[ci].iter().filter(|r| r[tc_col] > 0.5).count() as f64;
                    entry.towards_center_ratio = Some(ones / n);
                }
            }
            categories.insert(cat.name().to_string(), entry);
        }
        PriorsSummary { categories }
    }
}

fn histogram(rows: &[Vec<f64>], col: usize) -> BTreeMap<i64, f64> {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for r in rows {
        *counts.entry(r[col].round() as i64).or_default() += 1;
    }
    let n = rows.len() as f64;
    counts.into_iter().map(|(k, v)| (k, v as f64 / n)).collect()
}

fn histogram_sum(rows: &[Vec<f64>], cols: &[usize]) -> BTreeMap<i64, f64> {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for r in rows {
        let total: f64 = cols.iter().map(|&j| r[j]).sum();
        *counts.entry(total.round() as i64).or_default() += 1;
    }
    let n = rows.len() as f64;
    counts.into_iter().map(|(k, v)| (k, v as f64 / n)).collect()
}

/// Figure-7-style marginal report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PriorsSummary {
    pub categories: BTreeMap<String, CategoryPriors>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryPriors {
    /// Wall-count value -> empirical frequency.
    pub room_position: BTreeMap<i64, f64>,
    /// Total surrounding-neighbor count -> frequency.
    pub surrounded_by: BTreeMap<i64, f64>,
    /// Total faced-object count -> frequency.
    pub facing: BTreeMap<i64, f64>,
    pub towards_center_ratio: Option<f64>,
}
