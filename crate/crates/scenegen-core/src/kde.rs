//! Multivariate kernel density estimation over mixed ordered-discrete and
//! continuous dimensions.
//!
//! Continuous dimensions use a Gaussian kernel; ordered-discrete dimensions
//! use the Wang-van Ryzin kernel. The joint density is the product kernel
//! across dimensions with per-dimension bandwidths chosen by the normal
//! reference rule unless overridden.

use serde::{Deserialize, Serialize};

use crate::error::SceneGenError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariableKind {
    Continuous,
    OrderedDiscrete,
}

/// A fitted density: observation matrix, per-dimension kinds and bandwidths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    /// Row-major n x d observation matrix.
    observations: Vec<f64>,
    n: usize,
    d: usize,
    kinds: Vec<VariableKind>,
    bandwidths: Vec<f64>,
    dimension_labels: Vec<String>,
}

/// Floor applied to the sample standard deviation so constant columns still
/// yield a positive bandwidth.
const SIGMA_FLOOR: f64 = 0.01;

/// Upper clip for discrete-kernel bandwidths, which must stay below 1.
const DISCRETE_BANDWIDTH_MAX: f64 = 0.999;

/// Fits a density to `samples` (n rows of dimension d). `overrides[j]`, when
/// present, replaces the rule-of-thumb bandwidth for dimension j.
pub fn fit(
    samples: &[Vec<f64>],
    kinds: &[VariableKind],
    labels: &[String],
    overrides: &[Option<f64>],
) -> Result<DensityModel, SceneGenError> {
    let n = samples.len();
    if n == 0 {
        return Err(SceneGenError::Contract("cannot fit a density to zero samples".into()));
    }
    let d = kinds.len();
    if labels.len() != d || overrides.len() != d {
        return Err(SceneGenError::DimensionMismatch { expected: d, got: labels.len() });
    }
    let mut flat = Vec::with_capacity(n * d);
    for row in samples {
        if row.len() != d {
            return Err(SceneGenError::DimensionMismatch { expected: d, got: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(SceneGenError::Contract("non-finite value in training sample".into()));
        }
        flat.extend_from_slice(row);
    }

    let mut bandwidths = Vec::with_capacity(d);
    for j in 0..d {
        let h = match overrides[j] {
            Some(h) if h > 0.0 => h,
            Some(_) => {
                return Err(SceneGenError::Contract("bandwidth override must be positive".into()))
            }
            None => {
                let mean = (0..n).map(|i| flat[i * d + j]).sum::<f64>() / n as f64;
                let var = if n > 1 {
                    (0..n).map(|i| (flat[i * d + j] - mean).powi(2)).sum::<f64>() / (n - 1) as f64
                } else {
                    0.0
                };
                let sigma = var.sqrt().max(SIGMA_FLOOR);
                // Normal reference rule with the multivariate exponent.
                let h = 1.06 * sigma * (n as f64).powf(-1.0 / (4.0 + d as f64));
                match kinds[j] {
                    VariableKind::Continuous => h,
                    VariableKind::OrderedDiscrete => h.min(DISCRETE_BANDWIDTH_MAX),
                }
            }
        };
        bandwidths.push(h);
    }

    Ok(DensityModel {
        observations: flat,
        n,
        d,
        kinds: kinds.to_vec(),
        bandwidths,
        dimension_labels: labels.to_vec(),
    })
}

/// Wang-van Ryzin kernel for ordered-discrete data: mass (1-lambda) at the
/// observation, geometric tails elsewhere.
fn wang_van_ryzin(x: f64, obs: f64, lambda: f64) -> f64 {
    let diff = (x - obs).abs();
    if diff < 0.5 {
        1.0 - lambda
    } else {
        0.5 * (1.0 - lambda) * lambda.powf(diff)
    }
}

fn gaussian(x: f64, obs: f64, h: f64) -> f64 {
    let z = (x - obs) / h;
    (-0.5 * z * z).exp() / (h * (2.0 * std::f64::consts::PI).sqrt())
}

impl DensityModel {
    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn observation_count(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn kinds(&self) -> &[VariableKind] {
        &self.kinds
    }

    pub fn dimension_labels(&self) -> &[String] {
        &self.dimension_labels
    }

    pub fn observations(&self) -> impl Iterator<Item = &[f64]> {
        self.observations.chunks(self.d.max(1))
    }

    /// Rebuilds a model from raw parts; used by the model-file reader.
    pub fn from_parts(
        observations: Vec<f64>,
        n: usize,
        kinds: Vec<VariableKind>,
        bandwidths: Vec<f64>,
        dimension_labels: Vec<String>,
    ) -> Result<Self, SceneGenError> {
        let d = kinds.len();
        if observations.len() != n * d || bandwidths.len() != d || dimension_labels.len() != d {
            return Err(SceneGenError::Truncated("density model parts disagree on shape".into()));
        }
        Ok(Self { observations, n, d, kinds, bandwidths, dimension_labels })
    }

    /// Evaluates the product-kernel density at `x`.
    pub fn pdf(&self, x: &[f64]) -> Result<f64, SceneGenError> {
        if x.len() != self.d {
            return Err(SceneGenError::DimensionMismatch { expected: self.d, got: x.len() });
        }
        let mut total = 0.0;
        for row in self.observations.chunks(self.d) {
            let mut term = 1.0;
            for j in 0..self.d {
                term *= match self.kinds[j] {
                    VariableKind::Continuous => gaussian(x[j], row[j], self.bandwidths[j]),
                    VariableKind::OrderedDiscrete => {
                        wang_van_ryzin(x[j], row[j], self.bandwidths[j])
                    }
                };
                if term == 0.0 {
                    break;
                }
            }
            total += term;
        }
        Ok(total / self.n as f64)
    }
}
