//! Versioned binary container for knowledge models.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic            4 bytes  "SGKM"
//! format_version   u32      major version; readers reject other majors
//! m                u32      category count
//! category names   m x (u16 length + utf-8 bytes)
//! selection        2 bytes  position mask (RP|AD|SP|S), orientation mask
//!                           (RP|TC|DS|F|NT), low bit first
//! thresholds       5 x f64  rho, epsilon, phi, support_gap, overlap_frac
//! dataset_id       u16 length + utf-8 bytes
//! per category     pos_rows u32, ori_rows u32,
//!                  mean_half_extents 3 x f64, mean_center_z f64, count u32
//! matrices         per category in order: position rows (pos_rows x pos_dim
//!                  f64), position bandwidths (pos_dim f64, only when a
//!                  density was fitted), then the orientation pair likewise
//! checksum         u32      CRC-32 of every preceding byte
//! ```
//!
//! Dimensions and column metadata are derived from the selection masks, so
//! they are not stored.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::SceneGenError;
use crate::geometry::Thresholds;
use crate::kde::DensityModel;
use crate::knowledge::{
    CategoryGeometry, FeatureSelection, KnowledgeModel, OrientationSelection, PositionSelection,
    MIN_ROWS_TO_FIT,
};
use crate::scene::Category;

const MAGIC: &[u8; 4] = b"SGKM";
pub const FORMAT_VERSION: u32 = 1;

fn position_mask(s: &PositionSelection) -> u8 {
    (s.rp as u8) | (s.ad as u8) << 1 | (s.sp as u8) << 2 | (s.s as u8) << 3
}

fn orientation_mask(s: &OrientationSelection) -> u8 {
    (s.rp as u8) | (s.tc as u8) << 1 | (s.ds as u8) << 2 | (s.f as u8) << 3 | (s.nt as u8) << 4
}

fn unmask_position(b: u8) -> PositionSelection {
    PositionSelection { rp: b & 1 != 0, ad: b & 2 != 0, sp: b & 4 != 0, s: b & 8 != 0 }
}

fn unmask_orientation(b: u8) -> OrientationSelection {
    OrientationSelection {
        rp: b & 1 != 0,
        tc: b & 2 != 0,
        ds: b & 4 != 0,
        f: b & 8 != 0,
        nt: b & 16 != 0,
    }
}

/// Serializes a model to bytes (without writing a file).
pub fn to_bytes(model: &KnowledgeModel) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(Category::COUNT as u32).to_le_bytes());
    for c in Category::ALL {
        let name = c.name().as_bytes();
        buf.extend_from_slice(&(name.len() as u16).to_le_bytes());
        buf.extend_from_slice(name);
    }
    buf.push(position_mask(&model.selection.position));
    buf.push(orientation_mask(&model.selection.orientation));
    let t = &model.thresholds;
    for v in [t.rho, t.epsilon, t.phi, t.support_gap, t.support_overlap_frac] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let id = model.dataset_id.as_bytes();
    buf.extend_from_slice(&(id.len() as u16).to_le_bytes());
    buf.extend_from_slice(id);

    for ci in 0..Category::COUNT {
        buf.extend_from_slice(&(model.position_rows[ci].len() as u32).to_le_bytes());
        buf.extend_from_slice(&(model.orientation_rows[ci].len() as u32).to_le_bytes());
        let g = &model.geometry[ci];
        for v in g.mean_half_extents {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&g.mean_center_z.to_le_bytes());
        buf.extend_from_slice(&(g.count as u32).to_le_bytes());
    }

    for ci in 0..Category::COUNT {
        for row in &model.position_rows[ci] {
            for v in row {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        if let Some(density) = &model.position_density[ci] {
            for v in density.bandwidths() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        for row in &model.orientation_rows[ci] {
            for v in row {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        if let Some(density) = &model.orientation_density[ci] {
            for v in density.bandwidths() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }

    let checksum = crc32fast::hash(&buf);
    buf.extend_from_slice(&checksum.to_le_bytes());
    buf
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SceneGenError> {
        if self.pos + n > self.data.len() {
            return Err(SceneGenError::Truncated(format!(
                "need {n} bytes at offset {}, have {}",
                self.pos,
                self.data.len() - self.pos
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, SceneGenError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, SceneGenError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, SceneGenError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, SceneGenError> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn string(&mut self) -> Result<String, SceneGenError> {
        let len = self.u16()? as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| SceneGenError::Truncated("invalid utf-8 in header string".into()))
    }
}

/// Deserializes a model from bytes, verifying version and checksum.
pub fn from_bytes(data: &[u8]) -> Result<KnowledgeModel, SceneGenError> {
    if data.len() < 12 {
        return Err(SceneGenError::Truncated("file shorter than fixed header".into()));
    }
    let (body, tail) = data.split_at(data.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    if crc32fast::hash(body) != stored {
        return Err(SceneGenError::Checksum);
    }

    let mut r = Reader { data: body, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(SceneGenError::Truncated("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(SceneGenError::FormatVersion { found: version, expected: FORMAT_VERSION });
    }
    let m = r.u32()? as usize;
    if m != Category::COUNT {
        return Err(SceneGenError::Truncated(format!(
            "unexpected category count {m} (expected {})",
            Category::COUNT
        )));
    }
    for c in Category::ALL {
        let name = r.string()?;
        if name != c.name() {
            return Err(SceneGenError::Truncated(format!(
                "category name mismatch: file has '{name}', expected '{}'",
                c.name()
            )));
        }
    }
    let selection = FeatureSelection {
        position: unmask_position(r.take(1)?[0]),
        orientation: unmask_orientation(r.take(1)?[0]),
    };
    selection.validate()?;
    let thresholds = Thresholds {
        rho: r.f64()?,
        epsilon: r.f64()?,
        phi: r.f64()?,
        support_gap: r.f64()?,
        support_overlap_frac: r.f64()?,
    };
    let dataset_id = r.string()?;

    let mut pos_counts = Vec::with_capacity(m);
    let mut ori_counts = Vec::with_capacity(m);
    let mut geometry = Vec::with_capacity(m);
    for _ in 0..m {
        pos_counts.push(r.u32()? as usize);
        ori_counts.push(r.u32()? as usize);
        geometry.push(CategoryGeometry {
            mean_half_extents: [r.f64()?, r.f64()?, r.f64()?],
            mean_center_z: r.f64()?,
            count: r.u32()? as usize,
        });
    }

    let pos_cols = selection.position_columns();
    let ori_cols = selection.orientation_columns();
    let pos_dim = pos_cols.len();
    let ori_dim = ori_cols.len();

    let mut position_rows = Vec::with_capacity(m);
    let mut position_density = Vec::with_capacity(m);
    let mut orientation_rows = Vec::with_capacity(m);
    let mut orientation_density = Vec::with_capacity(m);
    for ci in 0..m {
        let cat = Category::ALL[ci];
        let n = pos_counts[ci];
        let flat = r.f64s(n * pos_dim)?;
        let rows: Vec<Vec<f64>> = flat.chunks(pos_dim.max(1)).map(|c| c.to_vec()).collect();
        let density = if cat != Category::Other && n >= MIN_ROWS_TO_FIT {
            let bandwidths = r.f64s(pos_dim)?;
            Some(DensityModel::from_parts(
                flat.clone(),
                n,
                pos_cols.iter().map(|c| c.1).collect(),
                bandwidths,
                pos_cols.iter().map(|c| c.0.clone()).collect(),
            )?)
        } else {
            None
        };
        position_rows.push(if n == 0 { Vec::new() } else { rows });
        position_density.push(density);

        let n = ori_counts[ci];
        let flat = r.f64s(n * ori_dim)?;
        let rows: Vec<Vec<f64>> = flat.chunks(ori_dim.max(1)).map(|c| c.to_vec()).collect();
        let density = if cat.is_asymmetric() && n >= MIN_ROWS_TO_FIT {
            let bandwidths = r.f64s(ori_dim)?;
            Some(DensityModel::from_parts(
                flat.clone(),
                n,
                ori_cols.iter().map(|c| c.1).collect(),
                bandwidths,
                ori_cols.iter().map(|c| c.0.clone()).collect(),
            )?)
        } else {
            None
        };
        orientation_rows.push(if n == 0 { Vec::new() } else { rows });
        orientation_density.push(density);
    }
    if r.pos != body.len() {
        return Err(SceneGenError::Truncated(format!(
            "{} trailing bytes after matrices",
            body.len() - r.pos
        )));
    }

    Ok(KnowledgeModel {
        selection,
        thresholds,
        dataset_id,
        position_rows,
        position_density,
        orientation_rows,
        orientation_density,
        geometry,
    })
}

/// Writes a model file atomically (write to a sibling temp file, then rename).
pub fn save(model: &KnowledgeModel, destination: &Path) -> Result<(), SceneGenError> {
    let bytes = to_bytes(model);
    let tmp = destination.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, destination)?;
    Ok(())
}

pub fn load(source: &Path) -> Result<KnowledgeModel, SceneGenError> {
    let mut data = Vec::new();
    std::fs::File::open(source)?.read_to_end(&mut data)?;
    from_bytes(&data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{OrientedBox, Point2, RoomShell};
    use crate::knowledge::train;
    use crate::scene::{Scene, SceneObject};
    use crate::scene_graph::PositionFeatures;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn fixture_model() -> KnowledgeModel {
        let shell = RoomShell::from_polygon(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 4.0),
            Point2::new(0.0, 4.0),
        ])
        .unwrap();
        let mk_scene = |i: usize| {
            let storage = SceneObject {
                id: format!("s{i}"),
                category: Category::Storage,
                boxed: OrientedBox::new(Point2::new(0.3, 0.3), 0.5, [0.25, 0.25, 0.5], 0.0)
                    .unwrap(),
                has_known_facing: false,
            };
            let bed = SceneObject {
                id: format!("b{i}"),
                category: Category::Bed,
                boxed: OrientedBox::new(
                    Point2::new(2.0, 1.0),
                    0.4,
                    [0.9, 0.7, 0.4],
                    std::f64::consts::FRAC_PI_2,
                )
                .unwrap(),
                has_known_facing: true,
            };
            Scene::new(shell.clone(), vec![storage, bed], "bedroom").unwrap()
        };
        let scenes: Vec<Scene> = (0..4).map(mk_scene).collect();
        train(&scenes, &Thresholds::default(), &FeatureSelection::default(), "fixture")
            .unwrap()
            .0
    }

    #[test]
    fn round_trip_preserves_pdfs_exactly() {
        let model = fixture_model();
        let bytes = to_bytes(&model);
        let loaded = from_bytes(&bytes).unwrap();
        assert_eq!(loaded, model);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let feats = PositionFeatures {
                room_position: rng.gen_range(0..4),
                average_distance: (0..Category::COUNT)
                    .map(|_| rng.gen_range(0.0..5.0))
                    .collect(),
                support: vec![0; Category::COUNT],
                surrounded_by: (0..Category::COUNT).map(|_| rng.gen_range(0..3)).collect(),
            };
            let a = model.likelihood_position(Category::Storage, &feats).unwrap();
            let b = loaded.likelihood_position(Category::Storage, &feats).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn corrupted_byte_fails_checksum() {
        let model = fixture_model();
        let mut bytes = to_bytes(&model);
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xFF;
        assert!(matches!(from_bytes(&bytes), Err(SceneGenError::Checksum)));
    }

    #[test]
    fn newer_version_is_rejected() {
        let model = fixture_model();
        let mut bytes = to_bytes(&model);
        bytes[4..8].copy_from_slice(&(FORMAT_VERSION + 1).to_le_bytes());
        let len = bytes.len();
        let crc = crc32fast::hash(&bytes[..len - 4]);
        bytes[len - 4..].copy_from_slice(&crc.to_le_bytes());
        assert!(matches!(from_bytes(&bytes), Err(SceneGenError::FormatVersion { .. })));
    }

    #[test]
    fn truncated_file_is_a_distinct_error() {
        let model = fixture_model();
        let bytes = to_bytes(&model);
        // Cut inside the matrices, then re-checksum so only truncation trips.
        let cut = bytes.len() - 100;
        let mut short = bytes[..cut].to_vec();
        let crc = crc32fast::hash(&short);
        short.extend_from_slice(&crc.to_le_bytes());
        assert!(matches!(from_bytes(&short), Err(SceneGenError::Truncated(_))));
    }

    #[test]
    fn save_and_load_files() {
        let model = fixture_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.sgm");
        save(&model, &path).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(loaded, model);
        assert!(!path.with_extension("tmp").exists());
    }

    #[test]
    fn serialization_is_deterministic() {
        let a = to_bytes(&fixture_model());
        let b = to_bytes(&fixture_model());
        assert_eq!(a, b);
    }
}
