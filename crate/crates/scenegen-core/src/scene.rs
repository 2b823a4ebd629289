//! Scene model: the fixed object taxonomy, labeled oriented objects, and the
//! room that contains them.

use serde::{Deserialize, Serialize};

use crate::error::SceneGenError;
use crate::geometry::{OrientedBox, RoomShell};

/// The fixed 9-category taxonomy, in canonical order. All per-group feature
/// vectors index groups in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Bed,
    Chair,
    Decor,
    Picture,
    Sofa,
    Storage,
    Table,
    Tv,
    Other,
}

/// Orientation class of a category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    /// Has a meaningful facing direction (bed, chair, sofa, TV).
    Asymmetric,
    /// No clear front-facing direction (decor, table).
    Symmetric,
    /// Always faces away from its nearest wall (picture, storage).
    InsideFacing,
    Other,
}

impl Category {
    pub const ALL: [Category; 9] = [
        Category::Bed,
        Category::Chair,
        Category::Decor,
        Category::Picture,
        Category::Sofa,
        Category::Storage,
        Category::Table,
        Category::Tv,
        Category::Other,
    ];

    /// Number of groups m; feature vectors have length 3m+1 / 2m+4.
    pub const COUNT: usize = Self::ALL.len();

    /// Canonical index of this category in the group order.
    pub fn index(&self) -> usize {
        Self::ALL.iter().position(|c| c == self).expect("category in ALL")
    }

    pub fn name(&self) -> &'static str {
        match self {
            Category::Bed => "Bed",
            Category::Chair => "Chair",
            Category::Decor => "Decor",
            Category::Picture => "Picture",
            Category::Sofa => "Sofa",
            Category::Storage => "Storage",
            Category::Table => "Table",
            Category::Tv => "TV",
            Category::Other => "Other",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, SceneGenError> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| SceneGenError::UnknownCategory(name.to_string()))
    }

    pub fn symmetry(&self) -> Symmetry {
        match self {
            Category::Bed | Category::Chair | Category::Sofa | Category::Tv => Symmetry::Asymmetric,
            Category::Decor | Category::Table => Symmetry::Symmetric,
            Category::Picture | Category::Storage => Symmetry::InsideFacing,
            Category::Other => Symmetry::Other,
        }
    }

    pub fn is_asymmetric(&self) -> bool {
        self.symmetry() == Symmetry::Asymmetric
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One labeled, oriented object in a room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: String,
    pub category: Category,
    pub boxed: OrientedBox,
    /// When true for an Asymmetric object, `boxed.theta_a` is the labeled
    /// facing direction.
    pub has_known_facing: bool,
}

impl SceneObject {
    /// The labeled facing direction, when one exists.
    pub fn facing_angle(&self) -> Option<f64> {
        if self.has_known_facing {
            Some(self.boxed.theta_a)
        } else {
            None
        }
    }
}

/// A room with its contained objects; the unit of training and query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub shell: RoomShell,
    pub objects: Vec<SceneObject>,
    pub room_type: String,
}

impl Scene {
    pub fn new(
        shell: RoomShell,
        objects: Vec<SceneObject>,
        room_type: impl Into<String>,
    ) -> Result<Self, SceneGenError> {
        for obj in &objects {
            if !shell.contains(obj.boxed.center) {
                return Err(SceneGenError::InvalidScene(format!(
                    "object '{}' center lies outside the floor polygon",
                    obj.id
                )));
            }
        }
        Ok(Self { shell, objects, room_type: room_type.into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    #[test]
    fn taxonomy_partitions_into_symmetry_classes() {
        let asym: Vec<_> =
            Category::ALL.iter().filter(|c| c.symmetry() == Symmetry::Asymmetric).collect();
        assert_eq!(asym, [&Category::Bed, &Category::Chair, &Category::Sofa, &Category::Tv]);
        let sym: Vec<_> =
            Category::ALL.iter().filter(|c| c.symmetry() == Symmetry::Symmetric).collect();
        assert_eq!(sym, [&Category::Decor, &Category::Table]);
        let inf: Vec<_> =
            Category::ALL.iter().filter(|c| c.symmetry() == Symmetry::InsideFacing).collect();
        assert_eq!(inf, [&Category::Picture, &Category::Storage]);
    }

    #[test]
    fn category_names_round_trip() {
        for c in Category::ALL {
            assert_eq!(Category::from_name(c.name()).unwrap(), c);
        }
        assert!(Category::from_name("Lamp").is_err());
    }

    #[test]
    fn object_outside_room_is_rejected() {
        let shell = RoomShell::from_polygon(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 4.0),
            Point2::new(0.0, 4.0),
        ])
        .unwrap();
        let obj = SceneObject {
            id: "o1".into(),
            category: Category::Chair,
            boxed: OrientedBox::new(Point2::new(9.0, 9.0), 0.5, [0.3, 0.3, 0.5], 0.0).unwrap(),
            has_known_facing: true,
        };
        assert!(Scene::new(shell, vec![obj], "test").is_err());
    }
}
