//! Spatial scene-graph extraction: positional and orientational relationships
//! between an object, the per-category object groups, and the room, assembled
//! into the d_p and d_o feature vectors.

use serde::{Deserialize, Serialize};

use crate::error::SceneGenError;
use crate::geometry::{
    angular_distance, ray_hits_box, ray_hits_wall, shortest_distance, Dir2, RoomShell, Thresholds,
};
use crate::scene::{Category, Scene, SceneObject};

/// AverageDistance value reported when a group has no eligible members.
pub const MISSING_GROUP_SENTINEL: f64 = 1000.0;

/// Positional features of one object against all m groups and the room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionFeatures {
    /// Number of walls within rho of the object center: 0 middle, 1 edge,
    /// >= 2 corner.
    pub room_position: u32,
    pub average_distance: Vec<f64>,
    /// 1 on top of a group member, -1 under one, 0 otherwise.
    pub support: Vec<i8>,
    pub surrounded_by: Vec<u32>,
}

impl PositionFeatures {
    /// Flattens to [RP, AD, SP, S], length 3m+1.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * self.average_distance.len() + 1);
        v.push(self.room_position as f64);
        v.extend_from_slice(&self.average_distance);
        v.extend(self.support.iter().map(|s| *s as f64));
        v.extend(self.surrounded_by.iter().map(|s| *s as f64));
        v
    }
}

/// Orientational features of one Asymmetric object with a known facing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationFeatures {
    pub room_position: u32,
    pub towards_center: u8,
    /// [Same, Opp] neighbor counts.
    pub direction_similarity: (u32, u32),
    pub facing: Vec<u32>,
    pub next_to: Vec<u32>,
}

impl OrientationFeatures {
    /// Flattens to [RP, TC, DS, F, NT], length 2m+4.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.facing.len() + 4);
        v.push(self.room_position as f64);
        v.push(self.towards_center as f64);
        v.push(self.direction_similarity.0 as f64);
        v.push(self.direction_similarity.1 as f64);
        v.extend(self.facing.iter().map(|s| *s as f64));
        v.extend(self.next_to.iter().map(|s| *s as f64));
        v
    }
}

/// Extracted graph of one scene: per-object feature vectors plus the group
/// index in canonical category order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    /// groups[i] holds object indices of category Category::ALL[i].
    pub groups: Vec<Vec<usize>>,
    /// One entry per object, aligned with scene.objects.
    pub position: Vec<PositionFeatures>,
    /// (object index, features) for Asymmetric objects with known facing.
    pub orientation: Vec<(usize, OrientationFeatures)>,
}

/// Number of walls the object center is within rho of.
pub fn room_position(obj: &SceneObject, shell: &RoomShell, t: &Thresholds) -> u32 {
    shell
        .walls()
        .iter()
        .filter(|w| shortest_distance(obj.boxed.center, *w) < t.rho)
        .count() as u32
}

/// Mean box distance to the group's other members, or the missing-group
/// sentinel when none exist.
pub fn average_distance(obj: &SceneObject, group: &[&SceneObject]) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for other in group {
        if other.id == obj.id {
            continue;
        }
        sum += shortest_distance(&obj.boxed, &other.boxed);
        count += 1;
    }
    if count == 0 {
        MISSING_GROUP_SENTINEL
    } else {
        sum / count as f64
    }
}

/// Count of group members strictly within epsilon.
pub fn surrounded_by(obj: &SceneObject, group: &[&SceneObject], t: &Thresholds) -> u32 {
    group
        .iter()
        .filter(|o| o.id != obj.id)
        .filter(|o| shortest_distance(&obj.boxed, &o.boxed) < t.epsilon)
        .count() as u32
}

/// Vertical support relation: 1 when the object sits on a group member, -1
/// when a member sits on it, 0 otherwise. The on-top case wins when both hold.
pub fn support(obj: &SceneObject, group: &[&SceneObject], t: &Thresholds) -> i8 {
    let overlaps = |a: &SceneObject, b: &SceneObject| {
        a.boxed.footprint_overlap_frac(&b.boxed) >= t.support_overlap_frac
    };
    for other in group {
        if other.id == obj.id {
            continue;
        }
        if (obj.boxed.z_bottom() - other.boxed.z_top()).abs() <= t.support_gap
            && overlaps(obj, other)
        {
            return 1;
        }
    }
    for other in group {
        if other.id == obj.id {
            continue;
        }
        if (other.boxed.z_bottom() - obj.boxed.z_top()).abs() <= t.support_gap
            && overlaps(obj, other)
        {
            return -1;
        }
    }
    0
}

/// Indices of the floor(l/2) walls furthest from `center`, ties broken by wall
/// index.
fn furthest_walls(center: crate::geometry::Point2, shell: &RoomShell) -> Vec<usize> {
    let mut order: Vec<usize> = (0..shell.walls().len()).collect();
    order.sort_by(|&i, &j| {
        let di = shortest_distance(center, &shell.walls()[i]);
        let dj = shortest_distance(center, &shell.walls()[j]);
        dj.partial_cmp(&di).unwrap().then(i.cmp(&j))
    });
    order.truncate(shell.walls().len() / 2);
    order
}

/// 1 when the facing ray hits one of the furthest floor(l/2) walls.
pub fn towards_center(obj: &SceneObject, shell: &RoomShell) -> Result<u8, SceneGenError> {
    let theta = obj
        .facing_angle()
        .ok_or_else(|| SceneGenError::Contract(format!("object '{}' has no facing", obj.id)))?;
    let center = obj.boxed.center;
    let dir = Dir2::from_angle(theta);
    let hit = furthest_walls(center, shell)
        .into_iter()
        .any(|i| ray_hits_wall(center, dir, &shell.walls()[i]));
    Ok(hit as u8)
}

/// 1 when the object backs onto its closest wall: the ray along -a hits the
/// wall with minimal box distance and a is normal to it within phi.
pub fn away_from_wall(
    obj: &SceneObject,
    shell: &RoomShell,
    t: &Thresholds,
) -> Result<u8, SceneGenError> {
    let theta = obj
        .facing_angle()
        .ok_or_else(|| SceneGenError::Contract(format!("object '{}' has no facing", obj.id)))?;
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (i, w) in shell.walls().iter().enumerate() {
        let d = shortest_distance(&obj.boxed, w);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    let wall = &shell.walls()[best];
    let a = Dir2::from_angle(theta);
    let back_hits = ray_hits_wall(obj.boxed.center, a.negate(), wall);
    let wd = wall.direction();
    let dot = (a.x * wd.x + a.y * wd.y).abs().min(1.0);
    let perp = dot.asin() <= t.phi;
    Ok((back_hits && perp) as u8)
}

/// [Same, Opp] counts over all other objects with a known facing within
/// epsilon (non-strict), compared by minimal-arc angle with tolerance phi.
pub fn direction_similarity(
    obj: &SceneObject,
    others: &[&SceneObject],
    t: &Thresholds,
) -> (u32, u32) {
    let theta_k = match obj.facing_angle() {
        Some(theta) => theta,
        None => return (0, 0),
    };
    let mut same = 0;
    let mut opp = 0;
    for other in others {
        if other.id == obj.id {
            continue;
        }
        let theta_j = match other.facing_angle() {
            Some(theta) => theta,
            None => continue,
        };
        if shortest_distance(&obj.boxed, &other.boxed) > t.epsilon {
            continue;
        }
        let diff = angular_distance(theta_k, theta_j);
        if diff <= t.phi {
            same += 1;
        }
        if (std::f64::consts::PI - diff).abs() <= t.phi {
            opp += 1;
        }
    }
    (same, opp)
}

/// Count of group members within epsilon hit by the primary-axis ray.
pub fn facing(obj: &SceneObject, group: &[&SceneObject], t: &Thresholds) -> u32 {
    let dir = Dir2::from_angle(obj.boxed.theta_a);
    group
        .iter()
        .filter(|o| o.id != obj.id)
        .filter(|o| shortest_distance(&obj.boxed, &o.boxed) <= t.epsilon)
        .filter(|o| ray_hits_box(obj.boxed.center, dir, &o.boxed))
        .count() as u32
}

/// Count of group members within epsilon hit by the +b or -b ray; a member
/// visible along both sides counts once.
pub fn next_to(obj: &SceneObject, group: &[&SceneObject], t: &Thresholds) -> u32 {
    let b = Dir2::from_angle(obj.boxed.theta_b());
    group
        .iter()
        .filter(|o| o.id != obj.id)
        .filter(|o| shortest_distance(&obj.boxed, &o.boxed) <= t.epsilon)
        .filter(|o| {
            ray_hits_box(obj.boxed.center, b, &o.boxed)
                || ray_hits_box(obj.boxed.center, b.negate(), &o.boxed)
        })
        .count() as u32
}

/// Computes d_p for one (possibly hypothetical) object against a scene.
pub fn position_features(
    obj: &SceneObject,
    scene: &Scene,
    groups: &[Vec<usize>],
    t: &Thresholds,
) -> PositionFeatures {
    let m = Category::COUNT;
    let mut ad = Vec::with_capacity(m);
    let mut sp = Vec::with_capacity(m);
    let mut sb = Vec::with_capacity(m);
    for members in groups.iter().take(m) {
        let group: Vec<&SceneObject> = members.iter().map(|&i| &scene.objects[i]).collect();
        ad.push(average_distance(obj, &group));
        sp.push(support(obj, &group, t));
        sb.push(surrounded_by(obj, &group, t));
    }
    PositionFeatures {
        room_position: room_position(obj, &scene.shell, t),
        average_distance: ad,
        support: sp,
        surrounded_by: sb,
    }
}

/// Computes d_o for one Asymmetric object with a known facing.
pub fn orientation_features(
    obj: &SceneObject,
    scene: &Scene,
    groups: &[Vec<usize>],
    t: &Thresholds,
) -> Result<OrientationFeatures, SceneGenError> {
    if obj.facing_angle().is_none() {
        return Err(SceneGenError::Contract(format!(
            "orientation features need a facing direction (object '{}')",
            obj.id
        )));
    }
    let m = Category::COUNT;
    let all: Vec<&SceneObject> = scene.objects.iter().collect();
    let mut f = Vec::with_capacity(m);
    let mut nt = Vec::with_capacity(m);
    for members in groups.iter().take(m) {
        let group: Vec<&SceneObject> = members.iter().map(|&i| &scene.objects[i]).collect();
        f.push(facing(obj, &group, t));
        nt.push(next_to(obj, &group, t));
    }
    Ok(OrientationFeatures {
        room_position: room_position(obj, &scene.shell, t),
        towards_center: towards_center(obj, &scene.shell)?,
        direction_similarity: direction_similarity(obj, &all, t),
        facing: f,
        next_to: nt,
    })
}

/// Builds the per-category group index for a scene.
pub fn group_index(scene: &Scene) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); Category::COUNT];
    for (i, obj) in scene.objects.iter().enumerate() {
        groups[obj.category.index()].push(i);
    }
    groups
}

/// Extracts the full scene graph: groups, d_p for every object, d_o for every
/// Asymmetric object with a labeled facing.
pub fn extract_features(scene: &Scene, t: &Thresholds) -> Result<SceneGraph, SceneGenError> {
    t.validate()?;
    let groups = group_index(scene);
    let mut position = Vec::with_capacity(scene.objects.len());
    let mut orientation = Vec::new();
    for (i, obj) in scene.objects.iter().enumerate() {
        position.push(position_features(obj, scene, &groups, t));
        if obj.category.is_asymmetric() && obj.facing_angle().is_some() {
            orientation.push((i, orientation_features(obj, scene, &groups, t)?));
        }
    }
    Ok(SceneGraph { groups, position, orientation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{OrientedBox, Point2, RoomShell};

    fn square_room(side: f64) -> RoomShell {
        RoomShell::from_polygon(vec![
            Point2::new(0.0, 0.0),
            Point2::new(side, 0.0),
            Point2::new(side, side),
            Point2::new(0.0, side),
        ])
        .unwrap()
    }

    fn obj(id: &str, cat: Category, x: f64, y: f64, theta: f64) -> SceneObject {
        SceneObject {
            id: id.into(),
            category: cat,
            boxed: OrientedBox::new(Point2::new(x, y), 0.4, [0.25, 0.25, 0.4], theta).unwrap(),
            has_known_facing: true,
        }
    }

    #[test]
    fn room_position_middle_edge_corner() {
        let shell = square_room(4.0);
        let t = Thresholds::default();
        let mk = |x, y| obj("o", Category::Chair, x, y, 0.0);
        assert_eq!(room_position(&mk(2.0, 2.0), &shell, &t), 0);
        assert_eq!(room_position(&mk(0.3, 2.0), &shell, &t), 1);
        assert_eq!(room_position(&mk(0.3, 0.3), &shell, &t), 2);
    }

    #[test]
    fn average_distance_mean_and_sentinel() {
        let a = obj("a", Category::Chair, 0.0, 0.0, 0.0);
        // Unit boxes of half extent 0.25: center gaps 1.5 and 3.5 give box
        // distances 1.0 and 3.0.
        let b = obj("b", Category::Chair, 1.5, 0.0, 0.0);
        let c = obj("c", Category::Chair, 3.5, 0.0, 0.0);
        let group = vec![&a, &b, &c];
        assert!((average_distance(&a, &group) - 2.0).abs() < 1e-9);
        let solo = vec![&a];
        assert_eq!(average_distance(&a, &solo), MISSING_GROUP_SENTINEL);
        let touching = obj("d", Category::Chair, 0.5, 0.0, 0.0);
        assert_eq!(average_distance(&a, &vec![&a, &touching]), 0.0);
    }

    #[test]
    fn surrounded_by_strict_threshold() {
        let t = Thresholds::default();
        let a = obj("a", Category::Chair, 0.0, 0.0, 0.0);
        let near = obj("b", Category::Chair, 1.0, 0.0, 0.0); // box distance 0.5
        let nearer = obj("c", Category::Chair, 1.4, 0.0, 0.0); // 0.9
        let far = obj("d", Category::Chair, 2.5, 0.0, 0.0); // 2.0
        let at_eps = obj("e", Category::Chair, 1.5, 0.0, 0.0); // exactly 1.0
        assert_eq!(surrounded_by(&a, &vec![&near, &nearer, &far], &t), 2);
        assert_eq!(surrounded_by(&a, &vec![], &t), 0);
        assert_eq!(surrounded_by(&a, &vec![&at_eps], &t), 0);
    }

    #[test]
    fn surrounded_by_monotone_in_epsilon() {
        let a = obj("a", Category::Chair, 0.0, 0.0, 0.0);
        let members: Vec<SceneObject> = (1..6)
            .map(|i| obj(&format!("m{i}"), Category::Chair, i as f64 * 0.7, 0.0, 0.0))
            .collect();
        let refs: Vec<&SceneObject> = members.iter().collect();
        let mut prev = 0;
        for k in 1..10 {
            let mut t = Thresholds::default();
            t.epsilon = 0.4 * k as f64;
            let count = surrounded_by(&a, &refs, &t);
            assert!(count >= prev);
            prev = count;
        }
    }

    #[test]
    fn support_on_top_and_under() {
        let t = Thresholds::default();
        let table = SceneObject {
            id: "table".into(),
            category: Category::Table,
            boxed: OrientedBox::new(Point2::new(0.0, 0.0), 0.37, [0.6, 0.6, 0.37], 0.0).unwrap(),
            has_known_facing: false,
        };
        let decor = SceneObject {
            id: "decor".into(),
            category: Category::Decor,
            boxed: OrientedBox::new(Point2::new(0.1, 0.0), 0.85, [0.1, 0.1, 0.1], 0.0).unwrap(),
            has_known_facing: false,
        };
        assert_eq!(support(&decor, &vec![&table], &t), 1);
        assert_eq!(support(&table, &vec![&decor], &t), -1);
        let chair1 = obj("c1", Category::Chair, 0.0, 2.0, 0.0);
        let chair2 = obj("c2", Category::Chair, 0.8, 2.0, 0.0);
        assert_eq!(support(&chair1, &vec![&chair2], &t), 0);
    }

    #[test]
    fn towards_center_in_square_room() {
        let shell = square_room(4.0);
        let corner_facing_in = obj("a", Category::Chair, 0.3, 0.3, std::f64::consts::FRAC_PI_4);
        assert_eq!(towards_center(&corner_facing_in, &shell).unwrap(), 1);
        let corner_facing_wall = obj("b", Category::Chair, 0.3, 0.3, std::f64::consts::PI);
        assert_eq!(towards_center(&corner_facing_wall, &shell).unwrap(), 0);
        // At the exact centroid all walls are equidistant; the two
        // lowest-index walls win the tie, and the +x ray hits wall 1 (x=4).
        let center = obj("c", Category::Chair, 2.0, 2.0, 0.0);
        assert_eq!(towards_center(&center, &shell).unwrap(), 1);
    }

    #[test]
    fn towards_center_needs_facing() {
        let shell = square_room(4.0);
        let mut o = obj("a", Category::Chair, 2.0, 2.0, 0.0);
        o.has_known_facing = false;
        assert!(towards_center(&o, &shell).is_err());
    }

    #[test]
    fn away_from_wall_cases() {
        let shell = square_room(4.0);
        let t = Thresholds::default();
        // Against the south wall (y=0), facing north.
        let north = obj("a", Category::Storage, 2.0, 0.3, std::f64::consts::FRAC_PI_2);
        assert_eq!(away_from_wall(&north, &shell, &t).unwrap(), 1);
        let east = obj("b", Category::Storage, 2.0, 0.3, 0.0);
        assert_eq!(away_from_wall(&east, &shell, &t).unwrap(), 0);
        // Tilted 10 degrees with phi = 15 degrees still counts.
        let mut t2 = Thresholds::default();
        t2.phi = 15f64.to_radians();
        let tilted = obj(
            "c",
            Category::Storage,
            2.0,
            0.3,
            std::f64::consts::FRAC_PI_2 + 10f64.to_radians(),
        );
        assert_eq!(away_from_wall(&tilted, &shell, &t2).unwrap(), 1);
    }

    #[test]
    fn direction_similarity_same_and_opposite() {
        let t = Thresholds::default();
        let a = obj("a", Category::Chair, 0.0, 0.0, 0.0);
        let same = obj("b", Category::Chair, 1.0, 0.0, 0.0);
        assert_eq!(direction_similarity(&a, &vec![&a, &same], &t), (1, 0));
        let opp = obj("c", Category::Chair, 1.0, 0.0, std::f64::consts::PI);
        assert_eq!(direction_similarity(&a, &vec![&a, &opp], &t), (0, 1));
        let far = obj("d", Category::Chair, 4.0, 0.0, 0.0);
        assert_eq!(direction_similarity(&a, &vec![&a, &far], &t), (0, 0));
    }

    #[test]
    fn facing_counts_ray_hits() {
        let t = Thresholds::default();
        let chair = obj("chair", Category::Chair, 0.0, 0.0, 0.0);
        let table = obj("t1", Category::Table, 1.0, 0.0, 0.0);
        assert_eq!(facing(&chair, &vec![&table], &t), 1);
        let chair_away = obj("chair2", Category::Chair, 0.0, 0.0, std::f64::consts::FRAC_PI_2);
        assert_eq!(facing(&chair_away, &vec![&table], &t), 0);
        // Two tables in line along the primary axis, both within epsilon.
        let table2 = obj("t2", Category::Table, 1.4, 0.0, 0.0);
        assert_eq!(facing(&chair, &vec![&table, &table2], &t), 2);
    }

    #[test]
    fn next_to_counts_both_sides_once() {
        let t = Thresholds::default();
        let bed = obj("bed", Category::Bed, 0.0, 0.0, 0.0);
        let left = obj("n1", Category::Storage, 0.0, 1.0, 0.0);
        let right = obj("n2", Category::Storage, 0.0, -1.0, 0.0);
        let front = obj("n3", Category::Storage, 1.0, 0.0, 0.0);
        assert_eq!(next_to(&bed, &vec![&left], &t), 1);
        assert_eq!(next_to(&bed, &vec![&left, &right], &t), 2);
        assert_eq!(next_to(&bed, &vec![&front], &t), 0);
    }

    #[test]
    fn extract_features_empty_room() {
        let scene = Scene::new(square_room(4.0), vec![], "test").unwrap();
        let g = extract_features(&scene, &Thresholds::default()).unwrap();
        assert!(g.position.is_empty());
        assert!(g.orientation.is_empty());
        assert!(g.groups.iter().all(|m| m.is_empty()));
    }

    #[test]
    fn single_corner_storage_vector() {
        let storage = SceneObject {
            id: "s".into(),
            category: Category::Storage,
            boxed: OrientedBox::new(Point2::new(0.3, 0.3), 0.5, [0.25, 0.25, 0.5], 0.0).unwrap(),
            has_known_facing: false,
        };
        let scene = Scene::new(square_room(4.0), vec![storage], "test").unwrap();
        let g = extract_features(&scene, &Thresholds::default()).unwrap();
        let flat = g.position[0].flatten();
        assert_eq!(flat.len(), 3 * Category::COUNT + 1);
        assert_eq!(flat[0], 2.0);
        assert!(flat[1..=Category::COUNT].iter().all(|v| *v == MISSING_GROUP_SENTINEL));
        assert!(flat[Category::COUNT + 1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn bed_with_nightstand_orientation_vector() {
        // Bed at the center facing the centroid direction, nightstand to its
        // side along the secondary axis.
        let bed = obj("bed", Category::Bed, 2.0, 0.8, std::f64::consts::FRAC_PI_2);
        let stand = SceneObject {
            id: "stand".into(),
            category: Category::Storage,
            boxed: OrientedBox::new(Point2::new(1.1, 0.8), 0.3, [0.2, 0.2, 0.3], 0.0).unwrap(),
            has_known_facing: false,
        };
        let scene = Scene::new(square_room(4.0), vec![bed, stand], "test").unwrap();
        let g = extract_features(&scene, &Thresholds::default()).unwrap();
        assert_eq!(g.orientation.len(), 1);
        let (idx, feats) = &g.orientation[0];
        assert_eq!(*idx, 0);
        assert_eq!(feats.towards_center, 1);
        assert_eq!(feats.next_to[Category::Storage.index()], 1);
        assert_eq!(feats.flatten().len(), 2 * Category::COUNT + 4);
    }

    #[test]
    fn facing_plus_next_to_bounded_by_group_size() {
        let t = Thresholds::default();
        let chair = obj("chair", Category::Chair, 0.0, 0.0, 0.0);
        let members: Vec<SceneObject> = (0..4)
            .map(|i| obj(&format!("t{i}"), Category::Table, 0.9 + 0.1 * i as f64, 0.0, 0.0))
            .collect();
        let refs: Vec<&SceneObject> = members.iter().collect();
        let f = facing(&chair, &refs, &t);
        let n = next_to(&chair, &refs, &t);
        assert!(f as usize <= refs.len());
        assert!(n as usize <= refs.len());
    }
}
