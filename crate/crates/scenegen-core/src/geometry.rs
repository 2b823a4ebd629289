//! 2.5-D geometric kernel: points, oriented boxes, room polygons, distances,
//! ray tests, and pose-axis standardization.
//!
//! All shapes live in floor-plan coordinates: the floor is the (x,y)-plane and
//! z is kept only for vertical support checks. Box comparisons operate on the
//! 2-D footprint.

use serde::{Deserialize, Serialize};

use crate::error::SceneGenError;

pub const TAU: f64 = std::f64::consts::TAU;

/// A point on the floor plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Unit direction on the floor plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dir2 {
    pub x: f64,
    pub y: f64,
}

impl Dir2 {
    /// Builds a unit direction, rejecting the zero vector.
    pub fn new(x: f64, y: f64) -> Result<Self, SceneGenError> {
        let n = x.hypot(y);
        if n < 1e-12 || !n.is_finite() {
            return Err(SceneGenError::Contract("zero or non-finite direction vector".into()));
        }
        Ok(Self { x: x / n, y: y / n })
    }

    pub fn from_angle(theta: f64) -> Self {
        Self { x: theta.cos(), y: theta.sin() }
    }

    pub fn angle(&self) -> f64 {
        canonical_angle(self.y.atan2(self.x))
    }

    pub fn negate(&self) -> Self {
        Self { x: -self.x, y: -self.y }
    }

    /// Counter-clockwise perpendicular (the secondary axis b of a box whose
    /// primary axis points this way).
    pub fn perp_ccw(&self) -> Self {
        Self { x: -self.y, y: self.x }
    }
}

/// Maps any angle into [0, 2pi).
pub fn canonical_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Minimal-arc distance between two angles, in [0, pi].
pub fn angular_distance(theta1: f64, theta2: f64) -> f64 {
    let d = (theta1 - theta2).rem_euclid(TAU);
    d.min(TAU - d)
}

/// An oriented 3-D bounding box in the 2.5-D representation. The footprint is
/// the rectangle spanned by the primary axis (angle `theta_a`) and the
/// secondary axis (`theta_a + pi/2`, counter-clockwise); z is carried for
/// support detection only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Point2,
    pub center_z: f64,
    /// Half sizes along (a, b, z), nonnegative.
    pub half_extents: [f64; 3],
    /// Primary-axis angle in [0, 2pi).
    pub theta_a: f64,
}

impl OrientedBox {
    pub fn new(
        center: Point2,
        center_z: f64,
        half_extents: [f64; 3],
        theta_a: f64,
    ) -> Result<Self, SceneGenError> {
        if half_extents.iter().any(|r| *r < 0.0 || !r.is_finite()) {
            return Err(SceneGenError::Contract("box half_extents must be finite and >= 0".into()));
        }
        if !center.is_finite() || !center_z.is_finite() || !theta_a.is_finite() {
            return Err(SceneGenError::Contract("box pose must be finite".into()));
        }
        Ok(Self { center, center_z, half_extents, theta_a: canonical_angle(theta_a) })
    }

    /// Secondary-axis angle; always theta_a + pi/2 (mod 2pi).
    pub fn theta_b(&self) -> f64 {
        canonical_angle(self.theta_a + std::f64::consts::FRAC_PI_2)
    }

    pub fn axis_a(&self) -> Dir2 {
        Dir2::from_angle(self.theta_a)
    }

    pub fn axis_b(&self) -> Dir2 {
        self.axis_a().perp_ccw()
    }

    pub fn z_bottom(&self) -> f64 {
        self.center_z - self.half_extents[2]
    }

    pub fn z_top(&self) -> f64 {
        self.center_z + self.half_extents[2]
    }

    pub fn footprint_area(&self) -> f64 {
        4.0 * self.half_extents[0] * self.half_extents[1]
    }

    /// True when the footprint has zero area; such boxes degrade to points.
    pub fn is_degenerate(&self) -> bool {
        self.half_extents[0] <= 0.0 && self.half_extents[1] <= 0.0
    }

    /// Footprint corners in counter-clockwise order.
    pub fn footprint_corners(&self) -> [Point2; 4] {
        let a = self.axis_a();
        let b = self.axis_b();
        let (ra, rb) = (self.half_extents[0], self.half_extents[1]);
        let c = self.center;
        [
            Point2::new(c.x + a.x * ra + b.x * rb, c.y + a.y * ra + b.y * rb),
            Point2::new(c.x - a.x * ra + b.x * rb, c.y - a.y * ra + b.y * rb),
            Point2::new(c.x - a.x * ra - b.x * rb, c.y - a.y * ra - b.y * rb),
            Point2::new(c.x + a.x * ra - b.x * rb, c.y + a.y * ra - b.y * rb),
        ]
    }

    /// Local (a, b) coordinates of `p` relative to the box center.
    fn to_local(&self, p: Point2) -> (f64, f64) {
        let a = self.axis_a();
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        (dx * a.x + dy * a.y, -dx * a.y + dy * a.x)
    }

    /// Footprint containment, boundary inclusive.
    pub fn footprint_contains(&self, p: Point2) -> bool {
        let (u, v) = self.to_local(p);
        u.abs() <= self.half_extents[0] + 1e-12 && v.abs() <= self.half_extents[1] + 1e-12
    }

    /// Fraction of the smaller footprint covered by the intersection of the
    /// two footprints, estimated on a fixed sub-sampling grid.
    pub fn footprint_overlap_frac(&self, other: &OrientedBox) -> f64 {
        let (small, big) = if self.footprint_area() <= other.footprint_area() {
            (self, other)
        } else {
            (other, self)
        };
        if small.footprint_area() <= 0.0 {
            // Point-like footprint: all-or-nothing.
            return if big.footprint_contains(small.center) { 1.0 } else { 0.0 };
        }
        const N: usize = 16;
        let a = small.axis_a();
        let b = small.axis_b();
        let (ra, rb) = (small.half_extents[0], small.half_extents[1]);
        let mut inside = 0usize;
        for i in 0..N {
            let u = ra * (2.0 * (i as f64 + 0.5) / N as f64 - 1.0);
            for j in 0..N {
                let v = rb * (2.0 * (j as f64 + 0.5) / N as f64 - 1.0);
                let p = Point2::new(
                    small.center.x + a.x * u + b.x * v,
                    small.center.y + a.y * u + b.y * v,
                );
                if big.footprint_contains(p) {
                    inside += 1;
                }
            }
        }
        inside as f64 / (N * N) as f64
    }

    /// Footprint intersection test (touching counts as intersecting).
    pub fn footprint_intersects(&self, other: &OrientedBox) -> bool {
        if self.is_degenerate() {
            return other.footprint_contains(self.center);
        }
        if other.is_degenerate() {
            return self.footprint_contains(other.center);
        }
        // Separating-axis test over both boxes' axes.
        for axis in [self.axis_a(), self.axis_b(), other.axis_a(), other.axis_b()] {
            let proj = |b: &OrientedBox| {
                let c = b.center.x * axis.x + b.center.y * axis.y;
                let ea = b.axis_a();
                let eb = b.axis_b();
                let r = b.half_extents[0] * (ea.x * axis.x + ea.y * axis.y).abs()
                    + b.half_extents[1] * (eb.x * axis.x + eb.y * axis.y).abs();
                (c - r, c + r)
            };
            let (lo1, hi1) = proj(self);
            let (lo2, hi2) = proj(other);
            if hi1 < lo2 - 1e-12 || hi2 < lo1 - 1e-12 {
                return false;
            }
        }
        true
    }
}

/// A wall as a 1-D line segment on the floor plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub start: Point2,
    pub end: Point2,
}

impl Wall {
    pub fn new(start: Point2, end: Point2) -> Result<Self, SceneGenError> {
        if start.distance_to(end) < 1e-12 {
            return Err(SceneGenError::Contract("wall endpoints must be distinct".into()));
        }
        Ok(Self { start, end })
    }

    pub fn length(&self) -> f64 {
        self.start.distance_to(self.end)
    }

    pub fn direction(&self) -> Dir2 {
        Dir2::new(self.end.x - self.start.x, self.end.y - self.start.y)
            .expect("wall endpoints are distinct")
    }
}

/// Room boundary: a simple floor polygon whose edges are the walls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomShell {
    floor_polygon: Vec<Point2>,
    walls: Vec<Wall>,
    centroid: Point2,
}

impl RoomShell {
    /// Builds a shell from a simple polygon; walls are its edges in order.
    pub fn from_polygon(vertices: Vec<Point2>) -> Result<Self, SceneGenError> {
        if vertices.len() < 3 {
            return Err(SceneGenError::Contract("floor polygon needs >= 3 vertices".into()));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(SceneGenError::Contract("floor polygon has non-finite vertex".into()));
        }
        if !polygon_is_simple(&vertices) {
            return Err(SceneGenError::Contract("floor polygon is self-intersecting".into()));
        }
        let centroid = polygon_centroid(&vertices)?;
        let mut walls = Vec::with_capacity(vertices.len());
        for i in 0..vertices.len() {
            let j = (i + 1) % vertices.len();
            walls.push(Wall::new(vertices[i], vertices[j])?);
        }
        Ok(Self { floor_polygon: vertices, walls, centroid })
    }

    pub fn floor_polygon(&self) -> &[Point2] {
        &self.floor_polygon
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn centroid(&self) -> Point2 {
        self.centroid
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.floor_polygon).abs()
    }

    /// Axis-aligned bounding rectangle of the floor polygon.
    pub fn bounding_rect(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.floor_polygon {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    /// Point-in-polygon, boundary inclusive (crossing number with an on-edge
    /// pre-check).
    pub fn contains(&self, p: Point2) -> bool {
        for w in &self.walls {
            if point_segment_distance(p, w.start, w.end) < 1e-9 {
                return true;
            }
        }
        let mut inside = false;
        let n = self.floor_polygon.len();
        let mut j = n - 1;
        for i in 0..n {
            let pi = self.floor_polygon[i];
            let pj = self.floor_polygon[j];
            if (pi.y > p.y) != (pj.y > p.y)
                && p.x < (pj.x - pi.x) * (p.y - pi.y) / (pj.y - pi.y) + pi.x
            {
                inside = !inside;
            }
            j = i;
        }
        inside
    }
}

/// Feature-extraction thresholds. The defaults are room-scale choices; every
/// value can be overridden in configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Near-wall distance for RoomPosition, meters.
    pub rho: f64,
    /// Surrounding distance for group features, meters.
    pub epsilon: f64,
    /// Angular tolerance, radians; must stay below pi/2.
    pub phi: f64,
    /// Max vertical gap between stacked faces for a support relation, meters.
    pub support_gap: f64,
    /// Min footprint-overlap fraction of the smaller object for support.
    pub support_overlap_frac: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            rho: 0.5,
            epsilon: 1.0,
            phi: std::f64::consts::PI / 12.0,
            support_gap: 0.1,
            support_overlap_frac: 0.5,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), SceneGenError> {
        let ok = self.rho > 0.0
            && self.epsilon > 0.0
            && self.phi > 0.0
            && self.phi < std::f64::consts::FRAC_PI_2
            && self.support_gap > 0.0
            && (0.0..=1.0).contains(&self.support_overlap_frac);
        if ok {
            Ok(())
        } else {
            Err(SceneGenError::Contract("thresholds out of range".into()))
        }
    }
}

fn polygon_area(vertices: &[Point2]) -> f64 {
    let mut acc = 0.0;
    let n = vertices.len();
    for i in 0..n {
        let j = (i + 1) % n;
        acc += vertices[i].x * vertices[j].y - vertices[j].x * vertices[i].y;
    }
    acc / 2.0
}

/// Shoelace area centroid of a simple polygon.
pub fn polygon_centroid(vertices: &[Point2]) -> Result<Point2, SceneGenError> {
    let area = polygon_area(vertices);
    if area.abs() < 1e-12 {
        return Err(SceneGenError::Contract("zero-area polygon has no centroid".into()));
    }
    let n = vertices.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let cross = vertices[i].x * vertices[j].y - vertices[j].x * vertices[i].y;
        cx += (vertices[i].x + vertices[j].x) * cross;
        cy += (vertices[i].y + vertices[j].y) * cross;
    }
    Ok(Point2::new(cx / (6.0 * area), cy / (6.0 * area)))
}

fn segments_properly_intersect(a1: Point2, a2: Point2, b1: Point2, b2: Point2) -> bool {
    let cross = |o: Point2, p: Point2, q: Point2| (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
    let d1 = cross(b1, b2, a1);
    let d2 = cross(b1, b2, a2);
    let d3 = cross(a1, a2, b1);
    let d4 = cross(a1, a2, b2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn polygon_is_simple(vertices: &[Point2]) -> bool {
    let n = vertices.len();
    for i in 0..n {
        let a1 = vertices[i];
        let a2 = vertices[(i + 1) % n];
        for j in (i + 1)..n {
            // Adjacent edges share a vertex; only proper crossings count.
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let b1 = vertices[j];
            let b2 = vertices[(j + 1) % n];
            if segments_properly_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let abx = b.x - a.x;
    let aby = b.y - a.y;
    let len2 = abx * abx + aby * aby;
    if len2 < 1e-24 {
        return p.distance_to(a);
    }
    let t = (((p.x - a.x) * abx + (p.y - a.y) * aby) / len2).clamp(0.0, 1.0);
    p.distance_to(Point2::new(a.x + t * abx, a.y + t * aby))
}

fn segment_segment_distance(a1: Point2, a2: Point2, b1: Point2, b2: Point2) -> f64 {
    if segments_properly_intersect(a1, a2, b1, b2) {
        return 0.0;
    }
    point_segment_distance(a1, b1, b2)
        .min(point_segment_distance(a2, b1, b2))
        .min(point_segment_distance(b1, a1, a2))
        .min(point_segment_distance(b2, a1, a2))
}

/// Anything the shortest-distance function accepts.
#[derive(Debug, Clone, Copy)]
pub enum Shape<'a> {
    Point(Point2),
    Box(&'a OrientedBox),
    Wall(&'a Wall),
}

impl<'a> From<Point2> for Shape<'a> {
    fn from(p: Point2) -> Self {
        Shape::Point(p)
    }
}

impl<'a> From<&'a OrientedBox> for Shape<'a> {
    fn from(b: &'a OrientedBox) -> Self {
        Shape::Box(b)
    }
}

impl<'a> From<&'a Wall> for Shape<'a> {
    fn from(w: &'a Wall) -> Self {
        Shape::Wall(w)
    }
}

/// Shortest Euclidean distance between two shapes on the floor plane.
/// Degenerate boxes are treated as points; intersecting footprints give 0.
pub fn shortest_distance<'a>(a: impl Into<Shape<'a>>, b: impl Into<Shape<'a>>) -> f64 {
    match (a.into(), b.into()) {
        (Shape::Point(p), Shape::Point(q)) => p.distance_to(q),
        (Shape::Point(p), Shape::Wall(w)) | (Shape::Wall(w), Shape::Point(p)) => {
            point_segment_distance(p, w.start, w.end)
        }
        (Shape::Point(p), Shape::Box(bx)) | (Shape::Box(bx), Shape::Point(p)) => {
            point_box_distance(p, bx)
        }
        (Shape::Wall(w1), Shape::Wall(w2)) => {
            segment_segment_distance(w1.start, w1.end, w2.start, w2.end)
        }
        (Shape::Box(bx), Shape::Wall(w)) | (Shape::Wall(w), Shape::Box(bx)) => {
            box_segment_distance(bx, w.start, w.end)
        }
        (Shape::Box(b1), Shape::Box(b2)) => box_box_distance(b1, b2),
    }
}

fn point_box_distance(p: Point2, bx: &OrientedBox) -> f64 {
    if bx.is_degenerate() {
        return p.distance_to(bx.center);
    }
    let (u, v) = bx.to_local(p);
    let du = (u.abs() - bx.half_extents[0]).max(0.0);
    let dv = (v.abs() - bx.half_extents[1]).max(0.0);
    du.hypot(dv)
}

fn box_segment_distance(bx: &OrientedBox, a: Point2, b: Point2) -> f64 {
    if bx.is_degenerate() {
        return point_segment_distance(bx.center, a, b);
    }
    if bx.footprint_contains(a) || bx.footprint_contains(b) {
        return 0.0;
    }
    let corners = bx.footprint_corners();
    let mut best = f64::INFINITY;
    for i in 0..4 {
        let c1 = corners[i];
        let c2 = corners[(i + 1) % 4];
        best = best.min(segment_segment_distance(c1, c2, a, b));
    }
    best
}

fn box_box_distance(b1: &OrientedBox, b2: &OrientedBox) -> f64 {
    if b1.is_degenerate() {
        return point_box_distance(b1.center, b2);
    }
    if b2.is_degenerate() {
        return point_box_distance(b2.center, b1);
    }
    if b1.footprint_intersects(b2) {
        return 0.0;
    }
    let c1 = b1.footprint_corners();
    let c2 = b2.footprint_corners();
    let mut best = f64::INFINITY;
    for i in 0..4 {
        for j in 0..4 {
            best = best.min(segment_segment_distance(
                c1[i],
                c1[(i + 1) % 4],
                c2[j],
                c2[(j + 1) % 4],
            ));
        }
    }
    best
}

/// Ray-segment hit test, gamma >= 0, endpoints inclusive.
pub fn ray_hits_wall(origin: Point2, direction: Dir2, wall: &Wall) -> bool {
    // Solve origin + g*d = start + t*(end-start) for g >= 0, t in [0,1].
    let ex = wall.end.x - wall.start.x;
    let ey = wall.end.y - wall.start.y;
    let denom = direction.x * ey - direction.y * ex;
    if denom.abs() < 1e-12 {
        // Parallel: hit only if collinear and some part of the segment lies ahead.
        if point_segment_distance(origin, wall.start, wall.end) < 1e-9 {
            return true;
        }
        let line_dist = {
            let wd = wall.direction();
            let dx = origin.x - wall.start.x;
            let dy = origin.y - wall.start.y;
            (dx * wd.y - dy * wd.x).abs()
        };
        if line_dist > 1e-9 {
            return false;
        }
        let g1 = (wall.start.x - origin.x) * direction.x + (wall.start.y - origin.y) * direction.y;
        let g2 = (wall.end.x - origin.x) * direction.x + (wall.end.y - origin.y) * direction.y;
        return g1 >= -1e-12 || g2 >= -1e-12;
    }
    let ox = origin.x - wall.start.x;
    let oy = origin.y - wall.start.y;
    let gamma = (ox * ey - oy * ex) / -denom;
    let t = (ox * direction.y - oy * direction.x) / -denom;
    gamma >= -1e-12 && (-1e-12..=1.0 + 1e-12).contains(&t)
}

/// Ray-footprint hit test, gamma >= 0; origin inside the footprint hits at 0.
pub fn ray_hits_box(origin: Point2, direction: Dir2, bx: &OrientedBox) -> bool {
    if bx.is_degenerate() {
        // Point target: hit only when it lies on the ray.
        let dx = bx.center.x - origin.x;
        let dy = bx.center.y - origin.y;
        let along = dx * direction.x + dy * direction.y;
        let across = (dx * direction.y - dy * direction.x).abs();
        return along >= -1e-9 && across < 1e-9;
    }
    if bx.footprint_contains(origin) {
        return true;
    }
    // Slab test in the box frame.
    let a = bx.axis_a();
    let ox = origin.x - bx.center.x;
    let oy = origin.y - bx.center.y;
    let lo = [ox * a.x + oy * a.y, -ox * a.y + oy * a.x];
    let ld = [direction.x * a.x + direction.y * a.y, -direction.x * a.y + direction.y * a.x];
    let mut t_min: f64 = 0.0;
    let mut t_max = f64::INFINITY;
    for k in 0..2 {
        let r = bx.half_extents[k];
        if ld[k].abs() < 1e-12 {
            if lo[k].abs() > r + 1e-12 {
                return false;
            }
            continue;
        }
        let t1 = (-r - lo[k]) / ld[k];
        let t2 = (r - lo[k]) / ld[k];
        t_min = t_min.max(t1.min(t2));
        t_max = t_max.min(t1.max(t2));
    }
    t_min <= t_max + 1e-12
}

/// Area centroid of the floor polygon.
pub fn room_centroid(shell: &RoomShell) -> Point2 {
    shell.centroid()
}

/// Right-handed orthonormal axis triple produced by pose standardization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisTriple {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
}

/// Standardizes a labeled facing direction into the (a, b, c) axis triple with
/// c = +z and b = c x a.
pub fn standardize_pose(facing: [f64; 3]) -> Result<AxisTriple, SceneGenError> {
    let norm = (facing[0] * facing[0] + facing[1] * facing[1] + facing[2] * facing[2]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(SceneGenError::Contract("facing direction must be a unit vector".into()));
    }
    if facing[2].abs() > 1e-9 {
        return Err(SceneGenError::Contract("facing direction must lie in the (x,y)-plane".into()));
    }
    let a = facing;
    let c = [0.0, 0.0, 1.0];
    // b = c x a
    let b = [c[1] * a[2] - c[2] * a[1], c[2] * a[0] - c[0] * a[2], c[0] * a[1] - c[1] * a[0]];
    Ok(AxisTriple { a, b, c })
}

impl AxisTriple {
    /// Permutes half sizes labeled against arbitrary original axes so they
    /// match this standardized triple. Each original axis must align (up to
    /// sign) with exactly one standardized axis.
    pub fn permute_half_extents(
        &self,
        original_axes: [[f64; 3]; 3],
        half_extents: [f64; 3],
    ) -> Result<[f64; 3], SceneGenError> {
        let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        let std_axes = [self.a, self.b, self.c];
        let mut out = [f64::NAN; 3];
        let mut used = [false; 3];
        for (i, std_axis) in std_axes.iter().enumerate() {
            let mut found = None;
            for (j, orig) in original_axes.iter().enumerate() {
                if !used[j] && dot(*std_axis, *orig).abs() > 1.0 - 1e-6 {
                    found = Some(j);
                    break;
                }
            }
            match found {
                Some(j) => {
                    used[j] = true;
                    out[i] = half_extents[j];
                }
                None => {
                    return Err(SceneGenError::Contract(
                        "original axes do not align with standardized axes".into(),
                    ))
                }
            }
        }
        Ok(out)
    }
}
