//! Acceptance gate: every top-level criterion runs here at its stated
//! tolerance and prints one pass/fail line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scenegen_core::augment::{
    best_orientation, orientation_scores, place, position_heatmap, SamplingSpec,
};
use scenegen_core::dataset::{synthesize, SceneRecord, SynthRuleSet};
use scenegen_core::eval::{
    default_orientation_variants, eval_orientation, eval_position, AblationConfig, EvalTask,
};
use scenegen_core::geometry::{angular_distance, OrientedBox, Point2, RoomShell, Thresholds};
use scenegen_core::kde::VariableKind;
use scenegen_core::knowledge::{train, FeatureSelection};
use scenegen_core::scene::{Category, Scene, SceneObject};
use scenegen_core::scene_graph;

fn criterion<F: FnOnce()>(name: &str, f: F) {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(()) => println!("ACCEPTANCE PASS: {name}"),
        Err(e) => {
            println!("ACCEPTANCE FAIL: {name}");
            std::panic::resume_unwind(e);
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 1: feature-oracle equivalence.
//
// An independent brute-force re-implementation of the relationship
// operations, sharing no code with the engine's geometry or scene_graph
// modules.
mod oracle {
    use super::*;

    pub fn pt_seg(p: Point2, a: Point2, b: Point2) -> f64 {
        let (ex, ey) = (b.x - a.x, b.y - a.y);
        let len2 = ex * ex + ey * ey;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p.x - a.x) * ex + (p.y - a.y) * ey) / len2).clamp(0.0, 1.0)
        };
        let (qx, qy) = (a.x + t * ex, a.y + t * ey);
        ((p.x - qx).powi(2) + (p.y - qy).powi(2)).sqrt()
    }

    fn orient(o: Point2, p: Point2, q: Point2) -> f64 {
        (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x)
    }

    fn segs_cross(a1: Point2, a2: Point2, b1: Point2, b2: Point2) -> bool {
        let d1 = orient(b1, b2, a1);
        let d2 = orient(b1, b2, a2);
        let d3 = orient(a1, a2, b1);
        let d4 = orient(a1, a2, b2);
        ((d1 > 0.0) != (d2 > 0.0)) && d1 != 0.0 && d2 != 0.0
            && ((d3 > 0.0) != (d4 > 0.0)) && d3 != 0.0 && d4 != 0.0
    }

    pub fn seg_seg(a1: Point2, a2: Point2, b1: Point2, b2: Point2) -> f64 {
        if segs_cross(a1, a2, b1, b2) {
            return 0.0;
        }
        pt_seg(a1, b1, b2)
            .min(pt_seg(a2, b1, b2))
            .min(pt_seg(b1, a1, a2))
            .min(pt_seg(b2, a1, a2))
    }

    pub fn corners(b: &OrientedBox) -> [Point2; 4] {
        let (c, s) = (b.theta_a.cos(), b.theta_a.sin());
        let (ra, rb) = (b.half_extents[0], b.half_extents[1]);
        let rot = |u: f64, v: f64| {
            Point2::new(b.center.x + u * c - v * s, b.center.y + u * s + v * c)
        };
        [rot(ra, rb), rot(-ra, rb), rot(-ra, -rb), rot(ra, -rb)]
    }

    pub fn in_box(p: Point2, b: &OrientedBox) -> bool {
        let (c, s) = (b.theta_a.cos(), b.theta_a.sin());
        let (dx, dy) = (p.x - b.center.x, p.y - b.center.y);
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        u.abs() <= b.half_extents[0] + 1e-12 && v.abs() <= b.half_extents[1] + 1e-12
    }

    pub fn box_box(b1: &OrientedBox, b2: &OrientedBox) -> f64 {
        let c1 = corners(b1);
        let c2 = corners(b2);
        if c1.iter().any(|p| in_box(*p, b2)) || c2.iter().any(|p| in_box(*p, b1)) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for i in 0..4 {
            for j in 0..4 {
                best = best.min(seg_seg(c1[i], c1[(i + 1) % 4], c2[j], c2[(j + 1) % 4]));
            }
        }
        best
    }

    pub fn box_seg(b: &OrientedBox, a1: Point2, a2: Point2) -> f64 {
        if in_box(a1, b) || in_box(a2, b) {
            return 0.0;
        }
        let c = corners(b);
        let mut best = f64::INFINITY;
        for i in 0..4 {
            best = best.min(seg_seg(c[i], c[(i + 1) % 4], a1, a2));
        }
        best
    }

    pub fn ray_seg(origin: Point2, angle: f64, a: Point2, b: Point2) -> bool {
        let (dx, dy) = (angle.cos(), angle.sin());
        let (ex, ey) = (b.x - a.x, b.y - a.y);
        let denom = dx * ey - dy * ex;
        if denom.abs() < 1e-12 {
            // Random geometry: exact parallelism is measure-zero; treat a
            // collinear origin on the segment as a hit.
            return pt_seg(origin, a, b) < 1e-9;
        }
        let (ox, oy) = (origin.x - a.x, origin.y - a.y);
        let g = (ox * ey - oy * ex) / -denom;
        let t = (ox * dy - oy * dx) / -denom;
        g >= -1e-12 && (-1e-12..=1.0 + 1e-12).contains(&t)
    }

    pub fn ray_box(origin: Point2, angle: f64, b: &OrientedBox) -> bool {
        if in_box(origin, b) {
            return true;
        }
        let c = corners(b);
        (0..4).any(|i| ray_seg(origin, angle, c[i], c[(i + 1) % 4]))
    }

    /// Overlap fraction of the smaller footprint, on the same fixed 16x16
    /// cell-center grid the engine documents for this estimator.
    pub fn overlap_frac(b1: &OrientedBox, b2: &OrientedBox) -> f64 {
        let area = |b: &OrientedBox| 4.0 * b.half_extents[0] * b.half_extents[1];
        let (small, big) = if area(b1) <= area(b2) { (b1, b2) } else { (b2, b1) };
        let (c, s) = (small.theta_a.cos(), small.theta_a.sin());
        let mut inside = 0usize;
        for i in 0..16 {
            for j in 0..16 {
                let u = small.half_extents[0] * (2.0 * (i as f64 + 0.5) / 16.0 - 1.0);
                let v = small.half_extents[1] * (2.0 * (j as f64 + 0.5) / 16.0 - 1.0);
                let p = Point2::new(
                    small.center.x + u * c - v * s,
                    small.center.y + u * s + v * c,
                );
                if in_box(p, big) {
                    inside += 1;
                }
            }
        }
        inside as f64 / 256.0
    }

    pub struct Features {
        pub rp: u32,
        pub ad: Vec<f64>,
        pub sp: Vec<i8>,
        pub sb: Vec<u32>,
        pub tc: Option<u8>,
        pub afw: Option<u8>,
        pub ds: Option<(u32, u32)>,
        pub f: Option<Vec<u32>>,
        pub nt: Option<Vec<u32>>,
    }

    pub fn extract(scene: &Scene, idx: usize, t: &Thresholds) -> Features {
        let obj = &scene.objects[idx];
        let walls: Vec<(Point2, Point2)> = scene
            .shell
            .walls()
            .iter()
            .map(|w| (w.start, w.end))
            .collect();

        let rp = walls
            .iter()
            .filter(|(a, b)| pt_seg(obj.boxed.center, *a, *b) < t.rho)
            .count() as u32;

        let mut ad = Vec::new();
        let mut sp = Vec::new();
        let mut sb = Vec::new();
        for cat in Category::ALL {
            let group: Vec<&SceneObject> = scene
                .objects
                .iter()
                .filter(|o| o.category == cat && o.id != obj.id)
                .collect();
            if group.is_empty() {
                ad.push(1000.0);
            } else {
                let sum: f64 = group.iter().map(|o| box_box(&obj.boxed, &o.boxed)).sum();
                ad.push(sum / group.len() as f64);
            }
            sb.push(
                group
                    .iter()
                    .filter(|o| box_box(&obj.boxed, &o.boxed) < t.epsilon)
                    .count() as u32,
            );
            let mut support = 0i8;
            for o in &group {
                let on_top = (obj.boxed.center_z - obj.boxed.half_extents[2]
                    - (o.boxed.center_z + o.boxed.half_extents[2]))
                    .abs()
                    <= t.support_gap;
                if on_top && overlap_frac(&obj.boxed, &o.boxed) >= t.support_overlap_frac {
                    support = 1;
                    break;
                }
            }
            if support == 0 {
                for o in &group {
                    let under = (o.boxed.center_z - o.boxed.half_extents[2]
                        - (obj.boxed.center_z + obj.boxed.half_extents[2]))
                        .abs()
                        <= t.support_gap;
                    if under && overlap_frac(&obj.boxed, &o.boxed) >= t.support_overlap_frac {
                        support = -1;
                        break;
                    }
                }
            }
            sp.push(support);
        }

        let mut out = Features { rp, ad, sp, sb, tc: None, afw: None, ds: None, f: None, nt: None };
        if !obj.has_known_facing {
            return out;
        }
        let theta = obj.boxed.theta_a;

        // TowardsCenter: furthest floor(l/2) walls by center distance, ties
        // by index.
        let mut order: Vec<usize> = (0..walls.len()).collect();
        order.sort_by(|&i, &j| {
            let di = pt_seg(obj.boxed.center, walls[i].0, walls[i].1);
            let dj = pt_seg(obj.boxed.center, walls[j].0, walls[j].1);
            dj.partial_cmp(&di).unwrap().then(i.cmp(&j))
        });
        order.truncate(walls.len() / 2);
        let tc = order
            .iter()
            .any(|&i| ray_seg(obj.boxed.center, theta, walls[i].0, walls[i].1));
        out.tc = Some(tc as u8);

        // AwayFromWall: back-ray hits the closest wall by box distance while
        // the facing axis is near-normal to it.
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, (a, b)) in walls.iter().enumerate() {
            let d = box_seg(&obj.boxed, *a, *b);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        let (wa, wb) = walls[best];
        let back = ray_seg(obj.boxed.center, theta + std::f64::consts::PI, wa, wb);
        let wlen = ((wb.x - wa.x).powi(2) + (wb.y - wa.y).powi(2)).sqrt();
        let wd = ((wb.x - wa.x) / wlen, (wb.y - wa.y) / wlen);
        let dot = (theta.cos() * wd.0 + theta.sin() * wd.1).abs().min(1.0);
        out.afw = Some((back && dot.asin() <= t.phi) as u8);

        // DirectionSimilarity over all facing-labeled neighbors.
        let mut same = 0;
        let mut opp = 0;
        for o in &scene.objects {
            if o.id == obj.id || !o.has_known_facing {
                continue;
            }
            if box_box(&obj.boxed, &o.boxed) > t.epsilon {
                continue;
            }
            let diff = angular_distance(theta, o.boxed.theta_a);
            if diff <= t.phi {
                same += 1;
            }
            if (std::f64::consts::PI - diff).abs() <= t.phi {
                opp += 1;
            }
        }
        out.ds = Some((same, opp));

        let mut f = Vec::new();
        let mut nt = Vec::new();
        for cat in Category::ALL {
            let group: Vec<&SceneObject> = scene
                .objects
                .iter()
                .filter(|o| o.category == cat && o.id != obj.id)
                .collect();
            f.push(
                group
                    .iter()
                    .filter(|o| box_box(&obj.boxed, &o.boxed) <= t.epsilon)
                    .filter(|o| ray_box(obj.boxed.center, theta, &o.boxed))
                    .count() as u32,
            );
            let b_angle = theta + std::f64::consts::FRAC_PI_2;
            nt.push(
                group
                    .iter()
                    .filter(|o| box_box(&obj.boxed, &o.boxed) <= t.epsilon)
                    .filter(|o| {
                        ray_box(obj.boxed.center, b_angle, &o.boxed)
                            || ray_box(
                                obj.boxed.center,
                                b_angle + std::f64::consts::PI,
                                &o.boxed,
                            )
                    })
                    .count() as u32,
            );
        }
        out.f = Some(f);
        out.nt = Some(nt);
        out
    }
}

fn random_room(rng: &mut ChaCha8Rng) -> RoomShell {
    let w = rng.gen_range(3.0..8.0);
    let h = rng.gen_range(3.0..8.0);
    let x0 = rng.gen_range(-2.0..2.0);
    let y0 = rng.gen_range(-2.0..2.0);
    let shape = rng.gen_range(0..3u8);
    let vertices = match shape {
        0 => vec![
            Point2::new(x0, y0),
            Point2::new(x0 + w, y0),
            Point2::new(x0 + w, y0 + h),
            Point2::new(x0, y0 + h),
        ],
        1 => {
            // L-shape: notch cut from the north-east corner.
            let nw = rng.gen_range(1.0..w - 1.0);
            let nh = rng.gen_range(1.0..h - 1.0);
            vec![
                Point2::new(x0, y0),
                Point2::new(x0 + w, y0),
                Point2::new(x0 + w, y0 + nh),
                Point2::new(x0 + nw, y0 + nh),
                Point2::new(x0 + nw, y0 + h),
                Point2::new(x0, y0 + h),
            ]
        }
        _ => {
            // Convex pentagon: rectangle with a clipped corner.
            let cut = rng.gen_range(0.5..1.5);
            vec![
                Point2::new(x0, y0),
                Point2::new(x0 + w, y0),
                Point2::new(x0 + w, y0 + h - cut),
                Point2::new(x0 + w - cut, y0 + h),
                Point2::new(x0, y0 + h),
            ]
        }
    };
    RoomShell::from_polygon(vertices).unwrap()
}

fn random_scene(seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shell = random_room(&mut rng);
    let (lo, hi) = shell.bounding_rect();
    let n = rng.gen_range(3..=8);
    let mut objects = Vec::new();
    let mut i = 0;
    while objects.len() < n {
        i += 1;
        let center = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if !shell.contains(center) {
            continue;
        }
        let category = Category::ALL[rng.gen_range(0..Category::ALL.len())];
        let he = [
            rng.gen_range(0.05..0.6),
            rng.gen_range(0.05..0.6),
            rng.gen_range(0.1..0.8),
        ];
        let boxed = OrientedBox::new(
            center,
            rng.gen_range(he[2]..2.0),
            he,
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
        .unwrap();
        objects.push(SceneObject {
            id: format!("o{i}"),
            category,
            boxed,
            has_known_facing: rng.gen_bool(0.7),
        });
    }
    Scene::new(shell, objects, "random").unwrap()
}

#[test]
fn acceptance_feature_oracle_equivalence() {
    criterion("feature-oracle equivalence (100 scenes, exact ints, 1e-9 distances)", || {
        let started = Instant::now();
        let t = Thresholds::default();
        for seed in 0..100u64 {
            let scene = random_scene(seed);
            let graph = scene_graph::extract_features(&scene, &t).unwrap();
            for (idx, obj) in scene.objects.iter().enumerate() {
                let expected = oracle::extract(&scene, idx, &t);
                let got = &graph.position[idx];
                assert_eq!(got.room_position, expected.rp, "seed {seed} obj {idx} RP");
                assert_eq!(got.support, expected.sp, "seed {seed} obj {idx} S");
                assert_eq!(got.surrounded_by, expected.sb, "seed {seed} obj {idx} SP");
                for (a, b) in got.average_distance.iter().zip(&expected.ad) {
                    assert!((a - b).abs() < 1e-9, "seed {seed} obj {idx} AD {a} vs {b}");
                }
                if obj.category.is_asymmetric() && obj.has_known_facing {
                    let (_, o) = graph
                        .orientation
                        .iter()
                        .find(|(i, _)| *i == idx)
                        .expect("orientation row present");
                    assert_eq!(o.room_position, expected.rp);
                    assert_eq!(o.towards_center, expected.tc.unwrap(), "seed {seed} obj {idx} TC");
                    assert_eq!(o.direction_similarity, expected.ds.unwrap(), "seed {seed} obj {idx} DS");
                    assert_eq!(o.facing, expected.f.unwrap(), "seed {seed} obj {idx} F");
                    assert_eq!(o.next_to, expected.nt.unwrap(), "seed {seed} obj {idx} NT");
                }
                if obj.has_known_facing {
                    let afw = scene_graph::away_from_wall(obj, &scene.shell, &t).unwrap();
                    assert_eq!(afw, expected.afw.unwrap(), "seed {seed} obj {idx} AFW");
                }
            }
        }
        let elapsed = started.elapsed();
        assert!(elapsed.as_secs() < 30, "took {elapsed:?}, budget 30 s");
    });
}

#[test]
fn acceptance_kde_normalization() {
    criterion("KDE normalization (integral, discrete sum, single-obs closed form)", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // Standard-normal draws via Box-Muller.
        let mut draws: Vec<Vec<f64>> = Vec::with_capacity(1000);
        for _ in 0..500 {
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            draws.push(vec![r * (std::f64::consts::TAU * u2).cos()]);
            draws.push(vec![r * (std::f64::consts::TAU * u2).sin()]);
        }
        assert_eq!(draws.len(), 1000);
        let model = scenegen_core::kde::fit(
            &draws,
            &[VariableKind::Continuous],
            &["x".to_string()],
            &[None],
        )
        .unwrap();
        let mut integral = 0.0;
        let steps = 4000;
        let (a, b) = (-10.0, 10.0);
        let dx = (b - a) / steps as f64;
        for i in 0..=steps {
            let x = a + i as f64 * dx;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            integral += w * model.pdf(&[x]).unwrap() * dx;
        }
        assert!((integral - 1.0).abs() <= 0.01, "integral {integral}");

        // Ordered-discrete model over a small support.
        let counts: Vec<Vec<f64>> =
            (0..400).map(|_| vec![rng.gen_range(0..5) as f64]).collect();
        let discrete = scenegen_core::kde::fit(
            &counts,
            &[VariableKind::OrderedDiscrete],
            &["n".to_string()],
            &[None],
        )
        .unwrap();
        let sum: f64 =
            (-300..=300).map(|k| discrete.pdf(&[k as f64]).unwrap()).sum();
        assert!((sum - 1.0).abs() <= 0.01, "sum {sum}");

        // Single observation: sigma floors at 0.01, h = 1.06 * 0.01, and the
        // pdf at the datum is 1/(h * sqrt(2 pi)).
        let single = scenegen_core::kde::fit(
            &[vec![3.2]],
            &[VariableKind::Continuous],
            &["x".to_string()],
            &[None],
        )
        .unwrap();
        let h = single.bandwidths()[0];
        let expected = 1.0 / (std::f64::consts::TAU.sqrt() * h);
        assert!((single.pdf(&[3.2]).unwrap() - expected).abs() < 1e-12);
    });
}

fn held_out_room_position(
    scene: &Scene,
    category: Category,
    model: &scenegen_core::knowledge::KnowledgeModel,
    spec: &SamplingSpec,
    t: &Thresholds,
) -> Vec<u32> {
    let mut out = Vec::new();
    for (i, obj) in scene.objects.iter().enumerate() {
        if obj.category != category {
            continue;
        }
        let mut holdout = scene.clone();
        holdout.objects.remove(i);
        let (rec, _) = place(
            &holdout,
            category,
            model,
            spec,
            t,
            Some(obj.boxed.half_extents),
        )
        .unwrap();
        let top1 = rec.poses[0];
        let hypothetical = SceneObject {
            id: "h".into(),
            category,
            boxed: OrientedBox::new(
                top1.position,
                obj.boxed.center_z,
                obj.boxed.half_extents,
                0.0,
            )
            .unwrap(),
            has_known_facing: false,
        };
        out.push(scene_graph::room_position(&hypothetical, &scene.shell, t));
    }
    out
}

#[test]
fn acceptance_synthetic_prior_recovery_position() {
    criterion(
        "synthetic-prior recovery, position (Storage corner >= 95%, Table middle >= 90%)",
        || {
            let started = Instant::now();
            let t = Thresholds::default();
            let rules = SynthRuleSet::position_recovery();
            let (train_scenes, _) = synthesize(&rules, 200, 101).unwrap();
            let (test_scenes, _) = synthesize(&rules, 50, 202).unwrap();
            let (model, _) =
                train(&train_scenes, &t, &FeatureSelection::default(), "recovery").unwrap();
            let spec = SamplingSpec::default();

            let mut storage = Vec::new();
            let mut table = Vec::new();
            for scene in &test_scenes {
                storage.extend(held_out_room_position(scene, Category::Storage, &model, &spec, &t));
                table.extend(held_out_room_position(scene, Category::Table, &model, &spec, &t));
            }
            let storage_ok =
                storage.iter().filter(|&&rp| rp >= 2).count() as f64 / storage.len() as f64;
            let table_ok =
                table.iter().filter(|&&rp| rp == 0).count() as f64 / table.len() as f64;
            assert!(storage_ok >= 0.95, "Storage corner rate {storage_ok:.3}");
            assert!(table_ok >= 0.90, "Table middle rate {table_ok:.3}");
            let elapsed = started.elapsed();
            assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget 2 min");
        },
    );
}

#[test]
fn acceptance_synthetic_prior_recovery_orientation() {
    criterion(
        "synthetic-prior recovery, orientation (chair angle within pi/8 >= 90%)",
        || {
            let t = Thresholds::default();
            let rules = SynthRuleSet::orientation_recovery();
            let (train_scenes, _) = synthesize(&rules, 150, 303).unwrap();
            let (test_scenes, _) = synthesize(&rules, 40, 404).unwrap();
            let (model, _) =
                train(&train_scenes, &t, &FeatureSelection::default(), "recovery").unwrap();
            let spec = SamplingSpec::default();

            let mut hits = 0usize;
            let mut total = 0usize;
            for scene in &test_scenes {
                for (i, obj) in scene.objects.iter().enumerate() {
                    if obj.category != Category::Chair {
                        continue;
                    }
                    let mut holdout = scene.clone();
                    holdout.objects.remove(i);
                    let scores = orientation_scores(
                        &holdout,
                        Category::Chair,
                        obj.boxed.center,
                        &model,
                        &spec,
                        &t,
                        Some(obj.boxed.half_extents),
                    )
                    .unwrap();
                    let (theta, _) = best_orientation(&scores);
                    // Rule-consistent angles are all headings from which the
                    // facing ray hits a nearby table; a table subtends an arc,
                    // not a single direction, so sweep densely.
                    let tables: Vec<&SceneObject> = holdout
                        .objects
                        .iter()
                        .filter(|o| o.category == Category::Table)
                        .collect();
                    let consistent = (0..720)
                        .filter_map(|k| {
                            let phi = k as f64 * scenegen_core::geometry::TAU / 720.0;
                            let probe = SceneObject {
                                id: "probe".into(),
                                category: Category::Chair,
                                boxed: OrientedBox::new(
                                    obj.boxed.center,
                                    obj.boxed.center_z,
                                    obj.boxed.half_extents,
                                    phi,
                                )
                                .unwrap(),
                                has_known_facing: true,
                            };
                            (scene_graph::facing(&probe, &tables, &t) >= 1)
                                .then(|| angular_distance(theta, phi))
                        })
                        .fold(f64::INFINITY, f64::min);
                    total += 1;
                    if consistent <= std::f64::consts::PI / 8.0 {
                        hits += 1;
                    }
                }
            }
            let rate = hits as f64 / total as f64;
            assert!(rate >= 0.90, "rule-consistent rate {rate:.3} over {total} chairs");
        },
    );
}

fn overall_mean(report: &scenegen_core::eval::EvalReport, variant: &str) -> f64 {
    report.summary()[&(variant.to_string(), None)].mean_top1
}

#[test]
fn acceptance_ablation_ordering_and_topk() {
    criterion(
        "ablation ordering (AD+S+RP best position, F+C+RP <= F) and top-k monotonicity",
        || {
            let t = Thresholds::default();
            let (corpus, _) = synthesize(&SynthRuleSet::combined(), 36, 606).unwrap();

            let mut pos_config = AblationConfig::position_default();
            pos_config.k = 3;
            pos_config.seed = 11;
            pos_config.sampling.target_samples = 100;
            let pos_report = eval_position(&corpus, &pos_config, &t).unwrap();
            let full = overall_mean(&pos_report, "AD+S+RP");
            for variant in ["AD+RP", "S+RP", "RP"] {
                let ablated = overall_mean(&pos_report, variant);
                assert!(
                    full <= ablated + 1e-12,
                    "full {full:.4} m vs {variant} {ablated:.4} m"
                );
            }

            let mut ori_config = AblationConfig {
                task: EvalTask::Orientation,
                variants: default_orientation_variants()
                    .into_iter()
                    .filter(|v| v.name == "F+C+RP" || v.name == "F")
                    .collect(),
                k: 3,
                seed: 11,
                top_k: 5,
                sampling: SamplingSpec::default(),
            };
            ori_config.sampling.target_samples = 100;
            let ori_report = eval_orientation(&corpus, &ori_config, &t).unwrap();
            let full_ori = overall_mean(&ori_report, "F+C+RP");
            let f_only = overall_mean(&ori_report, "F");
            assert!(
                full_ori <= f_only + 1e-12,
                "F+C+RP {full_ori:.4} rad vs F {f_only:.4} rad"
            );

            // Top-k monotonicity across every evaluation sample.
            for s in pos_report.samples.iter().chain(ori_report.samples.iter()) {
                assert!(s.top5 <= s.top1 + 1e-12, "{s:?}");
            }
            assert!(!pos_report.samples.is_empty() && !ori_report.samples.is_empty());
        },
    );
}

#[test]
fn acceptance_determinism_cli() {
    criterion("determinism (CLI reruns byte-identical)", || {
        let bin = env!("CARGO_BIN_EXE_scenegen");
        let dir = tempfile::tempdir().unwrap();
        let run = |args: &[&str]| {
            let out = std::process::Command::new(bin)
                .args(args)
                .env("RAYON_NUM_THREADS", "1")
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "{args:?}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        };
        let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

        for round in ["a", "b"] {
            let corpus = p(&format!("corpus-{round}"));
            run(&["synth", "--rules", "combined", "--rooms", "10", "--seed", "9", "--out", &corpus]);
            run(&["train", "--corpus", &corpus, "--out", &p(&format!("model-{round}.sgm"))]);
            run(&[
                "heatmap",
                "--model",
                &p(&format!("model-{round}.sgm")),
                "--scene",
                &format!("{corpus}/room00.json"),
                "--category",
                "Storage",
                "--out",
                &p(&format!("heat-{round}.json")),
                "--target-samples",
                "120",
            ]);
            run(&[
                "eval",
                "--corpus",
                &corpus,
                "--task",
                "orientation",
                "--k",
                "2",
                "--seed",
                "5",
                "--out-table",
                &p(&format!("table-{round}.tsv")),
                "--target-samples",
                "60",
            ]);
            let scene_copy = p(&format!("scene-{round}.json"));
            std::fs::copy(format!("{corpus}/room00.json"), &scene_copy).unwrap();
            run(&[
                "place",
                "--model",
                &p(&format!("model-{round}.sgm")),
                "--scene",
                &scene_copy,
                "--category",
                "Chair",
                "--out",
                &p(&format!("placed-{round}.json")),
            ]);
        }

        let bytes = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
        assert_eq!(bytes("model-a.sgm"), bytes("model-b.sgm"), "model files differ");
        assert_eq!(bytes("heat-a.json"), bytes("heat-b.json"), "heat maps differ");
        assert_eq!(bytes("table-a.tsv"), bytes("table-b.tsv"), "eval tables differ");
        assert_eq!(bytes("placed-a.json"), bytes("placed-b.json"), "placed scenes differ");
        // Corpora themselves must match file for file.
        for i in 0..10 {
            assert_eq!(
                bytes(&format!("corpus-a/room{i:02}.json")),
                bytes(&format!("corpus-b/room{i:02}.json")),
                "synth output differs"
            );
        }
    });
}

#[test]
fn acceptance_performance_envelope() {
    criterion("performance (train 1000 rooms <= 60 s, 250-sample heat map <= 2 s)", || {
        let t = Thresholds::default();
        let (corpus, _) = synthesize(&SynthRuleSet::combined(), 1000, 808).unwrap();
        let started = Instant::now();
        let (model, _) = train(&corpus, &t, &FeatureSelection::default(), "perf").unwrap();
        let train_time = started.elapsed();
        assert!(train_time.as_secs_f64() <= 60.0, "training took {train_time:?}");

        let scene = &corpus[0];
        let spec = SamplingSpec::default();
        let started = Instant::now();
        let map = position_heatmap(scene, Category::Chair, &model, &spec, &t, None).unwrap();
        let map_time = started.elapsed();
        assert!(map.cells.len() >= 250 / 2, "grid unexpectedly small");
        assert!(map_time.as_secs_f64() <= 2.0, "heat map took {map_time:?}");
        println!(
            "  training: {:.2} s for 1000 rooms; heat map: {:.3} s for {} cells",
            train_time.as_secs_f64(),
            map_time.as_secs_f64(),
            map.cells.len()
        );
    });
}

#[test]
fn acceptance_service_equivalence() {
    criterion("service equivalence (graph payload identical, 50 concurrent identical)", || {
        use scenegen_core::server::{self, GraphPayload};

        let t = Thresholds::default();
        let (scenes, _) = synthesize(&SynthRuleSet::combined(), 12, 909).unwrap();
        let (model, _) = train(&scenes, &t, &FeatureSelection::default(), "svc").unwrap();

        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(4)
            .enable_all()
            .build()
            .unwrap();
        runtime.block_on(async move {
            let state = server::AppState::new(model).unwrap();
            let app = server::router(state);
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            let addr = listener.local_addr().unwrap();
            tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
            let base = format!("http://{addr}");
            let client = reqwest::Client::new();

            let record = SceneRecord::from_scene(&scenes[0]);
            let graph: GraphPayload = client
                .post(format!("{base}/v1/scene-graph"))
                .json(&record)
                .send()
                .await
                .unwrap()
                .json()
                .await
                .unwrap();

            let scene_req = serde_json::json!({
                "schema_version": 1, "scene": record, "category": "Chair"
            });
            let graph_req = serde_json::json!({
                "schema_version": 1, "graph": graph, "category": "Chair"
            });
            let fetch = |req: serde_json::Value| {
                let client = client.clone();
                let url = format!("{base}/v1/predict");
                async move {
                    let resp = client.post(url).json(&req).send().await.unwrap();
                    assert_eq!(resp.status(), 200);
                    resp.text().await.unwrap()
                }
            };
            let a = fetch(scene_req.clone()).await;
            let b = fetch(graph_req).await;
            assert_eq!(a, b, "scene vs graph payload responses differ");

            let mut handles = Vec::new();
            for _ in 0..50 {
                handles.push(tokio::spawn(fetch(scene_req.clone())));
            }
            for h in handles {
                assert_eq!(h.await.unwrap(), a, "concurrent response differs");
            }
        });
    });
}
