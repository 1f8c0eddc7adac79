//! Seeded synthetic pedestrian scenes.
//!
//! People walk along straight lines with a small sinusoidal sway. Every
//! person is a rigid walking template scaled by the inverse of its camera
//! distance, with arms and legs swinging in phase with the gait. Joints inside
//! a static occluder rectangle or inside the box of a nearer person are
//! flagged occluded.

use crate::geometry::{BoundingBox, Point2};
use crate::io::canonical;
use crate::model::{
    FrameAnnotation, JointKind, Keypoint, PoseAnnotation, SequenceAnnotation, NUM_JOINTS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Height in pixels of a person standing one meter from the camera.
pub const HEIGHT_PX_AT_ONE_METER: f64 = 1100.0;

const PLACEMENT_ATTEMPTS: usize = 400;
const GAIT_PERIOD_FRAMES: f64 = 20.0;

/// Upright template in body-height units; x to the image right, y up is
/// negative, feet at the origin.
const TEMPLATE: [(f64, f64); NUM_JOINTS] = [
    (0.0, -1.0),
    (0.0, -0.83),
    (-0.11, -0.80),
    (-0.14, -0.63),
    (-0.15, -0.48),
    (0.11, -0.80),
    (0.14, -0.63),
    (0.15, -0.48),
    (-0.07, -0.50),
    (-0.08, -0.27),
    (-0.08, 0.0),
    (0.07, -0.50),
    (0.08, -0.27),
    (0.08, 0.0),
];

/// Horizontal swing amplitude per joint (body-height units) and whether it
/// swings with the right arm/left leg (+1) or against (-1).
const SWING: [(f64, f64); NUM_JOINTS] = [
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.03, 1.0),
    (0.06, 1.0),
    (0.0, 0.0),
    (0.03, -1.0),
    (0.06, -1.0),
    (0.0, 0.0),
    (0.04, -1.0),
    (0.07, -1.0),
    (0.0, 0.0),
    (0.04, 1.0),
    (0.07, 1.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub seed: u64,
    /// Inclusive range of people per sequence (crossing people included).
    pub num_people: (u32, u32),
    pub image_size: (u32, u32),
    /// Camera distance range in meters.
    pub distance_range: (f64, f64),
    /// Walking speed range in pixels per frame.
    pub speed_range: (f64, f64),
    /// Expected number of static occluder rectangles per sequence.
    pub occluder_events: f64,
    pub duration: u32,
    /// Pairs of people whose paths deliberately cross.
    pub crossing_pairs: u32,
    pub fps: f64,
    /// Minimum pixel gap kept between boxes of people that are not a
    /// crossing pair, over every frame. Zero disables the constraint.
    pub min_gap: f64,
    /// Keep every joint of every person inside the image at all times.
    pub keep_in_frame: bool,
    /// Probability of flagging any joint occluded at random.
    pub random_occlusion: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            seed: 0,
            num_people: (1, 20),
            image_size: (1920, 1080),
            distance_range: (0.1, 100.0),
            speed_range: (1.0, 6.0),
            occluder_events: 0.0,
            duration: 30,
            crossing_pairs: 0,
            fps: 30.0,
            min_gap: 0.0,
            keep_in_frame: false,
            random_occlusion: 0.0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), String> {
        let (a, b) = self.num_people;
        if a > b {
            return Err(format!("empty people range {a}..={b}"));
        }
        let (d0, d1) = self.distance_range;
        if !(d0 > 0.0 && d0 <= d1) {
            return Err(format!("invalid distance range {d0}..{d1}"));
        }
        let (s0, s1) = self.speed_range;
        if !(s0 >= 0.0 && s0 <= s1) {
            return Err(format!("invalid speed range {s0}..{s1}"));
        }
        if self.image_size.0 == 0 || self.image_size.1 == 0 {
            return Err("empty image".into());
        }
        if !(0.0..=1.0).contains(&self.random_occlusion) {
            return Err("random_occlusion must lie in [0, 1]".into());
        }
        if !(self.occluder_events >= 0.0) || !(self.min_gap >= 0.0) || !(self.fps > 0.0) {
            return Err("occluder_events and min_gap must be >= 0, fps > 0".into());
        }
        Ok(())
    }
}

/// One generated walker.
#[derive(Debug, Clone)]
struct Walker {
    distance: f64,
    start: Point2,
    velocity: Point2,
    sway_amplitude: f64,
    sway_phase: f64,
    gait_phase: f64,
    crossing_group: Option<u32>,
}

impl Walker {
    fn height(&self) -> f64 {
        HEIGHT_PX_AT_ONE_METER / self.distance
    }

    fn anchor(&self, t: f64) -> Point2 {
        let sway = self.sway_amplitude
            * (2.0 * PI * t / (2.0 * GAIT_PERIOD_FRAMES) + self.sway_phase).sin();
        self.start + self.velocity * t + Point2::new(0.0, sway)
    }

    /// Joint positions in image pixels at frame `t`.
    fn joints(&self, t: f64) -> [Point2; NUM_JOINTS] {
        let h = self.height();
        let anchor = self.anchor(t);
        let facing = if self.velocity.x < 0.0 { -1.0 } else { 1.0 };
        let swing = (2.0 * PI * t / GAIT_PERIOD_FRAMES + self.gait_phase).sin();
        std::array::from_fn(|k| {
            let (tx, ty) = TEMPLATE[k];
            let (amp, sign) = SWING[k];
            let dx = tx + facing * sign * amp * swing;
            anchor + Point2::new(dx * h, ty * h)
        })
    }

    fn bbox(&self, t: f64) -> BoundingBox {
        BoundingBox::around(self.joints(t)).expect("template is non-empty")
    }
}

fn sample(rng: &mut ChaCha8Rng, range: (f64, f64)) -> f64 {
    if range.1 > range.0 {
        rng.gen_range(range.0..range.1)
    } else {
        range.0
    }
}

fn fits_frame(w: &Walker, cfg: &SceneConfig) -> bool {
    let (iw, ih) = (cfg.image_size.0 as f64, cfg.image_size.1 as f64);
    (0..cfg.duration).all(|t| {
        let b = w.bbox(t as f64);
        b.min.x >= 1.0 && b.min.y >= 1.0 && b.max.x <= iw - 2.0 && b.max.y <= ih - 2.0
    })
}

fn keeps_gap(w: &Walker, others: &[Walker], cfg: &SceneConfig) -> bool {
    if cfg.min_gap <= 0.0 {
        return true;
    }
    others.iter().all(|o| {
        if w.crossing_group.is_some() && w.crossing_group == o.crossing_group {
            return true;
        }
        (0..cfg.duration).all(|t| {
            !w.bbox(t as f64)
                .padded(cfg.min_gap)
                .intersects(&o.bbox(t as f64))
        })
    })
}

fn random_walker(rng: &mut ChaCha8Rng, cfg: &SceneConfig) -> Walker {
    let distance = sample(rng, cfg.distance_range);
    let speed = sample(rng, cfg.speed_range);
    let mut angle = rng.gen_range(-0.5..0.5);
    if rng.gen_bool(0.5) {
        angle += PI;
    }
    let h = HEIGHT_PX_AT_ONE_METER / distance;
    let (iw, ih) = (cfg.image_size.0 as f64, cfg.image_size.1 as f64);
    Walker {
        distance,
        start: Point2::new(
            rng.gen_range(0.0..iw),
            rng.gen_range(0.0..ih + h).min(ih + h),
        ),
        velocity: Point2::new(angle.cos() * speed, angle.sin() * speed),
        sway_amplitude: rng.gen_range(0.0..2.0),
        sway_phase: rng.gen_range(0.0..2.0 * PI),
        gait_phase: rng.gen_range(0.0..2.0 * PI),
        crossing_group: None,
    }
}

/// Two people walking toward each other whose boxes coincide horizontally
/// around the middle of the sequence; the second is farther and slightly
/// higher in the image.
fn crossing_pair(rng: &mut ChaCha8Rng, cfg: &SceneConfig, group: u32) -> [Walker; 2] {
    let near = sample(rng, cfg.distance_range);
    let far = (near * rng.gen_range(1.05..1.3)).min(cfg.distance_range.1.max(near));
    let (iw, ih) = (cfg.image_size.0 as f64, cfg.image_size.1 as f64);
    let h_near = HEIGHT_PX_AT_ONE_METER / near;
    let meet_t = cfg.duration as f64 / 2.0 + rng.gen_range(-1.5..1.5);
    let meet_x = rng.gen_range(0.3 * iw..0.7 * iw);
    let foot_near = rng
        .gen_range((h_near + 0.0).min(ih)..ih.max(h_near + 1.0))
        .min(ih - 2.0);
    let foot_far = foot_near - rng.gen_range(0.1..0.25) * h_near;
    let speeds = (sample(rng, cfg.speed_range), sample(rng, cfg.speed_range));
    let make = |distance: f64, foot: f64, vx: f64, rng: &mut ChaCha8Rng| Walker {
        distance,
        start: Point2::new(meet_x - vx * meet_t, foot),
        velocity: Point2::new(vx, 0.0),
        sway_amplitude: rng.gen_range(0.0..1.0),
        sway_phase: rng.gen_range(0.0..2.0 * PI),
        gait_phase: rng.gen_range(0.0..2.0 * PI),
        crossing_group: Some(group),
    };
    let a = make(near, foot_near, speeds.0.max(0.5), rng);
    let b = make(far, foot_far, -speeds.1.max(0.5), rng);
    [a, b]
}

fn place(
    rng: &mut ChaCha8Rng,
    cfg: &SceneConfig,
    placed: &[Walker],
    mut propose: impl FnMut(&mut ChaCha8Rng) -> Vec<Walker>,
) -> Option<Vec<Walker>> {
    for _ in 0..PLACEMENT_ATTEMPTS {
        let group = propose(rng);
        let ok = group
            .iter()
            .all(|w| (!cfg.keep_in_frame || fits_frame(w, cfg)) && keeps_gap(w, placed, cfg));
        if ok {
            return Some(group);
        }
    }
    None
}

/// Generates a seeded sequence. People that cannot be placed under the gap
/// and in-frame constraints after a bounded number of attempts are dropped.
pub fn generate(cfg: &SceneConfig) -> SequenceAnnotation {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = cfg.num_people;
    let wanted = rng.gen_range(lo..=hi.max(lo)).max(2 * cfg.crossing_pairs) as usize;

    let mut walkers: Vec<Walker> = Vec::new();
    for g in 0..cfg.crossing_pairs {
        if let Some(pair) = place(&mut rng, cfg, &walkers, |r| {
            crossing_pair(r, cfg, g).to_vec()
        }) {
            walkers.extend(pair);
        }
    }
    while walkers.len() < wanted {
        match place(&mut rng, cfg, &walkers, |r| vec![random_walker(r, cfg)]) {
            Some(w) => walkers.extend(w),
            None => break,
        }
    }

    let (iw, ih) = (cfg.image_size.0 as f64, cfg.image_size.1 as f64);
    let occluders: Vec<BoundingBox> = {
        let n = cfg.occluder_events.floor() as usize
            + usize::from(rng.gen_bool(cfg.occluder_events.fract()));
        (0..n)
            .map(|_| {
                let (w, h) = (rng.gen_range(60.0..250.0), rng.gen_range(100.0..400.0));
                let min = Point2::new(rng.gen_range(0.0..iw), rng.gen_range(0.0..ih));
                BoundingBox {
                    min,
                    max: min + Point2::new(w, h),
                }
            })
            .collect()
    };

    let frames = (0..cfg.duration)
        .map(|t| {
            let tf = t as f64;
            let boxes: Vec<BoundingBox> = walkers.iter().map(|w| w.bbox(tf)).collect();
            let poses = walkers
                .iter()
                .enumerate()
                .filter_map(|(id, w)| {
                    let mut pose = PoseAnnotation::new(id as u32);
                    for (k, p) in w.joints(tf).into_iter().enumerate() {
                        // Written files carry six significant digits; generate at that precision.
                        let p = Point2::new(canonical(p.x), canonical(p.y));
                        if !(p.x >= 0.0 && p.y >= 0.0 && p.x < iw && p.y < ih) {
                            continue;
                        }
                        let behind_person = walkers.iter().enumerate().any(|(o, ow)| {
                            o != id && ow.distance < w.distance && boxes[o].contains(p)
                        });
                        let behind_object = occluders.iter().any(|b| b.contains(p));
                        let random =
                            cfg.random_occlusion > 0.0 && rng.gen_bool(cfg.random_occlusion);
                        pose.keypoints[k] = Some(Keypoint {
                            kind: JointKind::ALL[k],
                            position: p,
                            camera_distance: canonical(w.distance),
                            occluded: behind_person || behind_object || random,
                            self_occluded: false,
                        });
                    }
                    (pose.joint_count() > 0).then_some(pose)
                })
                .collect();
            FrameAnnotation {
                frame_index: t,
                image_size: cfg.image_size,
                poses,
            }
        })
        .collect();

    SequenceAnnotation {
        frames,
        fps: cfg.fps,
        clip_stride: 1,
        clip_length: SequenceAnnotation::DEFAULT_CLIP_LENGTH,
    }
}
