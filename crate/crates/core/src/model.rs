//! Skeleton topology and ground-truth annotation types.

use crate::geometry::{BoundingBox, Point2};
use std::collections::HashSet;
use std::fmt;

/// Number of annotated body joints per person.
pub const NUM_JOINTS: usize = 14;

/// The fourteen annotated body parts, in canonical index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JointKind {
    HeadTop,
    Neck,
    RShoulder,
    RElbow,
    RWrist,
    LShoulder,
    LElbow,
    LWrist,
    RHip,
    RKnee,
    RAnkle,
    LHip,
    LKnee,
    LAnkle,
}

impl JointKind {
    pub const ALL: [JointKind; NUM_JOINTS] = [
        JointKind::HeadTop,
        JointKind::Neck,
        JointKind::RShoulder,
        JointKind::RElbow,
        JointKind::RWrist,
        JointKind::LShoulder,
        JointKind::LElbow,
        JointKind::LWrist,
        JointKind::RHip,
        JointKind::RKnee,
        JointKind::RAnkle,
        JointKind::LHip,
        JointKind::LKnee,
        JointKind::LAnkle,
    ];

    const NAMES: [&'static str; NUM_JOINTS] = [
        "head_top",
        "neck",
        "r_shoulder",
        "r_elbow",
        "r_wrist",
        "l_shoulder",
        "l_elbow",
        "l_wrist",
        "r_hip",
        "r_knee",
        "r_ankle",
        "l_hip",
        "l_knee",
        "l_ankle",
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<JointKind> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        Self::NAMES[self.index()]
    }

    pub fn from_name(name: &str) -> Option<JointKind> {
        Self::NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| Self::ALL[i])
    }

    pub fn canonical_names() -> &'static [&'static str; NUM_JOINTS] {
        &Self::NAMES
    }
}

impl fmt::Display for JointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Allowed intra-frame joint connections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonTopology {
    limbs: Vec<(JointKind, JointKind)>,
}

impl SkeletonTopology {
    /// Builds a topology, rejecting anything that is not a spanning tree over
    /// all joints with a head_top–neck limb.
    pub fn new(limbs: Vec<(JointKind, JointKind)>) -> Result<Self, String> {
        let topo = SkeletonTopology { limbs };
        topo.check()?;
        Ok(topo)
    }

    pub fn limbs(&self) -> &[(JointKind, JointKind)] {
        &self.limbs
    }

    pub fn len(&self) -> usize {
        self.limbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.limbs.is_empty()
    }

    fn check(&self) -> Result<(), String> {
        let mut seen = HashSet::new();
        for &(a, b) in &self.limbs {
            if a == b {
                return Err(format!("limb {a}-{b} connects a joint to itself"));
            }
            let key = if a < b { (a, b) } else { (b, a) };
            if !seen.insert(key) {
                return Err(format!("duplicate limb {a}-{b}"));
            }
        }
        if self.limbs.len() != NUM_JOINTS - 1 {
            return Err(format!(
                "expected {} limbs for a spanning tree, found {}",
                NUM_JOINTS - 1,
                self.limbs.len()
            ));
        }
        // Union-find: J-1 edges without a cycle span all J nodes.
        let mut parent: Vec<usize> = (0..NUM_JOINTS).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for &(a, b) in &self.limbs {
            let (ra, rb) = (root(&mut parent, a.index()), root(&mut parent, b.index()));
            if ra == rb {
                return Err(format!("limb {a}-{b} closes a cycle"));
            }
            parent[ra] = rb;
        }
        if !seen.contains(&(JointKind::HeadTop, JointKind::Neck)) {
            return Err("topology lacks the head_top-neck limb".into());
        }
        Ok(())
    }
}

impl Default for SkeletonTopology {
    fn default() -> Self {
        default_topology()
    }
}

/// Neck-rooted 13-limb tree, listed head-down.
pub fn default_topology() -> SkeletonTopology {
    use JointKind::*;
    SkeletonTopology {
        limbs: vec![
            (HeadTop, Neck),
            (Neck, RShoulder),
            (Neck, LShoulder),
            (RShoulder, RElbow),
            (RElbow, RWrist),
            (LShoulder, LElbow),
            (LElbow, LWrist),
            (Neck, RHip),
            (Neck, LHip),
            (RHip, RKnee),
            (RKnee, RAnkle),
            (LHip, LKnee),
            (LKnee, LAnkle),
        ],
    }
}

/// One annotated joint in input-image pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub kind: JointKind,
    pub position: Point2,
    /// Metric distance from the camera, in meters.
    pub camera_distance: f64,
    pub occluded: bool,
    pub self_occluded: bool,
}

impl Keypoint {
    pub fn visible(kind: JointKind, x: f64, y: f64, camera_distance: f64) -> Self {
        Keypoint {
            kind,
            position: Point2::new(x, y),
            camera_distance,
            occluded: false,
            self_occluded: false,
        }
    }

    /// True when the joint belongs in the occluded heatmaps.
    pub fn is_hidden(&self) -> bool {
        self.occluded || self.self_occluded
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseAnnotation {
    pub person_id: u32,
    /// Indexed by `JointKind::index`; `None` for joints outside the frame.
    pub keypoints: [Option<Keypoint>; NUM_JOINTS],
}

impl PoseAnnotation {
    pub fn new(person_id: u32) -> Self {
        PoseAnnotation {
            person_id,
            keypoints: [None; NUM_JOINTS],
        }
    }

    pub fn with_keypoints<I: IntoIterator<Item = Keypoint>>(person_id: u32, keypoints: I) -> Self {
        let mut pose = PoseAnnotation::new(person_id);
        for kp in keypoints {
            pose.keypoints[kp.kind.index()] = Some(kp);
        }
        pose
    }

    pub fn get(&self, kind: JointKind) -> Option<&Keypoint> {
        self.keypoints[kind.index()].as_ref()
    }

    pub fn present(&self) -> impl Iterator<Item = &Keypoint> {
        self.keypoints.iter().flatten()
    }

    pub fn joint_count(&self) -> usize {
        self.present().count()
    }

    /// Tight box around every annotated joint, occluded ones included.
    pub fn bounding_box(&self) -> Option<BoundingBox> {
        BoundingBox::around(self.present().map(|k| k.position))
    }

    /// Head segment length (head_top to neck) in pixels.
    pub fn head_size(&self) -> Option<f64> {
        let top = self.get(JointKind::HeadTop)?;
        let neck = self.get(JointKind::Neck)?;
        Some(top.position.distance(neck.position))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameAnnotation {
    pub frame_index: u32,
    /// (width, height) in pixels.
    pub image_size: (u32, u32),
    pub poses: Vec<PoseAnnotation>,
}

impl FrameAnnotation {
    pub fn pose_by_id(&self, person_id: u32) -> Option<&PoseAnnotation> {
        self.poses.iter().find(|p| p.person_id == person_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceAnnotation {
    pub frames: Vec<FrameAnnotation>,
    pub fps: f64,
    /// Frame gap between temporally linked frames.
    pub clip_stride: u32,
    /// Number of subsampled frames per clip.
    pub clip_length: u32,
}

impl SequenceAnnotation {
    pub const DEFAULT_CLIP_LENGTH: u32 = 8;

    pub fn new(frames: Vec<FrameAnnotation>, fps: f64) -> Self {
        SequenceAnnotation {
            frames,
            fps,
            clip_stride: 1,
            clip_length: Self::DEFAULT_CLIP_LENGTH,
        }
    }

    /// Frames visited when processing at the configured stride.
    pub fn processed_frames(&self) -> impl Iterator<Item = &FrameAnnotation> {
        self.frames.iter().step_by(self.clip_stride.max(1) as usize)
    }
}

/// A single broken invariant found by [`validate_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonIncreasingFrameIndex {
        position: usize,
        previous: u32,
        current: u32,
    },
    InvalidStride(u32),
    InvalidClipLength(u32),
    InvalidFps(f64),
    EmptyImage {
        frame: u32,
    },
    DuplicatePersonId {
        frame: u32,
        person_id: u32,
    },
    KindMismatch {
        frame: u32,
        person_id: u32,
        slot: usize,
        kind: JointKind,
    },
    OutOfBounds {
        frame: u32,
        person_id: u32,
        kind: JointKind,
        x: f64,
        y: f64,
    },
    BadDistance {
        frame: u32,
        person_id: u32,
        kind: JointKind,
        distance: f64,
    },
    ConflictingOcclusion {
        frame: u32,
        person_id: u32,
        kind: JointKind,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonIncreasingFrameIndex { position, previous, current } => write!(
                f,
                "frame #{position}: index {current} does not follow {previous}"
            ),
            Violation::InvalidStride(s) => write!(f, "clip stride {s} must be >= 1"),
            Violation::InvalidClipLength(n) => write!(f, "clip length {n} must be >= 2"),
            Violation::InvalidFps(v) => write!(f, "fps {v} must be finite and positive"),
            Violation::EmptyImage { frame } => write!(f, "frame {frame}: empty image size"),
            Violation::DuplicatePersonId { frame, person_id } => {
                write!(f, "frame {frame}: person id {person_id} appears more than once")
            }
            Violation::KindMismatch { frame, person_id, slot, kind } => write!(
                f,
                "frame {frame}, person {person_id}: slot {slot} holds a {kind} keypoint"
            ),
            Violation::OutOfBounds { frame, person_id, kind, x, y } => write!(
                f,
                "frame {frame}, person {person_id}: {kind} at ({x}, {y}) lies outside the image"
            ),
            Violation::BadDistance { frame, person_id, kind, distance } => write!(
                f,
                "frame {frame}, person {person_id}: {kind} camera distance {distance} must be finite and positive"
            ),
            Violation::ConflictingOcclusion { frame, person_id, kind } => write!(
                f,
                "frame {frame}, person {person_id}: {kind} is flagged both occluded and self-occluded"
            ),
        }
    }
}

/// Checks every annotation invariant; an empty result means the sequence is valid.
pub fn validate_sequence(seq: &SequenceAnnotation) -> Vec<Violation> {
    let mut out = Vec::new();
    if seq.clip_stride < 1 {
        out.push(Violation::InvalidStride(seq.clip_stride));
    }
    if seq.clip_length < 2 {
        out.push(Violation::InvalidClipLength(seq.clip_length));
    }
    if !(seq.fps.is_finite() && seq.fps > 0.0) {
        out.push(Violation::InvalidFps(seq.fps));
    }
    let mut previous: Option<u32> = None;
    for (position, frame) in seq.frames.iter().enumerate() {
        if let Some(prev) = previous {
            if frame.frame_index <= prev {
                out.push(Violation::NonIncreasingFrameIndex {
                    position,
                    previous: prev,
                    current: frame.frame_index,
                });
            }
        }
        previous = Some(frame.frame_index);
        validate_frame_into(frame, &mut out);
    }
    out
}

/// Frame-level subset of [`validate_sequence`].
pub fn validate_frame(frame: &FrameAnnotation) -> Vec<Violation> {
    let mut out = Vec::new();
    validate_frame_into(frame, &mut out);
    out
}

fn validate_frame_into(frame: &FrameAnnotation, out: &mut Vec<Violation>) {
    let f = frame.frame_index;
    let (w, h) = frame.image_size;
    if w == 0 || h == 0 {
        out.push(Violation::EmptyImage { frame: f });
    }
    let mut ids = HashSet::new();
    for pose in &frame.poses {
        let pid = pose.person_id;
        if !ids.insert(pid) {
            out.push(Violation::DuplicatePersonId {
                frame: f,
                person_id: pid,
            });
        }
        for (slot, kp) in pose.keypoints.iter().enumerate() {
            let Some(kp) = kp else { continue };
            if kp.kind.index() != slot {
                out.push(Violation::KindMismatch {
                    frame: f,
                    person_id: pid,
                    slot,
                    kind: kp.kind,
                });
            }
            let Point2 { x, y } = kp.position;
            let inside = x >= 0.0 && y >= 0.0 && x < w as f64 && y < h as f64;
            if !inside {
                out.push(Violation::OutOfBounds {
                    frame: f,
                    person_id: pid,
                    kind: kp.kind,
                    x,
                    y,
                });
            }
            if !(kp.camera_distance.is_finite() && kp.camera_distance > 0.0) {
                out.push(Violation::BadDistance {
                    frame: f,
                    person_id: pid,
                    kind: kp.kind,
                    distance: kp.camera_distance,
                });
            }
            if kp.occluded && kp.self_occluded {
                out.push(Violation::ConflictingOcclusion {
                    frame: f,
                    person_id: pid,
                    kind: kp.kind,
                });
            }
        }
    }
}
