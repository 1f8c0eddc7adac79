//! Detected poses in input-image coordinates, as consumed by evaluation and
//! written to pose files.

use crate::assoc::AssembledPose;
use crate::field::Grid;
use crate::geometry::{BoundingBox, Point2};
use crate::model::{JointKind, PoseAnnotation, NUM_JOINTS};

/// Fraction of box extent added on each side of a joint-derived box.
pub const BOX_EXPANSION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedJoint {
    pub kind: JointKind,
    pub position: Point2,
    pub score: f64,
    /// Came from the occluded-joint heatmaps.
    pub occluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosePrediction {
    pub track_id: Option<u64>,
    pub score: f64,
    pub joints: [Option<PredictedJoint>; NUM_JOINTS],
}

impl PosePrediction {
    pub fn empty() -> Self {
        PosePrediction {
            track_id: None,
            score: 0.0,
            joints: [None; NUM_JOINTS],
        }
    }

    pub fn from_assembled(pose: &AssembledPose, grid: Grid) -> Self {
        let mut out = PosePrediction {
            track_id: pose.provisional_id,
            score: pose.total_score,
            joints: [None; NUM_JOINTS],
        };
        for j in pose.placed() {
            out.joints[j.kind.index()] = Some(PredictedJoint {
                kind: j.kind,
                position: grid.to_image(j.position),
                score: j.score,
                occluded: j.from_occluded_map,
            });
        }
        out
    }

    /// A perfect prediction of an annotated pose.
    pub fn from_annotation(pose: &PoseAnnotation, track_id: Option<u64>) -> Self {
        let mut out = PosePrediction::empty();
        out.track_id = track_id;
        out.score = 1.0;
        for kp in pose.present() {
            out.joints[kp.kind.index()] = Some(PredictedJoint {
                kind: kp.kind,
                position: kp.position,
                score: 1.0,
                occluded: kp.is_hidden(),
            });
        }
        out
    }

    pub fn get(&self, kind: JointKind) -> Option<&PredictedJoint> {
        self.joints[kind.index()].as_ref()
    }

    pub fn present(&self) -> impl Iterator<Item = &PredictedJoint> {
        self.joints.iter().flatten()
    }

    pub fn joint_count(&self) -> usize {
        self.present().count()
    }

    /// Joint box expanded by [`BOX_EXPANSION`] per side.
    pub fn detection_box(&self) -> Option<BoundingBox> {
        BoundingBox::around(self.present().map(|j| j.position)).map(|b| b.expanded(BOX_EXPANSION))
    }
}

/// Ground-truth detection box: every annotated joint, occluded ones included.
pub fn annotation_box(pose: &PoseAnnotation) -> Option<BoundingBox> {
    pose.bounding_box().map(|b| b.expanded(BOX_EXPANSION))
}
