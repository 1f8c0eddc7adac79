use super::{
    canonical, check_joint_names, json_error, line_pos, numbered_lines, parse_header, to_line,
    FormatError, TEXT_VERSION,
};
use crate::geometry::Point2;
use crate::model::{JointKind, NUM_JOINTS};
use crate::prediction::{PosePrediction, PredictedJoint};
use serde::{Deserialize, Serialize};

const FORMAT: &str = "jointtrack-poses";

/// Predicted poses of one processed frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseFrame {
    pub frame_index: u32,
    pub poses: Vec<PosePrediction>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    joints: Vec<String>,
}

/// `[kind, x, y, score, occluded]`
type JointRecord = (usize, f64, f64, f64, bool);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseRecord {
    track_id: Option<u64>,
    score: f64,
    joints: Vec<JointRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    frame: u32,
    poses: Vec<PoseRecord>,
}

pub fn save_poses(frames: &[PoseFrame]) -> String {
    let header = Header {
        format: FORMAT.into(),
        version: TEXT_VERSION,
        joints: JointKind::canonical_names()
            .iter()
            .map(|s| s.to_string())
            .collect(),
    };
    let mut out = to_line(&header);
    for f in frames {
        let record = FrameRecord {
            frame: f.frame_index,
            poses: f
                .poses
                .iter()
                .map(|p| PoseRecord {
                    track_id: p.track_id,
                    score: canonical(p.score),
                    joints: p
                        .present()
                        .map(|j| {
                            (
                                j.kind.index(),
                                canonical(j.position.x),
                                canonical(j.position.y),
                                canonical(j.score),
                                j.occluded,
                            )
                        })
                        .collect(),
                })
                .collect(),
        };
        out.push_str(&to_line(&record));
    }
    out
}

pub fn load_poses(text: &str) -> Result<Vec<PoseFrame>, FormatError> {
    let (header, header_line): (Header, usize) = parse_header(text, FORMAT)?;
    check_joint_names(&header.joints, header_line)?;
    let mut frames: Vec<PoseFrame> = Vec::new();
    for (line, text) in numbered_lines(text).skip(1) {
        let record: FrameRecord = serde_json::from_str(text).map_err(|e| json_error(e, line))?;
        if let Some(prev) = frames.last() {
            if record.frame <= prev.frame_index {
                return Err(FormatError::Validation {
                    position: line_pos(line),
                    reason: format!(
                        "frame index {} does not follow {}",
                        record.frame, prev.frame_index
                    ),
                });
            }
        }
        let mut poses = Vec::with_capacity(record.poses.len());
        for p in record.poses {
            let invalid = |reason: String| FormatError::Validation {
                position: line_pos(line),
                reason,
            };
            if !p.score.is_finite() {
                return Err(invalid(format!("non-finite pose score {}", p.score)));
            }
            let mut joints = [None; NUM_JOINTS];
            for (kind, x, y, score, occluded) in p.joints {
                let Some(kind) = JointKind::from_index(kind) else {
                    return Err(FormatError::Schema {
                        position: line_pos(line),
                        reason: format!("unknown joint index {kind}"),
                    });
                };
                if joints[kind.index()].is_some() {
                    return Err(FormatError::Schema {
                        position: line_pos(line),
                        reason: format!("joint {kind} listed twice"),
                    });
                }
                if !(x.is_finite() && y.is_finite() && score.is_finite()) {
                    return Err(invalid(format!("non-finite value in joint {kind}")));
                }
                joints[kind.index()] = Some(PredictedJoint {
                    kind,
                    position: Point2::new(x, y),
                    score,
                    occluded,
                });
            }
            poses.push(PosePrediction {
                track_id: p.track_id,
                score: p.score,
                joints,
            });
        }
        frames.push(PoseFrame {
            frame_index: record.frame,
            poses,
        });
    }
    Ok(frames)
}
