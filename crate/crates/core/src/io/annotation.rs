use super::{
    canonical, check_joint_names, json_error, line_pos, numbered_lines, parse_header, to_line,
    FormatError, TEXT_VERSION,
};
use crate::geometry::Point2;
use crate::model::{
    validate_frame, validate_sequence, FrameAnnotation, JointKind, Keypoint, PoseAnnotation,
    SequenceAnnotation, SkeletonTopology,
};
use serde::{Deserialize, Serialize};

const FORMAT: &str = "jointtrack-annotations";

/// A sequence together with the skeleton it was annotated against.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationDocument {
    pub sequence: SequenceAnnotation,
    pub topology: SkeletonTopology,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    image_size: (u32, u32),
    fps: f64,
    clip_stride: u32,
    clip_length: u32,
    joints: Vec<String>,
    limbs: Vec<(usize, usize)>,
}

/// `[kind, x, y, distance, occluded, self_occluded]`
type JointRecord = (usize, f64, f64, f64, bool, bool);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseRecord {
    person_id: u32,
    joints: Vec<JointRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    frame: u32,
    poses: Vec<PoseRecord>,
}

/// Writes the canonical text form. Frames must share one image size.
pub fn save_annotations(doc: &AnnotationDocument) -> Result<String, FormatError> {
    let seq = &doc.sequence;
    let image_size = seq.frames.first().map_or((0, 0), |f| f.image_size);
    if let Some(f) = seq.frames.iter().find(|f| f.image_size != image_size) {
        return Err(FormatError::InvalidValue {
            position: line_pos(0),
            reason: format!(
                "frame {} has image size {:?}, expected {:?}",
                f.frame_index, f.image_size, image_size
            ),
        });
    }
    let header = Header {
        format: FORMAT.into(),
        version: TEXT_VERSION,
        image_size,
        fps: canonical(seq.fps),
        clip_stride: seq.clip_stride,
        clip_length: seq.clip_length,
        joints: JointKind::canonical_names()
            .iter()
            .map(|s| s.to_string())
            .collect(),
        limbs: doc
            .topology
            .limbs()
            .iter()
            .map(|(a, b)| (a.index(), b.index()))
            .collect(),
    };
    let mut out = to_line(&header);
    for frame in &seq.frames {
        let record = FrameRecord {
            frame: frame.frame_index,
            poses: frame
                .poses
                .iter()
                .map(|p| PoseRecord {
                    person_id: p.person_id,
                    joints: p
                        .present()
                        .map(|k| {
                            (
                                k.kind.index(),
                                canonical(k.position.x),
                                canonical(k.position.y),
                                canonical(k.camera_distance),
                                k.occluded,
                                k.self_occluded,
                            )
                        })
                        .collect(),
                })
                .collect(),
        };
        out.push_str(&to_line(&record));
    }
    Ok(out)
}

/// Parses and validates an annotation document.
pub fn load_annotations(text: &str) -> Result<AnnotationDocument, FormatError> {
    let (header, header_line): (Header, usize) = parse_header(text, FORMAT)?;
    check_joint_names(&header.joints, header_line)?;
    let limbs = header
        .limbs
        .iter()
        .map(
            |&(a, b)| match (JointKind::from_index(a), JointKind::from_index(b)) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(FormatError::Schema {
                    position: line_pos(header_line),
                    reason: format!("limb ({a}, {b}) names an unknown joint index"),
                }),
            },
        )
        .collect::<Result<Vec<_>, _>>()?;
    let topology = SkeletonTopology::new(limbs).map_err(|reason| FormatError::Schema {
        position: line_pos(header_line),
        reason,
    })?;

    let mut sequence = SequenceAnnotation {
        frames: Vec::new(),
        fps: header.fps,
        clip_stride: header.clip_stride,
        clip_length: header.clip_length,
    };
    if let Some(v) = validate_sequence(&sequence).first() {
        return Err(FormatError::Validation {
            position: line_pos(header_line),
            reason: v.to_string(),
        });
    }

    for (line, text) in numbered_lines(text).skip(1) {
        let record: FrameRecord = serde_json::from_str(text).map_err(|e| json_error(e, line))?;
        let frame = frame_from_record(record, header.image_size, line)?;
        if let Some(prev) = sequence.frames.last() {
            if frame.frame_index <= prev.frame_index {
                return Err(FormatError::Validation {
                    position: line_pos(line),
                    reason: format!(
                        "frame index {} does not follow {}",
                        frame.frame_index, prev.frame_index
                    ),
                });
            }
        }
        if let Some(v) = validate_frame(&frame).first() {
            return Err(FormatError::Validation {
                position: line_pos(line),
                reason: v.to_string(),
            });
        }
        sequence.frames.push(frame);
    }
    Ok(AnnotationDocument { sequence, topology })
}

fn frame_from_record(
    record: FrameRecord,
    image_size: (u32, u32),
    line: usize,
) -> Result<FrameAnnotation, FormatError> {
    let mut poses = Vec::with_capacity(record.poses.len());
    for p in record.poses {
        let mut pose = PoseAnnotation::new(p.person_id);
        for (kind, x, y, d, occluded, self_occluded) in p.joints {
            let Some(kind) = JointKind::from_index(kind) else {
                return Err(FormatError::Schema {
                    position: line_pos(line),
                    reason: format!("person {}: unknown joint index {kind}", p.person_id),
                });
            };
            let slot = &mut pose.keypoints[kind.index()];
            if slot.is_some() {
                return Err(FormatError::Schema {
                    position: line_pos(line),
                    reason: format!("person {}: joint {kind} listed twice", p.person_id),
                });
            }
            *slot = Some(Keypoint {
                kind,
                position: Point2::new(x, y),
                camera_distance: d,
                occluded,
                self_occluded,
            });
        }
        poses.push(pose);
    }
    Ok(FrameAnnotation {
        frame_index: record.frame,
        image_size,
        poses,
    })
}
