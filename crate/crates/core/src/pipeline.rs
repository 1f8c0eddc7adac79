//! Frame-level detection and sequence-level tracking over field stacks.

use crate::assoc::{assemble, AssembledPose, FrameFields};
use crate::config::AssocConfig;
use crate::field::FieldStack;
use crate::model::SkeletonTopology;
use crate::peaks::extract_candidates;
use crate::prediction::PosePrediction;
use crate::tracker::{Tracker, TrackerConfig, Tracklet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub assoc: AssocConfig,
    pub tracker: TrackerConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.assoc.validate()?;
        self.tracker.validate()
    }
}

fn check_stack(stack: &FieldStack, topo: &SkeletonTopology) -> Result<()> {
    if stack.pafs.len() != topo.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} part affinity fields for a {}-limb skeleton",
            stack.pafs.len(),
            topo.len()
        )));
    }
    Ok(())
}

/// Single-frame detection: peaks and spatial limb scores only.
pub fn detect_frame(
    stack: &FieldStack,
    topo: &SkeletonTopology,
    cfg: &AssocConfig,
) -> Result<Vec<AssembledPose>> {
    check_stack(stack, topo)?;
    let candidates = extract_candidates(stack, cfg);
    Ok(assemble(
        &candidates,
        &[],
        &FrameFields::single(stack),
        topo,
        cfg,
    ))
}

/// Untracked detections for independent frames, in image coordinates.
pub fn detect_frames(
    stacks: &[FieldStack],
    topo: &SkeletonTopology,
    cfg: &AssocConfig,
) -> Result<Vec<Vec<PosePrediction>>> {
    stacks
        .iter()
        .map(|s| {
            let poses = detect_frame(s, topo, cfg)?;
            Ok(poses
                .iter()
                .map(|p| PosePrediction::from_assembled(p, s.grid))
                .collect())
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TrackedSequence {
    /// Per processed frame, poses carrying their track id when tracked.
    pub frames: Vec<Vec<PosePrediction>>,
    pub tracklets: Vec<Tracklet>,
}

/// Detects with temporal limb scoring and links poses into tracklets.
/// Consecutive stacks are treated as consecutive processed frames.
pub fn track_sequence(
    stacks: &[FieldStack],
    topo: &SkeletonTopology,
    cfg: &PipelineConfig,
) -> Result<TrackedSequence> {
    let mut tracker = Tracker::new();
    let mut previous: Vec<AssembledPose> = Vec::new();
    let mut frames = Vec::with_capacity(stacks.len());
    for (i, stack) in stacks.iter().enumerate() {
        check_stack(stack, topo)?;
        let prev_stack = i.checked_sub(1).map(|p| &stacks[p]);
        if let Some(p) = prev_stack {
            if p.grid != stack.grid {
                return Err(Error::ShapeMismatch(format!(
                    "frame {i}: grid differs from previous frame"
                )));
            }
        }
        let fields = FrameFields {
            current: stack,
            previous: prev_stack.filter(|_| stack.tafs.is_some()),
        };
        let candidates = extract_candidates(stack, &cfg.assoc);
        let poses = assemble(&candidates, &previous, &fields, topo, &cfg.assoc);
        let tafs = fields.previous.and(stack.tafs.as_deref());
        let labeled = tracker.step(i as u32, poses, tafs, &cfg.tracker);
        frames.push(
            labeled
                .iter()
                .map(|p| PosePrediction::from_assembled(p, stack.grid))
                .collect(),
        );
        previous = labeled;
    }
    Ok(TrackedSequence {
        frames,
        tracklets: tracker.into_tracklets(),
    })
}
