//! Pose, detection and tracking evaluation.

mod detection;
mod map;
mod mot;
mod pckh;

pub use detection::{detection_metrics, greedy_iou_matches, DetectionCounts};
pub use map::{average_precision, joint_ap, joint_map, JointMap};
pub use mot::{clear_mot, max_weight_matching, ClearMot};
pub use pckh::{joint_hits, match_by_hits, pckh, pckh_threshold, PckhTally};

use crate::model::{FrameAnnotation, NUM_JOINTS};
use crate::prediction::PosePrediction;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// PCKh threshold as a fraction of the head segment.
    pub pckh_ratio: f64,
    pub iou_threshold: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            pckh_ratio: 0.5,
            iou_threshold: 0.5,
        }
    }
}

/// Every reported number for one evaluated sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub pckh_per_joint: [Option<f64>; NUM_JOINTS],
    pub pckh_mean: f64,
    pub joint_map: f64,
    pub det_precision: f64,
    pub det_recall: f64,
    pub det_f1: f64,
    pub mota: f64,
    pub idf1: f64,
    pub mt: f64,
    pub ml: f64,
    pub fp: usize,
    pub fn_: usize,
    pub ids: usize,
    pub frag: usize,
    pub gt_count: usize,
    pub pckh_skipped: usize,
    pub recovered_joints: usize,
}

/// Evaluates aligned prediction and ground-truth frames.
pub fn evaluate(
    pred_frames: &[Vec<PosePrediction>],
    gt_frames: &[FrameAnnotation],
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    if pred_frames.len() != gt_frames.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predicted frames vs {} ground-truth frames",
            pred_frames.len(),
            gt_frames.len()
        )));
    }
    let mut tally = PckhTally::default();
    let mut det = DetectionCounts::default();
    for (preds, gt) in pred_frames.iter().zip(gt_frames) {
        tally.merge(&pckh(preds, gt, cfg.pckh_ratio));
        det.merge(detection_metrics(preds, gt, cfg.iou_threshold));
    }
    let map = joint_map(pred_frames, gt_frames, cfg.pckh_ratio);
    let mot = clear_mot(pred_frames, gt_frames, cfg.iou_threshold);
    Ok(EvalReport {
        pckh_per_joint: tally.per_joint(),
        pckh_mean: tally.mean(),
        joint_map: map.map,
        det_precision: det.precision(),
        det_recall: det.recall(),
        det_f1: det.f1(),
        mota: mot.mota,
        idf1: mot.idf1,
        mt: mot.mt,
        ml: mot.ml,
        fp: mot.fp,
        fn_: mot.fn_,
        ids: mot.ids,
        frag: mot.frag,
        gt_count: mot.gt_count,
        pckh_skipped: tally.skipped,
        recovered_joints: tally.correct_joints(),
    })
}
