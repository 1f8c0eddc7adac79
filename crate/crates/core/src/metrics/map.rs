use super::pckh::{joint_correct, match_by_hits, pckh_threshold};
use crate::model::{FrameAnnotation, JointKind, NUM_JOINTS};
use crate::prediction::PosePrediction;

#[derive(Debug, Clone, PartialEq)]
pub struct JointMap {
    /// Average precision per joint kind, `None` without ground truth.
    pub ap_per_joint: [Option<f64>; NUM_JOINTS],
    /// Mean over kinds with ground truth, in percent.
    pub map: f64,
}

/// Area under the precision envelope for detections ranked by score.
/// `ranked` holds the true-positive flag of each detection in rank order.
pub fn average_precision(ranked: &[bool], num_gt: usize) -> f64 {
    if num_gt == 0 || ranked.is_empty() {
        return 0.0;
    }
    let mut precision = Vec::with_capacity(ranked.len());
    let mut recall = Vec::with_capacity(ranked.len());
    let mut tp = 0usize;
    for (i, &hit) in ranked.iter().enumerate() {
        if hit {
            tp += 1;
        }
        precision.push(tp as f64 / (i + 1) as f64);
        recall.push(tp as f64 / num_gt as f64);
    }
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for i in 0..ranked.len() {
        if recall[i] > prev_recall {
            ap += (recall[i] - prev_recall) * precision[i];
            prev_recall = recall[i];
        }
    }
    100.0 * ap
}

/// Joint-level mean average precision. Every predicted joint inherits its
/// pose's score; it is a true positive when its pose is matched to a ground
/// truth person and the joint is PCKh-correct for that person.
pub fn joint_map(
    pred_frames: &[Vec<PosePrediction>],
    gt_frames: &[FrameAnnotation],
    ratio: f64,
) -> JointMap {
    let mut scored: Vec<Vec<(f64, bool)>> = vec![Vec::new(); NUM_JOINTS];
    let mut num_gt = [0usize; NUM_JOINTS];
    let empty = Vec::new();
    for (f, gt) in gt_frames.iter().enumerate() {
        let preds = pred_frames.get(f).unwrap_or(&empty);
        for person in &gt.poses {
            if pckh_threshold(person, ratio).is_some() {
                for kp in person.present() {
                    num_gt[kp.kind.index()] += 1;
                }
            }
        }
        let matches = match_by_hits(preds, gt, ratio);
        for (p, pred) in preds.iter().enumerate() {
            let gt_person = matches
                .iter()
                .find(|m| m.1 == p)
                .map(|&(g, _)| &gt.poses[g]);
            for j in pred.present() {
                let hit = gt_person.is_some_and(|person| {
                    let thr =
                        pckh_threshold(person, ratio).expect("matched people have a head segment");
                    joint_correct(pred, person, j.kind, thr)
                });
                scored[j.kind.index()].push((pred.score, hit));
            }
        }
    }
    let ap_per_joint: [Option<f64>; NUM_JOINTS] = std::array::from_fn(|k| {
        if num_gt[k] == 0 {
            return None;
        }
        let mut dets = scored[k].clone();
        // Stable: equal scores keep input order.
        dets.sort_by(|a, b| b.0.total_cmp(&a.0));
        let ranked: Vec<bool> = dets.iter().map(|d| d.1).collect();
        Some(average_precision(&ranked, num_gt[k]))
    });
    let vals: Vec<f64> = ap_per_joint.iter().flatten().copied().collect();
    let map = if vals.is_empty() {
        0.0
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    JointMap { ap_per_joint, map }
}

/// Convenience: AP for one joint kind.
pub fn joint_ap(result: &JointMap, kind: JointKind) -> Option<f64> {
    result.ap_per_joint[kind.index()]
}
