use crate::model::{FrameAnnotation, JointKind, PoseAnnotation, NUM_JOINTS};
use crate::prediction::PosePrediction;

/// Per-joint PCKh tallies, accumulable over frames.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PckhTally {
    pub correct: [usize; NUM_JOINTS],
    pub total: [usize; NUM_JOINTS],
    /// Ground-truth people without a usable head segment.
    pub skipped: usize,
}

impl PckhTally {
    pub fn merge(&mut self, other: &PckhTally) {
        for k in 0..NUM_JOINTS {
            self.correct[k] += other.correct[k];
            self.total[k] += other.total[k];
        }
        self.skipped += other.skipped;
    }

    /// Percentage per joint kind; `None` where no ground truth exists.
    pub fn per_joint(&self) -> [Option<f64>; NUM_JOINTS] {
        std::array::from_fn(|k| {
            (self.total[k] > 0).then(|| 100.0 * self.correct[k] as f64 / self.total[k] as f64)
        })
    }

    /// Mean of the per-joint percentages over kinds with ground truth.
    pub fn mean(&self) -> f64 {
        let vals: Vec<f64> = self.per_joint().into_iter().flatten().collect();
        if vals.is_empty() {
            0.0
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    }

    pub fn correct_joints(&self) -> usize {
        self.correct.iter().sum()
    }
}

/// Distance threshold for one ground-truth person, if it has a head segment.
pub fn pckh_threshold(gt: &PoseAnnotation, ratio: f64) -> Option<f64> {
    gt.head_size().filter(|&h| h > 0.0).map(|h| ratio * h)
}

pub(crate) fn joint_correct(
    pred: &PosePrediction,
    gt: &PoseAnnotation,
    kind: JointKind,
    threshold: f64,
) -> bool {
    match (pred.get(kind), gt.get(kind)) {
        (Some(p), Some(g)) => p.position.distance(g.position) <= threshold,
        _ => false,
    }
}

/// Number of annotated joints of `gt` that `pred` localizes within `threshold`.
pub fn joint_hits(pred: &PosePrediction, gt: &PoseAnnotation, threshold: f64) -> usize {
    JointKind::ALL
        .iter()
        .filter(|&&k| joint_correct(pred, gt, k, threshold))
        .count()
}

/// Greedy one-to-one matching of predictions to ground-truth people by
/// descending hit count. Returns `(gt_index, pred_index)` pairs.
pub fn match_by_hits(
    preds: &[PosePrediction],
    gt: &FrameAnnotation,
    ratio: f64,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (g, person) in gt.poses.iter().enumerate() {
        let Some(thr) = pckh_threshold(person, ratio) else {
            continue;
        };
        for (p, pred) in preds.iter().enumerate() {
            let hits = joint_hits(pred, person, thr);
            if hits > 0 {
                pairs.push((hits, g, p));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut gt_used = vec![false; gt.poses.len()];
    let mut pred_used = vec![false; preds.len()];
    let mut out = Vec::new();
    for (_, g, p) in pairs {
        if !gt_used[g] && !pred_used[p] {
            gt_used[g] = true;
            pred_used[p] = true;
            out.push((g, p));
        }
    }
    out
}

/// PCKh correctness for one frame.
pub fn pckh(preds: &[PosePrediction], gt: &FrameAnnotation, ratio: f64) -> PckhTally {
    let matches = match_by_hits(preds, gt, ratio);
    let mut tally = PckhTally::default();
    for (g, person) in gt.poses.iter().enumerate() {
        let Some(thr) = pckh_threshold(person, ratio) else {
            tally.skipped += 1;
            continue;
        };
        let pred = matches
            .iter()
            .find(|(mg, _)| *mg == g)
            .map(|&(_, p)| &preds[p]);
        for kp in person.present() {
            let k = kp.kind.index();
            tally.total[k] += 1;
            if pred.is_some_and(|p| joint_correct(p, person, kp.kind, thr)) {
                tally.correct[k] += 1;
            }
        }
    }
    tally
}
