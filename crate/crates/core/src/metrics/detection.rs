use crate::geometry::BoundingBox;
use crate::model::FrameAnnotation;
use crate::prediction::{annotation_box, PosePrediction};

/// Box-level detection counts, accumulable over frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DetectionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl DetectionCounts {
    pub fn merge(&mut self, other: DetectionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp, self.fn_ == 0)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_, self.fp == 0)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

/// Percentage; an empty denominator counts as perfect only when nothing
/// else went wrong either.
fn ratio(num: usize, den: usize, clean: bool) -> f64 {
    if den == 0 {
        if clean {
            100.0
        } else {
            0.0
        }
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Greedy IoU matching of boxes in descending overlap, keeping pairs at or
/// above `threshold`. Returns `(left_index, right_index, iou)`.
pub fn greedy_iou_matches(
    left: &[Option<BoundingBox>],
    right: &[Option<BoundingBox>],
    threshold: f64,
) -> Vec<(usize, usize, f64)> {
    let mut pairs = Vec::new();
    for (i, a) in left.iter().enumerate() {
        let Some(a) = a else { continue };
        for (j, b) in right.iter().enumerate() {
            let Some(b) = b else { continue };
            let iou = a.iou(b);
            if iou >= threshold && iou > 0.0 {
                pairs.push((i, j, iou));
            }
        }
    }
    pairs.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));
    let mut lu = vec![false; left.len()];
    let mut ru = vec![false; right.len()];
    pairs
        .into_iter()
        .filter(|&(i, j, _)| {
            if lu[i] || ru[j] {
                false
            } else {
                lu[i] = true;
                ru[j] = true;
                true
            }
        })
        .collect()
}

/// Detection counts for one frame using joint-derived boxes.
pub fn detection_metrics(
    preds: &[PosePrediction],
    gt: &FrameAnnotation,
    iou_threshold: f64,
) -> DetectionCounts {
    let gt_boxes: Vec<_> = gt.poses.iter().map(annotation_box).collect();
    let pred_boxes: Vec<_> = preds.iter().map(PosePrediction::detection_box).collect();
    let tp = greedy_iou_matches(&gt_boxes, &pred_boxes, iou_threshold).len();
    DetectionCounts {
        tp,
        fp: preds.len() - tp,
        fn_: gt.poses.len() - tp,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JointKind, Keypoint, PoseAnnotation};

    fn person(id: u32, x: f64) -> PoseAnnotation {
        PoseAnnotation::with_keypoints(
            id,
            [
                Keypoint::visible(JointKind::HeadTop, x, 10.0, 5.0),
                Keypoint::visible(JointKind::LAnkle, x + 30.0, 100.0, 5.0),
            ],
        )
    }

    fn frame(poses: Vec<PoseAnnotation>) -> FrameAnnotation {
        FrameAnnotation {
            frame_index: 0,
            image_size: (500, 200),
            poses,
        }
    }

    #[test]
    fn identical_boxes_are_perfect() {
        let gt = frame(vec![person(0, 10.0)]);
        let preds = vec![PosePrediction::from_annotation(&gt.poses[0], None)];
        let c = detection_metrics(&preds, &gt, 0.5);
        assert_eq!((c.precision(), c.recall(), c.f1()), (100.0, 100.0, 100.0));
    }

    #[test]
    fn disjoint_boxes_score_zero() {
        let gt = frame(vec![person(0, 10.0)]);
        let preds = vec![PosePrediction::from_annotation(&person(1, 300.0), None)];
        let c = detection_metrics(&preds, &gt, 0.5);
        assert_eq!((c.precision(), c.recall(), c.f1()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn one_of_two_found() {
        let gt = frame(vec![person(0, 10.0), person(1, 300.0)]);
        let preds = vec![PosePrediction::from_annotation(&gt.poses[1], None)];
        let c = detection_metrics(&preds, &gt, 0.5);
        assert_eq!(c.precision(), 100.0);
        assert_eq!(c.recall(), 50.0);
        assert!((c.f1() - 200.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn extra_false_positive_never_raises_precision() {
        let gt = frame(vec![person(0, 10.0)]);
        let mut preds = vec![PosePrediction::from_annotation(&gt.poses[0], None)];
        let before = detection_metrics(&preds, &gt, 0.5).precision();
        preds.push(PosePrediction::from_annotation(&person(9, 300.0), None));
        assert!(detection_metrics(&preds, &gt, 0.5).precision() <= before);
    }
}
