//! CLEAR MOT bookkeeping and identity F1.

use super::detection::greedy_iou_matches;
use crate::geometry::BoundingBox;
use crate::model::FrameAnnotation;
use crate::prediction::{annotation_box, PosePrediction};
use std::collections::{BTreeMap, HashMap};

/// Above this many identities on the smaller side, IDF1 uses greedy matching.
const EXACT_IDF1_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClearMot {
    /// Signed percentage.
    pub mota: f64,
    pub idf1: f64,
    /// Percent of ground-truth trajectories tracked for at least 80% of their span.
    pub mt: f64,
    /// Percent of ground-truth trajectories tracked for at most 20% of their span.
    pub ml: f64,
    pub fp: usize,
    pub fn_: usize,
    pub ids: usize,
    pub frag: usize,
    pub gt_count: usize,
    pub pred_count: usize,
    pub matches: usize,
    pub trajectories: usize,
}

impl ClearMot {
    /// MOTA recomputed from the error counts.
    pub fn mota_from_counts(&self) -> f64 {
        100.0 * (1.0 - (self.fp + self.fn_ + self.ids) as f64 / self.gt_count.max(1) as f64)
    }
}

struct FrameItems {
    gt_ids: Vec<u32>,
    gt_boxes: Vec<Option<BoundingBox>>,
    track_ids: Vec<u64>,
    track_boxes: Vec<Option<BoundingBox>>,
}

fn frame_items(preds: &[PosePrediction], gt: &FrameAnnotation) -> FrameItems {
    let tracked: Vec<&PosePrediction> = preds.iter().filter(|p| p.track_id.is_some()).collect();
    FrameItems {
        gt_ids: gt.poses.iter().map(|p| p.person_id).collect(),
        gt_boxes: gt.poses.iter().map(annotation_box).collect(),
        track_ids: tracked.iter().map(|p| p.track_id.unwrap()).collect(),
        track_boxes: tracked.iter().map(|p| p.detection_box()).collect(),
    }
}

fn iou(a: &Option<BoundingBox>, b: &Option<BoundingBox>) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => a.iou(b),
        _ => 0.0,
    }
}

/// CLEAR MOT metrics and IDF1 over aligned prediction/ground-truth frames.
/// Only predictions carrying a track id take part.
pub fn clear_mot(
    pred_frames: &[Vec<PosePrediction>],
    gt_frames: &[FrameAnnotation],
    iou_threshold: f64,
) -> ClearMot {
    let mut out = ClearMot::default();
    let mut previous: HashMap<u32, u64> = HashMap::new();
    let mut last_track: HashMap<u32, u64> = HashMap::new();
    // Per ground-truth id, tracked flag for every frame it is present in.
    let mut history: BTreeMap<u32, Vec<bool>> = BTreeMap::new();
    // Identity overlap counts per (gt id, track id).
    let mut overlap: HashMap<(u32, u64), usize> = HashMap::new();

    let empty = Vec::new();
    for (f, gt) in gt_frames.iter().enumerate() {
        let preds = pred_frames.get(f).unwrap_or(&empty);
        let items = frame_items(preds, gt);
        out.gt_count += items.gt_ids.len();
        out.pred_count += items.track_ids.len();

        for (g, gid) in items.gt_ids.iter().enumerate() {
            for (t, tid) in items.track_ids.iter().enumerate() {
                let v = iou(&items.gt_boxes[g], &items.track_boxes[t]);
                if v >= iou_threshold && v > 0.0 {
                    *overlap.entry((*gid, *tid)).or_default() += 1;
                }
            }
        }

        let mut gt_used = vec![false; items.gt_ids.len()];
        let mut tr_used = vec![false; items.track_ids.len()];
        let mut current: HashMap<u32, u64> = HashMap::new();

        // Correspondences carried over from the previous frame.
        for (g, gid) in items.gt_ids.iter().enumerate() {
            let Some(tid) = previous.get(gid) else {
                continue;
            };
            let Some(t) = items.track_ids.iter().position(|x| x == tid) else {
                continue;
            };
            let v = iou(&items.gt_boxes[g], &items.track_boxes[t]);
            if !tr_used[t] && v >= iou_threshold && v > 0.0 {
                gt_used[g] = true;
                tr_used[t] = true;
                current.insert(*gid, *tid);
            }
        }

        let free_gt: Vec<usize> = (0..items.gt_ids.len()).filter(|&g| !gt_used[g]).collect();
        let free_tr: Vec<usize> = (0..items.track_ids.len())
            .filter(|&t| !tr_used[t])
            .collect();
        let left: Vec<_> = free_gt.iter().map(|&g| items.gt_boxes[g]).collect();
        let right: Vec<_> = free_tr.iter().map(|&t| items.track_boxes[t]).collect();
        for (i, j, _) in greedy_iou_matches(&left, &right, iou_threshold) {
            let (g, t) = (free_gt[i], free_tr[j]);
            let (gid, tid) = (items.gt_ids[g], items.track_ids[t]);
            if last_track.get(&gid).is_some_and(|&old| old != tid) {
                out.ids += 1;
            }
            gt_used[g] = true;
            tr_used[t] = true;
            current.insert(gid, tid);
        }

        for (g, gid) in items.gt_ids.iter().enumerate() {
            history.entry(*gid).or_default().push(gt_used[g]);
        }
        out.matches += current.len();
        out.fn_ += gt_used.iter().filter(|u| !**u).count();
        out.fp += tr_used.iter().filter(|u| !**u).count();
        for (gid, tid) in &current {
            last_track.insert(*gid, *tid);
        }
        previous = current;
    }

    out.trajectories = history.len();
    let mut mt = 0usize;
    let mut ml = 0usize;
    for flags in history.values() {
        let tracked = flags.iter().filter(|f| **f).count();
        let ratio = tracked as f64 / flags.len() as f64;
        if ratio >= 0.8 {
            mt += 1;
        }
        if ratio <= 0.2 {
            ml += 1;
        }
        out.frag += flags.windows(2).filter(|w| w[0] && !w[1]).count();
    }
    if out.trajectories > 0 {
        out.mt = 100.0 * mt as f64 / out.trajectories as f64;
        out.ml = 100.0 * ml as f64 / out.trajectories as f64;
    }
    out.mota = out.mota_from_counts();

    let idtp = best_identity_overlap(&overlap);
    let denom = out.gt_count + out.pred_count;
    out.idf1 = if denom == 0 {
        100.0
    } else {
        100.0 * 2.0 * idtp as f64 / denom as f64
    };
    out
}

/// Maximum total overlap under a one-to-one id correspondence.
fn best_identity_overlap(overlap: &HashMap<(u32, u64), usize>) -> usize {
    let mut gt_ids: Vec<u32> = overlap.keys().map(|k| k.0).collect();
    let mut tr_ids: Vec<u64> = overlap.keys().map(|k| k.1).collect();
    gt_ids.sort_unstable();
    gt_ids.dedup();
    tr_ids.sort_unstable();
    tr_ids.dedup();
    let weight: Vec<Vec<usize>> = gt_ids
        .iter()
        .map(|g| {
            tr_ids
                .iter()
                .map(|t| overlap.get(&(*g, *t)).copied().unwrap_or(0))
                .collect()
        })
        .collect();
    max_weight_matching(&weight)
}

/// Exact bitmask search when the smaller side is small, greedy otherwise.
pub fn max_weight_matching(weight: &[Vec<usize>]) -> usize {
    let rows = weight.len();
    let cols = weight.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0;
    }
    let (small, large, w): (usize, usize, Box<dyn Fn(usize, usize) -> usize>) = if rows <= cols {
        (rows, cols, Box::new(|s, l| weight[s][l]))
    } else {
        (cols, rows, Box::new(|s, l| weight[l][s]))
    };
    if small <= EXACT_IDF1_LIMIT {
        let mut best = vec![0usize; 1 << small];
        for l in 0..large {
            let prev = best.clone();
            for mask in 0..(1usize << small) {
                for s in 0..small {
                    if mask & (1 << s) == 0 {
                        let cand = prev[mask] + w(s, l);
                        let next = &mut best[mask | (1 << s)];
                        if cand > *next {
                            *next = cand;
                        }
                    }
                }
            }
        }
        best.into_iter().max().unwrap_or(0)
    } else {
        let mut pairs: Vec<(usize, usize, usize)> = (0..small)
            .flat_map(|s| (0..large).map(move |l| (s, l)))
            .map(|(s, l)| (w(s, l), s, l))
            .filter(|p| p.0 > 0)
            .collect();
        pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut su = vec![false; small];
        let mut lu = vec![false; large];
        let mut total = 0;
        for (v, s, l) in pairs {
            if !su[s] && !lu[l] {
                su[s] = true;
                lu[l] = true;
                total += v;
            }
        }
        total
    }
}
