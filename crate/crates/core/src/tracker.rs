//! Frame-by-frame tracklet construction.
//!
//! Each new pose is linked to the active track whose last pose agrees best
//! with it along the temporal affinity fields. There is no motion model and
//! no appearance model.

use crate::assoc::{greedy_assignment, temporal_score, AssembledPose};
use crate::field::VectorField;
use crate::model::JointKind;
use crate::Error;

/// How pose-to-track affinity is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AffinityKind {
    /// Mean temporal line integral over shared joints.
    #[default]
    Taf,
    /// Box overlap with the track's last pose, ignoring the fields.
    BoxIou,
}

/// Denominator of the temporal affinity sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AffinityNormalization {
    /// Joint kinds present in both poses: a perfect fragment scores 1.
    Shared,
    /// Joint kinds present in either pose: fragments score in proportion
    /// to the skeleton they cover.
    #[default]
    Union,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Consecutive unmatched frames a track survives.
    pub max_age: u32,
    pub min_match_score: f64,
    pub min_joints_for_birth: usize,
    /// Poses with fewer joints are never linked to an existing track.
    pub min_joints_for_match: usize,
    pub affinity: AffinityKind,
    pub normalization: AffinityNormalization,
    pub integral_samples: usize,
    /// Per-joint score for a joint that stayed within one grid pixel while
    /// the field shows no motion.
    pub stationary_score: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            max_age: 1,
            min_match_score: 0.1,
            min_joints_for_birth: 3,
            min_joints_for_match: 3,
            affinity: AffinityKind::Taf,
            normalization: AffinityNormalization::Union,
            integral_samples: 10,
            stationary_score: 0.5,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.integral_samples == 0 {
            return Err(Error::Config("integral_samples must be >= 1".into()));
        }
        if !self.min_match_score.is_finite() || !self.stationary_score.is_finite() {
            return Err(Error::Config("tracker scores must be finite".into()));
        }
        if self.min_joints_for_birth == 0 {
            return Err(Error::Config("min_joints_for_birth must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackState {
    Active,
    Terminated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tracklet {
    pub track_id: u64,
    /// `(frame_index, pose)` pairs with strictly increasing frame indices.
    pub entries: Vec<(u32, AssembledPose)>,
    pub state: TrackState,
    misses: u32,
}

impl Tracklet {
    pub fn last_pose(&self) -> &AssembledPose {
        &self
            .entries
            .last()
            .expect("tracklets are born with one entry")
            .1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Pose-to-track affinity: temporal scores summed over shared joint kinds,
/// divided per `cfg.normalization`; `-inf` when no kind is shared.
pub fn taf_affinity(
    pose: &AssembledPose,
    last: &AssembledPose,
    tafs: Option<&[VectorField]>,
    cfg: &TrackerConfig,
) -> f64 {
    let mut sum = 0.0;
    let mut shared = 0usize;
    for kind in JointKind::ALL {
        let (Some(cur), Some(prev)) = (pose.get(kind), last.get(kind)) else {
            continue;
        };
        let g = match tafs {
            Some(t) => temporal_score(
                cur.position,
                prev.position,
                &t[kind.index()],
                cfg.integral_samples,
                cfg.stationary_score,
            ),
            None if cur.position.distance(prev.position) <= 1.0 => cfg.stationary_score,
            None => 0.0,
        };
        sum += g;
        shared += 1;
    }
    if shared == 0 {
        f64::NEG_INFINITY
    } else {
        let denom = match cfg.normalization {
            AffinityNormalization::Shared => shared,
            AffinityNormalization::Union => JointKind::ALL
                .iter()
                .filter(|&&k| pose.get(k).is_some() || last.get(k).is_some())
                .count(),
        };
        sum / denom as f64
    }
}

fn iou_affinity(pose: &AssembledPose, last: &AssembledPose) -> f64 {
    match (pose.bounding_box(), last.bounding_box()) {
        (Some(a), Some(b)) => a.iou(&b),
        _ => f64::NEG_INFINITY,
    }
}

/// Online tracker state for one sequence.
#[derive(Debug, Clone, Default)]
pub struct Tracker {
    tracks: Vec<Tracklet>,
    next_id: u64,
}

impl Tracker {
    pub fn new() -> Self {
        Tracker {
            tracks: Vec::new(),
            next_id: 1,
        }
    }

    pub fn tracklets(&self) -> &[Tracklet] {
        &self.tracks
    }

    pub fn into_tracklets(self) -> Vec<Tracklet> {
        self.tracks
    }

    /// Associates one frame's poses with the active tracks and returns the
    /// poses with `provisional_id` set for every tracked pose. `tafs` links
    /// this frame to the previously processed one.
    pub fn step(
        &mut self,
        frame_index: u32,
        poses: Vec<AssembledPose>,
        tafs: Option<&[VectorField]>,
        cfg: &TrackerConfig,
    ) -> Vec<AssembledPose> {
        if self.next_id == 0 {
            self.next_id = 1;
        }
        let active: Vec<usize> = (0..self.tracks.len())
            .filter(|&i| self.tracks[i].state == TrackState::Active)
            .collect();
        let affinity: Vec<Vec<f64>> = poses
            .iter()
            .map(|pose| {
                let linkable = pose.joint_count() >= cfg.min_joints_for_match;
                active
                    .iter()
                    .map(|&t| {
                        let last = self.tracks[t].last_pose();
                        let a = match cfg.affinity {
                            AffinityKind::Taf => taf_affinity(pose, last, tafs, cfg),
                            AffinityKind::BoxIou => iou_affinity(pose, last),
                        };
                        if linkable && a >= cfg.min_match_score {
                            a
                        } else {
                            f64::NEG_INFINITY
                        }
                    })
                    .collect()
            })
            .collect();

        let mut labeled = poses;
        let mut matched_track = vec![false; active.len()];
        for (p, t, _) in greedy_assignment(&affinity, f64::NEG_INFINITY) {
            let track = &mut self.tracks[active[t]];
            labeled[p].provisional_id = Some(track.track_id);
            track.entries.push((frame_index, labeled[p].clone()));
            track.misses = 0;
            matched_track[t] = true;
        }
        for (t, matched) in matched_track.into_iter().enumerate() {
            if !matched {
                let track = &mut self.tracks[active[t]];
                track.misses += 1;
                if track.misses > cfg.max_age {
                    track.state = TrackState::Terminated;
                }
            }
        }
        for pose in labeled.iter_mut() {
            if pose.provisional_id.is_none() && pose.joint_count() >= cfg.min_joints_for_birth {
                let id = self.next_id;
                self.next_id += 1;
                pose.provisional_id = Some(id);
                self.tracks.push(Tracklet {
                    track_id: id,
                    entries: vec![(frame_index, pose.clone())],
                    state: TrackState::Active,
                    misses: 0,
                });
            }
        }
        labeled
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::geometry::Point2;

    fn body(x: f64) -> AssembledPose {
        AssembledPose::from_positions(
            JointKind::ALL
                .iter()
                .enumerate()
                .map(|(i, &k)| (k, Point2::new(x + (i % 3) as f64, 2.0 + i as f64))),
        )
    }

    #[test]
    fn reappearance_after_termination_gets_new_id() {
        let cfg = TrackerConfig {
            max_age: 0,
            ..Default::default()
        };
        let mut tr = Tracker::new();
        let out = tr.step(0, vec![body(5.0)], None, &cfg);
        assert_eq!(out[0].provisional_id, Some(1));
        tr.step(1, vec![], None, &cfg);
        assert_eq!(tr.tracklets()[0].state, TrackState::Terminated);
        let out = tr.step(2, vec![body(5.0)], None, &cfg);
        assert_eq!(out[0].provisional_id, Some(2));
    }

    #[test]
    fn stationary_person_keeps_id_without_fields() {
        let cfg = TrackerConfig::default();
        let mut tr = Tracker::new();
        for f in 0..5 {
            let out = tr.step(f, vec![body(5.0)], None, &cfg);
            assert_eq!(out[0].provisional_id, Some(1));
        }
        assert_eq!(tr.tracklets().len(), 1);
        assert_eq!(tr.tracklets()[0].len(), 5);
    }

    #[test]
    fn small_poses_are_not_born() {
        let cfg = TrackerConfig::default();
        let mut tr = Tracker::new();
        let tiny = AssembledPose::from_positions([(JointKind::Neck, Point2::new(1.0, 1.0))]);
        let out = tr.step(0, vec![tiny], None, &cfg);
        assert_eq!(out[0].provisional_id, None);
        assert!(tr.tracklets().is_empty());
    }

    #[test]
    fn taf_disambiguates_moving_people() {
        // Two people moved 2 px toward each other; the field records the
        // true motion, so each continues its own track.
        let grid = Grid::new(40, 30, 8);
        let cfg = TrackerConfig::default();
        let mut tr = Tracker::new();
        tr.step(0, vec![body(10.0), body(16.0)], None, &cfg);
        let mut tafs = vec![VectorField::zeros(grid); 14];
        for (i, t) in tafs.iter_mut().enumerate() {
            let y = 2 + i;
            for dx in 0..=2 {
                let xo = i % 3;
                t.x.set(12 + xo - dx, y, -1.0);
                t.x.set(14 + xo + dx, y, 1.0);
            }
        }
        let out = tr.step(1, vec![body(14.0), body(12.0)], Some(&tafs), &cfg);
        assert_eq!(out[0].provisional_id, Some(2));
        assert_eq!(out[1].provisional_id, Some(1));
    }

    #[test]
    fn no_shared_joints_means_no_match() {
        let a = AssembledPose::from_positions([(JointKind::Neck, Point2::new(1.0, 1.0))]);
        let b = AssembledPose::from_positions([(JointKind::LAnkle, Point2::new(1.0, 1.0))]);
        assert_eq!(
            taf_affinity(&a, &b, None, &TrackerConfig::default()),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn union_normalization_discounts_fragments() {
        let full = body(5.0);
        let fragment = AssembledPose::from_positions(
            [JointKind::RHip, JointKind::RKnee, JointKind::RAnkle]
                .map(|k| (k, full.get(k).unwrap().position)),
        );
        let union = TrackerConfig::default();
        let shared = TrackerConfig {
            normalization: AffinityNormalization::Shared,
            ..Default::default()
        };
        let s = union.stationary_score;
        assert_eq!(taf_affinity(&full, &full, None, &union), s);
        assert_eq!(taf_affinity(&full, &fragment, None, &shared), s);
        assert!((taf_affinity(&full, &fragment, None, &union) - s * 3.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn fragments_below_match_size_never_continue_tracks() {
        let cfg = TrackerConfig::default();
        let mut tr = Tracker::new();
        tr.step(0, vec![body(5.0)], None, &cfg);
        let pair = AssembledPose::from_positions(
            [JointKind::HeadTop, JointKind::Neck].map(|k| (k, body(5.0).get(k).unwrap().position)),
        );
        let out = tr.step(1, vec![pair], None, &cfg);
        assert_eq!(out[0].provisional_id, None);
    }
}
