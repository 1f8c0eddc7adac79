//! Spatio-temporal limb scoring and skeleton assembly.
//!
//! A candidate limb is scored by the line integral of its part affinity field
//! plus, when a previous frame is available, the integral of the previous
//! frame's field between the two candidates warped back along their temporal
//! affinity fields. Limbs are then matched greedily per limb type and merged
//! into skeletons over the topology tree.

use crate::config::AssocConfig;
use crate::field::{FieldStack, VectorField};
use crate::geometry::{BoundingBox, Point2};
use crate::model::{JointKind, SkeletonTopology, NUM_JOINTS};
use crate::peaks::{Candidate, CandidateSet};

/// Isolated candidates at least this confident become single-joint poses.
pub const SINGLE_JOINT_MIN_SCORE: f64 = 0.8;

/// A candidate placed in an assembled skeleton (grid coordinates).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedJoint {
    pub kind: JointKind,
    pub position: Point2,
    pub score: f64,
    pub from_occluded_map: bool,
    /// Index of the source candidate within its kind's candidate list.
    pub candidate: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledPose {
    pub joints: [Option<PlacedJoint>; NUM_JOINTS],
    pub total_score: f64,
    pub provisional_id: Option<u64>,
}

impl AssembledPose {
    pub fn empty() -> Self {
        AssembledPose {
            joints: [None; NUM_JOINTS],
            total_score: 0.0,
            provisional_id: None,
        }
    }

    /// Builds a pose from bare positions, e.g. ground truth mapped to the grid.
    pub fn from_positions<I: IntoIterator<Item = (JointKind, Point2)>>(joints: I) -> Self {
        let mut pose = AssembledPose::empty();
        for (kind, position) in joints {
            pose.joints[kind.index()] = Some(PlacedJoint {
                kind,
                position,
                score: 1.0,
                from_occluded_map: false,
                candidate: 0,
            });
        }
        pose
    }

    pub fn get(&self, kind: JointKind) -> Option<&PlacedJoint> {
        self.joints[kind.index()].as_ref()
    }

    pub fn placed(&self) -> impl Iterator<Item = &PlacedJoint> {
        self.joints.iter().flatten()
    }

    pub fn joint_count(&self) -> usize {
        self.placed().count()
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        BoundingBox::around(self.placed().map(|j| j.position))
    }
}

/// An accepted connection between two candidates for one limb type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimbConnection {
    pub limb: usize,
    pub candidate_a: usize,
    pub candidate_b: usize,
    pub score: f64,
}

/// Fields needed to associate one frame.
#[derive(Debug, Clone, Copy)]
pub struct FrameFields<'a> {
    pub current: &'a FieldStack,
    /// Previous processed frame, whose part affinity fields score warped limbs.
    pub previous: Option<&'a FieldStack>,
}

impl<'a> FrameFields<'a> {
    pub fn single(current: &'a FieldStack) -> Self {
        FrameFields {
            current,
            previous: None,
        }
    }

    fn taf(&self, kind: JointKind) -> Option<&'a VectorField> {
        self.current.tafs.as_ref().map(|t| &t[kind.index()])
    }
}

/// Mean of `field · unit(to - from)` at `samples` midpoints of the segment.
/// Zero for a degenerate segment.
pub fn line_integral(from: Point2, to: Point2, field: &VectorField, samples: usize) -> f64 {
    let Some(dir) = (to - from).normalized() else {
        return 0.0;
    };
    let n = samples.max(1);
    let sum: f64 = (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            field.sample(from.lerp(to, u)).dot(dir)
        })
        .sum();
    sum / n as f64
}

/// Limb affinity between two candidates along a part affinity field.
pub fn paf_line_integral(a: Point2, b: Point2, paf: &VectorField, cfg: &AssocConfig) -> f64 {
    line_integral(a, b, paf, cfg.integral_samples)
}

/// Temporal affinity from a joint at time t back to a joint at t-1.
pub fn taf_line_integral(
    current: Point2,
    previous: Point2,
    taf: &VectorField,
    cfg: &AssocConfig,
) -> f64 {
    line_integral(current, previous, taf, cfg.integral_samples)
}

/// Temporal agreement between a current and a previous joint position, with
/// the zero-motion fallback: a pair closer than one grid pixel scores at
/// least `floor` even when the field carries no motion.
pub fn temporal_score(
    current: Point2,
    previous: Point2,
    taf: &VectorField,
    samples: usize,
    floor: f64,
) -> f64 {
    let g = line_integral(current, previous, taf, samples);
    if g < floor && current.distance(previous) <= 1.0 {
        floor
    } else {
        g
    }
}

/// Search radius around a previous-frame skeleton.
pub fn search_radius(pose: &AssembledPose, cfg: &AssocConfig) -> f64 {
    let diag = pose.bounding_box().map_or(0.0, |b| b.diagonal());
    cfg.search_radius_multiplier * diag.max(1.0)
}

/// Previous-frame joint a candidate maps to along the temporal field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpMatch {
    /// Index into the previous-frame pose list.
    pub pose: usize,
    pub position: Point2,
    pub score: f64,
}

/// Finds the previous-frame joint of the candidate's kind that maximizes the
/// temporal line integral, among joints within the search radius of their
/// skeleton. Returns `None` when nothing in range reaches `min_limb_score`,
/// unless a joint lies within one grid pixel (zero-motion fallback).
pub fn warp_to_previous(
    c: &Candidate,
    prev_poses: &[AssembledPose],
    taf: Option<&VectorField>,
    cfg: &AssocConfig,
) -> Option<WarpMatch> {
    let mut best: Option<WarpMatch> = None;
    let mut nearest: Option<(f64, WarpMatch)> = None;
    for (i, pose) in prev_poses.iter().enumerate() {
        let Some(j) = pose.get(c.kind) else { continue };
        let dist = c.position.distance(j.position);
        if dist > search_radius(pose, cfg) {
            continue;
        }
        let g = taf.map_or(0.0, |t| taf_line_integral(c.position, j.position, t, cfg));
        let m = WarpMatch {
            pose: i,
            position: j.position,
            score: g,
        };
        if best.is_none_or(|b| g > b.score) {
            best = Some(m);
        }
        if dist <= 1.0 && nearest.is_none_or(|(d, _)| dist < d) {
            nearest = Some((dist, m));
        }
    }
    match best {
        Some(b) if b.score >= cfg.min_limb_score => Some(b),
        _ => nearest.map(|(_, m)| WarpMatch {
            score: cfg.min_limb_score,
            ..m
        }),
    }
}

fn limb_score_with_warps(
    limb: usize,
    a: &Candidate,
    b: &Candidate,
    warp_a: Option<&WarpMatch>,
    warp_b: Option<&WarpMatch>,
    fields: &FrameFields<'_>,
    cfg: &AssocConfig,
) -> f64 {
    let spatial = paf_line_integral(a.position, b.position, &fields.current.pafs[limb], cfg);
    let temporal = match (warp_a, warp_b, fields.previous) {
        (Some(wa), Some(wb), Some(prev)) if cfg.temporal_weight != 0.0 => {
            paf_line_integral(wa.position, wb.position, &prev.pafs[limb], cfg)
        }
        _ => 0.0,
    };
    spatial + cfg.temporal_weight * temporal
}

/// Spatio-temporal score of connecting `a` and `b` as limb `limb`.
pub fn score_limb(
    limb: usize,
    a: &Candidate,
    b: &Candidate,
    prev_poses: &[AssembledPose],
    fields: &FrameFields<'_>,
    cfg: &AssocConfig,
) -> f64 {
    let wa = warp_to_previous(a, prev_poses, fields.taf(a.kind), cfg);
    let wb = warp_to_previous(b, prev_poses, fields.taf(b.kind), cfg);
    limb_score_with_warps(limb, a, b, wa.as_ref(), wb.as_ref(), fields, cfg)
}

/// Greedy one-to-one assignment over a score matrix: pairs above
/// `min_score` are taken in descending order (ties by row, then column)
/// while both endpoints are free. Non-finite entries are never taken.
pub fn greedy_assignment(scores: &[Vec<f64>], min_score: f64) -> Vec<(usize, usize, f64)> {
    let mut pairs: Vec<(usize, usize, f64)> = scores
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &s)| (i, j, s)))
        .filter(|&(_, _, s)| s.is_finite() && s > min_score)
        .collect();
    pairs.sort_by(|x, y| y.2.total_cmp(&x.2).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));
    let cols = scores.iter().map(Vec::len).max().unwrap_or(0);
    let mut row_used = vec![false; scores.len()];
    let mut col_used = vec![false; cols];
    let mut out = Vec::new();
    for (i, j, s) in pairs {
        if !row_used[i] && !col_used[j] {
            row_used[i] = true;
            col_used[j] = true;
            out.push((i, j, s));
        }
    }
    out
}

/// Indices of previous poses whose search disk contains `p`.
fn nearby_previous(p: Point2, prev: &[(Point2, f64)]) -> Vec<usize> {
    prev.iter()
        .enumerate()
        .filter(|(_, (center, r))| p.distance(*center) <= *r)
        .map(|(i, _)| i)
        .collect()
}

/// Pair restriction: both ends near the same previous skeleton, or both far
/// from every previous skeleton (people not seen before).
fn pair_allowed(a: &[usize], b: &[usize]) -> bool {
    if a.is_empty() && b.is_empty() {
        return true;
    }
    a.iter().any(|i| b.contains(i))
}

/// Scores every limb type and keeps the greedy per-limb matching.
pub fn connect_limbs(
    candidates: &CandidateSet,
    prev_poses: &[AssembledPose],
    fields: &FrameFields<'_>,
    topo: &SkeletonTopology,
    cfg: &AssocConfig,
) -> Vec<LimbConnection> {
    let use_temporal =
        !prev_poses.is_empty() && fields.previous.is_some() && cfg.temporal_weight != 0.0;
    let warps: Vec<Vec<Option<WarpMatch>>> = JointKind::ALL
        .iter()
        .map(|&kind| {
            candidates
                .of(kind)
                .iter()
                .map(|c| {
                    if use_temporal {
                        warp_to_previous(c, prev_poses, fields.taf(kind), cfg)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    let regions: Vec<(Point2, f64)> = prev_poses
        .iter()
        .filter_map(|p| {
            p.bounding_box()
                .map(|b| (b.center(), search_radius(p, cfg)))
        })
        .collect();
    let near: Vec<Vec<Vec<usize>>> = JointKind::ALL
        .iter()
        .map(|&kind| {
            candidates
                .of(kind)
                .iter()
                .map(|c| nearby_previous(c.position, &regions))
                .collect()
        })
        .collect();

    let mut out = Vec::new();
    for (limb, &(ja, jb)) in topo.limbs().iter().enumerate() {
        let (ca, cb) = (candidates.of(ja), candidates.of(jb));
        let matrix: Vec<Vec<f64>> = ca
            .iter()
            .enumerate()
            .map(|(m, a)| {
                cb.iter()
                    .enumerate()
                    .map(|(n, b)| {
                        if !pair_allowed(&near[ja.index()][m], &near[jb.index()][n]) {
                            return f64::NEG_INFINITY;
                        }
                        limb_score_with_warps(
                            limb,
                            a,
                            b,
                            warps[ja.index()][m].as_ref(),
                            warps[jb.index()][n].as_ref(),
                            fields,
                            cfg,
                        )
                    })
                    .collect()
            })
            .collect();
        out.extend(
            greedy_assignment(&matrix, cfg.min_limb_score)
                .into_iter()
                .map(|(m, n, score)| LimbConnection {
                    limb,
                    candidate_a: m,
                    candidate_b: n,
                    score,
                }),
        );
    }
    out
}

#[derive(Clone)]
struct Partial {
    joints: [Option<usize>; NUM_JOINTS],
    score: f64,
}

/// Groups candidates into skeletons for one frame.
pub fn assemble(
    candidates: &CandidateSet,
    prev_poses: &[AssembledPose],
    fields: &FrameFields<'_>,
    topo: &SkeletonTopology,
    cfg: &AssocConfig,
) -> Vec<AssembledPose> {
    let connections = connect_limbs(candidates, prev_poses, fields, topo, cfg);
    let mut owner: Vec<Vec<Option<usize>>> = JointKind::ALL
        .iter()
        .map(|&k| vec![None; candidates.count(k)])
        .collect();
    let mut partials: Vec<Option<Partial>> = Vec::new();

    for conn in &connections {
        let (ja, jb) = topo.limbs()[conn.limb];
        let (a, b) = (conn.candidate_a, conn.candidate_b);
        let (ia, ib) = (ja.index(), jb.index());
        match (owner[ia][a], owner[ib][b]) {
            (None, None) => {
                let mut joints = [None; NUM_JOINTS];
                joints[ia] = Some(a);
                joints[ib] = Some(b);
                owner[ia][a] = Some(partials.len());
                owner[ib][b] = Some(partials.len());
                partials.push(Some(Partial {
                    joints,
                    score: conn.score,
                }));
            }
            (Some(p), None) | (None, Some(p)) => {
                let (free_kind, free_idx) = if owner[ia][a].is_some() {
                    (ib, b)
                } else {
                    (ia, a)
                };
                let part = partials[p].as_mut().expect("live pose");
                if part.joints[free_kind].is_none() {
                    part.joints[free_kind] = Some(free_idx);
                    part.score += conn.score;
                    owner[free_kind][free_idx] = Some(p);
                }
            }
            (Some(p), Some(q)) if p == q => {
                partials[p].as_mut().expect("live pose").score += conn.score;
            }
            (Some(p), Some(q)) => {
                let pj = partials[p].as_ref().expect("live pose").joints;
                let qj = partials[q].as_ref().expect("live pose").joints;
                let disjoint = pj.iter().zip(&qj).all(|(x, y)| x.is_none() || y.is_none());
                if disjoint {
                    let absorbed = partials[q].take().expect("live pose");
                    let keep = partials[p].as_mut().expect("live pose");
                    for (k, slot) in absorbed.joints.iter().enumerate() {
                        if let Some(ci) = *slot {
                            keep.joints[k] = Some(ci);
                            owner[k][ci] = Some(p);
                        }
                    }
                    keep.score += absorbed.score + conn.score;
                }
            }
        }
    }

    let mut poses: Vec<AssembledPose> = partials
        .into_iter()
        .flatten()
        .map(|part| {
            let mut pose = AssembledPose::empty();
            for kind in JointKind::ALL {
                if let Some(ci) = part.joints[kind.index()] {
                    let c = candidates.of(kind)[ci];
                    pose.joints[kind.index()] = Some(placed(c, ci));
                }
            }
            pose.total_score = part.score;
            pose
        })
        .collect();

    for kind in JointKind::ALL {
        for (ci, c) in candidates.of(kind).iter().enumerate() {
            if owner[kind.index()][ci].is_none() && c.score >= SINGLE_JOINT_MIN_SCORE {
                let mut pose = AssembledPose::empty();
                pose.joints[kind.index()] = Some(placed(*c, ci));
                poses.push(pose);
            }
        }
    }
    poses
}

fn placed(c: Candidate, index: usize) -> PlacedJoint {
    PlacedJoint {
        kind: c.kind,
        position: c.position,
        score: c.score,
        from_occluded_map: c.from_occluded_map,
        candidate: index,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn grid() -> Grid {
        Grid::new(20, 12, 8)
    }

    fn cand(kind: JointKind, x: f64, y: f64) -> Candidate {
        Candidate {
            kind,
            position: Point2::new(x, y),
            score: 1.0,
            from_occluded_map: false,
        }
    }

    #[test]
    fn constant_fields_give_unit_integrals() {
        let cfg = AssocConfig::default();
        let (a, b) = (Point2::new(0.0, 5.0), Point2::new(10.0, 5.0));
        let along = VectorField::constant(grid(), Point2::new(1.0, 0.0));
        let across = VectorField::constant(grid(), Point2::new(0.0, 1.0));
        let against = VectorField::constant(grid(), Point2::new(-1.0, 0.0));
        assert!((paf_line_integral(a, b, &along, &cfg) - 1.0).abs() < 1e-9);
        assert!(paf_line_integral(a, b, &across, &cfg).abs() < 1e-9);
        assert!((paf_line_integral(a, b, &against, &cfg) + 1.0).abs() < 1e-9);
        assert_eq!(paf_line_integral(a, a, &along, &cfg), 0.0);
        assert_eq!(
            taf_line_integral(a, b, &VectorField::zeros(grid()), &cfg),
            0.0
        );
    }

    #[test]
    fn greedy_takes_best_pairs_without_reuse() {
        let m = vec![vec![0.9, 0.8], vec![0.85, 0.1]];
        assert_eq!(greedy_assignment(&m, 0.05), vec![(0, 0, 0.9), (1, 1, 0.1)]);
        let m = vec![vec![0.01, f64::NEG_INFINITY]];
        assert!(greedy_assignment(&m, 0.05).is_empty());
    }

    #[test]
    fn warp_from_empty_previous_frame_is_none() {
        let c = cand(JointKind::Neck, 3.0, 3.0);
        assert!(warp_to_previous(&c, &[], None, &AssocConfig::default()).is_none());
    }

    #[test]
    fn warp_follows_the_temporal_field() {
        let cfg = AssocConfig::default();
        // Field pointing in -x: the joint came from the left.
        let mut taf = VectorField::zeros(grid());
        for x in 2..=8 {
            taf.x.set(x, 5, -1.0);
        }
        let left = AssembledPose::from_positions([
            (JointKind::Neck, Point2::new(3.0, 5.0)),
            (JointKind::HeadTop, Point2::new(3.0, 2.0)),
        ]);
        let right = AssembledPose::from_positions([
            (JointKind::Neck, Point2::new(11.0, 5.0)),
            (JointKind::HeadTop, Point2::new(11.0, 2.0)),
        ]);
        let c = cand(JointKind::Neck, 7.0, 5.0);
        let prev = vec![right, left];
        let m = warp_to_previous(&c, &prev, Some(&taf), &cfg).unwrap();
        // Oracle: evaluate G for each previous neck directly.
        let g_left = taf_line_integral(c.position, Point2::new(3.0, 5.0), &taf, &cfg);
        let g_right = taf_line_integral(c.position, Point2::new(11.0, 5.0), &taf, &cfg);
        assert!(g_left > g_right);
        assert_eq!(m.pose, 1);
        assert_eq!(m.score, g_left);
    }

    #[test]
    fn zero_motion_fallback_returns_coincident_joint() {
        let cfg = AssocConfig::default();
        let prev = vec![AssembledPose::from_positions([(
            JointKind::LKnee,
            Point2::new(4.0, 4.0),
        )])];
        let c = cand(JointKind::LKnee, 4.0, 4.3);
        let m = warp_to_previous(&c, &prev, Some(&VectorField::zeros(grid())), &cfg).unwrap();
        assert_eq!(m.pose, 0);
        assert_eq!(m.score, cfg.min_limb_score);
    }

    #[test]
    fn first_frame_score_is_spatial_only() {
        let cfg = AssocConfig::default();
        let mut stack = FieldStack::zeros(grid(), 13, false);
        stack.pafs[0] = VectorField::constant(grid(), Point2::new(0.0, 1.0));
        let a = cand(JointKind::HeadTop, 5.0, 1.0);
        let b = cand(JointKind::Neck, 5.0, 6.0);
        let s = score_limb(0, &a, &b, &[], &FrameFields::single(&stack), &cfg);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_candidates_assemble_to_nothing() {
        let stack = FieldStack::zeros(grid(), 13, false);
        let poses = assemble(
            &CandidateSet::new(),
            &[],
            &FrameFields::single(&stack),
            &crate::model::default_topology(),
            &AssocConfig::default(),
        );
        assert!(poses.is_empty());
    }
}
