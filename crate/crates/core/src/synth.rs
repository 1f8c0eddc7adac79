//! Ground-truth field synthesis from annotations and the masked SSE loss.
//!
//! Heatmaps place a Gaussian at every keypoint whose spread shrinks with the
//! keypoint's camera distance, `σ = exp(1 - d / α)` in grid pixels. Overlapping
//! Gaussians of the same kind combine by maximum. Affinity fields hold the unit
//! vector of a limb (or of a joint's inter-frame motion, pointing back in time)
//! on every grid point within a half-width of the segment, averaged over the
//! people covering that point.

use crate::config::{MaskPolicy, SynthConfig};
use crate::field::{FieldStack, Grid, ScalarField, VectorField};
use crate::geometry::{point_segment_distance, Point2};
use crate::model::{FrameAnnotation, SequenceAnnotation, SkeletonTopology, NUM_JOINTS};
use crate::{Error, Result};
use rayon::prelude::*;

/// Gaussians are zeroed beyond this many σ.
const TRUNCATION_SIGMAS: f64 = 3.0;

/// Heatmap spread for a keypoint at `distance` meters.
pub fn sigma_for_distance(distance: f64, alpha: f64) -> f64 {
    (1.0 - distance / alpha).exp()
}

fn check_grid(frame: &FrameAnnotation, grid: Grid) -> Result<()> {
    if grid.fits_image(frame.image_size) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "grid {}x{} (scale {}) does not cover a {}x{} image",
            grid.width, grid.height, grid.scale_factor, frame.image_size.0, frame.image_size.1
        )))
    }
}

/// Inclusive integer range of grid coordinates in `[lo, hi]`, clamped to `[0, len)`.
fn span(lo: f64, hi: f64, len: u32) -> std::ops::Range<usize> {
    let start = lo.ceil().max(0.0) as usize;
    let end = (hi.floor() + 1.0).clamp(0.0, len as f64) as usize;
    start..end.max(start)
}

/// Max-splats one truncated Gaussian into `field`.
fn splat_gaussian(field: &mut ScalarField, grid: Grid, center: Point2, sigma: f64) {
    let radius = TRUNCATION_SIGMAS * sigma;
    let r2 = radius * radius;
    let inv = 1.0 / (sigma * sigma);
    for y in span(center.y - radius, center.y + radius, grid.height) {
        let dy = y as f64 - center.y;
        for x in span(center.x - radius, center.x + radius, grid.width) {
            let dx = x as f64 - center.x;
            let d2 = dx * dx + dy * dy;
            if d2 > r2 {
                continue;
            }
            let v = (-d2 * inv).exp() as f32;
            if v > field.get(x, y) {
                field.set(x, y, v);
            }
        }
    }
}

/// Visible and occluded joint heatmaps for one frame.
pub fn synth_heatmaps(
    frame: &FrameAnnotation,
    grid: Grid,
    cfg: &SynthConfig,
) -> Result<(Vec<ScalarField>, Vec<ScalarField>)> {
    check_grid(frame, grid)?;
    let mut visible = vec![ScalarField::zeros(grid); NUM_JOINTS];
    let mut occluded = vec![ScalarField::zeros(grid); NUM_JOINTS];
    for kp in frame.poses.iter().flat_map(|p| p.present()) {
        let target = if kp.is_hidden() {
            &mut occluded
        } else {
            &mut visible
        };
        let sigma = sigma_for_distance(kp.camera_distance, cfg.alpha_sigma);
        splat_gaussian(
            &mut target[kp.kind.index()],
            grid,
            grid.to_grid(kp.position),
            sigma,
        );
    }
    Ok((visible, occluded))
}

/// Running per-pixel vector sums and coverage counts for one channel.
struct SegmentAccumulator {
    sum_x: Vec<f64>,
    sum_y: Vec<f64>,
    count: Vec<u32>,
    grid: Grid,
}

impl SegmentAccumulator {
    fn new(grid: Grid) -> Self {
        SegmentAccumulator {
            sum_x: vec![0.0; grid.len()],
            sum_y: vec![0.0; grid.len()],
            count: vec![0; grid.len()],
            grid,
        }
    }

    /// Adds the unit vector from `from` to `to` on every grid point within
    /// `half_width` of the segment. Zero-length segments add nothing.
    fn add_segment(&mut self, from: Point2, to: Point2, half_width: f64) {
        let Some(unit) = (to - from).normalized() else {
            return;
        };
        let w = self.grid.width as usize;
        let xs = span(
            from.x.min(to.x) - half_width,
            from.x.max(to.x) + half_width,
            self.grid.width,
        );
        for y in span(
            from.y.min(to.y) - half_width,
            from.y.max(to.y) + half_width,
            self.grid.height,
        ) {
            for x in xs.clone() {
                let p = Point2::new(x as f64, y as f64);
                if point_segment_distance(p, from, to) <= half_width {
                    let i = y * w + x;
                    self.sum_x[i] += unit.x;
                    self.sum_y[i] += unit.y;
                    self.count[i] += 1;
                }
            }
        }
    }

    fn finish(self) -> VectorField {
        let mut out = VectorField::zeros(self.grid);
        for (i, &n) in self.count.iter().enumerate() {
            if n > 0 {
                out.x.data_mut()[i] = (self.sum_x[i] / n as f64) as f32;
                out.y.data_mut()[i] = (self.sum_y[i] / n as f64) as f32;
            }
        }
        out
    }
}

/// Part affinity fields, one per limb of `topo`.
pub fn synth_pafs(
    frame: &FrameAnnotation,
    grid: Grid,
    topo: &SkeletonTopology,
    cfg: &SynthConfig,
) -> Result<Vec<VectorField>> {
    check_grid(frame, grid)?;
    Ok(topo
        .limbs()
        .iter()
        .map(|&(ja, jb)| {
            let mut acc = SegmentAccumulator::new(grid);
            for pose in &frame.poses {
                if let (Some(a), Some(b)) = (pose.get(ja), pose.get(jb)) {
                    acc.add_segment(
                        grid.to_grid(a.position),
                        grid.to_grid(b.position),
                        cfg.paf_half_width,
                    );
                }
            }
            acc.finish()
        })
        .collect())
}

/// Temporal affinity fields for `curr`, pointing back toward the same joint
/// in `prev`. People are matched by `person_id`.
pub fn synth_tafs(
    prev: &FrameAnnotation,
    curr: &FrameAnnotation,
    grid: Grid,
    cfg: &SynthConfig,
) -> Result<Vec<VectorField>> {
    check_grid(prev, grid)?;
    check_grid(curr, grid)?;
    let mut accs: Vec<SegmentAccumulator> = (0..NUM_JOINTS)
        .map(|_| SegmentAccumulator::new(grid))
        .collect();
    for pose in &curr.poses {
        let Some(before) = prev.pose_by_id(pose.person_id) else {
            continue;
        };
        for kp in pose.present() {
            if let Some(old) = before.get(kp.kind) {
                accs[kp.kind.index()].add_segment(
                    grid.to_grid(kp.position),
                    grid.to_grid(old.position),
                    cfg.taf_half_width,
                );
            }
        }
    }
    Ok(accs.into_iter().map(SegmentAccumulator::finish).collect())
}

/// Loss mask for one frame.
pub fn synth_mask(frame: &FrameAnnotation, grid: Grid, cfg: &SynthConfig) -> ScalarField {
    let mut mask = ScalarField::filled(grid, 1.0);
    if cfg.mask_policy == MaskPolicy::ExcludeOccludedDisks {
        for kp in frame
            .poses
            .iter()
            .flat_map(|p| p.present())
            .filter(|k| k.is_hidden())
        {
            let c = grid.to_grid(kp.position);
            let r = 2.0 * sigma_for_distance(kp.camera_distance, cfg.alpha_sigma);
            for y in span(c.y - r, c.y + r, grid.height) {
                for x in span(c.x - r, c.x + r, grid.width) {
                    if Point2::new(x as f64, y as f64).distance(c) <= r {
                        mask.set(x, y, 0.0);
                    }
                }
            }
        }
    }
    mask
}

/// Complete field stack for `frame`; temporal fields are produced when a
/// previous processed frame is given.
pub fn synth_frame(
    frame: &FrameAnnotation,
    prev: Option<&FrameAnnotation>,
    grid: Grid,
    topo: &SkeletonTopology,
    cfg: &SynthConfig,
) -> Result<FieldStack> {
    let (visible, occluded) = synth_heatmaps(frame, grid, cfg)?;
    let pafs = synth_pafs(frame, grid, topo, cfg)?;
    let tafs = prev.map(|p| synth_tafs(p, frame, grid, cfg)).transpose()?;
    Ok(FieldStack {
        grid,
        visible,
        occluded,
        pafs,
        tafs,
        mask: synth_mask(frame, grid, cfg),
    })
}

/// Field stacks for every processed frame (stride `clip_stride`), in order.
pub fn synth_sequence(
    seq: &SequenceAnnotation,
    topo: &SkeletonTopology,
    cfg: &SynthConfig,
) -> Result<Vec<FieldStack>> {
    cfg.validate()?;
    let frames: Vec<&FrameAnnotation> = seq.processed_frames().collect();
    (0..frames.len())
        .into_par_iter()
        .map(|i| {
            let frame = frames[i];
            let grid = Grid::for_image(frame.image_size.0, frame.image_size.1);
            let prev = i.checked_sub(1).map(|j| frames[j]);
            synth_frame(frame, prev, grid, topo, cfg)
        })
        .collect()
}

/// Per-branch masked squared-error terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossReport {
    pub visible: f64,
    pub occluded: f64,
    pub paf: f64,
    pub taf: f64,
    pub total: f64,
}

fn masked_sse<'a>(
    preds: impl Iterator<Item = &'a ScalarField>,
    truths: impl Iterator<Item = &'a ScalarField>,
    mask: &ScalarField,
) -> f64 {
    preds
        .zip(truths)
        .map(|(p, t)| {
            p.data()
                .iter()
                .zip(t.data())
                .zip(mask.data())
                .map(|((&a, &b), &m)| {
                    let d = a as f64 - b as f64;
                    m as f64 * d * d
                })
                .sum::<f64>()
        })
        .sum()
}

fn vector_channels(v: &[VectorField]) -> impl Iterator<Item = &ScalarField> {
    v.iter().flat_map(|f| [&f.x, &f.y])
}

/// Sum of mask-weighted squared differences per branch, using the mask of `truth`.
pub fn masked_sse_loss(pred: &FieldStack, truth: &FieldStack) -> Result<LossReport> {
    if pred.grid != truth.grid {
        return Err(Error::ShapeMismatch(
            "prediction and truth grids differ".into(),
        ));
    }
    if pred.pafs.len() != truth.pafs.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predicted limbs vs {} true limbs",
            pred.pafs.len(),
            truth.pafs.len()
        )));
    }
    let mask = &truth.mask;
    let visible = masked_sse(pred.visible.iter(), truth.visible.iter(), mask);
    let occluded = masked_sse(pred.occluded.iter(), truth.occluded.iter(), mask);
    let paf = masked_sse(
        vector_channels(&pred.pafs),
        vector_channels(&truth.pafs),
        mask,
    );
    let taf = match (&pred.tafs, &truth.tafs) {
        (Some(p), Some(t)) => masked_sse(vector_channels(p), vector_channels(t), mask),
        _ => 0.0,
    };
    Ok(LossReport {
        visible,
        occluded,
        paf,
        taf,
        total: visible + occluded + paf + taf,
    })
}
