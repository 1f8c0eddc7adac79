//! Joint candidate extraction by non-maximum suppression on heatmaps.

use crate::config::AssocConfig;
use crate::field::{FieldStack, ScalarField};
use crate::geometry::Point2;
use crate::model::{JointKind, NUM_JOINTS};

/// A discrete joint location hypothesis, in grid coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub kind: JointKind,
    pub position: Point2,
    pub score: f64,
    pub from_occluded_map: bool,
}

/// Candidates grouped by joint kind.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateSet {
    per_kind: [Vec<Candidate>; NUM_JOINTS],
}

impl CandidateSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(&self, kind: JointKind) -> &[Candidate] {
        &self.per_kind[kind.index()]
    }

    pub fn push(&mut self, c: Candidate) {
        self.per_kind[c.kind.index()].push(c);
    }

    pub fn count(&self, kind: JointKind) -> usize {
        self.per_kind[kind.index()].len()
    }

    pub fn len(&self) -> usize {
        self.per_kind.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Candidate> {
        self.per_kind.iter().flatten()
    }
}

/// Vertex offset of a parabola through (-1, l), (0, c), (1, r), clamped to
/// half a pixel. Zero when the samples are not strictly concave.
fn quadratic_offset(l: f64, c: f64, r: f64) -> f64 {
    let denom = l - 2.0 * c + r;
    if denom >= 0.0 {
        return 0.0;
    }
    (0.5 * (l - r) / denom).clamp(-0.5, 0.5)
}

/// Local maxima of one heatmap channel above `threshold`.
///
/// A pixel must be strictly greater than every earlier neighbour in row-major
/// order and at least as large as every later one, so a plateau yields only
/// its first pixel.
pub fn find_peaks(map: &ScalarField, threshold: f64, window: usize) -> Vec<(usize, usize, f64)> {
    let (w, h) = (map.width(), map.height());
    let half = (window / 2) as isize;
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = map.get(x, y);
            if (v as f64) <= threshold {
                continue;
            }
            let mut is_peak = true;
            'window: for dy in -half..=half {
                for dx in -half..=half {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let n = map.get(nx as usize, ny as usize);
                    let earlier = dy < 0 || (dy == 0 && dx < 0);
                    if n > v || (earlier && n == v) {
                        is_peak = false;
                        break 'window;
                    }
                }
            }
            if is_peak {
                out.push((x, y, v as f64));
            }
        }
    }
    out
}

/// Sub-pixel position of an integer peak by per-axis quadratic fit.
pub fn refine_peak(map: &ScalarField, x: usize, y: usize) -> Point2 {
    let c = map.get(x, y) as f64;
    let dx = if x > 0 && x + 1 < map.width() {
        quadratic_offset(map.get(x - 1, y) as f64, c, map.get(x + 1, y) as f64)
    } else {
        0.0
    };
    let dy = if y > 0 && y + 1 < map.height() {
        quadratic_offset(map.get(x, y - 1) as f64, c, map.get(x, y + 1) as f64)
    } else {
        0.0
    };
    Point2::new(x as f64 + dx, y as f64 + dy)
}

fn channel_candidates(
    map: &ScalarField,
    kind: JointKind,
    occluded: bool,
    cfg: &AssocConfig,
) -> Vec<Candidate> {
    find_peaks(map, cfg.nms_threshold, cfg.nms_window)
        .into_iter()
        .map(|(x, y, score)| Candidate {
            kind,
            position: refine_peak(map, x, y),
            score,
            from_occluded_map: occluded,
        })
        .collect()
}

/// Extracts joint candidates from the visible heatmaps and, when enabled, the
/// occluded heatmaps. Occluded candidates within one grid pixel of a visible
/// candidate of the same kind are dropped.
pub fn extract_candidates(stack: &FieldStack, cfg: &AssocConfig) -> CandidateSet {
    let mut set = CandidateSet::new();
    for kind in JointKind::ALL {
        let visible = channel_candidates(&stack.visible[kind.index()], kind, false, cfg);
        let occluded = if cfg.use_occluded_candidates {
            channel_candidates(&stack.occluded[kind.index()], kind, true, cfg)
        } else {
            Vec::new()
        };
        let kept: Vec<Candidate> = occluded
            .into_iter()
            .filter(|o| {
                visible
                    .iter()
                    .all(|v| v.position.distance(o.position) > 1.0)
            })
            .collect();
        for c in visible.into_iter().chain(kept) {
            set.push(c);
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn gaussian_map(grid: Grid, centers: &[(f64, f64)], sigma: f64) -> ScalarField {
        let mut f = ScalarField::zeros(grid);
        for y in 0..grid.height as usize {
            for x in 0..grid.width as usize {
                let v = centers
                    .iter()
                    .map(|&(cx, cy)| {
                        let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                        (-d2 / (sigma * sigma)).exp()
                    })
                    .fold(0.0, f64::max);
                f.set(x, y, v as f32);
            }
        }
        f
    }

    fn stack_with(kind: JointKind, map: ScalarField, occluded: Option<ScalarField>) -> FieldStack {
        let grid = Grid::new(map.width() as u32, map.height() as u32, 8);
        let mut s = FieldStack::zeros(grid, 13, false);
        s.visible[kind.index()] = map;
        if let Some(o) = occluded {
            s.occluded[kind.index()] = o;
        }
        s
    }

    #[test]
    fn single_on_grid_peak() {
        let grid = Grid::new(30, 20, 8);
        let s = stack_with(
            JointKind::Neck,
            gaussian_map(grid, &[(12.0, 7.0)], 1.5),
            None,
        );
        let set = extract_candidates(&s, &AssocConfig::default());
        assert_eq!(set.len(), 1);
        let c = set.of(JointKind::Neck)[0];
        assert_eq!(c.position, Point2::new(12.0, 7.0));
        assert_eq!(c.score, 1.0);
        assert!(!c.from_occluded_map);
    }

    #[test]
    fn zero_map_has_no_candidates() {
        let s = FieldStack::zeros(Grid::new(10, 10, 8), 13, false);
        assert!(extract_candidates(&s, &AssocConfig::default()).is_empty());
    }

    #[test]
    fn two_peaks_ten_pixels_apart_match_brute_force() {
        let grid = Grid::new(30, 20, 8);
        let map = gaussian_map(grid, &[(8.0, 10.0), (18.0, 10.0)], 1.0);
        // Brute-force oracle: every pixel above threshold that is >= all 8
        // neighbours.
        let mut oracle = Vec::new();
        for y in 1..19 {
            for x in 1..29 {
                let v = map.get(x, y);
                if v as f64 <= 0.1 {
                    continue;
                }
                let mut best = true;
                for (dx, dy) in [
                    (-1i32, -1i32),
                    (0, -1),
                    (1, -1),
                    (-1, 0),
                    (1, 0),
                    (-1, 1),
                    (0, 1),
                    (1, 1),
                ] {
                    if map.get((x as i32 + dx) as usize, (y as i32 + dy) as usize) >= v {
                        best = false;
                    }
                }
                if best {
                    oracle.push((x, y));
                }
            }
        }
        assert_eq!(oracle, vec![(8, 10), (18, 10)]);
        let s = stack_with(JointKind::LAnkle, map, None);
        let got: Vec<Point2> = extract_candidates(&s, &AssocConfig::default())
            .of(JointKind::LAnkle)
            .iter()
            .map(|c| c.position)
            .collect();
        assert_eq!(got, vec![Point2::new(8.0, 10.0), Point2::new(18.0, 10.0)]);
    }

    #[test]
    fn plateau_keeps_first_pixel_in_scan_order() {
        let grid = Grid::new(6, 6, 8);
        let mut map = ScalarField::zeros(grid);
        map.set(2, 2, 0.7);
        map.set(3, 2, 0.7);
        map.set(2, 3, 0.7);
        let peaks = find_peaks(&map, 0.1, 3);
        assert_eq!(peaks, vec![(2, 2, 0.7f32 as f64)]);
    }

    #[test]
    fn subpixel_refinement_moves_toward_true_center() {
        let grid = Grid::new(30, 20, 8);
        let map = gaussian_map(grid, &[(12.3, 7.8)], 1.8);
        let s = stack_with(JointKind::RHip, map, None);
        let c = extract_candidates(&s, &AssocConfig::default()).of(JointKind::RHip)[0];
        assert!(
            c.position.distance(Point2::new(12.3, 7.8)) < 0.1,
            "{:?}",
            c.position
        );
    }

    #[test]
    fn visible_suppresses_nearby_occluded_candidate() {
        let grid = Grid::new(30, 20, 8);
        let vis = gaussian_map(grid, &[(10.0, 10.0)], 1.0);
        let occ = gaussian_map(grid, &[(10.0, 11.0), (20.0, 5.0)], 1.0);
        let s = stack_with(JointKind::RKnee, vis, Some(occ));
        let set = extract_candidates(&s, &AssocConfig::default());
        let got = set.of(JointKind::RKnee);
        assert_eq!(got.len(), 2);
        assert!(!got[0].from_occluded_map);
        assert!(got[1].from_occluded_map);
        assert_eq!(got[1].position, Point2::new(20.0, 5.0));

        let cfg = AssocConfig {
            use_occluded_candidates: false,
            ..Default::default()
        };
        assert_eq!(extract_candidates(&s, &cfg).len(), 1);
    }
}
