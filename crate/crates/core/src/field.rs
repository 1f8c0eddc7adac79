//! Dense field grids: heatmaps, affinity fields and the loss mask.

use crate::geometry::Point2;
use crate::model::NUM_JOINTS;
use crate::Error;

/// Default ratio between input-image pixels and field-grid pixels.
pub const DEFAULT_SCALE: u32 = 8;

/// Output resolution of the field maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub width: u32,
    pub height: u32,
    pub scale_factor: u32,
}

impl Grid {
    pub fn new(width: u32, height: u32, scale_factor: u32) -> Self {
        Grid {
            width,
            height,
            scale_factor,
        }
    }

    /// Grid for an image of `w`×`h` pixels; images whose sides are not a
    /// multiple of the scale are treated as zero-padded on the right/bottom.
    pub fn for_image(w: u32, h: u32) -> Self {
        Self::for_image_with_scale(w, h, DEFAULT_SCALE)
    }

    pub fn for_image_with_scale(w: u32, h: u32, scale_factor: u32) -> Self {
        Grid {
            width: w.div_ceil(scale_factor),
            height: h.div_ceil(scale_factor),
            scale_factor,
        }
    }

    /// Padded input size covered by this grid.
    pub fn padded_image_size(&self) -> (u32, u32) {
        (
            self.width * self.scale_factor,
            self.height * self.scale_factor,
        )
    }

    pub fn fits_image(&self, image_size: (u32, u32)) -> bool {
        *self == Self::for_image_with_scale(image_size.0, image_size.1, self.scale_factor)
    }

    pub fn len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_grid(&self, p: Point2) -> Point2 {
        p.scale(1.0 / self.scale_factor as f64)
    }

    pub fn to_image(&self, p: Point2) -> Point2 {
        p.scale(self.scale_factor as f64)
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= 0.0
            && p.y >= 0.0
            && p.x <= (self.width - 1) as f64
            && p.y <= (self.height - 1) as f64
    }
}

/// Single-channel row-major map.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self::filled(grid, 0.0)
    }

    pub fn filled(grid: Grid, value: f32) -> Self {
        ScalarField {
            width: grid.width as usize,
            height: grid.height as usize,
            data: vec![value; grid.len()],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f32>) -> Result<Self, Error> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {width}x{height} field",
                data.len()
            )));
        }
        Ok(ScalarField {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    fn at_signed(&self, x: i64, y: i64) -> f64 {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            0.0
        } else {
            self.get(x as usize, y as usize) as f64
        }
    }

    /// Bilinear interpolation; samples outside the grid read as zero.
    pub fn sample(&self, p: Point2) -> f64 {
        let x0 = p.x.floor();
        let y0 = p.y.floor();
        let fx = p.x - x0;
        let fy = p.y - y0;
        let (xi, yi) = (x0 as i64, y0 as i64);
        let top = self.at_signed(xi, yi) * (1.0 - fx) + self.at_signed(xi + 1, yi) * fx;
        let bottom = self.at_signed(xi, yi + 1) * (1.0 - fx) + self.at_signed(xi + 1, yi + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum()
    }

    fn same_shape(&self, other: &ScalarField) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Two-component vector map (x and y channels).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            x: ScalarField::zeros(grid),
            y: ScalarField::zeros(grid),
        }
    }

    /// Every grid point holds `v`.
    pub fn constant(grid: Grid, v: Point2) -> Self {
        VectorField {
            x: ScalarField::filled(grid, v.x as f32),
            y: ScalarField::filled(grid, v.y as f32),
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Point2 {
        Point2::new(self.x.get(x, y) as f64, self.y.get(x, y) as f64)
    }

    pub fn sample(&self, p: Point2) -> Point2 {
        Point2::new(self.x.sample(p), self.y.sample(p))
    }

    pub fn max_magnitude(&self) -> f64 {
        self.x
            .data()
            .iter()
            .zip(self.y.data())
            .map(|(&a, &b)| (a as f64).hypot(b as f64))
            .fold(0.0, f64::max)
    }
}

/// All dense maps for one processed frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldStack {
    pub grid: Grid,
    /// Visible-joint heatmaps, one per joint kind.
    pub visible: Vec<ScalarField>,
    /// Occluded and self-occluded joint heatmaps, one per joint kind.
    pub occluded: Vec<ScalarField>,
    /// Part affinity fields, one per limb.
    pub pafs: Vec<VectorField>,
    /// Temporal affinity fields linking to the previous processed frame,
    /// one per joint kind; `None` for single-frame stacks.
    pub tafs: Option<Vec<VectorField>>,
    pub mask: ScalarField,
}

impl FieldStack {
    /// All-zero stack with a unit mask.
    pub fn zeros(grid: Grid, num_limbs: usize, with_tafs: bool) -> Self {
        FieldStack {
            grid,
            visible: vec![ScalarField::zeros(grid); NUM_JOINTS],
            occluded: vec![ScalarField::zeros(grid); NUM_JOINTS],
            pafs: vec![VectorField::zeros(grid); num_limbs],
            tafs: with_tafs.then(|| vec![VectorField::zeros(grid); NUM_JOINTS]),
            mask: ScalarField::filled(grid, 1.0),
        }
    }

    /// Verifies channel counts, shared dimensions and value ranges.
    pub fn check(&self) -> Result<(), Error> {
        let reference = ScalarField::zeros(self.grid);
        let scalar = self
            .visible
            .iter()
            .chain(&self.occluded)
            .chain(std::iter::once(&self.mask));
        let vectors = self
            .pafs
            .iter()
            .chain(self.tafs.iter().flatten())
            .flat_map(|v| [&v.x, &v.y]);
        if !scalar.chain(vectors).all(|f| f.same_shape(&reference)) {
            return Err(Error::ShapeMismatch(
                "channel dimensions differ from grid".into(),
            ));
        }
        if self.visible.len() != NUM_JOINTS || self.occluded.len() != NUM_JOINTS {
            return Err(Error::ShapeMismatch(format!(
                "expected {NUM_JOINTS} visible and occluded heatmaps, found {} and {}",
                self.visible.len(),
                self.occluded.len()
            )));
        }
        if let Some(t) = &self.tafs {
            if t.len() != NUM_JOINTS {
                return Err(Error::ShapeMismatch(format!(
                    "expected {NUM_JOINTS} temporal fields, found {}",
                    t.len()
                )));
            }
        }
        let heat_ok = self
            .visible
            .iter()
            .chain(&self.occluded)
            .flat_map(|f| f.data())
            .all(|&v| (0.0..=1.0).contains(&v));
        if !heat_ok {
            return Err(Error::InvalidValue("heatmap value outside [0, 1]".into()));
        }
        if !self.mask.data().iter().all(|&v| v == 0.0 || v == 1.0) {
            return Err(Error::InvalidValue("mask value outside {0, 1}".into()));
        }
        let max_mag = self
            .pafs
            .iter()
            .chain(self.tafs.iter().flatten())
            .map(VectorField::max_magnitude)
            .fold(0.0, f64::max);
        if max_mag > 1.0 + 1e-6 {
            return Err(Error::InvalidValue(format!(
                "affinity vector magnitude {max_mag} exceeds 1"
            )));
        }
        Ok(())
    }
}
