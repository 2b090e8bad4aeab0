//! Morphogen concentration grids and pattern extraction.
//!
//! Two input fields are built per waypoint from scenario geometry, each an
//! exponential gradient in the exact Euclidean distance to the nearest source:
//! `x1 = exp(-d_target / lambda_t)` and `x2 = exp(-d_obstacle / lambda_o)`
//! (all zeros when there are no obstacles). Both are 1 at a source and decay
//! monotonically with distance.
//!
//! A GRN tree maps the two inputs to an output concentration per cell.
//! Terminals sense morphogen *depletion*: a terminal reads `1 - x` of its
//! channel, so gene expression responds to the absence of the morphogen and
//! falls off approaching sources. This is what makes inhibitory gates suppress
//! expression near obstacles while keeping a bounded expression band around
//! each target.
//!
//! The swarm pattern at a waypoint is extracted in two stages:
//! 1. the iso-region: non-obstacle cells whose output is at least `tau` times
//!    the eligible maximum ([`extract_pattern`]);
//! 2. its band: iso-region cells with an in-grid 4-neighbor outside the
//!    region ([`extract_pattern_band`]). Grid borders count as interior, so a
//!    region reaching the border contributes no band cells there.
//!
//! Robots occupy the band (the pattern's circumference), which is also what
//! the fitness penalty and the robot-count estimate measure.
//!
//! Field construction and tree evaluation parallelize per cell (rayon);
//! results are identical regardless of thread count since every cell is a
//! pure function of the inputs and reductions (max scans) run sequentially.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::genome::GrnTree;
use crate::geom::{nearest_obstacle_distance, Obstacle, Point};
use crate::{Error, Result};

/// Uniform grid over a rectangular region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// World coordinates of the region's lower-left corner.
    #[serde(default)]
    pub origin: Point,
    /// Region extent in meters.
    pub width: f64,
    /// Region extent in meters.
    pub height: f64,
    /// Cell size in meters; must divide both extents.
    pub resolution: f64,
}

impl GridSpec {
    /// A grid at origin (0, 0). Fails unless `resolution` divides both extents
    /// to within 1e-6 cells.
    pub fn new(width: f64, height: f64, resolution: f64) -> Result<Self> {
        let spec = Self { origin: (0.0, 0.0), width, height, resolution };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0 && self.width > 0.0 && self.height > 0.0) {
            return Err(Error::Grid(format!(
                "extents and resolution must be positive, got {} x {} at {}",
                self.width, self.height, self.resolution
            )));
        }
        for (name, extent) in [("width", self.width), ("height", self.height)] {
            let cells = extent / self.resolution;
            if (cells - cells.round()).abs() > 1e-6 {
                return Err(Error::Grid(format!(
                    "{name} {extent} is not a whole number of {} m cells",
                    self.resolution
                )));
            }
        }
        Ok(())
    }

    /// Cells along x.
    pub fn nx(&self) -> usize {
        (self.width / self.resolution).round() as usize
    }

    /// Cells along y.
    pub fn ny(&self) -> usize {
        (self.height / self.resolution).round() as usize
    }

    /// Total cell count.
    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// World coordinates of a cell center.
    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        (
            self.origin.0 + (ix as f64 + 0.5) * self.resolution,
            self.origin.1 + (iy as f64 + 0.5) * self.resolution,
        )
    }

    /// Whether a world point lies inside the region.
    pub fn contains(&self, p: Point) -> bool {
        p.0 >= self.origin.0
            && p.0 <= self.origin.0 + self.width
            && p.1 >= self.origin.1
            && p.1 <= self.origin.1 + self.height
    }

    /// Row-major index of cell (ix, iy).
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx() + ix
    }
}

/// A scalar concentration field over a grid, row-major.
///
/// Input morphogen fields lie in [0, 1]; GRN output fields may leave that
/// range slightly because the XOR/XNOR responses are unclamped.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphogenField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl MorphogenField {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.spec.index(ix, iy)]
    }
}

/// Free constants of field construction and pattern extraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    /// Target gradient decay length (m).
    pub lambda_t: f64,
    /// Obstacle gradient decay length (m); the default matches the minimum
    /// allowed obstacle clearance, so obstacle influence spans exactly the
    /// forbidden band.
    pub lambda_o: f64,
    /// Candidate threshold as a fraction of the eligible field maximum.
    pub tau: f64,
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_t > 0.0 && self.lambda_o > 0.0) {
            return Err(Error::Config("decay lengths must be positive".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("tau {} outside (0, 1)", self.tau)));
        }
        Ok(())
    }
}

impl Default for FieldConfig {
    /// Values calibrated so the bundled demo model forms an annulus inside the
    /// allowed [1, 2] m distance band around an isolated target.
    fn default() -> Self {
        Self { lambda_t: 1.5, lambda_o: 2.0, tau: 0.95 }
    }
}

fn cell_points(spec: &GridSpec) -> impl ParallelIterator<Item = (usize, Point)> + '_ {
    let nx = spec.nx();
    (0..spec.len()).into_par_iter().map(move |i| {
        let (ix, iy) = (i % nx, i / nx);
        (i, spec.cell_center(ix, iy))
    })
}

/// Target morphogen field: `exp(-d / lambda_t)` with `d` the exact distance to
/// the nearest target; exactly 1 at a target cell.
pub fn build_target_field(
    targets: &[Point],
    spec: &GridSpec,
    cfg: &FieldConfig,
) -> Result<MorphogenField> {
    cfg.validate()?;
    spec.validate()?;
    if targets.is_empty() {
        return Err(Error::NoTargets);
    }
    if let Some(t) = targets.iter().find(|t| !spec.contains(**t)) {
        return Err(Error::Scenario(format!("target ({}, {}) outside region", t.0, t.1)));
    }
    let values = cell_points(spec)
        .map(|(_, p)| {
            let d = targets
                .iter()
                .map(|t| crate::geom::dist(p, *t))
                .fold(f64::INFINITY, f64::min);
            (-d / cfg.lambda_t).exp()
        })
        .collect();
    Ok(MorphogenField { spec: *spec, values })
}

/// Obstacle morphogen field: `exp(-d / lambda_o)` with `d` the exact distance
/// to the nearest obstacle (zero inside, so obstacle cells read 1); an
/// all-zero field when there are no obstacles.
pub fn build_obstacle_field(
    obstacles: &[Obstacle],
    spec: &GridSpec,
    cfg: &FieldConfig,
) -> Result<MorphogenField> {
    cfg.validate()?;
    spec.validate()?;
    if obstacles.is_empty() {
        return Ok(MorphogenField { spec: *spec, values: vec![0.0; spec.len()] });
    }
    let values = cell_points(spec)
        .map(|(_, p)| {
            let d = nearest_obstacle_distance(obstacles, p).expect("nonempty obstacles");
            (-d / cfg.lambda_o).exp()
        })
        .collect();
    Ok(MorphogenField { spec: *spec, values })
}

/// Per-cell mask of cells whose center lies inside an obstacle.
pub fn obstacle_mask(obstacles: &[Obstacle], spec: &GridSpec) -> Vec<bool> {
    let nx = spec.nx();
    (0..spec.len())
        .map(|i| {
            let p = spec.cell_center(i % nx, i / nx);
            obstacles.iter().any(|o| o.contains(p))
        })
        .collect()
}

/// Evaluates a GRN tree per cell: terminals read the depletion `1 - x1` /
/// `1 - x2` of their channel, internal motifs their children's steady states.
pub fn evaluate_tree_field(
    tree: &GrnTree,
    x1: &MorphogenField,
    x2: &MorphogenField,
) -> Result<MorphogenField> {
    if x1.spec != x2.spec {
        return Err(Error::Grid("input fields on different grids".into()));
    }
    let values = x1
        .values
        .par_iter()
        .zip(x2.values.par_iter())
        .map(|(&a, &b)| tree.eval(1.0 - a, 1.0 - b))
        .collect();
    Ok(MorphogenField { spec: x1.spec, values })
}

/// Candidate cells forming the swarm pattern at one waypoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    /// World coordinates of candidate cell centers, row-major order.
    pub points: Vec<Point>,
    /// Grid coordinates (ix, iy) matching `points`.
    pub cells: Vec<(usize, usize)>,
    /// Which trajectory waypoint produced the pattern.
    pub waypoint_index: usize,
}

impl Pattern {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Iso-region cells: the eligible (non-obstacle) superlevel set at
/// `tau * max`, where the maximum is taken over eligible cells. An empty
/// `mask` means no obstacles; otherwise it must match the grid.
fn iso_region(field: &MorphogenField, mask: &[bool], cfg: &FieldConfig) -> Result<Vec<bool>> {
    cfg.validate()?;
    if !mask.is_empty() && mask.len() != field.values.len() {
        return Err(Error::Grid(format!(
            "obstacle mask has {} cells, field {}",
            mask.len(),
            field.values.len()
        )));
    }
    let eligible = |i: usize| mask.is_empty() || !mask[i];
    let mut max = f64::NEG_INFINITY;
    for (i, &v) in field.values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        if eligible(i) && v > max {
            max = v;
        }
    }
    if max.is_nan() || max <= 0.0 {
        return Err(Error::DegeneratePattern);
    }
    let level = cfg.tau * max;
    Ok((0..field.values.len())
        .map(|i| eligible(i) && field.values[i] >= level)
        .collect())
}

fn collect_pattern(field: &MorphogenField, keep: impl Fn(usize) -> bool) -> Pattern {
    let nx = field.spec.nx();
    let mut points = Vec::new();
    let mut cells = Vec::new();
    for i in 0..field.values.len() {
        if keep(i) {
            let (ix, iy) = (i % nx, i / nx);
            cells.push((ix, iy));
            points.push(field.spec.cell_center(ix, iy));
        }
    }
    Pattern { points, cells, waypoint_index: 0 }
}

/// Extracts the full iso-region as a pattern (row-major cell order).
pub fn extract_pattern(
    field: &MorphogenField,
    mask: &[bool],
    cfg: &FieldConfig,
) -> Result<Pattern> {
    let region = iso_region(field, mask, cfg)?;
    Ok(collect_pattern(field, |i| region[i]))
}

/// Extracts the band of the iso-region: cells of the region with an in-grid
/// 4-neighbor outside it. This is the pattern the swarm occupies.
pub fn extract_pattern_band(
    field: &MorphogenField,
    mask: &[bool],
    cfg: &FieldConfig,
) -> Result<Pattern> {
    let region = iso_region(field, mask, cfg)?;
    let (nx, ny) = (field.spec.nx(), field.spec.ny());
    let on_band = |i: usize| {
        if !region[i] {
            return false;
        }
        let (ix, iy) = (i % nx, i / nx);
        (ix > 0 && !region[i - 1])
            || (ix + 1 < nx && !region[i + 1])
            || (iy > 0 && !region[i - nx])
            || (iy + 1 < ny && !region[i + nx])
    };
    Ok(collect_pattern(field, on_band))
}
