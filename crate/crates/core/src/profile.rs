// SPDX-License-Identifier: Apache-2.0

//! Normalized cavity field-intensity profiles |E(r)|²/|E_max|².
//!
//! Two sources are supported: an analytic separable surrogate of the
//! nanobeam fundamental mode, and a rectilinear grid imported from an
//! external field solver. Both expose midpoint-quadrature cells over the
//! dielectric, which is all the ensemble averaging needs.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{invalid, require_positive, Error, Result};
use crate::numeric::pairwise_sum;

/// Default transverse 1/e² radius of the surrogate, m. Chosen so that the
/// transverse intensity averaged over a 780 nm equilateral cross-section is
/// 0.45.
pub const SURROGATE_WAIST: f64 = 311.3e-9;
/// Side of the equilateral nanobeam cross-section, m.
pub const NANOBEAM_SIDE: f64 = 780e-9;
/// Period of the cos² standing wave along the beam, m.
pub const SURROGATE_PERIOD: f64 = 245e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossSection {
    /// Equilateral triangle with its centroid on the beam axis, flat side
    /// at the bottom.
    Triangle { side: f64 },
    /// Axis-aligned rectangle centered on the beam axis.
    Rectangle { width: f64, height: f64 },
}

impl CrossSection {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            CrossSection::Triangle { side } => {
                let h = side * 3f64.sqrt() / 2.0;
                (-side / 2.0, side / 2.0, -h / 3.0, 2.0 * h / 3.0)
            }
            CrossSection::Rectangle { width, height } => {
                (-width / 2.0, width / 2.0, -height / 2.0, height / 2.0)
            }
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            CrossSection::Triangle { side } => {
                let h = side * 3f64.sqrt() / 2.0;
                y >= -h / 3.0 && y <= 2.0 * h / 3.0 - 3f64.sqrt() * x.abs()
            }
            CrossSection::Rectangle { width, height } => {
                x.abs() <= width / 2.0 && y.abs() <= height / 2.0
            }
        }
    }
}

/// |E|² = cos²(πz/a) · exp(−2x²/w_x²) · exp(−2y²/w_y²), truncated to the
/// beam cross-section and to `length` along z (centered on z = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateProfile {
    pub longitudinal_period: f64,
    /// `None` means a flat transverse profile.
    pub waist_x: Option<f64>,
    pub waist_y: Option<f64>,
    pub cross_section: CrossSection,
    pub length: f64,
    /// Quadrature cells across the bounding box in x and in y.
    pub transverse_cells: usize,
    /// Quadrature cells per longitudinal period.
    pub cells_per_period: usize,
}

impl SurrogateProfile {
    /// Surrogate for the fundamental TE mode of the triangular nanobeam.
    pub fn nanobeam() -> Self {
        Self {
            longitudinal_period: SURROGATE_PERIOD,
            waist_x: Some(SURROGATE_WAIST),
            waist_y: Some(SURROGATE_WAIST),
            cross_section: CrossSection::Triangle {
                side: NANOBEAM_SIDE,
            },
            length: 20.0 * SURROGATE_PERIOD,
            transverse_cells: 160,
            cells_per_period: 32,
        }
    }

    fn validate(&self) -> Result<()> {
        require_positive("longitudinal_period", self.longitudinal_period)?;
        require_positive("length", self.length)?;
        if let Some(w) = self.waist_x {
            require_positive("waist_x", w)?;
        }
        if let Some(w) = self.waist_y {
            require_positive("waist_y", w)?;
        }
        match self.cross_section {
            CrossSection::Triangle { side } => require_positive("side", side)?,
            CrossSection::Rectangle { width, height } => {
                require_positive("width", width)?;
                require_positive("height", height)?;
            }
        }
        if self.transverse_cells == 0 || self.cells_per_period == 0 {
            return Err(Error::Degenerate(
                "surrogate quadrature has no cells".into(),
            ));
        }
        Ok(())
    }

    fn value(&self, x: f64, y: f64, z: f64) -> f64 {
        let gx = self.waist_x.map_or(1.0, |w| (-2.0 * x * x / (w * w)).exp());
        let gy = self.waist_y.map_or(1.0, |w| (-2.0 * y * y / (w * w)).exp());
        (PI * z / self.longitudinal_period).cos().powi(2) * gx * gy
    }
}

/// Intensity samples on a uniform rectilinear mesh, x-fastest ordering.
/// The mesh occupies `[0, nx·dx) × [0, ny·dy) × [0, nz·dz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProfile {
    pub dims: [usize; 3],
    /// Cell sizes, m.
    pub spacing: [f64; 3],
    values: Vec<f64>,
}

impl GridProfile {
    /// Builds a grid and normalizes it so that the maximum is exactly 1.
    pub fn new(dims: [usize; 3], spacing: [f64; 3], values: Vec<f64>) -> Result<Self> {
        let n = dims.iter().product::<usize>();
        if n == 0 {
            return Err(Error::Degenerate("grid has zero cells".into()));
        }
        if values.len() != n {
            return Err(Error::Degenerate(format!(
                "grid expects {n} values, got {}",
                values.len()
            )));
        }
        for (name, s) in ["dx", "dy", "dz"].into_iter().zip(spacing) {
            require_positive(name, s)?;
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(invalid(
                "intensity",
                format!("must be finite and >= 0, got {bad}"),
            ));
        }
        let max = values.iter().cloned().fold(0.0, f64::max);
        if max <= 0.0 {
            return Err(Error::Degenerate(
                "grid intensity is identically zero".into(),
            ));
        }
        let values = values.into_iter().map(|v| v / max).collect();
        Ok(Self {
            dims,
            spacing,
            values,
        })
    }

    /// Parses the plain-text exchange format: a header `nx ny nz dx dy dz`
    /// (cell sizes in nm) followed by `nx·ny·nz` intensities, x fastest.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            reason: "missing header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                line: hline,
                reason: format!(
                    "header needs 6 fields `nx ny nz dx dy dz`, got {}",
                    fields.len()
                ),
            });
        }
        let mut dims = [0usize; 3];
        for (d, f) in dims.iter_mut().zip(&fields[..3]) {
            *d = f.parse().map_err(|_| Error::Parse {
                line: hline,
                reason: format!("bad count `{f}`"),
            })?;
        }
        let mut spacing = [0.0; 3];
        for (s, f) in spacing.iter_mut().zip(&fields[3..]) {
            let nm: f64 = f.parse().map_err(|_| Error::Parse {
                line: hline,
                reason: format!("bad cell size `{f}`"),
            })?;
            *s = nm * 1e-9;
        }
        let mut values = Vec::with_capacity(dims.iter().product());
        for (ln, line) in lines {
            for tok in line.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: ln,
                    reason: format!("bad intensity `{tok}`"),
                })?);
            }
        }
        Self::new(dims, spacing, values)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            reason: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }
}

/// Normalized intensity profile of the cavity mode.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeProfile {
    AnalyticSurrogate(SurrogateProfile),
    Grid(GridProfile),
}

/// One quadrature cell: midpoint position (m), volume (m³), intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub position: [f64; 3],
    pub volume: f64,
    pub intensity: f64,
}

impl ModeProfile {
    /// Normalized intensity at `position` (m).
    pub fn intensity_at(&self, position: [f64; 3]) -> Result<f64> {
        let [x, y, z] = position;
        let outside = Error::OutsideDomain { x, y, z };
        match self {
            ModeProfile::AnalyticSurrogate(s) => {
                if !(s.cross_section.contains(x, y) && z.abs() <= s.length / 2.0) {
                    return Err(outside);
                }
                Ok(s.value(x, y, z))
            }
            ModeProfile::Grid(g) => {
                let mut idx = [0usize; 3];
                for a in 0..3 {
                    let f = position[a] / g.spacing[a];
                    if !(f >= 0.0 && f < g.dims[a] as f64) {
                        return Err(outside);
                    }
                    idx[a] = f as usize;
                }
                Ok(g.values[g.index(idx[0], idx[1], idx[2])])
            }
        }
    }

    /// A position where the intensity equals 1.
    pub fn antinode(&self) -> [f64; 3] {
        match self {
            ModeProfile::AnalyticSurrogate(_) => [0.0, 0.0, 0.0],
            ModeProfile::Grid(g) => {
                let (best, _) = g
                    .values
                    .iter()
                    .enumerate()
                    .fold(
                        (0, f64::MIN),
                        |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
                    );
                let i = best % g.dims[0];
                let j = (best / g.dims[0]) % g.dims[1];
                let k = best / (g.dims[0] * g.dims[1]);
                [
                    (i as f64 + 0.5) * g.spacing[0],
                    (j as f64 + 0.5) * g.spacing[1],
                    (k as f64 + 0.5) * g.spacing[2],
                ]
            }
        }
    }

    /// Midpoint-quadrature cells covering the dielectric region.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        match self {
            ModeProfile::AnalyticSurrogate(s) => {
                s.validate()?;
                let (x0, x1, y0, y1) = s.cross_section.bounds();
                let n = s.transverse_cells;
                let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
                let periods = s.length / s.longitudinal_period;
                let nz = ((periods * s.cells_per_period as f64).round() as usize).max(1);
                let hz = s.length / nz as f64;
                let transverse: Vec<(f64, f64)> = (0..n * n)
                    .map(|c| {
                        (
                            x0 + (c % n) as f64 * hx + hx / 2.0,
                            y0 + (c / n) as f64 * hy + hy / 2.0,
                        )
                    })
                    .filter(|&(x, y)| s.cross_section.contains(x, y))
                    .collect();
                if transverse.is_empty() {
                    return Err(Error::Degenerate("cross-section contains no cells".into()));
                }
                let vol = hx * hy * hz;
                Ok((0..nz)
                    .flat_map(|k| {
                        let z = -s.length / 2.0 + (k as f64 + 0.5) * hz;
                        transverse.iter().map(move |&(x, y)| Cell {
                            position: [x, y, z],
                            volume: vol,
                            intensity: s.value(x, y, z),
                        })
                    })
                    .collect())
            }
            ModeProfile::Grid(g) => {
                let vol = g.spacing.iter().product::<f64>();
                let [nx, ny, _] = g.dims;
                Ok(g.values
                    .iter()
                    .enumerate()
                    .map(|(idx, &v)| {
                        let (i, j, k) = (idx % nx, (idx / nx) % ny, idx / (nx * ny));
                        Cell {
                            position: [
                                (i as f64 + 0.5) * g.spacing[0],
                                (j as f64 + 0.5) * g.spacing[1],
                                (k as f64 + 0.5) * g.spacing[2],
                            ],
                            volume: vol,
                            intensity: v,
                        }
                    })
                    .collect())
            }
        }
    }

    /// Volume-weighted mean of `f(cell)` over the dielectric. Cells are
    /// evaluated in parallel; the reduction is pairwise in cell order.
    pub fn volume_average<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&Cell) -> f64 + Sync,
    {
        let cells = self.cells()?;
        let weighted: Vec<f64> = cells.par_iter().map(|c| f(c) * c.volume).collect();
        let volumes: Vec<f64> = cells.iter().map(|c| c.volume).collect();
        let total = pairwise_sum(&volumes);
        if !(total > 0.0) {
            return Err(Error::Degenerate("profile has zero volume".into()));
        }
        Ok(pairwise_sum(&weighted) / total)
    }
}
