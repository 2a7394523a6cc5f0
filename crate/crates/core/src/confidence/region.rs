use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{critical_value, CltSystem, Mode};
use crate::error::{Error, Result};
use crate::estimators::{Design, Equations};
use crate::popcore::{AgeCell, Interval, IntervalUnion, PopAgeCell, RateModel};
use crate::sim::fmt17;
use crate::sim::EventLog;

/// Grid over which a 2-D region is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// Cells per axis.
    pub resolution: usize,
    /// Explicit `[(lo, hi); 2]`; by default the estimate ± `span_se` standard errors.
    pub bounds: Option<[(f64, f64); 2]>,
    pub span_se: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            resolution: 200,
            bounds: None,
            span_se: 6.0,
        }
    }
}

impl Grid {
    pub const MIN_RESOLUTION: usize = 50;

    pub fn with_resolution(resolution: usize) -> Self {
        Self {
            resolution,
            ..Self::default()
        }
    }
}

/// A confidence region as a boolean mask over a rectangular grid. Cell
/// `(i, j)` covers `[lo_0 + i Δ_0, lo_0 + (i+1) Δ_0) × [lo_1 + j Δ_1, …)` and is
/// feasible iff the defining inequalities hold at its centre.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfRegion2D {
    pub names: [String; 2],
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub resolution: usize,
    /// Row-major: index `j * resolution + i`, `i` along the first parameter.
    pub mask: Vec<bool>,
    pub level: f64,
    pub mode: Mode,
    pub estimate: [f64; 2],
}

impl ConfRegion2D {
    pub fn step(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.resolution as f64
    }

    pub fn centre(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.lower[0] + (i as f64 + 0.5) * self.step(0),
            self.lower[1] + (j as f64 + 0.5) * self.step(1),
        ]
    }

    pub fn cell_of(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let idx = |axis: usize| {
            let u = (p[axis] - self.lower[axis]) / self.step(axis);
            (u >= 0.0 && u < self.resolution as f64).then_some(u as usize)
        };
        Some((idx(0)?, idx(1)?))
    }

    pub fn feasible(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.resolution + i]
    }

    /// Whether `p` falls in a feasible cell.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.cell_of(p).is_some_and(|(i, j)| self.feasible(i, j))
    }

    pub fn feasible_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Feasible cells form one contiguous run along every grid row and column.
    pub fn is_convex_along_grid_lines(&self) -> bool {
        let n = self.resolution;
        let contiguous = |cells: &mut dyn Iterator<Item = bool>| {
            let mut runs = 0;
            let mut prev = false;
            for b in cells {
                if b && !prev {
                    runs += 1;
                }
                prev = b;
            }
            runs <= 1
        };
        (0..n).all(|j| contiguous(&mut (0..n).map(|i| self.feasible(i, j))))
            && (0..n).all(|i| contiguous(&mut (0..n).map(|j| self.feasible(i, j))))
    }

    /// One row per cell: `<name1>,<name2>,feasible`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([self.names[0].as_str(), self.names[1].as_str(), "feasible"])?;
        for j in 0..self.resolution {
            for i in 0..self.resolution {
                let [x, y] = self.centre(i, j);
                let flag = if self.feasible(i, j) { "1" } else { "0" };
                w.write_record([fmt17(x), fmt17(y), flag.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

impl CltSystem {
    /// Grid feasibility region for a two-parameter system.
    pub fn region(&self, c: f64, level: f64, mode: Mode, grid: &Grid) -> Result<ConfRegion2D> {
        if self.system.dim() != 2 {
            return Err(Error::InvalidInput(format!(
                "regions need two parameters, got {}",
                self.system.dim()
            )));
        }
        if grid.resolution < Grid::MIN_RESOLUTION {
            return Err(Error::Resolution(format!(
                "grid resolution {} is below {}",
                grid.resolution,
                Grid::MIN_RESOLUTION
            )));
        }
        let est = [self.estimate[0], self.estimate[1]];
        let bounds = match grid.bounds {
            Some(b) => b,
            None => {
                let se = self.standard_errors().ok_or(Error::Singular {
                    condition: f64::INFINITY,
                })?;
                let mut b = [(0.0, 0.0); 2];
                for axis in 0..2 {
                    let mut half = grid.span_se * se[axis];
                    if !(half.is_finite() && half > 0.0) {
                        half = 1e-3 * est[axis].abs().max(1.0);
                    }
                    b[axis] = (est[axis] - half, est[axis] + half);
                }
                b
            }
        };
        let n = grid.resolution;
        let mut region = ConfRegion2D {
            names: [self.system.labels[0].clone(), self.system.labels[1].clone()],
            lower: [bounds[0].0, bounds[1].0],
            upper: [bounds[0].1, bounds[1].1],
            resolution: n,
            mask: vec![false; n * n],
            level,
            mode,
            estimate: est,
        };
        let Some((ei, ej)) = region.cell_of(est) else {
            return Err(Error::Resolution(format!(
                "grid {:?} x {:?} does not contain the estimate {est:?}",
                bounds[0], bounds[1]
            )));
        };
        for j in 0..n {
            for i in 0..n {
                let p = region.centre(i, j);
                region.mask[j * n + i] = self.feasible(&p, c, mode);
            }
        }
        // the estimate solves the system exactly, so its cell always belongs
        region.mask[ej * n + ei] = true;
        Ok(region)
    }
}

/// Regions for the death and birth parameters of any two-cell family.
pub fn region(
    log: &EventLog,
    model: &RateModel,
    alpha: f64,
    mode: Mode,
    grid: &Grid,
) -> Result<(ConfRegion2D, ConfRegion2D)> {
    let c = critical_value(alpha)?;
    let design = Design::of(model)?;
    let eq = Equations::assemble(log, &design)?;
    let sol = eq.solve()?;
    let level = 1.0 - alpha;
    Ok((
        CltSystem::death(&eq, &sol)?.region(c, level, mode, grid)?,
        CltSystem::birth(&eq, &sol)?.region(c, level, mode, grid)?,
    ))
}

fn two_cells(cells: &[Interval]) -> Result<()> {
    if cells.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "regions need exactly two cells, got {}",
            cells.len()
        )));
    }
    Ok(())
}

/// Regions for `(h₁, h₂)` and `(b₁, b₂)`.
pub fn region_agedep(
    log: &EventLog,
    cells: &[Interval],
    alpha: f64,
    mode: Mode,
    grid: &Grid,
) -> Result<(ConfRegion2D, ConfRegion2D)> {
    two_cells(cells)?;
    let model = RateModel::AgePiecewise {
        cells: cells
            .iter()
            .map(|&interval| AgeCell {
                interval,
                h: 0.0,
                b: 0.0,
            })
            .collect(),
    };
    region(log, &model, alpha, mode, grid)
}

/// Regions for `(α₁, α₂)` and `(γ₁, γ₂)`.
pub fn region_popage(
    log: &EventLog,
    j: &IntervalUnion,
    cells: &[Interval],
    alpha: f64,
    mode: Mode,
    grid: &Grid,
) -> Result<(ConfRegion2D, ConfRegion2D)> {
    two_cells(cells)?;
    let model = RateModel::PopAgePiecewise {
        j: j.clone(),
        cells: cells
            .iter()
            .map(|&interval| PopAgeCell {
                interval,
                alpha: 0.0,
                gamma: 0.0,
            })
            .collect(),
    };
    region(log, &model, alpha, mode, grid)
}
