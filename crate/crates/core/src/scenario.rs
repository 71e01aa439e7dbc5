//! Assembly of a runnable scenario from a validated configuration.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Config, FuelConfig, InitialConfig, Mode, OutputConfig, TerrainConfig};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, VectorField};
use crate::integrate::{AdrSystem, FieldState, SchemeConfig};
use crate::physics::{bulk_velocity, AdvectionParameters};

/// Everything a run needs, resolved onto the grid.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: Config,
    pub grid: Grid,
    pub system: AdrSystem,
    pub scheme: SchemeConfig,
    pub terrain: Option<Field>,
    pub t0: Field,
    pub y0: Field,
    pub end_time: f64,
    pub output: OutputConfig,
    pub mode: Mode,
}

impl Scenario {
    pub fn initial_state(&self) -> Result<FieldState> {
        let mut s = FieldState::new(
            self.t0.clone(),
            self.y0.clone(),
            self.system.combustion.needs_memory(),
        )?;
        self.system.fill_ghosts(&mut s);
        Ok(s)
    }

    /// Isotherm used for front tracking, if any.
    pub fn front_threshold(&self) -> Option<f64> {
        let p = &self.system.params;
        match self.output.front_threshold {
            Some(t) => Some(t),
            None if p.t_bar > p.t_inf => Some(p.t_bar),
            None => None,
        }
    }
}

pub fn build_scenario(cfg: &Config) -> Result<Scenario> {
    cfg.validate()?;
    let gc = &cfg.grid;
    let grid = if gc.dim == 1 {
        Grid::new_1d(gc.nx, gc.dx, gc.x0)
    } else {
        Grid::new_2d(gc.nx, gc.ny, gc.dx, gc.dy, gc.x0, gc.y0)
    }
    .map_err(|e| Error::config("grid", e.to_string()))?;

    let p = cfg.params;
    let mut system = AdrSystem::new(p, cfg.combustion);
    system.bc = cfg.boundaries;
    system.moisture = cfg.moisture;

    let adv = &cfg.advection;
    let mut terrain = None;
    if let Some(d) = &adv.direct {
        system.velocity = Some(VectorField::uniform(grid, d.velocity));
    } else if let Some(tp) = &adv.two_phase {
        let v = bulk_velocity(tp.wind, &tp.phases())
            .map_err(|e| Error::config("advection.two_phase", e.to_string()))?;
        system.velocity = Some(VectorField::uniform(grid, v));
    } else if let Some(vw) = &adv.virtual_wind {
        let z = terrain_field(grid, &vw.terrain)?;
        let ap = AdvectionParameters {
            wind: VectorField::uniform(grid, vw.wind),
            beta: vw.beta,
            gamma: vw.gamma,
            terrain: z.clone(),
        };
        system.velocity = Some(ap.velocity());
        terrain = Some(z);
    }

    let t0 = initial_temperature(grid, cfg)?;
    let y0 = fuel_field(grid, &cfg.fuel)?;
    if let Some((i, j)) = t0.first_non_finite() {
        return Err(Error::config(
            "initial",
            format!("non-finite temperature at cell ({i}, {j})"),
        ));
    }
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (ii, jj) = (i as isize, j as isize);
            if t0.get(ii, jj) < p.t_inf {
                return Err(Error::config(
                    "initial",
                    format!("initial temperature below ambient at cell ({i}, {j})"),
                ));
            }
            let y = y0.get(ii, jj);
            if !(y > 0.0 && y <= 1.0) {
                return Err(Error::config(
                    "fuel",
                    format!("fuel fraction {y} outside (0, 1] at cell ({i}, {j})"),
                ));
            }
        }
    }

    Ok(Scenario {
        config: cfg.clone(),
        grid,
        system,
        scheme: cfg.scheme,
        terrain,
        t0,
        y0,
        end_time: cfg.end_time,
        output: cfg.output,
        mode: cfg.mode,
    })
}

fn terrain_field(grid: Grid, t: &TerrainConfig) -> Result<Field> {
    Ok(match *t {
        TerrainConfig::Flat => Field::new(grid, 0.0),
        TerrainConfig::Plane { slope } => Field::from_fn(grid, |x, y| slope[0] * x + slope[1] * y),
        TerrainConfig::Hill {
            center,
            height,
            width,
        } => {
            if !(width > 0.0) {
                return Err(Error::config(
                    "advection.virtual_wind.terrain.width",
                    "must be positive",
                ));
            }
            Field::from_fn(grid, |x, y| {
                let r2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
                height * (-r2 / (width * width)).exp()
            })
        }
    })
}

fn initial_temperature(grid: Grid, cfg: &Config) -> Result<Field> {
    let t_inf = cfg.params.t_inf;
    let dim2 = grid.dim == 2;
    let (mut t, noise) = match cfg.initial {
        InitialConfig::HotStrip {
            x,
            y,
            temperature,
            noise,
        } => {
            let f = Field::from_fn(grid, |px, py| {
                let in_x = px >= x[0] && px <= x[1];
                let in_y = match (dim2, y) {
                    (true, Some(y)) => py >= y[0] && py <= y[1],
                    _ => true,
                };
                if in_x && in_y {
                    temperature
                } else {
                    t_inf
                }
            });
            (f, noise)
        }
        InitialConfig::HotSpotGaussian {
            center,
            radius,
            peak,
            noise,
        } => {
            if !(radius > 0.0) {
                return Err(Error::config("initial.radius", "must be positive"));
            }
            let f = Field::from_fn(grid, |px, py| {
                let dy = if dim2 { py - center[1] } else { 0.0 };
                let r2 = (px - center[0]).powi(2) + dy * dy;
                t_inf + (peak - t_inf) * (-r2 / (radius * radius)).exp()
            });
            (f, noise)
        }
        InitialConfig::UniformUnit => (Field::new(grid, 1.0), 0.0),
    };
    if noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for j in 0..grid.ny as isize {
            for i in 0..grid.nx as isize {
                let v = t.get(i, j) + noise * rng.gen::<f64>();
                t.set(i, j, v);
            }
        }
    }
    Ok(t)
}

fn fuel_field(grid: Grid, f: &FuelConfig) -> Result<Field> {
    match f {
        FuelConfig::Uniform { value } => Ok(Field::new(grid, *value)),
        FuelConfig::Raster { path } => read_raster(grid, path),
    }
}

/// CSV raster with `ny` rows of `nx` values; the first row is `j = 0`.
pub fn read_raster(grid: Grid, path: &Path) -> Result<Field> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("fuel.path", format!("{}: {e}", path.display())))?;
    let mut values = Vec::with_capacity(grid.cell_count());
    let mut rows = 0;
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let before = values.len();
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                line: n + 1,
                column: 0,
                message: format!("`{}` is not a number", cell.trim()),
            })?;
            values.push(v);
        }
        if values.len() - before != grid.nx {
            return Err(Error::config(
                "fuel.path",
                format!(
                    "row {} has {} values, expected {}",
                    n + 1,
                    values.len() - before,
                    grid.nx
                ),
            ));
        }
    }
    if rows != grid.ny {
        return Err(Error::config(
            "fuel.path",
            format!("{rows} rows, expected {}", grid.ny),
        ));
    }
    let mut field = Field::from_interior(grid, &values)?;
    crate::grid::fill_ghosts(&mut field, &crate::grid::Boundaries::neumann(), 0.0);
    Ok(field)
}
