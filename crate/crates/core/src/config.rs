//! Run configuration: a TOML document layered over a named built-in
//! scenario, with dotted `key=value` overrides applied last.
//!
//! Keys (units in brackets; lengths in m, times in s, temperatures in K):
//!
//! ```text
//! base            built-in scenario: "validation", "validation-2d", "reduced"
//! mode            "standard" | "reduced-weber"
//! end_time        [s]
//! seed            RNG seed for noisy initial temperatures
//! combustion      "arrhenius-heaviside" | "linearized-memory" | "constant-factor"
//! [grid]          dim, nx, ny, dx [m], dy [m], x0 [m], y0 [m]
//! [boundaries]    x_lo, x_hi, y_lo, y_hi: "dirichlet-ambient" | "neumann-zero-flux"
//! [params]        rho [kg/m³], c [J/(kg K)], k [W/(m K)], epsilon, delta [m],
//!                 sigma [W/(m² K⁴)], h [W/(m³ K)], t_inf, s [J/kg], a [1/s],
//!                 t_ac, t_bar, a_l [1/(K s)], psi_const [1/s]
//! [scheme]        spatial, temporal, cfl, fuel_update, dt_max [s]
//! [initial]       kind = "hot-strip"         x = [lo, hi], y = [lo, hi] (2D), temperature
//!                 kind = "hot-spot-gaussian" center = [x, y], radius [m], peak [K]
//!                 kind = "uniform-unit"
//!                 noise [K]: amplitude of seeded non-negative perturbation
//! [fuel]          kind = "uniform", value  |  kind = "raster", path (CSV, ny rows of nx)
//! [advection.direct]        velocity = [vx, vy] [m/s]
//! [advection.two_phase]     wind = [wx, wy], r_f, rho_a, rho_f, cp_a, cp_f
//! [advection.virtual_wind]  wind, beta, gamma, terrain = { kind = "flat" | "plane"
//!                           (slope = [sx, sy]) | "hill" (center, height, width) }
//! [moisture]      m, c_w, l_w, t_w, cp_f0, y_tol
//! [output]        interval [s], rasters, pgm, front_threshold [K]
//! [wave]          v [m/s], y0, c_lo, c_hi, scan_points
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Boundaries;
use crate::integrate::SchemeConfig;
use crate::physics::{CombustionSpec, ModelParameters, MoistureParameters, TwoPhaseParameters};

pub const BUILTIN_SCENARIOS: [&str; 3] = ["validation", "validation-2d", "reduced"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Standard,
    ReducedWeber,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub x0: f64,
    pub y0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialConfig {
    HotStrip {
        x: [f64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y: Option<[f64; 2]>,
        temperature: f64,
        #[serde(default)]
        noise: f64,
    },
    HotSpotGaussian {
        center: [f64; 2],
        radius: f64,
        peak: f64,
        #[serde(default)]
        noise: f64,
    },
    UniformUnit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FuelConfig {
    Uniform { value: f64 },
    Raster { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TerrainConfig {
    Flat,
    /// `Z = sx·x + sy·y`.
    Plane {
        slope: [f64; 2],
    },
    Hill {
        center: [f64; 2],
        height: f64,
        width: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectAdvection {
    pub velocity: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoPhaseAdvection {
    pub wind: [f64; 2],
    pub r_f: f64,
    pub rho_a: f64,
    pub rho_f: f64,
    pub cp_a: f64,
    pub cp_f: f64,
}

impl TwoPhaseAdvection {
    pub fn phases(&self) -> TwoPhaseParameters {
        TwoPhaseParameters {
            r_f: self.r_f,
            rho_a: self.rho_a,
            rho_f: self.rho_f,
            cp_a: self.cp_a,
            cp_f: self.cp_f,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirtualWindAdvection {
    pub wind: [f64; 2],
    pub beta: f64,
    pub gamma: f64,
    pub terrain: TerrainConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvectionConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct: Option<DirectAdvection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_phase: Option<TwoPhaseAdvection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub virtual_wind: Option<VirtualWindAdvection>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Simulated time between snapshots.
    pub interval: f64,
    pub rasters: bool,
    pub pgm: bool,
    /// Isotherm tracked as the front; defaults to the ignition temperature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front_threshold: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    pub v: f64,
    pub y0: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub scan_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub base: String,
    pub mode: Mode,
    pub end_time: f64,
    pub seed: u64,
    pub combustion: CombustionSpec,
    pub grid: GridConfig,
    pub boundaries: Boundaries,
    pub params: ModelParameters,
    pub scheme: SchemeConfig,
    pub initial: InitialConfig,
    pub fuel: FuelConfig,
    #[serde(default)]
    pub advection: AdvectionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moisture: Option<MoistureParameters>,
    pub output: OutputConfig,
    pub wave: WaveConfig,
}

impl Config {
    /// A built-in scenario by name.
    pub fn builtin(name: &str) -> Result<Config> {
        match name {
            "validation" => Ok(Self::validation()),
            "validation-2d" => Ok(Self::validation_2d()),
            "reduced" => Ok(Self::reduced()),
            other => Err(Error::config(
                "base",
                format!("unknown scenario `{other}`, expected one of {BUILTIN_SCENARIOS:?}"),
            )),
        }
    }

    /// 1D strip ignition with linearised memory combustion and constant K.
    pub fn validation() -> Config {
        Config {
            base: "validation".into(),
            mode: Mode::Standard,
            end_time: 40.0,
            seed: 0,
            combustion: CombustionSpec::LinearizedMemory,
            grid: GridConfig {
                dim: 1,
                nx: 3000,
                ny: 1,
                dx: 0.1,
                dy: 0.1,
                x0: -150.0,
                y0: 0.0,
            },
            boundaries: Boundaries::dirichlet(),
            params: ModelParameters::validation(),
            scheme: SchemeConfig::default(),
            initial: InitialConfig::HotStrip {
                x: [-2.5, 2.5],
                y: None,
                temperature: 700.0,
                noise: 0.0,
            },
            fuel: FuelConfig::Uniform { value: 1.0 },
            advection: AdvectionConfig::default(),
            moisture: None,
            output: OutputConfig {
                interval: 1.0,
                rasters: true,
                pgm: true,
                front_threshold: None,
            },
            wave: WaveConfig {
                v: 0.0,
                y0: 1.0,
                c_lo: -6.0,
                c_hi: 6.0,
                scan_points: 121,
            },
        }
    }

    /// 2D hot-spot ignition on a square domain.
    pub fn validation_2d() -> Config {
        let mut c = Self::validation();
        c.base = "validation-2d".into();
        c.end_time = 15.0;
        c.grid = GridConfig {
            dim: 2,
            nx: 160,
            ny: 160,
            dx: 0.25,
            dy: 0.25,
            x0: -20.0,
            y0: -20.0,
        };
        c.initial = InitialConfig::HotSpotGaussian {
            center: [0.0, 0.0],
            radius: 2.0,
            peak: 800.0,
            noise: 0.0,
        };
        c
    }

    /// Reduced non-dimensional model with unit initial data.
    pub fn reduced() -> Config {
        Config {
            base: "reduced".into(),
            mode: Mode::ReducedWeber,
            end_time: 5.0,
            seed: 0,
            combustion: CombustionSpec::ArrheniusHeaviside,
            grid: GridConfig {
                dim: 1,
                nx: 512,
                ny: 1,
                dx: 1.0,
                dy: 1.0,
                x0: 0.0,
                y0: 0.0,
            },
            boundaries: Boundaries::neumann(),
            params: ModelParameters::reduced_weber(1.0),
            scheme: SchemeConfig::default(),
            initial: InitialConfig::UniformUnit,
            fuel: FuelConfig::Uniform { value: 1.0 },
            advection: AdvectionConfig::default(),
            moisture: None,
            output: OutputConfig {
                interval: 0.25,
                rasters: false,
                pgm: false,
                front_threshold: None,
            },
            wave: Self::validation().wave,
        }
    }

    /// Semantic checks that do not need the grid to be built.
    pub fn validate(&self) -> Result<()> {
        let fail = |path: &str, e: Error| Error::config(path, e.to_string());
        if !(self.end_time >= 0.0 && self.end_time.is_finite()) {
            return Err(Error::config("end_time", "must be finite and non-negative"));
        }
        match self.grid.dim {
            1 | 2 => {}
            d => {
                return Err(Error::config(
                    "grid.dim",
                    format!("must be 1 or 2, got {d}"),
                ))
            }
        }
        if self.grid.nx == 0 || (self.grid.dim == 2 && self.grid.ny == 0) {
            return Err(Error::config("grid", "cell counts must be positive"));
        }
        if !(self.grid.dx > 0.0) || (self.grid.dim == 2 && !(self.grid.dy > 0.0)) {
            return Err(Error::config("grid", "spacings must be positive"));
        }
        self.params.validate().map_err(|e| fail("params", e))?;
        self.scheme.validate().map_err(|e| fail("scheme", e))?;
        if !(self.output.interval > 0.0) {
            return Err(Error::config("output.interval", "must be positive"));
        }
        let a = &self.advection;
        let active = [
            a.direct.is_some(),
            a.two_phase.is_some(),
            a.virtual_wind.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if active > 1 {
            return Err(Error::config(
                "advection",
                "at most one of direct, two_phase and virtual_wind may be given",
            ));
        }
        if let Some(tp) = &a.two_phase {
            tp.phases()
                .validate()
                .map_err(|e| fail("advection.two_phase", e))?;
        }
        if let Some(m) = &self.moisture {
            m.validate(&self.params).map_err(|e| fail("moisture", e))?;
        }
        match &self.fuel {
            FuelConfig::Uniform { value } if !(*value > 0.0 && *value <= 1.0) => {
                return Err(Error::config("fuel.value", "must lie in (0, 1]"));
            }
            _ => {}
        }
        if let InitialConfig::HotStrip { noise, .. }
        | InitialConfig::HotSpotGaussian { noise, .. } = &self.initial
        {
            if !(*noise >= 0.0) {
                return Err(Error::config("initial.noise", "must be non-negative"));
            }
        }
        if self.mode == Mode::ReducedWeber {
            let preset = ModelParameters::reduced_weber(self.params.h);
            let mut p = self.params;
            // the Arrhenius amplitude may be switched off for the pure-decay check
            p.a = preset.a;
            if p != preset {
                return Err(Error::config(
                    "params",
                    "reduced mode requires the reduced preset (only h and a may change)",
                ));
            }
            if self.combustion != CombustionSpec::ArrheniusHeaviside {
                return Err(Error::config(
                    "combustion",
                    "reduced mode uses arrhenius-heaviside",
                ));
            }
            if active > 0 || self.moisture.is_some() {
                return Err(Error::config(
                    "mode",
                    "reduced mode has no advection or moisture",
                ));
            }
        }
        if self.wave.scan_points < 2 || !(self.wave.c_lo < self.wave.c_hi) {
            return Err(Error::config(
                "wave",
                "need c_lo < c_hi and at least two scan points",
            ));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Parses `text` over its base scenario and applies `overrides`
/// (`dotted.key=value`, last writer wins). Relative raster paths are
/// resolved against `dir`.
pub fn parse_config(text: &str, overrides: &[String], dir: Option<&Path>) -> Result<Config> {
    let user: toml::Table = text
        .parse::<toml::Table>()
        .map_err(|e| parse_error(text, &e))?;
    let base_name = match user.get("base") {
        None => "validation".to_string(),
        Some(toml::Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::config("base", "must be a string")),
    };
    let mut merged = toml::Value::try_from(Config::builtin(&base_name)?)
        .map_err(|e| Error::Serialize(e.to_string()))?;
    merge(&mut merged, toml::Value::Table(user));
    for ov in overrides {
        apply_override(&mut merged, ov)?;
    }
    let mut cfg: Config = serde_path_to_error::deserialize(merged).map_err(|e| {
        let path = e.path().to_string();
        Error::config(path, e.into_inner().message().to_string())
    })?;
    if let (FuelConfig::Raster { path }, Some(dir)) = (&mut cfg.fuel, dir) {
        if path.is_relative() {
            *path = dir.join(&*path);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a TOML config, or the `config` member of a run manifest (`.json`).
pub fn load_config(path: &Path, overrides: &[String]) -> Result<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    let dir = path.parent();
    if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let cfg = v
            .get("config")
            .ok_or_else(|| Error::config("config", "manifest has no `config` member"))?;
        let cfg: Config = serde_json::from_value(cfg.clone())
            .map_err(|e| Error::config("config", e.to_string()))?;
        return parse_config(&cfg.to_toml()?, overrides, dir);
    }
    parse_config(&text, overrides, dir)
}

fn parse_error(text: &str, e: &toml::de::Error) -> Error {
    let (line, column) = match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
            (line, column)
        }
        None => (0, 0),
    };
    Error::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

/// Tables merge key by key; anything else is replaced.
fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_table() && v.is_table() && !is_tagged(&v) => {
                        merge(slot, v)
                    }
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

/// Tables with a `kind` tag replace the base wholesale so fields of a
/// different variant do not leak in.
fn is_tagged(v: &toml::Value) -> bool {
    v.as_table().is_some_and(|t| t.contains_key("kind"))
}

fn apply_override(root: &mut toml::Value, ov: &str) -> Result<()> {
    let (key, raw) = ov
        .split_once('=')
        .ok_or_else(|| Error::config(ov, "override must look like key=value"))?;
    let key = key.trim();
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "empty key segment"));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not inside a table")))?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::config(key, "parent is not a table"))?;
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// TOML literal if it parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or(toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
