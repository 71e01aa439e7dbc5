//! Raster writers and the run manifest.
//!
//! Files written under the output directory:
//!
//! ```text
//! manifest.json              run manifest (schema below)
//! config.resolved.toml       fully resolved configuration
//! diagnostics.csv            time,step,t_min,t_max,y_min,y_max,fuel_mass,clamps
//! fronts/front_<axis>_<pos|neg>.csv   time,position,speed_to_date
//! rasters/T_<k>.csv, Y_<k>.csv        ny rows of nx values, first row j = 0
//! rasters/T_<k>.pgm, Y_<k>.pgm        binary 16-bit PGM, first row j = ny − 1
//! ```
//!
//! PGM samples map linearly: `value = lo + (hi − lo)·sample/65535`, with
//! `lo`/`hi` stored per snapshot in the manifest.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::front::SpeedFit;
use crate::grid::Field;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.toml";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const RASTER_DIR: &str = "rasters";
pub const FRONT_DIR: &str = "fronts";
pub const MANIFEST_SCHEMA: &str = "wildfire-adr/run-manifest/1";

/// Row-major CSV, one grid row per line, shortest round-trip formatting.
pub fn write_csv_raster(f: &Field, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for j in 0..f.grid.ny {
        let (_, vals) = f.row(j);
        let line: Vec<String> = vals.iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// 16-bit binary PGM with linear scaling of `[lo, hi]` onto `[0, 65535]`.
pub fn write_pgm16(f: &Field, lo: f64, hi: f64, path: &Path) -> Result<()> {
    let g = f.grid;
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(w, "P5\n{} {}\n65535\n", g.nx, g.ny)?;
    let span = hi - lo;
    for j in (0..g.ny).rev() {
        let (_, vals) = f.row(j);
        for v in vals {
            let s = if span > 0.0 {
                ((v - lo) / span * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            w.write_all(&s.to_be_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads back a PGM written by [`write_pgm16`] as `(nx, ny, samples)` in
/// file order.
pub fn read_pgm16(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let bytes = fs::read(path)?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Serialize("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Serialize(format!("bad PGM header `{s}`")))
    };
    if fields[0] != "P5" || num(&fields[3])? != 65535 {
        return Err(Error::Serialize("not a 16-bit P5 image".into()));
    }
    let (nx, ny) = (num(&fields[1])?, num(&fields[2])?);
    let data = bytes[pos..]
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]))
        .collect::<Vec<_>>();
    if data.len() != nx * ny {
        return Err(Error::Serialize("PGM payload size mismatch".into()));
    }
    Ok((nx, ny, data))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    pub t_min: f64,
    pub t_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Extrema {
    pub fn of(t: &Field, y: &Field) -> Self {
        Extrema {
            t_min: t.interior_min(),
            t_max: t.interior_max(),
            y_min: y.interior_min(),
            y_max: y.interior_max(),
        }
    }

    pub fn widen(&mut self, o: &Extrema) {
        self.t_min = self.t_min.min(o.t_min);
        self.t_max = self.t_max.max(o.t_max);
        self.y_min = self.y_min.min(o.y_min);
        self.y_max = self.y_max.max(o.y_max);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub index: usize,
    pub time: f64,
    pub step: u64,
    pub files: Vec<String>,
    /// PGM scaling `[lo, hi]` of T and Y.
    pub t_scale: [f64; 2],
    pub y_scale: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontSummary {
    pub name: String,
    pub file: String,
    pub samples: usize,
    /// Fit over the second half of the run, when enough samples exist.
    pub speed: Option<SpeedFit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub time: f64,
    pub sup_t: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedSummary {
    pub h: f64,
    pub min_margin: f64,
    pub samples: Vec<BoundSample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    Diverged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub code_version: String,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: Config,
    pub cells: usize,
    pub steps: u64,
    pub final_time: f64,
    pub wall_time_s: f64,
    pub threads: usize,
    pub clamps: u64,
    pub extrema: Extrema,
    pub fuel_mass_initial: f64,
    pub fuel_mass_final: f64,
    pub snapshots: Vec<Snapshot>,
    pub fronts: Vec<FrontSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced: Option<ReducedSummary>,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let text =
            serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))?;
        fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        serde_json::from_str(&text).map_err(|e| Error::Serialize(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn csv_round_trips_exactly() {
        let g = Grid::new_2d(3, 2, 1.0, 1.0, 0.0, 0.0).unwrap();
        let f = Field::from_fn(g, |x, y| x / 3.0 + y * 1e-17);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        write_csv_raster(&f, &p).unwrap();
        let back: Vec<f64> = fs::read_to_string(&p)
            .unwrap()
            .lines()
            .flat_map(|l| {
                l.split(',')
                    .map(|s| s.parse::<f64>().unwrap())
                    .collect::<Vec<_>>()
            })
            .collect();
        assert_eq!(back, f.interior());
    }

    #[test]
    fn pgm_scaling() {
        let g = Grid::new_2d(2, 2, 1.0, 1.0, 0.0, 0.0).unwrap();
        let f = Field::from_interior(g, &[0.0, 1.0, 0.5, 2.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.pgm");
        write_pgm16(&f, 0.0, 1.0, &p).unwrap();
        let (nx, ny, data) = read_pgm16(&p).unwrap();
        assert_eq!((nx, ny), (2, 2));
        // top row first, values above hi saturate
        assert_eq!(data, vec![32768, 65535, 0, 65535]);
    }
}
