//! Time loop, scheduled outputs and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{parse_config, Config, Mode};
use crate::error::{Error, Result};
use crate::front::{
    estimate_speed, locate_front_column, locate_front_row, Direction, FrontTrace, SpeedFit,
};
use crate::integrate::{FieldState, StepStats};
use crate::output::{
    write_csv_raster, write_pgm16, BoundSample, Extrema, FrontSummary, ReducedSummary, RunManifest,
    RunStatus, Snapshot, DIAGNOSTICS_FILE, FRONT_DIR, MANIFEST_SCHEMA, RASTER_DIR,
    RESOLVED_CONFIG_FILE,
};
use crate::scenario::{build_scenario, Scenario};

/// A scenario being advanced in time.
#[derive(Clone, Debug)]
pub struct Simulation<'a> {
    pub scenario: &'a Scenario,
    pub state: FieldState,
    pub time: f64,
    pub steps: u64,
    pub clamps: u64,
    pub extrema: Extrema,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        let state = scenario.initial_state()?;
        let extrema = Extrema::of(&state.t, &state.y);
        Ok(Simulation {
            scenario,
            state,
            time: 0.0,
            steps: 0,
            clamps: 0,
            extrema,
        })
    }

    /// One stable step, shortened so as not to pass `limit`. Returns the
    /// step taken.
    pub fn step(&mut self, limit: f64) -> Result<f64> {
        let sc = self.scenario;
        let remaining = limit - self.time;
        if !(remaining > 0.0) {
            return Err(Error::param("limit", "must lie ahead of the current time"));
        }
        let dt = sc.system.stable_dt(&self.state, &sc.scheme);
        let (dt, lands) = if dt >= remaining {
            (remaining, true)
        } else {
            (dt, false)
        };
        let StepStats { clamps } =
            sc.system
                .step(&mut self.state, dt, &sc.scheme)
                .map_err(|e| match e {
                    Error::Divergence { quantity, i, j, .. } => Error::Divergence {
                        quantity,
                        i,
                        j,
                        step: Some(self.steps + 1),
                    },
                    other => other,
                })?;
        sc.system.fill_ghosts(&mut self.state);
        self.steps += 1;
        self.clamps += clamps;
        self.time = if lands { limit } else { self.time + dt };
        self.extrema
            .widen(&Extrema::of(&self.state.t, &self.state.y));
        Ok(dt)
    }

    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        while self.time < target {
            self.step(target)?;
        }
        Ok(())
    }
}

/// Output times `k·interval` up to and including the end time.
pub fn output_times(end: f64, interval: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * interval;
        if t >= end * (1.0 - 1e-12) {
            break;
        }
        out.push(t);
        k += 1;
    }
    out.push(end);
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub quiet: bool,
}

struct Tracker {
    name: &'static str,
    axis: usize,
    line: usize,
    direction: Direction,
    trace: FrontTrace,
}

fn trackers(sc: &Scenario) -> Vec<Tracker> {
    let g = sc.grid;
    let mk = |name, axis, line, direction| Tracker {
        name,
        axis,
        line,
        direction,
        trace: FrontTrace::new(),
    };
    let mut v = vec![
        mk("x_pos", 0, g.ny / 2, Direction::Increasing),
        mk("x_neg", 0, g.ny / 2, Direction::Decreasing),
    ];
    if g.dim == 2 {
        v.push(mk("y_pos", 1, g.nx / 2, Direction::Increasing));
        v.push(mk("y_neg", 1, g.nx / 2, Direction::Decreasing));
    }
    v
}

/// Sup-norm bound of the reduced model at time `t`.
pub fn reduced_bound(h: f64, t: f64, t0_sup: f64, y0_sup: f64) -> f64 {
    if h > 0.0 {
        (-h * t).exp() * t0_sup + y0_sup / h
    } else {
        t0_sup + t * y0_sup
    }
}

/// Runs a scenario, writing all outputs under `out`. On divergence the
/// manifest is still written and the error is returned.
pub fn run(scenario: &Scenario, out: &Path, opts: RunOptions) -> Result<RunManifest> {
    match opts.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::param("threads", e.to_string()))?;
            pool.install(|| run_inner(scenario, out, opts, n))
        }
        None => run_inner(scenario, out, opts, rayon::current_num_threads()),
    }
}

/// Reduced-model run; also records the sup-norm bound and its margin at
/// every output time.
pub fn run_reduced_weber(scenario: &Scenario, out: &Path, opts: RunOptions) -> Result<RunManifest> {
    if scenario.mode != Mode::ReducedWeber {
        return Err(Error::config(
            "mode",
            "reduced run needs mode = \"reduced-weber\"",
        ));
    }
    run(scenario, out, opts)
}

fn run_inner(sc: &Scenario, out: &Path, opts: RunOptions, threads: usize) -> Result<RunManifest> {
    let started = Instant::now();
    fs::create_dir_all(out)?;
    fs::write(out.join(RESOLVED_CONFIG_FILE), sc.config.to_toml()?)?;
    if sc.output.rasters {
        fs::create_dir_all(out.join(RASTER_DIR))?;
    }
    let threshold = sc.front_threshold();
    if threshold.is_some() {
        fs::create_dir_all(out.join(FRONT_DIR))?;
    }

    let mut sim = Simulation::new(sc)?;
    let fuel_initial = sim.state.y.integral();
    let mut diag = String::from("time,step,t_min,t_max,y_min,y_max,fuel_mass,clamps\n");
    let mut snapshots = Vec::new();
    let mut fronts = trackers(sc);
    let reduced = sc.mode == Mode::ReducedWeber;
    let t0_sup = sc.t0.interior_abs_max();
    let y0_sup = sc.y0.interior_abs_max();
    let mut bound_samples = Vec::new();

    let times = output_times(sc.end_time, sc.output.interval);
    let mut failure = None;
    for (k, &target) in times.iter().enumerate() {
        if let Err(e) = sim.advance_to(target) {
            failure = Some(e);
            break;
        }
        let (t, y) = (&sim.state.t, &sim.state.y);
        let ex = Extrema::of(t, y);
        diag.push_str(&format!(
            "{:?},{},{:?},{:?},{:?},{:?},{:?},{}\n",
            sim.time,
            sim.steps,
            ex.t_min,
            ex.t_max,
            ex.y_min,
            ex.y_max,
            y.integral(),
            sim.clamps
        ));
        if sc.output.rasters {
            snapshots.push(write_snapshot(out, k, &sim, sc.output.pgm)?);
        }
        if let Some(thr) = threshold {
            for tr in fronts.iter_mut() {
                let pos = if tr.axis == 0 {
                    locate_front_row(t, tr.line, thr, tr.direction)?
                } else {
                    locate_front_column(t, tr.line, thr, tr.direction)?
                };
                if let Some(x) = pos.position() {
                    tr.trace.push(sim.time, x)?;
                }
            }
        }
        if reduced {
            let sup_t = t.interior_abs_max();
            let bound = reduced_bound(sc.system.params.h, sim.time, t0_sup, y0_sup);
            bound_samples.push(BoundSample {
                time: sim.time,
                sup_t,
                bound,
                margin: bound - sup_t,
            });
        }
        if !opts.quiet {
            eprintln!(
                "t = {:.4}  steps = {}  T in [{:.4}, {:.4}]",
                sim.time, sim.steps, ex.t_min, ex.t_max
            );
        }
    }
    fs::write(out.join(DIAGNOSTICS_FILE), diag)?;

    let mut front_summaries = Vec::new();
    if threshold.is_some() {
        let window = (0.5 * sc.end_time, sc.end_time);
        for tr in &fronts {
            let file = format!("{FRONT_DIR}/front_{}.csv", tr.name);
            tr.trace.write_csv(fs::File::create(out.join(&file))?)?;
            front_summaries.push(FrontSummary {
                name: tr.name.to_string(),
                file,
                samples: tr.trace.len(),
                speed: estimate_speed(&tr.trace, window).ok(),
            });
        }
    }

    let reduced_summary = reduced.then(|| ReducedSummary {
        h: sc.system.params.h,
        min_margin: bound_samples
            .iter()
            .map(|s| s.margin)
            .fold(f64::INFINITY, f64::min),
        samples: bound_samples,
    });

    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA.into(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        status: if failure.is_some() {
            RunStatus::Diverged
        } else {
            RunStatus::Completed
        },
        error: failure.as_ref().map(|e| e.to_string()),
        config: sc.config.clone(),
        cells: sc.grid.cell_count(),
        steps: sim.steps,
        final_time: sim.time,
        wall_time_s: started.elapsed().as_secs_f64(),
        threads,
        clamps: sim.clamps,
        extrema: sim.extrema,
        fuel_mass_initial: fuel_initial,
        fuel_mass_final: sim.state.y.integral(),
        snapshots,
        fronts: front_summaries,
        reduced: reduced_summary,
    };
    manifest.write(out)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(manifest),
    }
}

fn write_snapshot(out: &Path, k: usize, sim: &Simulation, pgm: bool) -> Result<Snapshot> {
    let (t, y) = (&sim.state.t, &sim.state.y);
    let mut files = Vec::new();
    for (name, f) in [("T", t), ("Y", y)] {
        let rel = format!("{RASTER_DIR}/{name}_{k:05}.csv");
        write_csv_raster(f, &out.join(&rel))?;
        files.push(rel);
    }
    let t_scale = [t.interior_min(), t.interior_max()];
    let y_scale = [0.0, 1.0];
    if pgm {
        for (name, f, sc) in [("T", t, t_scale), ("Y", y, y_scale)] {
            let rel = format!("{RASTER_DIR}/{name}_{k:05}.pgm");
            write_pgm16(f, sc[0], sc[1], &out.join(&rel))?;
            files.push(rel);
        }
    }
    Ok(Snapshot {
        index: k,
        time: sim.time,
        step: sim.steps,
        files,
        t_scale,
        y_scale,
    })
}

/// Builds and runs a configuration, dispatching on its mode.
pub fn run_config(cfg: &Config, out: &Path, opts: RunOptions) -> Result<RunManifest> {
    let sc = build_scenario(cfg)?;
    match sc.mode {
        Mode::Standard => run(&sc, out, opts),
        Mode::ReducedWeber => run_reduced_weber(&sc, out, opts),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: String,
    pub dir: PathBuf,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Fitted speeds keyed by front name.
    pub speeds: Vec<(String, Option<SpeedFit>)>,
}

/// Runs one scenario per value of the dotted `key`, concurrently, each in
/// `out/run_<k>`, and writes `out/sweep.csv`.
pub fn sweep(
    text: &str,
    overrides: &[String],
    key: &str,
    values: &[String],
    config_dir: Option<&Path>,
    out: &Path,
) -> Result<Vec<SweepRow>> {
    fs::create_dir_all(out)?;
    let configs: Vec<Config> = values
        .iter()
        .map(|v| {
            let mut ov = overrides.to_vec();
            ov.push(format!("{key}={v}"));
            parse_config(text, &ov, config_dir)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<SweepRow> = configs
        .par_iter()
        .zip(values.par_iter())
        .enumerate()
        .map(|(k, (cfg, value))| {
            let dir = out.join(format!("run_{k:03}"));
            let opts = RunOptions {
                threads: None,
                quiet: true,
            };
            match run_config(cfg, &dir, opts) {
                Ok(m) => SweepRow {
                    value: value.clone(),
                    dir,
                    status: m.status,
                    error: None,
                    speeds: m.fronts.iter().map(|f| (f.name.clone(), f.speed)).collect(),
                },
                Err(e) => SweepRow {
                    value: value.clone(),
                    dir,
                    status: RunStatus::Diverged,
                    error: Some(e.to_string()),
                    speeds: Vec::new(),
                },
            }
        })
        .collect();
    let mut csv = format!("{key},status,front,speed,residual\n");
    for r in &rows {
        let status = match r.status {
            RunStatus::Completed => "completed",
            RunStatus::Diverged => "diverged",
        };
        if r.speeds.is_empty() {
            csv.push_str(&format!("{},{status},,,\n", r.value));
        }
        for (name, fit) in &r.speeds {
            match fit {
                Some(f) => csv.push_str(&format!(
                    "{},{status},{name},{:?},{:?}\n",
                    r.value, f.speed, f.residual
                )),
                None => csv.push_str(&format!("{},{status},{name},,\n", r.value)),
            }
        }
    }
    fs::write(out.join("sweep.csv"), csv)?;
    Ok(rows)
}
