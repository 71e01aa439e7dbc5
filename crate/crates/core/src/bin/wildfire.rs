use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wildfire_adr::bench::bench;
use wildfire_adr::config::{load_config, Config, Mode};
use wildfire_adr::driver::{run, run_reduced_weber, sweep, RunOptions};
use wildfire_adr::scenario::build_scenario;
use wildfire_adr::wave::{find_wave_speeds, slow_wave_cutoff, ShootingProblem};
use wildfire_adr::Error;

#[derive(Parser)]
#[command(
    name = "wildfire",
    version,
    about = "Advection-diffusion-reaction wildfire simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Dotted override, e.g. `params.h=0.2`; repeatable, last wins.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario.
    Run(Common),
    /// Run the reduced model and check the sup-norm bound.
    Reduced(Common),
    /// Travelling-wave speeds by shooting.
    Wavespeed {
        #[command(flatten)]
        common: Common,
        /// Also search for the advection speed where the upwind wave vanishes,
        /// between 0 and this value.
        #[arg(long)]
        cutoff_max: Option<f64>,
    },
    /// Run one scenario per value of a key.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        key: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
    /// Cell-update throughput of the scheme pairings.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "64,128")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Check a config without running it.
    ValidateConfig(Common),
}

fn config_of(c: &Common) -> Result<Config, Error> {
    match &c.config {
        Some(p) => load_config(p, &c.set),
        None => Err(Error::Config {
            path: "--config".into(),
            reason: "a config file is required".into(),
        }),
    }
}

fn options(c: &Common) -> RunOptions {
    RunOptions {
        threads: c.threads,
        quiet: c.quiet,
    }
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Serialize(e.to_string()))?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn in_pool<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Error>
where
    T: Send,
{
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|p| p.install(f))
            .map_err(|e| Error::Config {
                path: "--threads".into(),
                reason: e.to_string(),
            }),
        None => Ok(f()),
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(c) => {
            let sc = build_scenario(&config_of(&c)?)?;
            let m = run(&sc, &c.out, options(&c))?;
            if !c.quiet {
                for f in &m.fronts {
                    if let Some(s) = f.speed {
                        println!(
                            "front {}: speed {:.6} (rms {:.2e})",
                            f.name, s.speed, s.residual
                        );
                    }
                }
                println!("{} steps, outputs in {}", m.steps, c.out.display());
            }
        }
        Command::Reduced(c) => {
            let cfg = match &c.config {
                Some(_) => config_of(&c)?,
                None => load_reduced_default(&c.set)?,
            };
            let sc = build_scenario(&cfg)?;
            let m = run_reduced_weber(&sc, &c.out, options(&c))?;
            if let Some(r) = &m.reduced {
                println!("h = {}: minimum bound margin {:.3e}", r.h, r.min_margin);
            }
        }
        Command::Wavespeed { common, cutoff_max } => {
            let cfg = config_of(&common)?;
            let w = cfg.wave;
            let mut pb = ShootingProblem::from_params(&cfg.params, w.v, w.y0, w.c_lo, w.c_hi);
            pb.scan_points = w.scan_points;
            let report = in_pool(common.threads, || find_wave_speeds(&pb))??;
            for r in &report.roots {
                println!("speed {:.6}  residual {:.2e}", r.speed, r.residual);
            }
            for r in &report.unstable {
                println!("unstable {:.6}  residual {:.2e}", r.speed, r.residual);
            }
            write_json(&common.out, "wave_speeds.json", &report)?;
            if let Some(vmax) = cutoff_max {
                let base = ShootingProblem { v: 0.0, ..pb };
                let v = in_pool(common.threads, || slow_wave_cutoff(&base, 0.0, vmax, 1e-3))??;
                println!("upwind wave vanishes at v = {v:.4}");
                write_json(
                    &common.out,
                    "wave_cutoff.json",
                    &serde_json::json!({ "v_cutoff": v }),
                )?;
            }
        }
        Command::Sweep {
            common,
            key,
            values,
        } => {
            let path = common.config.clone().ok_or_else(|| Error::Config {
                path: "--config".into(),
                reason: "a config file is required".into(),
            })?;
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Config {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            let rows = in_pool(common.threads, || {
                sweep(
                    &text,
                    &common.set,
                    &key,
                    &values,
                    path.parent(),
                    &common.out,
                )
            })??;
            for r in &rows {
                let speeds: Vec<String> = r
                    .speeds
                    .iter()
                    .filter_map(|(n, f)| f.map(|f| format!("{n}={:.5}", f.speed)))
                    .collect();
                println!("{key}={}: {}", r.value, speeds.join(" "));
            }
        }
        Command::Bench {
            common,
            sizes,
            reps,
            steps,
        } => {
            let report = in_pool(common.threads, || bench(&sizes, reps, steps))??;
            for e in &report.entries {
                println!(
                    "{:>14} {:>5}^2  {:>10.3e} s/step  {:>10.3e} cell-updates/s",
                    e.scheme, e.n, e.median_step_s, e.cell_updates_per_s
                );
            }
            write_json(&common.out, "bench.json", &report)?;
        }
        Command::ValidateConfig(c) => {
            let cfg = config_of(&c)?;
            build_scenario(&cfg)?;
            if !c.quiet {
                println!("ok");
            }
        }
    }
    Ok(())
}

fn load_reduced_default(set: &[String]) -> Result<Config, Error> {
    let cfg = wildfire_adr::config::parse_config("base = \"reduced\"", set, None)?;
    debug_assert_eq!(cfg.mode, Mode::ReducedWeber);
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_runtime_divergence() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
