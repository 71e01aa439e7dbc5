//! Throughput measurement of the two scheme pairings on the 2D validation
//! physics.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::Result;
use crate::integrate::SchemeConfig;
use crate::scenario::build_scenario;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub scheme: String,
    pub n: usize,
    pub cells: usize,
    pub steps: usize,
    /// Seconds per step, one entry per repetition.
    pub timings: Vec<f64>,
    pub median_step_s: f64,
    pub cell_updates_per_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub threads: usize,
    pub entries: Vec<BenchEntry>,
}

impl BenchReport {
    pub fn entry(&self, scheme: &str, n: usize) -> Option<&BenchEntry> {
        self.entries.iter().find(|e| e.scheme == scheme && e.n == n)
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Times `steps` fixed-size steps on `n × n` grids for Upwind1/Euler and
/// WENO5/SSPRK3, `reps` times each.
pub fn bench(sizes: &[usize], reps: usize, steps: usize) -> Result<BenchReport> {
    let schemes = [
        ("upwind1-euler", SchemeConfig::default()),
        ("weno5-ssprk3", SchemeConfig::high_order()),
    ];
    let mut entries = Vec::new();
    for &n in sizes {
        let mut cfg = Config::validation_2d();
        let length = 40.0;
        cfg.grid.nx = n;
        cfg.grid.ny = n;
        cfg.grid.dx = length / n as f64;
        cfg.grid.dy = length / n as f64;
        cfg.advection.direct = Some(crate::config::DirectAdvection {
            velocity: [0.5, 0.2],
        });
        for (name, scheme) in schemes {
            cfg.scheme = scheme;
            let sc = build_scenario(&cfg)?;
            let mut timings = Vec::with_capacity(reps);
            for _ in 0..reps {
                let mut state = sc.initial_state()?;
                let dt = sc.system.stable_dt(&state, &sc.scheme);
                let start = Instant::now();
                for _ in 0..steps {
                    sc.system.step(&mut state, dt, &sc.scheme)?;
                    sc.system.fill_ghosts(&mut state);
                }
                timings.push(start.elapsed().as_secs_f64() / steps as f64);
            }
            let med = median(&timings);
            entries.push(BenchEntry {
                scheme: name.to_string(),
                n,
                cells: n * n,
                steps,
                timings,
                median_step_s: med,
                cell_updates_per_s: (n * n) as f64 / med,
            });
        }
    }
    Ok(BenchReport {
        threads: rayon::current_num_threads(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn report_structure() {
        let r = bench(&[16], 3, 2).unwrap();
        assert_eq!(r.entries.len(), 2);
        for e in &r.entries {
            assert_eq!(e.timings.len(), 3);
            assert_eq!(e.median_step_s, median(&e.timings));
            assert!(e.cell_updates_per_s > 0.0);
        }
    }
}
