//! Python bindings: parameter sets, pointwise physics, wave-speed search,
//! front measurement and a steppable simulation.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use wildfire_adr::config::{parse_config, Config};
use wildfire_adr::driver::{run_config, RunOptions};
use wildfire_adr::front::{self, Direction, FrontPosition, FrontTrace};
use wildfire_adr::integrate::FieldState;
use wildfire_adr::physics;
use wildfire_adr::scenario::{build_scenario, Scenario};
use wildfire_adr::wave::{self, ShootingProblem};
use wildfire_adr::Error;

fn to_py(e: Error) -> PyErr {
    if e.is_runtime_divergence() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

#[pyclass(name = "ModelParameters", from_py_object)]
#[derive(Clone)]
struct PyModelParameters {
    inner: physics::ModelParameters,
}

#[pymethods]
impl PyModelParameters {
    #[staticmethod]
    fn validation() -> Self {
        PyModelParameters {
            inner: physics::ModelParameters::validation(),
        }
    }

    #[staticmethod]
    fn reduced_weber(h: f64) -> Self {
        PyModelParameters {
            inner: physics::ModelParameters::reduced_weber(h),
        }
    }

    /// Returns a copy with `name` set to `value`.
    fn with_value(&self, name: &str, value: f64) -> PyResult<Self> {
        let mut p = self.inner;
        let slot = match name {
            "rho" => &mut p.rho,
            "c" => &mut p.c,
            "k" => &mut p.k,
            "epsilon" => &mut p.epsilon,
            "delta" => &mut p.delta,
            "sigma" => &mut p.sigma,
            "h" => &mut p.h,
            "t_inf" => &mut p.t_inf,
            "s" => &mut p.s,
            "a" => &mut p.a,
            "t_ac" => &mut p.t_ac,
            "t_bar" => &mut p.t_bar,
            "a_l" => &mut p.a_l,
            "psi_const" => &mut p.psi_const,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown parameter `{other}`"
                )))
            }
        };
        *slot = value;
        p.validate().map_err(to_py)?;
        Ok(PyModelParameters { inner: p })
    }

    fn get(&self, name: &str) -> PyResult<f64> {
        let v =
            serde_json::to_value(self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        v.get(name)
            .and_then(|x| x.as_f64())
            .ok_or_else(|| PyValueError::new_err(format!("unknown parameter `{name}`")))
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyfunction]
fn diffusivity(t: f64, params: &PyModelParameters) -> PyResult<f64> {
    physics::diffusivity(t, &params.inner).map_err(to_py)
}

#[pyfunction]
fn combustion_rate(kind: &str, t: f64, theta: f64, params: &PyModelParameters) -> PyResult<f64> {
    let spec = match kind {
        "arrhenius-heaviside" => physics::CombustionSpec::ArrheniusHeaviside,
        "linearized-memory" => physics::CombustionSpec::LinearizedMemory,
        "constant-factor" => physics::CombustionSpec::ConstantFactor,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown combustion `{other}`"
            )))
        }
    };
    spec.rate(t, theta, &params.inner).map_err(to_py)
}

#[pyfunction]
fn bulk_velocity_factor(r_f: f64, rho_a: f64, rho_f: f64, cp_a: f64, cp_f: f64) -> PyResult<f64> {
    let tp = physics::TwoPhaseParameters {
        r_f,
        rho_a,
        rho_f,
        cp_a,
        cp_f,
    };
    tp.validate().map_err(to_py)?;
    physics::bulk_velocity_factor(&tp).map_err(to_py)
}

/// Admissible and unstable wave speeds as two sorted lists.
#[pyfunction]
#[pyo3(signature = (params, v, c_lo, c_hi, scan_points=121, y0=1.0))]
fn find_wave_speeds(
    params: &PyModelParameters,
    v: f64,
    c_lo: f64,
    c_hi: f64,
    scan_points: usize,
    y0: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let mut pb = ShootingProblem::from_params(&params.inner, v, y0, c_lo, c_hi);
    pb.scan_points = scan_points;
    let r = wave::find_wave_speeds(&pb).map_err(to_py)?;
    Ok((
        r.roots.iter().map(|w| w.speed).collect(),
        r.unstable.iter().map(|w| w.speed).collect(),
    ))
}

#[pyfunction]
fn shoot(params: &PyModelParameters, v: f64, c: f64) -> PyResult<f64> {
    let pb = ShootingProblem::from_params(&params.inner, v, 1.0, -1.0, 1.0);
    wave::shoot(c, &pb).map_err(to_py)
}

/// Outermost crossing toward increasing x (or decreasing with
/// `increasing=False`), `None` if absent; raises on a saturated profile.
#[pyfunction]
#[pyo3(signature = (xs, values, threshold, increasing=true))]
fn locate_front(
    xs: Vec<f64>,
    values: Vec<f64>,
    threshold: f64,
    increasing: bool,
) -> PyResult<Option<f64>> {
    let dir = if increasing {
        Direction::Increasing
    } else {
        Direction::Decreasing
    };
    match front::locate_front(&xs, &values, threshold, dir).map_err(to_py)? {
        FrontPosition::At(x) => Ok(Some(x)),
        FrontPosition::Absent => Ok(None),
        FrontPosition::Saturated => Err(PyValueError::new_err("domain saturated")),
    }
}

/// Least-squares `(speed, rms residual)` over `window`.
#[pyfunction]
fn estimate_speed(
    times: Vec<f64>,
    positions: Vec<f64>,
    window: (f64, f64),
) -> PyResult<(f64, f64)> {
    let trace =
        FrontTrace::from_samples(times.into_iter().zip(positions).collect()).map_err(to_py)?;
    let fit = front::estimate_speed(&trace, window).map_err(to_py)?;
    Ok((fit.speed, fit.residual))
}

/// Runs a TOML config and returns the manifest as JSON text.
#[pyfunction]
#[pyo3(signature = (config, out, overrides=Vec::new(), threads=None))]
fn run(
    config: &str,
    out: &str,
    overrides: Vec<String>,
    threads: Option<usize>,
) -> PyResult<String> {
    let cfg = parse_config(config, &overrides, None).map_err(to_py)?;
    let m = run_config(
        &cfg,
        std::path::Path::new(out),
        RunOptions {
            threads,
            quiet: true,
        },
    )
    .map_err(to_py)?;
    serde_json::to_string(&m).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// A scenario that can be stepped from Python.
#[pyclass]
struct Simulation {
    scenario: Scenario,
    state: FieldState,
    time: f64,
    steps: u64,
}

#[pymethods]
impl Simulation {
    #[new]
    #[pyo3(signature = (config="", overrides=Vec::new()))]
    fn new(config: &str, overrides: Vec<String>) -> PyResult<Self> {
        let cfg: Config = parse_config(config, &overrides, None).map_err(to_py)?;
        let scenario = build_scenario(&cfg).map_err(to_py)?;
        let state = scenario.initial_state().map_err(to_py)?;
        Ok(Simulation {
            scenario,
            state,
            time: 0.0,
            steps: 0,
        })
    }

    /// Advances to `t` with stable steps; returns the number of steps taken.
    fn advance_to(&mut self, t: f64) -> PyResult<u64> {
        let sc = &self.scenario;
        let start = self.steps;
        while self.time < t {
            let dt = sc.system.stable_dt(&self.state, &sc.scheme);
            let (dt, lands) = if dt >= t - self.time {
                (t - self.time, true)
            } else {
                (dt, false)
            };
            sc.system
                .step(&mut self.state, dt, &sc.scheme)
                .map_err(to_py)?;
            sc.system.fill_ghosts(&mut self.state);
            self.steps += 1;
            self.time = if lands { t } else { self.time + dt };
        }
        Ok(self.steps - start)
    }

    #[getter]
    fn time(&self) -> f64 {
        self.time
    }

    #[getter]
    fn steps(&self) -> u64 {
        self.steps
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.scenario.grid.ny, self.scenario.grid.nx)
    }

    /// Interior temperatures, row-major.
    fn temperature(&self) -> Vec<f64> {
        self.state.t.interior()
    }

    fn fuel(&self) -> Vec<f64> {
        self.state.y.interior()
    }

    /// Cell-centre x coordinates.
    fn x(&self) -> Vec<f64> {
        let g = self.scenario.grid;
        (0..g.nx).map(|i| g.x(i as isize)).collect()
    }

    fn fuel_mass(&self) -> f64 {
        self.state.y.integral()
    }
}

#[pymodule]
fn adrfire(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParameters>()?;
    m.add_class::<Simulation>()?;
    m.add_function(wrap_pyfunction!(diffusivity, m)?)?;
    m.add_function(wrap_pyfunction!(combustion_rate, m)?)?;
    m.add_function(wrap_pyfunction!(bulk_velocity_factor, m)?)?;
    m.add_function(wrap_pyfunction!(find_wave_speeds, m)?)?;
    m.add_function(wrap_pyfunction!(shoot, m)?)?;
    m.add_function(wrap_pyfunction!(locate_front, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_speed, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
