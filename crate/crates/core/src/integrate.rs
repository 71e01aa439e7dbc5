//! Semi-discrete right-hand side of the coupled temperature/fuel system and
//! the explicit time steppers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fill_ghosts, Boundaries, Field, VectorField};
use crate::ops;
use crate::physics::{
    self, effective_specific_heat, CombustionSpec, ModelParameters, MoistureParameters,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spatial {
    Upwind1,
    Weno5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Temporal {
    Euler,
    Ssprk3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FuelUpdate {
    CoupledExplicit,
    /// `Y ← Y·exp(−Ψ·dt)` with Ψ frozen over each stage.
    ExactExponential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeConfig {
    pub spatial: Spatial,
    pub temporal: Temporal,
    pub cfl: f64,
    pub fuel_update: FuelUpdate,
    /// Step used when no mechanism limits the step, and an upper cap.
    pub dt_max: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            spatial: Spatial::Upwind1,
            temporal: Temporal::Euler,
            cfl: 0.4,
            fuel_update: FuelUpdate::CoupledExplicit,
            dt_max: 1.0,
        }
    }
}

impl SchemeConfig {
    pub fn high_order() -> Self {
        SchemeConfig {
            spatial: Spatial::Weno5,
            temporal: Temporal::Ssprk3,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::param(
                "scheme.cfl",
                format!("must lie in (0, 1], got {}", self.cfl),
            ));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::param("scheme.dt_max", "must be positive"));
        }
        Ok(())
    }
}

/// Temperature, fuel fraction and (for the memory closure) the running
/// maximum temperature.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub t: Field,
    pub y: Field,
    pub theta: Option<Field>,
}

impl FieldState {
    pub fn new(t: Field, y: Field, with_memory: bool) -> Result<Self> {
        t.check_shape(&y, "state")?;
        let theta = with_memory.then(|| t.clone());
        Ok(FieldState { t, y, theta })
    }
}

#[derive(Clone, Debug)]
pub struct RhsOutput {
    pub dt_dt: Field,
    pub dy_dt: Field,
    pub psi: Field,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    /// Cells where Y undershot zero and was clamped.
    pub clamps: u64,
}

/// Everything the right-hand side needs besides the state.
#[derive(Clone, Debug)]
pub struct AdrSystem {
    pub params: ModelParameters,
    pub combustion: CombustionSpec,
    pub moisture: Option<MoistureParameters>,
    /// Advection velocity; `None` means no advection.
    pub velocity: Option<VectorField>,
    /// Boundary conditions for T. Y and Θ always use zero-flux ghosts.
    pub bc: Boundaries,
}

impl AdrSystem {
    pub fn new(params: ModelParameters, combustion: CombustionSpec) -> Self {
        AdrSystem {
            params,
            combustion,
            moisture: None,
            velocity: None,
            bc: Boundaries::dirichlet(),
        }
    }

    pub fn fill_ghosts(&self, state: &mut FieldState) {
        fill_ghosts(&mut state.t, &self.bc, self.params.t_inf);
        fill_ghosts(&mut state.y, &Boundaries::neumann(), 0.0);
        if let Some(theta) = state.theta.as_mut() {
            fill_ghosts(theta, &Boundaries::neumann(), 0.0);
        }
    }

    #[inline]
    fn c_eff(&self, t: f64, y: f64) -> Result<f64> {
        match &self.moisture {
            Some(mp) => effective_specific_heat(t, y, mp, &self.params),
            None => Ok(self.params.c),
        }
    }

    #[inline]
    fn rate(&self, t: f64, theta: Option<f64>) -> Result<f64> {
        // memory includes the current temperature
        let memory = theta.map_or(t, |m| m.max(t));
        self.combustion.rate(t, memory, &self.params)
    }

    /// Diffusion term `∇·[K(T)∇T]` for ghost-filled `t`.
    pub fn diffusion(&self, t: &Field) -> Result<Field> {
        let p = &self.params;
        if p.radiative_coefficient() == 0.0 {
            Ok(ops::laplacian_scaled(t, p.k))
        } else {
            let mut k = t.clone();
            for v in k.data.iter_mut() {
                *v = physics::diffusivity(*v, p)?;
            }
            ops::diffusion_variable_k(t, &k)
        }
    }

    fn advection(&self, t: &Field, spatial: Spatial) -> Result<Option<Field>> {
        match &self.velocity {
            None => Ok(None),
            Some(v) => Ok(Some(match spatial {
                Spatial::Upwind1 => ops::advect_upwind(t, v)?,
                Spatial::Weno5 => ops::advect_weno5(t, v)?,
            })),
        }
    }

    /// Right-hand side of the coupled system. `state` must have filled ghosts.
    pub fn rhs(&self, state: &FieldState, spatial: Spatial) -> Result<RhsOutput> {
        if state.theta.is_none() && self.combustion.needs_memory() {
            return Err(Error::param(
                "combustion",
                "the memory closure needs a memory field in the state",
            ));
        }
        let g = state.t.grid;
        let p = &self.params;
        let (t, y) = (&state.t, &state.y);
        let theta = state.theta.as_ref();

        let psi = Field::map_interior(g, |i, j| {
            let k = g.idx(i, j);
            self.rate(t.data[k], theta.map(|m| m.data[k]))
                .unwrap_or(f64::NAN)
        });
        if let Some((i, j)) = psi.first_non_finite() {
            return Err(Error::Divergence {
                quantity: "combustion rate",
                i,
                j,
                step: None,
            });
        }

        let diffusion = self.diffusion(t)?;
        let advection = self.advection(t, spatial)?;

        let dt_dt = Field::map_interior(g, |i, j| {
            let k = g.idx(i, j);
            let (tk, yk) = (t.data[k], y.data[k]);
            let c_eff = match self.c_eff(tk, yk) {
                Ok(c) => c,
                Err(_) => return f64::NAN,
            };
            let reaction = p.rho * psi.data[k] * p.s * yk - p.h * (tk - p.t_inf);
            let transport = advection.as_ref().map_or(0.0, |a| a.data[k]);
            -transport + (diffusion.data[k] + reaction) / (p.rho * c_eff)
        });
        if let Some((i, j)) = dt_dt.first_non_finite() {
            return Err(Error::Divergence {
                quantity: "temperature tendency",
                i,
                j,
                step: None,
            });
        }
        let dy_dt = Field::map_interior(g, |i, j| {
            let k = g.idx(i, j);
            -psi.data[k] * y.data[k]
        });
        Ok(RhsOutput { dt_dt, dy_dt, psi })
    }

    /// CFL-limited step: `cfl` times the smallest of the advective,
    /// diffusive and reaction limits, capped by `dt_max`.
    ///
    /// The reaction limit uses the larger of the peak combustion rate and
    /// the cooling rate `h/(ρ·c_eff)`.
    pub fn stable_dt(&self, state: &FieldState, scheme: &SchemeConfig) -> f64 {
        let g = state.t.grid;
        let p = &self.params;
        let inv_h2: f64 = (0..g.dim).map(|a| 1.0 / g.spacing(a).powi(2)).sum();

        let advective = match &self.velocity {
            None => 0.0,
            Some(v) => Field::map_interior(g, |i, j| {
                (0..g.dim)
                    .map(|a| v.component(a).get(i, j).abs() / g.spacing(a))
                    .sum()
            })
            .interior_max(),
        };
        let theta = state.theta.as_ref();
        let diffusive = Field::map_interior(g, |i, j| {
            let k = g.idx(i, j);
            let tk = state.t.data[k];
            let c_eff = self.c_eff(tk, state.y.data[k]).unwrap_or(p.c);
            let kk = physics::diffusivity(tk, p).unwrap_or(p.k);
            2.0 * kk * inv_h2 / (p.rho * c_eff)
        })
        .interior_max();
        let reactive = Field::map_interior(g, |i, j| {
            let k = g.idx(i, j);
            let tk = state.t.data[k];
            let c_eff = self.c_eff(tk, state.y.data[k]).unwrap_or(p.c);
            let psi = self.rate(tk, theta.map(|m| m.data[k])).unwrap_or(0.0);
            psi.max(p.h / (p.rho * c_eff))
        })
        .interior_max();

        let fastest = advective.max(diffusive).max(reactive);
        if fastest <= 0.0 || !fastest.is_finite() {
            return scheme.dt_max;
        }
        (scheme.cfl / fastest).min(scheme.dt_max)
    }

    /// Advance `state` by `dt` with the configured integrator.
    pub fn step(
        &self,
        state: &mut FieldState,
        dt: f64,
        scheme: &SchemeConfig,
    ) -> Result<StepStats> {
        match scheme.temporal {
            Temporal::Euler => step_euler(self, state, dt, scheme),
            Temporal::Ssprk3 => step_ssprk3(self, state, dt, scheme),
        }
    }
}

/// Forward-Euler stage `u + dt·L(u)`; the fuel part optionally uses the
/// frozen-rate exponential.
fn euler_stage(
    system: &AdrSystem,
    state: &mut FieldState,
    dt: f64,
    scheme: &SchemeConfig,
) -> Result<()> {
    system.fill_ghosts(state);
    let r = system.rhs(state, scheme.spatial)?;
    let g = state.t.grid;
    let dtt = &r.dt_dt;
    state
        .t
        .update_interior(|i, j, v| v + dt * dtt.data[g.idx(i, j)]);
    match scheme.fuel_update {
        FuelUpdate::CoupledExplicit => {
            let dy = &r.dy_dt;
            state
                .y
                .update_interior(|i, j, v| v + dt * dy.data[g.idx(i, j)]);
        }
        FuelUpdate::ExactExponential => {
            let psi = &r.psi;
            state
                .y
                .update_interior(|i, j, v| v * (-psi.data[g.idx(i, j)] * dt).exp());
        }
    }
    Ok(())
}

fn clamp_fuel(y: &mut Field) -> u64 {
    let g = y.grid;
    let mut clamps = 0;
    for j in 0..g.ny as isize {
        for i in 0..g.nx as isize {
            let k = g.idx(i, j);
            if y.data[k] < 0.0 {
                y.data[k] = 0.0;
                clamps += 1;
            }
        }
    }
    clamps
}

/// `a ← wa·a + wb·b` on the interiors of T and Y.
fn combine(a: &mut FieldState, wa: f64, b: &FieldState, wb: f64) {
    let g = a.t.grid;
    a.t.update_interior(|i, j, v| wa * v + wb * b.t.data[g.idx(i, j)]);
    a.y.update_interior(|i, j, v| wa * v + wb * b.y.data[g.idx(i, j)]);
}

fn finish_step(state: &mut FieldState) -> Result<()> {
    if let Some((i, j)) = state.t.first_non_finite() {
        return Err(Error::Divergence {
            quantity: "temperature",
            i,
            j,
            step: None,
        });
    }
    if let Some(theta) = state.theta.as_mut() {
        physics::update_memory(theta, &state.t)?;
    }
    Ok(())
}

/// One forward-Euler step; Θ is updated from the new temperature.
pub fn step_euler(
    system: &AdrSystem,
    state: &mut FieldState,
    dt: f64,
    scheme: &SchemeConfig,
) -> Result<StepStats> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", "must be positive"));
    }
    euler_stage(system, state, dt, scheme)?;
    let clamps = clamp_fuel(&mut state.y);
    finish_step(state)?;
    Ok(StepStats { clamps })
}

/// One three-stage Shu-Osher SSPRK3 step. Θ is held fixed across the stages
/// and updated once from the final temperature.
pub fn step_ssprk3(
    system: &AdrSystem,
    state: &mut FieldState,
    dt: f64,
    scheme: &SchemeConfig,
) -> Result<StepStats> {
    if !(dt > 0.0) {
        return Err(Error::param("dt", "must be positive"));
    }
    let mut clamps = 0;
    let u0 = state.clone();

    let mut u1 = u0.clone();
    euler_stage(system, &mut u1, dt, scheme)?;
    clamps += clamp_fuel(&mut u1.y);

    let mut u2 = u1;
    euler_stage(system, &mut u2, dt, scheme)?;
    combine(&mut u2, 0.25, &u0, 0.75);
    clamps += clamp_fuel(&mut u2.y);

    let mut u3 = u2;
    euler_stage(system, &mut u3, dt, scheme)?;
    combine(&mut u3, 2.0 / 3.0, &u0, 1.0 / 3.0);
    clamps += clamp_fuel(&mut u3.y);

    state.t = u3.t;
    state.y = u3.y;
    finish_step(state)?;
    Ok(StepStats { clamps })
}

/// Exact fuel decay `Y·exp(−Ψ·dt)` for a rate frozen over the step.
pub fn step_fuel_exact(y: &Field, psi: &Field, dt: f64) -> Result<Field> {
    y.check_shape(psi, "step_fuel_exact")?;
    let mut out = y.clone();
    for (v, &r) in out.data.iter_mut().zip(&psi.data) {
        *v *= (-r * dt).exp();
    }
    Ok(out)
}

/// Scalar SSPRK3 step for `u' = f(u)`, the same stage combination as the
/// field stepper.
pub fn ssprk3_scalar(u: f64, dt: f64, f: impl Fn(f64) -> f64) -> f64 {
    let u1 = u + dt * f(u);
    let u2 = 0.75 * u + 0.25 * (u1 + dt * f(u1));
    u / 3.0 + 2.0 / 3.0 * (u2 + dt * f(u2))
}

/// Linear system `u' = A u`: one SSPRK3 step applied to a dense vector.
pub fn ssprk3_linear(a: &[Vec<f64>], u: &[f64], dt: f64) -> Vec<f64> {
    let apply = |v: &[f64]| -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
            .collect()
    };
    let stage = |v: &[f64]| -> Vec<f64> {
        let av = apply(v);
        v.iter().zip(&av).map(|(x, d)| x + dt * d).collect()
    };
    let u1 = stage(u);
    let e1 = stage(&u1);
    let u2: Vec<f64> = u
        .iter()
        .zip(&e1)
        .map(|(a, b)| 0.75 * a + 0.25 * b)
        .collect();
    let e2 = stage(&u2);
    u.iter()
        .zip(&e2)
        .map(|(a, b)| a / 3.0 + 2.0 / 3.0 * b)
        .collect()
}
