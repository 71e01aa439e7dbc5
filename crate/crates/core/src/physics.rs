//! Pointwise physical closures of the ADR model.
//!
//! Every function here is pure and cheap, so the field operators call them
//! per cell. Temperatures are absolute (kelvin in SI runs); the reduced
//! preset uses the same code with nondimensional values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, VectorField};

/// Physical constants of the energy and fuel equations.
///
/// `h` is a volumetric heat-exchange coefficient [W/(m³·K)]: the energy
/// equation divides it by `rho * c`. In the reduced preset `rho = c = 1`, so
/// it coincides with the rate in `(Δ - h) T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParameters {
    /// Bulk density [kg/m³].
    pub rho: f64,
    /// Specific heat [J/(kg·K)].
    pub c: f64,
    /// Heat conduction coefficient [W/(m·K)].
    pub k: f64,
    /// Emissivity factor.
    pub epsilon: f64,
    /// Optical path length [m].
    pub delta: f64,
    /// Stefan-Boltzmann constant [W/(m²·K⁴)].
    pub sigma: f64,
    /// Heat exchange coefficient with the environment.
    pub h: f64,
    /// Ambient temperature [K].
    pub t_inf: f64,
    /// Heating value [J/kg].
    pub s: f64,
    /// Arrhenius pre-exponential factor [1/s].
    pub a: f64,
    /// Activation temperature [K].
    pub t_ac: f64,
    /// Ignition temperature [K].
    pub t_bar: f64,
    /// Linearised rate coefficient [1/(s·K)].
    pub a_l: f64,
    /// Constant combustion rate [1/s].
    pub psi_const: f64,
}

pub const STEFAN_BOLTZMANN: f64 = 5.670_374_419e-8;

impl Default for ModelParameters {
    fn default() -> Self {
        Self::validation()
    }
}

impl ModelParameters {
    /// The shipped validation set: constant conductivity, moderate cooling,
    /// linearised combustion scale chosen so fronts move at O(1) speed on
    /// O(1) lengths.
    pub fn validation() -> Self {
        ModelParameters {
            rho: 1.0,
            c: 1.0,
            k: 1.0,
            epsilon: 0.0,
            delta: 0.0,
            sigma: STEFAN_BOLTZMANN,
            h: 0.1,
            t_inf: 300.0,
            s: 1000.0,
            a: 1.0,
            t_ac: 400.0,
            t_bar: 500.0,
            a_l: 1e-3,
            psi_const: 1.0,
        }
    }

    /// Nondimensional reduced model: `rho = c = k = A = S = T_ac = 1`,
    /// no radiation, ignition and ambient temperatures at zero.
    pub fn reduced_weber(h: f64) -> Self {
        ModelParameters {
            rho: 1.0,
            c: 1.0,
            k: 1.0,
            epsilon: 0.0,
            delta: 0.0,
            sigma: STEFAN_BOLTZMANN,
            h,
            t_inf: 0.0,
            s: 1.0,
            a: 1.0,
            t_ac: 1.0,
            t_bar: 0.0,
            a_l: 1.0,
            psi_const: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("c", self.c),
            ("k", self.k),
            ("sigma", self.sigma),
            ("t_ac", self.t_ac),
            ("a_l", self.a_l),
            ("psi_const", self.psi_const),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        // A = 0 switches combustion off; T_inf = 0 is the reduced preset.
        let non_negative = [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("h", self.h),
            ("t_inf", self.t_inf),
            ("t_bar", self.t_bar),
            ("a", self.a),
            ("s", self.s),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Radiative coefficient `4·ε·δ·σ`; zero means `K(T) = k`.
    #[inline]
    pub fn radiative_coefficient(&self) -> f64 {
        4.0 * self.epsilon * self.delta * self.sigma
    }
}

/// Gas/solid phase properties for the two-phase bulk velocity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoPhaseParameters {
    /// Fuel volume fraction.
    pub r_f: f64,
    pub rho_a: f64,
    pub rho_f: f64,
    pub cp_a: f64,
    pub cp_f: f64,
}

impl TwoPhaseParameters {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.r_f) {
            return Err(Error::param(
                "r_f",
                format!("must lie in [0, 1], got {}", self.r_f),
            ));
        }
        for (name, v) in [
            ("rho_a", self.rho_a),
            ("rho_f", self.rho_f),
            ("cp_a", self.cp_a),
            ("cp_f", self.cp_f),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Simplest apparent-heat-capacity moisture model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoistureParameters {
    /// Moisture content, water mass per dry fuel mass.
    pub m: f64,
    /// Specific heat of water.
    pub c_w: f64,
    /// Latent heat of evaporation.
    pub l_w: f64,
    /// Evaporation temperature.
    pub t_w: f64,
    /// Dry-fuel specific heat.
    pub cp_f0: f64,
    /// Tolerance of the unburned test `Y >= 1 - y_tol`.
    pub y_tol: f64,
}

impl Default for MoistureParameters {
    fn default() -> Self {
        MoistureParameters {
            m: 0.0,
            c_w: 4186.0,
            l_w: 2.26e6,
            t_w: 373.15,
            cp_f0: 1800.0,
            y_tol: 1e-9,
        }
    }
}

impl MoistureParameters {
    /// Water properties in the validation units, where the dry fuel heat
    /// capacity is 1: capacities and latent heat divided by 1800 J/(kg K).
    pub fn validation(m: f64) -> Self {
        let cp = 1800.0;
        MoistureParameters {
            m,
            c_w: 4186.0 / cp,
            l_w: 2.26e6 / cp,
            t_w: 373.15,
            cp_f0: 1.0,
            y_tol: 1e-9,
        }
    }

    pub fn validate(&self, p: &ModelParameters) -> Result<()> {
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::param("m", "moisture content must be non-negative"));
        }
        for (name, v) in [("c_w", self.c_w), ("l_w", self.l_w), ("cp_f0", self.cp_f0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.y_tol > 0.0 && self.y_tol < 1e-3) {
            return Err(Error::param("y_tol", "must satisfy 0 < y_tol << 1"));
        }
        if !(p.t_inf < self.t_w && self.t_w < p.t_bar) {
            return Err(Error::param(
                "t_w",
                format!(
                    "evaporation temperature must lie between t_inf = {} and t_bar = {}",
                    p.t_inf, p.t_bar
                ),
            ));
        }
        Ok(())
    }
}

/// Wind and terrain data of the virtual-wind advection model.
#[derive(Clone, Debug, PartialEq)]
pub struct AdvectionParameters {
    pub wind: VectorField,
    pub beta: f64,
    pub gamma: f64,
    pub terrain: Field,
}

impl AdvectionParameters {
    /// Cell-wise `β·w + γ·∇Z` with the slope from central differences. The
    /// terrain ghosts are used as given.
    pub fn velocity(&self) -> VectorField {
        let grad = crate::ops::gradient_central(&self.terrain);
        let mut v = VectorField::zeros(self.terrain.grid);
        for k in 0..v.x.data.len() {
            let w = [self.wind.x.data[k], self.wind.y.data[k]];
            let gz = [grad.x.data[k], grad.y.data[k]];
            let [vx, vy] = virtual_wind(w, gz, self.beta, self.gamma);
            v.x.data[k] = vx;
            v.y.data[k] = vy;
        }
        v
    }
}

/// Which combustion rate closes the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombustionSpec {
    ArrheniusHeaviside,
    /// Linear in excess temperature, switched on by the temperature memory.
    LinearizedMemory,
    ConstantFactor,
}

impl CombustionSpec {
    pub fn needs_memory(self) -> bool {
        matches!(self, CombustionSpec::LinearizedMemory)
    }

    /// Rate for temperature `t` and memory `theta` (ignored by the
    /// memoryless variants).
    #[inline]
    pub fn rate(self, t: f64, theta: f64, p: &ModelParameters) -> Result<f64> {
        match self {
            CombustionSpec::ArrheniusHeaviside => combustion_arrhenius(t, p),
            CombustionSpec::LinearizedMemory => combustion_linearized(t, theta, p),
            CombustionSpec::ConstantFactor => combustion_constant(t, p),
        }
    }
}

fn finite(v: f64, name: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(name))
    }
}

/// `K(T) = k + 4·ε·δ·σ·T³`.
#[inline]
pub fn diffusivity(t: f64, p: &ModelParameters) -> Result<f64> {
    let t = finite(t, "temperature")?;
    Ok(p.k + p.radiative_coefficient() * t * t * t)
}

/// Arrhenius rate behind a Heaviside ignition switch.
#[inline]
pub fn combustion_arrhenius(t: f64, p: &ModelParameters) -> Result<f64> {
    let t = finite(t, "temperature")?;
    if t <= 0.0 {
        return Err(Error::NonPositiveTemperature(t));
    }
    if t < p.t_bar {
        Ok(0.0)
    } else {
        Ok(p.a * (-p.t_ac / t).exp())
    }
}

/// Linearised rate `A_L·(T − T∞)` switched on once the memory temperature
/// has reached ignition. The excess is floored at zero so round-off below
/// ambient never produces a negative rate.
#[inline]
pub fn combustion_linearized(t: f64, theta: f64, p: &ModelParameters) -> Result<f64> {
    let t = finite(t, "temperature")?;
    let theta = finite(theta, "memory temperature")?;
    if theta >= p.t_bar {
        Ok(p.a_l * (t - p.t_inf).max(0.0))
    } else {
        Ok(0.0)
    }
}

/// Arrhenius exponential replaced by one: `Ψ_const·H(T − T̄)`.
#[inline]
pub fn combustion_constant(t: f64, p: &ModelParameters) -> Result<f64> {
    let t = finite(t, "temperature")?;
    Ok(if t >= p.t_bar { p.psi_const } else { 0.0 })
}

/// Temperature tendency of the reaction and cooling terms,
/// `(ρ·Ψ·S·Y − h·(T − T∞)) / (ρ·c_eff)`.
#[inline]
pub fn energy_source(t: f64, y: f64, psi: f64, p: &ModelParameters, c_eff: f64) -> Result<f64> {
    if !(c_eff > 0.0) {
        return Err(Error::param(
            "c_eff",
            format!("must be positive, got {c_eff}"),
        ));
    }
    Ok((p.rho * psi * p.s * y - p.h * (t - p.t_inf)) / (p.rho * c_eff))
}

/// Scalar factor in `v = factor · w` for the two-phase bulk velocity.
pub fn bulk_velocity_factor(tp: &TwoPhaseParameters) -> Result<f64> {
    let gas = tp.rho_a * tp.cp_a * (1.0 - tp.r_f);
    let solid = tp.rho_f * tp.cp_f * tp.r_f;
    let denom = solid + gas;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::param(
            "two_phase",
            "heat-capacity denominator vanishes",
        ));
    }
    Ok(gas / denom)
}

pub fn bulk_velocity(w: [f64; 2], tp: &TwoPhaseParameters) -> Result<[f64; 2]> {
    let f = bulk_velocity_factor(tp)?;
    Ok([f * w[0], f * w[1]])
}

/// `v = β·w + γ·∇Z`.
#[inline]
pub fn virtual_wind(w: [f64; 2], grad_z: [f64; 2], beta: f64, gamma: f64) -> [f64; 2] {
    [
        beta * w[0] + gamma * grad_z[0],
        beta * w[1] + gamma * grad_z[1],
    ]
}

/// Apparent specific heat: raised by the water heating and evaporation
/// term while the cell is unburned and below ignition, dry value otherwise.
#[inline]
pub fn effective_specific_heat(
    t: f64,
    y: f64,
    mp: &MoistureParameters,
    p: &ModelParameters,
) -> Result<f64> {
    let span = p.t_bar - p.t_inf;
    if !(span > 0.0) {
        return Err(Error::param(
            "t_bar",
            "ignition temperature must exceed ambient for the moisture model",
        ));
    }
    if t < p.t_bar && y >= 1.0 - mp.y_tol {
        Ok(mp.cp_f0 + mp.m * (mp.c_w * (mp.t_w - p.t_inf) + mp.l_w) / span)
    } else {
        Ok(mp.cp_f0)
    }
}

/// Running maximum `Θ ← max(Θ, T)` over every padded cell.
pub fn update_memory(theta: &mut Field, t: &Field) -> Result<()> {
    theta.check_shape(t, "update_memory")?;
    for (m, &v) in theta.data.iter_mut().zip(&t.data) {
        *m = m.max(v);
    }
    Ok(())
}
