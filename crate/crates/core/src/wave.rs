//! Travelling-wave speeds of the 1D model with linearised memory
//! combustion, computed by shooting on the wave-frame ODE system.
//!
//! In the frame `ξ = x − c·t` with excess temperature `U = T − T∞` and fuel
//! `V`, a right-moving wave satisfies
//!
//! ```text
//! k·U'' = ρ·c_p·(v − c)·U' + h·U − ρ·S·Ψ·V
//! −c·V' = −Ψ·V,        Ψ = A_L·U·H
//! ```
//!
//! where `H = 1` behind the ignition point and `0` ahead of it. The ignition
//! point is pinned at `ξ = 0` where `U = T̄ − T∞`. Ahead of it the solution
//! must decay to ambient, which leaves a single decaying direction; the
//! shooting integrates that branch through ignition into the burning zone
//! and measures whether the burned side over- or undershoots.
//!
//! Left-moving waves (`c < 0`) are handled by reflection `x → −x`, which maps
//! them to right-moving waves against the opposite advection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Stop};
use crate::physics::ModelParameters;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootingProblem {
    pub rho: f64,
    pub cp: f64,
    /// Constant conductivity (radiation off).
    pub k: f64,
    pub h: f64,
    pub t_inf: f64,
    pub t_bar: f64,
    pub s: f64,
    pub a_l: f64,
    /// Advection speed along x.
    pub v: f64,
    /// Unburned fuel fraction.
    pub y0: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    /// Number of candidate speeds in the coarse bracket scan.
    pub scan_points: usize,
    /// Factor by which the ahead tail has decayed at the seeding point.
    pub decay_factor: f64,
    pub rtol: f64,
    /// Maximum integration length behind the ignition point.
    pub burn_length: f64,
}

impl ShootingProblem {
    /// Problem for the given model constants; radiation is ignored.
    pub fn from_params(p: &ModelParameters, v: f64, y0: f64, c_lo: f64, c_hi: f64) -> Self {
        ShootingProblem {
            rho: p.rho,
            cp: p.c,
            k: p.k,
            h: p.h,
            t_inf: p.t_inf,
            t_bar: p.t_bar,
            s: p.s,
            a_l: p.a_l,
            v,
            y0,
            c_lo,
            c_hi,
            scan_points: 80,
            decay_factor: 1e8,
            rtol: 1e-8,
            burn_length: 400.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_lo < self.c_hi) {
            return Err(Error::param(
                "wave.c_lo",
                "bracket must satisfy c_lo < c_hi",
            ));
        }
        if !(self.y0 > 0.0) {
            return Err(Error::param("wave.y0", "unburned fuel must be positive"));
        }
        if !(self.t_bar > self.t_inf) {
            return Err(Error::param("wave.t_bar", "ignition must be above ambient"));
        }
        for (name, v) in [
            ("rho", self.rho),
            ("cp", self.cp),
            ("k", self.k),
            ("decay_factor", self.decay_factor - 1.0),
            ("rtol", self.rtol),
            ("burn_length", self.burn_length),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        if self.h < 0.0 || self.a_l < 0.0 || self.s < 0.0 {
            return Err(Error::param("wave", "h, a_l and s must be non-negative"));
        }
        if self.scan_points < 2 {
            return Err(Error::param("wave.scan_points", "need at least two points"));
        }
        Ok(())
    }

    /// Excess temperature at ignition.
    pub fn ignition_excess(&self) -> f64 {
        self.t_bar - self.t_inf
    }

    fn reflected(&self) -> Self {
        ShootingProblem {
            v: -self.v,
            ..*self
        }
    }

    /// Roots of `k·λ² − a·λ − q = 0` with `a = ρ·c_p·(v − c)`, as
    /// `(decaying-ahead, growing-ahead)`.
    fn linear_roots(&self, c: f64, q: f64) -> Option<(f64, f64)> {
        let a = self.rho * self.cp * (self.v - c);
        let disc = a * a + 4.0 * self.k * q;
        if disc < 0.0 {
            return None;
        }
        let r = disc.sqrt();
        Some(((a - r) / (2.0 * self.k), (a + r) / (2.0 * self.k)))
    }
}

/// Wave-frame derivatives of `(U, U', V)` with respect to `ξ`. `burning`
/// is the Heaviside memory factor.
pub fn tw_ode_rhs(state: &[f64; 3], c: f64, burning: bool, pb: &ShootingProblem) -> [f64; 3] {
    let [u, du, fuel] = *state;
    let psi = if burning { pb.a_l * u } else { 0.0 };
    let a = pb.rho * pb.cp * (pb.v - c);
    let d2u = (a * du + pb.h * u - pb.rho * pb.s * psi * fuel) / pb.k;
    [du, d2u, psi * fuel / c]
}

/// Detailed result of one shot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shot {
    pub mismatch: f64,
    /// Distance behind ignition where the trajectory left the admissible
    /// band, if it did.
    pub exit_distance: Option<f64>,
    /// Fuel left at the end of the trajectory.
    pub residual_fuel: f64,
}

/// Signed mismatch of candidate speed `c`.
///
/// Negative when the temperature behind the front falls below ambient (the
/// candidate is too slow), positive when it runs away (too fast). The
/// magnitude is `exp(−d/ℓ)` where `d` is the distance behind ignition at
/// which the trajectory leaves the admissible band and `ℓ` the decay length
/// of the tail ahead of the front, so the mismatch tends to zero
/// continuously at a root.
pub fn shoot(c: f64, pb: &ShootingProblem) -> Result<f64> {
    Ok(shoot_detailed(c, pb)?.mismatch)
}

pub fn shoot_detailed(c: f64, pb: &ShootingProblem) -> Result<Shot> {
    if c == 0.0 || !c.is_finite() {
        return Err(Error::param("c", "wave speed must be finite and non-zero"));
    }
    if c < 0.0 {
        return shoot_detailed(-c, &pb.reflected());
    }
    let u_ig = pb.ignition_excess();
    let (lam, _) = match pb.linear_roots(c, pb.h) {
        Some(r) => r,
        None => unreachable!("h >= 0 keeps the discriminant non-negative"),
    };
    if !(lam < 0.0) {
        // no decaying tail ahead: the front cannot outrun its own heat
        return Ok(Shot {
            mismatch: -1.0,
            exit_distance: Some(0.0),
            residual_fuel: pb.y0,
        });
    }
    let ell = 1.0 / lam.abs();

    let du_scale = u_ig * lam.abs().max(1e-12);
    let mut rk = Dopri5::new(
        pb.rtol,
        [pb.rtol * u_ig, pb.rtol * du_scale, pb.rtol * pb.y0],
    );
    rk.h_init = 1e-3 / lam.abs().max(1e-3);

    // integrate in s = −ξ, from the far field ahead towards the burned side
    let ahead = |_: f64, y: &[f64; 3]| neg(tw_ode_rhs(y, c, false, pb));
    let burn = |_: f64, y: &[f64; 3]| neg(tw_ode_rhs(y, c, true, pb));

    let u_seed = u_ig / pb.decay_factor;
    let seed = [u_seed, lam * u_seed, pb.y0];
    let tail_len = pb.decay_factor.ln() / lam.abs();
    let ignite = |y: &[f64; 3]| y[0] - u_ig;
    let first = rk.integrate(ahead, 0.0, seed, 4.0 * tail_len, &[&ignite]);
    if first.stop != Stop::Event(0) {
        return Err(Error::param(
            "wave",
            format!("tail integration did not reach ignition ({:?})", first.stop),
        ));
    }

    let cap = 1e3 * (u_ig + pb.s * pb.y0 / pb.cp);
    let below = |y: &[f64; 3]| y[0];
    let above = |y: &[f64; 3]| y[0] - cap;
    let second = rk.integrate(burn, 0.0, first.y, pb.burn_length, &[&below, &above]);
    let d = second.s;
    let fuel = second.y[2];
    let sign = match second.stop {
        Stop::Event(0) => -1.0,
        Stop::Event(_) => 1.0,
        Stop::StepUnderflow | Stop::MaxSteps => second.y[0].signum(),
        Stop::End => {
            // decompose the far state into the decaying and growing modes of
            // the linearisation with the residual fuel frozen
            let q = pb.h - pb.rho * pb.s * pb.a_l * fuel;
            let [u, du, _] = second.y;
            let growing = match pb.linear_roots(c, q) {
                Some((lm, lp)) if q > 0.0 => {
                    let b = (du - lp * u) / (lm - lp);
                    let a = (lm * u - du) / (lm - lp);
                    b / (a.abs() + b.abs()).max(f64::MIN_POSITIVE)
                }
                _ => u.signum(),
            };
            return Ok(Shot {
                mismatch: growing * (-d / ell).exp(),
                exit_distance: None,
                residual_fuel: fuel,
            });
        }
    };
    Ok(Shot {
        mismatch: sign * (-d / ell).exp(),
        exit_distance: Some(d),
        residual_fuel: fuel,
    })
}

fn neg(v: [f64; 3]) -> [f64; 3] {
    [-v[0], -v[1], -v[2]]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveRoot {
    pub speed: f64,
    /// |mismatch| at the returned speed.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveSpeedReport {
    pub problem: ShootingProblem,
    /// Admissible (stable-orientation) speeds.
    pub roots: Vec<WaveRoot>,
    /// Roots with the opposite orientation: the unstable slow branch paired
    /// with each admissible wave.
    pub unstable: Vec<WaveRoot>,
    /// Coarse scan `(c, mismatch)`.
    pub scan: Vec<(f64, f64)>,
}

/// Candidate speeds of the coarse scan; zero is excluded.
fn scan_grid(pb: &ShootingProblem) -> Vec<f64> {
    let n = pb.scan_points;
    (0..n)
        .map(|i| pb.c_lo + (pb.c_hi - pb.c_lo) * i as f64 / (n - 1) as f64)
        .filter(|c| c.abs() > 1e-9 * (pb.c_hi - pb.c_lo))
        .collect()
}

/// All admissible wave speeds in the bracket, sorted ascending.
///
/// Sign changes of the mismatch between neighbouring scan points of the same
/// sign of `c` are refined by bisection to `1e−6·(c_hi − c_lo)`. A root is
/// admissible when a slightly faster front overshoots and a slightly slower
/// one undershoots (measured in the direction of travel); roots with the
/// opposite orientation belong to the unstable branch and go to `unstable`.
pub fn find_wave_speeds(pb: &ShootingProblem) -> Result<WaveSpeedReport> {
    pb.validate()?;
    let cs = scan_grid(pb);
    let ms: Vec<f64> = cs
        .par_iter()
        .map(|&c| shoot(c, pb))
        .collect::<Result<_>>()?;
    let tol = 1e-6 * (pb.c_hi - pb.c_lo);
    let brackets: Vec<(f64, f64, f64, f64)> = cs
        .windows(2)
        .zip(ms.windows(2))
        .filter(|(c, m)| c[0].signum() == c[1].signum() && m[0].signum() != m[1].signum())
        .map(|(c, m)| (c[0], c[1], m[0], m[1]))
        .collect();
    let found: Vec<(WaveRoot, bool)> = brackets
        .par_iter()
        .map(|&(lo, hi, m_lo, _)| {
            let stable = (m_lo < 0.0) == (lo > 0.0);
            Ok((bisect(pb, lo, hi, m_lo, tol)?, stable))
        })
        .collect::<Result<_>>()?;
    let mut roots: Vec<WaveRoot> = found.iter().filter(|r| r.1).map(|r| r.0).collect();
    let mut unstable: Vec<WaveRoot> = found.iter().filter(|r| !r.1).map(|r| r.0).collect();
    roots.sort_by(|a, b| a.speed.total_cmp(&b.speed));
    unstable.sort_by(|a, b| a.speed.total_cmp(&b.speed));
    Ok(WaveSpeedReport {
        problem: *pb,
        roots,
        unstable,
        scan: cs.into_iter().zip(ms).collect(),
    })
}

fn bisect(pb: &ShootingProblem, mut lo: f64, mut hi: f64, m_lo: f64, tol: f64) -> Result<WaveRoot> {
    let s_lo = m_lo.signum();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let m = shoot(mid, pb)?;
        if m.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let speed = 0.5 * (lo + hi);
    Ok(WaveRoot {
        speed,
        residual: shoot(speed, pb)?.abs(),
    })
}

/// Advection speed above which only one wave survives, by bisection on the
/// root count between `v_two` (two roots) and `v_one` (one root).
pub fn slow_wave_cutoff(
    pb: &ShootingProblem,
    mut v_two: f64,
    mut v_one: f64,
    tol: f64,
) -> Result<f64> {
    let count = |v: f64| -> Result<usize> {
        Ok(find_wave_speeds(&ShootingProblem { v, ..*pb })?.roots.len())
    };
    if count(v_two)? != 2 || count(v_one)? != 1 {
        return Err(Error::param(
            "wave",
            "cutoff search needs two roots at the lower and one at the upper speed",
        ));
    }
    while (v_one - v_two).abs() > tol {
        let mid = 0.5 * (v_two + v_one);
        if count(mid)? >= 2 {
            v_two = mid;
        } else {
            v_one = mid;
        }
    }
    Ok(0.5 * (v_two + v_one))
}
