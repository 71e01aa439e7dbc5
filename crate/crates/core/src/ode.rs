//! Adaptive Dormand-Prince 5(4) integrator with event location, used by the
//! travelling-wave shooting method.

/// Why an integration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    /// Reached the requested end point.
    End,
    /// Event `k` changed sign; the returned state sits on the event surface.
    Event(usize),
    /// Step budget exhausted.
    MaxSteps,
    /// Step size underflowed (the solution is blowing up or the problem is
    /// too stiff for an explicit method).
    StepUnderflow,
}

#[derive(Clone, Copy, Debug)]
pub struct Outcome<const N: usize> {
    pub s: f64,
    pub y: [f64; N],
    pub stop: Stop,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Dopri5<const N: usize> {
    pub rtol: f64,
    pub atol: [f64; N],
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (w, k) in terms {
        for i in 0..N {
            out[i] += h * w * k[i];
        }
    }
    out
}

impl<const N: usize> Dopri5<N> {
    pub fn new(rtol: f64, atol: [f64; N]) -> Self {
        Dopri5 {
            rtol,
            atol,
            h_init: 1e-3,
            h_max: f64::INFINITY,
            max_steps: 200_000,
        }
    }

    /// One step of size `h`: returns the fifth-order solution and the
    /// embedded error estimate.
    fn step(
        &self,
        f: &impl Fn(f64, &[f64; N]) -> [f64; N],
        s: f64,
        y: &[f64; N],
        h: f64,
    ) -> ([f64; N], [f64; N]) {
        let k1 = f(s, y);
        let k2 = f(s + C2 * h, &lin(y, h, &[(A21, &k1)]));
        let k3 = f(s + C3 * h, &lin(y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            s + C4 * h,
            &lin(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            s + C5 * h,
            &lin(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            s + h,
            &lin(
                y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = lin(
            y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = f(s + h, &y_new);
        let mut err = [0.0; N];
        for i in 0..N {
            err[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        (y_new, err)
    }

    fn error_norm(&self, y: &[f64; N], y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = self.atol[i] + self.rtol * y[i].abs().max(y_new[i].abs());
            acc += (err[i] / sc).powi(2);
        }
        (acc / N as f64).sqrt()
    }

    /// Integrate `y' = f(s, y)` from `s0` towards `s_end`, stopping at the
    /// first sign change of any event function.
    pub fn integrate(
        &self,
        f: impl Fn(f64, &[f64; N]) -> [f64; N],
        s0: f64,
        y0: [f64; N],
        s_end: f64,
        events: &[&dyn Fn(&[f64; N]) -> f64],
    ) -> Outcome<N> {
        let dir = if s_end >= s0 { 1.0 } else { -1.0 };
        let mut s = s0;
        let mut y = y0;
        let mut h = self.h_init.min(self.h_max).min((s_end - s0).abs());
        let mut g_old: Vec<f64> = events.iter().map(|e| e(&y)).collect();
        let mut steps = 0;
        while (s_end - s) * dir > 0.0 {
            if steps >= self.max_steps {
                return Outcome {
                    s,
                    y,
                    stop: Stop::MaxSteps,
                    steps,
                };
            }
            h = h.min((s_end - s).abs());
            if h < 1e-14 * s.abs().max(1.0) {
                return Outcome {
                    s,
                    y,
                    stop: Stop::StepUnderflow,
                    steps,
                };
            }
            let (y_new, err) = self.step(&f, s, &y, dir * h);
            let norm = self.error_norm(&y, &y_new, &err);
            steps += 1;
            if !norm.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                h *= 0.2;
                continue;
            }
            if norm > 1.0 {
                h *= (0.9 * norm.powf(-0.2)).max(0.2);
                continue;
            }
            // accepted; look for events inside the step
            for (k, e) in events.iter().enumerate() {
                let g_new = e(&y_new);
                if g_old[k] != 0.0 && g_old[k].signum() != g_new.signum() {
                    let (s_ev, y_ev) = self.locate(&f, s, &y, dir * h, *e, g_old[k]);
                    return Outcome {
                        s: s_ev,
                        y: y_ev,
                        stop: Stop::Event(k),
                        steps,
                    };
                }
            }
            s += dir * h;
            y = y_new;
            for (k, e) in events.iter().enumerate() {
                g_old[k] = e(&y);
            }
            let grow = if norm == 0.0 {
                5.0
            } else {
                (0.9 * norm.powf(-0.2)).min(5.0)
            };
            h = (h * grow).min(self.h_max);
        }
        Outcome {
            s,
            y,
            stop: Stop::End,
            steps,
        }
    }

    /// Bisection on the step length for the crossing of `event` inside an
    /// accepted step.
    fn locate(
        &self,
        f: &impl Fn(f64, &[f64; N]) -> [f64; N],
        s: f64,
        y: &[f64; N],
        h: f64,
        event: &dyn Fn(&[f64; N]) -> f64,
        g0: f64,
    ) -> (f64, [f64; N]) {
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut y_hi = self.step(f, s, y, h).0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let y_mid = self.step(f, s, y, mid * h).0;
            if event(&y_mid).signum() == g0.signum() {
                lo = mid;
            } else {
                hi = mid;
                y_hi = y_mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        (s + hi * h, y_hi)
    }
}
