//! Front location on 1D profiles and rate-of-spread estimation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;

/// Direction in which the front is searched for: the outermost crossing seen
/// when walking in from the far end of the profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrontPosition {
    At(f64),
    /// Nothing reaches the threshold.
    Absent,
    /// The hot region touches the end of the profile in the search direction.
    Saturated,
}

impl FrontPosition {
    pub fn position(self) -> Option<f64> {
        match self {
            FrontPosition::At(x) => Some(x),
            _ => None,
        }
    }
}

/// Outermost crossing of `threshold` in `direction`, by linear interpolation
/// between the bracketing samples.
pub fn locate_front(
    xs: &[f64],
    values: &[f64],
    threshold: f64,
    direction: Direction,
) -> Result<FrontPosition> {
    if xs.len() != values.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} coordinates for {} values",
            xs.len(),
            values.len()
        )));
    }
    let n = values.len();
    let hot = |k: usize| values[k] >= threshold;
    let last_hot = match direction {
        Direction::Increasing => (0..n).rev().find(|&k| hot(k)),
        Direction::Decreasing => (0..n).find(|&k| hot(k)),
    };
    let Some(k) = last_hot else {
        return Ok(FrontPosition::Absent);
    };
    let next = match direction {
        Direction::Increasing if k + 1 < n => k + 1,
        Direction::Decreasing if k > 0 => k - 1,
        _ => return Ok(FrontPosition::Saturated),
    };
    let (t0, t1) = (values[k], values[next]);
    let w = (t0 - threshold) / (t0 - t1);
    Ok(FrontPosition::At(xs[k] + w * (xs[next] - xs[k])))
}

/// Front along interior row `j` of a field (the x direction).
pub fn locate_front_row(
    f: &Field,
    j: usize,
    threshold: f64,
    direction: Direction,
) -> Result<FrontPosition> {
    let (xs, vals) = f.row(j);
    locate_front(&xs, &vals, threshold, direction)
}

/// Front along interior column `i` of a 2D field (the y direction).
pub fn locate_front_column(
    f: &Field,
    i: usize,
    threshold: f64,
    direction: Direction,
) -> Result<FrontPosition> {
    let (ys, vals) = f.column(i);
    locate_front(&ys, &vals, threshold, direction)
}

pub const MIN_FIT_SAMPLES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedFit {
    pub speed: f64,
    pub intercept: f64,
    /// RMS deviation of the samples from the fitted line.
    pub residual: f64,
    pub samples: usize,
}

/// Time series of front positions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace {
    samples: Vec<(f64, f64)>,
}

impl FrontTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_samples(samples: Vec<(f64, f64)>) -> Result<Self> {
        let mut t = FrontTrace::new();
        for (time, x) in samples {
            t.push(time, x)?;
        }
        Ok(t)
    }

    /// Appends a sample; times must be strictly increasing.
    pub fn push(&mut self, time: f64, position: f64) -> Result<()> {
        if !time.is_finite() || !position.is_finite() {
            return Err(Error::NonFinite("front sample"));
        }
        if let Some(&(last, _)) = self.samples.last() {
            if time <= last {
                return Err(Error::param(
                    "front.time",
                    format!("sample at {time} does not follow {last}"),
                ));
            }
        }
        self.samples.push((time, position));
        Ok(())
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Writes `time,position,speed_to_date`; the running speed is the fit
    /// over all samples so far and empty until enough samples exist.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "time,position,speed_to_date")?;
        for n in 0..self.samples.len() {
            let (t, x) = self.samples[n];
            let speed = fit_line(&self.samples[..=n]).map(|f| f.speed);
            match speed {
                Ok(s) => writeln!(w, "{t:.17e},{x:.17e},{s:.17e}")?,
                Err(_) => writeln!(w, "{t:.17e},{x:.17e},")?,
            }
        }
        Ok(())
    }
}

/// Least-squares slope of position against time over samples with
/// `window.0 <= t <= window.1`.
pub fn estimate_speed(trace: &FrontTrace, window: (f64, f64)) -> Result<SpeedFit> {
    let inside: Vec<(f64, f64)> = trace
        .samples
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect();
    fit_line(&inside)
}

fn fit_line(pts: &[(f64, f64)]) -> Result<SpeedFit> {
    let n = pts.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            have: n,
            need: MIN_FIT_SAMPLES,
        });
    }
    let nf = n as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let xm = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let stt: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let stx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - xm)).sum();
    let speed = stx / stt;
    let intercept = xm - speed * tm;
    let ss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - speed * p.0).powi(2))
        .sum();
    Ok(SpeedFit {
        speed,
        intercept,
        residual: (ss / nf).sqrt(),
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    #[test]
    fn midpoint_crossing() {
        let p = locate_front(&[0.0, 1.0], &[800.0, 200.0], 500.0, Direction::Increasing).unwrap();
        assert_eq!(p, FrontPosition::At(0.5));
    }

    #[test]
    fn ambient_has_no_front() {
        let p = locate_front(&[0.0, 1.0, 2.0], &[300.0; 3], 500.0, Direction::Increasing).unwrap();
        assert_eq!(p, FrontPosition::Absent);
    }

    #[test]
    fn hot_everywhere_is_saturated() {
        let xs = [0.0, 1.0, 2.0];
        for d in [Direction::Increasing, Direction::Decreasing] {
            assert_eq!(
                locate_front(&xs, &[900.0; 3], 500.0, d).unwrap(),
                FrontPosition::Saturated
            );
        }
    }

    #[test]
    fn picks_outermost_crossing() {
        let xs: Vec<f64> = (0..7).map(f64::from).collect();
        let t = [300.0, 700.0, 300.0, 300.0, 700.0, 300.0, 300.0];
        let right = locate_front(&xs, &t, 500.0, Direction::Increasing).unwrap();
        let left = locate_front(&xs, &t, 500.0, Direction::Decreasing).unwrap();
        assert_eq!(right, FrontPosition::At(4.5));
        assert_eq!(left, FrontPosition::At(0.5));
    }

    #[test]
    fn gaussian_crossing_within_dx_squared() {
        let (t_inf, a, x0, thr) = (300.0f64, 400.0f64, 3.0, 500.0f64);
        // analytic: a·exp(−(x−x0)²) = thr − T∞
        let exact = x0 + (a / (thr - t_inf)).ln().sqrt();
        for dx in [0.1, 0.05, 0.025] {
            let n = (10.0 / dx) as usize;
            let g = Grid::new_1d(n, dx, 0.0).unwrap();
            let f = Field::from_fn(g, |x, _| t_inf + a * (-(x - x0).powi(2)).exp());
            let got = locate_front_row(&f, 0, thr, Direction::Increasing)
                .unwrap()
                .position()
                .unwrap();
            assert!((got - exact).abs() < dx * dx, "dx={dx}: {got} vs {exact}");
        }
    }

    #[test]
    fn column_search_in_2d() {
        let g = Grid::new_2d(4, 10, 1.0, 1.0, 0.0, 0.0).unwrap();
        let f = Field::from_fn(g, |_, y| if y < 4.0 { 900.0 } else { 300.0 });
        let p = locate_front_column(&f, 2, 600.0, Direction::Increasing).unwrap();
        // cell centres at 3.5 (hot) and 4.5 (cold)
        assert_eq!(p, FrontPosition::At(4.0));
    }

    #[test]
    fn exact_line_fits_with_zero_residual() {
        let tr =
            FrontTrace::from_samples((0..8).map(|k| (k as f64, 1.0 + 2.0 * k as f64)).collect())
                .unwrap();
        let f = estimate_speed(&tr, (0.0, 10.0)).unwrap();
        assert!((f.speed - 2.0).abs() < 1e-14);
        assert!(f.residual < 1e-12);
        let still = FrontTrace::from_samples((0..6).map(|k| (k as f64, 4.0)).collect()).unwrap();
        assert_eq!(estimate_speed(&still, (0.0, 10.0)).unwrap().speed, 0.0);
    }

    #[test]
    fn too_few_samples_rejected() {
        let tr = FrontTrace::from_samples((0..8).map(|k| (k as f64, k as f64)).collect()).unwrap();
        assert!(matches!(
            estimate_speed(&tr, (0.0, 3.0)),
            Err(Error::InsufficientSamples { have: 4, need: 5 })
        ));
    }

    #[test]
    fn times_must_increase() {
        let mut tr = FrontTrace::new();
        tr.push(1.0, 0.0).unwrap();
        assert!(tr.push(1.0, 0.5).is_err());
        assert!(tr.push(0.5, 0.5).is_err());
    }

    #[test]
    fn noisy_slope_within_confidence() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sigma = 0.05;
        let n = 200;
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let t = k as f64 * 0.1;
                // uniform noise scaled to standard deviation sigma
                let e: f64 = (rng.gen::<f64>() - 0.5) * sigma * 12f64.sqrt();
                (t, 3.0 - 1.5 * t + e)
            })
            .collect();
        let tr = FrontTrace::from_samples(samples.clone()).unwrap();
        let fit = estimate_speed(&tr, (f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        let tm = samples.iter().map(|p| p.0).sum::<f64>() / n as f64;
        let stt: f64 = samples.iter().map(|p| (p.0 - tm).powi(2)).sum();
        let se = sigma / stt.sqrt();
        assert!(
            (fit.speed + 1.5).abs() < 3.0 * se,
            "{} vs -1.5 (se {se})",
            fit.speed
        );
        assert!((fit.residual - sigma).abs() < 0.3 * sigma);
    }

    #[test]
    fn csv_has_running_speed() {
        let tr =
            FrontTrace::from_samples((0..6).map(|k| (k as f64, 2.0 * k as f64)).collect()).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time,position,speed_to_date");
        assert!(lines[1].ends_with(','));
        let last: Vec<f64> = lines[6].split(',').map(|s| s.parse().unwrap()).collect();
        assert!((last[2] - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn translation_equivariant(shift in 0usize..20, centre in 15.0f64..25.0) {
            let dx = 0.25;
            let xs: Vec<f64> = (0..200).map(|k| (k as f64 + 0.5) * dx).collect();
            let prof = |x: f64| 300.0 + 500.0 * (-(x - centre).powi(2) / 4.0).exp();
            let base: Vec<f64> = xs.iter().map(|&x| prof(x)).collect();
            let moved: Vec<f64> = xs.iter().map(|&x| prof(x - shift as f64 * dx)).collect();
            let a = locate_front(&xs, &base, 500.0, Direction::Increasing).unwrap().position().unwrap();
            let b = locate_front(&xs, &moved, 500.0, Direction::Increasing).unwrap().position().unwrap();
            prop_assert!((b - a - shift as f64 * dx).abs() < 1e-9);
        }

        #[test]
        fn speed_shift_and_scale(offset in -50.0f64..50.0, scale in 0.1f64..10.0,
                                 xs in proptest::collection::vec(-5.0f64..5.0, 6..20)) {
            let base: Vec<(f64, f64)> = xs.iter().enumerate().map(|(k, &x)| (k as f64, x)).collect();
            let f0 = fit_line(&base).unwrap();
            let shifted: Vec<(f64, f64)> = base.iter().map(|&(t, x)| (t, x + offset)).collect();
            let f1 = fit_line(&shifted).unwrap();
            prop_assert!((f1.speed - f0.speed).abs() < 1e-9);
            let stretched: Vec<(f64, f64)> = base.iter().map(|&(t, x)| (t * scale, x)).collect();
            let f2 = fit_line(&stretched).unwrap();
            prop_assert!((f2.speed * scale - f0.speed).abs() < 1e-9 * (1.0 + f0.speed.abs()));
        }
    }
}
