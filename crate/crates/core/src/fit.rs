//! Small least-squares helpers: polynomial fits, straight lines and the
//! period of a noisy oscillation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Least-squares coefficients of `y ~ sum_j c_j ((x - center) / scale)^{p_j}`.
///
/// Coefficients are returned in the unscaled variable `x - center`, i.e. the
/// `j`-th entry multiplies `(x - center)^{p_j}`.
pub fn polyfit(xs: &[f64], ys: &[f64], powers: &[u32], center: f64, scale: f64) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::InsufficientData(format!(
            "{} abscissae but {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < powers.len() || powers.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{} samples for {} coefficients",
            xs.len(),
            powers.len()
        )));
    }
    if !(scale > 0.0) {
        return Err(Error::config("scale", "must be positive"));
    }
    let m = DMatrix::from_fn(xs.len(), powers.len(), |i, j| {
        ((xs[i] - center) / scale).powi(powers[j] as i32)
    });
    let b = DVector::from_column_slice(ys);
    let svd = m.svd(true, true);
    let sol = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::InsufficientData(format!("least squares failed: {e}")))?;
    Ok(powers
        .iter()
        .zip(sol.iter())
        .map(|(&p, c)| c / scale.powi(p as i32))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms: f64,
    /// Standard error of the slope.
    pub slope_err: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n != ys.len() || n < 3 {
        return Err(Error::InsufficientData(format!(
            "linear fit needs >= 3 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        rms: (ss / nf).sqrt(),
        slope_err: (ss / (nf - 2.0) / sxx).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    pub period: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub rms: f64,
}

struct Harmonic {
    ss: f64,
    offset: f64,
    amplitude: f64,
    slope: f64,
}

/// Best `c [+ s t] + a cos(w t) + b sin(w t)` at fixed `w`.
fn harmonic_fit(ts: &[f64], ys: &[f64], w: f64, with_slope: bool) -> Harmonic {
    let cols = if with_slope { 4 } else { 3 };
    let t0 = ts[0];
    let span = (ts[ts.len() - 1] - t0).max(f64::MIN_POSITIVE);
    let m = DMatrix::from_fn(ts.len(), cols, |i, j| match j {
        0 => 1.0,
        1 => (w * ts[i]).cos(),
        2 => (w * ts[i]).sin(),
        _ => (ts[i] - t0) / span,
    });
    let b = DVector::from_column_slice(ys);
    let Ok(sol) = m.clone().svd(true, true).solve(&b, 1e-14) else {
        return Harmonic {
            ss: f64::INFINITY,
            offset: 0.0,
            amplitude: 0.0,
            slope: 0.0,
        };
    };
    let r = &m * &sol - &b;
    let slope = if with_slope { sol[3] / span } else { 0.0 };
    Harmonic {
        ss: r.norm_squared(),
        offset: sol[0] - slope * t0,
        amplitude: sol[1].hypot(sol[2]),
        slope,
    }
}

fn sinusoid_residual(ts: &[f64], ys: &[f64], w: f64) -> (f64, f64, f64) {
    let h = harmonic_fit(ts, ys, w, false);
    (h.ss, h.offset, h.amplitude)
}

/// Golden-section minimum of `f` on `[lo, hi]`.
fn golden_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let scale = hi.abs().max(lo.abs());
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (hi - lo) < 1e-13 * scale {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftFit {
    pub velocity: f64,
    pub period: f64,
    pub amplitude: f64,
    pub rms: f64,
}

/// Fit `c + v t + a cos(w t) + b sin(w t)`, searching `w` within 30% of
/// `w_guess`. Separates a steady drift from a superposed oscillation that a
/// straight-line fit over a non-integer number of periods would alias into
/// the slope.
pub fn fit_drift(ts: &[f64], ys: &[f64], w_guess: f64) -> Result<DriftFit> {
    let n = ts.len();
    if n != ys.len() || n < 8 {
        return Err(Error::InsufficientData(format!(
            "drift fit needs >= 8 samples, got {n}"
        )));
    }
    if !(w_guess > 0.0) {
        return Err(Error::config("w_guess", "must be positive"));
    }
    let w = golden_min(0.7 * w_guess, 1.3 * w_guess, |w| harmonic_fit(ts, ys, w, true).ss);
    let h = harmonic_fit(ts, ys, w, true);
    Ok(DriftFit {
        velocity: h.slope,
        period: 2.0 * std::f64::consts::PI / w,
        amplitude: h.amplitude,
        rms: (h.ss / n as f64).sqrt(),
    })
}

/// Period of a sampled oscillation. A zero-crossing estimate is refined by
/// minimising the residual of a sinusoid-plus-offset fit over the frequency.
pub fn fit_period(ts: &[f64], ys: &[f64]) -> Result<SinusoidFit> {
    let n = ts.len();
    if n != ys.len() || n < 8 {
        return Err(Error::InsufficientData(format!(
            "period fit needs >= 8 samples, got {n}"
        )));
    }
    let mean = ys.iter().sum::<f64>() / n as f64;
    let mut ups = Vec::new();
    for i in 1..n {
        let (a, b) = (ys[i - 1] - mean, ys[i] - mean);
        if a < 0.0 && b >= 0.0 {
            ups.push(ts[i - 1] + (ts[i] - ts[i - 1]) * (-a) / (b - a));
        }
    }
    let mut downs = Vec::new();
    for i in 1..n {
        let (a, b) = (ys[i - 1] - mean, ys[i] - mean);
        if a > 0.0 && b <= 0.0 {
            downs.push(ts[i - 1] + (ts[i] - ts[i - 1]) * a / (a - b));
        }
    }
    let mut crossings: Vec<f64> = ups.iter().chain(&downs).copied().collect();
    crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if crossings.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} mean crossings; sample at least one full period",
            crossings.len()
        )));
    }
    let guess = 2.0 * (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
    let w0 = 2.0 * std::f64::consts::PI / guess;

    let w = golden_min(0.8 * w0, 1.2 * w0, |w| sinusoid_residual(ts, ys, w).0);
    let (ss, offset, amplitude) = sinusoid_residual(ts, ys, w);
    Ok(SinusoidFit {
        period: 2.0 * std::f64::consts::PI / w,
        amplitude,
        offset,
        rms: (ss / n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn polyfit_recovers_even_polynomial() {
        let xs: Vec<f64> = (0..201).map(|i| -25.0 + 0.25 * i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| 0.125 + 3e-10 * x * x - 2e-8 * x.powi(4))
            .collect();
        let c = polyfit(&xs, &ys, &[0, 2, 4, 6], 0.0, 25.0).unwrap();
        assert!((c[0] - 0.125).abs() < 1e-14);
        assert!((c[1] - 3e-10).abs() < 1e-18);
        assert!((c[2] + 2e-8).abs() < 1e-20);
        assert!(c[3].abs() < 1e-22);
    }

    #[test]
    fn polyfit_rejects_underdetermined() {
        assert!(polyfit(&[1.0, 2.0], &[1.0, 2.0], &[0, 1, 2], 0.0, 1.0).is_err());
        assert!(polyfit(&[1.0, 2.0], &[1.0], &[0], 0.0, 1.0).is_err());
    }

    #[test]
    fn line_through_points() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-15);
        assert!(f.rms < 1e-15);
        assert!(linear_fit(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn period_of_clean_sinusoid() {
        let ts: Vec<f64> = (0..400).map(|i| i as f64 * 4.0).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.0 + 5.0 * (t * 0.01 + 0.3).sin()).collect();
        let f = fit_period(&ts, &ys).unwrap();
        assert!((f.period - 628.318_530_717_958_6).abs() < 1e-6, "{}", f.period);
        assert!((f.amplitude - 5.0).abs() < 1e-9);
        assert!((f.offset - 2.0).abs() < 1e-9);
    }

    #[test]
    fn period_needs_oscillation() {
        let ts: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert!(fit_period(&ts, &ts).is_err());
    }

    #[test]
    fn drift_separated_from_oscillation() {
        // 1.3 periods: a plain line fit is biased by the oscillation
        let ts: Vec<f64> = (0..300).map(|i| i as f64 * 2.7).collect();
        let ys: Vec<f64> = ts
            .iter()
            .map(|t| 3.0 - 0.01 * t + 4.0 * (0.0105 * t + 1.0).sin())
            .collect();
        let line = linear_fit(&ts, &ys).unwrap();
        assert!((line.slope + 0.01).abs() > 1e-4);
        let f = fit_drift(&ts, &ys, 0.01).unwrap();
        assert!((f.velocity + 0.01).abs() < 1e-10, "{}", f.velocity);
        assert!((f.period - std::f64::consts::TAU / 0.0105).abs() < 1e-6);
        assert!((f.amplitude - 4.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn line_fit_is_exact_on_lines(m in -10.0f64..10.0, b in -10.0f64..10.0) {
            let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
            let ys: Vec<f64> = xs.iter().map(|x| m * x + b).collect();
            let f = linear_fit(&xs, &ys).unwrap();
            prop_assert!((f.slope - m).abs() < 1e-12 && (f.intercept - b).abs() < 1e-11);
        }

        #[test]
        fn period_fit_tolerates_phase(p in 50.0f64..200.0, phi in 0.0f64..6.28) {
            let ts: Vec<f64> = (0..300).map(|i| i as f64 * p / 40.0).collect();
            let ys: Vec<f64> = ts.iter().map(|t| (std::f64::consts::TAU * t / p + phi).cos()).collect();
            let f = fit_period(&ts, &ys).unwrap();
            prop_assert!((f.period - p).abs() < 1e-6 * p);
        }
    }
}
