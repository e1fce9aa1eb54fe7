//! Acceptance checks on the canonical configuration (sigma0 = 10,
//! delta_x = 1, k_p = k_c = 1/2, so a = 25 and k = 1; frozen widths;
//! compensated trap).
//!
//! Each `measure_*` function returns raw numbers; [`run_check`] compares them
//! against the fixed tolerances below and produces one PASS/FAIL line.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use crate::adiabaticity::{adiabaticity_report, MotionSpec};
use crate::beams::{ratio_field, BeamPairConfig};
use crate::dynamics::{run_cyclotron, run_hall_drift, time_reversal_fidelity, DynamicsSetup};
use crate::error::Result;
use crate::fit::polyfit;
use crate::gauge::{
    field_scales, flux_through, gauge_potential_peak, magnetic_field_analytic, scalar_potential,
    scalar_potential_analytic, vector_potential, LineProfile, TrapSpec,
};
use crate::grid::{curl_z, gradient, make_grid, ScalarField2D};
use crate::spectrum::{landau_analysis, SpectrumConfig};
use crate::units::{SiAdapter, RB87_MASS_KG};

/// Identifiers and titles of all checks, in order.
pub const CHECKS: [(u32, &str); 8] = [
    (1, "closed-form fields"),
    (2, "peak values"),
    (3, "quadratic cancellation"),
    (4, "flux quantization"),
    (5, "landau levels"),
    (6, "dynamics"),
    (7, "adiabaticity"),
    (8, "trivial limits"),
];

pub mod tol {
    pub const B_REL_LINF: f64 = 1e-6;
    pub const V_ABS_LINF: f64 = 1e-10;
    pub const FIELDS_SECONDS: f64 = 5.0;
    pub const PEAK: f64 = 1e-9;
    pub const QUADRATIC_REL: f64 = 1e-6;
    pub const QUARTIC_REL: f64 = 1e-2;
    pub const FLUX_REL: f64 = 1e-6;
    pub const SPACING_REL: f64 = 0.02;
    pub const FLATNESS_REL: f64 = 0.05;
    pub const OMEGA_RATIO: f64 = 0.9998;
    pub const OMEGA_RATIO_TOL: f64 = 1e-4;
    pub const LANDAU_SECONDS: f64 = 60.0;
    pub const NORM_DRIFT: f64 = 1e-10;
    pub const ENERGY_DRIFT: f64 = 1e-8;
    pub const PERIOD_REL: f64 = 0.02;
    pub const HALL_REL: f64 = 0.05;
    pub const FIDELITY_LOSS: f64 = 1e-8;
    pub const DYNAMICS_SECONDS: f64 = 120.0;
    pub const RATE_RATIO: f64 = 1e-2;
    pub const TAU_D_MIN_S: f64 = 0.1;
    pub const TAU_D_MAX_S: f64 = 10.0;
    pub const ZERO_FIELD: f64 = 1e-14;
    pub const DARK_LIMIT: f64 = 1e-12;
    pub const SWAP: f64 = 1e-12;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub elapsed: Duration,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}. {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.summary,
            self.elapsed.as_secs_f64()
        )
    }
}

fn canonical_scales() -> (f64, f64) {
    (25.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormMeasurement {
    /// Relative L-infinity error of the numeric B against the closed form.
    pub b_rel_err: f64,
    /// Absolute L-infinity error of the numeric V against the closed form.
    pub v_abs_err: f64,
    pub seconds: f64,
}

/// Numeric B and V on a +-6a grid with dx = a/200 against the closed forms.
pub fn measure_closed_form() -> Result<ClosedFormMeasurement> {
    let start = Instant::now();
    let c = BeamPairConfig::canonical();
    let (a, _) = canonical_scales();
    let g = make_grid(-6.0 * a, 6.0 * a, 0.0, 4.0, 2401, 9)?;
    let rf = ratio_field(&c, &g)?;
    let b = curl_z(&vector_potential(&rf));
    let b_ana = magnetic_field_analytic(&c, &g)?;
    let zero = ScalarField2D::zeros(g);
    let v = scalar_potential(&rf, &zero, &zero, 0.0);
    let v_ana = scalar_potential_analytic(&c, &g)?;
    Ok(ClosedFormMeasurement {
        b_rel_err: b.zip_with(&b_ana, |p, q| p - q).max_abs() / b_ana.max_abs(),
        v_abs_err: v.zip_with(&v_ana, |p, q| p - q).max_abs(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakMeasurement {
    /// `-k / 4a` from the cosh closed form.
    pub b_closed: f64,
    /// `-k d(sin^2 theta)/dx` with the analytic derivative of `ln|zeta|`.
    pub b_general: f64,
    /// Gauge scalar term from the closed form.
    pub c_closed: f64,
    /// `[|zeta|^2 k^2 + (d|zeta|/dx)^2] / 2(1 + |zeta|^2)^2`.
    pub c_general: f64,
}

pub fn measure_peaks() -> Result<PeakMeasurement> {
    let c = BeamPairConfig::canonical();
    let (a, k) = canonical_scales();
    let x0 = c.x0();
    let g = make_grid(x0, x0 + 1.0, 0.0, 1.0, 8, 8)?;
    let b_closed = magnetic_field_analytic(&c, &g)?.at(0, 0);
    let z = c.log_abs_zeta(x0, 0.0).exp();
    let z2 = z * z;
    let dlog = c.dlog_abs_zeta_dx(x0, 0.0);
    // sin^2 = z^2/(1+z^2), d sin^2/dx = 2 sin^2 cos^2 dln|z|/dx
    let s2 = z2 / (1.0 + z2);
    let b_general = -k * 2.0 * s2 * (1.0 - s2) * dlog;
    let dz = z * dlog;
    let c_general = 0.5 * (z2 * k * k + dz * dz) / ((1.0 + z2) * (1.0 + z2));
    Ok(PeakMeasurement {
        b_closed,
        b_general,
        c_closed: gauge_potential_peak(a, k),
        c_general,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CancellationMeasurement {
    pub c: f64,
    pub a: f64,
    /// Fitted coefficient of `(x - x0)^2` in V_total.
    pub quadratic: f64,
    pub quartic: f64,
    /// `(2C/3) / (2a)^4`.
    pub quartic_expected: f64,
}

/// Even-polynomial fit of V_total (gauge term plus compensating trap) over
/// `|x - x0| <= a`.
pub fn measure_cancellation() -> Result<CancellationMeasurement> {
    let c = BeamPairConfig::canonical();
    let (a, k) = canonical_scales();
    let n = 2001;
    let dx = 2.0 * a / (n - 1) as f64;
    let p = LineProfile::from_beams(&c, TrapSpec::Compensated, 0.0, c.x0() - a, dx, n)?;
    let coef = polyfit(&p.xs, &p.v, &[0, 2, 4, 6, 8, 10, 12], c.x0(), a)?;
    let big_c = gauge_potential_peak(a, k);
    Ok(CancellationMeasurement {
        c: big_c,
        a,
        quadratic: coef[1],
        quartic: coef[2],
        quartic_expected: (2.0 * big_c / 3.0) / (2.0 * a).powi(4),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxMeasurement {
    pub a: f64,
    pub flux: f64,
    pub n_quanta: f64,
}

/// Flux of the numeric B over x0 +- 20a and a y span of 2 pi / k.
pub fn measure_flux(a: f64) -> Result<FluxMeasurement> {
    let sigma0 = 10.0;
    let c = BeamPairConfig::symmetric(1.0, sigma0, 0.0, sigma0 * sigma0 / (4.0 * a), 0.5, 0.5);
    let span = 2.0 * PI / c.k();
    let g = make_grid(-20.0 * a, 20.0 * a, 0.0, span, 2001, 9)?;
    let b = curl_z(&vector_potential(&ratio_field(&c, &g)?));
    let f = flux_through(&b, (g.x_min, g.x_max), (0.0, span))?;
    Ok(FluxMeasurement {
        a,
        flux: f.flux,
        n_quanta: f.n_quanta,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandauMeasurement {
    pub omega_c: f64,
    pub omega_ext: f64,
    /// Lowest three energies at the band minimum.
    pub energies: Vec<f64>,
    pub spacings: Vec<f64>,
    /// Largest `|dE - omega_c| / omega_c`.
    pub spacing_dev: f64,
    /// Peak-to-peak ground-band energy over `|x* - x0| <= a/2`.
    pub band_spread: f64,
    pub seconds: f64,
}

pub fn measure_landau() -> Result<LandauMeasurement> {
    let start = Instant::now();
    let c = BeamPairConfig::canonical();
    let (bands, report) = landau_analysis(&c, &SpectrumConfig::default(), 21, 3)?;
    let (a, k) = canonical_scales();
    let s = field_scales(a, k, 1.0);
    Ok(LandauMeasurement {
        omega_c: s.omega_c,
        omega_ext: s.omega_ext,
        energies: report.energies,
        spacings: report.spacings,
        spacing_dev: report.max_rel_deviation,
        band_spread: bands.band_width(0),
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsMeasurement {
    pub norm_drift: f64,
    pub energy_drift: f64,
    pub period: f64,
    pub expected_period: f64,
    pub hall_velocity: f64,
    pub hall_expected: f64,
    pub fidelity: f64,
    pub seconds: f64,
}

/// Steps per leg of the time-reversal run.
pub const REVERSAL_STEPS: usize = 1000;

/// Cyclotron orbit (10^4 steps on 512 x 512, drifts tracked), Hall drift at
/// F = 1e-4 and a forward-backward reversal run.
pub fn measure_dynamics() -> Result<DynamicsMeasurement> {
    let start = Instant::now();
    let mut cyc = DynamicsSetup::canonical();
    cyc.evolution.track_energy = true;
    let orbit = run_cyclotron(&cyc)?;
    let hall = run_hall_drift(&DynamicsSetup::canonical_hall(), 1e-4)?;

    let grid = cyc.grid()?;
    let profile = cyc.profile(&grid)?;
    let state = cyc.initial_state(&grid, &profile)?;
    let mut evo = cyc.evolution;
    evo.n_steps = REVERSAL_STEPS;
    evo.sample_every = REVERSAL_STEPS;
    evo.track_energy = false;
    let fidelity = time_reversal_fidelity(&state, &profile, &evo)?;

    Ok(DynamicsMeasurement {
        norm_drift: orbit.trajectory.max_norm_drift(),
        energy_drift: orbit.trajectory.max_energy_drift(),
        period: orbit.period,
        expected_period: orbit.expected_period,
        hall_velocity: hall.drift_velocity,
        hall_expected: hall.expected,
        fidelity,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticityRow {
    /// rms Rabi frequency in 1/s.
    pub omega_si: f64,
    pub ratio_general: f64,
    pub ratio_planar: f64,
    /// Dark-state lifetimes in s.
    pub tau_d_general_s: f64,
    pub tau_d_planar_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticityMeasurement {
    pub adapter: SiAdapter,
    /// Nonadiabatic rates in 1/s.
    pub f_general_si: f64,
    pub f_planar_si: f64,
    /// `F_general / F_planar`.
    pub discrepancy: f64,
    pub cos_theta: f64,
    pub rows: Vec<AdiabaticityRow>,
}

/// Rb-87 with 1/k = 1e-7 m, v = 1 cm/s along y at x0, tau3 = 1e-7 s and
/// Omega from 1e7 to 1e8 1/s.
pub fn measure_adiabaticity() -> Result<AdiabaticityMeasurement> {
    let si = SiAdapter::new(1e-7, RB87_MASS_KG);
    let c = BeamPairConfig::canonical();
    let g = make_grid(c.x0() - 10.0, c.x0() + 10.0, 0.0, 2.0, 201, 9)?;
    let rf = ratio_field(&c, &g)?;
    let motion = MotionSpec {
        v: [0.0, si.velocity_from_si(0.01)],
        ..MotionSpec::default()
    };
    let tau3 = si.time_from_si(1e-7);
    let point = (100, 4);
    let mut rows = Vec::new();
    let mut last = None;
    for omega_si in [1e7, 3e7, 1e8] {
        let r = adiabaticity_report(&rf, &c, &motion, point, tau3, Some(si.rate_from_si(omega_si)))?;
        rows.push(AdiabaticityRow {
            omega_si,
            ratio_general: r.ratio_general,
            ratio_planar: r.ratio_planar,
            tau_d_general_s: si.time_to_si(r.tau_d_general),
            tau_d_planar_s: si.time_to_si(r.tau_d_planar),
        });
        last = Some(r);
    }
    let r = last.expect("three rows");
    Ok(AdiabaticityMeasurement {
        adapter: si,
        f_general_si: si.rate_to_si(r.f_general),
        f_planar_si: si.rate_to_si(r.f_planar),
        discrepancy: r.discrepancy,
        cos_theta: r.cos_theta,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitsMeasurement {
    /// `max |B|` and `max |grad sin^2 theta|` for delta_x = 0.
    pub b_max: f64,
    pub grad_sin2_max: f64,
    /// `max |V_eff - V1|` where `|zeta| < 1e-15`.
    pub dark_dev: f64,
    /// `max |sin^2(swapped) - (1 - sin^2)|`.
    pub swap_dev: f64,
}

pub fn measure_limits() -> Result<LimitsMeasurement> {
    let flat = BeamPairConfig::symmetric(1.0, 10.0, 0.0, 0.0, 0.5, 0.5);
    let g = make_grid(-150.0, 150.0, 0.0, 4.0, 601, 9)?;
    let rf = ratio_field(&flat, &g)?;
    let b_max = curl_z(&vector_potential(&rf)).max_abs();
    let gs = gradient(&rf.sin2theta);
    let grad_sin2_max = gs.x.iter().chain(&gs.y).fold(0.0f64, |m, v| m.max(v.abs()));

    let c = BeamPairConfig::canonical();
    let g = make_grid(-3000.0, 3000.0, 0.0, 4.0, 2401, 9)?;
    let rf = ratio_field(&c, &g)?;
    let v1 = ScalarField2D::from_fn(g, |x, y| 0.2 + 1e-4 * x + 0.05 * y);
    let v2 = ScalarField2D::from_fn(g, |x, _| 3.0 - 1e-3 * x);
    let v = scalar_potential(&rf, &v1, &v2, 0.7);
    let dark_dev = (0..g.len())
        .filter(|&i| rf.abs_zeta.values[i] < 1e-15)
        .fold(0.0f64, |m, i| m.max((v.values[i] - v1.values[i]).abs()));

    let sw = ratio_field(&c.swapped(), &g)?;
    let swap_dev = sw
        .sin2theta
        .values
        .iter()
        .zip(&rf.sin2theta.values)
        .fold(0.0f64, |m, (p, q)| m.max((p - (1.0 - q)).abs()));
    Ok(LimitsMeasurement {
        b_max,
        grad_sin2_max,
        dark_dev,
        swap_dev,
    })
}

fn judge(id: u32) -> Result<(bool, String)> {
    Ok(match id {
        1 => {
            let m = measure_closed_form()?;
            let ok = m.b_rel_err < tol::B_REL_LINF
                && m.v_abs_err < tol::V_ABS_LINF
                && m.seconds < tol::FIELDS_SECONDS;
            (
                ok,
                format!(
                    "B rel err {:.2e} (< {:.0e}), V abs err {:.2e} (< {:.0e}), {:.2} s (< {} s)",
                    m.b_rel_err,
                    tol::B_REL_LINF,
                    m.v_abs_err,
                    tol::V_ABS_LINF,
                    m.seconds,
                    tol::FIELDS_SECONDS
                ),
            )
        }
        2 => {
            let m = measure_peaks()?;
            let (a, k) = canonical_scales();
            let b_ref = -k / (4.0 * a);
            let ok = (m.b_closed - b_ref).abs() <= tol::PEAK
                && (m.b_general - b_ref).abs() <= tol::PEAK
                && (m.c_closed - 0.12505).abs() <= tol::PEAK
                && (m.c_general - 0.12505).abs() <= tol::PEAK;
            (
                ok,
                format!(
                    "B(x0) = {:.12} / {:.12} (expect -0.01), C = {:.12} / {:.12} (expect 0.12505)",
                    m.b_closed, m.b_general, m.c_closed, m.c_general
                ),
            )
        }
        3 => {
            let m = measure_cancellation()?;
            let q_tol = tol::QUADRATIC_REL * m.c / (m.a * m.a);
            let q4 = (m.quartic - m.quartic_expected).abs() / m.quartic_expected;
            (
                m.quadratic.abs() < q_tol && q4 < tol::QUARTIC_REL,
                format!(
                    "quadratic {:.3e} (|.| < {:.3e}), quartic {:.6e} vs {:.6e} ({:.2e} rel)",
                    m.quadratic, q_tol, m.quartic, m.quartic_expected, q4
                ),
            )
        }
        4 => {
            let mut ok = true;
            let mut parts = Vec::new();
            for a in [5.0, 25.0, 100.0] {
                let m = measure_flux(a)?;
                let rel = (m.flux + 2.0 * PI).abs() / (2.0 * PI);
                ok &= rel < tol::FLUX_REL;
                parts.push(format!("a={a}: {:.9} quanta", m.n_quanta));
            }
            (ok, parts.join(", "))
        }
        5 => {
            let m = measure_landau()?;
            let flat = m.band_spread / m.omega_c;
            let ratio = m.omega_c / m.omega_ext;
            let ok = m.spacing_dev < tol::SPACING_REL
                && flat < tol::FLATNESS_REL
                && (ratio - tol::OMEGA_RATIO).abs() <= tol::OMEGA_RATIO_TOL
                && m.seconds < tol::LANDAU_SECONDS;
            (
                ok,
                format!(
                    "spacings {:.6}, {:.6} (dev {:.2}% < 2%), band spread {:.2}% of omega_c (< 5%), omega_c/omega_ext {:.6}, {:.1} s",
                    m.spacings[0],
                    m.spacings[1],
                    100.0 * m.spacing_dev,
                    100.0 * flat,
                    ratio,
                    m.seconds
                ),
            )
        }
        6 => {
            let m = measure_dynamics()?;
            let p_rel = (m.period - m.expected_period).abs() / m.expected_period;
            let h_rel = (m.hall_velocity - m.hall_expected).abs() / m.hall_expected.abs();
            let ok = m.norm_drift < tol::NORM_DRIFT
                && m.energy_drift < tol::ENERGY_DRIFT
                && p_rel < tol::PERIOD_REL
                && h_rel < tol::HALL_REL
                && m.fidelity >= 1.0 - tol::FIDELITY_LOSS
                && m.seconds < tol::DYNAMICS_SECONDS;
            (
                ok,
                format!(
                    "norm drift {:.1e}, energy drift {:.1e}, period {:.2} vs {:.2} ({:.2}%), drift {:.6} vs {:.6} ({:.2}%), 1 - fidelity {:.1e}, {:.1} s",
                    m.norm_drift,
                    m.energy_drift,
                    m.period,
                    m.expected_period,
                    100.0 * p_rel,
                    m.hall_velocity,
                    m.hall_expected,
                    100.0 * h_rel,
                    1.0 - m.fidelity,
                    m.seconds
                ),
            )
        }
        7 => {
            let m = measure_adiabaticity()?;
            let ratios_ok = m.rows.iter().all(|r| r.ratio_general < tol::RATE_RATIO);
            let top = m.rows.last().expect("rows");
            let tau_ok = (tol::TAU_D_MIN_S..=tol::TAU_D_MAX_S).contains(&top.tau_d_general_s);
            (
                ratios_ok && tau_ok,
                format!(
                    "F = {:.3e} /s, max F/Omega {:.2e}, tau_D at 1e8 /s = {:.3} s (planar {:.3} s), F_general/F_planar = {:.6} (cos theta {:.6})",
                    m.f_general_si,
                    m.rows[0].ratio_general,
                    top.tau_d_general_s,
                    top.tau_d_planar_s,
                    m.discrepancy,
                    m.cos_theta
                ),
            )
        }
        8 => {
            let m = measure_limits()?;
            let ok = m.b_max <= tol::ZERO_FIELD
                && m.grad_sin2_max <= tol::ZERO_FIELD
                && m.dark_dev < tol::DARK_LIMIT
                && m.swap_dev < tol::SWAP;
            (
                ok,
                format!(
                    "max|B| {:.1e}, max|grad sin2| {:.1e}, |V_eff - V1| {:.1e}, swap {:.1e}",
                    m.b_max, m.grad_sin2_max, m.dark_dev, m.swap_dev
                ),
            )
        }
        _ => (false, format!("no check numbered {id}")),
    })
}

/// Run one check; measurement errors count as failures.
pub fn run_check(id: u32) -> CheckResult {
    let start = Instant::now();
    let name = CHECKS.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1);
    let (passed, summary) = judge(id).unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckResult {
        id,
        name,
        passed,
        summary,
        elapsed: start.elapsed(),
    }
}

pub fn run_checks(ids: &[u32]) -> Vec<CheckResult> {
    ids.iter().map(|&id| run_check(id)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peaks_two_ways() {
        let m = measure_peaks().unwrap();
        assert!((m.b_closed + 0.01).abs() < 1e-15);
        assert!((m.b_general - m.b_closed).abs() < 1e-15);
        assert!((m.c_general - m.c_closed).abs() < 1e-15);
    }

    #[test]
    fn limits_are_tight() {
        let m = measure_limits().unwrap();
        assert!(m.b_max <= 1e-14 && m.grad_sin2_max <= 1e-14);
        assert!(m.dark_dev < 1e-12, "{}", m.dark_dev);
        assert!(m.swap_dev < 1e-12);
    }

    #[test]
    fn unknown_check_fails() {
        let r = run_check(42);
        assert!(!r.passed);
        assert!(r.to_string().starts_with("[FAIL] 42."));
    }

    #[test]
    fn line_format() {
        let r = run_check(2);
        assert!(r.passed, "{r}");
        assert!(r.to_string().starts_with("[PASS] 2. peak values: "));
    }
}
