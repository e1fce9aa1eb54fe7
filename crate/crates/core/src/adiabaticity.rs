//! Validity of the adiabatic (dark-state) approximation for moving atoms.
//!
//! Two forms of the nonadiabatic rate are evaluated side by side:
//!
//! * the general rate `F = |grad(zeta) . v| / (1 + |zeta|^2)`;
//! * the planar closed form `F^2 = cos^2(theta) [(v_x d|zeta|/dx)^2 + (|zeta| k v_y)^2]`.
//!
//! For the planar configuration they differ by exactly one factor of
//! `cos(theta)`: `F_general = cos(theta) F_planar`. Reports carry both and the
//! ratio rather than picking one.

use num_complex::Complex64;

use crate::beams::{BeamPairConfig, RatioField};
use crate::error::{Error, Result};
use crate::grid::gradient;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSpec {
    /// Atomic velocity.
    pub v: [f64; 2],
    /// Central velocity along y, compensated by the two-photon detuning.
    pub v0: f64,
    /// Velocity spread. When set, rates use this magnitude in place of |v|.
    pub dv: Option<f64>,
}

impl Default for MotionSpec {
    fn default() -> Self {
        Self {
            v: [0.0, 0.0],
            v0: 0.0,
            dv: None,
        }
    }
}

impl MotionSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some(dv) = self.dv {
            if !(dv >= 0.0) {
                return Err(Error::config("dv", "must be non-negative"));
            }
        }
        Ok(())
    }

    /// Velocity entering the nonadiabatic rate. With a spread configured, the
    /// direction of `v` is kept (y if `v` vanishes) and its magnitude replaced
    /// by `dv`.
    pub fn effective_velocity(&self) -> [f64; 2] {
        match self.dv {
            None => self.v,
            Some(dv) => {
                let n = self.v[0].hypot(self.v[1]);
                if n == 0.0 {
                    [0.0, dv]
                } else {
                    [dv * self.v[0] / n, dv * self.v[1] / n]
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePair {
    pub general: f64,
    pub planar: f64,
}

/// Nonadiabatic rates at grid sample `(ix, iy)` for velocity `v`.
pub fn nonadiabatic_rate(
    rf: &RatioField,
    config: &BeamPairConfig,
    v: [f64; 2],
    point: (usize, usize),
) -> Result<RatePair> {
    let g = rf.grid();
    let (ix, iy) = point;
    if ix >= g.nx || iy >= g.ny {
        return Err(Error::OutOfBounds {
            what: "sample index",
            lo: ix as f64,
            hi: iy as f64,
            min: 0.0,
            max: g.nx.max(g.ny) as f64,
        });
    }
    let i = g.index(ix, iy);
    let gz = gradient(&rf.abs_zeta);
    let gs = gradient(&rf.phase_s);
    let z = rf.abs_zeta.values[i];
    let s = rf.phase_s.values[i];

    // grad zeta = e^{iS} (grad|zeta| + i |zeta| grad S)
    let phase = Complex64::from_polar(1.0, s);
    let dzx = phase * Complex64::new(gz.x[i], z * gs.x[i]);
    let dzy = phase * Complex64::new(gz.y[i], z * gs.y[i]);
    let general = (dzx * v[0] + dzy * v[1]).norm() / (1.0 + z * z);

    let cos2 = 1.0 - rf.sin2theta.values[i];
    let k = config.k();
    let tx = v[0] * gz.x[i];
    let ty = z * k * v[1];
    let planar = (cos2 * (tx * tx + ty * ty)).sqrt();
    Ok(RatePair { general, planar })
}

/// Dark-state lifetime `tau_3 Omega^2 / F^2`; infinite when `F = 0`.
pub fn dark_lifetime(f: f64, omega_rms: f64, tau_3: f64) -> f64 {
    if f == 0.0 {
        f64::INFINITY
    } else {
        tau_3 * omega_rms * omega_rms / (f * f)
    }
}

/// Two-photon detuning `-(k_p + k_c) v0` that cancels the Doppler shift of
/// atoms moving along y at `v0`.
pub fn doppler_compensation(v0: f64, k_p: f64, k_c: f64) -> f64 {
    -(k_p + k_c) * v0
}

/// Two-photon detuning seen by an atom moving at `v_y` once the laser
/// detuning is set to `omega21`.
pub fn residual_detuning(omega21: f64, k: f64, v_y: f64) -> f64 {
    omega21 + k * v_y
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticityReport {
    pub x: f64,
    pub y: f64,
    pub velocity: [f64; 2],
    pub f_general: f64,
    pub f_planar: f64,
    pub omega_rms: f64,
    pub ratio_general: f64,
    pub ratio_planar: f64,
    pub tau_3: f64,
    pub tau_d_general: f64,
    pub tau_d_planar: f64,
    pub cos_theta: f64,
    /// `F_general / F_planar`; equals `cos(theta)` for the planar configuration.
    pub discrepancy: f64,
    pub omega21: f64,
}

/// Full adiabaticity report at one grid sample.
///
/// `omega_rms` overrides the rms Rabi frequency computed from the beams.
pub fn adiabaticity_report(
    rf: &RatioField,
    config: &BeamPairConfig,
    motion: &MotionSpec,
    point: (usize, usize),
    tau_3: f64,
    omega_rms: Option<f64>,
) -> Result<AdiabaticityReport> {
    motion.validate()?;
    let g = rf.grid();
    let velocity = motion.effective_velocity();
    let rates = nonadiabatic_rate(rf, config, velocity, point)?;
    let (x, y) = (g.x(point.0), g.y(point.1));
    let omega = omega_rms.unwrap_or_else(|| config.omega_rms(x, y));
    let cos_theta = (1.0 - rf.sin2theta.at(point.0, point.1)).sqrt();
    let discrepancy = if rates.planar > 0.0 {
        rates.general / rates.planar
    } else {
        f64::NAN
    };
    Ok(AdiabaticityReport {
        x,
        y,
        velocity,
        f_general: rates.general,
        f_planar: rates.planar,
        omega_rms: omega,
        ratio_general: rates.general / omega,
        ratio_planar: rates.planar / omega,
        tau_3,
        tau_d_general: dark_lifetime(rates.general, omega, tau_3),
        tau_d_planar: dark_lifetime(rates.planar, omega, tau_3),
        cos_theta,
        discrepancy,
        omega21: doppler_compensation(motion.v0, config.probe.k, config.control.k),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beams::ratio_field;
    use crate::grid::make_grid;
    use proptest::prelude::*;

    fn canonical() -> (BeamPairConfig, RatioField) {
        let c = BeamPairConfig::canonical();
        let g = make_grid(-100.0, 100.0, 0.0, 2.0, 801, 9).unwrap();
        let rf = ratio_field(&c, &g).unwrap();
        (c, rf)
    }

    // x = x0 sits at ix = 400
    const MID: (usize, usize) = (400, 4);

    #[test]
    fn zero_velocity_gives_zero_rates() {
        let (c, rf) = canonical();
        let r = nonadiabatic_rate(&rf, &c, [0.0, 0.0], MID).unwrap();
        assert_eq!(r.general, 0.0);
        assert_eq!(r.planar, 0.0);
    }

    #[test]
    fn rates_at_equal_mixing() {
        let (c, rf) = canonical();
        let r = nonadiabatic_rate(&rf, &c, [0.0, 0.01], MID).unwrap();
        assert!((r.general - 0.005).abs() < 1e-14, "{}", r.general);
        assert!((r.planar - 0.01 * 0.5f64.sqrt()).abs() < 1e-14);
        assert!((r.planar - 0.007_071_1).abs() < 1e-7);
    }

    #[test]
    fn flat_ratio_with_transverse_motion_is_adiabatic() {
        let c = BeamPairConfig::symmetric(1.0, 10.0, 0.0, 0.0, 0.5, 0.5);
        let g = make_grid(-50.0, 50.0, 0.0, 2.0, 101, 9).unwrap();
        let rf = ratio_field(&c, &g).unwrap();
        let r = nonadiabatic_rate(&rf, &c, [0.3, 0.0], (30, 3)).unwrap();
        assert!(r.general.abs() < 1e-15 && r.planar.abs() < 1e-15);
    }

    #[test]
    fn lifetimes() {
        assert_eq!(dark_lifetime(2.0, 2.0, 3e-7), 3e-7);
        assert!((dark_lifetime(1e4, 1e7, 1e-7) - 0.1).abs() < 1e-15);
        assert!((dark_lifetime(1e4, 1e8, 1e-7) - 10.0).abs() < 1e-12);
        assert_eq!(dark_lifetime(0.0, 1e7, 1e-7), f64::INFINITY);
    }

    #[test]
    fn doppler_detuning() {
        assert_eq!(doppler_compensation(0.0, 0.5, 0.5), 0.0);
        let w = doppler_compensation(0.05, 0.7855e7, 0.7855e7);
        assert!((w + 7.855e5).abs() < 1e-6);
        assert_eq!(
            doppler_compensation(-0.05, 2.0, 3.0),
            -doppler_compensation(0.05, 2.0, 3.0)
        );
        // compensated central motion leaves no residual detuning
        let (kp, kc, v0) = (0.5, 0.5, 0.37);
        let w21 = doppler_compensation(v0, kp, kc);
        assert_eq!(residual_detuning(w21, kp + kc, v0), 0.0);
    }

    #[test]
    fn spread_replaces_velocity_magnitude() {
        let m = MotionSpec {
            v: [0.0, 5.0],
            v0: 5.0,
            dv: Some(0.14),
        };
        assert_eq!(m.effective_velocity(), [0.0, 0.14]);
        let m = MotionSpec {
            v: [3.0, 4.0],
            v0: 0.0,
            dv: Some(1.0),
        };
        let v = m.effective_velocity();
        assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.8).abs() < 1e-15);
        let bad = MotionSpec {
            dv: Some(-1.0),
            ..MotionSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn report_fields() {
        let (c, rf) = canonical();
        let m = MotionSpec {
            v: [0.0, 0.01],
            ..MotionSpec::default()
        };
        let r = adiabaticity_report(&rf, &c, &m, MID, 1e-7, Some(10.0)).unwrap();
        assert!((r.discrepancy - r.cos_theta).abs() < 1e-12);
        assert!((r.ratio_general - 5e-4).abs() < 1e-15);
        assert!(r.tau_d_general > r.tau_d_planar);
    }

    proptest! {
        #[test]
        fn general_over_planar_is_cos_theta(ix in 100usize..700, vx in -1.0f64..1.0, vy in -1.0f64..1.0) {
            prop_assume!(vx.abs() + vy.abs() > 1e-3);
            let (c, rf) = canonical();
            let r = nonadiabatic_rate(&rf, &c, [vx, vy], (ix, 3)).unwrap();
            let cos = (1.0 - rf.sin2theta.at(ix, 3)).sqrt();
            prop_assert!((r.general / r.planar - cos).abs() < 1e-12);
        }

        #[test]
        fn rates_are_absolutely_homogeneous(ix in 100usize..700, vx in -1.0f64..1.0, vy in -1.0f64..1.0, s in -5.0f64..5.0) {
            let (c, rf) = canonical();
            let r1 = nonadiabatic_rate(&rf, &c, [vx, vy], (ix, 3)).unwrap();
            let r2 = nonadiabatic_rate(&rf, &c, [s * vx, s * vy], (ix, 3)).unwrap();
            prop_assert!((r2.general - s.abs() * r1.general).abs() < 1e-13);
            prop_assert!((r2.planar - s.abs() * r1.planar).abs() < 1e-13);
        }
    }
}
