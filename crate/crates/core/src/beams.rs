//! Offset counterpropagating Gaussian beams and the Rabi-frequency ratio they
//! produce.
//!
//! The probe travels along +y, the control along -y. Their complex ratio
//! `zeta = Omega_p / Omega_c = |zeta| exp(iS)` fixes the dark state through the
//! mixing angle `tan(theta) = |zeta|` and the relative phase `S = (k_p + k_c) y`.
//!
//! Amplitude ratios are formed in the log domain so that the far tails of
//! well-separated beams neither underflow nor produce `0/0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagation {
    /// Probe beam, travelling towards +y.
    PlusY,
    /// Control beam, travelling towards -y.
    MinusY,
}

impl Propagation {
    pub fn sign(self) -> f64 {
        match self {
            Propagation::PlusY => 1.0,
            Propagation::MinusY => -1.0,
        }
    }
}

/// How the transverse width grows away from the waist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WidthLaw {
    /// `sigma0 * sqrt(1 + (y / y_R)^2)`.
    #[default]
    Standard,
    /// `sigma0 * sqrt(1 + y / y_R)`, kept for side-by-side comparison only.
    /// Undefined (NaN) for `y < -y_R`.
    LinearInY,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBeamParams {
    pub omega0: f64,
    pub sigma0: f64,
    pub center: f64,
    pub direction: Propagation,
    pub k: f64,
}

impl GaussianBeamParams {
    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.omega0 > 0.0) {
            return Err(Error::config(format!("{name}.omega0"), "must be positive"));
        }
        if !(self.sigma0 > 0.0) {
            return Err(Error::config(format!("{name}.sigma0"), "must be positive"));
        }
        if !(self.k > 0.0) {
            return Err(Error::config(format!("{name}.k"), "must be positive"));
        }
        if !self.center.is_finite() {
            return Err(Error::config(format!("{name}.center"), "must be finite"));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k
    }

    /// Rayleigh range `pi sigma0^2 / lambda`.
    pub fn rayleigh_range(&self) -> f64 {
        PI * self.sigma0 * self.sigma0 / self.wavelength()
    }

    pub fn width(&self, y: f64, model: WidthModel) -> f64 {
        if !model.paraxial {
            return self.sigma0;
        }
        let s = y / self.rayleigh_range();
        match model.law {
            WidthLaw::Standard => self.sigma0 * (1.0 + s * s).sqrt(),
            WidthLaw::LinearInY => self.sigma0 * (1.0 + s).sqrt(),
        }
    }

    /// Natural log of the real amplitude at `(x, y)`.
    pub fn log_amplitude(&self, x: f64, y: f64, model: WidthModel) -> f64 {
        let w = self.width(y, model);
        let d = x - self.center;
        self.omega0.ln() - d * d / (w * w)
    }

    /// Phase of the complex Rabi frequency, `+-k y`.
    pub fn phase(&self, y: f64) -> f64 {
        self.direction.sign() * self.k * y
    }
}

/// Real Rabi amplitude `omega0 exp(-(x - x_j)^2 / sigma(y)^2)`.
pub fn rabi_profile(beam: &GaussianBeamParams, x: f64, y: f64, model: WidthModel) -> f64 {
    let w = beam.width(y, model);
    let d = x - beam.center;
    beam.omega0 * (-d * d / (w * w)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WidthModel {
    pub paraxial: bool,
    pub law: WidthLaw,
}

impl WidthModel {
    pub const FROZEN: WidthModel = WidthModel {
        paraxial: false,
        law: WidthLaw::Standard,
    };
}

/// Relative width of the two beams, `sigma(y)^2 / (4 delta_x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelativeWidth {
    Finite(f64),
    /// No transverse offset: the intensity ratio is uniform and B vanishes.
    Infinite,
}

impl RelativeWidth {
    pub fn finite(self) -> Option<f64> {
        match self {
            RelativeWidth::Finite(a) => Some(a),
            RelativeWidth::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPairConfig {
    pub probe: GaussianBeamParams,
    pub control: GaussianBeamParams,
    pub width: WidthModel,
}

impl BeamPairConfig {
    /// Equal-amplitude, equal-waist pair centred at `x0 +- delta_x / 2`.
    pub fn symmetric(omega0: f64, sigma0: f64, x0: f64, delta_x: f64, k_p: f64, k_c: f64) -> Self {
        Self {
            probe: GaussianBeamParams {
                omega0,
                sigma0,
                center: x0 + delta_x / 2.0,
                direction: Propagation::PlusY,
                k: k_p,
            },
            control: GaussianBeamParams {
                omega0,
                sigma0,
                center: x0 - delta_x / 2.0,
                direction: Propagation::MinusY,
                k: k_c,
            },
            width: WidthModel::FROZEN,
        }
    }

    /// sigma0 = 10, delta_x = 1, k_p = k_c = 1/2, giving a = 25 and k = 1.
    pub fn canonical() -> Self {
        Self::symmetric(1.0, 10.0, 0.0, 1.0, 0.5, 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        self.probe.validate("probe")?;
        self.control.validate("control")?;
        if self.probe.direction == self.control.direction {
            return Err(Error::config("control.direction", "beams must counterpropagate"));
        }
        Ok(())
    }

    pub fn x0(&self) -> f64 {
        0.5 * (self.probe.center + self.control.center)
    }

    pub fn delta_x(&self) -> f64 {
        self.probe.center - self.control.center
    }

    /// Total wavenumber `k_p + k_c`, the gradient of the relative phase.
    pub fn k(&self) -> f64 {
        self.probe.k + self.control.k
    }

    /// Equal waists and equal widths at every y, so that
    /// `|zeta|^2 = exp((x - x0) / a(y))` holds exactly.
    pub fn has_closed_form(&self) -> bool {
        self.probe.sigma0 == self.control.sigma0
            && self.probe.omega0 == self.control.omega0
            && (!self.width.paraxial || self.probe.k == self.control.k)
    }

    pub fn relative_width(&self, y: f64) -> RelativeWidth {
        let dx = self.delta_x();
        if dx == 0.0 {
            return RelativeWidth::Infinite;
        }
        let s = self.probe.width(y, self.width);
        RelativeWidth::Finite(s * s / (4.0 * dx))
    }

    /// Same pair with the roles of probe and control exchanged.
    pub fn swapped(&self) -> Self {
        let mut probe = self.control;
        let mut control = self.probe;
        probe.direction = Propagation::PlusY;
        control.direction = Propagation::MinusY;
        Self {
            probe,
            control,
            width: self.width,
        }
    }

    /// `ln|zeta|` at a point.
    pub fn log_abs_zeta(&self, x: f64, y: f64) -> f64 {
        self.probe.log_amplitude(x, y, self.width) - self.control.log_amplitude(x, y, self.width)
    }

    /// `d/dx ln|zeta|` at a point.
    pub fn dlog_abs_zeta_dx(&self, x: f64, y: f64) -> f64 {
        let wp = self.probe.width(y, self.width);
        let wc = self.control.width(y, self.width);
        -2.0 * (x - self.probe.center) / (wp * wp) + 2.0 * (x - self.control.center) / (wc * wc)
    }

    pub fn phase_s(&self, y: f64) -> f64 {
        self.probe.phase(y) - self.control.phase(y)
    }

    /// rms Rabi frequency `sqrt(|Omega_p|^2 + |Omega_c|^2)`.
    pub fn omega_rms(&self, x: f64, y: f64) -> f64 {
        let p = rabi_profile(&self.probe, x, y, self.width);
        let c = rabi_profile(&self.control, x, y, self.width);
        p.hypot(c)
    }
}

/// Free-standing form of [`BeamPairConfig::relative_width`].
pub fn relative_width(config: &BeamPairConfig, y: f64) -> RelativeWidth {
    config.relative_width(y)
}

/// `sin^2(theta) = |zeta|^2 / (1 + |zeta|^2)` from `ln|zeta|`, overflow-free.
#[inline]
pub fn sin2_from_log(log_abs_zeta: f64) -> f64 {
    let t = 2.0 * log_abs_zeta;
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `|zeta|`, `S` and `sin^2(theta)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioField {
    pub abs_zeta: ScalarField2D,
    pub log_abs_zeta: ScalarField2D,
    pub phase_s: ScalarField2D,
    pub sin2theta: ScalarField2D,
}

impl RatioField {
    pub fn grid(&self) -> Grid2D {
        self.abs_zeta.grid
    }

    /// Ratio field from sampled, non-negative beam amplitudes and a sampled
    /// relative phase. Use this for non-Gaussian profiles.
    pub fn from_samples(
        probe_amplitude: &ScalarField2D,
        control_amplitude: &ScalarField2D,
        phase_s: ScalarField2D,
    ) -> Result<Self> {
        let grid = probe_amplitude.grid;
        if control_amplitude.grid != grid || phase_s.grid != grid {
            return Err(Error::config(
                "amplitudes",
                "probe, control and phase must share one grid",
            ));
        }
        let mut log = Vec::with_capacity(grid.len());
        for ix in 0..grid.nx {
            for iy in 0..grid.ny {
                let c = control_amplitude.at(ix, iy).abs();
                if c == 0.0 {
                    return Err(Error::SingularRatio {
                        ix,
                        iy,
                        x: grid.x(ix),
                        y: grid.y(iy),
                    });
                }
                log.push(probe_amplitude.at(ix, iy).abs().ln() - c.ln());
            }
        }
        Ok(Self::from_log(ScalarField2D { grid, values: log }, phase_s))
    }

    fn from_log(log_abs_zeta: ScalarField2D, phase_s: ScalarField2D) -> Self {
        Self {
            abs_zeta: log_abs_zeta.map(f64::exp),
            sin2theta: log_abs_zeta.map(sin2_from_log),
            log_abs_zeta,
            phase_s,
        }
    }
}

pub fn ratio_field(config: &BeamPairConfig, grid: &Grid2D) -> Result<RatioField> {
    config.validate()?;
    let log = ScalarField2D::from_fn(*grid, |x, y| config.log_abs_zeta(x, y));
    let phase = ScalarField2D::from_fn(*grid, |_, y| config.phase_s(y));
    Ok(RatioField::from_log(log, phase))
}
