//! Effective vector potential, magnetic field and scalar potential of the
//! dark state, plus the derived magnetic scales and flux integrals.
//!
//! Conventions: hbar = m = 1 and the atom couples as `(p - A)^2 / 2`.
//! `B` is the z-component of `curl A`; for a positive beam offset it is
//! negative, with peak magnitude `k / 4a`.

use std::f64::consts::PI;

use crate::beams::{sin2_from_log, BeamPairConfig, RatioField, RelativeWidth};
use crate::error::{Error, Result};
use crate::grid::{curl_z, gradient, Grid2D, ScalarField2D, VectorField2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    /// Finite differences on the sampled fields.
    Numeric,
    /// Closed forms for equal-waist Gaussian beams.
    Analytic,
}

/// State-independent trapping potential added to both ground states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TrapSpec {
    None,
    /// Harmonic trap at the frequency that cancels the quadratic part of the
    /// gauge-induced potential around the beam midpoint.
    #[default]
    Compensated,
    /// Harmonic trap of the given angular frequency about the beam midpoint.
    Custom(f64),
}

impl TrapSpec {
    pub fn omega(&self, config: &BeamPairConfig) -> f64 {
        match *self {
            TrapSpec::None => 0.0,
            TrapSpec::Custom(w) => w,
            TrapSpec::Compensated => match config.relative_width(0.0) {
                RelativeWidth::Finite(a) => compensating_trap(a, config.k(), 1.0).omega_ext,
                RelativeWidth::Infinite => 0.0,
            },
        }
    }

    pub fn field(&self, config: &BeamPairConfig, grid: &Grid2D) -> ScalarField2D {
        let w = self.omega(config);
        let x0 = config.x0();
        ScalarField2D::from_fn(*grid, |x, _| 0.5 * w * w * (x - x0) * (x - x0))
    }
}

/// All gauge-induced fields on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFields {
    pub a: VectorField2D,
    pub b: ScalarField2D,
    pub v_eff: ScalarField2D,
    pub v1: ScalarField2D,
    pub v2: ScalarField2D,
    pub omega21: f64,
}

impl GaugeFields {
    /// Numeric A, B = curl A and V_eff from a ratio field and the
    /// state-resolved trapping potentials.
    pub fn compute(rf: &RatioField, v1: ScalarField2D, v2: ScalarField2D, omega21: f64) -> Self {
        let a = vector_potential(rf);
        let b = curl_z(&a);
        let v_eff = scalar_potential(rf, &v1, &v2, omega21);
        Self {
            a,
            b,
            v_eff,
            v1,
            v2,
            omega21,
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.b.grid
    }
}

/// `A = -hbar sin^2(theta) grad S`.
pub fn vector_potential(rf: &RatioField) -> VectorField2D {
    let mut a = gradient(&rf.phase_s);
    for ((ax, ay), &s) in a.x.iter_mut().zip(a.y.iter_mut()).zip(&rf.sin2theta.values) {
        *ax *= -s;
        *ay *= -s;
    }
    a
}

/// Closed-form `B_z = -hbar k / (4 a cosh^2((x - x0) / 2a))`, with `a = a(y)`.
pub fn magnetic_field_analytic(config: &BeamPairConfig, grid: &Grid2D) -> Result<ScalarField2D> {
    if !config.has_closed_form() {
        return Err(Error::Unsupported(
            "analytic magnetic field requires equal-waist, equal-amplitude Gaussian beams".into(),
        ));
    }
    let (x0, k) = (config.x0(), config.k());
    Ok(ScalarField2D::from_fn(*grid, |x, y| {
        match config.relative_width(y) {
            RelativeWidth::Infinite => 0.0,
            RelativeWidth::Finite(a) => {
                let c = ((x - x0) / (2.0 * a)).cosh();
                -k / (4.0 * a * c * c)
            }
        }
    }))
}

/// `B_z` either as the numeric curl of `a` or from the closed form.
pub fn magnetic_field(a: &VectorField2D, config: &BeamPairConfig, mode: FieldMode) -> Result<ScalarField2D> {
    match mode {
        FieldMode::Numeric => Ok(curl_z(a)),
        FieldMode::Analytic => magnetic_field_analytic(config, &a.grid),
    }
}

/// Potential felt by the dark state from the bare trapping potentials and the
/// two-photon detuning: `[V1 + |zeta|^2 (V2 + hbar omega21)] / (1 + |zeta|^2)`.
pub fn external_potential(
    rf: &RatioField,
    v1: &ScalarField2D,
    v2: &ScalarField2D,
    omega21: f64,
) -> ScalarField2D {
    let s2 = &rf.sin2theta.values;
    let values = (0..s2.len())
        .map(|i| (1.0 - s2[i]) * v1.values[i] + s2[i] * (v2.values[i] + omega21))
        .collect();
    ScalarField2D {
        grid: rf.grid(),
        values,
    }
}

/// Full effective potential
/// `V_ext + (hbar^2/2m) [|zeta|^2 (grad S)^2 + (grad |zeta|)^2] / (1 + |zeta|^2)^2`.
pub fn scalar_potential(
    rf: &RatioField,
    v1: &ScalarField2D,
    v2: &ScalarField2D,
    omega21: f64,
) -> ScalarField2D {
    let mut v = external_potential(rf, v1, v2, omega21);
    let gs = gradient(&rf.phase_s);
    let gz = gradient(&rf.abs_zeta);
    for (i, out) in v.values.iter_mut().enumerate() {
        let z = rf.abs_zeta.values[i];
        let z2 = z * z;
        let den = (1.0 + z2) * (1.0 + z2);
        let num = z2 * (gs.x[i] * gs.x[i] + gs.y[i] * gs.y[i]) + gz.x[i] * gz.x[i] + gz.y[i] * gz.y[i];
        *out += 0.5 * num / den;
    }
    v
}

/// Closed-form gauge-induced potential for Gaussian beams,
/// `(hbar^2 k^2 / 2m) (1 + 1/4a^2k^2) / (4 cosh^2((x - x0)/2a))`.
/// Excludes `V_ext`.
pub fn scalar_potential_analytic(config: &BeamPairConfig, grid: &Grid2D) -> Result<ScalarField2D> {
    if !config.has_closed_form() {
        return Err(Error::Unsupported(
            "analytic scalar potential requires equal-waist, equal-amplitude Gaussian beams".into(),
        ));
    }
    let (x0, k) = (config.x0(), config.k());
    Ok(ScalarField2D::from_fn(*grid, |x, y| {
        match config.relative_width(y) {
            RelativeWidth::Infinite => k * k / 8.0,
            RelativeWidth::Finite(a) => {
                let c = ((x - x0) / (2.0 * a)).cosh();
                gauge_potential_peak(a, k) / (c * c)
            }
        }
    }))
}

/// Peak of the gauge-induced potential, `(k^2/2)(1 + 1/4a^2k^2)/4`.
pub fn gauge_potential_peak(a: f64, k: f64) -> f64 {
    0.5 * k * k * (1.0 + 1.0 / (4.0 * a * a * k * k)) / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatingTrap {
    pub omega_ext: f64,
    pub mass: f64,
    pub x0: f64,
}

impl CompensatingTrap {
    /// Harmonic profile `(m omega_ext^2 / 2)(x - x0)^2`.
    pub fn potential(&self, x: f64) -> f64 {
        let d = x - self.x0;
        0.5 * self.mass * self.omega_ext * self.omega_ext * d * d
    }
}

/// Trap frequency `(hbar k / 4am) sqrt(1 + 1/4a^2k^2)` cancelling the quadratic
/// term of the gauge potential about x0 = 0. Uses `|a|`.
pub fn compensating_trap(a: f64, k: f64, m: f64) -> CompensatingTrap {
    let a = a.abs();
    CompensatingTrap {
        omega_ext: k / (4.0 * a * m) * (1.0 + 1.0 / (4.0 * a * a * k * k)).sqrt(),
        mass: m,
        x0: 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldScales {
    pub a: f64,
    pub k: f64,
    /// `hbar k / 4a`.
    pub b0: f64,
    pub ell_b: f64,
    pub omega_c: f64,
    pub omega_rec: f64,
    pub omega_ext: f64,
    /// Area threaded by one flux quantum, `2 pi hbar / B0`.
    pub flux_area: f64,
    /// `flux_area / lambda` with `lambda = 4 pi / k`.
    pub x_eff: f64,
    /// Peak of the gauge-induced scalar potential.
    pub gauge_peak: f64,
}

pub fn field_scales(a: f64, k: f64, m: f64) -> FieldScales {
    let a_abs = a.abs();
    let b0 = k / (4.0 * a_abs);
    let flux_area = 2.0 * PI / b0;
    FieldScales {
        a,
        k,
        b0,
        ell_b: (1.0 / b0).sqrt(),
        omega_c: b0 / m,
        omega_rec: k * k / (2.0 * m),
        omega_ext: compensating_trap(a_abs, k, m).omega_ext,
        flux_area,
        x_eff: flux_area / (4.0 * PI / k),
        gauge_peak: gauge_potential_peak(a_abs, k),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flux {
    pub flux: f64,
    pub n_quanta: f64,
}

/// Integral of a piecewise-linear interpolant of `f` (spacing `h`, origin
/// `x0`) over `[lo, hi]`; the trapezoid rule with exact partial end cells.
fn trapezoid(f: impl Fn(usize) -> f64, n: usize, x0: f64, h: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let pos = |x: f64| ((x - x0) / h).clamp(0.0, (n - 1) as f64);
    let (p, q) = (pos(lo), pos(hi));
    let interp = |t: f64| {
        let i = (t.floor() as usize).min(n - 2);
        let w = t - i as f64;
        (1.0 - w) * f(i) + w * f(i + 1)
    };
    let (i_lo, i_hi) = (p.ceil() as usize, q.floor() as usize);
    if i_lo > i_hi {
        return 0.5 * (interp(p) + interp(q)) * (q - p) * h;
    }
    let mut sum = 0.5 * (interp(p) + f(i_lo)) * (i_lo as f64 - p);
    for i in i_lo..i_hi {
        sum += 0.5 * (f(i) + f(i + 1));
    }
    sum += 0.5 * (f(i_hi) + interp(q)) * (q - i_hi as f64);
    sum * h
}

/// Magnetic flux of `b` through `[x_range] x [y_range]` by the trapezoid rule
/// on the stored samples (partial cells integrate the linear interpolant).
pub fn flux_through(b: &ScalarField2D, x_range: (f64, f64), y_range: (f64, f64)) -> Result<Flux> {
    let g = b.grid;
    let tol_x = 1e-9 * g.dx;
    let tol_y = 1e-9 * g.dy;
    let (xl, xh) = (x_range.0.min(x_range.1), x_range.0.max(x_range.1));
    let (yl, yh) = (y_range.0.min(y_range.1), y_range.0.max(y_range.1));
    if xl < g.x_min - tol_x || xh > g.x_max + tol_x {
        return Err(Error::OutOfBounds {
            what: "x range",
            lo: xl,
            hi: xh,
            min: g.x_min,
            max: g.x_max,
        });
    }
    if yl < g.y_min - tol_y || yh > g.y_max + tol_y {
        return Err(Error::OutOfBounds {
            what: "y range",
            lo: yl,
            hi: yh,
            min: g.y_min,
            max: g.y_max,
        });
    }
    let rows: Vec<f64> = (0..g.nx)
        .map(|ix| trapezoid(|iy| b.at(ix, iy), g.ny, g.y_min, g.dy, yl, yh))
        .collect();
    let mut flux = trapezoid(|ix| rows[ix], g.nx, g.x_min, g.dx, xl, xh);
    // orientation of the requested ranges
    if (x_range.1 < x_range.0) != (y_range.1 < y_range.0) {
        flux = -flux;
    }
    Ok(Flux {
        flux,
        n_quanta: flux / (2.0 * PI),
    })
}

/// Fields along x at fixed y for the frozen-paraxial (y-independent) case,
/// evaluated from closed-form beam profiles. This is the Landau-gauge input
/// of the band-structure and wavepacket solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct LineProfile {
    pub xs: Vec<f64>,
    pub dx: f64,
    /// `A_y(x)`.
    pub a_y: Vec<f64>,
    /// Total scalar potential, gauge term plus trap and detuning.
    pub v: Vec<f64>,
}

impl LineProfile {
    /// Uniform samples `x_min + i dx`, `i < n`.
    pub fn from_beams(
        config: &BeamPairConfig,
        trap: TrapSpec,
        omega21: f64,
        x_min: f64,
        dx: f64,
        n: usize,
    ) -> Result<Self> {
        config.validate()?;
        if config.width.paraxial {
            return Err(Error::Unsupported(
                "paraxial beams make the fields y-dependent; Landau-gauge reduction needs paraxial = false"
                    .into(),
            ));
        }
        let k = config.k();
        let w = trap.omega(config);
        let x0 = config.x0();
        let xs: Vec<f64> = (0..n).map(|i| x_min + i as f64 * dx).collect();
        let mut a_y = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for &x in &xs {
            let s2 = sin2_from_log(config.log_abs_zeta(x, 0.0));
            let g = config.dlog_abs_zeta_dx(x, 0.0);
            let sc = s2 * (1.0 - s2);
            a_y.push(-k * s2);
            let trap_v = 0.5 * w * w * (x - x0) * (x - x0);
            v.push(0.5 * sc * (k * k + g * g) + trap_v + s2 * omega21);
        }
        Ok(Self { xs, dx, a_y, v })
    }

    /// Arbitrary profile on a uniform grid.
    pub fn custom(x_min: f64, dx: f64, a_y: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if a_y.len() != v.len() || a_y.len() < 5 {
            return Err(Error::config("profile", "a_y and v need equal length >= 5"));
        }
        let xs = (0..a_y.len()).map(|i| x_min + i as f64 * dx).collect();
        Ok(Self { xs, dx, a_y, v })
    }

    /// Extract the profile from 2D fields that are y-independent with `A_x = 0`.
    pub fn from_gauge_fields(fields: &GaugeFields, v_total: &ScalarField2D) -> Result<Self> {
        let g = fields.grid();
        let mut a_y = Vec::with_capacity(g.nx);
        let mut v = Vec::with_capacity(g.nx);
        for ix in 0..g.nx {
            let ay0 = fields.a.y[g.index(ix, 0)];
            let v0 = v_total.at(ix, 0);
            for iy in 0..g.ny {
                let i = g.index(ix, iy);
                let same = |p: f64, q: f64| (p - q).abs() <= 1e-12 * (1.0 + q.abs());
                if fields.a.x[i].abs() > 1e-12 || !same(fields.a.y[i], ay0) || !same(v_total.values[i], v0) {
                    return Err(Error::Unsupported(
                        "fields must be of Landau form A = (0, A_y(x)), V = V(x)".into(),
                    ));
                }
            }
            a_y.push(ay0);
            v.push(v0);
        }
        Self::custom(g.x_min, g.dx, a_y, v)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Profile with `A_y` shifted by a constant.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.a_y.iter_mut().for_each(|a| *a += c);
        out
    }
}
