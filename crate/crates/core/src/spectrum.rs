//! Single-particle spectrum in the Landau gauge.
//!
//! With frozen beam widths the vector potential is `A = (0, A_y(x))` and the
//! scalar potential depends on x only, so `p_y = hbar q` is conserved. For
//! each q the problem reduces to
//!
//! ```text
//! H_q = p_x^2 / 2 + (q - A_y(x))^2 / 2 + V(x)
//! ```
//!
//! on a uniform x grid with Dirichlet ends and the three-point second
//! difference, i.e. a symmetric tridiagonal matrix. The three-point stencil
//! has an `O(dx^2)` error; by default the reported energies are
//! Richardson-extrapolated from spacings `dx` and `dx/2`, which removes that
//! term and leaves an `O(dx^4)` remainder.

use rayon::prelude::*;

use crate::beams::{sin2_from_log, BeamPairConfig, RelativeWidth};
use crate::error::{Error, Result};
use crate::gauge::{field_scales, FieldScales, LineProfile, TrapSpec};
use crate::tridiag::SymTridiagonal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumConfig {
    pub trap: TrapSpec,
    pub omega21: f64,
    /// Half-width of the x window in units of `|a|`.
    pub half_span_a: f64,
    /// Samples per `|a|`.
    pub points_per_a: f64,
    /// Half-width and spacing used when the offset vanishes (`a` infinite).
    pub fallback_half_span: f64,
    pub fallback_dx: f64,
    pub richardson: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            trap: TrapSpec::Compensated,
            omega21: 0.0,
            half_span_a: 6.0,
            points_per_a: 200.0,
            fallback_half_span: 150.0,
            fallback_dx: 0.125,
            richardson: true,
        }
    }
}

impl SpectrumConfig {
    /// `(x_min, dx, n)` of the coarse grid.
    pub fn x_grid(&self, beams: &BeamPairConfig) -> (f64, f64, usize) {
        let x0 = beams.x0();
        let (half, dx) = match beams.relative_width(0.0) {
            RelativeWidth::Finite(a) => (self.half_span_a * a.abs(), a.abs() / self.points_per_a),
            RelativeWidth::Infinite => (self.fallback_half_span, self.fallback_dx),
        };
        let cells = (2.0 * half / dx).round().max(4.0) as usize;
        (x0 - half, 2.0 * half / cells as f64, cells + 1)
    }
}

/// Discretised `H_q` for a given line profile.
pub fn reduced_1d_hamiltonian(profile: &LineProfile, q: f64) -> Result<SymTridiagonal> {
    let h2 = profile.dx * profile.dx;
    let diag = profile
        .a_y
        .iter()
        .zip(&profile.v)
        .map(|(&a, &v)| {
            let p = q - a;
            1.0 / h2 + 0.5 * p * p + v
        })
        .collect();
    let off = vec![-0.5 / h2; profile.len() - 1];
    SymTridiagonal::new(diag, off)
}

fn profiles(beams: &BeamPairConfig, spec: &SpectrumConfig) -> Result<(LineProfile, Option<LineProfile>)> {
    let (x_min, dx, n) = spec.x_grid(beams);
    let coarse = LineProfile::from_beams(beams, spec.trap, spec.omega21, x_min, dx, n)?;
    let fine = if spec.richardson {
        Some(LineProfile::from_beams(
            beams,
            spec.trap,
            spec.omega21,
            x_min,
            dx / 2.0,
            2 * n - 1,
        )?)
    } else {
        None
    };
    Ok((coarse, fine))
}

fn energies_at(coarse: &LineProfile, fine: Option<&LineProfile>, q: f64, n_bands: usize) -> Result<Vec<f64>> {
    let e = reduced_1d_hamiltonian(coarse, q)?.lowest_eigenvalues(n_bands)?;
    match fine {
        None => Ok(e),
        Some(f) => {
            let ef = reduced_1d_hamiltonian(f, q)?.lowest_eigenvalues(n_bands)?;
            Ok(e.iter().zip(&ef).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandStructure {
    pub q_values: Vec<f64>,
    /// `energies[band][iq]`.
    pub energies: Vec<Vec<f64>>,
    pub x_min: f64,
    pub dx: f64,
    pub nx: usize,
    pub a: Option<f64>,
    pub k: f64,
    pub trap_omega: f64,
    pub richardson: bool,
}

impl BandStructure {
    pub fn n_bands(&self) -> usize {
        self.energies.len()
    }

    /// Index of the q with the lowest ground-band energy.
    pub fn band_minimum(&self) -> usize {
        let e0 = &self.energies[0];
        (0..e0.len()).fold(0, |m, i| if e0[i] < e0[m] { i } else { m })
    }

    /// Spread `max - min` of a band over the sampled q values.
    pub fn band_width(&self, band: usize) -> f64 {
        let e = &self.energies[band];
        let hi = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = e.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// Lowest `n_bands` energies of `H_q` for every q in `q_list`.
pub fn landau_bands(
    beams: &BeamPairConfig,
    spec: &SpectrumConfig,
    q_list: &[f64],
    n_bands: usize,
) -> Result<BandStructure> {
    if q_list.is_empty() {
        return Err(Error::config("q_list", "must not be empty"));
    }
    if n_bands == 0 {
        return Err(Error::config("n_bands", "must be at least 1"));
    }
    let (coarse, fine) = profiles(beams, spec)?;
    let per_q: Vec<Vec<f64>> = q_list
        .par_iter()
        .map(|&q| energies_at(&coarse, fine.as_ref(), q, n_bands))
        .collect::<Result<_>>()?;
    let energies = (0..n_bands)
        .map(|b| per_q.iter().map(|e| e[b]).collect())
        .collect();
    Ok(BandStructure {
        q_values: q_list.to_vec(),
        energies,
        x_min: coarse.xs[0],
        dx: coarse.dx,
        nx: coarse.len(),
        a: beams.relative_width(0.0).finite(),
        k: beams.k(),
        trap_omega: spec.trap.omega(beams),
        richardson: spec.richardson,
    })
}

/// Bands for an arbitrary line profile (no extrapolation).
pub fn profile_bands(profile: &LineProfile, q_list: &[f64], n_bands: usize) -> Result<Vec<Vec<f64>>> {
    q_list
        .par_iter()
        .map(|&q| reduced_1d_hamiltonian(profile, q)?.lowest_eigenvalues(n_bands))
        .collect()
}

/// Eigenpairs of `H_q`, eigenvectors normalised to `sum |psi|^2 dx = 1`.
pub fn band_states(profile: &LineProfile, q: f64, n: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    let h = reduced_1d_hamiltonian(profile, q)?;
    let mut unit: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let e = h.eigenvalue(j)?;
        let v = h.eigenvector(e, &unit)?;
        let scale = 1.0 / profile.dx.sqrt();
        out.push((e, v.iter().map(|x| x * scale).collect()));
        unit.push(v);
    }
    Ok(out)
}

/// Canonical momentum whose guiding centre sits at `x_star`, `q = A_y(x_star)`.
pub fn guiding_center_momentum(beams: &BeamPairConfig, x_star: f64) -> f64 {
    -beams.k() * sin2_from_log(beams.log_abs_zeta(x_star, 0.0))
}

/// Golden-section search for the minimum of the ground band on `[q_lo, q_hi]`.
pub fn find_band_minimum(beams: &BeamPairConfig, spec: &SpectrumConfig, q_lo: f64, q_hi: f64) -> Result<f64> {
    let (coarse, fine) = profiles(beams, spec)?;
    let e0 = |q: f64| energies_at(&coarse, fine.as_ref(), q, 1).map(|e| e[0]);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (q_lo.min(q_hi), q_lo.max(q_hi));
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (e0(c)?, e0(d)?);
    for _ in 0..60 {
        if (b - a).abs() < 1e-9 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = e0(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = e0(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandauReport {
    pub q: f64,
    pub energies: Vec<f64>,
    pub spacings: Vec<f64>,
    pub hbar_omega_c: f64,
    /// Largest `|dE - hbar omega_c| / hbar omega_c` over the spacings.
    pub max_rel_deviation: f64,
    pub omega_c_over_omega_ext: f64,
}

/// Compare level spacings at the band minimum against the cyclotron energy.
pub fn landau_check(bands: &BandStructure, scales: &FieldScales) -> Result<LandauReport> {
    if bands.n_bands() < 3 {
        return Err(Error::InsufficientData(format!(
            "landau check needs at least 3 bands, got {}",
            bands.n_bands()
        )));
    }
    let iq = bands.band_minimum();
    let energies: Vec<f64> = bands.energies.iter().map(|b| b[iq]).collect();
    let spacings: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    let hw = scales.omega_c;
    let max_rel_deviation = spacings.iter().fold(0.0f64, |m, s| m.max((s - hw).abs() / hw));
    Ok(LandauReport {
        q: bands.q_values[iq],
        energies,
        spacings,
        hbar_omega_c: hw,
        max_rel_deviation,
        omega_c_over_omega_ext: scales.omega_c / scales.omega_ext,
    })
}

/// Bands, band minimum and Landau check for one beam configuration. The
/// q sweep covers guiding centres within `|x* - x0| <= a/2`.
pub fn landau_analysis(
    beams: &BeamPairConfig,
    spec: &SpectrumConfig,
    n_q: usize,
    n_bands: usize,
) -> Result<(BandStructure, LandauReport)> {
    let a = beams
        .relative_width(0.0)
        .finite()
        .ok_or_else(|| Error::Unsupported("Landau analysis needs a nonzero beam offset".into()))?;
    let x0 = beams.x0();
    let q_a = guiding_center_momentum(beams, x0 - a.abs() / 2.0);
    let q_b = guiding_center_momentum(beams, x0 + a.abs() / 2.0);
    let q_min = find_band_minimum(beams, spec, q_a, q_b)?;
    let n_q = n_q.max(2);
    let mut q_list: Vec<f64> = (0..n_q)
        .map(|i| q_a + (q_b - q_a) * i as f64 / (n_q - 1) as f64)
        .collect();
    q_list.push(q_min);
    q_list.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let bands = landau_bands(beams, spec, &q_list, n_bands)?;
    let scales = field_scales(a, beams.k(), 1.0);
    let report = landau_check(&bands, &scales)?;
    Ok((bands, report))
}
