//! Unit system.
//!
//! Everything inside the crate runs with hbar = m = 1 and lengths measured in
//! units of `1/k_unit`. [`SiAdapter`] converts to laboratory units when a
//! length scale and an atomic mass are supplied.

/// Reduced Planck constant in J s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;

/// Mass of a rubidium-87 atom in kg.
pub const RB87_MASS_KG: f64 = 1.443_160_648e-25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar: f64,
    pub mass: f64,
    pub k_unit: f64,
    pub si: Option<SiAdapter>,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            k_unit: 1.0,
            si: None,
        }
    }
}

impl UnitSystem {
    /// Recoil frequency hbar k^2 / 2m for total wavenumber `k`.
    pub fn recoil_frequency(&self, k: f64) -> f64 {
        self.hbar * k * k / (2.0 * self.mass)
    }
}

/// Conversion between internal units and SI.
///
/// One internal length unit is `length_m` metres; the time unit follows from
/// hbar = m = 1 as `mass_kg * length_m^2 / hbar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiAdapter {
    pub length_m: f64,
    pub mass_kg: f64,
}

impl SiAdapter {
    pub fn new(length_m: f64, mass_kg: f64) -> Self {
        Self { length_m, mass_kg }
    }

    pub fn time_s(&self) -> f64 {
        self.mass_kg * self.length_m * self.length_m / HBAR_SI
    }

    pub fn velocity_m_per_s(&self) -> f64 {
        self.length_m / self.time_s()
    }

    pub fn length_to_si(&self, x: f64) -> f64 {
        x * self.length_m
    }

    pub fn length_from_si(&self, x_m: f64) -> f64 {
        x_m / self.length_m
    }

    pub fn time_to_si(&self, t: f64) -> f64 {
        t * self.time_s()
    }

    pub fn time_from_si(&self, t_s: f64) -> f64 {
        t_s / self.time_s()
    }

    pub fn rate_to_si(&self, w: f64) -> f64 {
        w / self.time_s()
    }

    pub fn rate_from_si(&self, w_per_s: f64) -> f64 {
        w_per_s * self.time_s()
    }

    pub fn velocity_to_si(&self, v: f64) -> f64 {
        v * self.velocity_m_per_s()
    }

    pub fn velocity_from_si(&self, v_m_per_s: f64) -> f64 {
        v_m_per_s / self.velocity_m_per_s()
    }

    pub fn wavenumber_to_si(&self, k: f64) -> f64 {
        k / self.length_m
    }

    pub fn wavenumber_from_si(&self, k_per_m: f64) -> f64 {
        k_per_m * self.length_m
    }
}
