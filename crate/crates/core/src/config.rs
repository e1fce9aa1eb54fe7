//! Run configuration: a line-oriented `key = value` file with `[section]`
//! headers and `#` comments.
//!
//! The schema is strict: unknown sections or keys, duplicates and malformed
//! values are rejected with the offending key and line. Everything omitted
//! takes the documented default, so an empty file describes the canonical
//! configuration (sigma0 = 10, delta_x = 1, k_p = k_c = 1/2, hence a = 25 and
//! k = 1, compensated trap).
//!
//! All quantities are in internal units (hbar = m = 1, lengths in `1/k_unit`)
//! except when `[units] system = si`, in which case velocities in `[motion]`
//! are in m/s, `[adiabaticity] tau3` in s and `omega_rms` in 1/s.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use crate::adiabaticity::MotionSpec;
use crate::beams::{BeamPairConfig, RelativeWidth, WidthLaw, WidthModel};
use crate::dynamics::{Absorbing, DynamicsSetup, EvolutionConfig};
use crate::error::{Error, Result};
use crate::fieldio::FieldFormat;
use crate::gauge::TrapSpec;
use crate::grid::Grid2D;
use crate::spectrum::SpectrumConfig;
use crate::units::{SiAdapter, UnitSystem, RB87_MASS_KG};

/// Every accepted `(section, key)` pair.
pub const SCHEMA: &[(&str, &[&str])] = &[
    (
        "beams",
        &[
            "omega0",
            "omega0_control",
            "sigma0",
            "sigma0_control",
            "delta_x",
            "x0",
            "k_p",
            "k_c",
            "omega21",
            "paraxial",
            "width_law",
        ],
    ),
    ("grid", &["x_min", "x_max", "y_min", "y_max", "nx", "ny"]),
    ("trap", &["mode", "omega"]),
    ("motion", &["vx", "vy", "v0", "dv"]),
    ("adiabaticity", &["tau3", "x", "y", "omega_rms"]),
    (
        "spectrum",
        &["n_q", "n_bands", "half_span_a", "points_per_a", "richardson"],
    ),
    (
        "evolution",
        &[
            "dt",
            "n_steps",
            "nx",
            "ny",
            "half_x",
            "half_y",
            "sample_every",
            "track_energy",
            "absorbing",
            "absorb_width",
            "force_x",
            "force_y",
            "px",
            "py",
            "offset_x",
            "offset_y",
            "sigma_y",
        ],
    ),
    (
        "hall",
        &[
            "force", "dt", "n_steps", "nx", "ny", "half_x", "half_y", "sigma_y",
        ],
    ),
    ("flux", &["x_min", "x_max", "y_min", "y_span"]),
    ("sweep", &["parameter", "values"]),
    ("outputs", &["directory", "format"]),
    ("units", &["system", "length_m", "mass_kg"]),
];

fn known(section: &str, key: Option<&str>) -> bool {
    SCHEMA
        .iter()
        .any(|(s, keys)| *s == section && key.is_none_or(|k| keys.contains(&k)))
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

/// Syntactically valid file contents, before typing and validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    pub path: PathBuf,
    entries: BTreeMap<(String, String), Entry>,
}

impl RawConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, format!("malformed section header '{content}'")))?
                    .trim();
                if !known(name, None) {
                    return Err(err(line, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected 'key = value', found '{content}'")))?;
            let key = key.trim();
            let value = value.trim().trim_matches('"').to_string();
            let sec = section
                .as_deref()
                .ok_or_else(|| err(line, format!("key '{key}' appears before any [section]")))?;
            if key.is_empty() {
                return Err(err(line, "empty key".into()));
            }
            if !known(sec, Some(key)) {
                return Err(err(line, format!("unknown key '{key}' in [{sec}]")));
            }
            let slot = (sec.to_string(), key.to_string());
            if let Some(prev) = entries.get(&slot) {
                let prev: &Entry = prev;
                return Err(err(
                    line,
                    format!("duplicate key '{key}' (first set on line {})", prev.line),
                ));
            }
            entries.insert(slot, Entry { value, line });
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
        })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|e| e.value.as_str())
    }

    /// Copy with one value replaced (or added); used by parameter sweeps.
    pub fn with_override(&self, section: &str, key: &str, value: &str) -> Result<Self> {
        if !known(section, Some(key)) {
            return Err(Error::config(
                format!("{section}.{key}"),
                "is not a configuration key",
            ));
        }
        let mut out = self.clone();
        let line = self
            .entries
            .get(&(section.to_string(), key.to_string()))
            .map_or(0, |e| e.line);
        out.entries.insert(
            (section.to_string(), key.to_string()),
            Entry {
                value: value.to_string(),
                line,
            },
        );
        Ok(out)
    }

    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> Error {
        let message = message.into();
        match self.entries.get(&(section.to_string(), key.to_string())) {
            Some(e) if e.line > 0 => Error::Parse {
                path: self.path.clone(),
                line: e.line,
                message,
            },
            _ => Error::Config {
                field: format!("{section}.{key}"),
                reason: format!("(default or override) {message}"),
            },
        }
    }

    fn parse_as<T: std::str::FromStr>(&self, section: &str, key: &str, what: &str) -> Result<Option<T>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| self.err(section, key, format!("{key} must be {what}, found '{v}'"))),
        }
    }

    fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        let v = self.parse_as::<f64>(section, key, "a number")?.unwrap_or(default);
        if !v.is_finite() {
            return Err(self.err(section, key, format!("{key} must be finite")));
        }
        Ok(v)
    }

    fn opt_f64(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.parse_as::<f64>(section, key, "a number")? {
            Some(v) if !v.is_finite() => Err(self.err(section, key, format!("{key} must be finite"))),
            other => Ok(other),
        }
    }

    fn positive(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        let v = self.f64_or(section, key, default)?;
        if v <= 0.0 {
            return Err(self.err(section, key, format!("{key} must be positive")));
        }
        Ok(v)
    }

    fn non_negative(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        let v = self.f64_or(section, key, default)?;
        if v < 0.0 {
            return Err(self.err(section, key, format!("{key} must be non-negative")));
        }
        Ok(v)
    }

    fn count(&self, section: &str, key: &str, default: usize, min: usize) -> Result<usize> {
        let v = self
            .parse_as::<usize>(section, key, "a non-negative integer")?
            .unwrap_or(default);
        if v < min {
            return Err(self.err(section, key, format!("{key} must be at least {min}")));
        }
        Ok(v)
    }

    fn flag(&self, section: &str, key: &str, default: bool) -> Result<bool> {
        Ok(self
            .parse_as::<bool>(section, key, "true or false")?
            .unwrap_or(default))
    }

    fn choice<'a>(&'a self, section: &str, key: &str, default: &'a str, options: &[&str]) -> Result<&'a str> {
        let v = self.get(section, key).unwrap_or(default);
        if !options.contains(&v) {
            return Err(self.err(
                section,
                key,
                format!("{key} must be one of {}, found '{v}'", options.join(", ")),
            ));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticitySettings {
    /// Excited-state lifetime.
    pub tau3: f64,
    /// Evaluation point, snapped to the nearest grid sample.
    pub point: (usize, usize),
    pub omega_rms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSettings {
    pub config: SpectrumConfig,
    pub n_q: usize,
    pub n_bands: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxSettings {
    /// Integration range in x; `None` means the whole grid.
    pub x_range: Option<(f64, f64)>,
    pub y_min: f64,
    pub y_span: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HallSettings {
    pub setup: DynamicsSetup,
    pub force: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub section: String,
    pub key: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub directory: PathBuf,
    pub format: FieldFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub beams: BeamPairConfig,
    pub omega21: f64,
    pub grid: Grid2D,
    pub trap: TrapSpec,
    /// Velocities in internal units.
    pub motion: MotionSpec,
    pub adiabaticity: AdiabaticitySettings,
    pub spectrum: SpectrumSettings,
    /// Setup of `evolve` and `cyclotron`.
    pub dynamics: DynamicsSetup,
    pub hall: HallSettings,
    pub flux: FluxSettings,
    pub sweep: Option<SweepSpec>,
    pub outputs: OutputSettings,
    pub units: UnitSystem,
    pub raw: RawConfig,
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_raw(RawConfig::parse(&text, path)?)
}

impl RunConfig {
    pub fn parse_str(text: &str, path: &Path) -> Result<Self> {
        Self::from_raw(RawConfig::parse(text, path)?)
    }

    pub fn canonical() -> Self {
        Self::parse_str("", Path::new("<canonical>")).expect("defaults are valid")
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let r = &raw;

        // units first: they decide how motion and lifetimes are read
        let system = r.choice("units", "system", "internal", &["internal", "si"])?;
        let adapter = SiAdapter::new(
            r.positive("units", "length_m", 1e-7)?,
            r.positive("units", "mass_kg", RB87_MASS_KG)?,
        );
        let si = system == "si";
        let units = UnitSystem {
            si: Some(adapter),
            ..UnitSystem::default()
        };

        let omega0 = r.positive("beams", "omega0", 1.0)?;
        let sigma0 = r.positive("beams", "sigma0", 10.0)?;
        let delta_x = r.f64_or("beams", "delta_x", 1.0)?;
        let x0 = r.f64_or("beams", "x0", 0.0)?;
        let k_p = r.positive("beams", "k_p", 0.5)?;
        let k_c = r.positive("beams", "k_c", 0.5)?;
        let mut beams = BeamPairConfig::symmetric(omega0, sigma0, x0, delta_x, k_p, k_c);
        beams.control.omega0 = r.positive("beams", "omega0_control", omega0)?;
        beams.control.sigma0 = r.positive("beams", "sigma0_control", sigma0)?;
        beams.width = WidthModel {
            paraxial: r.flag("beams", "paraxial", false)?,
            law: match r.choice("beams", "width_law", "standard", &["standard", "linear_y"])? {
                "standard" => WidthLaw::Standard,
                _ => WidthLaw::LinearInY,
            },
        };
        let omega21 = r.f64_or("beams", "omega21", 0.0)?;

        let trap = match r.choice("trap", "mode", "compensated", &["none", "compensated", "custom"])? {
            "none" => TrapSpec::None,
            "compensated" => TrapSpec::Compensated,
            _ => {
                if r.get("trap", "omega").is_none() {
                    return Err(r.err("trap", "mode", "mode = custom requires trap.omega"));
                }
                TrapSpec::Custom(r.non_negative("trap", "omega", 0.0)?)
            }
        };
        if !matches!(trap, TrapSpec::Custom(_)) && r.get("trap", "omega").is_some() {
            return Err(r.err("trap", "omega", "omega is only used with mode = custom"));
        }

        let (half, dx_default) = match beams.relative_width(0.0) {
            RelativeWidth::Finite(a) => (6.0 * a.abs(), a.abs() / 200.0),
            RelativeWidth::Infinite => (150.0, 0.125),
        };
        let x_min = r.f64_or("grid", "x_min", x0 - half)?;
        let x_max = r.f64_or("grid", "x_max", x0 + half)?;
        let nx_default = ((x_max - x_min) / dx_default).round().max(7.0) as usize + 1;
        let nx = r.count("grid", "nx", nx_default, 0)?;
        let ny = r.count("grid", "ny", 41, 0)?;
        let y_min = r.f64_or("grid", "y_min", 0.0)?;
        let y_max = r.f64_or("grid", "y_max", 10.0)?;
        let grid = Grid2D::new(x_min, x_max, y_min, y_max, nx, ny).map_err(|e| match e {
            Error::Config { field, reason } => r.err("grid", &field, format!("{field} {reason}")),
            other => other,
        })?;

        let vel = |key: &str, default: f64| -> Result<f64> {
            let v = r.f64_or("motion", key, default)?;
            Ok(if si { adapter.velocity_from_si(v) } else { v })
        };
        let motion = MotionSpec {
            v: [vel("vx", 0.0)?, vel("vy", 0.0)?],
            v0: vel("v0", 0.0)?,
            dv: match r.opt_f64("motion", "dv")? {
                Some(d) if d < 0.0 => return Err(r.err("motion", "dv", "dv must be non-negative")),
                Some(d) => Some(if si { adapter.velocity_from_si(d) } else { d }),
                None => None,
            },
        };

        let tau3 = r.positive("adiabaticity", "tau3", if si { 1e-7 } else { 1.0 })?;
        let px = r.f64_or("adiabaticity", "x", x0)?;
        let py = r.f64_or("adiabaticity", "y", y_min)?;
        if px < grid.x_min || px > grid.x_max {
            return Err(r.err("adiabaticity", "x", "x lies outside the grid"));
        }
        if py < grid.y_min || py > grid.y_max {
            return Err(r.err("adiabaticity", "y", "y lies outside the grid"));
        }
        let snap = |v: f64, lo: f64, h: f64, n: usize| (((v - lo) / h).round() as usize).min(n - 1);
        let omega_rms = match r.opt_f64("adiabaticity", "omega_rms")? {
            Some(w) if w <= 0.0 => {
                return Err(r.err("adiabaticity", "omega_rms", "omega_rms must be positive"))
            }
            Some(w) => Some(if si { adapter.rate_from_si(w) } else { w }),
            None => None,
        };
        let adiabaticity = AdiabaticitySettings {
            tau3: if si { adapter.time_from_si(tau3) } else { tau3 },
            point: (
                snap(px, grid.x_min, grid.dx, grid.nx),
                snap(py, grid.y_min, grid.dy, grid.ny),
            ),
            omega_rms,
        };

        let sd = SpectrumConfig::default();
        let spectrum = SpectrumSettings {
            config: SpectrumConfig {
                trap,
                omega21,
                half_span_a: r.positive("spectrum", "half_span_a", sd.half_span_a)?,
                points_per_a: r.positive("spectrum", "points_per_a", sd.points_per_a)?,
                richardson: r.flag("spectrum", "richardson", sd.richardson)?,
                ..sd
            },
            n_q: r.count("spectrum", "n_q", 21, 2)?,
            n_bands: r.count("spectrum", "n_bands", 3, 1)?,
        };

        let base = DynamicsSetup {
            beams,
            trap,
            omega21,
            ..DynamicsSetup::canonical()
        };
        let ev = EvolutionConfig::default();
        let absorbing = if r.flag("evolution", "absorbing", false)? {
            Absorbing::Mask {
                width: r.positive("evolution", "absorb_width", 10.0)?,
            }
        } else {
            if r.get("evolution", "absorb_width").is_some() {
                return Err(r.err("evolution", "absorb_width", "absorb_width needs absorbing = true"));
            }
            Absorbing::Off
        };
        let dynamics = DynamicsSetup {
            nx: r.count("evolution", "nx", base.nx, 8)?,
            ny: r.count("evolution", "ny", base.ny, 8)?,
            half_span: [
                r.positive("evolution", "half_x", base.half_span[0])?,
                r.positive("evolution", "half_y", base.half_span[1])?,
            ],
            evolution: EvolutionConfig {
                dt: r.positive("evolution", "dt", ev.dt)?,
                n_steps: r.count("evolution", "n_steps", ev.n_steps, 1)?,
                force: [
                    r.f64_or("evolution", "force_x", 0.0)?,
                    r.f64_or("evolution", "force_y", 0.0)?,
                ],
                absorbing,
                sample_every: r.count("evolution", "sample_every", ev.sample_every, 1)?,
                track_energy: r.flag("evolution", "track_energy", true)?,
            },
            kinetic_momentum: [
                r.f64_or("evolution", "px", base.kinetic_momentum[0])?,
                r.f64_or("evolution", "py", base.kinetic_momentum[1])?,
            ],
            offset: [
                r.f64_or("evolution", "offset_x", 0.0)?,
                r.f64_or("evolution", "offset_y", 0.0)?,
            ],
            sigma_y: r.opt_f64("evolution", "sigma_y")?,
            ..base
        };
        if let Some(s) = dynamics.sigma_y {
            if s <= 0.0 {
                return Err(r.err("evolution", "sigma_y", "sigma_y must be positive"));
            }
        }

        let hb = DynamicsSetup {
            beams,
            trap,
            omega21,
            ..DynamicsSetup::canonical_hall()
        };
        let hall = HallSettings {
            force: r.f64_or("hall", "force", 1e-4)?,
            setup: DynamicsSetup {
                nx: r.count("hall", "nx", hb.nx, 8)?,
                ny: r.count("hall", "ny", hb.ny, 8)?,
                half_span: [
                    r.positive("hall", "half_x", hb.half_span[0])?,
                    r.positive("hall", "half_y", hb.half_span[1])?,
                ],
                evolution: EvolutionConfig {
                    dt: r.positive("hall", "dt", hb.evolution.dt)?,
                    n_steps: r.count("hall", "n_steps", hb.evolution.n_steps, 1)?,
                    ..hb.evolution
                },
                sigma_y: Some(r.positive("hall", "sigma_y", hb.sigma_y.unwrap_or(30.0))?),
                ..hb
            },
        };

        let x_range = match (r.opt_f64("flux", "x_min")?, r.opt_f64("flux", "x_max")?) {
            (None, None) => None,
            (lo, hi) => {
                let (lo, hi) = (lo.unwrap_or(grid.x_min), hi.unwrap_or(grid.x_max));
                if hi <= lo {
                    return Err(r.err("flux", "x_max", "x_max must exceed x_min"));
                }
                Some((lo, hi))
            }
        };
        let flux = FluxSettings {
            x_range,
            y_min: r.f64_or("flux", "y_min", grid.y_min)?,
            y_span: r.positive("flux", "y_span", 2.0 * PI / beams.k())?,
        };

        let sweep = match r.get("sweep", "parameter") {
            None => {
                if r.get("sweep", "values").is_some() {
                    return Err(r.err("sweep", "values", "values need a sweep parameter"));
                }
                None
            }
            Some(p) => {
                let (section, key) = p
                    .split_once('.')
                    .ok_or_else(|| r.err("sweep", "parameter", "parameter must be written section.key"))?;
                if !known(section, Some(key)) || section == "sweep" || section == "outputs" {
                    return Err(r.err("sweep", "parameter", format!("cannot sweep '{p}'")));
                }
                let values: Vec<String> = r
                    .get("sweep", "values")
                    .ok_or_else(|| r.err("sweep", "parameter", "sweep needs values"))?
                    .split(',')
                    .map(|v| v.trim().to_string())
                    .filter(|v| !v.is_empty())
                    .collect();
                if values.is_empty() {
                    return Err(r.err("sweep", "values", "values must list at least one entry"));
                }
                Some(SweepSpec {
                    section: section.to_string(),
                    key: key.to_string(),
                    values,
                })
            }
        };

        let outputs = OutputSettings {
            directory: PathBuf::from(r.get("outputs", "directory").unwrap_or("out")),
            format: match r.choice("outputs", "format", "csv", &["csv", "bin"])? {
                "csv" => FieldFormat::Csv,
                _ => FieldFormat::Bin,
            },
        };

        let cfg = RunConfig {
            beams,
            omega21,
            grid,
            trap,
            motion,
            adiabaticity,
            spectrum,
            dynamics,
            hall,
            flux,
            sweep,
            outputs,
            units: if si { units } else { UnitSystem::default() },
            raw: raw.clone(),
        };
        cfg.beams.validate().map_err(|e| match e {
            Error::Config { field, reason } => {
                let key = field.rsplit('.').next().unwrap_or(&field).to_string();
                r.err("beams", &key, format!("{key} {reason}"))
            }
            other => other,
        })?;
        Ok(cfg)
    }

    /// Configuration of one sweep point.
    pub fn sweep_point(&self, value: &str) -> Result<RunConfig> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::config("sweep.parameter", "is not set"))?;
        RunConfig::from_raw(self.raw.with_override(&s.section, &s.key, value)?)
    }

    /// SI adapter when `[units] system = si`.
    pub fn si(&self) -> Option<SiAdapter> {
        self.units.si
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse_str(text, Path::new("test.cfg"))
    }

    #[test]
    fn empty_file_is_canonical() {
        let c = parse("").unwrap();
        assert_eq!(c.beams, BeamPairConfig::canonical());
        assert_eq!(c.beams.relative_width(0.0), RelativeWidth::Finite(25.0));
        assert_eq!(c.beams.k(), 1.0);
        assert_eq!(c.trap, TrapSpec::Compensated);
        assert_eq!((c.grid.x_min, c.grid.x_max, c.grid.nx), (-150.0, 150.0, 2401));
        assert!((c.grid.dx - 0.125).abs() < 1e-15);
        assert_eq!(c.outputs.format, FieldFormat::Csv);
        assert!(c.sweep.is_none());
        assert!((c.flux.y_span - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn zero_offset_is_valid() {
        let c = parse("[beams]\ndelta_x = 0\n").unwrap();
        assert_eq!(c.beams.relative_width(0.0), RelativeWidth::Infinite);
        assert_eq!((c.grid.x_min, c.grid.x_max), (-150.0, 150.0));
    }

    #[test]
    fn validation_names_key_and_line() {
        let e = parse("# beams\n[beams]\nsigma0 = -1\n").unwrap_err();
        assert_eq!(e.to_string(), "test.cfg: sigma0 must be positive (line 3)");
        let e = parse("[grid]\nnx = 4\n").unwrap_err();
        let s = e.to_string();
        assert!(s.contains("nx below minimum") && s.contains("(line 2)"), "{s}");
    }

    #[test]
    fn strict_schema() {
        let s = parse("[beams]\nsigma = 3\n").unwrap_err().to_string();
        assert!(s.contains("unknown key 'sigma'") && s.contains("line 2"), "{s}");
        assert!(parse("[lasers]\n")
            .unwrap_err()
            .to_string()
            .contains("unknown section"));
        assert!(parse("sigma0 = 3\n")
            .unwrap_err()
            .to_string()
            .contains("before any [section]"));
        assert!(parse("[beams]\nsigma0 = 3\nsigma0 = 4\n")
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
        assert!(parse("[beams]\nsigma0 3\n").is_err());
        assert!(parse("[beams]\nsigma0 = ten\n")
            .unwrap_err()
            .to_string()
            .contains("must be a number"));
        assert!(parse("[trap]\nmode = custom\n").is_err());
        assert!(parse("[trap]\nomega = 0.1\n").is_err());
        assert!(parse("[outputs]\nformat = hdf5\n").is_err());
    }

    #[test]
    fn comments_quotes_and_sections() {
        let c = parse(
            "# comment\n[beams]  \nsigma0 = 20 # trailing\n\n[trap]\nmode = custom\nomega = 0.02\n[outputs]\ndirectory = \"runs/a\"\nformat = bin\n",
        )
        .unwrap();
        assert_eq!(c.beams.probe.sigma0, 20.0);
        assert_eq!(c.beams.relative_width(0.0), RelativeWidth::Finite(100.0));
        assert_eq!(c.trap, TrapSpec::Custom(0.02));
        assert_eq!(c.outputs.directory, PathBuf::from("runs/a"));
        assert_eq!(c.outputs.format, FieldFormat::Bin);
    }

    #[test]
    fn si_units_convert_motion() {
        let c = parse("[units]\nsystem = si\n[motion]\nvy = 0.01\n[adiabaticity]\ntau3 = 1e-7\n").unwrap();
        let si = c.si().unwrap();
        assert!((si.velocity_to_si(c.motion.v[1]) - 0.01).abs() < 1e-15);
        assert!((si.time_to_si(c.adiabaticity.tau3) - 1e-7).abs() < 1e-20);
        assert!(parse("").unwrap().si().is_none());
    }

    #[test]
    fn sweep_points() {
        let c = parse("[beams]\nsigma0 = 10\n[sweep]\nparameter = beams.sigma0\nvalues = 8, 12\n").unwrap();
        let s = c.sweep.as_ref().unwrap();
        assert_eq!(s.values, vec!["8", "12"]);
        let p = c.sweep_point("12").unwrap();
        assert_eq!(p.beams.probe.sigma0, 12.0);
        assert!(c
            .sweep_point("-3")
            .unwrap_err()
            .to_string()
            .contains("sigma0 must be positive"));
        assert!(parse("[sweep]\nparameter = beams.nothing\nvalues = 1\n").is_err());
        assert!(parse("[sweep]\nparameter = beams.sigma0\n").is_err());
    }

    #[test]
    fn adiabaticity_point_snaps_to_grid() {
        let c = parse("[adiabaticity]\nx = 0.06\ny = 2.6\n").unwrap();
        assert_eq!(c.adiabaticity.point, (1200, 10));
        assert!(parse("[adiabaticity]\nx = 1000\n").is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let e = parse_config(Path::new("/no/such/gaugesim.cfg")).unwrap_err();
        assert!(e.to_string().contains("/no/such/gaugesim.cfg"));
    }

    proptest! {
        #[test]
        fn unknown_keys_always_rejected(key in "[a-z_]{1,12}", sec in 0usize..12, line in 1usize..5) {
            let (section, keys) = SCHEMA[sec];
            prop_assume!(!keys.contains(&key.as_str()));
            let text = format!("{}[{section}]\n{key} = 1\n", "\n".repeat(line - 1));
            let s = parse(&text).unwrap_err().to_string();
            let expected = format!("(line {})", line + 1);
            prop_assert!(s.contains(&key) && s.contains(&expected), "{}", s);
        }

        #[test]
        fn numeric_values_round_trip(sigma0 in 1.0f64..50.0, dx in 0.1f64..5.0) {
            let c = parse(&format!("[beams]\nsigma0 = {sigma0}\ndelta_x = {dx}\n")).unwrap();
            prop_assert_eq!(c.beams.probe.sigma0, sigma0);
            prop_assert!((c.beams.delta_x() - dx).abs() < 1e-12);
        }
    }
}
