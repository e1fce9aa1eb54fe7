use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use gaugesim_core::adiabaticity::adiabaticity_report;
use gaugesim_core::config::{parse_config, RunConfig};
use gaugesim_core::dynamics::{evolve, run_cyclotron, run_hall_drift, Trajectory};
use gaugesim_core::fieldio::{table_csv, write_field, write_text, FieldFormat};
use gaugesim_core::spectrum::{landau_analysis, landau_bands};
use gaugesim_core::verify::{run_check, CHECKS};
use gaugesim_core::{
    curl_z, field_scales, flux_through, make_grid, ratio_field, scalar_potential, vector_potential,
    RelativeWidth, ScalarField2D,
};

#[derive(Parser)]
#[command(
    name = "gaugesim",
    version,
    about = "Light-induced gauge fields for Lambda atoms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[outputs] directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Field file format; overrides `[outputs] format`.
    #[arg(long)]
    format: Option<FieldFormat>,
    /// Recorded with the outputs; no current computation is stochastic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// A_y, B_z, V_eff and V_total grids plus a table of scales.
    Fields(Common),
    /// Landau-gauge band structure and level spacings.
    Bands(Common),
    /// Wavepacket evolution with the `[evolution]` settings.
    Evolve(Common),
    /// Cyclotron orbit and fitted period.
    Cyclotron(Common),
    /// Hall drift under the `[hall]` force.
    Hall(Common),
    /// Nonadiabatic rate and dark-state lifetime.
    Adiab(Common),
    /// Magnetic flux through a rectangle.
    Flux {
        #[command(flatten)]
        common: Common,
        /// Integrate over x0 +- 20|a|, where the crossover is complete.
        #[arg(long)]
        x_all: bool,
        /// Extent of the y range; overrides `[flux] y_span`.
        #[arg(long)]
        y_span: Option<f64>,
    },
    /// Acceptance checks on the canonical configuration.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<FieldFormat>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated check numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        checks: Vec<u32>,
    },
    /// `fields` and `bands` for every value of `[sweep] parameter`.
    Sweep(Common),
}

struct Run {
    cfg: RunConfig,
    out: PathBuf,
    format: FieldFormat,
}

impl Run {
    fn load(c: &Common) -> Result<Self> {
        let cfg = parse_config(&c.config)?;
        let out = c.out.clone().unwrap_or_else(|| cfg.outputs.directory.clone());
        let format = c.format.unwrap_or(cfg.outputs.format);
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        if let Some(seed) = c.seed {
            write_text(&out.join("seed.txt"), &format!("{seed}\n"))?;
        }
        Ok(Self { cfg, out, format })
    }

    fn at(cfg: RunConfig, out: PathBuf, format: FieldFormat) -> Result<Self> {
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        Ok(Self { cfg, out, format })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn field(&self, name: &str, f: &ScalarField2D) -> Result<()> {
        let p = self.path(&format!("{name}.{}", self.format.extension()));
        write_field(f, &p, self.format)?;
        Ok(())
    }
}

fn kv(lines: &[(&str, String)]) -> String {
    lines.iter().fold(String::new(), |mut s, (k, v)| {
        let _ = writeln!(s, "{k} = {v}");
        s
    })
}

fn cmd_fields(run: &Run) -> Result<()> {
    let cfg = &run.cfg;
    let g = cfg.grid;
    let rf = ratio_field(&cfg.beams, &g)?;
    let a = vector_potential(&rf);
    let b = curl_z(&a);
    let zero = ScalarField2D::zeros(g);
    let v_eff = scalar_potential(&rf, &zero, &zero, 0.0);
    let trap = cfg.trap.field(&cfg.beams, &g);
    let v_total = scalar_potential(&rf, &trap, &trap, cfg.omega21);
    run.field("A_y", &a.component_y())?;
    run.field("B_z", &b)?;
    run.field("V_eff", &v_eff)?;
    run.field("V_total", &v_total)?;

    let k = cfg.beams.k();
    let mut rows = vec![
        ("k", k.to_string()),
        ("trap_omega", cfg.trap.omega(&cfg.beams).to_string()),
        ("max_abs_B", b.max_abs().to_string()),
    ];
    let x0 = cfg.beams.x0();
    match cfg.beams.relative_width(0.0) {
        RelativeWidth::Finite(av) => {
            let s = field_scales(av, k, 1.0);
            rows.extend([
                ("a", av.to_string()),
                ("b0", s.b0.to_string()),
                ("ell_b", s.ell_b.to_string()),
                ("omega_c", s.omega_c.to_string()),
                ("omega_rec", s.omega_rec.to_string()),
                ("omega_ext", s.omega_ext.to_string()),
                ("flux_area", s.flux_area.to_string()),
                ("x_eff", s.x_eff.to_string()),
                ("gauge_peak", s.gauge_peak.to_string()),
            ]);
            // cut along x at y_min; V_eff in units of omega_rec (1 + 1/4a^2k^2)
            let iy = 0;
            let u: Vec<f64> = g.xs().iter().map(|x| (x - x0) / (2.0 * av)).collect();
            let bn: Vec<f64> = (0..g.nx).map(|i| b.at(i, iy) / s.b0).collect();
            let vn: Vec<f64> = (0..g.nx)
                .map(|i| v_eff.at(i, iy) / (4.0 * s.gauge_peak))
                .collect();
            let vt: Vec<f64> = (0..g.nx).map(|i| v_total.at(i, iy)).collect();
            write_text(
                &run.path("profile.csv"),
                &table_csv(
                    &["u", "B_over_B0", "V_eff_over_unit", "V_total"],
                    &[&u, &bn, &vn, &vt],
                ),
            )?;
        }
        RelativeWidth::Infinite => rows.push(("a", "inf".into())),
    }
    let mut text = String::from("name,value\n");
    for (n, v) in &rows {
        let _ = writeln!(text, "{n},{v}");
    }
    write_text(&run.path("scales.csv"), &text)?;
    println!("max |B_z| = {}", b.max_abs());
    Ok(())
}

fn cmd_bands(run: &Run) -> Result<()> {
    let cfg = &run.cfg;
    let sp = &cfg.spectrum;
    let k = cfg.beams.k();
    let bands = match cfg.beams.relative_width(0.0) {
        RelativeWidth::Finite(_) => {
            let (bands, report) = landau_analysis(&cfg.beams, &sp.config, sp.n_q, sp.n_bands.max(3))?;
            let spacings: Vec<String> = report.spacings.iter().map(|s| s.to_string()).collect();
            write_text(
                &run.path("landau.txt"),
                &kv(&[
                    ("q_min", report.q.to_string()),
                    ("hbar_omega_c", report.hbar_omega_c.to_string()),
                    ("spacings", spacings.join(", ")),
                    ("max_rel_deviation", report.max_rel_deviation.to_string()),
                    ("ground_band_width", bands.band_width(0).to_string()),
                    (
                        "omega_c_over_omega_ext",
                        report.omega_c_over_omega_ext.to_string(),
                    ),
                ]),
            )?;
            println!(
                "band minimum q = {:.6}, spacings {:?}, ground band width {:.3e}",
                report.q,
                report.spacings,
                bands.band_width(0)
            );
            bands
        }
        RelativeWidth::Infinite => {
            let n = sp.n_q.max(2);
            let qs: Vec<f64> = (0..n).map(|i| -k + k * i as f64 / (n - 1) as f64).collect();
            landau_bands(&cfg.beams, &sp.config, &qs, sp.n_bands)?
        }
    };
    let mut headers = vec!["q".to_string()];
    headers.extend((0..bands.n_bands()).map(|b| format!("E{b}")));
    let h: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut cols: Vec<&[f64]> = vec![&bands.q_values];
    cols.extend(bands.energies.iter().map(Vec::as_slice));
    write_text(&run.path("bands.csv"), &table_csv(&h, &cols))?;
    Ok(())
}

fn write_trajectory(run: &Run, t: &Trajectory) -> Result<()> {
    let mut h = vec!["t", "mean_x", "mean_y", "sigma_x", "sigma_y", "norm"];
    let mut cols: Vec<&[f64]> = vec![&t.times, &t.mean_x, &t.mean_y, &t.sigma_x, &t.sigma_y, &t.norm];
    if !t.energy.is_empty() {
        h.push("energy");
        cols.push(&t.energy);
    }
    write_text(&run.path("trajectory.csv"), &table_csv(&h, &cols))?;
    Ok(())
}

fn warn(w: &Option<String>) {
    if let Some(w) = w {
        eprintln!("warning: {w}");
    }
}

fn cmd_evolve(run: &Run) -> Result<()> {
    let s = &run.cfg.dynamics;
    let grid = s.grid()?;
    let profile = s.profile(&grid)?;
    let state = s.initial_state(&grid, &profile)?;
    let (last, traj) = evolve(&state, &profile, &s.evolution)?;
    write_trajectory(run, &traj)?;
    run.field("density", &last.density())?;
    let m = last.moments();
    let mut lines = vec![
        ("t_final", last.t.to_string()),
        ("norm", m.norm.to_string()),
        ("mean_x", m.mean_x.to_string()),
        ("mean_y", m.mean_y.to_string()),
        ("max_norm_drift", traj.max_norm_drift().to_string()),
    ];
    if !traj.energy.is_empty() {
        lines.push(("max_energy_drift", traj.max_energy_drift().to_string()));
    }
    write_text(&run.path("evolve.txt"), &kv(&lines))?;
    println!(
        "t = {}, <x> = {:.6}, <y> = {:.6}, norm = {:.12}",
        last.t, m.mean_x, m.mean_y, m.norm
    );
    Ok(())
}

fn cmd_cyclotron(run: &Run) -> Result<()> {
    let r = run_cyclotron(&run.cfg.dynamics)?;
    write_trajectory(run, &r.trajectory)?;
    let mut lines = vec![
        ("period", r.period.to_string()),
        ("expected_period", r.expected_period.to_string()),
        ("orbit_radius", r.orbit_radius.to_string()),
        ("max_norm_drift", r.trajectory.max_norm_drift().to_string()),
    ];
    if !r.trajectory.energy.is_empty() {
        lines.push(("max_energy_drift", r.trajectory.max_energy_drift().to_string()));
    }
    write_text(&run.path("cyclotron.txt"), &kv(&lines))?;
    warn(&r.warning);
    println!(
        "period {:.3} (2 pi / omega_c = {:.3})",
        r.period, r.expected_period
    );
    Ok(())
}

fn cmd_hall(run: &Run) -> Result<()> {
    let h = &run.cfg.hall;
    let r = run_hall_drift(&h.setup, h.force)?;
    write_trajectory(run, &r.trajectory)?;
    write_text(
        &run.path("hall.txt"),
        &kv(&[
            ("force_y", h.force.to_string()),
            ("drift_velocity", r.drift_velocity.to_string()),
            ("expected", r.expected.to_string()),
            ("oscillation", r.oscillation.to_string()),
        ]),
    )?;
    warn(&r.warning);
    println!("drift {:.6} (F/B0 = {:.6})", r.drift_velocity, r.expected);
    Ok(())
}

fn cmd_adiab(run: &Run) -> Result<()> {
    let cfg = &run.cfg;
    let ad = &cfg.adiabaticity;
    let rf = ratio_field(&cfg.beams, &cfg.grid)?;
    let r = adiabaticity_report(&rf, &cfg.beams, &cfg.motion, ad.point, ad.tau3, ad.omega_rms)?;
    let mut lines = vec![
        ("x", r.x.to_string()),
        ("y", r.y.to_string()),
        ("vx", r.velocity[0].to_string()),
        ("vy", r.velocity[1].to_string()),
        ("f_general", r.f_general.to_string()),
        ("f_planar", r.f_planar.to_string()),
        ("omega_rms", r.omega_rms.to_string()),
        ("ratio_general", r.ratio_general.to_string()),
        ("ratio_planar", r.ratio_planar.to_string()),
        ("tau3", r.tau_3.to_string()),
        ("tau_d_general", r.tau_d_general.to_string()),
        ("tau_d_planar", r.tau_d_planar.to_string()),
        ("cos_theta", r.cos_theta.to_string()),
        ("discrepancy", r.discrepancy.to_string()),
        ("omega21_doppler", r.omega21.to_string()),
    ];
    if let Some(si) = cfg.si() {
        lines.extend([
            ("si_f_general_per_s", si.rate_to_si(r.f_general).to_string()),
            ("si_f_planar_per_s", si.rate_to_si(r.f_planar).to_string()),
            ("si_omega_rms_per_s", si.rate_to_si(r.omega_rms).to_string()),
            ("si_tau_d_general_s", si.time_to_si(r.tau_d_general).to_string()),
            ("si_tau_d_planar_s", si.time_to_si(r.tau_d_planar).to_string()),
        ]);
    }
    let text = kv(&lines);
    write_text(&run.path("adiabaticity.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn cmd_flux(run: &Run, x_all: bool, y_span: Option<f64>) -> Result<()> {
    let cfg = &run.cfg;
    let g = cfg.grid;
    let span = y_span.unwrap_or(cfg.flux.y_span);
    if !(span > 0.0) {
        bail!("--y-span must be positive");
    }
    let (x_lo, x_hi, nx) = if x_all {
        let half = match cfg.beams.relative_width(0.0) {
            RelativeWidth::Finite(a) => 20.0 * a.abs(),
            RelativeWidth::Infinite => 0.5 * (g.x_max - g.x_min),
        };
        let x0 = cfg.beams.x0();
        (x0 - half, x0 + half, g.nx.max(2001))
    } else {
        (g.x_min, g.x_max, g.nx)
    };
    let y0 = cfg.flux.y_min;
    let fg = make_grid(x_lo, x_hi, y0, y0 + span, nx, g.ny)?;
    let b = curl_z(&vector_potential(&ratio_field(&cfg.beams, &fg)?));
    let (rx_lo, rx_hi) = if x_all {
        (x_lo, x_hi)
    } else {
        cfg.flux.x_range.unwrap_or((x_lo, x_hi))
    };
    let f = flux_through(&b, (rx_lo, rx_hi), (y0, y0 + span))?;
    write_text(
        &run.path("flux.csv"),
        &table_csv(
            &["x_min", "x_max", "y_min", "y_max", "flux", "n_quanta"],
            &[&[rx_lo], &[rx_hi], &[y0], &[y0 + span], &[f.flux], &[f.n_quanta]],
        ),
    )?;
    println!("flux = {:.9}, n_quanta = {:.6}", f.flux, f.n_quanta);
    Ok(())
}

fn cmd_verify(ids: &[u32], out: Option<&Path>) -> Result<bool> {
    let ids: Vec<u32> = if ids.is_empty() {
        CHECKS.iter().map(|c| c.0).collect()
    } else {
        ids.to_vec()
    };
    let mut all = true;
    let mut text = String::new();
    for id in ids {
        let r = run_check(id);
        all &= r.passed;
        println!("{r}");
        let _ = writeln!(text, "{r}");
    }
    let note = "note: B = curl A gives B(x0) = -k/4a; the planar expression written with the opposite sign would give +k/4a";
    println!("{note}");
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_text(&dir.join("verify.txt"), &format!("{text}{note}\n"))?;
    }
    Ok(all)
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn cmd_sweep(run: &Run) -> Result<bool> {
    let sweep = run
        .cfg
        .sweep
        .clone()
        .context("sweep needs [sweep] parameter and values in the configuration")?;
    let results: Vec<(String, Result<()>)> = sweep
        .values
        .par_iter()
        .map(|v| {
            let dir = run.out.join(format!("{}_{}", sweep.key, slug(v)));
            let res = run
                .cfg
                .sweep_point(v)
                .map_err(anyhow::Error::from)
                .and_then(|cfg| Run::at(cfg, dir, run.format))
                .and_then(|point| {
                    cmd_fields(&point)?;
                    cmd_bands(&point)
                });
            (v.clone(), res)
        })
        .collect();
    let mut ok = true;
    for (v, r) in results {
        match r {
            Ok(()) => println!("{}.{} = {v}: done", sweep.section, sweep.key),
            Err(e) => {
                ok = false;
                eprintln!("{}.{} = {v}: error: {e:#}", sweep.section, sweep.key);
            }
        }
    }
    Ok(ok)
}

fn configure_threads() -> Result<()> {
    if let Ok(s) = std::env::var("GAUGESIM_THREADS") {
        let n: usize = s
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("GAUGESIM_THREADS must be a positive integer, found '{s}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Fields(c) => cmd_fields(&Run::load(&c)?)?,
        Command::Bands(c) => cmd_bands(&Run::load(&c)?)?,
        Command::Evolve(c) => cmd_evolve(&Run::load(&c)?)?,
        Command::Cyclotron(c) => cmd_cyclotron(&Run::load(&c)?)?,
        Command::Hall(c) => cmd_hall(&Run::load(&c)?)?,
        Command::Adiab(c) => cmd_adiab(&Run::load(&c)?)?,
        Command::Flux {
            common,
            x_all,
            y_span,
        } => cmd_flux(&Run::load(&common)?, x_all, y_span)?,
        Command::Verify {
            config,
            out,
            format: _,
            seed: _,
            checks,
        } => {
            if let Some(p) = config {
                // only validated; the checks always use the canonical setup
                parse_config(&p)?;
            }
            return cmd_verify(&checks, out.as_deref());
        }
        Command::Sweep(c) => return cmd_sweep(&Run::load(&c)?),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
