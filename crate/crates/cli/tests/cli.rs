use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gaugesim_core::fieldio::read_field;

fn gaugesim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaugesim"))
        .args(args)
        .current_dir(dir)
        .env("GAUGESIM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn fields_peak_on_canonical_config() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(t.path(), "empty.cfg", "");
    let o = gaugesim(&["fields", "--config", &cfg, "--out", "f"], t.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let b = read_field(&t.path().join("f/B_z.csv")).unwrap();
    assert!((b.max_abs() - 0.01).abs() < 1e-9, "{}", b.max_abs());
    for name in ["A_y.csv", "V_eff.csv", "V_total.csv", "scales.csv", "profile.csv"] {
        assert!(t.path().join("f").join(name).exists(), "{name}");
    }
    let scales = fs::read_to_string(t.path().join("f/scales.csv")).unwrap();
    assert!(
        scales.contains("omega_c,0.01\n") && scales.contains("ell_b,10\n"),
        "{scales}"
    );
}

#[test]
fn binary_fields_are_deterministic() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(t.path(), "c.cfg", "[grid]\nnx = 201\nny = 9\n");
    for out in ["r1", "r2"] {
        let o = gaugesim(
            &[
                "fields", "--config", &cfg, "--out", out, "--format", "bin", "--seed", "7",
            ],
            t.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["A_y.bin", "B_z.bin", "V_eff.bin", "V_total.bin"] {
        let a = fs::read(t.path().join("r1").join(name)).unwrap();
        let b = fs::read(t.path().join("r2").join(name)).unwrap();
        assert!(a.starts_with(b"GFLD1"));
        assert_eq!(a, b, "{name}");
    }
    assert_eq!(fs::read_to_string(t.path().join("r1/seed.txt")).unwrap(), "7\n");
}

#[test]
fn flux_over_full_crossover_is_one_quantum() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(t.path(), "empty.cfg", "");
    let o = gaugesim(
        &[
            "flux",
            "--config",
            &cfg,
            "--out",
            "fl",
            "--x-all",
            "--y-span",
            "6.28318530718",
        ],
        t.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("n_quanta = -1.000000"), "{}", stdout(&o));
    let table = fs::read_to_string(t.path().join("fl/flux.csv")).unwrap();
    let row: Vec<f64> = table
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((row[5] + 1.0).abs() < 1e-6, "{}", row[5]);
}

#[test]
fn bands_and_adiabaticity_outputs() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        t.path(),
        "si.cfg",
        "[units]\nsystem = si\n[motion]\nvy = 0.01\n[adiabaticity]\ntau3 = 1e-7\nomega_rms = 1e8\n[spectrum]\nn_q = 5\n",
    );
    let o = gaugesim(&["bands", "--config", &cfg, "--out", "b"], t.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let bands = fs::read_to_string(t.path().join("b/bands.csv")).unwrap();
    assert!(bands.starts_with("q,E0,E1,E2\n"));
    assert_eq!(bands.lines().count(), 1 + 6);

    let o = gaugesim(&["adiab", "--config", &cfg, "--out", "a"], t.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(t.path().join("a/adiabaticity.txt")).unwrap();
    let tau: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("si_tau_d_general_s = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((tau - 0.4).abs() < 1e-9, "{tau}");
    assert!(report.contains("discrepancy = 0.7071067811865"));
}

#[test]
fn small_evolution_writes_trajectory() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        t.path(),
        "e.cfg",
        "[evolution]\nnx = 64\nny = 64\nhalf_x = 60\nhalf_y = 60\nn_steps = 40\nsample_every = 10\ndt = 0.5\n",
    );
    let o = gaugesim(&["evolve", "--config", &cfg, "--out", "e"], t.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let traj = fs::read_to_string(t.path().join("e/trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,mean_x,mean_y,sigma_x,sigma_y,norm,energy\n"));
    assert_eq!(traj.lines().count(), 1 + 5);
    assert!(t.path().join("e/density.csv").exists());
}

#[test]
fn config_errors_name_key_and_line() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(t.path(), "bad.cfg", "[beams]\n# waist\nsigma0 = -1\n");
    let o = gaugesim(&["fields", "--config", &cfg], t.path());
    assert!(!o.status.success());
    assert!(
        stderr(&o).contains("sigma0 must be positive (line 3)"),
        "{}",
        stderr(&o)
    );

    let cfg = write_cfg(t.path(), "typo.cfg", "[grid]\nnxx = 10\n");
    let o = gaugesim(&["fields", "--config", &cfg], t.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown key 'nxx'"));

    let o = gaugesim(&["fields", "--config", "missing.cfg"], t.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("missing.cfg"));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let t = tempfile::tempdir().unwrap();
    let o = gaugesim(&["frobnicate"], t.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn verify_selected_checks() {
    let t = tempfile::tempdir().unwrap();
    let o = gaugesim(&["verify", "--checks", "1,2,3,4,7,8", "--out", "v"], t.path());
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(
        out.lines().filter(|l| l.starts_with("[PASS]")).count(),
        6,
        "{out}"
    );
    assert!(t.path().join("v/verify.txt").exists());

    let o = gaugesim(&["verify", "--checks", "99"], t.path());
    assert!(!o.status.success());
    assert!(stdout(&o).contains("[FAIL] 99."));
}

#[test]
fn sweep_writes_one_directory_per_point() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        t.path(),
        "s.cfg",
        "[grid]\nnx = 201\nny = 9\n[spectrum]\nn_q = 3\npoints_per_a = 40\n[sweep]\nparameter = beams.sigma0\nvalues = 8, 12\n",
    );
    let o = gaugesim(&["sweep", "--config", &cfg, "--out", "s"], t.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for v in ["8", "12"] {
        let dir = t.path().join(format!("s/sigma0_{v}"));
        assert!(
            dir.join("B_z.csv").exists() && dir.join("bands.csv").exists(),
            "{v}"
        );
    }
    let b8 = read_field(&t.path().join("s/sigma0_8/B_z.csv"))
        .unwrap()
        .max_abs();
    // a = sigma0^2 / 4: peak k / 4a = 1 / sigma0^2
    assert!((b8 - 1.0 / 64.0).abs() < 1e-6, "{b8}");

    let cfg = write_cfg(
        t.path(),
        "bad_sweep.cfg",
        "[sweep]\nparameter = beams.sigma0\nvalues = 10, -2\n",
    );
    let o = gaugesim(&["sweep", "--config", &cfg, "--out", "s2"], t.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("sigma0 must be positive"));
}

#[test]
fn zero_offset_gives_zero_field() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        t.path(),
        "z.cfg",
        "[beams]\ndelta_x = 0\n[grid]\nnx = 101\nny = 9\n",
    );
    let o = gaugesim(&["fields", "--config", &cfg, "--out", "z"], t.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_field(&t.path().join("z/B_z.csv")).unwrap().max_abs(), 0.0);
}
