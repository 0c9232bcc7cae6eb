//! End-to-end tests of the command-line surface: CSV shapes, config-file
//! merging and overrides, flagged-row behavior, and the exit-code contract.
//! The expensive `verify` subcommand is exercised by the acceptance gate,
//! not here.

use std::fs;
use std::process::{Command, Output};

fn spsb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spsb"))
        .args(args)
        .output()
        .expect("spawn spsb")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

/// Splits a CSV body into (header cells, row cell vectors).
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("nonempty CSV")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn cell_f64(row: &[String], idx: usize) -> f64 {
    row[idx].parse().unwrap_or_else(|_| {
        panic!("cell '{}' is not a float", row[idx]);
    })
}

#[test]
fn thresholds_defaults_flip_exactly_at_the_cusp() {
    let out = spsb(&["thresholds"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header, ["delta", "rho2_min", "rho2_max", "exists"]);
    assert_eq!(rows.len(), 31, "default detuning grid is 31 points");
    let cusp = 3.0f64.sqrt();
    for row in &rows {
        let delta = cell_f64(row, 0);
        let expected = delta > cusp;
        assert_eq!(
            row[3] == "true",
            expected,
            "existence flag at delta = {delta} (cusp √3)"
        );
        if expected {
            // The lower boundary is the pitchfork below δ = 2γs and the fold
            // γs/(2|g|) = 0.5 above it; the upper boundary always exceeds it.
            let lower = cell_f64(row, 1);
            if delta >= 2.0 {
                assert!((lower - 0.5).abs() < 1e-9);
            } else {
                assert!(lower > 0.5);
            }
            assert!(cell_f64(row, 2) > lower);
        }
    }
}

#[test]
fn thresholds_for_the_parametric_model_print_the_pump_onset() {
    let out = spsb(&["--model", "opo", "thresholds"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header, ["pump_threshold"]);
    assert_eq!(rows.len(), 1);
    // Default rates γp = γs = χ = 1 put the onset at pump amplitude 1.
    assert_eq!(rows[0][0], "1.000000000");
}

#[test]
fn steady_sweep_below_the_region_reports_trivial_rows_only() {
    let out = spsb(&[
        "steady",
        "--set",
        "sweep.start=0.05",
        "--set",
        "sweep.stop=0.3",
        "--set",
        "sweep.points=4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(
        header,
        [
            "control",
            "amp_sig1",
            "amp_sig2",
            "max_re_lambda",
            "bright_exists",
            "trivial_stable"
        ]
    );
    assert_eq!(rows.len(), 4);
    for row in &rows {
        assert_eq!(row[1], "0", "no bright amplitude below the region");
        assert_eq!(row[2], "0");
        assert_eq!(row[4], "false");
        assert_eq!(row[5], "true", "trivial state is stable down here");
    }
}

#[test]
fn steady_sweep_through_the_region_finds_the_bright_branch() {
    let out = spsb(&[
        "steady",
        "--set",
        "sweep.start=0.6",
        "--set",
        "sweep.stop=1.0",
        "--set",
        "sweep.points=3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (_, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert_eq!(row[4], "true", "bright branch exists at {}", row[0]);
        let a1 = cell_f64(row, 1);
        let a2 = cell_f64(row, 2);
        assert!(a1 > 0.1, "macroscopic signal amplitude");
        // Linear polarization: equal moduli on the two circular modes.
        assert!((a1 - a2).abs() < 1e-8 * (1.0 + a1));
        // With the Goldstone zero excluded, every remaining fluctuation
        // decays: the branch is strictly stable.
        assert!(cell_f64(row, 3) < -1e-3);
    }
}

#[test]
fn spectrum_shows_perfect_dark_mode_squeezing_at_zero_frequency() {
    let out = spsb(&["spectrum"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header, ["omega_over_gamma_s", "V"]);
    let zero_row = rows
        .iter()
        .find(|r| r[0] == "0")
        .expect("frequency grid contains ω = 0 exactly");
    assert!(
        cell_f64(zero_row, 1) < 1e-6,
        "V(0) = {} should vanish",
        zero_row[1]
    );
    // Far wings return to shot noise.
    let far = rows.last().expect("nonempty grid");
    assert!(cell_f64(far, 0) >= 100.0);
    assert!((cell_f64(far, 1) - 1.0).abs() < 1e-3);
}

#[test]
fn spectrum_off_the_bright_branch_is_a_clean_error() {
    let out = spsb(&["spectrum", "--set", "chi3.rho_sq=0.3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).starts_with("error:"),
        "unexpected stderr: {}",
        stderr(&out)
    );
}

#[test]
fn squeeze_sweep_flags_rows_outside_the_region_instead_of_failing() {
    let out = spsb(&[
        "squeeze-sweep",
        "--set",
        "sweep.start=0.4",
        "--set",
        "sweep.stop=1.2",
        "--set",
        "sweep.points=5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header, ["delta", "rho2", "g", "gamma_s", "V_min_at_0", "phi_opt"]);
    assert_eq!(rows.len(), 5);
    // 0.4 sits below the fold at 0.5 and 1.2 above the pitchfork at ≈1.134;
    // the three interior points are squeezed essentially perfectly.
    assert_eq!(rows[0][4], "nan");
    assert_eq!(rows[4][4], "nan");
    for row in &rows[1..4] {
        assert!(cell_f64(row, 4) < 1e-6, "V_min(0) = {}", row[4]);
    }
}

#[test]
fn oracle_table_matches_the_linearized_theory_at_reduced_cutoffs() {
    let out = spsb(&[
        "oracle",
        "--set",
        "oracle.opo_cutoff=8",
        "--set",
        "oracle.chi3_cutoff=5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header, ["point", "moment", "oracle", "linearized", "rel_dev"]);
    // Five calibration points, four moments each.
    assert_eq!(rows.len(), 20);
    for row in &rows {
        assert!(
            cell_f64(row, 4) < 2e-2,
            "relative deviation {} at {} / {}",
            row[4],
            row[0],
            row[1]
        );
    }
}

#[test]
fn config_file_applies_and_cli_overrides_win() {
    let dir = tempfile::tempdir().expect("tempdir");
    let file = dir.path().join("run.conf");
    fs::write(
        &file,
        "# sweep the upper part of the region\n\
         [chi3]\n\
         rho_sq = 0.8\n\
         [sweep]\n\
         start = 0.6\n\
         stop = 0.9\n\
         points = 4\n",
    )
    .expect("write config");
    let path = file.to_str().expect("utf-8 path");

    let out = spsb(&["--config", path, "steady"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (_, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 4, "grid from the config file");

    let out = spsb(&["--config", path, "--set", "sweep.points=2", "steady"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (_, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 2, "--set overrides the file");
}

#[test]
fn out_directory_receives_a_byte_identical_mirror() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("results");
    let out = spsb(&["--out", out_dir.to_str().unwrap(), "thresholds"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mirrored = fs::read(out_dir.join("thresholds.csv")).expect("mirrored CSV");
    assert_eq!(mirrored, out.stdout);
}

#[test]
fn identical_invocations_produce_identical_bytes() {
    let first = spsb(&["squeeze-sweep"]);
    let second = spsb(&["squeeze-sweep"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn config_errors_exit_2() {
    // Unknown key.
    let out = spsb(&["thresholds", "--set", "chi3.detuning=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("config error:"));

    // Unknown section.
    let out = spsb(&["thresholds", "--set", "lasers.power=1"]);
    assert_eq!(out.status.code(), Some(2));

    // Empty grid is a usage error.
    let out = spsb(&["thresholds", "--set", "thresholds.points=0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("at least one point"));

    // Missing config file.
    let out = spsb(&["--config", "/nonexistent/run.conf", "thresholds"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("config error:"));

    // Unknown key inside a config file, with its line number.
    let dir = tempfile::tempdir().expect("tempdir");
    let file = dir.path().join("bad.conf");
    fs::write(&file, "[chi3]\nrho_sq = 0.8\nchirp = 3\n").expect("write config");
    let out = spsb(&["--config", file.to_str().unwrap(), "thresholds"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    // Invalid numeric value.
    let out = spsb(&["thresholds", "--set", "chi3.rho_sq=bright"]);
    assert_eq!(out.status.code(), Some(2));

    // Invalid --model value (rejected by the argument parser).
    let out = spsb(&["--model", "dopo", "thresholds"]);
    assert_eq!(out.status.code(), Some(2));

    // squeeze-sweep has no parametric-oscillator variant.
    let out = spsb(&["--model", "opo", "squeeze-sweep"]);
    assert_eq!(out.status.code(), Some(2));
}
