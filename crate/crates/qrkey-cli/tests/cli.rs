//! Behavioral tests of the command-line surface: exit codes, column
//! contracts and the qualitative shapes the sweep families must reproduce.

use std::process::{Command, Output};

fn qrkey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrkey"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn keyrate_ideal_point_has_equal_keys() {
    let out = qrkey(&[
        "keyrate", "--setup", "oqr", "--L", "600", "--n", "2", "--k", "0", "--pg", "1", "--eta",
        "1", "--f0", "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = &data_rows(&text)[0];
    let rate: f64 = row[0].parse().unwrap();
    let key_dd: f64 = row[7].parse().unwrap();
    let key_di: f64 = row[8].parse().unwrap();
    assert!(rate > 0.0);
    assert_eq!(key_dd, key_di);
    assert!((key_dd - rate).abs() < 1e-12 * rate);
}

#[test]
fn keyrate_distilled_di_key_vanishes() {
    let out = qrkey(&[
        "keyrate", "--setup", "oqr", "--L", "600", "--n", "3", "--k", "1", "--pg", "0.99",
        "--eta", "0.975", "--f0", "0.99",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = &data_rows(&text)[0];
    assert_eq!(row[8], "0");
    assert!(row[7].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn keyrate_hqr_pure_source_is_rateless() {
    let out = qrkey(&[
        "keyrate", "--setup", "hqr", "--L", "300", "--n", "2", "--k", "0", "--pg", "0.995",
        "--eta", "0.975", "--f0", "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = &data_rows(&text)[0];
    assert_eq!(row[0], "0");
    assert_eq!(row[7], "0");
    assert_eq!(row[8], "0");
}

#[test]
fn domain_errors_exit_2_and_name_the_flag() {
    let cases: [(&[&str], &str); 3] = [
        (
            &[
                "keyrate", "--setup", "oqr", "--L", "600", "--n", "2", "--k", "0", "--pg", "1.5",
                "--eta", "1", "--f0", "1",
            ],
            "--pg",
        ),
        (
            &[
                "keyrate", "--setup", "oqr", "--L", "600", "--n", "2", "--k", "0", "--pg", "1",
                "--eta", "0", "--f0", "1",
            ],
            "--eta",
        ),
        (
            &[
                "keyrate", "--setup", "oqr", "--L", "-5", "--n", "2", "--k", "0", "--pg", "1",
                "--eta", "1", "--f0", "1",
            ],
            "--L",
        ),
    ];
    for (args, flag) in cases {
        let out = qrkey(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr.clone()).unwrap();
        assert!(err.contains(flag), "stderr {err:?} should name {flag}");
        assert_eq!(err.lines().count(), 1, "one-line message, got {err:?}");
    }
}

#[test]
fn hqr_gate_quality_is_restricted_at_the_cli() {
    let out = qrkey(&[
        "keyrate", "--setup", "hqr", "--L", "300", "--n", "2", "--k", "0", "--pg", "0.4",
        "--eta", "0.975", "--f0", "0.9",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("--pg"), "{err:?}");
    // the same value is fine for the gate-based setup
    let out = qrkey(&[
        "keyrate", "--setup", "oqr", "--L", "300", "--n", "2", "--k", "0", "--pg", "0.4",
        "--eta", "0.975", "--f0", "0.9",
    ]);
    assert!(out.status.success());
}

#[test]
fn sweep_reports_out_of_domain_rows_with_reason() {
    let out = qrkey(&[
        "sweep", "--var", "f0", "--from", "0.2", "--to", "0.26", "--steps", "4", "--setup",
        "oqr", "--L", "600", "--n", "2", "--k", "0", "--pg", "1", "--eta", "1", "--f0", "0.9",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 4);
    for row in &rows[..3] {
        assert!(row[1].is_empty(), "value cells must stay empty: {row:?}");
        assert!(row[11].contains("--f0"), "reason names the parameter: {row:?}");
    }
    assert!(!rows[3][1].is_empty(), "0.26 is inside the domain");
    assert!(rows[3][11].is_empty());
}

#[test]
fn sweep_distillation_extends_the_usable_fidelity_range() {
    // more distillation rounds move the key-rate onset to lower f0
    let mut onsets = Vec::new();
    for k in ["0", "1", "2", "3"] {
        let out = qrkey(&[
            "sweep", "--var", "f0", "--from", "0.8", "--to", "1.0", "--steps", "41", "--setup",
            "oqr", "--L", "600", "--n", "2", "--k", k, "--pg", "1", "--eta", "1", "--f0", "0.9",
        ]);
        assert!(out.status.success());
        let text = stdout(&out);
        let onset = data_rows(&text)
            .iter()
            .find(|row| row[7].parse::<f64>().map(|v| v > 0.0).unwrap_or(false))
            .map(|row| row[0].parse::<f64>().unwrap())
            .expect("some f0 yields a DD key");
        onsets.push(onset);
    }
    for pair in onsets.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-12,
            "onset must not move right with k: {onsets:?}"
        );
    }
}

#[test]
fn sweep_dd_key_monotone_in_f0() {
    let out = qrkey(&[
        "sweep", "--var", "f0", "--from", "0.8", "--to", "1.0", "--steps", "21", "--setup",
        "oqr", "--L", "600", "--n", "2", "--k", "1", "--pg", "0.99", "--eta", "0.975", "--f0",
        "0.9",
    ]);
    let text = stdout(&out);
    let mut last = -1.0;
    for row in data_rows(&text) {
        let key: f64 = row[7].parse().unwrap();
        assert!(key >= last - 1e-15, "DD key must not decrease in f0");
        last = key;
    }
}

#[test]
fn sweep_integer_grid_validation() {
    let out = qrkey(&[
        "sweep", "--var", "n", "--from", "1", "--to", "3", "--steps", "5", "--setup", "oqr",
        "--L", "600", "--n", "2", "--k", "0", "--pg", "1", "--eta", "1", "--f0", "0.9",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = qrkey(&[
        "sweep", "--var", "n", "--from", "1", "--to", "3", "--steps", "3", "--setup", "oqr",
        "--L", "600", "--n", "2", "--k", "0", "--pg", "1", "--eta", "1", "--f0", "0.9",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], "1");
    assert_eq!(rows[2][0], "3");
}

#[test]
fn mc_single_segment_certain_success() {
    let out = qrkey(&[
        "mc", "--p0", "1", "--n", "0", "--trials", "1000", "--seed", "3", "--strategy",
        "waitall",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = &data_rows(&text)[0];
    assert_eq!(row[0], "1"); // mean
    assert_eq!(row[2], "1"); // formula
    assert_eq!(row[3], "1"); // ratio
}

#[test]
fn mc_two_segments_match_closed_attempt_count() {
    let out = qrkey(&[
        "mc", "--p0", "0.5", "--n", "1", "--pes", "1", "--trials", "100000", "--seed", "7",
        "--strategy", "waitall",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = &data_rows(&text)[0];
    let mean: f64 = row[0].parse().unwrap();
    let se: f64 = row[1].parse().unwrap();
    let formula: f64 = row[2].parse().unwrap();
    assert!((formula - 8.0 / 3.0).abs() < 1e-12);
    assert!((mean - 8.0 / 3.0).abs() < 3.0 * se);
}

#[test]
fn mc_immediate_strategy_beats_the_formula() {
    let run = |strategy: &str| {
        let out = qrkey(&[
            "mc", "--p0", "0.1", "--n", "2", "--pes", "0.95", "--trials", "20000", "--seed",
            "5", "--strategy", strategy,
        ]);
        assert!(out.status.success());
        let text = stdout(&out);
        data_rows(&text)[0][3].parse::<f64>().unwrap()
    };
    let immediate_ratio = run("immediate");
    assert!(immediate_ratio <= 1.0, "ratio {immediate_ratio}");
    let out = qrkey(&[
        "mc", "--p0", "0.1", "--n", "2", "--pes", "0", "--trials", "10", "--seed", "1",
        "--strategy", "waitall",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analytic_pg_rows_follow_the_sensitivity_ordering() {
    let out = qrkey(&["analytic", "--pg-range", "0.9:0.995:20", "--eta", "1", "--n", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut di_rows = 0;
    for row in data_rows(&text) {
        // n-derivative relative change is negative wherever defined
        if !row[11].is_empty() {
            assert!(row[11].parse::<f64>().unwrap() < 0.0, "rel_n_dd in {row:?}");
        }
        if row[2].is_empty() || row[13].is_empty() {
            continue;
        }
        // with perfect detectors the DI fraction reacts harder to the gate
        let rel_pg_dd: f64 = row[10].parse().unwrap();
        let rel_pg_di: f64 = row[13].parse().unwrap();
        assert!(rel_pg_di > rel_pg_dd, "{row:?}");
        di_rows += 1;
    }
    assert!(di_rows >= 3, "expected several rows inside the violation region");
}

#[test]
fn analytic_gate_sensitivity_flips_near_perfect_gates_with_lossy_detectors() {
    // the DD gate derivative diverges as pg -> 1 while the DI one stays
    // finite for eta < 1, so the relative-change ordering inverts there
    let out = qrkey(&["analytic", "--pg-range", "0.9999:0.99999:3", "--eta", "0.975", "--n", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for row in data_rows(&text) {
        let rel_pg_dd: f64 = row[10].parse().unwrap();
        let rel_pg_di: f64 = row[13].parse().unwrap();
        assert!(rel_pg_dd > rel_pg_di, "{row:?}");
    }
}

#[test]
fn analytic_threshold_toggles_di_columns() {
    // eta^2 p^n_bar crosses 1/sqrt(2) at p = 0.70711 for eta = 1, n = 1
    let out = qrkey(&["analytic", "--pg-range", "0.70:0.72:5", "--eta", "1", "--n", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows = data_rows(&text);
    let below = &rows[0]; // pg = 0.700
    let above = &rows[4]; // pg = 0.720
    assert!(below[2].is_empty());
    assert!(below[15].contains("no CHSH violation"), "{below:?}");
    assert!(!above[2].is_empty());
    assert!(!above[15].contains("no CHSH violation"));
}

#[test]
fn analytic_n_range_mode_works() {
    let out = qrkey(&["analytic", "--n-range", "1:3", "--pg", "0.99", "--eta", "0.975"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], "1");
    // conflicting or missing modes are domain errors
    let out = qrkey(&["analytic", "--eta", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join("qrkey-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sweep.csv");
    let args_base = [
        "sweep", "--var", "eta", "--from", "0.9", "--to", "1.0", "--steps", "5", "--setup",
        "oqr", "--L", "600", "--n", "2", "--k", "0", "--pg", "0.99", "--eta", "1", "--f0",
        "0.95",
    ];
    let to_stdout = stdout(&qrkey(&args_base));
    let mut with_out: Vec<&str> = args_base.to_vec();
    let path_str = path.to_str().unwrap();
    with_out.extend(["--out", path_str]);
    assert!(qrkey(&with_out).status.success());
    let from_file = std::fs::read_to_string(&path).unwrap();
    assert_eq!(to_stdout, from_file);
}
