//! End-to-end tests of the `crrbayes` binary: subcommand round trips,
//! config-file merging, reproducibility, and the exit-code contract
//! (0 success, 1 validation error, 2 numerical failure).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::Datelike;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crrbayes"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        stdout(out),
        stderr(out)
    );
}

/// Deterministic business-day series: closes cycle through fixed up and
/// down factors, so both mixture components see several distinct values.
fn write_series(dir: &Path, rows: usize) -> PathBuf {
    let factors = [1.006, 0.997, 1.004, 0.995, 1.008];
    let mut lines = vec!["date,close,rate".to_string()];
    let mut date = chrono::NaiveDate::from_ymd_opt(2025, 1, 6).unwrap(); // a Monday
    let mut close = 100.0_f64;
    for i in 0..rows {
        lines.push(format!("{date},{close:.10},0.02"));
        close *= factors[i % factors.len()];
        date = date.succ_opt().unwrap();
        while date.weekday().num_days_from_monday() >= 5 {
            date = date.succ_opt().unwrap();
        }
    }
    let path = dir.join("series.csv");
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}

fn calibrate_args<'a>(series: &'a str, out: &'a str) -> Vec<&'a str> {
    vec![
        "calibrate",
        "--series",
        series,
        "--iterations",
        "600",
        "--burn-in",
        "200",
        "--thin",
        "2",
        "--seed",
        "11",
        "--out",
        out,
    ]
}

#[test]
fn help_exits_zero_and_lists_subcommands() {
    let dir = TempDir::new().unwrap();
    let out = run(&["--help"], dir.path());
    assert_code(&out, 0);
    let text = stdout(&out);
    for sub in ["calibrate", "price", "roll", "baselines", "utility"] {
        assert!(text.contains(sub), "help lacks `{sub}`:\n{text}");
    }
}

#[test]
fn calibrate_then_price_round_trip() {
    let dir = TempDir::new().unwrap();
    write_series(dir.path(), 41);
    let out = run(&calibrate_args("series.csv", "cal"), dir.path());
    assert_code(&out, 0);
    assert!(stdout(&out).contains("calibrated 40 returns"));

    let chain = std::fs::read_to_string(dir.path().join("cal/chain.csv")).unwrap();
    assert!(chain.starts_with("iteration,u_star,d_star,sigma2_u,sigma2_d,p\n"));
    // kept = (600 - 200) / 2
    assert_eq!(chain.lines().count(), 1 + 200);

    let diag: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cal/diagnostics.json")).unwrap())
            .unwrap();
    for key in ["r_f", "u_upper", "seed", "diagnostics"] {
        assert!(diag.get(key).is_some(), "diagnostics.json lacks `{key}`");
    }
    let r_f = diag["r_f"].as_f64().unwrap();
    assert!(r_f > 0.0 && r_f < 1e-3);

    // Shortest-round-trip float formatting lets the printed rate be passed
    // back exactly.
    let r_f_text = format!("{r_f}");
    let out = run(
        &[
            "price",
            "--chain",
            "cal/chain.csv",
            "--r-f",
            &r_f_text,
            "--spot",
            "100",
            "--strike",
            "101",
            "--periods",
            "10",
            "--outer-draws",
            "300",
            "--inner-draws",
            "20",
            "--seed",
            "3",
            "--out",
            "dists",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    let text = stdout(&out);
    for method in ["theta", "xi", "expected_xi"] {
        assert!(text.contains(method), "missing `{method}` row:\n{text}");
        let samples =
            std::fs::read_to_string(dir.path().join(format!("dists/{method}_samples.csv")))
                .unwrap();
        assert!(samples.starts_with("price\n"));
        assert_eq!(samples.lines().count(), 1 + 300, "{method} sample count");
    }
}

#[test]
fn identical_seeds_reproduce_chains_and_different_seeds_do_not() {
    let dir = TempDir::new().unwrap();
    write_series(dir.path(), 30);
    assert_code(&run(&calibrate_args("series.csv", "a"), dir.path()), 0);
    assert_code(&run(&calibrate_args("series.csv", "b"), dir.path()), 0);
    let a = std::fs::read(dir.path().join("a/chain.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/chain.csv")).unwrap();
    assert_eq!(a, b, "same seed must reproduce the chain byte for byte");

    let mut args = calibrate_args("series.csv", "c");
    let pos = args.iter().position(|a| *a == "11").unwrap();
    args[pos] = "12";
    assert_code(&run(&args, dir.path()), 0);
    let c = std::fs::read(dir.path().join("c/chain.csv")).unwrap();
    assert_ne!(a, c, "a different seed must move the chain");
}

#[test]
fn config_file_sets_flags_and_explicit_flags_override() {
    let dir = TempDir::new().unwrap();
    write_series(dir.path(), 41);
    std::fs::write(
        dir.path().join("run.toml"),
        "[calibrate]\nseries = \"series.csv\"\nwindow = 10\niterations = 600\nburn_in = 200\nthin = 2\nout = \"from_file\"\n",
    )
    .unwrap();

    let out = run(&["--config", "run.toml", "calibrate"], dir.path());
    assert_code(&out, 0);
    assert!(stdout(&out).contains("calibrated 10 returns"), "{}", stdout(&out));

    let out = run(
        &["--config", "run.toml", "calibrate", "--window", "25", "--out", "from_flag"],
        dir.path(),
    );
    assert_code(&out, 0);
    assert!(stdout(&out).contains("calibrated 25 returns"), "{}", stdout(&out));
}

#[test]
fn roll_emits_deterministic_reports() {
    let dir = TempDir::new().unwrap();
    // 25 rows -> window 20 leaves a handful of evaluation dates before
    // maturity.
    write_series(dir.path(), 25);
    let args = [
        "roll",
        "--series",
        "series.csv",
        "--strike",
        "101",
        "--maturity",
        "2025-02-14",
        "--window",
        "20",
        "--methods",
        "expected_xi,sm,bm",
        "--iterations",
        "400",
        "--burn-in",
        "100",
        "--thin",
        "2",
        "--outer-draws",
        "150",
        "--replicates",
        "200",
        "--seed",
        "9",
    ];
    let mut a = args.to_vec();
    a.extend(["--out", "ra"]);
    let out = run(&a, dir.path());
    assert_code(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("evaluated"), "{text}");

    for file in [
        "ra/expected_xi_timeseries.csv",
        "ra/sm_timeseries.csv",
        "ra/bm_timeseries.csv",
        "ra/summary.csv",
        "ra/run_summary.json",
    ] {
        assert!(dir.path().join(file).is_file(), "missing {file}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ra/run_summary.json")).unwrap())
            .unwrap();
    assert!(json["dates_evaluated"].as_u64().unwrap() >= 3);
    assert_eq!(json["gaps"].as_array().unwrap().len(), 0);

    // Byte-identical rerun, regardless of worker-pool size.
    let mut b = args.to_vec();
    b.extend(["--out", "rb", "--threads", "2"]);
    assert_code(&run(&b, dir.path()), 0);
    for file in ["expected_xi_timeseries.csv", "sm_timeseries.csv", "bm_timeseries.csv", "summary.csv", "run_summary.json"] {
        let a_bytes = std::fs::read(dir.path().join("ra").join(file)).unwrap();
        let b_bytes = std::fs::read(dir.path().join("rb").join(file)).unwrap();
        assert_eq!(a_bytes, b_bytes, "{file} differs between reruns");
    }
}

#[test]
fn utility_reference_example_locates_the_optimum() {
    let dir = TempDir::new().unwrap();
    let out = run(
        &["utility", "--points", "15001", "--quote-points", "501", "--curve", "curve.csv"],
        dir.path(),
    );
    assert_code(&out, 0);
    let text = stdout(&out);
    let quote: f64 = text
        .lines()
        .find(|l| l.starts_with("optimal quote"))
        .and_then(|l| l.split_whitespace().nth(2))
        .expect("optimal quote line")
        .parse()
        .unwrap();
    assert!((quote - 0.587).abs() < 0.02, "optimum {quote} far from 0.587");

    let curve = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert!(curve.starts_with("quote,expected_utility\n"));
    assert_eq!(curve.lines().count(), 1 + 501);
}

#[test]
fn baselines_reads_prices_back_into_utility() {
    let dir = TempDir::new().unwrap();
    write_series(dir.path(), 41);
    let out = run(
        &[
            "baselines",
            "--series",
            "series.csv",
            "--strike",
            "101",
            "--periods",
            "10",
            "--replicates",
            "400",
            "--seed",
            "5",
            "--out",
            "base",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    let text = stdout(&out);
    for method in ["sm", "bm", "bv"] {
        assert!(text.contains(method), "missing `{method}` row:\n{text}");
    }

    // The emitted sample file feeds straight back into the utility
    // optimizer as an empirical prior.
    let out = run(
        &["utility", "--prices", "base/bm_samples.csv", "--quote-points", "201"],
        dir.path(),
    );
    assert_code(&out, 0);
    assert!(stdout(&out).contains("optimal quote"), "{}", stdout(&out));
}

#[test]
fn validation_failures_exit_one() {
    let dir = TempDir::new().unwrap();
    // Missing input file.
    let out = run(&["calibrate", "--series", "absent.csv"], dir.path());
    assert_code(&out, 1);

    // Required value not supplied by flag or file.
    write_series(dir.path(), 30);
    let out = run(&["roll", "--series", "series.csv"], dir.path());
    assert_code(&out, 1);
    assert!(stderr(&out).contains("strike"), "{}", stderr(&out));

    // Unknown flag (clap usage error).
    let out = run(&["price", "--no-such-flag"], dir.path());
    assert_code(&out, 1);

    // Unknown key in the config file.
    std::fs::write(dir.path().join("bad.toml"), "[calibrate]\nseeed = 4\n").unwrap();
    let out = run(&["--config", "bad.toml", "calibrate"], dir.path());
    assert_code(&out, 1);
    assert!(stderr(&out).contains("seeed"), "{}", stderr(&out));
}

#[test]
fn numerical_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    // A stored chain whose parameters are valid but collapse the tree: the
    // expected up and down factors coincide to within tolerance.
    std::fs::write(
        dir.path().join("chain.csv"),
        "iteration,u_star,d_star,sigma2_u,sigma2_d,p\n0,1.0000000000004,0.9999999999996,1e-30,1e-30,0.5\n",
    )
    .unwrap();
    let out = run(
        &[
            "price",
            "--chain",
            "chain.csv",
            "--r-f",
            "0",
            "--spot",
            "100",
            "--strike",
            "100",
            "--periods",
            "3",
            "--methods",
            "expected_xi",
        ],
        dir.path(),
    );
    assert_code(&out, 2);
    assert!(stderr(&out).contains("degenerate"), "{}", stderr(&out));
}
