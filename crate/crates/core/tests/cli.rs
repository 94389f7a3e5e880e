use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_benford-tv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn value_line(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no '{key}' in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn bare_table_matches_golden_file() {
    let out = bin(&["table"]);
    assert!(out.status.success());
    let golden = include_str!("golden/table_b10.txt");
    assert_eq!(stdout(&out), golden);
    assert_eq!(stdout(&bin(&["table", "--base", "10", "--digits", "7"])), golden);
}

#[test]
fn golden_rows_are_the_published_values() {
    let golden = include_str!("golden/table_b10.txt");
    let row4 = golden.lines().find(|l| l.trim_start().starts_with("4 ")).unwrap();
    assert_eq!(
        row4.split_whitespace().collect::<Vec<_>>(),
        ["4", "0.0716270", "0.0719558", "0.0830874"]
    );
    let row1000 = golden.lines().last().unwrap();
    assert_eq!(
        row1000.split_whitespace().collect::<Vec<_>>(),
        ["1000", "0.0002878", "0.0002878", "0.0003323"]
    );
}

#[test]
fn csv_and_json_carry_the_same_values() {
    let csv_out = stdout(&bin(&["table", "--format", "csv", "--n", "1,2,1000"]));
    let json_out = stdout(&bin(&["table", "--format", "json", "--n", "1,2,1000"]));
    let json: serde_json::Value = serde_json::from_str(&json_out).unwrap();
    let rows = json["rows"].as_array().unwrap();
    let mut reader = csv::Reader::from_reader(csv_out.as_bytes());
    assert_eq!(
        reader.headers().unwrap(),
        vec!["n", "exact", "tv_bound", "fourier_bound"]
    );
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 3);
    for (rec, row) in records.iter().zip(rows) {
        assert_eq!(rec[0].parse::<u64>().unwrap(), row["n"].as_u64().unwrap());
        for (i, key) in ["exact", "tv_bound", "fourier_bound"].iter().enumerate() {
            assert_eq!(rec[i + 1].parse::<f64>().unwrap(), row[key].as_f64().unwrap(), "{key}");
        }
    }
    assert_eq!(json["metadata"]["tool_version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn table_for_base_e() {
    let out = stdout(&bin(&[
        "table",
        "--base",
        "2.718281828459045",
        "--n",
        "1",
        "--format",
        "json",
    ]));
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    let exact = json["rows"][0]["exact"].as_f64().unwrap();
    let e = std::f64::consts::E;
    let u = e - 1.0;
    let expected = (u * u.ln() - u + 1.0) / (e - 1.0);
    assert!((exact - expected).abs() < 1e-15);
    // The quadrature oracle agrees.
    let spec = format!("uniform-log b={e}");
    let oracle = stdout(&bin(&["oracle", "--density", &spec, "--n", "1"]));
    assert!((value_line(&oracle, "value") - expected).abs() < 1e-9);
}

#[test]
fn bound_subcommand() {
    let out = bin(&[
        "bound",
        "--density",
        "uniform-log b=10",
        "--method",
        "tv_scaled",
        "--n",
        "20",
    ]);
    assert!(out.status.success());
    assert!((value_line(&stdout(&out), "value") - 0.028_782_3).abs() < 5e-8);
    let out = bin(&["bound", "--density", "uniform 0 1", "--method", "tv_quarter"]);
    assert_eq!(value_line(&stdout(&out), "value"), 0.0);
    let out = bin(&[
        "bound",
        "--density",
        "uniform-log b=10",
        "--method",
        "fourier_closed",
        "--n",
        "2",
    ]);
    assert!((value_line(&stdout(&out), "value") - 0.166_174_8).abs() < 5e-8);
}

#[test]
fn exact_subcommand() {
    let out = stdout(&bin(&["exact", "--base", "10", "--exponent", "2"]));
    assert!((value_line(&out, "delta") - 0.141_337_9).abs() < 5e-8);
}

#[test]
fn oracle_subcommand() {
    let out = stdout(&bin(&[
        "oracle",
        "--density",
        "uniform-log b=10",
        "--n",
        "1000",
        "--engine",
        "quad",
    ]));
    assert!((value_line(&out, "value") - 0.000_287_8).abs() < 5e-8);
    let out = stdout(&bin(&["oracle", "--density", "uniform 0 1", "--n", "7"]));
    assert!(value_line(&out, "value") < 1e-14);
    let args = [
        "oracle",
        "--density",
        "uniform-log b=10",
        "--n",
        "1",
        "--engine",
        "mc",
        "--samples",
        "40000",
        "--seed",
        "9",
    ];
    let a = stdout(&bin(&args));
    assert_eq!(a, stdout(&bin(&args)));
    assert!(a.contains("seed = 9"));
}

#[test]
fn piecewise_file() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("piecewise");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tent.json");
    std::fs::write(
        &path,
        r#"[{"lo": 0, "hi": 1, "kind": "linear", "params": [0, 1]},
            {"lo": 1, "hi": 2, "kind": "linear", "params": [1, 0]}]"#,
    )
    .unwrap();
    let spec = format!("piecewise {}", path.display());
    let out = stdout(&bin(&["bound", "--density", &spec, "--method", "tv_quarter"]));
    assert!((value_line(&out, "value") - 0.5).abs() < 1e-15);
    // The tent folds to the uniform density.
    let out = stdout(&bin(&["oracle", "--density", &spec, "--n", "1"]));
    assert!(value_line(&out, "value") < 1e-12);
}

#[test]
fn convex_bound_on_a_ramp_stays_above_the_oracle() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("piecewise");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("ramp.json");
    std::fs::write(&path, r#"[{"lo": 0.5, "hi": 1, "kind": "linear", "params": [0, 4]}]"#).unwrap();
    let spec = format!("piecewise {}", path.display());
    let bound = value_line(
        &stdout(&bin(&["bound", "--density", &spec, "--method", "convex_eighth"])),
        "value",
    );
    let delta = value_line(&stdout(&bin(&["oracle", "--density", &spec, "--n", "1"])), "value");
    // (sup − inf)/8 would be 1/2, below the true 9/16.
    assert!((delta - 9.0 / 16.0).abs() < 1e-10);
    assert!((bound - 16.0 / 27.0).abs() < 1e-15);
    assert!(delta <= bound);
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["table"]).status.code(), Some(0));
    assert_eq!(bin(&["table", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(bin(&["table", "--base", "0.5"]).status.code(), Some(2));
    assert_eq!(
        bin(&["bound", "--density", "beta 1 2", "--method", "tv_quarter"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bin(&["bound", "--density", "uniform 0 1", "--method", "tv_half"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bin(&[
            "bound",
            "--density",
            "piecewise /nonexistent.json",
            "--method",
            "tv_quarter"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        bin(&["oracle", "--density", "uniform 0 1", "--n", "0"]).status.code(),
        Some(2)
    );
    // A jump inside the hull defeats the convexity hypothesis.
    let out = bin(&["bound", "--density", "uniform 0.5 1", "--method", "convex_eighth"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
}
