use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn write_walks(dir: &Path, name: &str, count: usize, len: usize, dims: usize) -> PathBuf {
    let mut text = format!("# test data\n{count} {len} {dims}\n");
    let mut state = 7u64;
    for _ in 0..count {
        let mut x = vec![0.0f64; dims];
        for _ in 0..len {
            let row: Vec<String> = x.iter().map(|v| format!("{v:.5}")).collect();
            text.push_str(&row.join(" "));
            text.push('\n');
            for v in x.iter_mut() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *v += ((state >> 33) as f64 / (1u64 << 31) as f64) - 0.5;
            }
        }
    }
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn tcdtw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcdtw")).args(args).output().unwrap()
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn csv_report_has_one_row_per_combination() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_walks(dir.path(), "walks.mts", 20, 24, 3);
    let out = tcdtw(&[
        "--data", data.to_str().unwrap(), "--emit", "csv", "--reps", "1", "--threads", "1",
        "--window", "0", "4", "--dims", "1", "all",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows[0].join(","), tcdtw::bench::CSV_COLUMNS.join(","));
    assert_eq!(rows.len(), 1 + 2 * 2 * 6);
    for r in &rows[1..] {
        assert_eq!(r[0], "walks");
        if r[1] == "none" {
            assert_eq!((r[4].as_str(), r[5].as_str()), ("0", "1"));
        }
    }
}

#[test]
fn counters_repeat_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_walks(dir.path(), "walks.mts", 16, 20, 2);
    let run = || {
        let out = tcdtw(&["--data", data.to_str().unwrap(), "--emit", "csv", "--reps", "1"]);
        assert!(out.status.success());
        csv_rows(&out)
            .into_iter()
            .map(|r| [&r[..5], &r[7..9], &r[12..]].concat().join(","))
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn writes_json_to_file_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_walks(dir.path(), "walks.mts", 12, 16, 2);
    let out_path = dir.path().join("report.json");
    let out = tcdtw(&[
        "--data", data.to_str().unwrap(), "--emit", "json", "--out", out_path.to_str().unwrap(),
        "--reps", "1", "--method", "lb_mv", "tc_dtw", "--verify", "--precision", "f32",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0 violations"));
    let text = std::fs::read_to_string(out_path).unwrap();
    assert!(text.trim_start().starts_with('['));
    assert!(text.contains("\"method\": \"tc_dtw\""));
}

#[test]
fn table_header_and_ideal_column() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_walks(dir.path(), "walks.mts", 12, 16, 2);
    let plain = tcdtw(&["--data", data.to_str().unwrap(), "--reps", "1", "--threads", "2", "--no-tune"]);
    assert!(plain.status.success());
    let plain = String::from_utf8(plain.stdout).unwrap();
    assert!(plain.starts_with("# threads=2 "));
    assert!(!plain.contains("ideal"));
    let ideal = tcdtw(&["--data", data.to_str().unwrap(), "--reps", "1", "--ideal"]);
    assert!(String::from_utf8(ideal.stdout).unwrap().contains("ideal"));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_walks(dir.path(), "walks.mts", 8, 10, 2);
    let data = data.to_str().unwrap();
    for args in [
        vec!["--data", "/definitely/missing.mts"],
        vec!["--data", data, "--method", "lb_xx"],
        vec!["--data", data, "--dims", "5"],
        vec!["--data", data, "--reps", "0"],
        vec!["--data", data, "--emit", "xml"],
        vec!["--window", "3"],
    ] {
        assert_eq!(tcdtw(&args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let ragged = dir.path().join("ragged.mts");
    std::fs::write(&ragged, "2 3 2\n0 0\n0 0\n0 0 0\n").unwrap();
    let unequal = dir.path().join("unequal.ts");
    std::fs::write(&unequal, "@problemName x\n@equalLength false\n@data\n1,2:a\n").unwrap();
    for p in [ragged, unequal] {
        let out = tcdtw(&["--data", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn ts_input_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.ts");
    let mut text = String::from("@problemName tiny\n@univariate false\n@dimensions 2\n@equalLength true\n@seriesLength 6\n@classLabel true a b\n@data\n");
    for s in 0..8 {
        let a: Vec<String> = (0..6).map(|t| ((s * 3 + t) % 5).to_string()).collect();
        let b: Vec<String> = (0..6).map(|t| ((s + t * 2) % 4).to_string()).collect();
        text.push_str(&format!("{}:{}:a\n", a.join(","), b.join(",")));
    }
    std::fs::write(&path, text).unwrap();
    let out = tcdtw(&["--data", path.to_str().unwrap(), "--reps", "1", "--emit", "csv", "--window", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv_rows(&out).len(), 7);
}
