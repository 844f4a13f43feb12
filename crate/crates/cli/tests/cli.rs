use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn maskit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maskit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn maskit")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn usage_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&maskit(dir.path(), &[])), 1);
    assert_eq!(code(&maskit(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&maskit(dir.path(), &["render-maskit", "--res", "12by4"])), 1);
    assert_eq!(
        code(&maskit(dir.path(), &["render-maskit", "--window", "1", "0", "0", "1"])),
        1
    );
    assert_eq!(code(&maskit(dir.path(), &["witness", "-k", "0"])), 1);
    assert_eq!(code(&maskit(dir.path(), &["render-maskit", "--workers", "0"])), 1);
    assert_eq!(code(&maskit(dir.path(), &["--help"])), 0);
}

#[test]
fn render_writes_p6() {
    let dir = TempDir::new().unwrap();
    let out = maskit(dir.path(), &["render-maskit", "--res", "30x15", "--out", "m.ppm"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = std::fs::read(dir.path().join("m.ppm")).unwrap();
    let header = b"P6\n30 15\n255\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 30 * 15 * 3);
}

#[test]
fn single_pixel_far_above_is_black() {
    let dir = TempDir::new().unwrap();
    let out = maskit(
        dir.path(),
        &[
            "render-maskit",
            "--window",
            "-0.01",
            "0.01",
            "3.99",
            "4.01",
            "--res",
            "1x1",
            "--out",
            "p.ppm",
        ],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(
        std::fs::read(dir.path().join("p.ppm")).unwrap(),
        b"P6\n1 1\n255\n\0\0\0"
    );
}

#[test]
fn unwritable_output_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = maskit(
        dir.path(),
        &["render-maskit", "--res", "4x4", "--out", "missing/dir/m.ppm"],
    );
    assert_eq!(code(&out), 2);
    let out = maskit(dir.path(), &["render-maskit", "--config", "absent.conf"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn cusps_csv() {
    let dir = TempDir::new().unwrap();
    let out = maskit(dir.path(), &["cusps", "--qmax", "5"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,q,re,im,residual"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    let keys: Vec<(i64, i64)> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(keys.first(), Some(&(0, 1)));
    assert_eq!(keys.len(), 11);
    assert!(keys.windows(2).all(|w| (w[0].1, w[0].0) < (w[1].1, w[1].0)));
    for r in &rows {
        let residual: f64 = r[4].parse().unwrap();
        assert!(residual < 1e-9, "{r:?}");
    }
    let half = rows.iter().find(|r| r[0] == "1" && r[1] == "2").unwrap();
    let (re, im): (f64, f64) = (half[2].parse().unwrap(), half[3].parse().unwrap());
    assert!((re + 1.0).abs() < 1e-9 && (im - 3f64.sqrt()).abs() < 1e-9);

    assert_eq!(code(&maskit(dir.path(), &["cusps", "--qmax", "65"])), 3);
}

#[test]
fn a_slice_base_must_be_inside() {
    let dir = TempDir::new().unwrap();
    let out = maskit(dir.path(), &["a-slice", "--z", "1.0", "0.0", "--res", "8x8"]);
    assert_eq!(code(&out), 3);
    let out = maskit(
        dir.path(),
        &["a-slice", "--res", "16x20", "--out", "a.ppm", "--no-timestamp"],
    );
    assert_eq!(code(&out), 0);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(json["z"], serde_json::json!([0.0, 4.0]));
    assert!(json.get("timestamp").is_none());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("run.conf"),
        "# small render\nres = 6x3\nout = from_file.ppm\nwindow = -1 1 2.5 3.5\n",
    )
    .unwrap();
    let out = maskit(dir.path(), &["render-maskit", "--config", "run.conf"]);
    assert_eq!(code(&out), 0);
    assert!(std::fs::read(dir.path().join("from_file.ppm"))
        .unwrap()
        .starts_with(b"P6\n6 3\n"));

    let out = maskit(
        dir.path(),
        &[
            "render-maskit",
            "--config",
            "run.conf",
            "--res",
            "2x2",
            "--out",
            "flag.ppm",
        ],
    );
    assert_eq!(code(&out), 0);
    assert!(std::fs::read(dir.path().join("flag.ppm"))
        .unwrap()
        .starts_with(b"P6\n2 2\n"));

    std::fs::write(dir.path().join("bad.conf"), "colour = red\n").unwrap();
    assert_eq!(code(&maskit(dir.path(), &["render-maskit", "--config", "bad.conf"])), 1);
}

#[test]
fn synthetic_witness_json() {
    let dir = TempDir::new().unwrap();
    let out = maskit(
        dir.path(),
        &[
            "witness",
            "--synthetic",
            "-k",
            "3",
            "--res",
            "128x128",
            "--no-timestamp",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("witness.json")).unwrap()).unwrap();
    for key in [
        "q",
        "z",
        "r",
        "interior_verdict",
        "boundary_samples",
        "components",
        "all_certified",
        "cfg",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["all_certified"], serde_json::json!(true));
    assert_eq!(json["components"]["found"], serde_json::json!(3));
    assert!(dir.path().join("witness.ppm").exists());
}

#[test]
fn selftest_passes_and_catches_sign_bug() {
    let dir = TempDir::new().unwrap();
    let out = maskit(dir.path(), &["selftest", "--qmax", "2"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).lines().all(|l| l.starts_with("PASS")));
    let out = maskit(dir.path(), &["selftest", "--qmax", "8", "--mutate-sign"]);
    assert_eq!(code(&out), 5);
    assert!(stdout(&out).contains("FAIL recursion matches word matrices"));
}
