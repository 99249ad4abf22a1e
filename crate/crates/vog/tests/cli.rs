//! Exit-code and output contract of the `vog` binary:
//! 0 success, 1 usage/I-O error, 2 detection failure.

use std::path::Path;
use std::process::{Command, Output};
use vog::image::save_pgm;
use vog::synth::{render, EyeScene};

fn vog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vog"))
        .args(args)
        .env_remove("VOG_CONFIG")
        .output()
        .expect("binary runs")
}

fn write_frame(path: &Path, scene: &EyeScene) {
    let (img, _) = render(scene).unwrap();
    std::fs::write(path, save_pgm(&img)).unwrap();
}

#[test]
fn detect_ok_exits_zero_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    let frame = dir.path().join("eye.pgm");
    write_frame(&frame, &EyeScene::default());
    let out = vog(&["detect", frame.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("frame_index,t,pupil_x"));
    assert!(stdout.lines().nth(1).unwrap().ends_with(",ok"));
}

#[test]
fn detect_missing_file_exits_one() {
    let out = vog(&["detect", "/no/such/frame.pgm"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn detect_closed_eye_exits_two_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let frame = dir.path().join("closed.pgm");
    write_frame(&frame, &EyeScene::default().with_aperture(0.0));
    let out = vog(&["detect", frame.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("insufficient samples"), "stderr: {stderr}");
}

#[test]
fn unknown_subcommand_exits_one() {
    let out = vog(&["transmogrify"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn synth_unknown_protocol_exits_one_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = vog(&["synth", "spiral", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("fixation | pursuit | range | static"));
}

#[test]
fn synth_track_pipeline_via_binary() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq");
    let out = vog(&[
        "synth",
        "static",
        "--out",
        seq.to_str().unwrap(),
        "--seed",
        "5",
        "--fps",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("trace.csv");
    let out = vog(&[
        "track",
        seq.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().count() > 10);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",ok")));
}

#[test]
fn config_file_env_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let frame = dir.path().join("eye.pgm");
    write_frame(&frame, &EyeScene::default());

    // A config file that breaks detection (absurd min_samples) makes the
    // frame fail; overriding the same key on the command line must win.
    let cfg = dir.path().join("vog.cfg");
    std::fs::write(&cfg, "min_samples = 100000\n").unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_vog"))
        .args(["detect", frame.to_str().unwrap()])
        .env("VOG_CONFIG", cfg.to_str().unwrap())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "env config should apply");

    let out = Command::new(env!("CARGO_BIN_EXE_vog"))
        .args([
            "detect",
            frame.to_str().unwrap(),
            "--min-samples",
            "8",
        ])
        .env("VOG_CONFIG", cfg.to_str().unwrap())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "flag should override config file");
}

#[test]
fn bench_reports_all_stages() {
    let out = vog(&["bench", "--iters", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    for stage in ["downscale", "threshold", "segment", "localize", "pupil_fit", "corner"] {
        assert!(stdout.contains(stage), "missing {stage} in:\n{stdout}");
    }
    assert!(stdout.contains("budget"));
}
