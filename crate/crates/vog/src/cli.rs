//! Command implementations behind the `vog` binary.
//!
//! Exit-code contract: 0 success, 1 usage or I/O error, 2 detection
//! failure. Each command returns its stdout payload; diagnostics belong on
//! stderr (the binary prints the error).

use crate::bench::run_bench;
use crate::config::RunConfig;
use crate::eval::{evaluate, report};
use crate::image::{load_pgm, save_pgm, GrayImage};
use crate::pipeline::{detect_frame, DetectFailure, PipelineError};
use crate::synth::{
    fixation_protocol, manifest_row, pursuit_protocol, range_protocol, render, static_protocol,
    EyeScene, ProtocolStep, MANIFEST_HEADER,
};
use crate::trace::{fill_velocities, to_csv, track, TraceRecord};
use crate::gaze::Axis;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("detection failed: {0}")]
    Detection(DetectFailure),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Detection(_) => 2,
        }
    }
}

fn read_image(path: &Path) -> Result<GrayImage, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    load_pgm(&bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Detect on a single frame; prints the CSV header and one record.
pub fn cmd_detect(image: &Path, cfg: &RunConfig) -> Result<String, CliError> {
    let img = read_image(image)?;
    match detect_frame(&img, cfg) {
        Ok(det) => {
            let mut rec = TraceRecord {
                frame_index: 0,
                t: 0.0,
                detection: Some(det),
                velocity_deg: None,
                status: "ok".to_string(),
            };
            fill_velocities(std::slice::from_mut(&mut rec), cfg);
            Ok(format!("{}\n{}\n", crate::trace::CSV_HEADER, rec.csv_row()))
        }
        Err(PipelineError::Detection(f)) => Err(CliError::Detection(f)),
        Err(PipelineError::Input(e)) => Err(CliError::Io(e)),
    }
}

/// Frame files of a sequence directory, sorted by name.
fn sequence_frames(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut frames: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "pgm").unwrap_or(false))
        .collect();
    frames.sort();
    if frames.is_empty() {
        return Err(CliError::Io(format!(
            "no .pgm frames in {}",
            dir.display()
        )));
    }
    Ok(frames)
}

/// Timestamps from a manifest csv (frame_index,t,...) when present.
fn manifest_times(dir: &Path, n: usize) -> Option<Vec<f64>> {
    let text = std::fs::read_to_string(dir.join("manifest.csv")).ok()?;
    let mut times = vec![None; n];
    for line in text.lines().skip(1) {
        let mut parts = line.split(',');
        let idx: usize = parts.next()?.parse().ok()?;
        let t: f64 = parts.next()?.parse().ok()?;
        if idx < n {
            times[idx] = Some(t);
        }
    }
    times.into_iter().collect()
}

/// Track a directory of numbered PGM frames into a trace CSV.
pub fn cmd_track(dir: &Path, out: &Path, cfg: &RunConfig) -> Result<String, CliError> {
    let paths = sequence_frames(dir)?;
    let mut frames = Vec::with_capacity(paths.len());
    for p in &paths {
        frames.push(read_image(p)?);
    }
    let times = manifest_times(dir, frames.len())
        .unwrap_or_else(|| (0..frames.len()).map(|i| i as f64 / cfg.fps).collect());
    let records = track(&frames, &times, cfg);
    let csv = to_csv(&records);
    std::fs::write(out, &csv)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", out.display())))?;
    let ok = records.iter().filter(|r| r.is_ok()).count();
    Ok(format!(
        "tracked {} frames ({} ok, {} failed) -> {}\n",
        records.len(),
        ok,
        records.len() - ok,
        out.display()
    ))
}

/// Generate a synthetic protocol: PGM frames plus manifest.csv.
pub fn cmd_synth(
    protocol: &str,
    out_dir: &Path,
    seed: u64,
    noise_sigma: f64,
    fps: f64,
) -> Result<String, CliError> {
    let mut base = EyeScene::default();
    base.seed = seed;
    base.noise_sigma = noise_sigma;
    let steps: Vec<ProtocolStep> = match protocol {
        "fixation" => fixation_protocol(&base, 16.0, 2.0, fps, 2, Axis::Horizontal).steps,
        "pursuit" => pursuit_protocol(&base, 20.0, 2.0, Axis::Horizontal, fps, 2),
        "range" => range_protocol(&base, 3.0, 18.0, 3.0, Axis::Horizontal, fps).steps,
        "static" => static_protocol(&base, (0.0, 0.0), (2.0 * fps) as u32, fps),
        other => {
            return Err(CliError::Usage(format!(
                "unknown protocol {other:?}; use fixation | pursuit | range | static"
            )))
        }
    };
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut manifest = String::from(MANIFEST_HEADER);
    manifest.push('\n');
    for (i, step) in steps.iter().enumerate() {
        let (img, truth) =
            render(&step.scene).map_err(|e| CliError::Usage(e.to_string()))?;
        let name = out_dir.join(format!("frame_{i:05}.pgm"));
        std::fs::write(&name, save_pgm(&img))
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", name.display())))?;
        manifest.push_str(&manifest_row(i, step.t, &truth));
        manifest.push('\n');
    }
    std::fs::write(out_dir.join("manifest.csv"), manifest)
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(format!(
        "wrote {} frames and manifest.csv to {}\n",
        steps.len(),
        out_dir.display()
    ))
}

/// Run the synthetic evaluation suites and print one pass/fail line each.
pub fn cmd_eval(protocol: &str, cfg: &RunConfig, seed: u64) -> Result<String, CliError> {
    let checks = evaluate(protocol, cfg, seed).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown protocol {protocol:?}; use fixation | pursuit | range | occlusion | all"
        ))
    })?;
    Ok(report(&checks))
}

/// Latency benchmark against the 300 Hz budget.
pub fn cmd_bench(cfg: &RunConfig, iterations: usize) -> Result<String, CliError> {
    if iterations < 10 {
        return Err(CliError::Usage("bench needs at least 10 iterations".to_string()));
    }
    Ok(run_bench(cfg, iterations).text())
}
