//! Per-frame trace records and sequence tracking.
//!
//! A trace is one CSV row per frame: detection fields when the frame was
//! usable, empty fields plus a reason code otherwise. Velocity pairs are
//! formed between consecutive ok frames (failed frames are skipped, never
//! interpolated) and reported in deg/s on the later frame of each pair.

use crate::config::RunConfig;
use crate::corner::CornerPoint;
use crate::fit::Circle;
use crate::gaze::{to_degrees, GazeObservation};
use crate::image::GrayImage;
use crate::pipeline::{detect_frame, Detection, PipelineError};
use rayon::prelude::*;

/// Column order is frozen; tools downstream parse by position.
pub const CSV_HEADER: &str =
    "frame_index,t,pupil_x,pupil_y,radius,corner_x,corner_y,offset_x,offset_y,vel_x,vel_y,status";

#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub frame_index: usize,
    pub t: f64,
    pub detection: Option<Detection>,
    /// deg/s against the previous ok frame; None on the first ok frame.
    pub velocity_deg: Option<(f64, f64)>,
    /// "ok" or a stable failure reason code.
    pub status: String,
}

impl TraceRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn pupil(&self) -> Option<&Circle> {
        self.detection.as_ref().map(|d| &d.pupil)
    }

    pub fn corner(&self) -> Option<&CornerPoint> {
        self.detection.as_ref().map(|d| &d.corner)
    }

    pub fn to_observation(&self) -> GazeObservation {
        match &self.detection {
            Some(d) => GazeObservation::ok(self.t, d.pupil, d.corner),
            None => GazeObservation::failed(self.t, self.status.clone()),
        }
    }

    /// One CSV row; floats carry six fractional digits, failed frames leave
    /// every detection field empty.
    pub fn csv_row(&self) -> String {
        let mut fields: Vec<String> = vec![self.frame_index.to_string(), format!("{:.6}", self.t)];
        match &self.detection {
            Some(d) => {
                fields.push(format!("{:.6}", d.pupil.cx));
                fields.push(format!("{:.6}", d.pupil.cy));
                fields.push(format!("{:.6}", d.pupil.radius));
                fields.push(format!("{:.6}", d.corner.x as f64));
                fields.push(format!("{:.6}", d.corner.y as f64));
                fields.push(format!("{:.6}", d.offset.0));
                fields.push(format!("{:.6}", d.offset.1));
            }
            None => fields.extend(std::iter::repeat(String::new()).take(7)),
        }
        match self.velocity_deg {
            Some((vx, vy)) => {
                fields.push(format!("{vx:.6}"));
                fields.push(format!("{vy:.6}"));
            }
            None => {
                fields.push(String::new());
                fields.push(String::new());
            }
        }
        fields.push(self.status.clone());
        fields.join(",")
    }
}

/// Detect every frame (concurrently; the pipeline is stateless per frame)
/// and fill velocities between consecutive ok frames, in input order.
pub fn track(frames: &[GrayImage], times: &[f64], cfg: &RunConfig) -> Vec<TraceRecord> {
    assert_eq!(frames.len(), times.len());
    let mut records: Vec<TraceRecord> = frames
        .par_iter()
        .zip(times.par_iter())
        .enumerate()
        .map(|(i, (img, &t))| {
            let (detection, status) = match detect_frame(img, cfg) {
                Ok(d) => (Some(d), "ok".to_string()),
                Err(PipelineError::Detection(f)) => (None, f.code().to_string()),
                Err(PipelineError::Input(_)) => (None, "input_error".to_string()),
            };
            TraceRecord {
                frame_index: i,
                t,
                detection,
                velocity_deg: None,
                status,
            }
        })
        .collect();
    fill_velocities(&mut records, cfg);
    records
}

/// Velocity for each ok record against the previous ok record.
pub fn fill_velocities(records: &mut [TraceRecord], cfg: &RunConfig) {
    let calib = cfg.calibration();
    let mut prev: Option<(f64, (f64, f64))> = None; // (t, offset)
    for rec in records.iter_mut() {
        let Some(det) = &rec.detection else {
            continue;
        };
        if let Some((pt, po)) = prev {
            let dt = rec.t - pt;
            if dt > 0.0 {
                let v_px = ((det.offset.0 - po.0) / dt, (det.offset.1 - po.1) / dt);
                rec.velocity_deg = Some(to_degrees(v_px, &calib));
            }
        }
        prev = Some((rec.t, det.offset));
    }
}

/// Render records as a full CSV document.
pub fn to_csv(records: &[TraceRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
