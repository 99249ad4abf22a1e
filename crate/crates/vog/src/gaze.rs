//! Gaze kinematics: offsets, velocities and trace-level statistics.
//!
//! The moving landmark is the pupil center; the eye corner is the fixed
//! reference that cancels head translation. Velocity between two frames is
//! the change of the pupil-minus-corner offset over time, so adding a
//! common translation to pupil and corner in both frames changes nothing.

use crate::corner::CornerPoint;
use crate::fit::Circle;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GazeError {
    #[error("velocity requires two ok observations")]
    FailedObservation,
    #[error("timestamps not increasing: {t1} then {t2}")]
    NonIncreasingTime { t1: f64, t2: f64 },
    #[error("insufficient range data: {0}")]
    InsufficientRangeData(String),
}

/// Why a frame produced no usable observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObservationStatus {
    Ok,
    Failed(String),
}

/// One timestamped detection result.
#[derive(Debug, Clone)]
pub struct GazeObservation {
    /// Seconds from trace start; strictly increasing within a trace.
    pub t: f64,
    pub pupil: Option<Circle>,
    pub corner: Option<CornerPoint>,
    pub status: ObservationStatus,
}

impl GazeObservation {
    pub fn ok(t: f64, pupil: Circle, corner: CornerPoint) -> Self {
        Self {
            t,
            pupil: Some(pupil),
            corner: Some(corner),
            status: ObservationStatus::Ok,
        }
    }

    pub fn failed(t: f64, reason: impl Into<String>) -> Self {
        Self {
            t,
            pupil: None,
            corner: None,
            status: ObservationStatus::Failed(reason.into()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == ObservationStatus::Ok
    }

    /// Pupil-center minus corner, pixels.
    pub fn offset(&self) -> Option<(f64, f64)> {
        match (&self.pupil, &self.corner) {
            (Some(p), Some(c)) => Some((p.cx - c.x as f64, p.cy - c.y as f64)),
            _ => None,
        }
    }
}

/// Pixels-to-degrees scale for each axis.
#[derive(Debug, Clone, Copy)]
pub struct Calibration {
    pub deg_per_px_x: f64,
    pub deg_per_px_y: f64,
    /// Informational; the nominal subject-to-display distance in cm.
    pub viewing_distance_cm: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            deg_per_px_x: 0.05,
            deg_per_px_y: 0.05,
            viewing_distance_cm: 70.0,
        }
    }
}

/// Aggregated statistics over a trace. Fixation analysis fills the speed
/// fields; range analysis fills the linearity fields.
#[derive(Debug, Clone, Default)]
pub struct TraceStats {
    pub mean_speed_x: f64,
    pub mean_speed_y: f64,
    pub linear_range_x: Option<f64>,
    pub linear_range_y: Option<f64>,
    pub r_squared: Option<f64>,
    pub pairs_used: usize,
    pub windows_skipped: usize,
}

/// Average velocity between two ok observations, px/s:
/// `((p2 - c2) - (p1 - c1)) / (t2 - t1)`.
pub fn velocity(o1: &GazeObservation, o2: &GazeObservation) -> Result<(f64, f64), GazeError> {
    let (a, b) = match (o1.offset(), o2.offset()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(GazeError::FailedObservation),
    };
    if o2.t <= o1.t {
        return Err(GazeError::NonIncreasingTime { t1: o1.t, t2: o2.t });
    }
    let dt = o2.t - o1.t;
    Ok(((b.0 - a.0) / dt, (b.1 - a.1) / dt))
}

/// Componentwise px/s -> deg/s.
pub fn to_degrees(v_px: (f64, f64), calib: &Calibration) -> (f64, f64) {
    (v_px.0 * calib.deg_per_px_x, v_px.1 * calib.deg_per_px_y)
}

/// Mean absolute velocity over consecutive ok pairs inside each dwell
/// window, in deg/s. Saccade intervals between windows never contribute.
/// Windows with fewer than two usable observations are skipped and counted.
pub fn fixation_stats(
    trace: &[GazeObservation],
    dwell_windows: &[(f64, f64)],
    calib: &Calibration,
) -> TraceStats {
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut pairs = 0usize;
    let mut skipped = 0usize;
    for &(w0, w1) in dwell_windows {
        let in_window: Vec<&GazeObservation> = trace
            .iter()
            .filter(|o| o.t >= w0 && o.t < w1 && o.is_ok())
            .collect();
        if in_window.len() < 2 {
            skipped += 1;
            continue;
        }
        for pair in in_window.windows(2) {
            let v = velocity(pair[0], pair[1]).expect("ok observations, increasing t");
            let (vx, vy) = to_degrees(v, calib);
            sum_x += vx.abs();
            sum_y += vy.abs();
            pairs += 1;
        }
    }
    TraceStats {
        mean_speed_x: if pairs > 0 { sum_x / pairs as f64 } else { 0.0 },
        mean_speed_y: if pairs > 0 { sum_y / pairs as f64 } else { 0.0 },
        pairs_used: pairs,
        windows_skipped: skipped,
        ..TraceStats::default()
    }
}

/// Which offset component a range protocol drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// One dwell of a range protocol: its time window and true gaze angle.
#[derive(Debug, Clone, Copy)]
pub struct DwellTruth {
    pub t0: f64,
    pub t1: f64,
    pub angle_deg: f64,
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Least-squares line fit; returns (slope, intercept, r_squared).
fn line_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Maximum per-point deviation from the line, converted to degrees through
/// the fitted slope (px per degree), so the check is calibration-free.
const RANGE_RESIDUAL_LIMIT_DEG: f64 = 0.5;

/// Regress per-dwell median offset against true angle and report the widest
/// symmetric angular interval on which the fit holds with every residual
/// under half a degree, plus that interval's r-squared.
pub fn linear_range(
    trace: &[GazeObservation],
    dwells: &[DwellTruth],
    axis: Axis,
) -> Result<TraceStats, GazeError> {
    // Median measured offset per dwell with any usable data.
    let mut points: Vec<(f64, f64)> = Vec::new(); // (angle, offset px)
    let mut missing: Vec<f64> = Vec::new();
    for d in dwells {
        let mut offsets: Vec<f64> = trace
            .iter()
            .filter(|o| o.t >= d.t0 && o.t < d.t1 && o.is_ok())
            .filter_map(|o| o.offset())
            .map(|(ox, oy)| match axis {
                Axis::Horizontal => ox,
                Axis::Vertical => oy,
            })
            .collect();
        if offsets.is_empty() {
            missing.push(d.angle_deg);
        } else {
            points.push((d.angle_deg, median(&mut offsets)));
        }
    }
    if points.len() < 3 {
        return Err(GazeError::InsufficientRangeData(format!(
            "{} dwell(s) with data",
            points.len()
        )));
    }

    // Candidate symmetric intervals from the dwell angles, widest first.
    let mut extents: Vec<f64> = points.iter().map(|p| p.0.abs()).collect();
    extents.sort_by(|a, b| b.partial_cmp(a).unwrap());
    extents.dedup();

    for &extent in &extents {
        if missing.iter().any(|a| a.abs() <= extent) {
            continue; // a dwell inside the interval produced no data
        }
        let subset: Vec<(f64, f64)> = points
            .iter()
            .copied()
            .filter(|p| p.0.abs() <= extent)
            .collect();
        if subset.len() < 3 {
            break;
        }
        let (slope, intercept, r2) = line_fit(&subset);
        if slope.abs() < 1e-12 {
            continue;
        }
        let worst = subset
            .iter()
            .map(|&(a, o)| ((o - (slope * a + intercept)) / slope).abs())
            .fold(0.0f64, f64::max);
        if worst <= RANGE_RESIDUAL_LIMIT_DEG {
            let mut stats = TraceStats {
                r_squared: Some(r2),
                pairs_used: subset.len(),
                ..TraceStats::default()
            };
            match axis {
                Axis::Horizontal => stats.linear_range_x = Some(extent),
                Axis::Vertical => stats.linear_range_y = Some(extent),
            }
            return Ok(stats);
        }
    }
    Err(GazeError::InsufficientRangeData(
        "no symmetric interval satisfies the residual bound".to_string(),
    ))
}
