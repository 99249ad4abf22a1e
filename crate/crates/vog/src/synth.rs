//! Deterministic synthetic-eye renderer and gaze-trajectory generators.
//!
//! The renderer draws, in order: skin, the eyebrow band, the eye opening
//! bounded by two parabolic eyelids meeting at the corners, sclera inside
//! the opening, the iris disc with its concentric pupil, and dark eyelid
//! margin (lash) lines along both lids. The margin lines converge at the
//! eyelid junctions, which is what gives the corners their contrast; as the
//! aperture closes they merge into the dark lash band of a shut eye. All
//! edges are drawn with one-pixel coverage blending and optional seeded
//! Gaussian noise, so identical (scene, seed) pairs produce identical
//! bytes and ground truth stays exact by construction.

use crate::gaze::Axis;
use crate::image::{GrayImage, Rect};
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene parameter error: {0}")]
    Parameter(String),
}

/// Full parameter set for one rendered frame.
#[derive(Debug, Clone)]
pub struct EyeScene {
    pub width: u32,
    pub height: u32,
    pub skin_level: u8,
    pub sclera_level: u8,
    pub iris_level: u8,
    pub pupil_level: u8,
    pub eyebrow_level: u8,
    /// Eyelid margin (lash line) intensity.
    pub lash_level: u8,
    pub iris_center: (f64, f64),
    pub iris_radius: f64,
    pub pupil_radius: f64,
    /// Vertical opening between the eyelids at the eye's midline, pixels.
    pub eyelid_aperture: f64,
    pub corner_left: (f64, f64),
    pub corner_right: (f64, f64),
    pub eyebrow_band: Rect,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Gaze angle this frame encodes, degrees; copied into the ground truth.
    pub gaze_deg: (f64, f64),
}

impl Default for EyeScene {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            skin_level: 180,
            sclera_level: 190,
            iris_level: 60,
            pupil_level: 20,
            eyebrow_level: 40,
            lash_level: 150,
            iris_center: (320.0, 240.0),
            iris_radius: 50.0,
            pupil_radius: 45.0,
            eyelid_aperture: 230.0,
            corner_left: (205.0, 240.0),
            corner_right: (435.0, 240.0),
            eyebrow_band: Rect::new(165, 40, 475, 90),
            noise_sigma: 0.0,
            seed: 0,
            gaze_deg: (0.0, 0.0),
        }
    }
}

impl EyeScene {
    fn validate(&self) -> Result<(), SceneError> {
        if self.pupil_radius >= self.iris_radius {
            return Err(SceneError::Parameter(
                "pupil radius must be smaller than iris radius".to_string(),
            ));
        }
        if !(self.sclera_level > self.iris_level && self.iris_level > self.pupil_level) {
            return Err(SceneError::Parameter(
                "need sclera > iris > pupil intensity".to_string(),
            ));
        }
        if self.eyelid_aperture < 0.0 {
            return Err(SceneError::Parameter("aperture must be >= 0".to_string()));
        }
        if self.corner_right.0 <= self.corner_left.0 + 4.0 {
            return Err(SceneError::Parameter("corners too close".to_string()));
        }
        Ok(())
    }

    fn half_width(&self) -> f64 {
        (self.corner_right.0 - self.corner_left.0) / 2.0
    }

    fn mid_x(&self) -> f64 {
        (self.corner_right.0 + self.corner_left.0) / 2.0
    }

    /// Corner-to-corner baseline at column x.
    fn baseline(&self, x: f64) -> f64 {
        let t = (x - self.corner_left.0) / (self.corner_right.0 - self.corner_left.0);
        self.corner_left.1 + t * (self.corner_right.1 - self.corner_left.1)
    }

    /// Upper and lower eyelid curves at column x.
    fn lids(&self, x: f64) -> (f64, f64) {
        let u = (x - self.mid_x()) / self.half_width();
        let bump = (self.eyelid_aperture / 2.0) * (1.0 - u * u);
        let base = self.baseline(x);
        (base - bump, base + bump)
    }

    /// Lash-line thickness; shut lids bunch the lashes into a thicker band.
    fn lash_thickness(&self) -> f64 {
        (12.0 - self.eyelid_aperture / 3.0).max(2.5)
    }

    /// Convenience for occlusion studies.
    pub fn with_aperture(mut self, aperture: f64) -> Self {
        self.eyelid_aperture = aperture;
        self
    }

    pub fn with_gaze(mut self, gaze_deg: (f64, f64), px_per_deg: f64) -> Self {
        let base = EyeScene::default().iris_center;
        self.iris_center = (
            base.0 + gaze_deg.0 * px_per_deg,
            base.1 + gaze_deg.1 * px_per_deg,
        );
        self.gaze_deg = gaze_deg;
        self
    }
}

/// Exact answers for one rendered frame.
#[derive(Debug, Clone, Copy)]
pub struct GroundTruth {
    pub pupil_center: (f64, f64),
    pub iris_radius: f64,
    /// The corner on the default detection side (right).
    pub corner: (f64, f64),
    /// Fraction of the iris disc visible through the eye opening.
    pub visible_iris_fraction: f64,
    pub gaze_angle: (f64, f64),
}

/// Intensity of the lash shadow pooled at the eyelid junctions.
const CANTHUS_POOL_LEVEL: u8 = 70;

#[inline]
fn mix(base: f64, layer: u8, cov: f64) -> f64 {
    base * (1.0 - cov) + layer as f64 * cov
}

/// Render the scene; identical (scene, seed) yields identical bytes.
pub fn render(scene: &EyeScene) -> Result<(GrayImage, GroundTruth), SceneError> {
    scene.validate()?;
    let (icx, icy) = scene.iris_center;
    let tau = scene.lash_thickness();
    let mut data = Vec::with_capacity(scene.width as usize * scene.height as usize);

    let mut visible = 0u64;
    let mut disc_total = 0u64;

    for yi in 0..scene.height {
        let y = yi as f64;
        for xi in 0..scene.width {
            let x = xi as f64;
            let mut v = scene.skin_level as f64;

            if scene.eyebrow_band.contains(xi, yi) {
                v = scene.eyebrow_level as f64;
            }

            // Eye opening between the lids, with 1-px coverage ramps.
            let (y_up, y_lo) = scene.lids(x);
            let open_cov = ((y - y_up).min(y_lo - y) + 0.5).clamp(0.0, 1.0);
            if open_cov > 0.0 {
                v = mix(v, scene.sclera_level, open_cov);

                let d_iris = ((x - icx).powi(2) + (y - icy).powi(2)).sqrt();
                let iris_cov = (scene.iris_radius - d_iris + 0.5).clamp(0.0, 1.0) * open_cov;
                if iris_cov > 0.0 {
                    v = mix(v, scene.iris_level, iris_cov);
                    let pupil_cov =
                        (scene.pupil_radius - d_iris + 0.5).clamp(0.0, 1.0) * open_cov;
                    if pupil_cov > 0.0 {
                        v = mix(v, scene.pupil_level, pupil_cov);
                    }
                }

            }

            // Eyelid margin (lash) lines fade in where the opening pinches
            // shut: around the canthi always, everywhere on a nearly shut
            // eye. Slightly darker than skin, far above the dark classes.
            let u = (x - scene.mid_x()) / scene.half_width();
            if u.abs() <= 1.0 {
                let half_open = (y_lo - y_up) / 2.0;
                let line_alpha = ((20.0 - half_open) / 10.0).clamp(0.0, 1.0);
                if line_alpha > 0.0 {
                    let half = tau / 2.0;
                    let cov_up = (half - (y - y_up).abs() + 0.5).clamp(0.0, 1.0);
                    let cov_lo = (half - (y - y_lo).abs() + 0.5).clamp(0.0, 1.0);
                    let cov = cov_up.max(cov_lo) * line_alpha;
                    if cov > 0.0 {
                        v = mix(v, scene.lash_level, cov);
                    }
                }

                // Dark lash shadow pools at the junction itself; this is
                // the high-contrast feature corner detection keys on, and
                // it becomes the lash band of a shut eye. It fades in
                // gently toward the eye (no competing inner edge), stops
                // hard at the junction column, and keeps one sharp top
                // edge on the corner row with a soft falloff below, so
                // the strongest local gradient sits on the corner.
                let pinch = ((18.0 - half_open) / 12.0).clamp(0.0, 1.0);
                if pinch > 0.0 {
                    let pool_depth = (18.0 - scene.eyelid_aperture / 2.0).clamp(2.0, 12.0);
                    let mid = (y_up + y_lo) / 2.0;
                    let top_ramp = (y - mid + 0.5).clamp(0.0, 1.0);
                    let bot_ramp = ((mid + pool_depth - y + 2.0) / 4.0).clamp(0.0, 1.0);
                    let pool_cov = top_ramp.min(bot_ramp);
                    if pool_cov > 0.0 {
                        v = mix(v, CANTHUS_POOL_LEVEL, pinch * pool_cov);
                    }
                }
            }

            // Iris visibility bookkeeping on pre-noise geometry.
            let d_iris = ((x - icx).powi(2) + (y - icy).powi(2)).sqrt();
            if d_iris <= scene.iris_radius {
                disc_total += 1;
                if (y - y_up).min(y_lo - y) > 0.0 {
                    visible += 1;
                }
            }

            data.push(v);
        }
    }

    let bytes: Vec<u8> = if scene.noise_sigma > 0.0 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(scene.seed);
        let normal = Normal::new(0.0, scene.noise_sigma)
            .map_err(|e| SceneError::Parameter(e.to_string()))?;
        data.iter()
            .map(|&v| (v + normal.sample(&mut rng)).round().clamp(0.0, 255.0) as u8)
            .collect()
    } else {
        data.iter().map(|&v| v.round().clamp(0.0, 255.0) as u8).collect()
    };

    let img = GrayImage::from_raw(scene.width, scene.height, bytes)
        .expect("buffer sized from scene dimensions");
    let truth = GroundTruth {
        pupil_center: scene.iris_center,
        iris_radius: scene.iris_radius,
        corner: scene.corner_right,
        visible_iris_fraction: if disc_total == 0 {
            0.0
        } else {
            visible as f64 / disc_total as f64
        },
        gaze_angle: scene.gaze_deg,
    };
    Ok((img, truth))
}

// ---------------------------------------------------------------------------
// Protocol generators
// ---------------------------------------------------------------------------

/// Scene-space scale the protocols move the iris with. At 1.5 px/deg an
/// 18-degree excursion is 27 px, which keeps the iris well inside the eye
/// opening and the corner inside the pupil-anchored search band.
pub const PROTOCOL_PX_PER_DEG: f64 = 1.5;

/// One frame of a generated trajectory.
#[derive(Debug, Clone)]
pub struct ProtocolStep {
    pub scene: EyeScene,
    pub t: f64,
}

/// Fixation plan: frames plus the dwell windows fixation statistics use.
#[derive(Debug, Clone)]
pub struct FixationPlan {
    pub steps: Vec<ProtocolStep>,
    pub dwell_windows: Vec<(f64, f64)>,
}

/// Range plan: frames plus per-dwell truth for the linearity regression.
#[derive(Debug, Clone)]
pub struct RangePlan {
    pub steps: Vec<ProtocolStep>,
    pub dwells: Vec<crate::gaze::DwellTruth>,
}

fn frame_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index + 1))
}

fn step_for(base: &EyeScene, angle: (f64, f64), px_per_deg: f64, index: u64, t: f64) -> ProtocolStep {
    let mut scene = base.clone().with_gaze(angle, px_per_deg);
    scene.seed = frame_seed(base.seed, index);
    ProtocolStep { scene, t }
}

/// Alternating fixation at +/-angle_deg along `axis`, `dwell_s` per dwell.
pub fn fixation_protocol(
    base: &EyeScene,
    angle_deg: f64,
    dwell_s: f64,
    fps: f64,
    n_dwells: u32,
    axis: Axis,
) -> FixationPlan {
    assert!(fps > 0.0 && dwell_s > 0.0);
    let frames_per_dwell = (dwell_s * fps).round() as u64;
    let mut steps = Vec::new();
    let mut windows = Vec::new();
    for d in 0..n_dwells as u64 {
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        let angle = match axis {
            Axis::Horizontal => (sign * angle_deg, 0.0),
            Axis::Vertical => (0.0, sign * angle_deg),
        };
        windows.push((d as f64 * dwell_s, (d + 1) as f64 * dwell_s));
        for i in 0..frames_per_dwell {
            let index = d * frames_per_dwell + i;
            steps.push(step_for(base, angle, PROTOCOL_PX_PER_DEG, index, index as f64 / fps));
        }
    }
    FixationPlan {
        steps,
        dwell_windows: windows,
    }
}

/// Sinusoidal pursuit: angle(t) = (v_max * period / 2pi) * sin(2pi t / period),
/// so the angular speed peaks at exactly `v_max_deg_s`.
pub fn pursuit_protocol(
    base: &EyeScene,
    v_max_deg_s: f64,
    period_s: f64,
    axis: Axis,
    fps: f64,
    n_periods: u32,
) -> Vec<ProtocolStep> {
    assert!(fps > 0.0 && period_s > 0.0);
    let amplitude = v_max_deg_s * period_s / std::f64::consts::TAU;
    let frames = (n_periods as f64 * period_s * fps).round() as u64;
    (0..frames)
        .map(|i| {
            let t = i as f64 / fps;
            let theta = amplitude * (std::f64::consts::TAU * t / period_s).sin();
            let angle = match axis {
                Axis::Horizontal => (theta, 0.0),
                Axis::Vertical => (0.0, theta),
            };
            step_for(base, angle, PROTOCOL_PX_PER_DEG, i, t)
        })
        .collect()
}

/// Center-outward dwell array: 0, +step, -step, +2step, -2step, ... out to
/// +/-extent, `dwell_s` at each point.
pub fn range_protocol(
    base: &EyeScene,
    step_deg: f64,
    extent_deg: f64,
    dwell_s: f64,
    axis: Axis,
    fps: f64,
) -> RangePlan {
    assert!(step_deg > 0.0 && fps > 0.0 && dwell_s > 0.0);
    let n_side = (extent_deg / step_deg).floor() as i64;
    let mut angles = vec![0.0f64];
    for k in 1..=n_side {
        angles.push(k as f64 * step_deg);
        angles.push(-(k as f64) * step_deg);
    }
    let frames_per_dwell = (dwell_s * fps).round() as u64;
    let mut steps = Vec::new();
    let mut dwells = Vec::new();
    for (d, &a) in angles.iter().enumerate() {
        let t0 = d as f64 * dwell_s;
        dwells.push(crate::gaze::DwellTruth {
            t0,
            t1: t0 + dwell_s,
            angle_deg: a,
        });
        let angle = match axis {
            Axis::Horizontal => (a, 0.0),
            Axis::Vertical => (0.0, a),
        };
        for i in 0..frames_per_dwell {
            let index = d as u64 * frames_per_dwell + i;
            steps.push(step_for(base, angle, PROTOCOL_PX_PER_DEG, index, index as f64 / fps));
        }
    }
    RangePlan { steps, dwells }
}

/// Fixed gaze, `n_frames` frames; per-frame seeds still differ so noise is
/// independent across frames.
pub fn static_protocol(base: &EyeScene, gaze_deg: (f64, f64), n_frames: u32, fps: f64) -> Vec<ProtocolStep> {
    (0..n_frames as u64)
        .map(|i| step_for(base, gaze_deg, PROTOCOL_PX_PER_DEG, i, i as f64 / fps))
        .collect()
}

/// Manifest CSV header for generated sequences.
pub const MANIFEST_HEADER: &str =
    "frame_index,t,true_pupil_x,true_pupil_y,true_corner_x,true_corner_y,gaze_deg_x,gaze_deg_y";

/// One manifest row; fixed six-decimal formatting keeps output byte-stable.
pub fn manifest_row(index: usize, t: f64, truth: &GroundTruth) -> String {
    format!(
        "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
        index,
        t,
        truth.pupil_center.0,
        truth.pupil_center.1,
        truth.corner.0,
        truth.corner.1,
        truth.gaze_angle.0,
        truth.gaze_angle.1
    )
}
