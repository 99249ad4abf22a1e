//! Synthetic evaluation suites: fixation, smooth pursuit, range and the
//! occlusion failure contract, each rendered, tracked and scored against
//! exact ground truth, with one pass/fail line per check.

use crate::config::RunConfig;
use crate::gaze::{fixation_stats, linear_range, Axis, GazeObservation};
use crate::image::GrayImage;
use crate::synth::{
    fixation_protocol, pursuit_protocol, range_protocol, render, EyeScene, GroundTruth,
    ProtocolStep,
};
use crate::trace::{track, TraceRecord};
use rayon::prelude::*;

/// Velocity ceilings for the fixation budget, deg/s.
pub const FIXATION_BUDGET_X: f64 = 1.12;
pub const FIXATION_BUDGET_Y: f64 = 2.48;
/// Per-frame accuracy bounds, pixels.
pub const PUPIL_ERR_CLEAN: f64 = 1.0;
pub const CORNER_ERR_CLEAN: f64 = 2.0;
pub const PUPIL_ERR_NOISY: f64 = 2.0;
pub const CORNER_ERR_NOISY: f64 = 3.0;
/// Minimum in-tolerance fraction for noisy suites.
pub const NOISY_PASS_FRACTION: f64 = 0.95;
/// Range linearity requirements.
pub const RANGE_R2_MIN: f64 = 0.999;
pub const RANGE_X_MIN_DEG: f64 = 16.0;
/// Scenes below this visible-iris fraction must always fail detection.
pub const OCCLUSION_FAIL_FRACTION: f64 = 0.15;

/// Scene used for the eyelid-occluded variants: the lids pinch the eye and
/// the gaze rests a little low, so the lower lid crops the dark disc.
pub fn occluded_scene() -> EyeScene {
    EyeScene::default()
        .with_aperture(95.0)
        .with_gaze((0.0, 6.0), crate::synth::PROTOCOL_PX_PER_DEG)
}

/// One scored check of an evaluation run.
#[derive(Debug, Clone)]
pub struct EvalCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl EvalCheck {
    pub fn line(&self) -> String {
        format!(
            "{}  {} - {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Rendered + tracked protocol with its ground truth, ready for scoring.
pub struct SuiteRun {
    pub name: String,
    pub records: Vec<TraceRecord>,
    pub truths: Vec<GroundTruth>,
    pub frames_hash: u64,
}

/// FNV-1a over all frame bytes; used to show tracking never mutates the
/// rendered data.
pub fn hash_frames(frames: &[GrayImage]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for f in frames {
        for &b in f.data() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
    }
    h
}

/// Render every step (in parallel) and track the resulting frames.
pub fn run_suite(name: &str, steps: &[ProtocolStep], cfg: &RunConfig) -> SuiteRun {
    let rendered: Vec<(GrayImage, GroundTruth)> = steps
        .par_iter()
        .map(|s| render(&s.scene).expect("protocol scenes are valid"))
        .collect();
    let frames: Vec<GrayImage> = rendered.iter().map(|(f, _)| f.clone()).collect();
    let truths: Vec<GroundTruth> = rendered.iter().map(|(_, t)| *t).collect();
    let times: Vec<f64> = steps.iter().map(|s| s.t).collect();
    let before = hash_frames(&frames);
    let records = track(&frames, &times, cfg);
    let after = hash_frames(&frames);
    assert_eq!(before, after, "tracking must not mutate frames");
    SuiteRun {
        name: name.to_string(),
        records,
        truths,
        frames_hash: before,
    }
}

/// Pupil and corner error per ok frame; None for failed frames.
pub fn frame_errors(run: &SuiteRun) -> Vec<Option<(f64, f64)>> {
    run.records
        .iter()
        .zip(&run.truths)
        .map(|(rec, truth)| {
            rec.detection.as_ref().map(|d| {
                let pe = ((d.pupil.cx - truth.pupil_center.0).powi(2)
                    + (d.pupil.cy - truth.pupil_center.1).powi(2))
                .sqrt();
                let ce = ((d.corner.x as f64 - truth.corner.0).powi(2)
                    + (d.corner.y as f64 - truth.corner.1).powi(2))
                .sqrt();
                (pe, ce)
            })
        })
        .collect()
}

pub fn observations(run: &SuiteRun) -> Vec<GazeObservation> {
    run.records.iter().map(|r| r.to_observation()).collect()
}

/// Accuracy check over a suite at the stated tolerances, requiring
/// `min_fraction` of frames detected and within bounds.
pub fn check_accuracy(
    run: &SuiteRun,
    pupil_tol: f64,
    corner_tol: f64,
    min_fraction: f64,
) -> EvalCheck {
    let errs = frame_errors(run);
    let total = errs.len();
    let good = errs
        .iter()
        .filter(|e| matches!(e, Some((pe, ce)) if *pe <= pupil_tol && *ce <= corner_tol))
        .count();
    let worst = errs
        .iter()
        .flatten()
        .fold((0.0f64, 0.0f64), |acc, &(pe, ce)| (acc.0.max(pe), acc.1.max(ce)));
    let frac = good as f64 / total.max(1) as f64;
    EvalCheck {
        name: format!("{} accuracy (pupil<={pupil_tol}px corner<={corner_tol}px)", run.name),
        passed: frac >= min_fraction,
        detail: format!(
            "{good}/{total} frames in tolerance ({:.1}%), worst pupil {:.2}px corner {:.2}px",
            frac * 100.0,
            worst.0,
            worst.1
        ),
    }
}

/// Fixation suites: velocity budgets on the clean eye, y >= x jitter
/// asymmetry on the occluded eye, plus per-frame accuracy at both noise
/// levels.
pub fn eval_fixation(cfg: &RunConfig, seed: u64) -> Vec<EvalCheck> {
    let mut checks = Vec::new();
    let calib = cfg.calibration();

    // Clean scene, noiseless: accuracy must be near-exact.
    let mut base = EyeScene::default();
    base.seed = seed;
    let plan = fixation_protocol(&base, 16.0, 2.0, cfg.fps, 2, Axis::Horizontal);
    let run = run_suite("fixation sigma=0", &plan.steps, cfg);
    checks.push(check_accuracy(&run, PUPIL_ERR_CLEAN, CORNER_ERR_CLEAN, 1.0));

    // Clean scene with sensor noise: budgets and accuracy quantiles.
    let mut noisy = EyeScene::default();
    noisy.noise_sigma = 8.0;
    noisy.seed = seed;
    let plan = fixation_protocol(&noisy, 16.0, 2.0, cfg.fps, 2, Axis::Horizontal);
    let run = run_suite("fixation sigma=8", &plan.steps, cfg);
    checks.push(check_accuracy(&run, PUPIL_ERR_NOISY, CORNER_ERR_NOISY, NOISY_PASS_FRACTION));
    let stats = fixation_stats(&observations(&run), &plan.dwell_windows, &calib);
    checks.push(EvalCheck {
        name: "fixation velocity budget".to_string(),
        passed: stats.mean_speed_x <= FIXATION_BUDGET_X && stats.mean_speed_y <= FIXATION_BUDGET_Y,
        detail: format!(
            "mean |v| = ({:.3}, {:.3}) deg/s vs budget ({FIXATION_BUDGET_X}, {FIXATION_BUDGET_Y}), {} pairs",
            stats.mean_speed_x, stats.mean_speed_y, stats.pairs_used
        ),
    });

    // Eyelid-occluded scene: the vertical error must dominate.
    let mut occ = occluded_scene();
    occ.noise_sigma = 8.0;
    occ.seed = seed ^ 0x5eed;
    let plan = fixation_protocol(&occ, 16.0, 2.0, cfg.fps, 2, Axis::Horizontal);
    let run = run_suite("fixation occluded sigma=8", &plan.steps, cfg);
    let stats = fixation_stats(&observations(&run), &plan.dwell_windows, &calib);
    checks.push(EvalCheck {
        name: "occluded fixation y >= x asymmetry".to_string(),
        passed: stats.pairs_used > 0 && stats.mean_speed_y >= stats.mean_speed_x,
        detail: format!(
            "mean |v| = ({:.3}, {:.3}) deg/s over {} pairs",
            stats.mean_speed_x, stats.mean_speed_y, stats.pairs_used
        ),
    });
    checks
}

/// Pursuit suites: sinusoidal target, horizontal then vertical, noiseless
/// tracking error against the manifest.
pub fn eval_pursuit(cfg: &RunConfig, seed: u64) -> Vec<EvalCheck> {
    let mut checks = Vec::new();
    for axis in [Axis::Horizontal, Axis::Vertical] {
        let mut base = EyeScene::default();
        base.seed = seed;
        let steps = pursuit_protocol(&base, 20.0, 2.0, axis, cfg.fps, 2);
        let name = match axis {
            Axis::Horizontal => "pursuit horizontal sigma=0",
            Axis::Vertical => "pursuit vertical sigma=0",
        };
        let run = run_suite(name, &steps, cfg);
        checks.push(check_accuracy(&run, PUPIL_ERR_CLEAN, CORNER_ERR_CLEAN, 1.0));

        let errs = frame_errors(&run);
        let worst_tracking = errs.iter().flatten().fold(0.0f64, |m, &(pe, _)| m.max(pe));
        checks.push(EvalCheck {
            name: format!("{name} tracking error <= 2px"),
            passed: errs.iter().all(|e| e.is_some()) && worst_tracking <= 2.0,
            detail: format!("worst per-frame pupil error {worst_tracking:.2}px"),
        });
    }
    checks
}

/// Range suites: linearity of recovered offset against true angle, clean
/// horizontal and vertical, then the occluded vertical-vs-horizontal
/// comparison.
pub fn eval_range(cfg: &RunConfig, seed: u64) -> Vec<EvalCheck> {
    let mut checks = Vec::new();
    let mut base = EyeScene::default();
    base.seed = seed;

    let plan_h = range_protocol(&base, 3.0, 18.0, 1.0, Axis::Horizontal, cfg.fps);
    let run_h = run_suite("range horizontal sigma=0", &plan_h.steps, cfg);
    checks.push(check_accuracy(&run_h, PUPIL_ERR_CLEAN, CORNER_ERR_CLEAN, 1.0));
    let stats_h = linear_range(&observations(&run_h), &plan_h.dwells, Axis::Horizontal);
    match &stats_h {
        Ok(s) => {
            let range = s.linear_range_x.unwrap_or(0.0);
            let r2 = s.r_squared.unwrap_or(0.0);
            checks.push(EvalCheck {
                name: "range linearity (x)".to_string(),
                passed: range >= RANGE_X_MIN_DEG && r2 >= RANGE_R2_MIN,
                detail: format!("linear range +/-{range:.1} deg, r^2 = {r2:.6}"),
            });
        }
        Err(e) => checks.push(EvalCheck {
            name: "range linearity (x)".to_string(),
            passed: false,
            detail: e.to_string(),
        }),
    }

    // Occluded scenes, both axes: vertical linear range must not exceed
    // horizontal when the lids crop the eye.
    let occ = {
        let mut s = EyeScene::default().with_aperture(110.0);
        s.seed = seed ^ 0xacce;
        s
    };
    let plan_oh = range_protocol(&occ, 3.0, 18.0, 1.0, Axis::Horizontal, cfg.fps);
    let run_oh = run_suite("range occluded horizontal", &plan_oh.steps, cfg);
    let range_oh = linear_range(&observations(&run_oh), &plan_oh.dwells, Axis::Horizontal)
        .ok()
        .and_then(|s| s.linear_range_x)
        .unwrap_or(0.0);
    let plan_ov = range_protocol(&occ, 3.0, 18.0, 1.0, Axis::Vertical, cfg.fps);
    let run_ov = run_suite("range occluded vertical", &plan_ov.steps, cfg);
    let range_ov = linear_range(&observations(&run_ov), &plan_ov.dwells, Axis::Vertical)
        .ok()
        .and_then(|s| s.linear_range_y)
        .unwrap_or(0.0);
    checks.push(EvalCheck {
        name: "occluded vertical range <= horizontal".to_string(),
        passed: range_ov <= range_oh && range_oh > 0.0,
        detail: format!("vertical +/-{range_ov:.1} deg vs horizontal +/-{range_oh:.1} deg"),
    });
    checks
}

/// Failure contract: every frame with visible iris fraction below 0.15
/// must fail with "insufficient samples" and produce no circle.
pub fn eval_failure_contract(cfg: &RunConfig, seed: u64) -> Vec<EvalCheck> {
    let mut total = 0usize;
    let mut correct = 0usize;
    let mut wrong_reasons: Vec<String> = Vec::new();
    for (i, aperture) in [0.0, 4.0, 8.0, 12.0, 16.0, 20.0, 24.0].iter().enumerate() {
        let mut scene = EyeScene::default().with_aperture(*aperture);
        scene.seed = seed.wrapping_add(i as u64);
        if i % 2 == 1 {
            scene.noise_sigma = 8.0;
        }
        let (img, truth) = render(&scene).expect("valid scene");
        if truth.visible_iris_fraction >= OCCLUSION_FAIL_FRACTION {
            continue;
        }
        total += 1;
        match crate::pipeline::detect_frame(&img, cfg) {
            Err(crate::pipeline::PipelineError::Detection(f))
                if f == crate::pipeline::DetectFailure::InsufficientSamples =>
            {
                correct += 1;
            }
            Err(other) => wrong_reasons.push(format!("aperture {aperture}: {other}")),
            Ok(d) => wrong_reasons.push(format!(
                "aperture {aperture}: fabricated circle r={:.1}",
                d.pupil.radius
            )),
        }
    }
    vec![EvalCheck {
        name: "occlusion failure contract".to_string(),
        passed: correct == total && total > 0,
        detail: if wrong_reasons.is_empty() {
            format!("{correct}/{total} occluded frames failed with insufficient samples")
        } else {
            wrong_reasons.join("; ")
        },
    }]
}

/// Run the named protocol ("fixation", "pursuit", "range", "occlusion" or
/// "all") and return its checks.
pub fn evaluate(protocol: &str, cfg: &RunConfig, seed: u64) -> Option<Vec<EvalCheck>> {
    let mut checks = Vec::new();
    match protocol {
        "fixation" => checks.extend(eval_fixation(cfg, seed)),
        "pursuit" => checks.extend(eval_pursuit(cfg, seed)),
        "range" => checks.extend(eval_range(cfg, seed)),
        "occlusion" => checks.extend(eval_failure_contract(cfg, seed)),
        "all" => {
            checks.extend(eval_fixation(cfg, seed));
            checks.extend(eval_pursuit(cfg, seed));
            checks.extend(eval_range(cfg, seed));
            checks.extend(eval_failure_contract(cfg, seed));
        }
        _ => return None,
    }
    Some(checks)
}

/// Plain-text report with one line per check and a verdict.
pub fn report(checks: &[EvalCheck]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(&c.line());
        out.push('\n');
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!(
        "{} of {} checks passed\n",
        checks.len() - failed,
        checks.len()
    ));
    out
}
