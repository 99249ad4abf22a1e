//! Acceptance suite: every release criterion as one test, each printing a
//! pass/fail line. Oracles here are written independently of the library
//! paths they check (per-pixel scans, direct linear solves, naive formula
//! evaluations).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::time::Instant;
use vog::config::RunConfig;
use vog::corner::{vpf_vertical, CornerSearchArea, CornerSide};
use vog::eval;
use vog::fit::{algebraic_fit, double_fit, geometric_rss, Circle};
use vog::gaze::{fixation_stats, Axis};
use vog::image::{downscale, isodata_threshold, GrayImage, Rect};
use vog::pipeline::{detect_frame, STAGE_NAMES};
use vog::synth::{fixation_protocol, pursuit_protocol, range_protocol, render, EyeScene};
use vog::trace::track;

fn verdict(criterion: u32, name: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion:2} {} - {name}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} ({name}): {detail}");
}

fn random_image(w: u32, h: u32, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // A mix of bimodal and uniform content exercises realistic histograms.
    let data: Vec<u8> = (0..(w as usize * h as usize))
        .map(|_| {
            if rng.gen_bool(0.5) {
                rng.gen_range(0..=110)
            } else {
                rng.gen_range(100..=255)
            }
        })
        .collect();
    GrayImage::from_raw(w, h, data).unwrap()
}

/// Independent isodata oracle: per-pixel class means for every candidate
/// split, collecting all self-consistent fixed points.
fn isodata_fixed_points(img: &GrayImage) -> Vec<f64> {
    let mut points = Vec::new();
    for split in 0..=255u32 {
        let (mut lo_sum, mut lo_n, mut hi_sum, mut hi_n) = (0u64, 0u64, 0u64, 0u64);
        for y in 0..img.height() {
            for x in 0..img.width() {
                let p = img.get(x, y) as u64;
                if p <= split as u64 {
                    lo_sum += p;
                    lo_n += 1;
                } else {
                    hi_sum += p;
                    hi_n += 1;
                }
            }
        }
        if lo_n == 0 || hi_n == 0 {
            continue;
        }
        let t = (lo_sum as f64 / lo_n as f64 + hi_sum as f64 / hi_n as f64) / 2.0;
        if t.floor().clamp(0.0, 255.0) as u32 == split {
            points.push(t);
        }
    }
    points
}

#[test]
fn acceptance_01_isodata_oracle_equivalence() {
    let start = Instant::now();
    let mut images: Vec<GrayImage> = (0..100).map(|s| random_image(80, 60, s)).collect();
    for seed in 0..20u64 {
        let mut scene = EyeScene::default();
        scene.seed = seed;
        scene.noise_sigma = if seed % 2 == 0 { 0.0 } else { 8.0 };
        let (img, _) = render(&scene).unwrap();
        images.push(downscale(&img, 8).unwrap());
    }
    let mut checked = 0;
    for (i, img) in images.iter().enumerate() {
        let t = isodata_threshold(img, None).unwrap();
        let fixed = isodata_fixed_points(img);
        let exact_match = fixed.iter().any(|&f| f == t);
        assert!(
            exact_match,
            "image {i}: threshold {t} not among exhaustive fixed points {fixed:?}"
        );
        checked += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        1,
        "isodata oracle equivalence",
        checked == 120 && elapsed < 5.0,
        &format!("{checked}/120 images match the exhaustive fixed-point search exactly in {elapsed:.2}s"),
    );
}

/// Independent direct solve of the unshifted moment normal equations by
/// Gauss-Jordan elimination with partial pivoting.
fn direct_normal_solve(points: &[(f64, f64)]) -> Option<Circle> {
    let n = points.len() as f64;
    let (mut mx, mut my, mut mz) = (0.0, 0.0, 0.0);
    let (mut mxx, mut myy, mut mxy) = (0.0, 0.0, 0.0);
    let (mut mxz, mut myz) = (0.0, 0.0);
    for &(x, y) in points {
        let z = x * x + y * y;
        mx += x;
        my += y;
        mz += z;
        mxx += x * x;
        myy += y * y;
        mxy += x * y;
        mxz += x * z;
        myz += y * z;
    }
    let mut m = [
        [mxx, mxy, mx, -mxz],
        [mxy, myy, my, -myz],
        [mx, my, n, -mz],
    ];
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())?;
        if m[pivot][col].abs() < 1e-9 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    let b = m[0][3] / m[0][0];
    let c = m[1][3] / m[1][1];
    let d = m[2][3] / m[2][2];
    let cx = -b / 2.0;
    let cy = -c / 2.0;
    let r2 = cx * cx + cy * cy - d;
    (r2 > 0.0).then(|| Circle {
        cx,
        cy,
        radius: r2.sqrt(),
    })
}

#[test]
fn acceptance_02_circle_fit_oracle_equivalence() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_rss = 0.0f64;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cx = rng.gen_range(-100.0..100.0);
        let cy = rng.gen_range(-100.0..100.0);
        let r = rng.gen_range(10.0..80.0);
        let n = rng.gen_range(8..200);
        let noisy = seed % 4 != 0;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let theta = TAU * i as f64 / n as f64 + rng.gen_range(0.0..0.01);
                let rr = if noisy { r + rng.gen_range(-1.0..1.0) } else { r };
                (cx + rr * theta.cos(), cy + rr * theta.sin())
            })
            .collect();
        let ours = algebraic_fit(&pts).unwrap();
        let direct = direct_normal_solve(&pts).unwrap();
        worst = worst
            .max((ours.cx - direct.cx).abs())
            .max((ours.cy - direct.cy).abs())
            .max((ours.radius - direct.radius).abs());
        if !noisy {
            worst_rss = worst_rss.max(geometric_rss(&ours, &pts));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        2,
        "circle fit oracle equivalence",
        worst <= 1e-9 && worst_rss < 1e-18 && elapsed < 5.0,
        &format!(
            "1000 point sets, worst |delta| = {worst:.2e} (<=1e-9), exact-circle rss {worst_rss:.2e} (<1e-18), {elapsed:.2}s"
        ),
    );
}

#[test]
fn acceptance_03_double_fit_robustness() {
    let start = Instant::now();
    let trials = 500;
    let mut ok = 0;
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cx = rng.gen_range(200.0..400.0);
        let cy = rng.gen_range(150.0..300.0);
        let n = 60usize;
        // Exactly 20% of the points displaced radially outward by 0.3R.
        let mut displaced: Vec<bool> = (0..n).map(|i| i % 5 == 0).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            displaced.swap(i, j);
        }
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let theta = TAU * i as f64 / n as f64;
                let r = if displaced[i] { 60.0 * 1.3 } else { 60.0 };
                (cx + r * theta.cos(), cy + r * theta.sin())
            })
            .collect();
        if let Ok(report) = double_fit(&pts, 2.0, 8) {
            let err = ((report.circle.cx - cx).powi(2) + (report.circle.cy - cy).powi(2)).sqrt();
            if err <= 0.5 {
                ok += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let frac = ok as f64 / trials as f64;
    verdict(
        3,
        "double fit robustness",
        frac >= 0.95 && elapsed < 10.0,
        &format!("{ok}/{trials} trials within 0.5 px ({:.1}%), {elapsed:.2}s", frac * 100.0),
    );
}

#[test]
fn acceptance_04_vpf_oracle_equivalence() {
    let mut areas_checked = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..24 {
        let img = if case < 12 {
            random_image(200, 160, 1000 + case as u64)
        } else {
            let mut scene = EyeScene::default();
            scene.seed = case as u64;
            scene.noise_sigma = if case % 2 == 0 { 8.0 } else { 0.0 };
            render(&scene).unwrap().0
        };
        let x0 = rng.gen_range(0..img.width() / 2);
        let y0 = rng.gen_range(0..img.height() / 2);
        let x1 = rng.gen_range(x0 + 4..=img.width());
        let y1 = rng.gen_range(y0 + 2..=img.height());
        let area = CornerSearchArea {
            bbox: Rect::new(x0, y0, x1, y1),
            side: CornerSide::TemporalRight,
        };
        let profile = vpf_vertical(&img, &area);
        // Naive evaluation: straight double loops per column.
        let rows = (y1 - y0) as f64;
        for (i, x) in (x0..x1).enumerate() {
            let mut sum = 0.0;
            for y in y0..y1 {
                sum += img.get(x, y) as f64;
            }
            let mean = sum / rows;
            let mut var = 0.0;
            for y in y0..y1 {
                let d = img.get(x, y) as f64 - mean;
                var += d * d;
            }
            var /= rows;
            assert!(profile.means[i] == mean, "mean differs at column {x}");
            assert!(profile.values[i] == var, "variance differs at column {x}");
        }
        areas_checked += 1;
    }
    verdict(
        4,
        "vpf oracle equivalence",
        areas_checked == 24,
        &format!("{areas_checked} areas bit-identical to naive evaluation"),
    );
}

#[test]
fn acceptance_05_end_to_end_synthetic_accuracy() {
    let cfg = RunConfig::default();
    let suites = |sigma: f64, seed: u64| {
        let mut base = EyeScene::default();
        base.noise_sigma = sigma;
        base.seed = seed;
        let mut runs = Vec::new();
        runs.push(eval::run_suite(
            "fixation",
            &fixation_protocol(&base, 16.0, 2.0, cfg.fps, 2, Axis::Horizontal).steps,
            &cfg,
        ));
        for axis in [Axis::Horizontal, Axis::Vertical] {
            runs.push(eval::run_suite(
                "pursuit",
                &pursuit_protocol(&base, 20.0, 2.0, axis, cfg.fps, 2),
                &cfg,
            ));
            runs.push(eval::run_suite(
                "range",
                &range_protocol(&base, 3.0, 18.0, 1.0, axis, cfg.fps).steps,
                &cfg,
            ));
        }
        runs
    };

    let mut pass = true;
    let mut details = Vec::new();
    for run in suites(0.0, 41) {
        let check = eval::check_accuracy(&run, 1.0, 2.0, 1.0);
        pass &= check.passed;
        details.push(format!("sigma=0 {}: {}", run.name, check.detail));
    }
    for run in suites(8.0, 42) {
        let check = eval::check_accuracy(&run, 2.0, 3.0, 0.95);
        pass &= check.passed;
        details.push(format!("sigma=8 {}: {}", run.name, check.detail));
    }
    verdict(5, "end-to-end synthetic accuracy", pass, &details.join("; "));
}

#[test]
fn acceptance_06_fixation_budget_and_asymmetry() {
    let cfg = RunConfig::default();
    let checks = eval::eval_fixation(&cfg, 4242);
    let budget = checks
        .iter()
        .find(|c| c.name.contains("velocity budget"))
        .expect("budget check present");
    let asym = checks
        .iter()
        .find(|c| c.name.contains("asymmetry"))
        .expect("asymmetry check present");
    verdict(
        6,
        "fixation budget and y>=x asymmetry",
        budget.passed && asym.passed,
        &format!("{}; {}", budget.detail, asym.detail),
    );
}

#[test]
fn acceptance_07_range_linearity() {
    let cfg = RunConfig::default();
    let checks = eval::eval_range(&cfg, 777);
    let lin = checks
        .iter()
        .find(|c| c.name.contains("linearity"))
        .expect("linearity check present");
    let occ = checks
        .iter()
        .find(|c| c.name.contains("vertical range"))
        .expect("occluded comparison present");
    verdict(
        7,
        "range linearity",
        lin.passed && occ.passed,
        &format!("{}; {}", lin.detail, occ.detail),
    );
}

#[test]
fn acceptance_08_failure_contract() {
    let checks = eval::eval_failure_contract(&RunConfig::default(), 31337);
    verdict(8, "occlusion failure contract", checks[0].passed, &checks[0].detail);
}

#[test]
fn acceptance_09_head_translation_cancellation() {
    let cfg = RunConfig::default();
    // Two gazes 16 px apart (a whole number of downscale blocks, so the
    // low-resolution pass sees identical content in both frames).
    let make_pair = |dx: i64, dy: i64| -> Vec<GrayImage> {
        [320.0f64, 336.0f64]
            .iter()
            .map(|&iris_x| {
                let mut scene = EyeScene::default();
                scene.iris_center = (iris_x + dx as f64, 240.0 + dy as f64);
                scene.corner_left = (205.0 + dx as f64, 240.0 + dy as f64);
                scene.corner_right = (435.0 + dx as f64, 240.0 + dy as f64);
                scene.eyebrow_band = Rect::new(
                    (165 + dx) as u32,
                    (40 + dy) as u32,
                    (475 + dx) as u32,
                    (90 + dy) as u32,
                );
                render(&scene).unwrap().0
            })
            .collect()
    };
    let times = vec![0.0, 1.0 / 30.0];
    let base = track(&make_pair(0, 0), &times, &cfg);
    assert!(base.iter().all(|r| r.is_ok()), "base pair must detect");
    let (bvx, bvy) = base[1].velocity_deg.unwrap();

    let mut worst = 0.0f64;
    for (dx, dy) in [(5, 3), (5, -3), (-5, 3), (-5, -3)] {
        let shifted = track(&make_pair(dx, dy), &times, &cfg);
        assert!(shifted.iter().all(|r| r.is_ok()), "shifted pair ({dx},{dy}) must detect");
        let (vx, vy) = shifted[1].velocity_deg.unwrap();
        worst = worst.max((vx - bvx).abs()).max((vy - bvy).abs());
    }
    verdict(
        9,
        "head translation cancellation",
        worst <= 1e-9,
        &format!("max velocity change across (+-5,+-3) px shifts = {worst:.2e} deg/s (<=1e-9)"),
    );
}

#[test]
fn acceptance_10_performance_budget_report() {
    let report = vog::bench::run_bench(&RunConfig::default(), 50);
    let text = report.text();
    let all_stages = STAGE_NAMES.iter().all(|s| text.contains(s));
    let has_ratio = text.contains("x budget");
    // The budget itself is hardware-conditional; the criterion is that the
    // measurement runs and the ratio is reported.
    verdict(
        10,
        "performance budget report",
        all_stages && has_ratio && report.budget_ratio() > 0.0,
        &format!(
            "median {:.3} ms vs {:.3} ms budget (ratio {:.2}{})",
            report.end_to_end.median_ms,
            report.budget_ms,
            report.budget_ratio(),
            if report.meets_budget() { ", within budget" } else { ", over budget on this host" }
        ),
    );
}

#[test]
fn fixation_stats_on_static_suite_are_zero() {
    // Cross-check the velocity machinery end to end: a noiseless fixation
    // dwell yields bitwise-zero speeds.
    let cfg = RunConfig::default();
    let plan = fixation_protocol(&EyeScene::default(), 16.0, 1.0, 30.0, 2, Axis::Horizontal);
    let run = eval::run_suite("static-check", &plan.steps, &cfg);
    let obs: Vec<_> = run.records.iter().map(|r| r.to_observation()).collect();
    let stats = fixation_stats(&obs, &plan.dwell_windows, &cfg.calibration());
    assert_eq!(stats.mean_speed_x, 0.0);
    assert_eq!(stats.mean_speed_y, 0.0);
    assert!(stats.pairs_used > 0);
    let _ = detect_frame; // re-exported path is exercised elsewhere
}
