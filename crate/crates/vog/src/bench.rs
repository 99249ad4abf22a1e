//! Pipeline latency measurement against the 300 Hz throughput target
//! (3.33 ms per 640x480 frame).

use crate::config::RunConfig;
use crate::pipeline::{detect_frame_timed, STAGE_NAMES};
use crate::synth::{render, EyeScene};
use std::time::Duration;

/// Per-frame latency budget implied by a 300 Hz sampling rate.
pub const BUDGET_MS: f64 = 1000.0 / 300.0;

#[derive(Debug, Clone)]
pub struct StageStats {
    pub name: &'static str,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
}

fn stats(name: &'static str, samples: &mut [f64]) -> StageStats {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len();
    StageStats {
        name,
        mean_ms: samples.iter().sum::<f64>() / n as f64,
        median_ms: samples[n / 2],
        p95_ms: samples[((n as f64 * 0.95) as usize).min(n - 1)],
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub iterations: usize,
    pub stages: Vec<StageStats>,
    pub end_to_end: StageStats,
    pub budget_ms: f64,
}

impl BenchReport {
    pub fn meets_budget(&self) -> bool {
        self.end_to_end.median_ms <= self.budget_ms
    }

    /// Ratio of the measured median to the budget; under 1.0 is in budget.
    pub fn budget_ratio(&self) -> f64 {
        self.end_to_end.median_ms / self.budget_ms
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "pipeline latency over {} iterations on one 640x480 frame\n",
            self.iterations
        ));
        out.push_str(&format!(
            "{:<12} {:>10} {:>10} {:>10}\n",
            "stage", "mean ms", "median ms", "p95 ms"
        ));
        for s in &self.stages {
            out.push_str(&format!(
                "{:<12} {:>10.4} {:>10.4} {:>10.4}\n",
                s.name, s.mean_ms, s.median_ms, s.p95_ms
            ));
        }
        out.push_str(&format!(
            "{:<12} {:>10.4} {:>10.4} {:>10.4}\n",
            "end-to-end", self.end_to_end.mean_ms, self.end_to_end.median_ms, self.end_to_end.p95_ms
        ));
        out.push_str(&format!(
            "budget {:.3} ms (300 Hz): median is {:.2}x budget -> {}\n",
            self.budget_ms,
            self.budget_ratio(),
            if self.meets_budget() { "WITHIN BUDGET" } else { "OVER BUDGET" }
        ));
        out
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Render one representative frame and run the full pipeline repeatedly.
pub fn run_bench(cfg: &RunConfig, iterations: usize) -> BenchReport {
    assert!(iterations >= 10, "need at least 10 iterations");
    let (img, _) = render(&EyeScene::default()).expect("default scene renders");

    // Warm-up pass keeps one-time allocator effects out of the numbers.
    for _ in 0..3 {
        let (res, _) = detect_frame_timed(&img, cfg);
        res.expect("representative frame detects");
    }

    let mut per_stage: Vec<Vec<f64>> = vec![Vec::with_capacity(iterations); STAGE_NAMES.len()];
    let mut total: Vec<f64> = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let (res, timings) = detect_frame_timed(&img, cfg);
        res.expect("representative frame detects");
        for (i, d) in timings.stages.iter().enumerate() {
            per_stage[i].push(ms(*d));
        }
        total.push(ms(timings.total));
    }

    let stages = STAGE_NAMES
        .iter()
        .zip(per_stage.iter_mut())
        .map(|(name, samples)| stats(name, samples))
        .collect();
    BenchReport {
        iterations,
        stages,
        end_to_end: stats("end-to-end", &mut total),
        budget_ms: BUDGET_MS,
    }
}
