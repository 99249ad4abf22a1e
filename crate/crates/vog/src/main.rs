//! Thin command-line front end over the library; see `vog::cli`.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use vog::cli::{cmd_bench, cmd_detect, cmd_eval, cmd_synth, cmd_track};
use vog::config::{RunConfig, CONFIG_ENV_VAR};

#[derive(Parser)]
#[command(name = "vog", about = "Video-oculography: pupil, eye corner and gaze velocity", version)]
struct Cli {
    /// Config file (key=value lines); defaults to $VOG_CONFIG when set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override: low-res downscale factor.
    #[arg(long, global = true)]
    downscale_factor: Option<u32>,
    /// Override: iris window width as a fraction of eye width.
    #[arg(long, global = true)]
    window_width_ratio: Option<f64>,
    /// Override: outlier cut in residual standard deviations.
    #[arg(long, global = true)]
    outlier_k: Option<f64>,
    /// Override: minimum border samples.
    #[arg(long, global = true)]
    min_samples: Option<usize>,
    /// Override: corner side (temporal[-left|-right] | nasal[-left|-right]).
    #[arg(long, global = true)]
    corner_side: Option<String>,
    /// Override: degrees per pixel (both axes).
    #[arg(long, global = true)]
    deg_per_px: Option<f64>,
    /// Override: frames per second for timestamps.
    #[arg(long, global = true)]
    fps: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect pupil and corner on a single PGM frame.
    Detect { image: PathBuf },
    /// Track a directory of numbered PGM frames into a trace CSV.
    Track {
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic protocol (fixation | pursuit | range | static).
    Synth {
        protocol: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        noise_sigma: f64,
    },
    /// Run synthetic evaluation suites (fixation | pursuit | range | occlusion | all).
    Eval {
        protocol: String,
        #[arg(long, default_value_t = 12345)]
        seed: u64,
    },
    /// Measure pipeline latency against the 300 Hz budget.
    Bench {
        #[arg(long, default_value_t = 300)]
        iters: usize,
    },
}

/// Defaults, then config file (flag or environment), then flag overrides.
fn build_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    let file = cli
        .config
        .clone()
        .or_else(|| std::env::var(CONFIG_ENV_VAR).ok().map(PathBuf::from));
    if let Some(path) = file {
        cfg.load_file(&path).map_err(|e| e.to_string())?;
    }
    if let Some(v) = cli.downscale_factor {
        cfg.downscale_factor = v;
    }
    if let Some(v) = cli.window_width_ratio {
        cfg.window_width_ratio = v;
    }
    if let Some(v) = cli.outlier_k {
        cfg.outlier_k = v;
    }
    if let Some(v) = cli.min_samples {
        cfg.min_samples = v;
    }
    if let Some(v) = &cli.corner_side {
        cfg.corner_side = v.parse()?;
    }
    if let Some(v) = cli.deg_per_px {
        cfg.deg_per_px_x = v;
        cfg.deg_per_px_y = v;
    }
    if let Some(v) = cli.fps {
        cfg.fps = v;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit 2 on usage errors; the contract wants 1.
            let _ = e.print();
            return if e.exit_code() == 0 { 0 } else { 1 };
        }
    };
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("vog: {msg}");
            return 1;
        }
    };
    let result = match &cli.command {
        Command::Detect { image } => cmd_detect(image, &cfg),
        Command::Track { dir, out } => cmd_track(dir, out, &cfg),
        Command::Synth {
            protocol,
            out,
            seed,
            noise_sigma,
        } => cmd_synth(protocol, out, *seed, *noise_sigma, cfg.fps),
        Command::Eval { protocol, seed } => cmd_eval(protocol, &cfg, *seed),
        Command::Bench { iters } => cmd_bench(&cfg, *iters),
    };
    match result {
        Ok(output) => {
            print!("{output}");
            0
        }
        Err(e) => {
            eprintln!("vog: {e}");
            e.exit_code()
        }
    }
}

fn main() {
    std::process::exit(run());
}
