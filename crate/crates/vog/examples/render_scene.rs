//! Render synthetic eye frames at several eyelid apertures and save them
//! as PGM files together with their exact ground truth.
//!
//! ```text
//! cargo run --release --example render_scene
//! ```

use vog::image::save_pgm;
use vog::synth::{render, EyeScene};

fn main() {
    let out_dir = std::env::temp_dir().join("vog-render-scene");
    std::fs::create_dir_all(&out_dir).expect("create output dir");

    for (name, aperture, sigma) in [
        ("open", 230.0, 0.0),
        ("open_noisy", 230.0, 8.0),
        ("droopy", 95.0, 0.0),
        ("slit", 20.0, 0.0),
        ("closed", 0.0, 0.0),
    ] {
        let mut scene = EyeScene::default().with_aperture(aperture);
        scene.noise_sigma = sigma;
        scene.seed = 7;
        let (img, truth) = render(&scene).expect("valid scene");
        let path = out_dir.join(format!("{name}.pgm"));
        std::fs::write(&path, save_pgm(&img)).expect("write frame");
        println!(
            "{:<12} -> {}  pupil=({:.0},{:.0}) r={:.0}  corner=({:.0},{:.0})  visible iris {:.0}%",
            name,
            path.display(),
            truth.pupil_center.0,
            truth.pupil_center.1,
            truth.iris_radius,
            truth.corner.0,
            truth.corner.1,
            truth.visible_iris_fraction * 100.0
        );
    }
}
