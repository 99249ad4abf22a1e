//! Video-oculography engine: single-camera grayscale eye images in,
//! pupil-center circles, eye-corner reference points and gaze velocities out.
//!
//! The per-frame pipeline runs in two passes. A low-resolution pass finds
//! the eye: the 640x480 frame is block-averaged to 80x60, thresholded with
//! the isodata rule, segmented into dark regions, and the eye (the larger
//! dark region below the eyebrow) is localized to an iris column by a
//! sliding-window scan. A full-resolution pass then samples the iris-sclera
//! border along zigzag paths, fits a circle to the samples twice (dropping
//! far-from-center noise between the fits), and finds the eye corner beside
//! the pupil from the column-wise intensity variance profile and a
//! Sobel-detected eyelid curve. Gaze velocity is the time derivative of the
//! pupil-minus-corner offset, which cancels head translation.
//!
//! A deterministic synthetic-eye renderer with exact ground truth stands in
//! for camera and subject; see [`synth`] and the `examples/` directory.

pub mod bench;
pub mod cli;
pub mod config;
pub mod corner;
pub mod eval;
pub mod fit;
pub mod gaze;
pub mod image;
pub mod pipeline;
pub mod region;
pub mod synth;
pub mod trace;
pub mod zigzag;

pub use crate::config::RunConfig;
pub use crate::fit::{algebraic_fit, double_fit, geometric_rss, Circle, FitReport};
pub use crate::image::{downscale, isodata_threshold, load_pgm, save_pgm, segment, GrayImage, Rect};
pub use crate::pipeline::{detect_frame, Detection};
