//! Eye/eyebrow region extraction and iris column localization on the
//! low-resolution frame.
//!
//! The segmented 80x60 image yields the two largest dark regions; the lower
//! one is the eye. A window of the eye region's height and 0.15x its width
//! slides across the eye to find the iris column (the window with the most
//! foreground pixels), the region is then re-centered on that window and the
//! threshold recomputed, and finally everything is rescaled to full
//! resolution.

use crate::image::{isodata_threshold, GrayImage, ImageError, Rect, RegionStats};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error("eye area not found: {0}")]
    EyeAreaNotFound(String),
    #[error("iris not found: no foreground pixels in any window position")]
    IrisNotFound,
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Eye area estimate in both resolutions, with the working threshold.
#[derive(Debug, Clone)]
pub struct EyeRegionEstimate {
    pub bbox_lowres: Rect,
    pub bbox_fullres: Rect,
    pub threshold: f64,
    pub eyebrow_bbox: Rect,
}

/// Best iris window from the horizontal scan. The window's vertical extent
/// is the eye region's rows; coordinates are low-res until
/// [`rescale_to_full`] multiplies them up.
#[derive(Debug, Clone)]
pub struct IrisColumnEstimate {
    pub window_x: u32,
    pub window_width: u32,
    pub window_height: u32,
    /// Foreground-pixel count inside the winning window.
    pub score: u64,
}

impl IrisColumnEstimate {
    pub fn center_x(&self) -> f64 {
        self.window_x as f64 + self.window_width as f64 / 2.0
    }
}

/// Pick eyebrow and eye from the segmentation: the two largest regions,
/// with the lower one (greater bbox center y) as the eye.
pub fn extract_eye_region(
    regions: &[RegionStats],
    threshold: f64,
    factor: u32,
    full_bounds: &Rect,
) -> Result<EyeRegionEstimate, RegionError> {
    if regions.len() < 2 {
        return Err(RegionError::EyeAreaNotFound(format!(
            "{} dark region(s) segmented, need eyebrow and eye",
            regions.len()
        )));
    }
    let a = &regions[0];
    let b = &regions[1];
    let (eye, eyebrow) = if a.bbox.center().1 > b.bbox.center().1 {
        (a, b)
    } else {
        (b, a)
    };
    let bbox_fullres = eye.bbox.scale(factor).intersect(full_bounds);
    Ok(EyeRegionEstimate {
        bbox_lowres: eye.bbox,
        bbox_fullres,
        threshold,
        eyebrow_bbox: eyebrow.bbox,
    })
}

/// Slide a window (eye height x `width_ratio` eye width, 0.15 by default)
/// across the eye region one column at a time; the position with the most
/// foreground pixels wins, ties going to the leftmost.
pub fn locate_iris(
    img_lowres: &GrayImage,
    eye: &EyeRegionEstimate,
    threshold: f64,
    width_ratio: f64,
) -> Result<IrisColumnEstimate, RegionError> {
    let bbox = eye.bbox_lowres;
    if bbox.is_empty() {
        return Err(RegionError::EyeAreaNotFound("empty eye bbox".to_string()));
    }
    let width = ((width_ratio * bbox.width() as f64).round() as u32)
        .clamp(1, bbox.width());
    let height = bbox.height();

    // Per-column foreground counts over the eye rows, then a sliding sum.
    let counts: Vec<u64> = (bbox.x0..bbox.x1)
        .map(|x| {
            (bbox.y0..bbox.y1)
                .filter(|&y| (img_lowres.get(x, y) as f64) <= threshold)
                .count() as u64
        })
        .collect();

    let mut best_x = bbox.x0;
    let mut best_score = 0u64;
    let mut window_sum: u64 = counts[..width as usize].iter().sum();
    best_score = best_score.max(window_sum);
    for start in 1..=(counts.len() - width as usize) {
        window_sum = window_sum - counts[start - 1] + counts[start + width as usize - 1];
        if window_sum > best_score {
            best_score = window_sum;
            best_x = bbox.x0 + start as u32;
        }
    }
    if best_score == 0 {
        return Err(RegionError::IrisNotFound);
    }
    Ok(IrisColumnEstimate {
        window_x: best_x,
        window_width: width,
        window_height: height,
        score: best_score,
    })
}

/// Re-center the eye bbox horizontally on the iris window, shrink it to
/// three window widths (never larger than the original bbox), and
/// recompute the threshold over the refined bbox.
pub fn refine(
    img_lowres: &GrayImage,
    eye: &EyeRegionEstimate,
    iris: &IrisColumnEstimate,
) -> Result<EyeRegionEstimate, RegionError> {
    let bbox = eye.bbox_lowres;
    let center = iris.center_x();
    let half = 1.5 * iris.window_width as f64;
    let x0 = ((center - half).round().max(bbox.x0 as f64)) as u32;
    let x1 = ((center + half).round().min(bbox.x1 as f64)) as u32;
    let refined = Rect::new(x0, bbox.y0, x1.max(x0 + 1), bbox.y1);
    let threshold = isodata_threshold(img_lowres, Some(&refined))?;
    Ok(EyeRegionEstimate {
        bbox_lowres: refined,
        bbox_fullres: eye.bbox_fullres,
        threshold,
        eyebrow_bbox: eye.eyebrow_bbox,
    })
}

/// Multiply every coordinate, width and height by the downscale factor;
/// the threshold carries over unchanged.
pub fn rescale_to_full(
    eye: &EyeRegionEstimate,
    iris: &IrisColumnEstimate,
    factor: u32,
    full_bounds: &Rect,
) -> (EyeRegionEstimate, IrisColumnEstimate) {
    let bbox_fullres = eye.bbox_lowres.scale(factor).intersect(full_bounds);
    (
        EyeRegionEstimate {
            bbox_lowres: eye.bbox_lowres,
            bbox_fullres,
            threshold: eye.threshold,
            eyebrow_bbox: eye.eyebrow_bbox,
        },
        IrisColumnEstimate {
            window_x: iris.window_x * factor,
            window_width: iris.window_width * factor,
            window_height: iris.window_height * factor,
            score: iris.score,
        },
    )
}
