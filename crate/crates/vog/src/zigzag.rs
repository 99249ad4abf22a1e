//! Iris-sclera border sampling along zigzag paths.
//!
//! From the iris window's center column a vertical scan finds, per border,
//! the outermost foreground pixel with a background neighbor toward the
//! sclera. The scan then walks outward one column at a time, widening the
//! allowed scan slab by one pixel per column and centering it on the
//! previous hit, so the path zigzags along the border instead of rastering
//! the whole window. Interior noise (glare holes) is never visited and a
//! border chain simply ends where the border outruns the slab or the scan
//! area's edge is reached.

use crate::image::{GrayImage, Rect};
use crate::region::{EyeRegionEstimate, IrisColumnEstimate};
use thiserror::Error;

/// Slab height at the start column; offset k scans a slab of height
/// `INITIAL_SLAB_HEIGHT + k`.
pub const INITIAL_SLAB_HEIGHT: u32 = 3;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("insufficient samples: found {found}, need {needed}")]
    InsufficientSamples { found: usize, needed: usize },
}

/// Which border a sample sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Border {
    Upper,
    Lower,
}

/// One border sample, full-resolution pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplePoint {
    pub x: u32,
    pub y: u32,
    pub side: Border,
}

/// Border samples plus bookkeeping about the scan itself.
#[derive(Debug, Clone)]
pub struct SamplePointSet {
    pub points: Vec<SamplePoint>,
    /// Pixels examined by the zigzag, for cost accounting.
    pub scan_cost: usize,
    /// The area the scan was allowed to touch.
    pub scan_rect: Rect,
}

impl SamplePointSet {
    pub fn coords(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.x as f64, p.y as f64))
            .collect()
    }

    /// Vertical span of the samples, 0 for fewer than two points.
    pub fn vertical_extent(&self) -> u32 {
        let min = self.points.iter().map(|p| p.y).min();
        let max = self.points.iter().map(|p| p.y).max();
        match (min, max) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }
}

/// Slab row interval for horizontal offset `k`, centered on the previous
/// hit: height `INITIAL_SLAB_HEIGHT + k` before clamping to `rows`.
fn slab_rows(prev_y: u32, k: u32, rows: (u32, u32)) -> (u32, u32) {
    let h = INITIAL_SLAB_HEIGHT + k;
    let top = prev_y.saturating_sub((h - 1) / 2).max(rows.0);
    let bottom = (prev_y + h / 2 + 1).min(rows.1);
    (top, bottom)
}

struct Scan<'a> {
    img: &'a GrayImage,
    threshold: f64,
    rect: Rect,
    cost: usize,
}

impl<'a> Scan<'a> {
    #[inline]
    fn fg(&mut self, x: u32, y: u32) -> bool {
        self.cost += 1;
        (self.img.get(x, y) as f64) <= self.threshold
    }

    /// Border predicate: foreground whose neighbor toward the sclera
    /// (above for the upper border, below for the lower) is background.
    fn is_border(&mut self, x: u32, y: u32, side: Border) -> bool {
        if !self.fg(x, y) {
            return false;
        }
        match side {
            Border::Upper => y > 0 && !self.fg(x, y - 1),
            Border::Lower => y + 1 < self.img.height() && !self.fg(x, y + 1),
        }
    }

    /// Outermost border pixel in `x` within `rows`: top-down for the upper
    /// border, bottom-up for the lower.
    fn seed(&mut self, x: u32, rows: (u32, u32), side: Border) -> Option<u32> {
        match side {
            Border::Upper => (rows.0..rows.1).find(|&y| self.is_border(x, y, side)),
            Border::Lower => (rows.0..rows.1).rev().find(|&y| self.is_border(x, y, side)),
        }
    }

    /// First border pixel inside the slab, scanned top to bottom.
    fn slab_hit(&mut self, x: u32, prev_y: u32, k: u32, side: Border) -> Option<u32> {
        let (top, bottom) = slab_rows(prev_y, k, (self.rect.y0, self.rect.y1));
        (top..bottom).find(|&y| self.is_border(x, y, side))
    }
}

/// Sample the iris-sclera border at full resolution.
///
/// `eye` and `window` are the rescaled outputs of the low-resolution pass.
/// The scan area is the refined eye bbox expanded by `edge_slack` pixels on
/// every side (the low-res segmentation quantizes region extents to
/// downscale blocks; one block of slack recovers border pixels diluted out
/// of the boundary blocks), clamped to the image.
pub fn zigzag_sample(
    img: &GrayImage,
    eye: &EyeRegionEstimate,
    window: &IrisColumnEstimate,
    threshold: f64,
    min_samples: usize,
    edge_slack: u32,
) -> Result<SamplePointSet, SampleError> {
    let rect = eye.bbox_fullres.expand(edge_slack, &img.bounds());
    let start_col = (window.window_x + window.window_width / 2).clamp(rect.x0, rect.x1 - 1);

    let mut scan = Scan {
        img,
        threshold,
        rect,
        cost: 0,
    };
    let mut points = Vec::new();

    for side in [Border::Upper, Border::Lower] {
        let Some(seed_y) = scan.seed(start_col, (rect.y0, rect.y1), side) else {
            continue;
        };
        points.push(SamplePoint {
            x: start_col,
            y: seed_y,
            side,
        });
        for step in [-1i64, 1i64] {
            let mut prev_y = seed_y;
            let mut k = 1u32;
            loop {
                let x = start_col as i64 + step * k as i64;
                if x < rect.x0 as i64 || x >= rect.x1 as i64 {
                    break;
                }
                match scan.slab_hit(x as u32, prev_y, k, side) {
                    Some(y) => {
                        points.push(SamplePoint { x: x as u32, y, side });
                        prev_y = y;
                        k += 1;
                    }
                    None => break,
                }
            }
        }
    }

    if points.len() < min_samples {
        return Err(SampleError::InsufficientSamples {
            found: points.len(),
            needed: min_samples,
        });
    }
    Ok(SamplePointSet {
        points,
        scan_cost: scan.cost,
        scan_rect: rect,
    })
}
