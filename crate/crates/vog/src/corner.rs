//! Eye-corner detection beside the fitted pupil.
//!
//! A search rectangle is placed outward of the pupil center, sized from the
//! iris radius. Column-wise intensity variance over the rectangle's rows
//! (the vertical variance projection) peaks where eyelid-junction contrast
//! gives way to flat skin; the column with the steepest variance change is
//! the corner's x. A 3x3 Sobel pass over the same rectangle traces the
//! eyelid as the strongest-gradient row per column, and the corner's y is
//! that curve evaluated at the corner column.

use crate::fit::Circle;
use crate::image::{GrayImage, Rect};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CornerError {
    #[error("corner area out of frame: {0} usable column(s)")]
    AreaOutOfFrame(u32),
    #[error("no corner contrast: variance profile is flat")]
    NoContrast,
}

/// Which corner to look for. Horizontal geometry only depends on the
/// left/right direction; temporal-vs-nasal names which anatomical corner
/// that direction reaches for the imaged eye.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerSide {
    TemporalRight,
    TemporalLeft,
    NasalRight,
    NasalLeft,
}

impl CornerSide {
    /// +1 when the search area sits right of the pupil, -1 when left.
    pub fn direction(&self) -> i64 {
        match self {
            CornerSide::TemporalRight | CornerSide::NasalRight => 1,
            CornerSide::TemporalLeft | CornerSide::NasalLeft => -1,
        }
    }
}

impl std::str::FromStr for CornerSide {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "temporal" | "temporal-right" => Ok(CornerSide::TemporalRight),
            "temporal-left" => Ok(CornerSide::TemporalLeft),
            "nasal" | "nasal-left" => Ok(CornerSide::NasalLeft),
            "nasal-right" => Ok(CornerSide::NasalRight),
            other => Err(format!(
                "unknown corner side {other:?} (temporal[-left|-right] or nasal[-left|-right])"
            )),
        }
    }
}

/// Rectangle the corner is searched in.
#[derive(Debug, Clone)]
pub struct CornerSearchArea {
    pub bbox: Rect,
    pub side: CornerSide,
}

/// Column-wise variance profile over the area rows.
#[derive(Debug, Clone)]
pub struct VpfProfile {
    /// First column the profile covers.
    pub x0: u32,
    /// Row interval \[y0, y1) the statistics run over.
    pub y0: u32,
    pub y1: u32,
    /// Variance per column.
    pub values: Vec<f64>,
    /// Mean intensity per column.
    pub means: Vec<f64>,
    pub side: CornerSide,
}

/// Eyelid trace: strongest-gradient row per column, median-filtered.
#[derive(Debug, Clone)]
pub struct EyelidCurve {
    pub x0: u32,
    pub rows: Vec<u32>,
    /// Squared Sobel gradient magnitude at each chosen row; zero flags a
    /// column with no gradient at all.
    pub strength: Vec<u64>,
}

impl EyelidCurve {
    fn index_of(&self, x: u32) -> Option<usize> {
        if x < self.x0 {
            return None;
        }
        let i = (x - self.x0) as usize;
        (i < self.rows.len()).then_some(i)
    }

    pub fn row_at(&self, x: u32) -> Option<u32> {
        self.index_of(x).map(|i| self.rows[i])
    }

    pub fn strength_at(&self, x: u32) -> Option<u64> {
        self.index_of(x).map(|i| self.strength[i])
    }
}

/// Detected corner point.
#[derive(Debug, Clone, Copy)]
pub struct CornerPoint {
    pub x: u32,
    pub y: u32,
    /// Magnitude of the variance-profile derivative at the corner column.
    pub vpf_peak_strength: f64,
}

/// Search rectangle outward of the pupil: columns 1.5R..3.5R from the
/// center on the chosen side, rows center_y +/- R, clamped to `bounds`.
pub fn corner_search_area(
    pupil: &Circle,
    bounds: &Rect,
    side: CornerSide,
) -> Result<CornerSearchArea, CornerError> {
    let r = pupil.radius;
    let dir = side.direction() as f64;
    let xa = pupil.cx + dir * 1.5 * r;
    let xb = pupil.cx + dir * 3.5 * r;
    let (x0, x1) = if dir > 0.0 { (xa, xb) } else { (xb, xa) };
    let y0 = pupil.cy - r;
    let y1 = pupil.cy + r;

    let clamp_u32 = |v: f64, lo: u32, hi: u32| (v.round().max(0.0) as u32).clamp(lo, hi);
    let bbox = Rect::new(
        clamp_u32(x0, bounds.x0, bounds.x1),
        clamp_u32(y0, bounds.y0, bounds.y1),
        clamp_u32(x1, bounds.x0, bounds.x1),
        clamp_u32(y1, bounds.y0, bounds.y1),
    );
    if bbox.width() < 4 {
        return Err(CornerError::AreaOutOfFrame(bbox.width()));
    }
    Ok(CornerSearchArea { bbox, side })
}

/// Vertical variance projection: per column x in the area,
/// `mean(x)` and `variance(x)` of the intensities over the area rows,
/// both normalized by the row count.
pub fn vpf_vertical(img: &GrayImage, area: &CornerSearchArea) -> VpfProfile {
    let b = area.bbox;
    assert!(b.height() >= 2, "vpf needs at least two rows");
    let n = b.height() as f64;
    let mut values = Vec::with_capacity(b.width() as usize);
    let mut means = Vec::with_capacity(b.width() as usize);
    for x in b.x0..b.x1 {
        let mut sum = 0.0f64;
        for y in b.y0..b.y1 {
            sum += img.get(x, y) as f64;
        }
        let mean = sum / n;
        let mut var = 0.0f64;
        for y in b.y0..b.y1 {
            let d = img.get(x, y) as f64 - mean;
            var += d * d;
        }
        values.push(var / n);
        means.push(mean);
    }
    VpfProfile {
        x0: b.x0,
        y0: b.y0,
        y1: b.y1,
        values,
        means,
        side: area.side,
    }
}

/// Central-difference derivative of the variance profile; one-sided at the
/// boundary columns.
pub fn vpf_derivative(profile: &VpfProfile) -> Vec<f64> {
    let v = &profile.values;
    let n = v.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    d[0] = v[1] - v[0];
    d[n - 1] = v[n - 1] - v[n - 2];
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / 2.0;
    }
    d
}

/// Column with the sharpest variance transition (max |derivative|), ties
/// broken toward the pupil side of the area.
pub fn corner_column(profile: &VpfProfile) -> Result<(u32, f64), CornerError> {
    assert!(profile.values.len() >= 4, "profile needs >= 4 columns");
    let d = vpf_derivative(profile);
    // Pupil sits left of a right-side area and right of a left-side area.
    let prefer_low_index = profile.side.direction() > 0;
    let mut best_i = 0usize;
    let mut best = -1.0f64;
    for (i, &di) in d.iter().enumerate() {
        let mag = di.abs();
        let wins = if prefer_low_index {
            mag > best
        } else {
            mag >= best
        };
        if wins {
            best = mag;
            best_i = i;
        }
    }
    if best <= 0.0 {
        return Err(CornerError::NoContrast);
    }
    Ok((profile.x0 + best_i as u32, best))
}

const SOBEL_X: [[i32; 3]; 3] = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]];
const SOBEL_Y: [[i32; 3]; 3] = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]];

/// Strongest-gradient row per area column (3x3 Sobel, squared magnitude),
/// median-filtered over a 3-column window to knock out isolated spikes.
pub fn sobel_eyelid(img: &GrayImage, area: &CornerSearchArea) -> EyelidCurve {
    let b = area.bbox;
    assert!(b.width() >= 3 && b.height() >= 3, "sobel area too small");
    let y_lo = b.y0.max(1);
    let y_hi = b.y1.min(img.height() - 1);
    let mut rows = Vec::with_capacity(b.width() as usize);
    let mut strength = Vec::with_capacity(b.width() as usize);
    for x in b.x0..b.x1 {
        let mut best_y = y_lo;
        let mut best_mag = 0u64;
        if x >= 1 && x + 1 < img.width() {
            for y in y_lo..y_hi {
                let mut gx = 0i32;
                let mut gy = 0i32;
                for ky in 0..3u32 {
                    for kx in 0..3u32 {
                        let p = img.get(x + kx - 1, y + ky - 1) as i32;
                        gx += SOBEL_X[ky as usize][kx as usize] * p;
                        gy += SOBEL_Y[ky as usize][kx as usize] * p;
                    }
                }
                let mag = (gx as i64 * gx as i64 + gy as i64 * gy as i64) as u64;
                if mag > best_mag {
                    best_mag = mag;
                    best_y = y;
                }
            }
        }
        rows.push(best_y);
        strength.push(best_mag);
    }
    // 3-column median on the row trace.
    let filtered: Vec<u32> = (0..rows.len())
        .map(|i| {
            if i == 0 || i + 1 == rows.len() {
                rows[i]
            } else {
                let mut w = [rows[i - 1], rows[i], rows[i + 1]];
                w.sort_unstable();
                w[1]
            }
        })
        .collect();
    EyelidCurve {
        x0: b.x0,
        rows: filtered,
        strength,
    }
}

/// Full corner detection: VPF column intersected with the Sobel eyelid row.
pub fn detect_corner(
    img: &GrayImage,
    pupil: &Circle,
    bounds: &Rect,
    side: CornerSide,
) -> Result<CornerPoint, CornerError> {
    let area = corner_search_area(pupil, bounds, side)?;
    let profile = vpf_vertical(img, &area);
    let (x, strength) = corner_column(&profile)?;
    let eyelid = sobel_eyelid(img, &area);
    let y = eyelid
        .row_at(x)
        .expect("corner column lies inside the area");
    Ok(CornerPoint {
        x,
        y,
        vpf_peak_strength: strength,
    })
}
