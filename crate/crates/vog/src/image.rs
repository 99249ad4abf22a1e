//! Grayscale image substrate: PGM I/O, block-mean downscaling, isodata
//! thresholding and connected-component segmentation.
//!
//! Everything in this module is a pure function of its inputs; images are
//! plain row-major `u8` buffers and safe to share across threads.

use thiserror::Error;

/// Errors raised while decoding or encoding binary PGM data.
#[derive(Debug, Error)]
pub enum PgmError {
    #[error("pgm format error at byte {offset}: {reason}")]
    Format { offset: usize, reason: String },
    #[error("pgm data truncated at byte {offset}: expected {expected} pixel bytes, found {found}")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },
}

/// Errors raised by raster geometry operations.
#[derive(Debug, Error)]
pub enum ImageError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("empty or out-of-bounds roi {0:?}")]
    BadRoi(Rect),
}

/// Axis-aligned pixel rectangle, half-open: `x0 <= x < x1`, `y0 <= y < y1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl Rect {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> u32 {
        self.x1.saturating_sub(self.x0)
    }

    pub fn height(&self) -> u32 {
        self.y1.saturating_sub(self.y0)
    }

    pub fn is_empty(&self) -> bool {
        self.x1 <= self.x0 || self.y1 <= self.y0
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x0 as f64 + self.x1 as f64) / 2.0,
            (self.y0 as f64 + self.y1 as f64) / 2.0,
        )
    }

    /// Intersection with `other`; may be empty.
    pub fn intersect(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1).max(self.x0.max(other.x0)),
            y1: self.y1.min(other.y1).max(self.y0.max(other.y0)),
        }
    }

    /// Grow by `margin` on every side, clamped to `bounds`.
    pub fn expand(&self, margin: u32, bounds: &Rect) -> Rect {
        Rect {
            x0: self.x0.saturating_sub(margin).max(bounds.x0),
            y0: self.y0.saturating_sub(margin).max(bounds.y0),
            x1: (self.x1 + margin).min(bounds.x1),
            y1: (self.y1 + margin).min(bounds.y1),
        }
    }

    /// Scale every coordinate by `factor` (half-open boxes scale cleanly).
    pub fn scale(&self, factor: u32) -> Rect {
        Rect {
            x0: self.x0 * factor,
            y0: self.y0 * factor,
            x1: self.x1 * factor,
            y1: self.y1 * factor,
        }
    }
}

/// 8-bit single-channel raster, row-major, intensities 0-255.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    /// Wrap a row-major buffer; `data.len()` must equal `width * height`.
    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImageError> {
        if data.len() != (width as usize) * (height as usize) {
            return Err(ImageError::Dimension(format!(
                "buffer length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn new_filled(width: u32, height: u32, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; (width as usize) * (height as usize)],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        debug_assert!(x < self.width && y < self.height);
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn row(&self, y: u32) -> &[u8] {
        let w = self.width as usize;
        &self.data[y as usize * w..(y as usize + 1) * w]
    }

    /// Mean intensity over `roi` (whole image if `None`).
    pub fn mean(&self, roi: Option<&Rect>) -> f64 {
        let r = self.checked_roi(roi).expect("roi within bounds");
        let mut sum = 0u64;
        for y in r.y0..r.y1 {
            for &p in &self.row(y)[r.x0 as usize..r.x1 as usize] {
                sum += p as u64;
            }
        }
        sum as f64 / (r.width() as u64 * r.height() as u64) as f64
    }

    fn checked_roi(&self, roi: Option<&Rect>) -> Result<Rect, ImageError> {
        let r = roi.copied().unwrap_or_else(|| self.bounds());
        if r.is_empty() || r.x1 > self.width || r.y1 > self.height {
            return Err(ImageError::BadRoi(r));
        }
        Ok(r)
    }
}

// ---------------------------------------------------------------------------
// PGM (P5) decode / encode
// ---------------------------------------------------------------------------

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn read_number(&mut self, what: &str) -> Result<u32, PgmError> {
        self.skip_separators();
        let start = self.pos;
        let mut value: u64 = 0;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            value = value * 10 + (self.bytes[self.pos] - b'0') as u64;
            if value > u32::MAX as u64 {
                return Err(PgmError::Format {
                    offset: start,
                    reason: format!("{what} out of range"),
                });
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(PgmError::Format {
                offset: self.pos,
                reason: format!("expected {what}"),
            });
        }
        Ok(value as u32)
    }
}

/// Decode a binary PGM ("P5", maxval <= 255) into a [`GrayImage`].
///
/// Header comments (`#` to end of line) are permitted between tokens.
/// Errors carry the byte offset where parsing stopped.
pub fn load_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    if bytes.len() < 2 || &bytes[0..2] != b"P5" {
        return Err(PgmError::Format {
            offset: 0,
            reason: "expected magic \"P5\"".to_string(),
        });
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.read_number("width")?;
    let height = cur.read_number("height")?;
    let maxval_pos = {
        cur.skip_separators();
        cur.pos
    };
    let maxval = cur.read_number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(PgmError::Format {
            offset: maxval_pos,
            reason: format!("maxval {maxval} unsupported (need 1..=255)"),
        });
    }
    // Exactly one whitespace byte separates the header from the raster.
    if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
        return Err(PgmError::Format {
            offset: cur.pos,
            reason: "expected single whitespace before pixel data".to_string(),
        });
    }
    let data_start = cur.pos + 1;
    let expected = width as usize * height as usize;
    let found = bytes.len() - data_start;
    if found < expected {
        return Err(PgmError::Truncated {
            offset: bytes.len(),
            expected,
            found,
        });
    }
    let data = bytes[data_start..data_start + expected].to_vec();
    Ok(GrayImage {
        width,
        height,
        data,
    })
}

/// Encode as canonical binary PGM: `P5\n{w} {h}\n255\n` followed by the raster.
pub fn save_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

// ---------------------------------------------------------------------------
// Downscale
// ---------------------------------------------------------------------------

/// Block-mean downscale by an integer `factor`; each output pixel is the
/// round-half-up mean of its `factor x factor` source block.
pub fn downscale(img: &GrayImage, factor: u32) -> Result<GrayImage, ImageError> {
    if factor == 0 {
        return Err(ImageError::Dimension("factor must be >= 1".to_string()));
    }
    if img.width % factor != 0 || img.height % factor != 0 {
        return Err(ImageError::Dimension(format!(
            "factor {} does not divide {}x{}",
            factor, img.width, img.height
        )));
    }
    let ow = img.width / factor;
    let oh = img.height / factor;
    let block = (factor * factor) as u32;
    let mut data = Vec::with_capacity(ow as usize * oh as usize);
    for by in 0..oh {
        for bx in 0..ow {
            let mut sum = 0u32;
            for y in by * factor..(by + 1) * factor {
                let row = img.row(y);
                for x in bx * factor..(bx + 1) * factor {
                    sum += row[x as usize] as u32;
                }
            }
            data.push(((sum + block / 2) / block) as u8);
        }
    }
    Ok(GrayImage {
        width: ow,
        height: oh,
        data,
    })
}

// ---------------------------------------------------------------------------
// Isodata thresholding
// ---------------------------------------------------------------------------

const ISODATA_MAX_ITERS: usize = 64;

/// Iterative intensity threshold, Ridler-Calvard style: starting from the
/// global mean, repeat `T <- (mean(pixels <= T) + mean(pixels > T)) / 2`
/// until the induced class split stops changing (so the change in `T` is 0,
/// well under the 0.5 stopping bound) or 64 iterations elapse.
///
/// If either class goes empty at any iterate, the roi mean is returned.
pub fn isodata_threshold(img: &GrayImage, roi: Option<&Rect>) -> Result<f64, ImageError> {
    let r = img.checked_roi(roi)?;
    let mut hist = [0u64; 256];
    for y in r.y0..r.y1 {
        for &p in &img.row(y)[r.x0 as usize..r.x1 as usize] {
            hist[p as usize] += 1;
        }
    }
    Ok(isodata_from_histogram(&hist))
}

/// Isodata fixed point computed from an intensity histogram.
pub fn isodata_from_histogram(hist: &[u64; 256]) -> f64 {
    let total: u64 = hist.iter().sum();
    let weighted: u64 = hist.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
    let global_mean = weighted as f64 / total as f64;

    let mut t = global_mean;
    for _ in 0..ISODATA_MAX_ITERS {
        let split = t.floor().clamp(0.0, 255.0) as usize;
        let (mut lo_n, mut lo_sum) = (0u64, 0u64);
        for (v, &c) in hist.iter().enumerate().take(split + 1) {
            lo_n += c;
            lo_sum += v as u64 * c;
        }
        let hi_n = total - lo_n;
        let hi_sum = weighted - lo_sum;
        if lo_n == 0 || hi_n == 0 {
            return global_mean;
        }
        let next = (lo_sum as f64 / lo_n as f64 + hi_sum as f64 / hi_n as f64) / 2.0;
        if next.floor().clamp(0.0, 255.0) as usize == split {
            return next;
        }
        t = next;
    }
    t
}

// ---------------------------------------------------------------------------
// Segmentation (dark foreground, 8-connectivity)
// ---------------------------------------------------------------------------

/// Row-major map of region ids: 0 = background, 1..=K = regions, where the
/// ids follow the canonical [`RegionStats`] ordering (size desc, bbox ties).
#[derive(Debug, Clone)]
pub struct LabelMap {
    pub width: u32,
    pub height: u32,
    pub labels: Vec<u32>,
}

impl LabelMap {
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u32 {
        self.labels[y as usize * self.width as usize + x as usize]
    }
}

/// Summary of one labeled region.
#[derive(Debug, Clone)]
pub struct RegionStats {
    pub label: u32,
    pub pixel_count: u64,
    pub bbox: Rect,
    /// Mean pixel position.
    pub centroid: (f64, f64),
}

/// Label 8-connected components of the dark foreground (intensity <= `threshold`).
///
/// Returns the label map plus per-region stats sorted by pixel count
/// descending, ties broken by bbox position (y0, then x0).
pub fn segment(img: &GrayImage, threshold: f64) -> (LabelMap, Vec<RegionStats>) {
    let w = img.width as usize;
    let h = img.height as usize;
    let fg: Vec<bool> = img.data.iter().map(|&p| (p as f64) <= threshold).collect();

    // Union-find over provisional labels, two-pass.
    let mut provisional = vec![0u32; w * h];
    let mut parent: Vec<u32> = vec![0]; // parent[0] unused (background)

    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }

    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            if !fg[idx] {
                continue;
            }
            // Principled scan: neighbors already visited under row-major order.
            let mut best = 0u32;
            let mut neighbors = [0u32; 4];
            let mut n_cnt = 0;
            if x > 0 && provisional[idx - 1] != 0 {
                neighbors[n_cnt] = provisional[idx - 1];
                n_cnt += 1;
            }
            if y > 0 {
                let up = idx - w;
                if provisional[up] != 0 {
                    neighbors[n_cnt] = provisional[up];
                    n_cnt += 1;
                }
                if x > 0 && provisional[up - 1] != 0 {
                    neighbors[n_cnt] = provisional[up - 1];
                    n_cnt += 1;
                }
                if x + 1 < w && provisional[up + 1] != 0 {
                    neighbors[n_cnt] = provisional[up + 1];
                    n_cnt += 1;
                }
            }
            for &n in &neighbors[..n_cnt] {
                let root = find(&mut parent, n);
                if best == 0 || root < best {
                    best = root;
                }
            }
            if best == 0 {
                let fresh = parent.len() as u32;
                parent.push(fresh);
                provisional[idx] = fresh;
            } else {
                provisional[idx] = best;
                for &n in &neighbors[..n_cnt] {
                    let root = find(&mut parent, n);
                    parent[root as usize] = best;
                }
            }
        }
    }

    // Resolve roots and accumulate stats keyed by root.
    let mut root_of = vec![0u32; parent.len()];
    for i in 1..parent.len() {
        root_of[i] = find(&mut parent, i as u32);
    }

    #[derive(Clone)]
    struct Acc {
        count: u64,
        sum_x: u64,
        sum_y: u64,
        min_x: u32,
        min_y: u32,
        max_x: u32,
        max_y: u32,
    }
    let mut acc: Vec<Option<Acc>> = vec![None; parent.len()];
    for y in 0..h {
        for x in 0..w {
            let p = provisional[y * w + x];
            if p == 0 {
                continue;
            }
            let root = root_of[p as usize] as usize;
            let a = acc[root].get_or_insert(Acc {
                count: 0,
                sum_x: 0,
                sum_y: 0,
                min_x: x as u32,
                min_y: y as u32,
                max_x: x as u32,
                max_y: y as u32,
            });
            a.count += 1;
            a.sum_x += x as u64;
            a.sum_y += y as u64;
            a.min_x = a.min_x.min(x as u32);
            a.min_y = a.min_y.min(y as u32);
            a.max_x = a.max_x.max(x as u32);
            a.max_y = a.max_y.max(y as u32);
        }
    }

    let mut regions: Vec<(u32, Acc)> = acc
        .into_iter()
        .enumerate()
        .filter_map(|(root, a)| a.map(|a| (root as u32, a)))
        .collect();
    regions.sort_by(|(_, a), (_, b)| {
        b.count
            .cmp(&a.count)
            .then(a.min_y.cmp(&b.min_y))
            .then(a.min_x.cmp(&b.min_x))
    });

    let mut canonical = vec![0u32; parent.len()];
    let mut stats = Vec::with_capacity(regions.len());
    for (rank, (root, a)) in regions.iter().enumerate() {
        let label = rank as u32 + 1;
        canonical[*root as usize] = label;
        stats.push(RegionStats {
            label,
            pixel_count: a.count,
            bbox: Rect::new(a.min_x, a.min_y, a.max_x + 1, a.max_y + 1),
            centroid: (
                a.sum_x as f64 / a.count as f64,
                a.sum_y as f64 / a.count as f64,
            ),
        });
    }

    let labels = provisional
        .iter()
        .map(|&p| {
            if p == 0 {
                0
            } else {
                canonical[root_of[p as usize] as usize]
            }
        })
        .collect();

    (
        LabelMap {
            width: img.width,
            height: img.height,
            labels,
        },
        stats,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: u32, h: u32, seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..w as usize * h as usize)
            .map(|_| rng.gen::<u8>())
            .collect();
        GrayImage::from_raw(w, h, data).unwrap()
    }

    // -- PGM --

    #[test]
    fn load_minimal_pgm() {
        let bytes = b"P5 2 1 255\n\x00\xff";
        let img = load_pgm(bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.get(0, 0), 0);
        assert_eq!(img.get(1, 0), 255);
    }

    #[test]
    fn reject_wrong_magic() {
        let err = load_pgm(b"P6 2 1 255\n\x00\xff\x00\xff\x00\xff").unwrap_err();
        match err {
            PgmError::Format { offset, .. } => assert_eq!(offset, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn reject_large_maxval() {
        let err = load_pgm(b"P5 1 1 65535\n\x00\x00").unwrap_err();
        assert!(matches!(err, PgmError::Format { .. }));
    }

    #[test]
    fn reject_truncated_data() {
        let err = load_pgm(b"P5 4 4 255\n\x00\x01").unwrap_err();
        assert!(matches!(err, PgmError::Truncated { expected: 16, found: 2, .. }));
    }

    #[test]
    fn header_comments_allowed() {
        let bytes = b"P5\n# camera frame\n2 2\n# maxval next\n255\n\x01\x02\x03\x04";
        let img = load_pgm(bytes).unwrap();
        assert_eq!(img.get(1, 1), 4);
    }

    #[test]
    fn roundtrip_canonical_files() {
        for seed in 0..8u64 {
            let img = random_image(17, 9, seed);
            let bytes = save_pgm(&img);
            let back = load_pgm(&bytes).unwrap();
            assert_eq!(save_pgm(&back), bytes);
            assert_eq!(back, img);
        }
    }

    // -- downscale --

    #[test]
    fn downscale_constant_field() {
        let img = GrayImage::new_filled(640, 480, 100);
        let out = downscale(&img, 8).unwrap();
        assert_eq!((out.width(), out.height()), (80, 60));
        assert!(out.data().iter().all(|&p| p == 100));
    }

    #[test]
    fn downscale_rounds_half_up() {
        let img = GrayImage::from_raw(2, 2, vec![0, 0, 255, 255]).unwrap();
        let out = downscale(&img, 2).unwrap();
        assert_eq!(out.data(), &[128]);
    }

    #[test]
    fn downscale_rejects_nondivisible() {
        let img = GrayImage::new_filled(10, 10, 0);
        assert!(downscale(&img, 3).is_err());
    }

    #[test]
    fn downscale_matches_block_mean_oracle() {
        let img = random_image(640, 480, 7);
        let out = downscale(&img, 8).unwrap();
        // Naive double-loop block averaging.
        for by in 0..60u32 {
            for bx in 0..80u32 {
                let mut sum = 0u32;
                for y in by * 8..(by + 1) * 8 {
                    for x in bx * 8..(bx + 1) * 8 {
                        sum += img.get(x, y) as u32;
                    }
                }
                let expect = ((sum as f64 / 64.0) + 0.5).floor() as u8;
                assert_eq!(out.get(bx, by), expect, "block ({bx},{by})");
            }
        }
    }

    #[test]
    fn downscale_preserves_mean_within_rounding() {
        for seed in 0..4u64 {
            let img = random_image(64, 48, seed);
            let out = downscale(&img, 8).unwrap();
            assert!((img.mean(None) - out.mean(None)).abs() <= 0.5);
        }
    }

    // -- isodata --

    #[test]
    fn isodata_symmetric_bimodal() {
        let mut data = vec![50u8; 200];
        data.extend(vec![200u8; 200]);
        let img = GrayImage::from_raw(20, 20, data).unwrap();
        let t = isodata_threshold(&img, None).unwrap();
        assert_eq!(t, 125.0);
    }

    #[test]
    fn isodata_uniform_degenerate() {
        let img = GrayImage::new_filled(16, 16, 100);
        assert_eq!(isodata_threshold(&img, None).unwrap(), 100.0);
    }

    #[test]
    fn isodata_is_a_fixed_point() {
        for seed in 0..16u64 {
            let img = random_image(80, 60, seed);
            let t = isodata_threshold(&img, None).unwrap();
            let (mut lo, mut lon, mut hi, mut hin) = (0u64, 0u64, 0u64, 0u64);
            for &p in img.data() {
                if (p as f64) <= t {
                    lo += p as u64;
                    lon += 1;
                } else {
                    hi += p as u64;
                    hin += 1;
                }
            }
            let recomputed = (lo as f64 / lon as f64 + hi as f64 / hin as f64) / 2.0;
            assert!((t - recomputed).abs() < 0.5, "seed {seed}: {t} vs {recomputed}");
        }
    }

    #[test]
    fn isodata_permutation_invariant() {
        use rand::seq::SliceRandom;
        let img = random_image(40, 30, 11);
        let t = isodata_threshold(&img, None).unwrap();
        let mut data = img.data().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        data.shuffle(&mut rng);
        let shuffled = GrayImage::from_raw(40, 30, data).unwrap();
        assert_eq!(isodata_threshold(&shuffled, None).unwrap(), t);
    }

    #[test]
    fn isodata_roi_ignores_outside() {
        let mut img = GrayImage::new_filled(20, 20, 100);
        for y in 0..10 {
            for x in 0..10 {
                img.set(x, y, if (x + y) % 2 == 0 { 40 } else { 220 });
            }
        }
        let roi = Rect::new(0, 0, 10, 10);
        let t_roi = isodata_threshold(&img, Some(&roi)).unwrap();
        assert_eq!(t_roi, 130.0);
        // Poke the outside region; roi threshold must not move.
        img.set(19, 19, 255);
        assert_eq!(isodata_threshold(&img, Some(&roi)).unwrap(), t_roi);
    }

    // -- segment --

    #[test]
    fn segment_empty_foreground() {
        let img = GrayImage::new_filled(10, 10, 200);
        let (map, regions) = segment(&img, 100.0);
        assert!(regions.is_empty());
        assert!(map.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn segment_orders_by_size() {
        let mut img = GrayImage::new_filled(20, 20, 255);
        // 30-px blob (bottom), 10-px blob (top), disjoint.
        for i in 0..30u32 {
            img.set(i % 10, 15 + i / 10, 0);
        }
        for i in 0..10u32 {
            img.set(5 + i % 5, 2 + i / 5, 0);
        }
        let (_, regions) = segment(&img, 10.0);
        assert_eq!(regions.len(), 2);
        assert_eq!(regions[0].pixel_count, 30);
        assert_eq!(regions[1].pixel_count, 10);
        assert_eq!(regions[0].label, 1);
    }

    #[test]
    fn segment_diagonal_connects_with_8_connectivity() {
        let mut img = GrayImage::new_filled(4, 4, 255);
        img.set(0, 0, 0);
        img.set(1, 1, 0);
        img.set(2, 2, 0);
        let (_, regions) = segment(&img, 10.0);
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].pixel_count, 3);
    }

    /// Independent flood-fill oracle: (region_count, sorted region sizes).
    fn flood_fill_oracle(img: &GrayImage, threshold: f64) -> Vec<u64> {
        let w = img.width() as i64;
        let h = img.height() as i64;
        let mut seen = vec![false; (w * h) as usize];
        let mut sizes = Vec::new();
        for sy in 0..h {
            for sx in 0..w {
                let si = (sy * w + sx) as usize;
                if seen[si] || (img.get(sx as u32, sy as u32) as f64) > threshold {
                    continue;
                }
                let mut stack = vec![(sx, sy)];
                seen[si] = true;
                let mut size = 0u64;
                while let Some((x, y)) = stack.pop() {
                    size += 1;
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let (nx, ny) = (x + dx, y + dy);
                            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                                continue;
                            }
                            let ni = (ny * w + nx) as usize;
                            if !seen[ni] && (img.get(nx as u32, ny as u32) as f64) <= threshold {
                                seen[ni] = true;
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
                sizes.push(size);
            }
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    #[test]
    fn segment_matches_flood_fill_oracle() {
        for seed in 0..6u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = (0..50 * 40)
                .map(|_| if rng.gen_bool(0.4) { 0u8 } else { 255u8 })
                .collect();
            let img = GrayImage::from_raw(50, 40, data).unwrap();
            let (map, regions) = segment(&img, 10.0);
            let oracle = flood_fill_oracle(&img, 10.0);
            let sizes: Vec<u64> = regions.iter().map(|r| r.pixel_count).collect();
            assert_eq!(sizes, oracle, "seed {seed}");
            // Partition checks: every fg pixel labeled, counts add up.
            let fg_total: u64 = img.data().iter().filter(|&&p| p <= 10).count() as u64;
            assert_eq!(sizes.iter().sum::<u64>(), fg_total);
            for y in 0..40 {
                for x in 0..50 {
                    let labeled = map.get(x, y) != 0;
                    assert_eq!(labeled, img.get(x, y) <= 10);
                }
            }
        }
    }

    #[test]
    fn segment_stats_invariants() {
        let img = random_image(30, 30, 3);
        let (_, regions) = segment(&img, 128.0);
        for r in &regions {
            assert!(r.pixel_count >= 1);
            assert!(r.bbox.contains(r.centroid.0.round() as u32, r.centroid.1.round() as u32));
            assert!(r.bbox.x1 <= 30 && r.bbox.y1 <= 30);
        }
    }
}
