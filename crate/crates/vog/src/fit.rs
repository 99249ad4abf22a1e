//! Least-squares circle estimation from border sample points.
//!
//! The estimator minimizes summed squared algebraic distances
//! `(z_i + B*x_i + C*y_i + D)^2` with `z_i = x_i^2 + y_i^2`, which reduces to
//! a 3x3 symmetric linear system in the moments of the points. The system is
//! solved by Cholesky factorization after translating the points so their
//! centroid sits at the origin; the shift changes nothing mathematically but
//! keeps the normal matrix well conditioned. The geometric objective (mean
//! squared radial distance) is kept as a residual metric only.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FitError {
    #[error("insufficient points: need at least 3, got {0}")]
    InsufficientPoints(usize),
    #[error("degenerate configuration: points do not determine a circle")]
    Degenerate,
    #[error("insufficient samples after outlier removal: {kept} of {total} kept")]
    TooFewSurvivors { kept: usize, total: usize },
}

/// Circle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

impl Circle {
    /// Euclidean distance from `p` to the center.
    #[inline]
    pub fn center_distance(&self, p: (f64, f64)) -> f64 {
        ((p.0 - self.cx).powi(2) + (p.1 - self.cy).powi(2)).sqrt()
    }
}

/// Outcome of [`double_fit`]: the refit circle plus which points survived.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub circle: Circle,
    /// Points kept for the second fit, in input order.
    pub inliers: Vec<(f64, f64)>,
    pub removed_count: usize,
    /// Root of the mean squared geometric residual of the final circle
    /// over the inliers, in pixels.
    pub geometric_rms: f64,
}

/// Solve `A x = b` for symmetric positive definite 3x3 `A` (lower triangle
/// Cholesky). Returns `None` when a pivot is not meaningfully positive.
fn cholesky_solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1.0);
    let tol = scale * 1e-12;

    let mut l = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= tol {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    // Forward then back substitution.
    let mut y = [0.0f64; 3];
    for i in 0..3 {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    let mut x = [0.0f64; 3];
    for i in (0..3).rev() {
        let mut sum = y[i];
        for k in i + 1..3 {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    Some(x)
}

/// Algebraic least-squares circle through `points`.
///
/// Builds the moment normal equations over centroid-shifted coordinates,
/// factorizes by Cholesky, and maps the solution back to center/radius.
pub fn algebraic_fit(points: &[(f64, f64)]) -> Result<Circle, FitError> {
    let n = points.len();
    if n < 3 {
        return Err(FitError::InsufficientPoints(n));
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;

    let (mut sxx, mut sxy, mut syy) = (0.0f64, 0.0f64, 0.0f64);
    let (mut sx, mut sy, mut sz) = (0.0f64, 0.0f64, 0.0f64);
    let (mut sxz, mut syz) = (0.0f64, 0.0f64);
    for &(px, py) in points {
        let x = px - mean_x;
        let y = py - mean_y;
        let z = x * x + y * y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sx += x;
        sy += y;
        sz += z;
        sxz += x * z;
        syz += y * z;
    }

    let a = [[sxx, sxy, sx], [sxy, syy, sy], [sx, sy, nf]];
    let b = [-sxz, -syz, -sz];
    let sol = cholesky_solve3(a, b).ok_or(FitError::Degenerate)?;
    let (bb, cc, dd) = (sol[0], sol[1], sol[2]);

    let cx = -bb / 2.0;
    let cy = -cc / 2.0;
    let r2 = cx * cx + cy * cy - dd;
    if !(r2 > 0.0) || !r2.is_finite() {
        return Err(FitError::Degenerate);
    }
    Ok(Circle {
        cx: cx + mean_x,
        cy: cy + mean_y,
        radius: r2.sqrt(),
    })
}

/// Mean squared geometric residual: mean over points of
/// `(distance_to_center - radius)^2`.
pub fn geometric_rss(circle: &Circle, points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    assert!(n >= 1, "geometric_rss needs at least one point");
    points
        .iter()
        .map(|&p| {
            let d = circle.center_distance(p) - circle.radius;
            d * d
        })
        .sum::<f64>()
        / n as f64
}

/// Two-pass robust fit: fit, drop points whose radial residual exceeds
/// `outlier_k` standard deviations of the residual set, fit again.
///
/// If no point is dropped the first fit is final. Requires `min_samples`
/// points on input and at least `max(3, min_samples)` survivors.
pub fn double_fit(
    points: &[(f64, f64)],
    outlier_k: f64,
    min_samples: usize,
) -> Result<FitReport, FitError> {
    let n = points.len();
    if n < min_samples.max(3) {
        return Err(FitError::InsufficientPoints(n));
    }
    let first = algebraic_fit(points)?;

    let residuals: Vec<f64> = points
        .iter()
        .map(|&p| (first.center_distance(p) - first.radius).abs())
        .collect();
    let mean = residuals.iter().sum::<f64>() / n as f64;
    let var = residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n as f64;
    let sigma = var.sqrt();
    // Floating-point dust on exact data is not "far from the center".
    let cutoff = (outlier_k * sigma).max(1e-9 * first.radius.max(1.0));

    let inliers: Vec<(f64, f64)> = points
        .iter()
        .zip(&residuals)
        .filter(|(_, &r)| r <= cutoff)
        .map(|(&p, _)| p)
        .collect();
    let removed_count = n - inliers.len();

    if removed_count == 0 {
        let rms = geometric_rss(&first, points).sqrt();
        return Ok(FitReport {
            circle: first,
            inliers,
            removed_count: 0,
            geometric_rms: rms,
        });
    }
    if inliers.len() < 3 || inliers.len() < min_samples {
        return Err(FitError::TooFewSurvivors {
            kept: inliers.len(),
            total: n,
        });
    }
    let second = algebraic_fit(&inliers)?;
    let rms = geometric_rss(&second, &inliers).sqrt();
    Ok(FitReport {
        circle: second,
        inliers,
        removed_count,
        geometric_rms: rms,
    })
}
