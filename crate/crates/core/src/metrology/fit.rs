use super::MetrologyError;
use serde::{Deserialize, Serialize};

/// Fits with a SPAM amplitude below this are flagged unreliable.
pub const UNRELIABLE_AMPLITUDE: f64 = 0.1;

/// Result of fitting `y = A·p^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    /// Decay per cycle, clamped to `[0, 1]`.
    pub p: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub reliable: bool,
}

/// [`fit_exponential_decay_with`] at the default amplitude threshold.
pub fn fit_exponential_decay(points: &[(f64, f64)]) -> Result<DecayFit, MetrologyError> {
    fit_exponential_decay_with(points, UNRELIABLE_AMPLITUDE)
}

/// Nonlinear least squares for `y = A·p^m` (Levenberg–Marquardt), started
/// from a log-linear regression over the points with `y > 0`.
///
/// The fit is unreliable when `A < threshold`, or when no point reaches the
/// threshold: a signal that has already vanished at the shortest length
/// leaves `A` and `p` unidentifiable.
pub fn fit_exponential_decay_with(points: &[(f64, f64)], threshold: f64) -> Result<DecayFit, MetrologyError> {
    let mut ms: Vec<f64> = points.iter().map(|p| p.0).collect();
    ms.sort_by(f64::total_cmp);
    ms.dedup();
    if ms.len() < 3 {
        return Err(MetrologyError::InvalidInput(format!("need at least 3 distinct lengths, got {}", ms.len())));
    }
    if points.iter().any(|&(m, y)| !m.is_finite() || m < 0.0 || !y.is_finite()) {
        return Err(MetrologyError::InvalidInput("non-finite or negative point".into()));
    }
    let positive: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
    if positive.is_empty() {
        let residual = rms(points, 0.0, 1.0);
        return Ok(DecayFit { amplitude: 0.0, p: 1.0, residual, reliable: false });
    }
    let (mut a, mut p) = log_linear(&positive);
    p = p.clamp(1e-6, 1.0);
    let mut lambda = 1e-3;
    let mut cost = sse(points, a, p);
    for _ in 0..200 {
        // Normal equations of the Jacobian in (A, p).
        let (mut jtj, mut jtr) = ([[0.0; 2]; 2], [0.0; 2]);
        for &(m, y) in points {
            let pm = p.powf(m);
            let d_a = pm;
            let d_p = if m == 0.0 { 0.0 } else { a * m * p.powf(m - 1.0) };
            let r = y - a * pm;
            let j = [d_a, d_p];
            for i in 0..2 {
                jtr[i] += j[i] * r;
                for k in 0..2 {
                    jtj[i][k] += j[i] * j[k];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let m00 = jtj[0][0] * (1.0 + lambda);
            let m11 = jtj[1][1] * (1.0 + lambda);
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let da = (m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
            let dp = (m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
            let (na, np) = (a + da, (p + dp).clamp(0.0, 1.0));
            let nc = sse(points, na, np);
            if nc < cost {
                let step = (na - a).abs() + (np - p).abs();
                a = na;
                p = np;
                cost = nc;
                lambda = (lambda / 10.0).max(1e-12);
                improved = step > 1e-15;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let residual = rms(points, a, p);
    let observed = points.iter().any(|&(_, y)| y.abs() >= threshold);
    Ok(DecayFit { amplitude: a, p, residual, reliable: a >= threshold && observed })
}

fn log_linear(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), &(m, y)| (sx + m, sy + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) =
        points.iter().fold((0.0, 0.0), |(a, b), &(m, y)| (a + (m - mx) * (y.ln() - my), b + (m - mx) * (m - mx)));
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    ((my - slope * mx).exp(), slope.exp())
}

fn sse(points: &[(f64, f64)], a: f64, p: f64) -> f64 {
    points.iter().map(|&(m, y)| (y - a * p.powf(m)).powi(2)).sum()
}

fn rms(points: &[(f64, f64)], a: f64, p: f64) -> f64 {
    (sse(points, a, p) / points.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_points_recovered() {
        let pts: Vec<(f64, f64)> = [4.0, 16.0, 32.0].iter().map(|&m| (m, 0.9 * 0.95f64.powf(m))).collect();
        let f = fit_exponential_decay(&pts).unwrap();
        assert!((f.amplitude - 0.9).abs() < 1e-6 && (f.p - 0.95).abs() < 1e-6, "{f:?}");
        assert!(f.reliable);
    }

    #[test]
    fn constant_is_no_decay() {
        let pts = [(4.0, 0.8), (16.0, 0.8), (64.0, 0.8)];
        let f = fit_exponential_decay(&pts).unwrap();
        assert!((f.p - 1.0).abs() < 1e-9 && (f.amplitude - 0.8).abs() < 1e-9);
    }

    #[test]
    fn noise_near_zero_is_unreliable() {
        let pts = [(4.0, 0.01), (16.0, -0.02), (64.0, 0.015), (4.0, -0.01)];
        assert!(!fit_exponential_decay(&pts).unwrap().reliable);
        let neg = [(4.0, -0.01), (16.0, -0.02), (64.0, 0.0)];
        assert!(!fit_exponential_decay(&neg).unwrap().reliable);
    }

    #[test]
    fn vanished_signal_is_unreliable() {
        let pts = [(4.0, 1e-4), (16.0, 1e-9), (64.0, 0.0)];
        assert!(!fit_exponential_decay(&pts).unwrap().reliable);
    }

    #[test]
    fn p_is_clamped() {
        let pts = [(1.0, 0.5), (2.0, 0.6), (3.0, 0.7)];
        let f = fit_exponential_decay(&pts).unwrap();
        assert!(f.p <= 1.0);
    }

    #[test]
    fn needs_three_lengths() {
        assert!(fit_exponential_decay(&[(4.0, 0.9), (16.0, 0.8), (4.0, 0.9)]).is_err());
    }
}
