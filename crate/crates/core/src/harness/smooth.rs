//! Locally weighted linear regression (lowess without robustness passes).

use crate::error::{Error, Result};

pub const DEFAULT_SPAN: f64 = 2.0 / 3.0;
pub const GRID_POINTS: usize = 100;

#[derive(Debug, Clone)]
pub struct Lowess {
    points: Vec<(f64, f64)>,
    neighbours: usize,
}

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u * u;
        t * t * t
    }
}

impl Lowess {
    /// `span` is the fraction of points in each local neighbourhood.
    pub fn new(points: &[(f64, f64)], span: f64) -> Result<Self> {
        if points.len() < 5 {
            return Err(Error::TooFewPoints(points.len()));
        }
        if !(span > 0.0 && span <= 1.0) {
            return Err(Error::InvalidConfig(format!("span {span} outside (0, 1]")));
        }
        let n = points.len();
        let neighbours = ((span * n as f64).round() as usize).clamp(2, n);
        Ok(Self {
            points: points.to_vec(),
            neighbours,
        })
    }

    /// Local linear fit evaluated at `x0`.
    pub fn predict(&self, x0: f64) -> f64 {
        let mut dist: Vec<f64> = self.points.iter().map(|(x, _)| (x - x0).abs()).collect();
        let k = self.neighbours - 1;
        let (_, h, _) = dist.select_nth_unstable_by(k, f64::total_cmp);
        let h = *h;

        let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
        let mut weights = Vec::with_capacity(self.points.len());
        for &(x, y) in &self.points {
            let d = (x - x0).abs();
            let w = if h > 0.0 {
                tricube(d / h)
            } else if d == 0.0 {
                1.0
            } else {
                0.0
            };
            weights.push(w);
            sw += w;
            sx += w * x;
            sy += w * y;
        }
        if sw == 0.0 {
            // every neighbour sits exactly on the boundary
            let near: Vec<f64> = self
                .points
                .iter()
                .filter(|(x, _)| (x - x0).abs() <= h)
                .map(|&(_, y)| y)
                .collect();
            return near.iter().sum::<f64>() / near.len() as f64;
        }
        let (xbar, ybar) = (sx / sw, sy / sw);
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (&(x, y), &w) in self.points.iter().zip(&weights) {
            sxx += w * (x - xbar) * (x - xbar);
            sxy += w * (x - xbar) * (y - ybar);
        }
        let range = self
            .points
            .iter()
            .map(|p| p.0)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        let scale = (range.1 - range.0).max(1e-300);
        if sxx <= 1e-12 * sw * scale * scale {
            return ybar;
        }
        ybar + sxy / sxx * (x0 - xbar)
    }
}

/// Uniform grid of [`GRID_POINTS`] values spanning the observed costs.
pub fn cost_grid(points: &[(f64, f64)]) -> Vec<f64> {
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    (0..GRID_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (GRID_POINTS - 1) as f64)
        .collect()
}

/// The smoothed "average schedule": lowess evaluated on [`cost_grid`].
pub fn smooth_schedule(points: &[(f64, f64)], span: f64) -> Result<Vec<(f64, f64)>> {
    let fit = Lowess::new(points, span)?;
    Ok(cost_grid(points)
        .into_iter()
        .map(|x| (x, fit.predict(x)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reproduces_a_line() {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|k| {
                let x = k as f64 / 39.0;
                (x, 0.5 + 0.3 * x)
            })
            .collect();
        for (x, y) in smooth_schedule(&pts, DEFAULT_SPAN).unwrap() {
            assert!((y - (0.5 + 0.3 * x)).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_for_repeated_point() {
        let pts = vec![(0.4, 0.8); 7];
        let curve = smooth_schedule(&pts, DEFAULT_SPAN).unwrap();
        assert_eq!(curve.len(), GRID_POINTS);
        assert!(curve.iter().all(|&(x, y)| x == 0.4 && (y - 0.8).abs() < 1e-12));
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            smooth_schedule(&[(0.0, 1.0); 4], DEFAULT_SPAN),
            Err(Error::TooFewPoints(4))
        ));
    }

    /// Reference local regression: full sort for the bandwidth, then the 2x2
    /// weighted normal equations in the raw (uncentred) basis.
    fn reference(points: &[(f64, f64)], span: f64, x0: f64) -> f64 {
        let n = points.len();
        let q = ((span * n as f64).round() as usize).clamp(2, n);
        let mut d: Vec<f64> = points.iter().map(|p| (p.0 - x0).abs()).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = d[q - 1];
        let (mut s0, mut s1, mut s2, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, y) in points {
            let u = (x - x0).abs() / h;
            let w = if u < 1.0 { (1.0 - u.powi(3)).powi(3) } else { 0.0 };
            s0 += w;
            s1 += w * x;
            s2 += w * x * x;
            t0 += w * y;
            t1 += w * x * y;
        }
        let det = s0 * s2 - s1 * s1;
        let a = (t0 * s2 - s1 * t1) / det;
        let b = (s0 * t1 - s1 * t0) / det;
        a + b * x0
    }

    #[test]
    fn agrees_with_reference_smoother() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pts: Vec<(f64, f64)> = (0..200)
            .map(|_| {
                let x: f64 = rng.random();
                (x, (3.0 * x).sin() + 0.2 * rng.random::<f64>())
            })
            .collect();
        let fit = Lowess::new(&pts, DEFAULT_SPAN).unwrap();
        for x in cost_grid(&pts) {
            let want = reference(&pts, DEFAULT_SPAN, x);
            assert!((fit.predict(x) - want).abs() < 1e-3, "at {x}");
        }
    }
}
