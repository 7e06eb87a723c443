use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// Kernel contributions beyond this many bandwidths are below 1e-22.
const KERNEL_REACH: f64 = 10.0;
pub const MAX_AUTO_GRID: usize = 100_000;

fn mean_sd(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = if samples.len() > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 };
    (mean, sd)
}

/// Silverman's rule `1.06 * sd * n^(-1/5)`.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    let (_, sd) = mean_sd(samples);
    if !(sd > 0.0) {
        return Err(Error::invalid(
            "samples have zero variance; give an explicit bandwidth",
        ));
    }
    Ok(1.06 * sd * (samples.len() as f64).powf(-0.2))
}

/// Evenly spaced grid from `5h` below the smallest sample to `5h` above the
/// largest. With `points = None` the spacing is about `h / 4`, capped at
/// [`MAX_AUTO_GRID`] points.
pub fn default_grid(samples: &[f64], bandwidth: f64, points: Option<usize>) -> Vec<f64> {
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - 5.0 * bandwidth;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 5.0 * bandwidth;
    let n = points
        .unwrap_or_else(|| ((hi - lo) / (bandwidth / 4.0)).ceil() as usize + 1)
        .clamp(2, MAX_AUTO_GRID.max(points.unwrap_or(0)));
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|j| lo + step * j as f64).collect()
}

/// Gaussian kernel density estimate evaluated on `grid`.
pub fn kde_density(samples: &[f64], bandwidth: Option<f64>, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::invalid(format!("bandwidth must be positive, got {h}"))),
        None => silverman_bandwidth(samples)?,
    };
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let norm = 1.0 / (sorted.len() as f64 * h);
    Ok(grid
        .par_iter()
        .map(|&x| {
            let from = sorted.partition_point(|&s| s < x - KERNEL_REACH * h);
            let to = sorted.partition_point(|&s| s <= x + KERNEL_REACH * h);
            let sum: f64 = sorted[from..to]
                .iter()
                .map(|&s| {
                    let z = (x - s) / h;
                    (-0.5 * z * z).exp()
                })
                .sum();
            (x, sum * INV_SQRT_2PI * norm)
        })
        .collect())
}

/// Standardized order statistics against standard normal quantiles at
/// `(i - 0.5) / n`.
pub fn qq_points(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.len() < 2 {
        return Err(Error::invalid("a QQ plot needs at least two samples"));
    }
    let (mean, sd) = mean_sd(samples);
    if !(sd > 0.0) {
        return Err(Error::invalid("samples have zero variance"));
    }
    let normal = Normal::standard();
    let mut z: Vec<f64> = samples.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    Ok(z
        .into_iter()
        .enumerate()
        .map(|(i, s)| (normal.inverse_cdf((i as f64 + 0.5) / n), s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn trapezoid(points: &[(f64, f64)]) -> f64 {
        points
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum()
    }

    #[test]
    fn single_kernel_is_normal_pdf() {
        let grid: Vec<f64> = (-40..=40).map(|j| j as f64 / 10.0).collect();
        let normal = Normal::standard();
        for (x, d) in kde_density(&[0.0], Some(1.0), &grid).unwrap() {
            use statrs::distribution::Continuous;
            assert!((d - normal.pdf(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_samples_give_symmetric_density() {
        let samples = [-2.0, -0.5, -0.1, 0.1, 0.5, 2.0];
        let grid: Vec<f64> = (-30..=30).map(|j| j as f64 / 7.0).collect();
        let d = kde_density(&samples, None, &grid).unwrap();
        for j in 0..d.len() {
            assert!((d[j].1 - d[d.len() - 1 - j].1).abs() < 1e-12);
        }
    }

    #[test]
    fn default_grid_integrates_to_one() {
        let samples = [0.0, 0.3, 0.31, 1.7, -4.0, 2.2, 2.25];
        let h = silverman_bandwidth(&samples).unwrap();
        let grid = default_grid(&samples, h, None);
        let integral = trapezoid(&kde_density(&samples, None, &grid).unwrap());
        assert!((0.995..=1.0 + 1e-9).contains(&integral), "{integral}");
    }

    #[test]
    fn degenerate_inputs() {
        assert!(kde_density(&[], Some(1.0), &[0.0]).is_err());
        assert!(kde_density(&[1.0, 1.0], None, &[0.0]).is_err());
        assert!(kde_density(&[1.0, 1.0], Some(0.5), &[0.0]).is_ok());
        assert!(qq_points(&[1.0]).is_err());
        assert!(qq_points(&[2.0, 2.0, 2.0]).is_err());
    }

    #[test]
    fn qq_normal_samples_lie_on_diagonal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let samples: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let pts = qq_points(&samples).unwrap();
        let middle = &pts[100..pts.len() - 100];
        let worst = middle.iter().map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst < 0.1, "{worst}");
    }

    #[test]
    fn qq_affine_invariance() {
        let samples = [0.3, -1.2, 4.0, 2.2, 0.0, 0.7];
        let shifted: Vec<f64> = samples.iter().map(|x| 3.0 * x - 11.0).collect();
        let a = qq_points(&samples).unwrap();
        let b = qq_points(&shifted).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.0, q.0);
            assert!((p.1 - q.1).abs() < 1e-12);
        }
    }

    #[test]
    fn qq_two_point_mass() {
        let samples: Vec<f64> = (0..10).map(|i| (i % 2) as f64).collect();
        assert_eq!(qq_points(&samples).unwrap().len(), 10);
    }
}
