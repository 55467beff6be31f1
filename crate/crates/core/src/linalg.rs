//! Just enough dense linear algebra for Gaussian class-conditional densities.

use std::f64::consts::PI;

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix
/// stored row-major. Returns `None` if a pivot is not strictly positive.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// A multivariate normal density with a precomputed Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: Vec<f64>,
    chol: Vec<f64>,
    log_norm: f64,
}

impl Gaussian {
    /// Builds the density, adding `ridge` to the diagonal and growing it
    /// tenfold until the factorisation succeeds.
    pub fn new(mean: Vec<f64>, mut cov: Vec<f64>, ridge: f64) -> Self {
        let d = mean.len();
        for i in 0..d {
            cov[i * d + i] += ridge;
        }
        let mut extra = ridge.max(f64::MIN_POSITIVE);
        let chol = loop {
            if let Some(l) = cholesky(&cov, d) {
                break l;
            }
            for i in 0..d {
                cov[i * d + i] += extra;
            }
            extra *= 10.0;
        };
        let log_det: f64 = (0..d).map(|i| chol[i * d + i].ln()).sum::<f64>() * 2.0;
        let log_norm = -0.5 * (d as f64 * (2.0 * PI).ln() + log_det);
        Self {
            mean,
            chol,
            log_norm,
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        let d = self.mean.len();
        // Forward substitution: L y = x - mean.
        let mut y = vec![0.0; d];
        let mut quad = 0.0;
        for i in 0..d {
            let mut s = x[i] - self.mean[i];
            for k in 0..i {
                s -= self.chol[i * d + k] * y[k];
            }
            y[i] = s / self.chol[i * d + i];
            quad += y[i] * y[i];
        }
        self.log_norm - 0.5 * quad
    }

    /// `mean + L e`: maps a standard-normal vector to a draw from this density.
    pub fn transform(&self, e: &[f64]) -> Vec<f64> {
        let d = self.mean.len();
        (0..d)
            .map(|i| self.mean[i] + (0..=i).map(|k| self.chol[i * d + k] * e[k]).sum::<f64>())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let l = cholesky(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i * 3 + k] * l[j * 3 + k]).sum();
                assert!((v - a[i * 3 + j]).abs() < 1e-12);
            }
        }
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }

    #[test]
    fn univariate_density() {
        let g = Gaussian::new(vec![1.0], vec![4.0], 0.0);
        let expected = -0.5 * (2.0 * PI * 4.0).ln() - 0.5 * (3.0f64 - 1.0).powi(2) / 4.0;
        assert!((g.log_pdf(&[3.0]) - expected).abs() < 1e-12);
    }

    #[test]
    fn singular_covariance_is_regularised() {
        let g = Gaussian::new(vec![0.0, 0.0], vec![1.0, 1.0, 1.0, 1.0], 1e-6);
        assert!(g.log_pdf(&[0.1, 0.1]).is_finite());
        let zero = Gaussian::new(vec![0.0], vec![0.0], 0.0);
        assert!(zero.log_pdf(&[0.0]).is_finite());
    }
}
