//! Four-component Gaussian mixture in eight dimensions, and random cost
//! profiles.
//!
//! Normal variates come from `rand_distr::StandardNormal` (ziggurat) driven by
//! a ChaCha8 stream, so a seed fixes the sample on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cost::{Cost, CostProfile};
use crate::data::{Dataset, Matrix};
use crate::error::{Error, Result};

pub const MIXTURE_DIM: usize = 8;
pub const MIXTURE_COMPONENTS: usize = 4;

/// The fixed toy cost vector used with the mixture benchmark.
pub const TOY_COSTS: [f64; MIXTURE_DIM] = [92.0, 81.0, 45.0, 23.0, 23.0, 33.0, 72.0, 5.0];

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    pub rho: f64,
    pub n: usize,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn new(rho: f64, n: usize, seed: u64) -> Self {
        Self { rho, n, seed }
    }
}

/// Component centres. The second and third flip the sign of the second and
/// first half of the first centre; the fourth is its negation.
pub fn mixture_means() -> [[f64; MIXTURE_DIM]; MIXTURE_COMPONENTS] {
    let mu1 = [2.0, 1.8, 1.6, 1.4, 1.2, 1.0, 0.8, 0.6];
    let half = MIXTURE_DIM / 2;
    let mut mu2 = mu1;
    let mut mu3 = mu1;
    let mut mu4 = mu1;
    for k in 0..MIXTURE_DIM {
        if k >= half {
            mu2[k] = -mu1[k];
        } else {
            mu3[k] = -mu1[k];
        }
        mu4[k] = -mu1[k];
    }
    [mu1, mu2, mu3, mu4]
}

/// `Sigma[i][j] = rho^|i-j|`.
pub fn mixture_covariance(rho: f64) -> Result<[[f64; MIXTURE_DIM]; MIXTURE_DIM]> {
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidCorrelation(rho));
    }
    let mut sigma = [[0.0; MIXTURE_DIM]; MIXTURE_DIM];
    for (i, row) in sigma.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = rho.powi(i.abs_diff(j) as i32);
        }
    }
    Ok(sigma)
}

/// Lower-triangular `L` with `L L^T = a`.
pub fn cholesky<const N: usize>(a: &[[f64; N]; N]) -> Option<[[f64; N]; N]> {
    let mut l = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 || !d.is_finite() {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Draws `spec.n` points; the label is the 1-based component id.
pub fn sample_mixture(spec: &MixtureSpec) -> Result<Dataset> {
    let sigma = mixture_covariance(spec.rho)?;
    let l = cholesky(&sigma).ok_or(Error::InvalidCorrelation(spec.rho))?;
    let means = mixture_means();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = Vec::with_capacity(spec.n * MIXTURE_DIM);
    let mut labels = Vec::with_capacity(spec.n);
    let mut z = [0.0; MIXTURE_DIM];
    for _ in 0..spec.n {
        let c = rng.random_range(0..MIXTURE_COMPONENTS);
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for i in 0..MIXTURE_DIM {
            let shift: f64 = (0..=i).map(|k| l[i][k] * z[k]).sum();
            data.push(means[c][i] + shift);
        }
        labels.push(c + 1);
    }
    Dataset::new(Matrix::new(spec.n, MIXTURE_DIM, data)?, labels)
}

/// `p` independent uniform draws on `[lo, hi]`, rounded to hundredths.
pub fn sample_cost_profile(p: usize, lo: f64, hi: f64, seed: u64) -> Result<CostProfile> {
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidConfig(format!("bad cost range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let costs = (0..p)
        .map(|_| Cost::from_units(rng.random_range(lo..=hi)))
        .collect();
    CostProfile::new(costs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn means_match_definition() {
        let m = mixture_means();
        assert_eq!(m[0][0], 2.0);
        assert_eq!(m[0][7], 0.6);
        for k in 0..MIXTURE_DIM {
            assert_eq!(m[1][k] + m[2][k], 0.0);
            assert_eq!(m[3][k], -m[0][k]);
        }
        assert_eq!(m[1], [2.0, 1.8, 1.6, 1.4, -1.2, -1.0, -0.8, -0.6]);
        assert_eq!(m[2], [-2.0, -1.8, -1.6, -1.4, 1.2, 1.0, 0.8, 0.6]);
    }

    #[test]
    fn covariance_entries() {
        let s = mixture_covariance(0.3).unwrap();
        for i in 0..MIXTURE_DIM {
            assert_eq!(s[i][i], 1.0);
        }
        assert!((s[0][2] - 0.09).abs() < 1e-15);
        assert_eq!(s[2][0], s[0][2]);
        let id = mixture_covariance(0.0).unwrap();
        for i in 0..MIXTURE_DIM {
            for j in 0..MIXTURE_DIM {
                assert_eq!(id[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
        assert!(matches!(mixture_covariance(1.0), Err(Error::InvalidCorrelation(_))));
        assert!(mixture_covariance(-1.2).is_err());
        assert!(mixture_covariance(f64::NAN).is_err());
    }

    #[test]
    fn covariance_factorizes_for_open_interval() {
        for rho in [-0.95, -0.5, 0.0, 0.1, 0.3, 0.6, 0.95] {
            let s = mixture_covariance(rho).unwrap();
            let l = cholesky(&s).expect("positive definite");
            for i in 0..MIXTURE_DIM {
                for j in 0..MIXTURE_DIM {
                    let v: f64 = (0..MIXTURE_DIM).map(|k| l[i][k] * l[j][k]).sum();
                    assert!((v - s[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let spec = MixtureSpec::new(0.3, 200, 11);
        assert_eq!(sample_mixture(&spec).unwrap(), sample_mixture(&spec).unwrap());
        let other = sample_mixture(&MixtureSpec::new(0.3, 200, 12)).unwrap();
        assert_ne!(sample_mixture(&spec).unwrap(), other);
    }

    #[test]
    fn cost_profiles_in_range_and_reproducible() {
        let a = sample_cost_profile(50, 1.0, 100.0, 3).unwrap();
        assert_eq!(a, sample_cost_profile(50, 1.0, 100.0, 3).unwrap());
        for c in a.costs() {
            assert!(c.as_f64() >= 1.0 && c.as_f64() <= 100.0);
        }
        assert!(sample_cost_profile(3, 5.0, 1.0, 0).is_err());
    }
}
