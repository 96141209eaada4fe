//! ε-contaminated multivariate Gaussian datasets.
//!
//! Inliers are drawn from `N(0, Σ)` and outliers from `N(η·1, γ·Σ)` where
//! `Σ = (1-ρ)I + ρ11ᵀ`. The outlier count is exactly `round(ε·n)` and the
//! rows are shuffled by the same seeded stream, so a dataset is a pure
//! function of its [`ContaminationConfig`].

mod csv;

pub(crate) use self::csv::parse_label;
pub use self::csv::{read_dataset, read_dataset_path, write_dataset, write_dataset_path, LabeledData};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, DataMatrix, SquareMatrix};
use crate::seeding;

#[derive(Debug, Clone, PartialEq)]
pub struct ContaminationConfig {
    pub n: usize,
    pub p: usize,
    /// Contamination rate, `0 <= epsilon < 0.5`.
    pub epsilon: f64,
    /// Location shift applied to every coordinate of an outlier.
    pub eta: f64,
    /// Scatter inflation of the outlier component.
    pub gamma: f64,
    /// Equicorrelation of the inlier covariance, `0 <= rho < 1`.
    pub rho: f64,
    pub seed: u64,
}

impl ContaminationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::Config(format!("n and p must be positive, got n={} p={}", self.n, self.p)));
        }
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [0, 0.5), got {}", self.epsilon)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !self.eta.is_finite() {
            return Err(Error::Config(format!("eta must be finite, got {}", self.eta)));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::Config(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        Ok(())
    }

    pub fn outlier_count(&self) -> usize {
        (self.epsilon * self.n as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    pub data: DataMatrix,
    /// 0 = inlier, 1 = outlier.
    pub labels: Vec<u8>,
    pub config: ContaminationConfig,
}

/// `(1-ρ)·I_p + ρ·1_p 1_pᵀ`.
pub fn ar_covariance(p: usize, rho: f64) -> Result<SquareMatrix> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must lie in [0, 1), got {rho}")));
    }
    if p == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let mut m = SquareMatrix::zeros(p);
    for i in 0..p {
        for j in 0..p {
            m.set(i, j, if i == j { 1.0 } else { rho });
        }
    }
    Ok(m)
}

/// `count` rows of `μ + L z` with `L` the Cholesky factor of `scatter`.
pub fn sample_mvn<R: Rng + ?Sized>(
    mu: &[f64],
    scatter: &SquareMatrix,
    count: usize,
    rng: &mut R,
) -> Result<DataMatrix> {
    if mu.len() != scatter.dim() {
        return Err(Error::Domain(format!(
            "mean has length {} but scatter is {}x{}",
            mu.len(),
            scatter.dim(),
            scatter.dim()
        )));
    }
    let chol = Cholesky::factor(scatter)?;
    let p = mu.len();
    let mut values = Vec::with_capacity(count * p);
    let mut z = vec![0.0; p];
    for _ in 0..count {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        let lz = chol.mul_lower(&z);
        values.extend(lz.iter().zip(mu).map(|(a, m)| a + m));
    }
    DataMatrix::new(count, p, values)
}

/// One draw from `N(shift·1, scale·Σ_ar)` using `x = √(1-ρ) z + √ρ w 1`,
/// which is exact for the equicorrelated covariance and costs `O(p)`.
fn push_equicorrelated<R: Rng + ?Sized>(out: &mut Vec<f64>, p: usize, rho: f64, scale: f64, shift: f64, rng: &mut R) {
    let common: f64 = rng.sample(StandardNormal);
    let a = (scale * (1.0 - rho)).sqrt();
    let b = (scale * rho).sqrt() * common;
    for _ in 0..p {
        let z: f64 = rng.sample(StandardNormal);
        out.push(shift + a * z + b);
    }
}

pub fn sample_dataset(config: &ContaminationConfig) -> Result<SimulatedDataset> {
    config.validate()?;
    let n_out = config.outlier_count();
    if n_out >= config.n {
        return Err(Error::Config(format!("{n_out} outliers requested out of n={}", config.n)));
    }
    let (n, p) = (config.n, config.p);
    let mut rng = seeding::stream(config.seed);

    let mut raw = Vec::with_capacity(n * p);
    for i in 0..n {
        if i < n - n_out {
            push_equicorrelated(&mut raw, p, config.rho, 1.0, 0.0, &mut rng);
        } else {
            push_equicorrelated(&mut raw, p, config.rho, config.gamma, config.eta, &mut rng);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut values = Vec::with_capacity(n * p);
    let mut labels = Vec::with_capacity(n);
    for &src in &order {
        values.extend_from_slice(&raw[src * p..(src + 1) * p]);
        labels.push(u8::from(src >= n - n_out));
    }
    Ok(SimulatedDataset { data: DataMatrix::new(n, p, values)?, labels, config: config.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{log_det_pd, sample_covariance, sample_mean};
    use proptest::prelude::*;

    fn config(n: usize, p: usize, epsilon: f64) -> ContaminationConfig {
        ContaminationConfig { n, p, epsilon, eta: 5.0, gamma: 5.0, rho: 0.1, seed: 7 }
    }

    #[test]
    fn ar_covariance_examples() {
        assert_eq!(ar_covariance(4, 0.0).unwrap(), SquareMatrix::identity(4));
        assert_eq!(
            ar_covariance(2, 0.5).unwrap(),
            SquareMatrix::from_rows(&[[1.0, 0.5], [0.5, 1.0]]).unwrap()
        );
        let det = log_det_pd(&ar_covariance(3, 0.5).unwrap()).unwrap().exp();
        assert!((det - 0.5).abs() < 1e-14);
        assert!(ar_covariance(3, 1.0).is_err());
        assert!(ar_covariance(3, -0.2).is_err());
    }

    #[test]
    fn mvn_standard_normal_moments() {
        let mut rng = seeding::stream(11);
        let x = sample_mvn(&[0.0, 0.0, 0.0], &SquareMatrix::identity(3), 10_000, &mut rng).unwrap();
        for m in sample_mean(&x) {
            assert!(m.abs() < 4.0 / 100.0, "mean {m}");
        }
    }

    #[test]
    fn mvn_scaled_variance() {
        let mut rng = seeding::stream(12);
        let x = sample_mvn(&[0.0, 0.0], &SquareMatrix::diagonal(&[4.0, 4.0]), 10_000, &mut rng).unwrap();
        let c = sample_covariance(&x).unwrap();
        for j in 0..2 {
            assert!((3.6..=4.4).contains(&c.get(j, j)), "variance {}", c.get(j, j));
        }
    }

    #[test]
    fn mvn_is_deterministic_and_checks_input() {
        let s = ar_covariance(3, 0.3).unwrap();
        let a = sample_mvn(&[1.0, 2.0, 3.0], &s, 20, &mut seeding::stream(5)).unwrap();
        let b = sample_mvn(&[1.0, 2.0, 3.0], &s, 20, &mut seeding::stream(5)).unwrap();
        assert_eq!(a, b);
        assert!(sample_mvn(&[0.0; 2], &SquareMatrix::zeros(2), 5, &mut seeding::stream(5)).is_err());
        assert!(sample_mvn(&[0.0; 3], &SquareMatrix::identity(2), 5, &mut seeding::stream(5)).is_err());
    }

    #[test]
    fn dataset_label_counts() {
        let clean = sample_dataset(&config(50, 3, 0.0)).unwrap();
        assert!(clean.labels.iter().all(|&l| l == 0));
        let ds = sample_dataset(&config(100, 4, 0.1)).unwrap();
        assert_eq!(ds.labels.iter().filter(|&&l| l == 1).count(), 10);
    }

    #[test]
    fn dataset_is_pure_function_of_config() {
        let a = sample_dataset(&config(80, 6, 0.15)).unwrap();
        let b = sample_dataset(&config(80, 6, 0.15)).unwrap();
        assert_eq!(a, b);
        let c = sample_dataset(&ContaminationConfig { seed: 8, ..config(80, 6, 0.15) }).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn dataset_rejects_invalid_config() {
        assert!(sample_dataset(&config(10, 2, 0.5)).is_err());
        assert!(sample_dataset(&ContaminationConfig { gamma: 0.0, ..config(10, 2, 0.1) }).is_err());
        assert!(sample_dataset(&ContaminationConfig { rho: 1.0, ..config(10, 2, 0.1) }).is_err());
        // round(0.49 * 1) = 0 outliers out of 1 row is fine
        assert!(sample_dataset(&config(1, 2, 0.49)).is_ok());
    }

    #[test]
    fn outliers_are_shifted() {
        let ds = sample_dataset(&ContaminationConfig { eta: 50.0, gamma: 1.0, ..config(200, 3, 0.1) }).unwrap();
        for (row, &label) in ds.data.rows().zip(&ds.labels) {
            let m = row.iter().sum::<f64>() / 3.0;
            assert_eq!(label == 1, m > 25.0);
        }
    }

    #[test]
    fn inlier_covariance_matches_ar_structure() {
        let cfg = ContaminationConfig { n: 100_000, p: 5, epsilon: 0.0, eta: 0.0, gamma: 1.0, rho: 0.5, seed: 3 };
        let ds = sample_dataset(&cfg).unwrap();
        let c = sample_covariance(&ds.data).unwrap();
        let target = ar_covariance(5, 0.5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((c.get(i, j) - target.get(i, j)).abs() < 0.02, "({i},{j}) = {}", c.get(i, j));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn exact_outlier_count(n in 1usize..400, eps in 0.0f64..0.499) {
            let cfg = ContaminationConfig { n, p: 2, epsilon: eps, eta: 1.0, gamma: 2.0, rho: 0.2, seed: n as u64 };
            let ds = sample_dataset(&cfg).unwrap();
            let expected = (eps * n as f64).round() as usize;
            prop_assert_eq!(ds.labels.iter().filter(|&&l| l == 1).count(), expected);
            prop_assert_eq!(ds.labels.len(), n);
        }
    }
}
