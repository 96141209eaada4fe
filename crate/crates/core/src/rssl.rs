//! Random subspace outlier detection.
//!
//! Both regimes start from the same ensemble: `B` bootstrap resamples of the
//! observations, each paired with `d` variables drawn without replacement,
//! scored by the log-determinant of the restricted covariance.
//!
//! * Low-dimensional (`p < n/2`, [`fit_ld`]): the resample with the smallest
//!   determinant supplies location and scatter over all `p` variables, and
//!   the cutoff is `χ²_p(1-α)`.
//! * High-dimensional (`n < p`, [`fit_hd`]): the `k` smallest-determinant
//!   resamples vote for variables; the best resample is then restricted to
//!   the `j = 2..m` most-voted variables and the `j` with the *largest*
//!   determinant fixes the subspace. Distances and the `χ²_ν` cutoff live in
//!   that `ν`-dimensional subspace.
//!
//! Every resample owns a ChaCha stream derived from `(seed, b)`, so scores do
//! not depend on how the ensemble is scheduled across threads.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{chi2_quantile, subset_moments, Cholesky, DataMatrix, RobustEstimate};
use crate::seeding;

/// How nested-scan determinants are compared across dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanCriterion {
    /// Raw log-determinant.
    #[default]
    Raw,
    /// Log-determinant divided by the dimension (log geometric-mean eigenvalue).
    PerDimension,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsslConfig {
    /// Ensemble size.
    pub b: usize,
    /// Subspace dimension; 0 selects [`default_subspace_dim`].
    pub d: usize,
    /// Fraction of the ensemble kept for variable voting, in `[0.3, 0.8]`.
    pub k_fraction: f64,
    /// Largest dimension tried by the nested determinant scan.
    pub m: usize,
    /// Tail probability of the χ² cutoff.
    pub alpha: f64,
    pub seed: u64,
    pub scan: ScanCriterion,
}

impl Default for RsslConfig {
    fn default() -> Self {
        Self { b: 450, d: 0, k_fraction: 0.5, m: 20, alpha: 0.05, seed: 0, scan: ScanCriterion::Raw }
    }
}

impl RsslConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b == 0 {
            return Err(Error::Config("ensemble size B must be at least 1".into()));
        }
        if !(0.3..=0.8).contains(&self.k_fraction) {
            return Err(Error::Config(format!("k_fraction must lie in [0.3, 0.8], got {}", self.k_fraction)));
        }
        if self.m < 2 {
            return Err(Error::Config(format!("m must be at least 2, got {}", self.m)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    /// Subspace dimension after defaulting, checked against `2 <= d <= min(n-2, p)`.
    pub fn subspace_dim(&self, n: usize, p: usize) -> Result<usize> {
        let limit = n.saturating_sub(2).min(p);
        let d = if self.d == 0 { default_subspace_dim(n, p).min(limit) } else { self.d };
        if d < 2 || d > limit {
            return Err(Error::Config(format!(
                "subspace dimension d={d} must satisfy 2 <= d <= min(n-2, p) = {limit}"
            )));
        }
        Ok(d)
    }
}

/// One ensemble member.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleScore {
    /// Position `b` in the ensemble; the tie-breaker for every selection.
    pub index: usize,
    /// `n` row indices drawn with replacement.
    pub obs_indices: Vec<usize>,
    /// `d` sorted distinct column indices.
    pub var_indices: Vec<usize>,
    /// `None` when the restricted covariance is not positive definite.
    pub log_det: Option<f64>,
}

impl SubsampleScore {
    pub fn is_degenerate(&self) -> bool {
        self.log_det.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    pub counts: Vec<usize>,
    /// All variable indices by descending count, ties by ascending index.
    pub order: Vec<usize>,
}

impl FrequencyTable {
    /// Variables that received at least one vote.
    pub fn voted(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub nu: usize,
    /// The `ν` selected variables, sorted ascending.
    pub variables: Vec<usize>,
    /// `(j, criterion value)` for every `j` tried; `None` marks a degenerate `j`.
    pub curve: Vec<(usize, Option<f64>)>,
}

#[derive(Debug, Clone)]
pub struct DetectionResult {
    pub estimate: RobustEstimate,
    /// Squared robust distances of every observation.
    pub distances: Vec<f64>,
    pub cutoff: f64,
    /// 1 iff the distance exceeds the cutoff.
    pub labels: Vec<u8>,
}

impl DetectionResult {
    pub fn flagged(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }
}

/// Intermediate stages of [`fit_hd`].
#[derive(Debug, Clone)]
pub struct HdTrace {
    pub scores: Vec<SubsampleScore>,
    pub kept: usize,
    pub frequencies: FrequencyTable,
    pub scan: ScanResult,
    /// Ensemble index of the best resample.
    pub winner: usize,
}

/// `max(2, ⌊min(n/5, √p)⌋)`.
pub fn default_subspace_dim(n: usize, p: usize) -> usize {
    let rule = (n as f64 / 5.0).min((p as f64).sqrt()).floor() as usize;
    rule.max(2)
}

fn restricted_log_det(x: &DataMatrix, rows: &[usize], cols: &[usize]) -> Option<f64> {
    let (_, cov) = subset_moments(x, rows, cols).ok()?;
    Cholesky::factor(&cov).ok().map(|c| c.log_det())
}

pub fn score_subsamples(x: &DataMatrix, config: &RsslConfig) -> Result<Vec<SubsampleScore>> {
    config.validate()?;
    let (n, p) = (x.nrows(), x.ncols());
    let d = config.subspace_dim(n, p)?;
    Ok((0..config.b)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeding::sub_stream(config.seed, &[b as u64]);
            let obs_indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut var_indices = index::sample(&mut rng, p, d).into_vec();
            var_indices.sort_unstable();
            let log_det = restricted_log_det(x, &obs_indices, &var_indices);
            SubsampleScore { index: b, obs_indices, var_indices, log_det }
        })
        .collect())
}

fn by_log_det(a: &&SubsampleScore, b: &&SubsampleScore) -> std::cmp::Ordering {
    let (x, y) = (a.log_det.unwrap(), b.log_det.unwrap());
    x.total_cmp(&y).then(a.index.cmp(&b.index))
}

/// Non-degenerate scores in ascending log-determinant order, cut at
/// `⌈k_fraction · B⌉` (or fewer when not enough are available).
pub fn select_top_k(scores: &[SubsampleScore], k_fraction: f64) -> Result<Vec<&SubsampleScore>> {
    if !(k_fraction > 0.0 && k_fraction <= 1.0) {
        return Err(Error::Config(format!("k_fraction must lie in (0, 1], got {k_fraction}")));
    }
    let mut usable: Vec<&SubsampleScore> = scores.iter().filter(|s| !s.is_degenerate()).collect();
    if usable.is_empty() {
        return Err(Error::EstimationFailed(format!("all {} subsamples are degenerate", scores.len())));
    }
    usable.sort_by(by_log_det);
    // guard against 0.8 * 450 = 360.00000000000006
    let k = ((k_fraction * scores.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    usable.truncate(k);
    Ok(usable)
}

pub fn variable_frequencies(top: &[&SubsampleScore], p: usize) -> FrequencyTable {
    let mut counts = vec![0usize; p];
    for score in top {
        for &j in &score.var_indices {
            counts[j] += 1;
        }
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    FrequencyTable { counts, order }
}

/// Restricts the winner's observations to the `j` most frequent variables for
/// `j = 2..=m` (with `m` clamped to the number of voted variables) and keeps
/// the `j` whose covariance has the largest determinant. Ties go to the
/// smaller `j`; degenerate `j` are skipped.
pub fn nested_det_scan(
    x: &DataMatrix,
    winner: &SubsampleScore,
    frequencies: &FrequencyTable,
    m: usize,
    criterion: ScanCriterion,
) -> Result<ScanResult> {
    let m = m.min(frequencies.voted());
    if m < 2 {
        return Err(Error::EstimationFailed(format!(
            "nested scan needs at least 2 voted variables, have {m}"
        )));
    }
    let curve: Vec<(usize, Option<f64>)> = (2..=m)
        .map(|j| {
            let value = restricted_log_det(x, &winner.obs_indices, &frequencies.order[..j]).map(|ld| match criterion {
                ScanCriterion::Raw => ld,
                ScanCriterion::PerDimension => ld / j as f64,
            });
            (j, value)
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for &(j, value) in &curve {
        if let Some(v) = value {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
    }
    let (nu, _) = best.ok_or_else(|| {
        Error::EstimationFailed(format!("every nested subspace of dimension 2..={m} is degenerate"))
    })?;
    let mut variables = frequencies.order[..nu].to_vec();
    variables.sort_unstable();
    Ok(ScanResult { nu, variables, curve })
}

pub fn cutoff(df: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    chi2_quantile(df, 1.0 - alpha)
}

/// Label 1 iff the distance exceeds `χ²_df(1-α)`.
pub fn classify(distances: &[f64], df: usize, alpha: f64) -> Result<Vec<u8>> {
    let c = cutoff(df, alpha)?;
    Ok(label(distances, c))
}

fn label(distances: &[f64], cutoff: f64) -> Vec<u8> {
    distances.iter().map(|&d| u8::from(d > cutoff)).collect()
}

fn estimate_on(x: &DataMatrix, rows: &[usize], cols: Vec<usize>) -> Result<RobustEstimate> {
    let (location, scatter) = subset_moments(x, rows, &cols)?;
    RobustEstimate::new(location, scatter, cols, x.ncols()).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => {
            Error::EstimationFailed(format!("robust scatter of the selected subsample is singular ({e})"))
        }
        other => other,
    })
}

fn detect(x: &DataMatrix, estimate: RobustEstimate, alpha: f64) -> Result<DetectionResult> {
    let distances = estimate.distances(x)?;
    let cutoff = cutoff(estimate.df, alpha)?;
    let labels = label(&distances, cutoff);
    Ok(DetectionResult { estimate, distances, cutoff, labels })
}

/// Detector for the `p < n/2` regime.
pub fn fit_ld(x: &DataMatrix, config: &RsslConfig) -> Result<DetectionResult> {
    let (n, p) = (x.nrows(), x.ncols());
    if 2 * p >= n {
        return Err(Error::Config(format!("low-dimensional detector needs p < n/2, got n={n}, p={p}")));
    }
    let scores = score_subsamples(x, config)?;
    let winner = scores
        .iter()
        .filter(|s| !s.is_degenerate())
        .min_by(by_log_det)
        .ok_or_else(|| Error::EstimationFailed(format!("all {} subsamples are degenerate", scores.len())))?;
    let estimate = estimate_on(x, &winner.obs_indices, (0..p).collect())?;
    detect(x, estimate, config.alpha)
}

/// Detector for the `n < p` regime.
pub fn fit_hd(x: &DataMatrix, config: &RsslConfig) -> Result<DetectionResult> {
    fit_hd_traced(x, config).map(|(result, _)| result)
}

pub fn fit_hd_traced(x: &DataMatrix, config: &RsslConfig) -> Result<(DetectionResult, HdTrace)> {
    let (n, p) = (x.nrows(), x.ncols());
    if n >= p {
        return Err(Error::Config(format!("high-dimensional detector needs n < p, got n={n}, p={p}")));
    }
    let scores = score_subsamples(x, config)?;
    let top = select_top_k(&scores, config.k_fraction)?;
    let frequencies = variable_frequencies(&top, p);
    let winner = top[0];
    let scan = nested_det_scan(x, winner, &frequencies, config.m, config.scan)?;
    let estimate = estimate_on(x, &winner.obs_indices, scan.variables.clone())?;
    let result = detect(x, estimate, config.alpha)?;
    let trace = HdTrace { kept: top.len(), winner: winner.index, frequencies, scan, scores };
    Ok((result, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{sample_dataset, ContaminationConfig};

    fn score(index: usize, vars: Vec<usize>, log_det: Option<f64>) -> SubsampleScore {
        SubsampleScore { index, obs_indices: vec![0, 1], var_indices: vars, log_det }
    }

    #[test]
    fn default_dimension_rule() {
        assert_eq!(default_subspace_dim(100, 3000), 20);
        assert_eq!(default_subspace_dim(1500, 30), 5);
        assert_eq!(default_subspace_dim(10, 4), 2);
        assert_eq!(default_subspace_dim(100, 1000), 20);
    }

    #[test]
    fn config_validation() {
        assert!(RsslConfig::default().validate().is_ok());
        for bad in [
            RsslConfig { b: 0, ..Default::default() },
            RsslConfig { k_fraction: 0.9, ..Default::default() },
            RsslConfig { k_fraction: 0.2, ..Default::default() },
            RsslConfig { m: 1, ..Default::default() },
            RsslConfig { alpha: 0.0, ..Default::default() },
            RsslConfig { alpha: 1.0, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
        let explicit = RsslConfig { d: 9, ..Default::default() };
        assert!(explicit.subspace_dim(10, 50).is_err());
        assert_eq!(explicit.subspace_dim(11, 50).unwrap(), 9);
        assert!(RsslConfig { d: 1, ..Default::default() }.subspace_dim(100, 50).is_err());
    }

    #[test]
    fn degenerate_subsample_is_marked() {
        let x = DataMatrix::from_rows(&[[1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0]]).unwrap();
        let cfg = RsslConfig { b: 1, d: 2, ..Default::default() };
        // min(n-2, p) = 0 forbids any d for n = 2
        assert!(score_subsamples(&x, &cfg).is_err());
        let x = DataMatrix::new(6, 4, vec![2.5; 24]).unwrap();
        let scores = score_subsamples(&x, &cfg).unwrap();
        assert_eq!(scores.len(), 1);
        assert!(scores[0].is_degenerate());
    }

    #[test]
    fn scores_are_well_formed_and_deterministic() {
        let ds = sample_dataset(&ContaminationConfig { n: 40, p: 60, epsilon: 0.1, eta: 3.0, gamma: 3.0, rho: 0.1, seed: 2 })
            .unwrap();
        let cfg = RsslConfig { b: 30, seed: 5, ..Default::default() };
        let a = score_subsamples(&ds.data, &cfg).unwrap();
        let d = cfg.subspace_dim(40, 60).unwrap();
        for (b, s) in a.iter().enumerate() {
            assert_eq!(s.index, b);
            assert_eq!(s.obs_indices.len(), 40);
            assert!(s.obs_indices.iter().all(|&i| i < 40));
            assert_eq!(s.var_indices.len(), d);
            assert!(s.var_indices.windows(2).all(|w| w[0] < w[1]));
            assert!(s.var_indices.iter().all(|&j| j < 60));
        }
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = single.install(|| score_subsamples(&ds.data, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn top_k_sorts_and_skips_degenerate() {
        let scores = vec![
            score(0, vec![0, 1], Some(3.0)),
            score(1, vec![0, 1], Some(1.0)),
            score(2, vec![0, 1], Some(2.0)),
            score(3, vec![0, 1], None),
        ];
        let top = select_top_k(&scores, 0.5).unwrap();
        assert_eq!(top.iter().map(|s| s.index).collect::<Vec<_>>(), vec![1, 2]);
        // more requested than usable
        assert_eq!(select_top_k(&scores, 1.0).unwrap().len(), 3);
        let all_bad = vec![score(0, vec![0, 1], None)];
        assert!(matches!(select_top_k(&all_bad, 0.5), Err(Error::EstimationFailed(_))));
    }

    #[test]
    fn top_k_count_and_ties() {
        let flat: Vec<SubsampleScore> = (0..450).map(|b| score(b, vec![0, 1], Some(0.25))).collect();
        let top = select_top_k(&flat, 0.8).unwrap();
        assert_eq!(top.len(), 360);
        assert!(top.iter().enumerate().all(|(i, s)| s.index == i));
        assert_eq!(select_top_k(&flat, 0.3).unwrap().len(), 135);
    }

    #[test]
    fn frequencies_count_votes() {
        let one = score(0, vec![2, 5], Some(0.0));
        let t = variable_frequencies(&[&one], 7);
        assert_eq!(t.counts, vec![0, 0, 1, 0, 0, 1, 0]);
        assert_eq!(&t.order[..2], &[2, 5]);

        let a = score(0, vec![1, 2], Some(0.0));
        let b = score(1, vec![2, 3], Some(0.0));
        let t = variable_frequencies(&[&a, &b], 5);
        assert_eq!(t.order, vec![2, 1, 3, 0, 4]);
        assert_eq!(t.counts.iter().sum::<usize>(), 2 * 2);
        assert_eq!(t.voted(), 3);
    }

    /// Columns 0 and 1 have unit variance, the rest variance 1e-6.
    fn tiny_variance_data() -> DataMatrix {
        let mut rng = seeding::stream(17);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| {
                (0..6)
                    .map(|j| {
                        let z: f64 = rng.sample(rand_distr::StandardNormal);
                        if j < 2 { z } else { z * 1e-3 }
                    })
                    .collect()
            })
            .collect();
        DataMatrix::from_rows(&rows).unwrap()
    }

    fn freq_in_order(p: usize) -> FrequencyTable {
        FrequencyTable { counts: (0..p).map(|j| p - j).collect(), order: (0..p).collect() }
    }

    #[test]
    fn scan_stops_before_tiny_variance_columns() {
        let x = tiny_variance_data();
        let winner = SubsampleScore { index: 0, obs_indices: (0..60).collect(), var_indices: vec![0, 1], log_det: Some(0.0) };
        let scan = nested_det_scan(&x, &winner, &freq_in_order(6), 4, ScanCriterion::Raw).unwrap();
        // direct check: each extra column multiplies the determinant by ~1e-6
        let ld2 = restricted_log_det(&x, &winner.obs_indices, &[0, 1]).unwrap();
        let ld3 = restricted_log_det(&x, &winner.obs_indices, &[0, 1, 2]).unwrap();
        assert!(ld3 < ld2 - 10.0);
        assert_eq!(scan.nu, 2);
        assert_eq!(scan.variables, vec![0, 1]);
        assert_eq!(scan.curve.len(), 3);
    }

    #[test]
    fn scan_with_single_candidate() {
        let x = tiny_variance_data();
        let winner = SubsampleScore { index: 0, obs_indices: (0..60).collect(), var_indices: vec![0, 1], log_det: Some(0.0) };
        let scan = nested_det_scan(&x, &winner, &freq_in_order(6), 2, ScanCriterion::Raw).unwrap();
        assert_eq!(scan.nu, 2);
    }

    #[test]
    fn scan_skips_degenerate_dimensions() {
        // column 3 is constant, so j=4 is singular; column 2 has variance 100 so j=3 wins
        let mut rng = seeding::stream(3);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| {
                let a: f64 = rng.sample(rand_distr::StandardNormal);
                let b: f64 = rng.sample(rand_distr::StandardNormal);
                let c: f64 = rng.sample(rand_distr::StandardNormal);
                vec![a, b, 10.0 * c, 1.0]
            })
            .collect();
        let x = DataMatrix::from_rows(&rows).unwrap();
        let winner = SubsampleScore { index: 0, obs_indices: (0..30).collect(), var_indices: vec![0, 1], log_det: Some(0.0) };
        let scan = nested_det_scan(&x, &winner, &freq_in_order(4), 4, ScanCriterion::Raw).unwrap();
        assert_eq!(scan.nu, 3);
        assert_eq!(scan.variables, vec![0, 1, 2]);
        assert!(scan.curve[0].1.is_some() && scan.curve[1].1.is_some());
        assert_eq!(scan.curve[2], (4, None));

        let constant = DataMatrix::new(30, 4, vec![1.0; 120]).unwrap();
        assert!(matches!(
            nested_det_scan(&constant, &winner, &freq_in_order(4), 4, ScanCriterion::Raw),
            Err(Error::EstimationFailed(_))
        ));
        let one_vote = FrequencyTable { counts: vec![1, 0, 0, 0], order: vec![0, 1, 2, 3] };
        assert!(nested_det_scan(&x, &winner, &one_vote, 4, ScanCriterion::Raw).is_err());
    }

    #[test]
    fn per_dimension_criterion_divides_by_j() {
        let x = tiny_variance_data();
        let winner = SubsampleScore { index: 0, obs_indices: (0..60).collect(), var_indices: vec![0, 1], log_det: Some(0.0) };
        let raw = nested_det_scan(&x, &winner, &freq_in_order(6), 4, ScanCriterion::Raw).unwrap();
        let norm = nested_det_scan(&x, &winner, &freq_in_order(6), 4, ScanCriterion::PerDimension).unwrap();
        for (r, n) in raw.curve.iter().zip(&norm.curve) {
            assert!((r.1.unwrap() / r.0 as f64 - n.1.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&[0.0, 100.0], 2, 0.05).unwrap(), vec![0, 1]);
        assert!((cutoff(2, 0.05).unwrap() - 5.991_464_547_107_979).abs() < 1e-9);
        assert_eq!(classify(&[0.0; 5], 3, 0.05).unwrap(), vec![0; 5]);
        assert_eq!(classify(&[1e-3, 0.5, 2.0], 2, 0.999_999).unwrap(), vec![1, 1, 1]);
        assert!(classify(&[1.0], 2, 0.0).is_err());
    }

    #[test]
    fn raising_alpha_never_unflags() {
        let distances: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
        let mut previous = vec![0u8; distances.len()];
        for alpha in [0.001, 0.01, 0.05, 0.1, 0.2, 0.5, 0.9] {
            let labels = classify(&distances, 4, alpha).unwrap();
            assert!(previous.iter().zip(&labels).all(|(&a, &b)| b >= a));
            previous = labels;
        }
    }

    #[test]
    fn regime_preconditions() {
        let wide = DataMatrix::new(10, 20, (0..200).map(|v| v as f64).collect()).unwrap();
        assert!(matches!(fit_ld(&wide, &RsslConfig::default()), Err(Error::Config(_))));
        let tall = DataMatrix::new(30, 5, (0..150).map(|v| (v * 7 % 13) as f64).collect()).unwrap();
        assert!(matches!(fit_hd(&tall, &RsslConfig::default()), Err(Error::Config(_))));
    }

    #[test]
    fn ld_duplicated_rows_fail() {
        let x = DataMatrix::new(50, 3, [1.0, -2.0, 0.5].repeat(50)).unwrap();
        let cfg = RsslConfig { b: 20, ..Default::default() };
        assert!(matches!(fit_ld(&x, &cfg), Err(Error::EstimationFailed(_))));
    }

    #[test]
    fn permuting_scores_keeps_selection() {
        let ds = sample_dataset(&ContaminationConfig { n: 50, p: 200, epsilon: 0.1, eta: 5.0, gamma: 5.0, rho: 0.1, seed: 8 })
            .unwrap();
        let cfg = RsslConfig { b: 60, seed: 1, ..Default::default() };
        let mut scores = score_subsamples(&ds.data, &cfg).unwrap();
        let base: Vec<usize> = select_top_k(&scores, 0.5).unwrap().iter().map(|s| s.index).collect();
        let base_freq = variable_frequencies(&select_top_k(&scores, 0.5).unwrap(), 200);
        scores.reverse();
        scores.rotate_left(17);
        let moved: Vec<usize> = select_top_k(&scores, 0.5).unwrap().iter().map(|s| s.index).collect();
        assert_eq!(base, moved);
        assert_eq!(base_freq, variable_frequencies(&select_top_k(&scores, 0.5).unwrap(), 200));
    }

    #[test]
    fn hd_trace_is_consistent() {
        let ds = sample_dataset(&ContaminationConfig { n: 60, p: 300, epsilon: 0.1, eta: 5.0, gamma: 5.0, rho: 0.1, seed: 4 })
            .unwrap();
        let cfg = RsslConfig { b: 100, seed: 3, ..Default::default() };
        let (result, trace) = fit_hd_traced(&ds.data, &cfg).unwrap();
        assert_eq!(trace.kept, 50);
        assert_eq!(trace.frequencies.counts.iter().sum::<usize>(), 50 * cfg.subspace_dim(60, 300).unwrap());
        assert_eq!(result.estimate.df, trace.scan.nu);
        assert_eq!(result.estimate.variables, trace.scan.variables);
        assert_eq!(result.distances.len(), 60);
        for (d, l) in result.distances.iter().zip(&result.labels) {
            assert_eq!(*l == 1, *d > result.cutoff);
        }
    }
}
