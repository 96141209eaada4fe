//! Minimum Covariance Determinant via concentration steps with random restarts.
//!
//! Each start draws a random elemental subset of `p+1` rows (grown one row at
//! a time while its covariance is singular), keeps the `h` observations
//! closest to it, and then repeatedly replaces that subset with the `h`
//! observations closest to the subset's own mean and covariance. The
//! determinant never increases along that sequence; the best local minimum
//! over all starts is returned. No reweighting and no FAST-MCD nesting.

use rand::seq::index;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{subset_moments, Cholesky, DataMatrix, RobustEstimate};
use crate::seeding;

#[derive(Debug, Clone, PartialEq)]
pub struct McdConfig {
    /// Subset size; `None` selects [`default_h`].
    pub h: Option<usize>,
    pub n_starts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for McdConfig {
    fn default() -> Self {
        Self { h: None, n_starts: 10, max_iter: 100, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct McdResult {
    /// Location and scatter of the winning subset over all `p` variables.
    pub estimate: RobustEstimate,
    /// Sorted indices of the winning subset.
    pub h_indices: Vec<usize>,
    /// Log-determinant of the winning covariance.
    pub objective: f64,
    /// C-steps executed by the winning start.
    pub iterations: usize,
}

/// Trajectory of one start.
#[derive(Debug, Clone)]
pub struct Concentration {
    pub subset: Vec<usize>,
    /// Log-determinant before the first step and after every step.
    pub log_dets: Vec<f64>,
    pub iterations: usize,
}

const MIN_DECREASE: f64 = 1e-12;

/// `⌊(n+p+1)/2⌋` clamped into `[⌈n/2⌉, n-1]`.
pub fn default_h(n: usize, p: usize) -> usize {
    let lower = n.div_ceil(2);
    let upper = n.saturating_sub(1).max(lower);
    (n + p).div_ceil(2).clamp(lower, upper)
}

fn all_columns(x: &DataMatrix) -> Vec<usize> {
    (0..x.ncols()).collect()
}

fn subset_log_det(x: &DataMatrix, subset: &[usize], cols: &[usize]) -> Result<f64> {
    let (_, cov) = subset_moments(x, subset, cols)?;
    Ok(Cholesky::factor(&cov)?.log_det())
}

/// One concentration step: the `|H|` observations with the smallest squared
/// Mahalanobis distance under the mean and covariance of `H`. Ties go to the
/// lower index; the result is sorted.
pub fn c_step(x: &DataMatrix, subset: &[usize]) -> Result<Vec<usize>> {
    let h = subset.len();
    if h < 2 || h > x.nrows() {
        return Err(Error::Domain(format!("subset size {h} invalid for n={}", x.nrows())));
    }
    c_step_to(x, subset, h, &all_columns(x))
}

fn c_step_to(x: &DataMatrix, subset: &[usize], h: usize, cols: &[usize]) -> Result<Vec<usize>> {
    let (mean, cov) = subset_moments(x, subset, cols)?;
    let chol = Cholesky::factor(&cov)?;
    let mut diff = vec![0.0; cols.len()];
    let mut ranked: Vec<(f64, usize)> = x
        .rows()
        .enumerate()
        .map(|(i, row)| {
            for ((d, v), m) in diff.iter_mut().zip(row).zip(&mean) {
                *d = v - m;
            }
            (chol.quadratic_form_inv(&diff), i)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut next: Vec<usize> = ranked[..h].iter().map(|&(_, i)| i).collect();
    next.sort_unstable();
    Ok(next)
}

/// Iterates [`c_step`] from `start` until the subset is a fixed point, the
/// log-determinant decrease drops below `1e-12`, or `max_iter` steps ran.
pub fn concentrate(x: &DataMatrix, start: &[usize], max_iter: usize) -> Result<Concentration> {
    let cols = all_columns(x);
    let mut subset = start.to_vec();
    subset.sort_unstable();
    let mut current = subset_log_det(x, &subset, &cols)?;
    let mut log_dets = vec![current];
    let mut iterations = 0;
    while iterations < max_iter {
        let next = c_step(x, &subset)?;
        iterations += 1;
        if next == subset {
            break;
        }
        let value = subset_log_det(x, &next, &cols)?;
        log_dets.push(value);
        subset = next;
        let decrease = current - value;
        current = value;
        if decrease < MIN_DECREASE {
            break;
        }
    }
    Ok(Concentration { subset, log_dets, iterations })
}

fn check_h(n: usize, p: usize, h: usize) -> Result<()> {
    if 2 * h < n || h >= n {
        return Err(Error::Config(format!("subset size h={h} must satisfy n/2 <= h < n with n={n}")));
    }
    if p >= h {
        return Err(Error::Config(format!("MCD needs p < h, got p={p}, h={h}")));
    }
    Ok(())
}

pub fn mcd_fit(x: &DataMatrix, config: &McdConfig) -> Result<McdResult> {
    let (n, p) = (x.nrows(), x.ncols());
    if config.n_starts == 0 || config.max_iter == 0 {
        return Err(Error::Config("n_starts and max_iter must be at least 1".into()));
    }
    let h = config.h.unwrap_or_else(|| default_h(n, p));
    check_h(n, p, h)?;
    let starts: Vec<Vec<usize>> = (0..config.n_starts)
        .into_par_iter()
        .map(|s| elemental_start(x, h, &mut seeding::sub_stream(config.seed, &[s as u64])))
        .collect();
    mcd_fit_from_starts(x, &starts, config.max_iter)
}

/// `h` rows closest to a random `(p+1)`-subset. If no nonsingular subset of
/// at most `h` rows turns up, the first `h` drawn rows are returned as is.
pub fn elemental_start<R: rand::Rng + ?Sized>(x: &DataMatrix, h: usize, rng: &mut R) -> Vec<usize> {
    let (n, p) = (x.nrows(), x.ncols());
    let order = index::sample(rng, n, n).into_vec();
    let cols = all_columns(x);
    for size in (p + 1).min(h)..=h {
        if let Ok(next) = c_step_to(x, &order[..size], h, &cols) {
            return next;
        }
    }
    let mut fallback = order[..h].to_vec();
    fallback.sort_unstable();
    fallback
}

/// [`mcd_fit`] with caller-supplied initial subsets.
pub fn mcd_fit_from_starts(x: &DataMatrix, starts: &[Vec<usize>], max_iter: usize) -> Result<McdResult> {
    let (n, p) = (x.nrows(), x.ncols());
    let h = starts.first().map(Vec::len).ok_or_else(|| Error::Config("no starting subsets".into()))?;
    check_h(n, p, h)?;
    if starts.iter().any(|s| s.len() != h || s.iter().any(|&i| i >= n)) {
        return Err(Error::Config("starting subsets must share one size and index rows of x".into()));
    }

    let runs: Vec<Option<Concentration>> =
        starts.par_iter().map(|start| concentrate(x, start, max_iter).ok()).collect();

    // lowest start index wins ties
    let mut best: Option<&Concentration> = None;
    for run in runs.iter().flatten() {
        let value = *run.log_dets.last().expect("trajectory is never empty");
        if best.is_none_or(|b| value < *b.log_dets.last().unwrap()) {
            best = Some(run);
        }
    }
    let best = best.ok_or_else(|| {
        Error::EstimationFailed(format!("all {} MCD starts produced a singular covariance", starts.len()))
    })?;

    let cols = all_columns(x);
    let (location, scatter) = subset_moments(x, &best.subset, &cols)?;
    Ok(McdResult {
        estimate: RobustEstimate::new(location, scatter, cols, p)?,
        h_indices: best.subset.clone(),
        objective: *best.log_dets.last().unwrap(),
        iterations: best.iterations,
    })
}
