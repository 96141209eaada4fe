//! Robust random-subspace outlier detection.
//!
//! * [`linalg`]: covariance, Cholesky, Mahalanobis distances, χ² quantiles.
//! * [`sim`]: contaminated Gaussian simulator and its CSV format.
//! * [`mcd`]: Minimum Covariance Determinant via concentration steps.
//! * [`rssl`]: the random-subspace estimator in its low- and high-dimensional forms.
//! * [`detector`]: detectors behind a trait, looked up by name.
//! * [`bench`]: Monte-Carlo benchmark harness and report formats.
//! * [`cli`]: the `rssl` command-line front end.

pub mod bench;
pub mod cli;
pub mod detector;
pub mod error;
pub mod linalg;
pub mod mcd;
pub mod rssl;
pub mod seeding;
pub mod sim;

pub use detector::{Detector, DetectorParams, DetectorRegistry, Mode};
pub use error::{Error, Result};
pub use linalg::{DataMatrix, RobustEstimate, SquareMatrix};
pub use rssl::{fit_hd, fit_ld, DetectionResult, RsslConfig};
pub use sim::{sample_dataset, ContaminationConfig, SimulatedDataset};
