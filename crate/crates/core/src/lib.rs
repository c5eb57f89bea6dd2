//! Rank aggregation by completing a skew-symmetric pairwise comparison matrix.
//!
//! Ratings are turned into an aggregate comparison matrix `Y` (item `i`
//! versus item `j`), low-support entries are dropped, and the rest are
//! completed to a rank-2 skew-symmetric matrix by singular value projection.
//! An exact comparison matrix has the form `Y = s e^T - e s^T`, so the item
//! scores are read back as `s = (1/n) X e`.
//!
//! ```
//! use skewrank::aggregation::{aggregate, filter_support, Method};
//! use skewrank::ratings::RatingsMatrix;
//! use skewrank::scoring::extract_scores;
//! use skewrank::solver::{svp_complete, SolverConfig};
//!
//! let ratings = RatingsMatrix::from_dense(&[
//!     vec![Some(5.0), Some(3.0), Some(1.0)],
//!     vec![Some(4.0), None, Some(2.0)],
//! ])
//! .unwrap();
//! let y = aggregate(&ratings, Method::ArithmeticMean).unwrap();
//! let samples = filter_support(&y, 1).samples;
//! let outcome = svp_complete(&samples, &SolverConfig::default()).unwrap();
//! let scores = extract_scores(&outcome.factors);
//! assert!(scores.scores()[0] > scores.scores()[1]);
//! assert!(scores.scores()[1] > scores.scores()[2]);
//! ```

pub mod aggregation;
pub mod analysis;
pub mod error;
pub mod experiments;
pub mod io;
pub mod pipeline;
pub mod linalg;
pub mod ratings;
pub mod sample;
pub mod scoring;
pub mod solver;
pub mod svd;

pub use error::{Error, Result};
