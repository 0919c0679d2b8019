//! Closed-form theory and Monte-Carlo checks for how adversarial robustness
//! changes per-class accuracy of linear classifiers on Gaussian and
//! symmetric α-stable mixtures, plus the ridge-regression group-disparity
//! analysis.

pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod monte_carlo;
pub mod norms;
pub mod prox;
pub mod quadrature;
pub mod ridge;
pub mod rng;
pub mod stable_dist;
pub mod stable_theory;
pub mod types;

pub use error::{Error, Result};
pub use quadrature::QuadratureOptions;
pub use rng::{seeded, sub_seed, SeededRng};
pub use stable_dist::{MultivariateSas, SasKind, SasParams};
pub use types::{LinearClassifier, LossReport, Matrix, PerturbSpec, Provenance, Vector};
