//! Symmetric α-stable (SαS) laws with characteristic function
//! `φ(t) = exp(itμ − |ct|^α)`: CDF by Fourier inversion, Chambers–Mallows–Stuck
//! sampling, and the closure of multivariate SαS laws under linear maps.
//!
//! Scale convention: `α = 2` is `N(μ, 2c²)`, `α = 1` is Cauchy with scale `c`.

mod cdf;
mod multivariate;
mod sample;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cdf::{sas_cdf, sas_cdf_generic, standard_cdf, standard_cdf_generic};
pub use multivariate::{linear_pushforward, MultivariateSas, SasKind};
pub use sample::{sas_ec_sample, sas_ic_sample, sas_sample, standard_sas_draw};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SasParams {
    pub alpha: f64,
    pub scale: f64,
    pub location: f64,
}

impl SasParams {
    pub fn new(alpha: f64, scale: f64, location: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::invalid("scale", format!("must be finite and > 0, got {scale}")));
        }
        if !location.is_finite() {
            return Err(Error::invalid("location", "must be finite"));
        }
        Ok(Self { alpha, scale, location })
    }

    pub fn standard(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0, 0.0)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::invalid("alpha", format!("tail index must lie in (0, 2], got {alpha}")));
    }
    Ok(())
}
