use serde::{Deserialize, Serialize};

use super::{check_alpha, SasParams};
use crate::error::{Error, Result};
use crate::types::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SasKind {
    /// Independent coordinates `X_i ~ SαS(α, c_i, θ_i)`.
    IndependentComponents { location: Vector, scales: Vector },
    /// Characteristic function `exp(i t'θ − (t'Σt)^{α/2})`.
    EllipticallyContoured { location: Vector, shape: Matrix },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariateSas {
    pub alpha: f64,
    pub kind: SasKind,
}

impl MultivariateSas {
    pub fn independent(alpha: f64, location: Vector, scales: Vector) -> Result<Self> {
        check_alpha(alpha)?;
        if scales.len() != location.len() {
            return Err(Error::invalid("scales", "length must match the location"));
        }
        if scales.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(Error::invalid("scales", "every coordinate scale must be finite and > 0"));
        }
        Ok(Self {
            alpha,
            kind: SasKind::IndependentComponents { location, scales },
        })
    }

    /// Unit coordinate scales.
    pub fn independent_unit(alpha: f64, location: Vector) -> Result<Self> {
        let d = location.len();
        Self::independent(alpha, location, Vector::from_element(d, 1.0))
    }

    pub fn elliptical(alpha: f64, location: Vector, shape: Matrix) -> Result<Self> {
        check_alpha(alpha)?;
        let d = location.len();
        if shape.nrows() != d || shape.ncols() != d {
            return Err(Error::invalid("shape", format!("must be {d}×{d}")));
        }
        let asym = (&shape - shape.transpose()).amax();
        if asym > 1e-12 * shape.amax().max(1.0) {
            return Err(Error::invalid("shape", "must be symmetric"));
        }
        let min_eig = shape.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -1e-12 * shape.amax().max(1.0) {
            return Err(Error::NotPsd { min_eigenvalue: min_eig });
        }
        Ok(Self {
            alpha,
            kind: SasKind::EllipticallyContoured { location, shape },
        })
    }

    pub fn location(&self) -> &Vector {
        match &self.kind {
            SasKind::IndependentComponents { location, .. } | SasKind::EllipticallyContoured { location, .. } => location,
        }
    }

    pub fn dim(&self) -> usize {
        self.location().len()
    }

    /// Scale of `w'X`: `(Σ|c_i w_i|^α)^{1/α}` or `√(w'Σw)`.
    pub fn projected_scale(&self, w: &Vector) -> f64 {
        match &self.kind {
            SasKind::IndependentComponents { scales, .. } => {
                let cw: Vec<f64> = scales.iter().zip(w.iter()).map(|(c, x)| c * x).collect();
                crate::norms::lp_norm(&cw, self.alpha)
            }
            SasKind::EllipticallyContoured { shape, .. } => shape.dot(&(w * w.transpose())).max(0.0).sqrt(),
        }
    }

    /// The same law with a different location.
    pub fn with_location(&self, location: Vector) -> Self {
        let kind = match &self.kind {
            SasKind::IndependentComponents { scales, .. } => SasKind::IndependentComponents {
                location,
                scales: scales.clone(),
            },
            SasKind::EllipticallyContoured { shape, .. } => SasKind::EllipticallyContoured {
                location,
                shape: shape.clone(),
            },
        };
        Self { alpha: self.alpha, kind }
    }
}

/// Exact law of `w'X + b`. A zero scale (point mass) is reported as
/// [`Error::DegenerateScale`] carrying the atom.
pub fn linear_pushforward(mv: &MultivariateSas, w: &Vector, b: f64) -> Result<SasParams> {
    if w.len() != mv.dim() {
        return Err(Error::invalid("w", format!("expected length {}, got {}", mv.dim(), w.len())));
    }
    let location = w.dot(mv.location()) + b;
    let scale = mv.projected_scale(w);
    if scale == 0.0 {
        return Err(Error::DegenerateScale { location });
    }
    SasParams::new(mv.alpha, scale, location)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    #[test]
    fn ic_gaussian_scale_is_l2() {
        let mv = MultivariateSas::independent_unit(2.0, v(&[0.0, 0.0])).unwrap();
        let p = linear_pushforward(&mv, &v(&[3.0, 4.0]), 0.0).unwrap();
        assert_eq!((p.alpha, p.scale, p.location), (2.0, 5.0, 0.0));
    }

    #[test]
    fn ic_cauchy_scale_is_l1() {
        let mv = MultivariateSas::independent_unit(1.0, v(&[1.0, -1.0])).unwrap();
        let p = linear_pushforward(&mv, &v(&[1.0, 1.0]), 2.0).unwrap();
        assert_eq!((p.scale, p.location), (2.0, 2.0));
    }

    #[test]
    fn ec_quadratic_form_scale() {
        let shape = Matrix::from_diagonal(&v(&[4.0, 1.0]));
        let mv = MultivariateSas::elliptical(1.5, v(&[0.0, 0.0]), shape).unwrap();
        let p = linear_pushforward(&mv, &v(&[1.0, 1.0]), 0.0).unwrap();
        assert!((p.scale - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn singular_direction_is_degenerate() {
        let shape = Matrix::from_diagonal(&v(&[1.0, 0.0]));
        let mv = MultivariateSas::elliptical(1.5, v(&[0.0, 2.0]), shape).unwrap();
        match linear_pushforward(&mv, &v(&[0.0, 1.0]), 1.0) {
            Err(Error::DegenerateScale { location }) => assert_eq!(location, 3.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation() {
        assert!(MultivariateSas::independent(1.5, v(&[0.0]), v(&[0.0])).is_err());
        let bad = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            MultivariateSas::elliptical(1.5, v(&[0.0, 0.0]), bad),
            Err(Error::NotPsd { .. })
        ));
    }
}
