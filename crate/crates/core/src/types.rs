use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{dual_index, lp_norm};

pub type Vector = DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;

/// `x ↦ sgn(w'x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub w: Vector,
    pub b: f64,
}

impl LinearClassifier {
    pub fn new(w: Vector, b: f64) -> Result<Self> {
        if w.iter().all(|&v| v == 0.0) {
            return Err(Error::invalid("w", "slope must be non-zero"));
        }
        if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("w, b", "must be finite"));
        }
        Ok(Self { w, b })
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.b
    }

    /// Multiplying `(w, b)` by `c > 0` leaves every 0-1 loss unchanged.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            w: &self.w * c,
            b: self.b * c,
        }
    }
}

/// ℓp perturbation of radius ε; `q` is the dual index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbSpec {
    #[serde(with = "norm_index")]
    pub p: f64,
    #[serde(with = "norm_index")]
    pub q: f64,
    pub epsilon: f64,
    /// When set, `ε ≤ (κ/2)‖θ⁺ − θ⁻‖_∞` is enforced by the solvers.
    pub kappa: Option<f64>,
}

impl PerturbSpec {
    pub fn new(p: f64, epsilon: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::invalid("p", format!("norm index must be in [1, ∞], got {p}")));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::invalid("epsilon", format!("radius must be finite and ≥ 0, got {epsilon}")));
        }
        Ok(Self {
            p,
            q: dual_index(p),
            epsilon,
            kappa: None,
        })
    }

    /// Same perturbation, parameterised by the dual index `q`.
    pub fn from_dual(q: f64, epsilon: f64) -> Result<Self> {
        if !(q >= 1.0) {
            return Err(Error::invalid("q", format!("dual index must be in [1, ∞], got {q}")));
        }
        Self::new(dual_index(q), epsilon)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::invalid("kappa", format!("must lie in (0, 1), got {kappa}")));
        }
        self.kappa = Some(kappa);
        Ok(self)
    }

    /// Checks the radius assumption when `kappa` is set; no-op otherwise.
    pub fn check_radius(&self, theta_bar: &[f64]) -> Result<()> {
        if let Some(kappa) = self.kappa {
            let limit = 0.5 * kappa * lp_norm(theta_bar, f64::INFINITY);
            if self.epsilon > limit {
                return Err(Error::invalid(
                    "epsilon",
                    format!("ε = {} exceeds (κ/2)‖θ̄‖∞ = {limit}", self.epsilon),
                ));
            }
        }
        Ok(())
    }

    /// `ε‖w‖_q`, the margin shift of the robust 0-1 loss for linear classifiers.
    pub fn margin_shift(&self, w: &[f64]) -> f64 {
        if self.epsilon == 0.0 {
            0.0
        } else {
            self.epsilon * lp_norm(w, self.q)
        }
    }
}

/// Serde for a norm index that may be `f64::INFINITY`, written as `"inf"`
/// since JSON has no infinity.
pub mod norm_index {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(p) => Ok(p),
            Repr::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Inf" | "∞") => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    MonteCarlo,
}

/// Class-wise standard losses of one classifier, the imbalance-weighted
/// overall loss and the accuracy disparity `AD = acc⁻ − acc⁺ = ℓ⁺ − ℓ⁻`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub loss_plus: f64,
    pub loss_minus: f64,
    pub acc_plus: f64,
    pub acc_minus: f64,
    pub overall_std_loss: f64,
    pub ad: f64,
    /// Class-wise robust losses `(ℓ⁺_rob, ℓ⁻_rob)` when a perturbation was supplied.
    pub robust: Option<(f64, f64)>,
    pub imbalance: f64,
    pub provenance: Provenance,
}

impl LossReport {
    pub fn from_class_losses(loss_plus: f64, loss_minus: f64, imbalance: f64, provenance: Provenance) -> Self {
        let r = imbalance;
        Self {
            loss_plus,
            loss_minus,
            acc_plus: 1.0 - loss_plus,
            acc_minus: 1.0 - loss_minus,
            overall_std_loss: (r * loss_minus + loss_plus) / (r + 1.0),
            ad: loss_plus - loss_minus,
            robust: None,
            imbalance,
            provenance,
        }
    }

    pub fn with_robust(mut self, plus: f64, minus: f64) -> Self {
        self.robust = Some((plus, minus));
        self
    }

    /// Imbalance-weighted robust loss, if robust losses are present.
    pub fn overall_robust_loss(&self) -> Option<f64> {
        let r = self.imbalance;
        self.robust.map(|(p, m)| (r * m + p) / (r + 1.0))
    }
}

pub(crate) fn check_imbalance(r: f64) -> Result<()> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::invalid("imbalance", format!("R must be finite and ≥ 1, got {r}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_slope_is_rejected() {
        assert!(LinearClassifier::new(Vector::zeros(3), 0.0).is_err());
    }

    #[test]
    fn loss_report_identities() {
        let rep = LossReport::from_class_losses(0.3, 0.1, 3.0, Provenance::ClosedForm);
        assert!((rep.ad - (rep.acc_minus - rep.acc_plus)).abs() < 1e-15);
        assert!((rep.overall_std_loss - (3.0 * 0.1 + 0.3) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn radius_assumption() {
        let pert = PerturbSpec::new(f64::INFINITY, 0.3).unwrap().with_kappa(0.5).unwrap();
        assert!(pert.check_radius(&[1.0, -2.0]).is_ok());
        assert!(pert.check_radius(&[1.0, 0.5]).is_err());
        assert_eq!(pert.q, 1.0);
    }

    #[test]
    fn infinite_index_round_trips() {
        let pert = PerturbSpec::new(1.0, 0.25).unwrap();
        let text = serde_json::to_string(&pert).unwrap();
        assert!(text.contains("\"q\":\"inf\""));
        assert_eq!(serde_json::from_str::<PerturbSpec>(&text).unwrap(), pert);
    }
}
