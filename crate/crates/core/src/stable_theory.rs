//! Optimal classifiers and class-wise losses for symmetric α-stable mixtures:
//! independent components with unit scales, the Cauchy imbalance analysis,
//! and elliptically-contoured laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{solve_robust, solve_standard, GaussianMixture, SolverOptions};
use crate::norms::{dual_index, lp_norm};
use crate::prox::solve_power_sum;
use crate::quadrature::QuadratureOptions;
use crate::stable_dist::{standard_cdf, MultivariateSas, SasKind};
use crate::types::{check_imbalance, LinearClassifier, LossReport, Matrix, PerturbSpec, Provenance, Vector};

/// Two SαS classes sharing `α` and scale structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SasMixture {
    pub plus: MultivariateSas,
    pub minus: MultivariateSas,
    pub imbalance: f64,
}

impl SasMixture {
    pub fn new(plus: MultivariateSas, minus: MultivariateSas, imbalance: f64) -> Result<Self> {
        check_imbalance(imbalance)?;
        if plus.alpha != minus.alpha {
            return Err(Error::invalid("alpha", "both classes must share the tail index"));
        }
        let same_structure = match (&plus.kind, &minus.kind) {
            (SasKind::IndependentComponents { scales: a, .. }, SasKind::IndependentComponents { scales: b, .. }) => a == b,
            (SasKind::EllipticallyContoured { shape: a, .. }, SasKind::EllipticallyContoured { shape: b, .. }) => a == b,
            _ => false,
        };
        if !same_structure {
            return Err(Error::invalid("kind", "both classes must share the scales or the shape matrix"));
        }
        if plus.location() == minus.location() {
            return Err(Error::invalid("theta", "class locations must differ"));
        }
        Ok(Self { plus, minus, imbalance })
    }

    /// Independent components with unit scales.
    pub fn ic_unit(alpha: f64, theta_plus: Vector, theta_minus: Vector, imbalance: f64) -> Result<Self> {
        if theta_plus.len() != theta_minus.len() {
            return Err(Error::invalid("theta", "class locations must have equal length"));
        }
        Self::new(
            MultivariateSas::independent_unit(alpha, theta_plus)?,
            MultivariateSas::independent_unit(alpha, theta_minus)?,
            imbalance,
        )
    }

    pub fn elliptical(alpha: f64, theta_plus: Vector, theta_minus: Vector, shape: Matrix, imbalance: f64) -> Result<Self> {
        if theta_plus.len() != theta_minus.len() {
            return Err(Error::invalid("theta", "class locations must have equal length"));
        }
        Self::new(
            MultivariateSas::elliptical(alpha, theta_plus, shape.clone())?,
            MultivariateSas::elliptical(alpha, theta_minus, shape)?,
            imbalance,
        )
    }

    pub fn alpha(&self) -> f64 {
        self.plus.alpha
    }

    pub fn theta_plus(&self) -> &Vector {
        self.plus.location()
    }

    pub fn theta_minus(&self) -> &Vector {
        self.minus.location()
    }

    pub fn theta_bar(&self) -> Vector {
        self.theta_plus() - self.theta_minus()
    }

    pub fn is_elliptical(&self) -> bool {
        matches!(self.plus.kind, SasKind::EllipticallyContoured { .. })
    }

    fn unit_scales(&self) -> bool {
        match &self.plus.kind {
            SasKind::IndependentComponents { scales, .. } => scales.iter().all(|&c| c == 1.0),
            SasKind::EllipticallyContoured { .. } => false,
        }
    }
}

/// Rescales coordinates `x_i ↦ x_i / c_i` so every scale becomes 1; returns the
/// rescaled mixture and the scales. A classifier `w'` found for the rescaled
/// mixture acts on the original data as `w_i = w'_i / c_i`. Perturbation radii
/// are not invariant under this map.
pub fn rescale_to_unit(mix: &SasMixture) -> Result<(SasMixture, Vector)> {
    let SasKind::IndependentComponents { scales, .. } = &mix.plus.kind else {
        return Err(Error::invalid("kind", "rescaling applies to independent components"));
    };
    let scales = scales.clone();
    let tp = mix.theta_plus().component_div(&scales);
    let tm = mix.theta_minus().component_div(&scales);
    Ok((SasMixture::ic_unit(mix.alpha(), tp, tm, mix.imbalance)?, scales))
}

fn require_unit_ic(mix: &SasMixture) -> Result<()> {
    if !mix.unit_scales() {
        return Err(Error::invalid(
            "mixture",
            "expected independent components with unit scales (see rescale_to_unit)",
        ));
    }
    Ok(())
}

fn require_smooth_alpha(alpha: f64) -> Result<()> {
    if alpha <= 1.0 {
        return Err(Error::invalid(
            "alpha",
            format!("the ℓα unit sphere has no unique Hölder maximiser for α = {alpha} ≤ 1; use cauchy_analysis for α = 1"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcSolution {
    /// `‖w‖_α = 1`, `b = −w'(θ⁺ + θ⁻)/2`.
    pub classifier: LinearClassifier,
    /// `w'θ̄`.
    pub margin: f64,
    /// `w'θ̄ − 2ε‖w‖_q` (equal to `margin` for the standard classifier).
    pub objective: f64,
    /// Stationarity residual of the homogeneous problem (0 for closed forms).
    pub residual: f64,
    /// `q ∈ {1, ∞}` lies outside the regime where strict degradation is guaranteed.
    pub outside_degrade_regime: bool,
}

fn midpoint_classifier(mix: &SasMixture, w: Vector) -> Result<LinearClassifier> {
    let b = -0.5 * w.dot(&(mix.theta_plus() + mix.theta_minus()));
    LinearClassifier::new(w, b)
}

fn normalise_alpha(w: Vector, alpha: f64) -> Vector {
    let n = lp_norm(w.as_slice(), alpha);
    w / n
}

/// `argmax w'θ̄` over `‖w‖_α = 1`: `w_i ∝ sgn(θ̄_i)|θ̄_i|^{α*−1}`, value `‖θ̄‖_{α*}`.
pub fn solve_ic_standard(mix: &SasMixture) -> Result<IcSolution> {
    require_unit_ic(mix)?;
    let alpha = mix.alpha();
    require_smooth_alpha(alpha)?;
    let theta_bar = mix.theta_bar();
    let expo = 1.0 / (alpha - 1.0);
    let w = theta_bar.map(|t| t.signum() * t.abs().powf(expo));
    let w = normalise_alpha(w, alpha);
    let margin = w.dot(&theta_bar);
    Ok(IcSolution {
        classifier: midpoint_classifier(mix, w)?,
        margin,
        objective: margin,
        residual: 0.0,
        outside_degrade_regime: false,
    })
}

/// `argmax G(w) = w'θ̄ − 2ε‖w‖_q` over `‖w‖_α = 1`, `α > 1`.
///
/// Since `G` is positively homogeneous, the maximiser points along the
/// unconstrained maximiser of the strictly concave `G(w) − ‖w‖_α^α/α`. With
/// signs fixed to `sgn(θ̄)`, its magnitudes `t` satisfy
/// `t_i^{α−1} + (2ε/B) t_i^{q−1} = |θ̄_i|`, `B = ‖t‖_q^{q−1}`, and `B` is the
/// unique positive root of `‖t(B)‖_q^{q−1} − B`. For `q = 1` the magnitudes are
/// `(|θ̄_i| − 2ε)_+^{1/(α−1)}`; for `q = ∞` they are `min(|θ̄_i|, τ)^{1/(α−1)}`
/// with `Σ(|θ̄_i| − τ)_+ = 2ε`. A maximum `≤ 0` (iff `‖θ̄‖_{q*} ≤ 2ε`) is
/// reported as [`Error::DegenerateClassifier`].
pub fn solve_ic_robust(mix: &SasMixture, pert: &PerturbSpec) -> Result<IcSolution> {
    require_unit_ic(mix)?;
    let alpha = mix.alpha();
    require_smooth_alpha(alpha)?;
    let theta_bar = mix.theta_bar();
    pert.check_radius(theta_bar.as_slice())?;
    let eps = pert.epsilon;
    let q = pert.q;
    if eps == 0.0 {
        return solve_ic_standard(mix);
    }
    let dual_norm = lp_norm(theta_bar.as_slice(), dual_index(q));
    if dual_norm <= 2.0 * eps {
        return Err(Error::DegenerateClassifier {
            dual_norm,
            two_eps: 2.0 * eps,
        });
    }
    let mags: Vec<f64> = theta_bar.iter().map(|t| t.abs()).collect();
    let expo = 1.0 / (alpha - 1.0);
    let t: Vec<f64> = if q == 1.0 {
        mags.iter().map(|&m| (m - 2.0 * eps).max(0.0).powf(expo)).collect()
    } else if q.is_infinite() {
        let tau = l1_threshold(&mags, 2.0 * eps);
        mags.iter().map(|&m| m.min(tau).powf(expo)).collect()
    } else {
        homogeneous_root(&mags, alpha, q, eps)
    };
    let raw = Vector::from_iterator(t.len(), theta_bar.iter().zip(&t).map(|(s, m)| s.signum() * m));
    let residual = stationarity_residual(&raw, &theta_bar, alpha, q, eps);
    let w = normalise_alpha(raw, alpha);
    let margin = w.dot(&theta_bar);
    Ok(IcSolution {
        objective: margin - 2.0 * eps * lp_norm(w.as_slice(), q),
        classifier: midpoint_classifier(mix, w)?,
        margin,
        residual,
        outside_degrade_regime: q == 1.0 || q.is_infinite(),
    })
}

/// `τ` with `Σ(m_i − τ)_+ = budget`, assuming `Σm_i > budget`.
fn l1_threshold(mags: &[f64], budget: f64) -> f64 {
    let mut sorted = mags.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, &m) in sorted.iter().enumerate() {
        cum += m;
        let cand = (cum - budget) / (k + 1) as f64;
        if cand < m {
            tau = cand;
        }
    }
    tau.max(0.0)
}

fn homogeneous_root(mags: &[f64], alpha: f64, q: f64, eps: f64) -> Vec<f64> {
    let expo = 1.0 / (alpha - 1.0);
    let ratio = (q - 1.0) / (alpha - 1.0);
    // s = t^{α−1} solves s + (2ε/B) s^{(q−1)/(α−1)} = m
    let at = |b: f64| -> Vec<f64> {
        mags.iter()
            .map(|&m| solve_power_sum(m, 2.0 * eps / b, ratio).powf(expo))
            .collect()
    };
    let excess = |b: f64| lp_norm(&at(b), q).powf(q - 1.0) - b;
    let top: Vec<f64> = mags.iter().map(|m| m.powf(expo)).collect();
    let mut hi = lp_norm(&top, q).powf(q - 1.0).max(f64::MIN_POSITIVE);
    while excess(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = hi;
    for _ in 0..4000 {
        lo *= 0.5;
        if excess(lo) > 0.0 {
            break;
        }
    }
    let (mut llo, mut lhi) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let mid = 0.5 * (llo + lhi);
        if excess(mid.exp()) > 0.0 {
            llo = mid;
        } else {
            lhi = mid;
        }
        if lhi - llo < 1e-15 {
            break;
        }
    }
    at((0.5 * (llo + lhi)).exp())
}

/// `‖θ̄ − 2εg − sgn(w)|w|^{α−1}‖` with `g = ∇‖w‖_q` where defined; for
/// `q ∈ {1, ∞}` the best subgradient is used.
fn stationarity_residual(w: &Vector, theta_bar: &Vector, alpha: f64, q: f64, eps: f64) -> f64 {
    let pow = w.map(|x| x.signum() * x.abs().powf(alpha - 1.0));
    let need = (theta_bar - pow) / (2.0 * eps);
    // `need` must be a subgradient of ‖·‖_q at w
    2.0 * eps * crate::norms::subgradient_gap(need.as_slice(), w.as_slice(), q)
}

/// Loss of a single class given the standardised argument; a zero scale gives
/// the indicator limit.
fn stable_loss(alpha: f64, arg: f64, scale: f64, quad: &QuadratureOptions) -> Result<f64> {
    if scale > 0.0 {
        standard_cdf(alpha, arg / scale, quad)
    } else {
        Ok(if arg >= 0.0 { 1.0 } else { 0.0 })
    }
}

fn sas_losses(mix: &SasMixture, clf: &LinearClassifier, pert: Option<&PerturbSpec>, quad: &QuadratureOptions) -> Result<LossReport> {
    let alpha = mix.alpha();
    let scale = mix.plus.projected_scale(&clf.w);
    let a_plus = clf.w.dot(mix.theta_plus());
    let a_minus = clf.w.dot(mix.theta_minus());
    let pair = |shift: f64| -> Result<(f64, f64)> {
        Ok((
            stable_loss(alpha, -clf.b - a_plus + shift, scale, quad)?,
            stable_loss(alpha, clf.b + a_minus + shift, scale, quad)?,
        ))
    };
    let (lp, lm) = pair(0.0)?;
    let report = LossReport::from_class_losses(lp, lm, mix.imbalance, Provenance::ClosedForm);
    Ok(match pert {
        Some(p) => {
            let (rp, rm) = pair(p.margin_shift(clf.w.as_slice()))?;
            report.with_robust(rp, rm)
        }
        None => report,
    })
}

/// Class-wise losses under independent components:
/// `ℓ⁺ = Φ_α((−b − w'θ⁺ + κ)/σ)`, `ℓ⁻ = Φ_α((b + w'θ⁻ + κ)/σ)` with
/// `σ = (Σ|c_i w_i|^α)^{1/α}` and `κ = ε‖w‖_q` for the robust variant.
pub fn ic_classwise_losses(mix: &SasMixture, clf: &LinearClassifier, pert: Option<&PerturbSpec>, quad: &QuadratureOptions) -> Result<LossReport> {
    if mix.is_elliptical() {
        return Err(Error::invalid("mixture", "expected independent components"));
    }
    sas_losses(mix, clf, pert, quad)
}

/// Class-wise losses under an elliptically-contoured law, scale `√(w'Σw)`.
pub fn ec_classwise_losses(mix: &SasMixture, clf: &LinearClassifier, pert: Option<&PerturbSpec>, quad: &QuadratureOptions) -> Result<LossReport> {
    if !mix.is_elliptical() {
        return Err(Error::invalid("mixture", "expected an elliptically-contoured law"));
    }
    sas_losses(mix, clf, pert, quad)
}

/// Either family.
pub fn sas_classwise_losses(mix: &SasMixture, clf: &LinearClassifier, pert: Option<&PerturbSpec>, quad: &QuadratureOptions) -> Result<LossReport> {
    sas_losses(mix, clf, pert, quad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcSolution {
    pub standard: LinearClassifier,
    pub robust: LinearClassifier,
    /// Angle between `Σ^{1/2}w_std` and `Σ^{1/2}w_rob`.
    pub angle: f64,
}

/// Balanced elliptical classifiers. `Φ_α` is increasing, so both optimal
/// directions coincide with the Gaussian ones for the same shape matrix;
/// intercepts are the class midpoints.
pub fn solve_ec(mix: &SasMixture, pert: &PerturbSpec, opts: &SolverOptions) -> Result<EcSolution> {
    let SasKind::EllipticallyContoured { shape, .. } = &mix.plus.kind else {
        return Err(Error::invalid("mixture", "expected an elliptically-contoured law"));
    };
    let gauss = GaussianMixture::new(mix.theta_plus().clone(), mix.theta_minus().clone(), shape.clone(), 1.0)?;
    let std = solve_standard(&gauss)?;
    let rob = solve_robust(&gauss, pert, opts)?;
    let root = crate::linalg::spd_sqrt(shape)?;
    let a = &root * &std.classifier.w;
    let b = &root * &rob.classifier.w;
    let angle = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos();
    Ok(EcSolution {
        standard: midpoint_classifier(mix, std.classifier.w)?,
        robust: midpoint_classifier(mix, rob.classifier.w)?,
        angle,
    })
}

/// Optimal intercept of the Cauchy analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Intercept {
    Finite(f64),
    /// The loss keeps decreasing as `b → −∞`: every point is labelled negative.
    NegativeInfinity,
}

impl Intercept {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Intercept::Finite(b) => Some(*b),
            Intercept::NegativeInfinity => None,
        }
    }
}

/// `(quadratic, linear, constant)` coefficients.
pub type Quadratic = (f64, f64, f64);

fn eval_quadratic(q: &Quadratic, x: f64) -> f64 {
    (q.0 * x + q.1) * x + q.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyQuadratics {
    /// `q₁(b) = (R−1)b² + 2(Ra⁺ − a⁻)b + Ra⁺² − a⁻² + R − 1`; `sgn ∂ℓ_std/∂b = sgn q₁(b)`.
    pub q1: Quadratic,
    /// `q₁` with `a⁺ ↦ a⁺ − ε`, `a⁻ ↦ a⁻ + ε`; governs the robust loss.
    pub q2: Quadratic,
    /// `RΔ² − (R−1)²` with `Δ = ‖θ̄‖_∞`.
    pub delta1: f64,
    /// `R(Δ − 2ε)² − (R−1)²`.
    pub delta2: f64,
    /// `Δ₁` recomputed from the coefficients of `q₁`.
    pub delta1_from_coeffs: f64,
    pub b_std: Intercept,
    pub b_rob: Intercept,
    /// `d(ε) = (R+1)ε + √Δ₂`, when `Δ₂ ≥ 0`.
    pub d_eps: Option<f64>,
    /// `d(0) = √Δ₁`, when `Δ₁ ≥ 0`.
    pub d_zero: Option<f64>,
}

impl CauchyQuadratics {
    pub fn q1_at(&self, b: f64) -> f64 {
        eval_quadratic(&self.q1, b)
    }

    pub fn q2_at(&self, b: f64) -> f64 {
        eval_quadratic(&self.q2, b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyAnalysis {
    pub quadratics: CauchyQuadratics,
    /// `sgn(θ̄_{i*}) e_{i*}` with `i* = argmax |θ̄_i|`, lowest index on ties.
    pub w: Vector,
    pub std_report: LossReport,
    pub rob_report: LossReport,
    /// `‖θ̄‖_∞² > (R+1)²/(R(1−κ)²)`; `None` when no `κ` was supplied.
    pub reduce_condition: Option<bool>,
    /// Whether the larger root also beats the `b → −∞` limit `1/(R+1)` for
    /// the standard and robust objectives respectively.
    pub larger_root_is_global: (bool, bool),
}

/// `R/(R+1)·Φ₁(b + a⁻ + κ) + 1/(R+1)·Φ₁(−b − a⁺ + κ)` for a unit-ℓ1 slope.
pub fn cauchy_objective(a_plus: f64, a_minus: f64, b: f64, shift: f64, imbalance: f64) -> f64 {
    let cdf = |z: f64| 0.5 + z.atan() / std::f64::consts::PI;
    (imbalance * cdf(b + a_minus + shift) + cdf(-b - a_plus + shift)) / (imbalance + 1.0)
}

/// `d(s) = (R+1)s + √(R(Δ − 2s)² − (R−1)²)`; `None` outside the real domain.
pub fn cauchy_d(delta: f64, s: f64, imbalance: f64) -> Option<f64> {
    let r = imbalance;
    let disc = r * (delta - 2.0 * s).powi(2) - (r - 1.0).powi(2);
    (disc >= 0.0).then(|| (r + 1.0) * s + disc.sqrt())
}

/// `d'(s) = R + 1 − 2R(Δ − 2s)/√(R(Δ − 2s)² − (R−1)²)`.
pub fn cauchy_d_prime(delta: f64, s: f64, imbalance: f64) -> Option<f64> {
    let r = imbalance;
    let disc = r * (delta - 2.0 * s).powi(2) - (r - 1.0).powi(2);
    (disc > 0.0).then(|| r + 1.0 - 2.0 * r * (delta - 2.0 * s) / disc.sqrt())
}

/// Complete imbalance analysis for Cauchy (`α = 1`) independent components
/// with unit scales under ℓ∞ perturbations.
///
/// With `‖w‖₁ = 1` and `w'θ̄ = Δ = ‖θ̄‖_∞`, the first-order conditions in `b`
/// are the quadratics `q₁`, `q₂`. A negative discriminant means the loss is
/// decreasing in `b` everywhere and the intercept runs off to `−∞`; otherwise
/// the larger root is the local minimiser. At those roots
/// `ℓ⁺ = Φ₁((Δ − d)/(R−1))`, `ℓ⁻ = Φ₁((−RΔ + d)/(R−1))` with `d = d(0)` for the
/// standard and `d = d(ε)` for the robust classifier.
///
/// `R = 1` has no quadratic term; the balanced midpoint classifier is returned
/// for both, evaluated with [`ic_classwise_losses`].
pub fn cauchy_analysis(mix: &SasMixture, pert: &PerturbSpec, quad: &QuadratureOptions) -> Result<CauchyAnalysis> {
    require_unit_ic(mix)?;
    if mix.alpha() != 1.0 {
        return Err(Error::invalid("alpha", "the Cauchy analysis needs α = 1"));
    }
    if !pert.p.is_infinite() {
        return Err(Error::invalid("p", "the Cauchy analysis needs ℓ∞ perturbations"));
    }
    let theta_bar = mix.theta_bar();
    pert.check_radius(theta_bar.as_slice())?;
    let w = Vector::from_vec(crate::norms::dual_direction(theta_bar.as_slice(), f64::INFINITY));
    let a_plus = w.dot(mix.theta_plus());
    let a_minus = w.dot(mix.theta_minus());
    let delta = a_plus - a_minus;
    let eps = pert.epsilon;
    let r = mix.imbalance;

    let q1 = (
        r - 1.0,
        2.0 * (r * a_plus - a_minus),
        r * a_plus * a_plus - a_minus * a_minus + r - 1.0,
    );
    let (ap2, am2) = (a_plus - eps, a_minus + eps);
    let q2 = (r - 1.0, 2.0 * (r * ap2 - am2), r * ap2 * ap2 - am2 * am2 + r - 1.0);
    let delta1 = r * delta * delta - (r - 1.0).powi(2);
    let delta2 = r * (delta - 2.0 * eps).powi(2) - (r - 1.0).powi(2);
    let delta1_from_coeffs = (q1.1 / 2.0).powi(2) - q1.0 * q1.2;
    let reduce_condition = pert
        .kappa
        .map(|k| delta * delta > (r + 1.0).powi(2) / (r * (1.0 - k).powi(2)));

    let balanced = r == 1.0;
    let root = |q: &Quadratic, disc: f64| -> Intercept {
        if balanced {
            Intercept::Finite(-0.5 * (a_plus + a_minus))
        } else if disc < 0.0 {
            Intercept::NegativeInfinity
        } else {
            Intercept::Finite((-q.1 / 2.0 + disc.sqrt()) / q.0)
        }
    };
    let b_std = root(&q1, delta1);
    let b_rob = root(&q2, delta2);

    let global = |b: Intercept, shift: f64| match b {
        Intercept::Finite(b) => balanced || cauchy_objective(a_plus, a_minus, b, shift, r) <= 1.0 / (r + 1.0),
        Intercept::NegativeInfinity => true,
    };
    let larger_root_is_global = (global(b_std, 0.0), global(b_rob, eps));

    let report = |b: Intercept| -> Result<LossReport> {
        match b {
            Intercept::Finite(b) => {
                let clf = LinearClassifier::new(w.clone(), b)?;
                sas_losses(mix, &clf, Some(pert), quad)
            }
            Intercept::NegativeInfinity => {
                Ok(LossReport::from_class_losses(1.0, 0.0, r, Provenance::ClosedForm).with_robust(1.0, 0.0))
            }
        }
    };
    let std_report = report(b_std)?;
    let rob_report = report(b_rob)?;

    Ok(CauchyAnalysis {
        quadratics: CauchyQuadratics {
            q1,
            q2,
            delta1,
            delta2,
            delta1_from_coeffs,
            b_std,
            b_rob,
            d_eps: cauchy_d(delta, eps, r),
            d_zero: cauchy_d(delta, 0.0, r),
        },
        w,
        std_report,
        rob_report,
        reduce_condition,
        larger_root_is_global,
    })
}
