//! Sampling-based checks of the closed forms and desk-scale adversarial
//! training of linear models on synthetic mixtures.
//!
//! The robust 0-1 indicator of a linear classifier is evaluated directly as
//! `1{y(w'x + b) ≤ ε‖w‖_q}`; no inner attack loop is needed.

mod suite;
mod sweep;
mod train;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use suite::{default_scenarios, verification_suite, Check, Scenario, ScenarioKind, ScenarioResult, SuiteOptions, SuiteReport};
pub use sweep::{mean_sd, sweep, theory_predictors, ClassifierSource, SweepGrid, SweepRow};
pub use train::{adv_train_linear, Attack, EpochRecord, Optimizer, TrainConfig, TrainOutcome};

use crate::error::{Error, Result};
use crate::gaussian::GaussianMixture;
use crate::linalg::spd_sqrt;
use crate::norms::dual_direction;
use crate::rng::SeededRng;
use crate::stable_dist::{sas_ec_sample, sas_ic_sample};
use crate::stable_theory::SasMixture;
use crate::types::{LinearClassifier, Matrix, PerturbSpec};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Class-conditional law of a binary mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Population {
    Gaussian(GaussianMixture),
    Stable(SasMixture),
}

impl Population {
    pub fn dim(&self) -> usize {
        match self {
            Population::Gaussian(g) => g.dim(),
            Population::Stable(s) => s.theta_plus().len(),
        }
    }

    pub fn imbalance(&self) -> f64 {
        match self {
            Population::Gaussian(g) => g.imbalance,
            Population::Stable(s) => s.imbalance,
        }
    }
}

impl From<GaussianMixture> for Population {
    fn from(g: GaussianMixture) -> Self {
        Population::Gaussian(g)
    }
}

impl From<SasMixture> for Population {
    fn from(s: SasMixture) -> Self {
        Population::Stable(s)
    }
}

/// Draws `n` rows from the class with label `label ∈ {−1, +1}`.
pub fn draw_class(pop: &Population, label: i8, n: usize, rng: &mut SeededRng) -> Result<Matrix> {
    if n == 0 {
        return Ok(Matrix::zeros(0, pop.dim()));
    }
    match pop {
        Population::Gaussian(g) => {
            let mean = if label > 0 { &g.theta_plus } else { &g.theta_minus };
            let root = spd_sqrt(&g.sigma)?;
            let d = mean.len();
            let mut out = Matrix::zeros(n, d);
            let mut z = vec![0.0; d];
            for i in 0..n {
                for zj in z.iter_mut() {
                    *zj = rng.sample(StandardNormal);
                }
                for j in 0..d {
                    out[(i, j)] = mean[j] + (0..d).map(|k| root[(j, k)] * z[k]).sum::<f64>();
                }
            }
            Ok(out)
        }
        Population::Stable(s) => {
            let law = if label > 0 { &s.plus } else { &s.minus };
            if s.is_elliptical() {
                sas_ec_sample(law, rng, n)
            } else {
                sas_ic_sample(law, rng, n)
            }
        }
    }
}

/// A labelled synthetic data set; negatives (the majority) come first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub features: Matrix,
    pub labels: Vec<i8>,
    /// Realized `n⁻/n⁺`.
    pub imbalance: f64,
    pub seed: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn count(&self, label: i8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.features.row(i).iter().copied().collect()
    }

    /// Rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> SampleSet {
        let d = self.features.ncols();
        let features = Matrix::from_fn(idx.len(), d, |i, j| self.features[(idx[i], j)]);
        let labels: Vec<i8> = idx.iter().map(|&i| self.labels[i]).collect();
        let plus = labels.iter().filter(|&&l| l > 0).count();
        let minus = labels.len() - plus;
        SampleSet {
            features,
            labels,
            imbalance: if plus == 0 { f64::INFINITY } else { minus as f64 / plus as f64 },
            seed: self.seed,
        }
    }
}

/// `n_major` negatives and `round(n_major/R)` positives.
pub fn sample_mixture(pop: &Population, n_major: usize, imbalance: f64, seed: u64, rng: &mut SeededRng) -> Result<SampleSet> {
    if n_major == 0 {
        return Err(Error::invalid("n_major", "must be ≥ 1"));
    }
    if !(imbalance >= 1.0) || !imbalance.is_finite() {
        return Err(Error::invalid("imbalance", format!("R must be finite and ≥ 1, got {imbalance}")));
    }
    let n_minor = (n_major as f64 / imbalance).round() as usize;
    if n_minor == 0 {
        return Err(Error::invalid("n_major", format!("n_major/R rounds to zero positives (n_major = {n_major}, R = {imbalance})")));
    }
    let neg = draw_class(pop, -1, n_major, rng)?;
    let pos = draw_class(pop, 1, n_minor, rng)?;
    let d = pop.dim();
    let mut features = Matrix::zeros(n_major + n_minor, d);
    features.rows_mut(0, n_major).copy_from(&neg);
    features.rows_mut(n_major, n_minor).copy_from(&pos);
    let mut labels = vec![-1_i8; n_major];
    labels.extend(std::iter::repeat_n(1_i8, n_minor));
    Ok(SampleSet {
        features,
        labels,
        imbalance: n_major as f64 / n_minor as f64,
        seed,
    })
}

/// A decision rule: a linear classifier or the rule that labels everything
/// negative (the limit `b → −∞`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predictor {
    Linear(LinearClassifier),
    AlwaysNegative,
}

impl Predictor {
    /// Whether `(x, y)` counts as an error once the margin must exceed `shift`.
    fn errs(&self, x: &[f64], y: i8, pert: Option<&PerturbSpec>) -> bool {
        match self {
            Predictor::Linear(clf) => {
                let shift = pert.map_or(0.0, |p| p.margin_shift(clf.w.as_slice()));
                f64::from(y) * clf.score(x) <= shift
            }
            Predictor::AlwaysNegative => y > 0,
        }
    }

    /// Same rule with the intercept moved by `delta`.
    pub fn shifted(&self, delta: f64) -> Predictor {
        match self {
            Predictor::Linear(c) => Predictor::Linear(LinearClassifier {
                w: c.w.clone(),
                b: c.b + delta,
            }),
            Predictor::AlwaysNegative => Predictor::AlwaysNegative,
        }
    }
}

impl From<LinearClassifier> for Predictor {
    fn from(c: LinearClassifier) -> Self {
        Predictor::Linear(c)
    }
}

/// Wilson score interval for `errors` successes out of `n`.
pub fn wilson_interval(errors: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Whether an empirical rate lies within `k` binomial standard deviations of
/// `expected`. The deviation is floored at `1/n` so that a single stray count
/// against an expected rate of 0 or 1 is tolerated.
pub fn within_binomial_sigma(expected: f64, observed: f64, n: usize, k: f64) -> bool {
    let n = n as f64;
    let sd = (expected * (1.0 - expected) / n).sqrt().max(1.0 / n);
    (observed - expected).abs() <= k * sd
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_plus: usize,
    pub n_minus: usize,
    pub loss_plus: f64,
    pub loss_minus: f64,
    pub acc_plus: f64,
    pub acc_minus: f64,
    /// Accuracy over all points, i.e. weighted by the realized class counts.
    pub acc_overall: f64,
    /// `acc⁻ − acc⁺`.
    pub ad: f64,
    /// `ad` minus a baseline's `ad`, when one was supplied.
    pub ad_gap: Option<f64>,
    /// 95% Wilson intervals of the class-wise losses.
    pub interval_plus: (f64, f64),
    pub interval_minus: (f64, f64),
    /// Half-width for `ad`, combining the two class half-widths in quadrature.
    pub ci_halfwidth: f64,
}

impl EvalReport {
    fn from_counts(err_plus: usize, n_plus: usize, err_minus: usize, n_minus: usize) -> Self {
        let loss_plus = err_plus as f64 / n_plus as f64;
        let loss_minus = err_minus as f64 / n_minus as f64;
        let interval_plus = wilson_interval(err_plus, n_plus);
        let interval_minus = wilson_interval(err_minus, n_minus);
        let hw = |(lo, hi): (f64, f64)| 0.5 * (hi - lo);
        Self {
            n_plus,
            n_minus,
            loss_plus,
            loss_minus,
            acc_plus: 1.0 - loss_plus,
            acc_minus: 1.0 - loss_minus,
            acc_overall: 1.0 - (err_plus + err_minus) as f64 / (n_plus + n_minus) as f64,
            ad: loss_plus - loss_minus,
            ad_gap: None,
            interval_plus,
            interval_minus,
            ci_halfwidth: hw(interval_plus).hypot(hw(interval_minus)),
        }
    }

    pub fn with_baseline(mut self, baseline: &EvalReport) -> Self {
        self.ad_gap = Some(self.ad - baseline.ad);
        self
    }
}

/// Error counts `(errors⁺, n⁺, errors⁻, n⁻)` of `pred` on the rows of `x`.
pub(crate) fn error_counts(x: &Matrix, labels: &[i8], pred: &Predictor, pert: Option<&PerturbSpec>) -> [usize; 4] {
    let mut out = [0usize; 4];
    let mut row = vec![0.0; x.ncols()];
    for (i, &y) in labels.iter().enumerate() {
        for (j, r) in row.iter_mut().enumerate() {
            *r = x[(i, j)];
        }
        let slot = if y > 0 { 0 } else { 2 };
        out[slot] += pred.errs(&row, y, pert) as usize;
        out[slot + 1] += 1;
    }
    out
}

/// Class-wise (robust, if `pert` is given) 0-1 losses of any decision rule.
pub fn predictor_losses(set: &SampleSet, pred: &Predictor, pert: Option<&PerturbSpec>) -> Result<EvalReport> {
    let [ep, np, em, nm] = error_counts(&set.features, &set.labels, pred, pert);
    if np == 0 {
        return Err(Error::EmptyClass { label: 1 });
    }
    if nm == 0 {
        return Err(Error::EmptyClass { label: -1 });
    }
    Ok(EvalReport::from_counts(ep, np, em, nm))
}

/// Class-wise 0-1 losses of `clf`; with `pert`, the robust indicator
/// `1{y(w'x + b) ≤ ε‖w‖_q}`.
pub fn empirical_losses(set: &SampleSet, clf: &LinearClassifier, pert: Option<&PerturbSpec>) -> Result<EvalReport> {
    predictor_losses(set, &Predictor::Linear(clf.clone()), pert)
}

/// The worst-case ℓp perturbation of `x` against `clf`:
/// `x − y·ε·δ` with `δ` maximising `⟨δ, w⟩` over the unit ℓp ball.
pub fn worst_case_perturbation(x: &[f64], y: i8, clf: &LinearClassifier, pert: &PerturbSpec) -> Vec<f64> {
    let dir = dual_direction(clf.w.as_slice(), pert.q);
    let step = f64::from(y) * pert.epsilon;
    x.iter().zip(dir).map(|(xi, di)| xi - step * di).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::types::Vector;

    fn gauss(r: f64) -> Population {
        GaussianMixture::new(
            Vector::from_row_slice(&[1.0, 0.5]),
            Vector::from_row_slice(&[-1.0, 0.0]),
            Matrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]),
            r,
        )
        .unwrap()
        .into()
    }

    #[test]
    fn class_counts() {
        let s = sample_mixture(&gauss(1.0), 1000, 1.0, 0, &mut seeded(0)).unwrap();
        assert_eq!((s.count(-1), s.count(1)), (1000, 1000));
        let s = sample_mixture(&gauss(10.0), 1000, 10.0, 0, &mut seeded(0)).unwrap();
        assert_eq!((s.count(-1), s.count(1)), (1000, 100));
        assert_eq!(s.imbalance, 10.0);
    }

    #[test]
    fn too_few_positives_is_rejected() {
        assert!(sample_mixture(&gauss(10.0), 4, 10.0, 0, &mut seeded(0)).is_err());
    }

    #[test]
    fn sample_means_within_five_standard_errors() {
        let pop = gauss(1.0);
        let s = sample_mixture(&pop, 20_000, 1.0, 0, &mut seeded(4)).unwrap();
        let Population::Gaussian(g) = &pop else { unreachable!() };
        for (label, mean) in [(-1_i8, &g.theta_minus), (1, &g.theta_plus)] {
            let idx: Vec<usize> = (0..s.len()).filter(|&i| s.labels[i] == label).collect();
            let sub = s.subset(&idx);
            for j in 0..2 {
                let m = sub.features.column(j).mean();
                let se = (g.sigma[(j, j)] / idx.len() as f64).sqrt();
                assert!((m - mean[j]).abs() < 5.0 * se);
            }
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = sample_mixture(&gauss(2.0), 500, 2.0, 9, &mut seeded(9)).unwrap();
        let b = sample_mixture(&gauss(2.0), 500, 2.0, 9, &mut seeded(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn majority_rule_via_huge_negative_intercept() {
        let s = sample_mixture(&gauss(10.0), 1000, 10.0, 0, &mut seeded(1)).unwrap();
        let clf = LinearClassifier::new(Vector::from_row_slice(&[1e-12, 0.0]), -1e6).unwrap();
        let rep = empirical_losses(&s, &clf, None).unwrap();
        assert_eq!((rep.acc_minus, rep.acc_plus, rep.ad), (1.0, 0.0, 1.0));
    }

    #[test]
    fn zero_radius_is_standard_loss() {
        let s = sample_mixture(&gauss(3.0), 2000, 3.0, 0, &mut seeded(2)).unwrap();
        let clf = LinearClassifier::new(Vector::from_row_slice(&[1.0, 0.2]), 0.1).unwrap();
        let pert = PerturbSpec::new(2.0, 0.0).unwrap();
        assert_eq!(empirical_losses(&s, &clf, None).unwrap(), empirical_losses(&s, &clf, Some(&pert)).unwrap());
    }

    #[test]
    fn empty_class_is_an_error() {
        let s = sample_mixture(&gauss(1.0), 10, 1.0, 0, &mut seeded(2)).unwrap();
        let only_neg = s.subset(&(0..10).collect::<Vec<_>>());
        let clf = LinearClassifier::new(Vector::from_row_slice(&[1.0, 0.0]), 0.0).unwrap();
        assert_eq!(empirical_losses(&only_neg, &clf, None), Err(Error::EmptyClass { label: 1 }));
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(30, 1000);
        assert!(lo < 0.03 && 0.03 < hi);
        assert_eq!(wilson_interval(0, 100).0, 0.0);
    }

    #[test]
    fn attack_shifts_margin_by_dual_norm() {
        let clf = LinearClassifier::new(Vector::from_row_slice(&[2.0, -1.0, 0.5]), 0.3).unwrap();
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let pert = PerturbSpec::new(p, 0.4).unwrap();
            let x = [0.2, 0.7, -1.0];
            let adv = worst_case_perturbation(&x, 1, &clf, &pert);
            let drop = clf.score(&x) - clf.score(&adv);
            assert!((drop - pert.margin_shift(clf.w.as_slice())).abs() < 1e-12, "p = {p}");
        }
    }
}
