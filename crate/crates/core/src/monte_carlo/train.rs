//! Adversarial training of a linear classifier with the logistic loss.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::SampleSet;
use crate::error::{Error, Result};
use crate::norms::{dual_direction, lp_norm};
use crate::rng::SeededRng;
use crate::types::{LinearClassifier, PerturbSpec, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Attack {
    None,
    Fgm,
    /// `step_size` defaults to `2.5ε/steps`.
    Pgd { steps: usize, step_size: Option<f64> },
}

impl Attack {
    pub fn pgd(steps: usize) -> Self {
        Attack::Pgd { steps, step_size: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub attack: Attack,
    pub pert: PerturbSpec,
    pub optimizer: Optimizer,
    pub lr: f64,
    pub batch: usize,
    pub max_epochs: usize,
    /// Stop once the best validation loss has not improved for this many epochs.
    pub patience: usize,
}

impl TrainConfig {
    pub fn standard() -> Self {
        Self {
            attack: Attack::None,
            pert: PerturbSpec::new(2.0, 0.0).expect("valid"),
            optimizer: Optimizer::Adam,
            lr: 0.01,
            batch: 64,
            max_epochs: 500,
            patience: 50,
        }
    }

    pub fn adversarial(attack: Attack, pert: PerturbSpec) -> Self {
        Self {
            attack,
            pert,
            ..Self::standard()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patience < 1 {
            return Err(Error::invalid("patience", "must be ≥ 1"));
        }
        if self.batch < 1 {
            return Err(Error::invalid("batch", "must be ≥ 1"));
        }
        if self.max_epochs < 1 {
            return Err(Error::invalid("max_epochs", "must be ≥ 1"));
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::invalid("lr", "must be finite and > 0"));
        }
        if let Attack::Pgd { steps, step_size } = self.attack {
            if steps < 1 || step_size.is_some_and(|s| !(s > 0.0)) {
                return Err(Error::invalid("attack", "PGD needs steps ≥ 1 and step_size > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    /// Parameters with the lowest validation loss.
    pub classifier: LinearClassifier,
    pub trace: Vec<EpochRecord>,
    pub best_epoch: usize,
    /// Held-out tenth of each class.
    pub test: SampleSet,
}

/// `log(1 + e^{−m})` without overflow.
fn logistic(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

/// `e^{−m}/(1 + e^{−m})`, the magnitude of the loss slope in the margin.
fn slope(m: f64) -> f64 {
    if m > 0.0 {
        let e = (-m).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + m.exp())
    }
}

struct Params {
    w: Vec<f64>,
    b: f64,
}

impl Params {
    fn score(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.b
    }
}

/// Adversarial copy of `x`. The loss gradient in `x` is a negative multiple
/// of `y·w`, so every step moves along the dual direction of `w`.
fn craft(x: &[f64], y: i8, params: &Params, attack: Attack, pert: &PerturbSpec) -> Vec<f64> {
    let eps = pert.epsilon;
    if eps == 0.0 || params.w.iter().all(|&v| v == 0.0) {
        return x.to_vec();
    }
    let sign = f64::from(y);
    match attack {
        Attack::None => x.to_vec(),
        Attack::Pgd { steps, step_size } if pert.p == 2.0 || pert.p.is_infinite() => {
            let step_size = step_size.unwrap_or(2.5 * eps / steps as f64);
            let grad: Vec<f64> = params.w.iter().map(|&wi| -sign * wi).collect();
            let dir: Vec<f64> = if pert.p.is_infinite() {
                grad.iter().map(|g| g.signum()).collect()
            } else {
                let n = lp_norm(&grad, 2.0);
                grad.iter().map(|g| g / n).collect()
            };
            let mut delta = vec![0.0; x.len()];
            for _ in 0..steps {
                for (d, g) in delta.iter_mut().zip(&dir) {
                    *d += step_size * g;
                }
                if pert.p.is_infinite() {
                    for d in delta.iter_mut() {
                        *d = d.clamp(-eps, eps);
                    }
                } else {
                    let n = lp_norm(&delta, 2.0);
                    if n > eps {
                        for d in delta.iter_mut() {
                            *d *= eps / n;
                        }
                    }
                }
            }
            x.iter().zip(delta).map(|(a, d)| a + d).collect()
        }
        Attack::Fgm | Attack::Pgd { .. } => {
            let dir = dual_direction(&params.w, pert.q);
            x.iter().zip(dir).map(|(a, d)| a - sign * eps * d).collect()
        }
    }
}

/// Stratified 8:1:1 split of each class into train / validation / test.
fn split(set: &SampleSet, rng: &mut SeededRng) -> Result<[Vec<usize>; 3]> {
    let mut parts: [Vec<usize>; 3] = Default::default();
    for label in [-1_i8, 1] {
        let mut idx: Vec<usize> = (0..set.len()).filter(|&i| set.labels[i] == label).collect();
        if idx.len() < 3 {
            return Err(Error::EmptyClass { label });
        }
        idx.shuffle(rng);
        let n = idx.len();
        let n_val = (n / 10).max(1);
        let n_test = (n / 10).max(1);
        let n_train = n - n_val - n_test;
        parts[0].extend_from_slice(&idx[..n_train]);
        parts[1].extend_from_slice(&idx[n_train..n_train + n_val]);
        parts[2].extend_from_slice(&idx[n_train + n_val..]);
    }
    Ok(parts)
}

fn mean_adv_loss(set: &SampleSet, idx: &[usize], params: &Params, cfg: &TrainConfig) -> f64 {
    let total: f64 = idx
        .iter()
        .map(|&i| {
            let y = set.labels[i];
            let x = craft(&set.row(i), y, params, cfg.attack, &cfg.pert);
            logistic(f64::from(y) * params.score(&x))
        })
        .sum();
    total / idx.len() as f64
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, grad: &[f64], lr: f64) -> Vec<f64> {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        grad.iter()
            .enumerate()
            .map(|(i, &g)| {
                self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * g;
                self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * g * g;
                lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS)
            })
            .collect()
    }
}

/// Minimises the mean logistic loss on adversarially perturbed training
/// points, keeping the parameters with the lowest validation loss.
pub fn adv_train_linear(set: &SampleSet, cfg: &TrainConfig, rng: &mut SeededRng) -> Result<TrainOutcome> {
    cfg.validate()?;
    let [mut train, val, test] = split(set, rng)?;
    let d = set.features.ncols();
    let mut params = Params { w: vec![0.0; d], b: 0.0 };
    let mut adam = Adam::new(d + 1);
    let mut best = (f64::INFINITY, vec![0.0; d], 0.0, 0usize);
    let mut trace = Vec::new();
    let mut grad = vec![0.0; d + 1];

    for epoch in 0..cfg.max_epochs {
        train.shuffle(rng);
        let mut epoch_loss = 0.0;
        for chunk in train.chunks(cfg.batch) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &i in chunk {
                let y = set.labels[i];
                let x = craft(&set.row(i), y, &params, cfg.attack, &cfg.pert);
                let m = f64::from(y) * params.score(&x);
                epoch_loss += logistic(m);
                let c = -slope(m) * f64::from(y) / chunk.len() as f64;
                for (g, xi) in grad.iter_mut().zip(&x) {
                    *g += c * xi;
                }
                grad[d] += c;
            }
            let update = match cfg.optimizer {
                Optimizer::Sgd => grad.iter().map(|g| cfg.lr * g).collect(),
                Optimizer::Adam => adam.step(&grad, cfg.lr),
            };
            for (wi, u) in params.w.iter_mut().zip(&update) {
                *wi -= u;
            }
            params.b -= update[d];
        }
        let train_loss = epoch_loss / train.len() as f64;
        let val_loss = mean_adv_loss(set, &val, &params, cfg);
        trace.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                trace: trace.iter().map(|r| r.train_loss).collect(),
            });
        }
        if val_loss < best.0 {
            best = (val_loss, params.w.clone(), params.b, epoch);
        } else if epoch - best.3 >= cfg.patience {
            break;
        }
    }

    let (_, w, b, best_epoch) = best;
    let classifier = LinearClassifier::new(Vector::from_vec(w), b)?;
    Ok(TrainOutcome {
        classifier,
        trace,
        best_epoch,
        test: set.subset(&test),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianMixture;
    use crate::monte_carlo::{empirical_losses, sample_mixture, worst_case_perturbation, Population};
    use crate::rng::seeded;
    use crate::types::Matrix;

    fn balanced() -> Population {
        GaussianMixture::new(
            Vector::from_row_slice(&[1.0, 0.5]),
            Vector::from_row_slice(&[-1.0, -0.5]),
            Matrix::identity(2, 2),
            1.0,
        )
        .unwrap()
        .into()
    }

    #[test]
    fn logistic_pieces_are_stable() {
        assert!((logistic(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((logistic(-800.0) - 800.0).abs() < 1e-9);
        assert_eq!(slope(800.0), 0.0);
        assert!((slope(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fgm_and_pgd_reach_the_worst_case() {
        let params = Params { w: vec![2.0, -1.0], b: 0.1 };
        let clf = LinearClassifier::new(Vector::from_row_slice(&[2.0, -1.0]), 0.1).unwrap();
        for p in [2.0, f64::INFINITY] {
            let pert = PerturbSpec::new(p, 0.3).unwrap();
            let exact = worst_case_perturbation(&[0.5, 0.5], 1, &clf, &pert);
            for attack in [Attack::Fgm, Attack::pgd(50)] {
                let adv = craft(&[0.5, 0.5], 1, &params, attack, &pert);
                for (a, e) in adv.iter().zip(&exact) {
                    assert!((a - e).abs() < 1e-12, "p = {p}, {attack:?}");
                }
            }
        }
    }

    #[test]
    fn rejects_zero_patience() {
        let cfg = TrainConfig {
            patience: 0,
            ..TrainConfig::standard()
        };
        let set = sample_mixture(&balanced(), 100, 1.0, 0, &mut seeded(0)).unwrap();
        assert!(adv_train_linear(&set, &cfg, &mut seeded(0)).is_err());
    }

    #[test]
    fn learns_a_separating_direction() {
        let set = sample_mixture(&balanced(), 2000, 1.0, 0, &mut seeded(5)).unwrap();
        let cfg = TrainConfig {
            max_epochs: 60,
            patience: 10,
            ..TrainConfig::standard()
        };
        let out = adv_train_linear(&set, &cfg, &mut seeded(6)).unwrap();
        let rep = empirical_losses(&out.test, &out.classifier, None).unwrap();
        // Bayes accuracy is Φ(‖θ̄‖/2) ≈ 0.868 for this mixture
        assert!(rep.acc_overall > 0.82, "{rep:?}");
        assert_eq!(out.test.count(1), 200);
    }

    #[test]
    fn traces_are_reproducible() {
        let set = sample_mixture(&balanced(), 300, 1.0, 0, &mut seeded(5)).unwrap();
        let cfg = TrainConfig {
            max_epochs: 5,
            ..TrainConfig::adversarial(Attack::Fgm, PerturbSpec::new(2.0, 0.2).unwrap())
        };
        let a = adv_train_linear(&set, &cfg, &mut seeded(1)).unwrap();
        let b = adv_train_linear(&set, &cfg, &mut seeded(1)).unwrap();
        assert_eq!(a, b);
    }
}
