//! Cartesian sweeps over imbalance, radius, norm and seed.

use std::thread;

use serde::{Deserialize, Serialize};

use super::train::{adv_train_linear, Attack, TrainConfig};
use super::{predictor_losses, sample_mixture, EvalReport, Population, Predictor};
use crate::error::{Error, Result};
use crate::gaussian::{solve_robust, solve_standard, SolverOptions};
use crate::quadrature::QuadratureOptions;
use crate::rng::{seeded, sub_seed};
use crate::stable_theory::{cauchy_analysis, solve_ec, solve_ic_robust, solve_ic_standard, Intercept};
use crate::types::{check_imbalance, LinearClassifier, PerturbSpec};

/// Where the classifiers of each cell come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSource {
    /// The population-optimal standard and robust classifiers.
    Theory,
    /// Standard and adversarial training on the cell's sample; the config's
    /// perturbation is replaced by the cell's.
    Trained(TrainConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub imbalances: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub ps: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl SweepGrid {
    pub fn cells(&self) -> Vec<(f64, f64, f64, u64)> {
        let mut out = Vec::new();
        for &r in &self.imbalances {
            for &p in &self.ps {
                for &eps in &self.epsilons {
                    for &seed in &self.seeds {
                        out.push((r, p, eps, seed));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario_id: String,
    pub imbalance: f64,
    #[serde(with = "crate::types::norm_index")]
    pub p: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Standard accuracy of the robust classifier, with `ad_gap` measured
    /// against the standard classifier on the same sample.
    pub report: EvalReport,
    /// The standard classifier on the same sample.
    pub baseline: EvalReport,
}

/// Population-optimal `(standard, robust)` decision rules.
pub fn theory_predictors(pop: &Population, pert: &PerturbSpec, opts: &SolverOptions, quad: &QuadratureOptions) -> Result<(Predictor, Predictor)> {
    match pop {
        Population::Gaussian(g) => {
            let std = solve_standard(g)?.classifier;
            let rob = if pert.epsilon == 0.0 {
                std.clone()
            } else {
                solve_robust(g, pert, opts)?.classifier
            };
            Ok((std.into(), rob.into()))
        }
        Population::Stable(s) if s.is_elliptical() => {
            let sol = solve_ec(s, pert, opts)?;
            Ok((sol.standard.into(), sol.robust.into()))
        }
        Population::Stable(s) if s.alpha() == 1.0 => {
            let an = cauchy_analysis(s, pert, quad)?;
            let rule = |b: Intercept| -> Result<Predictor> {
                Ok(match b {
                    Intercept::Finite(b) => LinearClassifier::new(an.w.clone(), b)?.into(),
                    Intercept::NegativeInfinity => Predictor::AlwaysNegative,
                })
            };
            Ok((rule(an.quadratics.b_std)?, rule(an.quadratics.b_rob)?))
        }
        Population::Stable(s) => {
            let std = solve_ic_standard(s)?.classifier;
            let rob = solve_ic_robust(s, pert)?.classifier;
            Ok((std.into(), rob.into()))
        }
    }
}

fn with_imbalance(pop: &Population, r: f64) -> Result<Population> {
    Ok(match pop {
        Population::Gaussian(g) => Population::Gaussian(g.with_imbalance(r)?),
        Population::Stable(s) => {
            check_imbalance(r)?;
            let mut s = s.clone();
            s.imbalance = r;
            Population::Stable(s)
        }
    })
}

fn run_cell(
    scenario_id: &str,
    base: &Population,
    n_major: usize,
    source: &ClassifierSource,
    (r, p, eps, seed): (f64, f64, f64, u64),
) -> Result<SweepRow> {
    let pop = with_imbalance(base, r)?;
    let pert = PerturbSpec::new(p, eps)?;
    let data_seed = sub_seed(seed, &[r.to_bits()]);
    let set = sample_mixture(&pop, n_major, r, data_seed, &mut seeded(data_seed))?;
    let (std_r, rob_r) = match source {
        ClassifierSource::Theory => {
            let (std, rob) = theory_predictors(&pop, &pert, &SolverOptions::default(), &QuadratureOptions::default())?;
            (predictor_losses(&set, &std, None)?, predictor_losses(&set, &rob, None)?)
        }
        ClassifierSource::Trained(cfg) => {
            let train_seed = sub_seed(seed, &[r.to_bits(), p.to_bits(), eps.to_bits()]);
            let std_cfg = TrainConfig {
                attack: Attack::None,
                pert: PerturbSpec::new(p, 0.0)?,
                ..cfg.clone()
            };
            let rob_cfg = TrainConfig { pert, ..cfg.clone() };
            let a = adv_train_linear(&set, &std_cfg, &mut seeded(train_seed))?;
            let b = adv_train_linear(&set, &rob_cfg, &mut seeded(train_seed))?;
            (
                predictor_losses(&a.test, &Predictor::Linear(a.classifier), None)?,
                predictor_losses(&b.test, &Predictor::Linear(b.classifier), None)?,
            )
        }
    };
    Ok(SweepRow {
        scenario_id: scenario_id.to_string(),
        imbalance: r,
        p,
        epsilon: eps,
        seed,
        report: rob_r.with_baseline(&std_r),
        baseline: std_r,
    })
}

/// Runs every cell of `grid` in parallel. Each cell draws `n_major`
/// negatives from a generator seeded by its seed and `R` only, so the
/// standard and robust classifiers of one `(R, seed)` share their data.
/// Rows come back in grid order.
pub fn sweep(scenario_id: &str, base: &Population, grid: &SweepGrid, n_major: usize, source: &ClassifierSource) -> Result<Vec<SweepRow>> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Ok(Vec::new());
    }
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(cells.len());
    let per = cells.len().div_ceil(workers);
    let results: Vec<Result<Vec<SweepRow>>> = thread::scope(|scope| {
        let handles: Vec<_> = cells
            .chunks(per)
            .map(|chunk| scope.spawn(move || chunk.iter().map(|&c| run_cell(scenario_id, base, n_major, source, c)).collect()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Domain("sweep worker panicked".into()))))
            .collect()
    });
    let mut rows = Vec::with_capacity(cells.len());
    for chunk in results {
        rows.extend(chunk?);
    }
    Ok(rows)
}

/// Mean and sample standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}
