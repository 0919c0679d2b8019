//! TOML experiment configuration. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use disparity_core::gaussian::GaussianMixture;
use disparity_core::monte_carlo::{Attack, Optimizer, Population, TrainConfig};
use disparity_core::ridge::RidgeScenario;
use disparity_core::stable_theory::SasMixture;
use disparity_core::{Matrix, MultivariateSas, PerturbSpec, Vector};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Gaussian,
    StableIc,
    StableEc,
    Cauchy,
    Ridge,
    Train,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// A number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum NormIndex {
    Number(f64),
    Text(InfText),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub enum InfText {
    #[serde(rename = "inf")]
    Inf,
}

impl NormIndex {
    pub fn value(self) -> f64 {
        match self {
            NormIndex::Number(p) => p,
            NormIndex::Text(InfText::Inf) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<Kind>,
    /// Top-level seed; every random stream is a sub-seed of it.
    #[serde(default)]
    pub seed: u64,
    pub scenario_id: Option<String>,
    pub distribution: Option<DistributionConfig>,
    pub perturbation: Option<PerturbationConfig>,
    pub grid: Option<GridConfig>,
    pub monte_carlo: Option<MonteCarloConfig>,
    pub toy: Option<ToyConfig>,
    pub ridge: Option<RidgeConfig>,
    pub train: Option<TrainSection>,
    pub verify: Option<VerifyConfig>,
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    StableIc,
    StableEc,
    Cauchy,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    /// Required for `kind = "train"`; otherwise defaults to the kind.
    pub family: Option<Family>,
    pub theta_plus: Vec<f64>,
    pub theta_minus: Vec<f64>,
    /// Covariance (Gaussian) or shape matrix (elliptical), row by row.
    pub sigma: Option<Vec<Vec<f64>>>,
    pub alpha: Option<f64>,
    /// Per-coordinate scales of independent components; must be all ones for
    /// the classifier solvers.
    pub scales: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    #[serde(default = "default_p")]
    pub p: OneOrMany<NormIndex>,
    pub epsilons: Vec<f64>,
    pub kappa: Option<f64>,
}

fn default_p() -> OneOrMany<NormIndex> {
    OneOrMany::One(NormIndex::Number(2.0))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_imbalances")]
    pub imbalances: Vec<f64>,
    /// Replicate ids; each becomes a sub-seed of the top-level seed.
    #[serde(default = "default_replicates")]
    pub replicates: Vec<u64>,
}

fn default_imbalances() -> Vec<f64> {
    vec![1.0]
}

fn default_replicates() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub n_major: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyConfig {
    pub m: usize,
    pub n: usize,
    pub eta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub imbalance: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RidgeConfig {
    pub mu1: Vec<f64>,
    pub mu2: Vec<f64>,
    pub k1: f64,
    pub k2: f64,
    pub lambda_prime: f64,
    pub beta_star: Vec<f64>,
    pub sigma_pop: Option<Vec<Vec<f64>>>,
    /// Majority sizes to sweep with `k2` fixed.
    pub k1_grid: Option<Vec<f64>>,
    /// Minority sizes to sweep with `k1` fixed.
    pub k2_grid: Option<Vec<f64>>,
    /// Per-coordinate noise variance for a sampled Gram matrix.
    pub noise_var: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    None,
    Fgm,
    Pgd,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "default_attack")]
    pub attack: AttackKind,
    #[serde(default = "default_steps")]
    pub pgd_steps: usize,
    pub step_size: Option<f64>,
    #[serde(default = "default_optimizer")]
    pub optimizer: Optimizer,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default = "default_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
}

fn default_attack() -> AttackKind {
    AttackKind::Pgd
}
fn default_steps() -> usize {
    10
}
fn default_optimizer() -> Optimizer {
    Optimizer::Adam
}
fn default_lr() -> f64 {
    0.01
}
fn default_batch() -> usize {
    64
}
fn default_epochs() -> usize {
    500
}
fn default_patience() -> usize {
    50
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_verify_n")]
    pub n_major: usize,
    #[serde(default = "default_sigmas")]
    pub sigmas: f64,
}

fn default_verify_n() -> usize {
    1_000_000
}
fn default_sigmas() -> f64 {
    3.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn load(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|source| CliError::ParseConfig {
        path: path.to_path_buf(),
        source,
    })
}

fn matrix(field: &str, rows: &[Vec<f64>], d: usize) -> CliResult<Matrix> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(CliError::config(field, format!("must be a {d}×{d} matrix")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Matrix::from_row_slice(d, d, &flat))
}

fn required<'a, T>(field: &str, value: &'a Option<T>) -> CliResult<&'a T> {
    value.as_ref().ok_or_else(|| CliError::config(field, "missing"))
}

impl ExperimentConfig {
    pub fn kind(&self) -> CliResult<Kind> {
        self.kind.ok_or_else(|| CliError::config("kind", "missing"))
    }

    pub fn scenario_id(&self) -> String {
        self.scenario_id.clone().unwrap_or_else(|| {
            match self.kind {
                Some(Kind::Gaussian) => "gaussian",
                Some(Kind::StableIc) => "stable_ic",
                Some(Kind::StableEc) => "stable_ec",
                Some(Kind::Cauchy) => "cauchy",
                Some(Kind::Ridge) => "ridge",
                Some(Kind::Train) => "train",
                None => "scenario",
            }
            .to_string()
        })
    }

    pub fn family(&self) -> CliResult<Family> {
        let dist = required("distribution", &self.distribution)?;
        let implied = match self.kind()? {
            Kind::Gaussian => Some(Family::Gaussian),
            Kind::StableIc => Some(Family::StableIc),
            Kind::StableEc => Some(Family::StableEc),
            Kind::Cauchy => Some(Family::Cauchy),
            Kind::Train | Kind::Ridge => None,
        };
        match (implied, dist.family) {
            (Some(k), Some(f)) if k != f => Err(CliError::config("distribution.family", "does not match kind")),
            (Some(k), _) => Ok(k),
            (None, Some(f)) => Ok(f),
            (None, None) => Err(CliError::config("distribution.family", "required for this kind")),
        }
    }

    /// The mixture at imbalance `r`.
    pub fn population(&self, r: f64) -> CliResult<Population> {
        let family = self.family()?;
        let dist = required("distribution", &self.distribution)?;
        let d = dist.theta_plus.len();
        if dist.theta_minus.len() != d {
            return Err(CliError::config("distribution.theta_minus", format!("must have length {d}")));
        }
        let tp = Vector::from_vec(dist.theta_plus.clone());
        let tm = Vector::from_vec(dist.theta_minus.clone());
        let field = "distribution";
        let alpha = |default: Option<f64>| -> CliResult<f64> {
            dist.alpha.or(default).ok_or_else(|| CliError::config("distribution.alpha", "missing"))
        };
        Ok(match family {
            Family::Gaussian => {
                let sigma = matrix("distribution.sigma", required("distribution.sigma", &dist.sigma)?, d)?;
                GaussianMixture::new(tp, tm, sigma, r).map_err(|e| CliError::in_field(field, e))?.into()
            }
            Family::StableEc => {
                let shape = matrix("distribution.sigma", required("distribution.sigma", &dist.sigma)?, d)?;
                SasMixture::elliptical(alpha(None)?, tp, tm, shape, r)
                    .map_err(|e| CliError::in_field(field, e))?
                    .into()
            }
            Family::StableIc | Family::Cauchy => {
                let a = alpha(if family == Family::Cauchy { Some(1.0) } else { None })?;
                if family == Family::Cauchy && a != 1.0 {
                    return Err(CliError::config("distribution.alpha", "must be 1 for the Cauchy family"));
                }
                let mix = match &dist.scales {
                    Some(scales) => {
                        if scales.len() != d {
                            return Err(CliError::config("distribution.scales", format!("must have length {d}")));
                        }
                        let s = Vector::from_vec(scales.clone());
                        let plus = MultivariateSas::independent(a, tp, s.clone()).map_err(|e| CliError::in_field(field, e))?;
                        let minus = MultivariateSas::independent(a, tm, s).map_err(|e| CliError::in_field(field, e))?;
                        SasMixture::new(plus, minus, r)
                    }
                    None => SasMixture::ic_unit(a, tp, tm, r),
                };
                mix.map_err(|e| CliError::in_field(field, e))?.into()
            }
        })
    }

    pub fn norm_indices(&self) -> CliResult<Vec<f64>> {
        let pert = required("perturbation", &self.perturbation)?;
        let ps: Vec<f64> = pert.p.to_vec().into_iter().map(NormIndex::value).collect();
        if ps.is_empty() {
            return Err(CliError::config("perturbation.p", "needs at least one value"));
        }
        Ok(ps)
    }

    pub fn epsilons(&self) -> CliResult<Vec<f64>> {
        Ok(required("perturbation", &self.perturbation)?.epsilons.clone())
    }

    pub fn perturbation(&self, p: f64, eps: f64) -> CliResult<PerturbSpec> {
        let spec = PerturbSpec::new(p, eps).map_err(|e| CliError::in_field("perturbation", e))?;
        match self.perturbation.as_ref().and_then(|c| c.kappa) {
            Some(k) => spec.with_kappa(k).map_err(|e| CliError::in_field("perturbation.kappa", e)),
            None => Ok(spec),
        }
    }

    pub fn imbalances(&self) -> Vec<f64> {
        self.grid.as_ref().map_or_else(default_imbalances, |g| g.imbalances.clone())
    }

    pub fn replicates(&self) -> Vec<u64> {
        self.grid.as_ref().map_or_else(default_replicates, |g| g.replicates.clone())
    }

    pub fn n_major(&self) -> CliResult<usize> {
        let n = required("monte_carlo", &self.monte_carlo)?.n_major;
        if n == 0 {
            return Err(CliError::config("monte_carlo.n_major", "must be ≥ 1"));
        }
        Ok(n)
    }

    /// Training hyperparameters; the perturbation is filled in per cell.
    pub fn train_config(&self) -> CliResult<TrainConfig> {
        let t = required("train", &self.train)?;
        let cfg = TrainConfig {
            attack: match t.attack {
                AttackKind::None => Attack::None,
                AttackKind::Fgm => Attack::Fgm,
                AttackKind::Pgd => Attack::Pgd {
                    steps: t.pgd_steps,
                    step_size: t.step_size,
                },
            },
            pert: PerturbSpec::new(2.0, 0.0).expect("valid"),
            optimizer: t.optimizer,
            lr: t.lr,
            batch: t.batch,
            max_epochs: t.max_epochs,
            patience: t.patience,
        };
        cfg.validate().map_err(|e| CliError::in_field("train", e))?;
        Ok(cfg)
    }

    pub fn ridge_scenario(&self) -> CliResult<RidgeScenario> {
        let r = required("ridge", &self.ridge)?;
        let d = r.mu1.len();
        let sigma = match &r.sigma_pop {
            Some(rows) => matrix("ridge.sigma_pop", rows, d)?,
            None => Matrix::zeros(d, d),
        };
        RidgeScenario::new(
            Vector::from_vec(r.mu1.clone()),
            Vector::from_vec(r.mu2.clone()),
            r.k1,
            r.k2,
            r.lambda_prime,
            Vector::from_vec(r.beta_star.clone()),
            sigma,
        )
        .map_err(|e| CliError::in_field("ridge", e))
    }
}
