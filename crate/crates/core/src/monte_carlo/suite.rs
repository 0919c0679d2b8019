//! The fixed regression suite comparing every closed-form class-wise loss
//! with indicator Monte Carlo.

use std::thread;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sweep::theory_predictors;
use super::{draw_class, error_counts, within_binomial_sigma, Population, Predictor};
use crate::error::{Error, Result};
use crate::gaussian::{classwise_losses, GaussianMixture, SolverOptions};
use crate::norms::lp_norm;
use crate::quadrature::QuadratureOptions;
use crate::rng::{seeded, sub_seed};
use crate::stable_theory::{sas_classwise_losses, SasMixture};
use crate::types::{Matrix, PerturbSpec, Vector};

/// Seed of the generator that draws the scenario parameters; the Monte-Carlo
/// seed never changes the scenarios themselves.
const SCENARIO_SEED: u64 = 0x5eed_0f_5ca1e;

const CHUNK: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Gaussian,
    StableIc,
    Cauchy,
    StableEc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub kind: ScenarioKind,
    pub population: Population,
    pub pert: PerturbSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    /// Negatives per scenario; positives are `round(n_major/R)`.
    pub n_major: usize,
    pub seed: u64,
    /// Allowed deviation in binomial standard deviations.
    pub sigmas: f64,
    /// Added to every intercept before sampling (fault injection).
    pub intercept_bias: f64,
    pub quad: QuadratureOptions,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            n_major: 1_000_000,
            seed: 1,
            sigmas: 3.0,
            intercept_bias: 0.0,
            quad: QuadratureOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub closed_form: f64,
    pub empirical: f64,
    pub n: usize,
    /// `|empirical − closed_form|` in binomial standard deviations.
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub id: String,
    pub kind: ScenarioKind,
    pub checks: Vec<Check>,
}

impl ScenarioResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub options: SuiteOptions,
    pub scenarios: Vec<ScenarioResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.scenarios.iter().all(ScenarioResult::passed)
    }

    pub fn failures(&self) -> usize {
        self.scenarios.iter().flat_map(|s| &s.checks).filter(|c| !c.pass).count()
    }
}

fn random_vec(rng: &mut impl Rng, d: usize, lo: f64, hi: f64) -> Vector {
    Vector::from_fn(d, |_, _| rng.random_range(lo..hi))
}

fn random_spd(rng: &mut impl Rng, d: usize) -> Matrix {
    let a = Matrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() / d as f64 + Matrix::identity(d, d) * 0.5
}

/// Four Gaussian, four independent-components, two Cauchy and two
/// elliptical scenarios.
pub fn default_scenarios() -> Result<Vec<Scenario>> {
    let mut rng = seeded(SCENARIO_SEED);
    let mut out = Vec::with_capacity(12);

    for (i, (d, r, p)) in [(2, 1.0, 2.0), (4, 5.0, f64::INFINITY), (7, 5.0, 2.0), (10, 1.0, f64::INFINITY)]
        .into_iter()
        .enumerate()
    {
        let tp = random_vec(&mut rng, d, -1.0, 1.0);
        let tm = random_vec(&mut rng, d, -1.0, 1.0);
        let sigma = random_spd(&mut rng, d);
        let mix = GaussianMixture::new(tp, tm, sigma, r)?;
        let eps = 0.2 * lp_norm(mix.theta_bar().as_slice(), p);
        out.push(Scenario {
            id: format!("gaussian-{}", i + 1),
            kind: ScenarioKind::Gaussian,
            population: mix.into(),
            pert: PerturbSpec::new(p, eps)?,
        });
    }

    for (i, (alpha, d, r, q)) in [(1.5, 2, 1.0, 1.5), (1.2, 3, 3.0, 2.0), (1.8, 4, 1.0, f64::INFINITY), (1.5, 3, 3.0, 1.0)]
        .into_iter()
        .enumerate()
    {
        let tp = random_vec(&mut rng, d, 0.0, 2.0);
        let tm = random_vec(&mut rng, d, -2.0, 0.0);
        let mix = SasMixture::ic_unit(alpha, tp, tm, r)?;
        let pert = PerturbSpec::from_dual(q, 0.0)?;
        let eps = 0.1 * lp_norm(mix.theta_bar().as_slice(), pert.p);
        out.push(Scenario {
            id: format!("stable-ic-{}", i + 1),
            kind: ScenarioKind::StableIc,
            population: mix.into(),
            pert: PerturbSpec::from_dual(q, eps)?,
        });
    }

    // a finite optimal intercept, then the collapse regime
    for (i, (tp, tm, r, eps)) in [([1.5, 0.3], [-1.5, 0.2], 2.0, 0.3), ([0.2, 0.1], [-0.2, -0.1], 10.0, 0.05)]
        .into_iter()
        .enumerate()
    {
        let mix = SasMixture::ic_unit(1.0, Vector::from_row_slice(&tp), Vector::from_row_slice(&tm), r)?;
        out.push(Scenario {
            id: format!("cauchy-{}", i + 1),
            kind: ScenarioKind::Cauchy,
            population: mix.into(),
            pert: PerturbSpec::new(f64::INFINITY, eps)?,
        });
    }

    for (i, (alpha, r)) in [(1.5, 1.0), (1.2, 2.0)].into_iter().enumerate() {
        let d = 3;
        let tp = random_vec(&mut rng, d, 0.0, 2.0);
        let tm = random_vec(&mut rng, d, -2.0, 0.0);
        let shape = random_spd(&mut rng, d);
        let mix = SasMixture::elliptical(alpha, tp, tm, shape, r)?;
        let eps = 0.1 * lp_norm(mix.theta_bar().as_slice(), 2.0);
        out.push(Scenario {
            id: format!("stable-ec-{}", i + 1),
            kind: ScenarioKind::StableEc,
            population: mix.into(),
            pert: PerturbSpec::new(2.0, eps)?,
        });
    }
    Ok(out)
}

/// Closed-form `(ℓ⁺, ℓ⁻)` of a rule; `robust` selects the robust losses.
fn closed_form(pop: &Population, pred: &Predictor, pert: &PerturbSpec, robust: bool, quad: &QuadratureOptions) -> Result<(f64, f64)> {
    let clf = match pred {
        Predictor::AlwaysNegative => return Ok((1.0, 0.0)),
        Predictor::Linear(c) => c,
    };
    let rep = match pop {
        Population::Gaussian(g) => classwise_losses(g, clf, Some(pert)),
        Population::Stable(s) => sas_classwise_losses(s, clf, Some(pert), quad)?,
    };
    Ok(if robust {
        rep.robust.expect("perturbation supplied")
    } else {
        (rep.loss_plus, rep.loss_minus)
    })
}

/// Error counts `[e⁺, n⁺, e⁻, n⁻]` for each `(rule, robust)` pair, streaming
/// the draws in chunks so memory stays bounded.
fn stream_counts(index: u64, pop: &Population, rules: &[(Predictor, bool)], pert: &PerturbSpec, opts: &SuiteOptions) -> Result<Vec<[usize; 4]>> {
    let n_minor = (opts.n_major as f64 / pop.imbalance()).round() as usize;
    let mut totals = vec![[0usize; 4]; rules.len()];
    for (label, n) in [(1_i8, n_minor), (-1, opts.n_major)] {
        let chunks = n.div_ceil(CHUNK);
        for c in 0..chunks {
            let len = CHUNK.min(n - c * CHUNK);
            let mut rng = seeded(sub_seed(opts.seed, &[index, (label > 0) as u64, c as u64]));
            let x = draw_class(pop, label, len, &mut rng)?;
            let labels = vec![label; len];
            for ((rule, robust), tot) in rules.iter().zip(totals.iter_mut()) {
                let counts = error_counts(&x, &labels, rule, robust.then_some(pert));
                for k in 0..4 {
                    tot[k] += counts[k];
                }
            }
        }
    }
    Ok(totals)
}

fn run_scenario(index: u64, sc: &Scenario, opts: &SuiteOptions) -> Result<ScenarioResult> {
    let (std, rob) = theory_predictors(&sc.population, &sc.pert, &SolverOptions::default(), &opts.quad)?;
    let rules = [(std, false), (rob.clone(), false), (rob, true)];
    let labels = ["standard", "robust", "robust-indicator"];
    let biased: Vec<(Predictor, bool)> = rules.iter().map(|(p, r)| (p.shifted(opts.intercept_bias), *r)).collect();
    let counts = stream_counts(index, &sc.population, &biased, &sc.pert, opts)?;

    let mut checks = Vec::new();
    for (((rule, robust), name), [ep, np, em, nm]) in rules.iter().zip(labels).zip(counts) {
        let (lp, lm) = closed_form(&sc.population, rule, &sc.pert, *robust, &opts.quad)?;
        for (side, expected, errors, n) in [("plus", lp, ep, np), ("minus", lm, em, nm)] {
            let empirical = errors as f64 / n as f64;
            let sd = (expected * (1.0 - expected) / n as f64).sqrt().max(1.0 / n as f64);
            checks.push(Check {
                name: format!("{name}/{side}"),
                closed_form: expected,
                empirical,
                n,
                z: (empirical - expected).abs() / sd,
                pass: within_binomial_sigma(expected, empirical, n, opts.sigmas),
            });
        }
    }
    Ok(ScenarioResult {
        id: sc.id.clone(),
        kind: sc.kind,
        checks,
    })
}

/// Runs `scenarios` in parallel, one thread per scenario.
pub fn verification_suite(scenarios: &[Scenario], opts: &SuiteOptions) -> Result<SuiteReport> {
    if opts.n_major == 0 {
        return Err(Error::invalid("n_major", "must be ≥ 1"));
    }
    let results: Vec<Result<ScenarioResult>> = thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .enumerate()
            .map(|(i, sc)| scope.spawn(move || run_scenario(i as u64, sc, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Domain("suite worker panicked".into()))))
            .collect()
    });
    Ok(SuiteReport {
        options: *opts,
        scenarios: results.into_iter().collect::<Result<_>>()?,
    })
}
