//! The five subcommands. Each returns the files it wrote.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use disparity_core::gaussian::{
    classwise_losses, direction_norm_certificates, solve_kkt, solve_robust, solve_standard, toy_example, Certificates, SolverOptions, ToyReport,
};
use disparity_core::monte_carlo::{
    default_scenarios, mean_sd, sweep, theory_predictors, verification_suite, ClassifierSource, EvalReport, Population, Predictor, ScenarioKind,
    SuiteOptions, SuiteReport, SweepGrid, SweepRow,
};
use disparity_core::ridge::{
    general_gram_disparity, group_disparity, log_log_slope, resolvent_envelopes, sample_gram, taylor_first_order, toy_orthogonal_disparity,
    BoundReport, RidgeScenario,
};
use disparity_core::stable_theory::{cauchy_analysis, sas_classwise_losses, CauchyQuadratics};
use disparity_core::{seeded, sub_seed, LossReport, PerturbSpec, QuadratureOptions};

use crate::config::{ExperimentConfig, Format, Kind};
use crate::error::{CliError, CliResult};
use crate::output::{junit_xml, write_atomic, write_json, write_table};

pub struct Context {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub format: Format,
}

impl Context {
    fn seed(&self) -> u64 {
        self.config.seed
    }

    fn replicate_seeds(&self) -> Vec<u64> {
        self.config.replicates().iter().map(|&r| sub_seed(self.seed(), &[r])).collect()
    }
}

fn format_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        p.to_string()
    }
}

/// One row of the loss table written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRow {
    pub scenario_id: String,
    #[serde(rename = "R")]
    pub imbalance: f64,
    pub p: String,
    pub epsilon: f64,
    pub loss_plus_std: f64,
    pub loss_minus_std: f64,
    pub loss_plus_rob: f64,
    pub loss_minus_rob: f64,
    /// Robust losses of the robust classifier.
    pub robust_loss_plus: f64,
    pub robust_loss_minus: f64,
    pub ad_std: f64,
    pub ad_rob: f64,
    pub gap: f64,
    pub in_half_region: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveEntry {
    pub imbalance: f64,
    pub perturbation: PerturbSpec,
    pub standard: Predictor,
    pub robust: Predictor,
    pub standard_losses: LossReport,
    pub robust_losses: LossReport,
    pub certificates: Option<Certificates>,
    pub cauchy: Option<CauchyQuadratics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub scenario_id: String,
    pub entries: Vec<SolveEntry>,
    pub toy: Option<ToyReport>,
}

impl SolveReport {
    /// Re-checks the invariants every emitted report must satisfy.
    pub fn validate(&self) -> Result<(), String> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        for e in &self.entries {
            for rep in [&e.standard_losses, &e.robust_losses] {
                if !in_unit(rep.loss_plus) || !in_unit(rep.loss_minus) {
                    return Err(format!("loss outside [0, 1] at R = {}", e.imbalance));
                }
                if (rep.ad - (rep.acc_minus - rep.acc_plus)).abs() > 1e-12 {
                    return Err("ad ≠ acc⁻ − acc⁺".into());
                }
            }
            if e.perturbation.epsilon < 0.0 {
                return Err("negative radius".into());
            }
        }
        Ok(())
    }
}

fn row_from(scenario_id: &str, pert: &PerturbSpec, std: &LossReport, rob: &LossReport) -> SolveRow {
    let (rp, rm) = rob.robust.unwrap_or((rob.loss_plus, rob.loss_minus));
    SolveRow {
        scenario_id: scenario_id.to_string(),
        imbalance: std.imbalance,
        p: format_p(pert.p),
        epsilon: pert.epsilon,
        loss_plus_std: std.loss_plus,
        loss_minus_std: std.loss_minus,
        loss_plus_rob: rob.loss_plus,
        loss_minus_rob: rob.loss_minus,
        robust_loss_plus: rp,
        robust_loss_minus: rm,
        ad_std: std.ad,
        ad_rob: rob.ad,
        gap: rob.ad - std.ad,
        in_half_region: [std.loss_plus, std.loss_minus, rob.loss_plus, rob.loss_minus].iter().all(|&l| l <= 0.5),
    }
}

fn solve_one(pop: &Population, pert: &PerturbSpec, quad: &QuadratureOptions) -> CliResult<SolveEntry> {
    let opts = SolverOptions::default();
    let imbalance = pop.imbalance();
    match pop {
        Population::Gaussian(g) => {
            let std = solve_standard(g)?.classifier;
            let (rob, certificates) = if pert.epsilon == 0.0 {
                (std.clone(), None)
            } else {
                let rob = solve_robust(g, pert, &opts)?.classifier;
                let kkt = solve_kkt(g, pert, &opts)?;
                (rob, Some(direction_norm_certificates(&kkt, g, pert)?))
            };
            Ok(SolveEntry {
                imbalance,
                perturbation: *pert,
                standard_losses: classwise_losses(g, &std, Some(pert)),
                robust_losses: classwise_losses(g, &rob, Some(pert)),
                standard: std.into(),
                robust: rob.into(),
                certificates,
                cauchy: None,
            })
        }
        Population::Stable(s) if s.alpha() == 1.0 && !s.is_elliptical() => {
            let an = cauchy_analysis(s, pert, quad)?;
            let (standard, robust) = theory_predictors(pop, pert, &opts, quad)?;
            Ok(SolveEntry {
                imbalance,
                perturbation: *pert,
                standard,
                robust,
                standard_losses: an.std_report,
                robust_losses: an.rob_report,
                certificates: None,
                cauchy: Some(an.quadratics),
            })
        }
        Population::Stable(s) => {
            let (standard, robust) = theory_predictors(pop, pert, &opts, quad)?;
            let losses = |p: &Predictor| -> CliResult<LossReport> {
                match p {
                    Predictor::Linear(c) => Ok(sas_classwise_losses(s, c, Some(pert), quad)?),
                    Predictor::AlwaysNegative => unreachable!("smooth stable solvers return linear rules"),
                }
            };
            Ok(SolveEntry {
                imbalance,
                perturbation: *pert,
                standard_losses: losses(&standard)?,
                robust_losses: losses(&robust)?,
                standard,
                robust,
                certificates: None,
                cauchy: None,
            })
        }
    }
}

pub fn cmd_solve(ctx: &Context) -> CliResult<Vec<PathBuf>> {
    let cfg = &ctx.config;
    let id = cfg.scenario_id();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut toy = None;

    if let Some(t) = &cfg.toy {
        let report = toy_example(t.m, t.n, t.eta, t.gamma, t.epsilon, t.imbalance).map_err(|e| CliError::in_field("toy", e))?;
        let pert = PerturbSpec::new(f64::INFINITY, t.epsilon).map_err(|e| CliError::in_field("toy.epsilon", e))?;
        rows.push(row_from(&id, &pert, &report.std_report, &report.rob_report));
        toy = Some(report);
    } else {
        match cfg.kind()? {
            Kind::Gaussian | Kind::StableIc | Kind::StableEc | Kind::Cauchy => {}
            other => return Err(CliError::config("kind", format!("{other:?} is not solvable; use the matching subcommand"))),
        }
        let ps = cfg.norm_indices()?;
        let epsilons = cfg.epsilons()?;
        let quad = QuadratureOptions::default();
        for &r in &cfg.imbalances() {
            let pop = cfg.population(r)?;
            if let Population::Stable(s) = &pop {
                if s.alpha() == 1.0 && !s.is_elliptical() && ps.iter().any(|p| p.is_finite()) {
                    return Err(CliError::config("perturbation.p", "the Cauchy analysis covers ℓ∞ perturbations only"));
                }
            }
            for &p in &ps {
                for &eps in &epsilons {
                    let pert = cfg.perturbation(p, eps)?;
                    let entry = solve_one(&pop, &pert, &quad)?;
                    rows.push(row_from(&id, &pert, &entry.standard_losses, &entry.robust_losses));
                    entries.push(entry);
                }
            }
        }
    }

    let report = SolveReport {
        scenario_id: id,
        entries,
        toy,
    };
    report.validate().map_err(|reason| CliError::Numerical(disparity_core::Error::Domain(reason)))?;
    let table = write_table(&ctx.out_dir, "solve", &rows, ctx.format)?;
    let json = ctx.out_dir.join("solve_report.json");
    write_json(&json, &report)?;
    Ok(vec![table, json])
}

/// One row of the sweep table; the column set is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub scenario_id: String,
    #[serde(rename = "R")]
    pub imbalance: f64,
    pub p: String,
    pub epsilon: f64,
    pub seed: u64,
    pub acc_plus: f64,
    pub acc_minus: f64,
    pub acc_overall: f64,
    pub ad: f64,
    pub ad_gap: f64,
    pub ci_halfwidth: f64,
}

impl From<&SweepRow> for SweepCsvRow {
    fn from(r: &SweepRow) -> Self {
        Self {
            scenario_id: r.scenario_id.clone(),
            imbalance: r.imbalance,
            p: format_p(r.p),
            epsilon: r.epsilon,
            seed: r.seed,
            acc_plus: r.report.acc_plus,
            acc_minus: r.report.acc_minus,
            acc_overall: r.report.acc_overall,
            ad: r.report.ad,
            ad_gap: r.report.ad_gap.unwrap_or(0.0),
            ci_halfwidth: r.report.ci_halfwidth,
        }
    }
}

/// Mean ± sample sd over seeds for one `(R, p, ε)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scenario_id: String,
    #[serde(rename = "R")]
    pub imbalance: f64,
    pub p: String,
    pub epsilon: f64,
    pub n_seeds: usize,
    pub acc_plus_mean: f64,
    pub acc_plus_sd: f64,
    pub acc_minus_mean: f64,
    pub acc_minus_sd: f64,
    pub acc_overall_mean: f64,
    pub acc_overall_sd: f64,
    pub ad_mean: f64,
    pub ad_sd: f64,
    pub ad_gap_mean: f64,
    pub ad_gap_sd: f64,
    /// Share of evaluation points labelled negative, standard classifier.
    pub majority_rate_std_mean: f64,
    /// Same for the robust classifier.
    pub majority_rate_rob_mean: f64,
}

fn majority_rate(r: &EvalReport) -> f64 {
    let n = (r.n_plus + r.n_minus) as f64;
    (r.n_minus as f64 * r.acc_minus + r.n_plus as f64 * r.loss_plus) / n
}

pub fn aggregate(rows: &[SweepRow]) -> Vec<AggregateRow> {
    let mut out: Vec<AggregateRow> = Vec::new();
    let mut keys: Vec<(f64, f64, f64)> = Vec::new();
    for r in rows {
        let key = (r.imbalance, r.p, r.epsilon);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    for (imbalance, p, epsilon) in keys {
        let cell: Vec<&SweepRow> = rows.iter().filter(|r| (r.imbalance, r.p, r.epsilon) == (imbalance, p, epsilon)).collect();
        let stat = |f: &dyn Fn(&EvalReport) -> f64| mean_sd(&cell.iter().map(|r| f(&r.report)).collect::<Vec<_>>());
        let (acc_plus_mean, acc_plus_sd) = stat(&|r| r.acc_plus);
        let (acc_minus_mean, acc_minus_sd) = stat(&|r| r.acc_minus);
        let (acc_overall_mean, acc_overall_sd) = stat(&|r| r.acc_overall);
        let (ad_mean, ad_sd) = stat(&|r| r.ad);
        let (ad_gap_mean, ad_gap_sd) = stat(&|r| r.ad_gap.unwrap_or(0.0));
        out.push(AggregateRow {
            scenario_id: cell[0].scenario_id.clone(),
            imbalance,
            p: format_p(p),
            epsilon,
            n_seeds: cell.len(),
            acc_plus_mean,
            acc_plus_sd,
            acc_minus_mean,
            acc_minus_sd,
            acc_overall_mean,
            acc_overall_sd,
            ad_mean,
            ad_sd,
            ad_gap_mean,
            ad_gap_sd,
            majority_rate_std_mean: mean_sd(&cell.iter().map(|r| majority_rate(&r.baseline)).collect::<Vec<_>>()).0,
            majority_rate_rob_mean: stat(&majority_rate).0,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub scenario_id: String,
    pub source: ClassifierSource,
    pub n_major: usize,
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<AggregateRow>,
}

fn run_sweep(ctx: &Context, source: ClassifierSource) -> CliResult<SweepReport> {
    let cfg = &ctx.config;
    cfg.family()?;
    let imbalances = cfg.imbalances();
    let base = cfg.population(*imbalances.first().unwrap_or(&1.0))?;
    let grid = SweepGrid {
        imbalances,
        epsilons: cfg.epsilons()?,
        ps: cfg.norm_indices()?,
        seeds: ctx.replicate_seeds(),
    };
    for &p in &grid.ps {
        for &eps in &grid.epsilons {
            cfg.perturbation(p, eps)?;
        }
    }
    let n_major = cfg.n_major()?;
    let id = cfg.scenario_id();
    let rows = sweep(&id, &base, &grid, n_major, &source)?;
    Ok(SweepReport {
        scenario_id: id,
        source,
        n_major,
        aggregates: aggregate(&rows),
        rows,
    })
}

pub fn cmd_sweep(ctx: &Context) -> CliResult<Vec<PathBuf>> {
    let source = match &ctx.config.train {
        Some(_) => ClassifierSource::Trained(ctx.config.train_config()?),
        None => ClassifierSource::Theory,
    };
    let report = run_sweep(ctx, source)?;
    let rows: Vec<SweepCsvRow> = report.rows.iter().map(SweepCsvRow::from).collect();
    let table = write_table(&ctx.out_dir, "sweep", &rows, ctx.format)?;
    let json = ctx.out_dir.join("sweep_report.json");
    write_json(&json, &report)?;
    Ok(vec![table, json])
}

pub fn cmd_train(ctx: &Context) -> CliResult<Vec<PathBuf>> {
    if ctx.config.kind()? != Kind::Train {
        return Err(CliError::config("kind", "train needs kind = \"train\""));
    }
    let report = run_sweep(ctx, ClassifierSource::Trained(ctx.config.train_config()?))?;
    let table = write_table(&ctx.out_dir, "train", &report.aggregates, ctx.format)?;
    let json = ctx.out_dir.join("train_report.json");
    write_json(&json, &report)?;
    Ok(vec![table, json])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeRow {
    pub scenario_id: String,
    pub k1: f64,
    pub k2: f64,
    pub lambda_prime: f64,
    pub g1: f64,
    pub g2: f64,
    pub g1_dense: f64,
    pub g2_dense: f64,
    /// `λ'|m_i|/(k_i n_i + λ')`, for orthogonal means only.
    pub toy1: Option<f64>,
    pub toy2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledGram {
    pub noise_var: f64,
    pub g_sampled: [f64; 2],
    pub g_taylor: [f64; 2],
    pub reconstruction_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeReport {
    pub scenario: RidgeScenario,
    pub rows: Vec<RidgeRow>,
    /// Log-log slope of `|g₁|` against `k₁` over `k1_grid`.
    pub slope_k1: Option<f64>,
    /// Log-log slope of `|g₂|` against `k₂` over `k2_grid`.
    pub slope_k2: Option<f64>,
    pub bounds: Option<BoundReport>,
    pub resolvent_envelopes: [(f64, f64); 2],
    pub sampled: Option<SampledGram>,
}

fn ridge_row(id: &str, scn: &RidgeScenario) -> CliResult<RidgeRow> {
    let general = general_gram_disparity(scn, false)?;
    let toy = toy_orthogonal_disparity(scn).ok();
    Ok(RidgeRow {
        scenario_id: id.to_string(),
        k1: scn.k1,
        k2: scn.k2,
        lambda_prime: scn.lambda_prime,
        g1: general.spectral[0],
        g2: general.spectral[1],
        g1_dense: general.dense[0],
        g2_dense: general.dense[1],
        toy1: toy.as_ref().map(|t| t.closed_form[0]),
        toy2: toy.as_ref().map(|t| t.closed_form[1]),
    })
}

pub fn cmd_ridge(ctx: &Context) -> CliResult<Vec<PathBuf>> {
    let cfg = &ctx.config;
    if cfg.kind()? != Kind::Ridge {
        return Err(CliError::config("kind", "ridge needs kind = \"ridge\""));
    }
    let scn = cfg.ridge_scenario()?;
    let section = cfg.ridge.as_ref().expect("checked by ridge_scenario");
    let id = cfg.scenario_id();
    let mut rows = vec![ridge_row(&id, &scn)?];

    let mut slope = |grid: &Option<Vec<f64>>, first: bool| -> CliResult<Option<f64>> {
        let Some(grid) = grid else { return Ok(None) };
        let mut ks = Vec::new();
        let mut gs = Vec::new();
        for &k in grid {
            let (k1, k2) = if first { (k, scn.k2) } else { (scn.k1, k) };
            let field = if first { "ridge.k1_grid" } else { "ridge.k2_grid" };
            let s = RidgeScenario::new(scn.mu1.clone(), scn.mu2.clone(), k1, k2, scn.lambda_prime, scn.beta_star.clone(), scn.sigma_pop.clone())
                .map_err(|e| CliError::in_field(field, e))?;
            let row = ridge_row(&id, &s)?;
            ks.push(k);
            gs.push(if first { row.g1.abs() } else { row.g2.abs() });
            rows.push(row);
        }
        Ok(log_log_slope(&ks, &gs).ok())
    };
    let slope_k1 = slope(&section.k1_grid, true)?;
    let slope_k2 = slope(&section.k2_grid, false)?;

    let bounds = if scn.imbalance() > scn.n2() / scn.n1() {
        general_gram_disparity(&scn, true)?.bounds
    } else {
        None
    };
    let sampled = match section.noise_var {
        Some(var) => {
            let pair = sample_gram(&scn, var, &mut seeded(sub_seed(ctx.seed(), &[0])))
                .map_err(|e| CliError::in_field("ridge.noise_var", e))?;
            Some(SampledGram {
                noise_var: var,
                g_sampled: group_disparity(&scn, &pair.s_prime)?,
                g_taylor: taylor_first_order(&scn, &pair.s_prime)?.g_tilde,
                reconstruction_error: pair.reconstruction_error(&scn),
            })
        }
        None => None,
    };
    let report = RidgeReport {
        resolvent_envelopes: resolvent_envelopes(&scn)?,
        scenario: scn,
        rows: rows.clone(),
        slope_k1,
        slope_k2,
        bounds,
        sampled,
    };
    let table = write_table(&ctx.out_dir, "ridge", &rows, ctx.format)?;
    let json = ctx.out_dir.join("ridge_report.json");
    write_json(&json, &report)?;
    Ok(vec![table, json])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub scenario_id: String,
    pub kind: ScenarioKind,
    pub check: String,
    pub closed_form: f64,
    pub empirical: f64,
    pub n: usize,
    pub z: f64,
    pub pass: bool,
}

/// Runs the regression suite; a failed check is reported after all files
/// are written.
pub fn cmd_verify(ctx: &Context, junit: bool, intercept_bias: f64) -> CliResult<Vec<PathBuf>> {
    let defaults = SuiteOptions::default();
    let (n_major, sigmas) = match &ctx.config.verify {
        Some(v) => (v.n_major, v.sigmas),
        None => (defaults.n_major, defaults.sigmas),
    };
    if n_major == 0 {
        return Err(CliError::config("verify.n_major", "must be ≥ 1"));
    }
    if !(sigmas > 0.0) {
        return Err(CliError::config("verify.sigmas", "must be > 0"));
    }
    let opts = SuiteOptions {
        n_major,
        sigmas,
        seed: ctx.seed(),
        intercept_bias,
        ..defaults
    };
    let scenarios = default_scenarios()?;
    let report: SuiteReport = verification_suite(&scenarios, &opts)?;
    let rows: Vec<VerifyRow> = report
        .scenarios
        .iter()
        .flat_map(|s| {
            s.checks.iter().map(|c| VerifyRow {
                scenario_id: s.id.clone(),
                kind: s.kind,
                check: c.name.clone(),
                closed_form: c.closed_form,
                empirical: c.empirical,
                n: c.n,
                z: c.z,
                pass: c.pass,
            })
        })
        .collect();
    let mut written = vec![write_table(&ctx.out_dir, "verify", &rows, ctx.format)?];
    let json = ctx.out_dir.join("verify_report.json");
    write_json(&json, &report)?;
    written.push(json);
    if junit {
        let path = ctx.out_dir.join("verify.junit.xml");
        write_atomic(&path, junit_xml(&report)?.as_bytes())?;
        written.push(path);
    }
    if !report.passed() {
        for path in &written {
            println!("wrote {}", path.display());
        }
        return Err(CliError::Verification {
            failures: report.failures(),
        });
    }
    Ok(written)
}

pub fn out_dir_for(config: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.output.as_ref().and_then(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}
