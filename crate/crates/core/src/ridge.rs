//! Group-wise accuracy disparity of ridge regression on a two-group
//! realizable linear model `y = ⟨x, β*⟩`, where group `i` has mean `μ_i` and
//! `k_i` training rows.
//!
//! The disparity functional is `g_i(S) = μ_i'((S + λ'I)⁻¹S − I)β*
//! = −λ' μ_i'(S + λ'I)⁻¹β*` for a Gram matrix `S`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rank2_eigen, spd_solve, Rank2Eigen, Rank2Gram};
use crate::rng::SeededRng;
use crate::types::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeScenario {
    pub mu1: Vector,
    pub mu2: Vector,
    /// Majority group size.
    pub k1: f64,
    /// Minority group size.
    pub k2: f64,
    /// `λ' = 2Nλ`.
    pub lambda_prime: f64,
    pub beta_star: Vector,
    /// Within-group covariance used for population losses.
    pub sigma_pop: Matrix,
}

impl RidgeScenario {
    pub fn new(mu1: Vector, mu2: Vector, k1: f64, k2: f64, lambda_prime: f64, beta_star: Vector, sigma_pop: Matrix) -> Result<Self> {
        let d = mu1.len();
        if d == 0 || mu2.len() != d || beta_star.len() != d {
            return Err(Error::invalid("mu1, mu2, beta_star", "must be non-empty and of equal length"));
        }
        if sigma_pop.shape() != (d, d) {
            return Err(Error::invalid("sigma_pop", format!("must be {d}×{d}")));
        }
        if !(k2 >= 1.0 && k1 >= k2) {
            return Err(Error::invalid("k1, k2", format!("need k1 ≥ k2 ≥ 1, got k1 = {k1}, k2 = {k2}")));
        }
        if !(lambda_prime > 0.0) {
            return Err(Error::invalid("lambda_prime", "must be > 0"));
        }
        Ok(Self {
            mu1,
            mu2,
            k1,
            k2,
            lambda_prime,
            beta_star,
            sigma_pop,
        })
    }

    /// Zero within-group covariance.
    pub fn at_means(mu1: Vector, mu2: Vector, k1: f64, k2: f64, lambda_prime: f64, beta_star: Vector) -> Result<Self> {
        let d = mu1.len();
        Self::new(mu1, mu2, k1, k2, lambda_prime, beta_star, Matrix::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.mu1.len()
    }

    pub fn n1(&self) -> f64 {
        self.mu1.norm_squared()
    }

    pub fn n2(&self) -> f64 {
        self.mu2.norm_squared()
    }

    /// `⟨μ₁, μ₂⟩`.
    pub fn mean_inner(&self) -> f64 {
        self.mu1.dot(&self.mu2)
    }

    pub fn m1(&self) -> f64 {
        self.mu1.dot(&self.beta_star)
    }

    pub fn m2(&self) -> f64 {
        self.mu2.dot(&self.beta_star)
    }

    /// `K = k₁/k₂`.
    pub fn imbalance(&self) -> f64 {
        self.k1 / self.k2
    }

    /// `S = k₁μ₁μ₁' + k₂μ₂μ₂'`.
    pub fn ideal_gram(&self) -> Matrix {
        &self.mu1 * self.mu1.transpose() * self.k1 + &self.mu2 * self.mu2.transpose() * self.k2
    }

    /// `u = √k₁ μ₁`, `v = √k₂ μ₂`, so that `S = uu' + vv'`.
    pub fn weighted_pair(&self) -> Result<Rank2Gram> {
        Rank2Gram::new(&self.mu1 * self.k1.sqrt(), &self.mu2 * self.k2.sqrt())
    }

    fn means(&self) -> [&Vector; 2] {
        [&self.mu1, &self.mu2]
    }
}

fn shifted(s: &Matrix, lambda_prime: f64) -> Matrix {
    s + Matrix::identity(s.nrows(), s.ncols()) * lambda_prime
}

/// `β̂ = (S + λ'I)⁻¹Sβ*` for a Gram matrix `S = X'X`.
pub fn ridge_estimate(gram: &Matrix, lambda_prime: f64, beta_star: &Vector) -> Result<Vector> {
    if !(lambda_prime > 0.0) {
        return Err(Error::invalid("lambda_prime", "must be > 0"));
    }
    spd_solve(&shifted(gram, lambda_prime), &(gram * beta_star))
}

/// Same as [`ridge_estimate`] from a design matrix with one row per sample.
pub fn ridge_estimate_design(design: &Matrix, lambda_prime: f64, beta_star: &Vector) -> Result<Vector> {
    ridge_estimate(&(design.transpose() * design), lambda_prime, beta_star)
}

/// Ordinary least squares on realizable labels `y = Xβ*`.
pub fn ols_estimate(design: &Matrix, beta_star: &Vector) -> Result<Vector> {
    let gram = design.transpose() * design;
    spd_solve(&gram, &(design.transpose() * (design * beta_star)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupLosses {
    pub loss1: f64,
    pub loss2: f64,
    /// `½(β − β*)'Σ(β − β*)`, shared by both groups.
    pub common: f64,
    /// `|⟨μ_i, β − β*⟩|`.
    pub terms: [f64; 2],
}

/// `ℓ_i(β) = ½(β − β*)'Σ(β − β*) + ½⟨μ_i, β − β*⟩²`.
pub fn population_group_loss(scn: &RidgeScenario, beta: &Vector) -> GroupLosses {
    let diff = beta - &scn.beta_star;
    let common = 0.5 * diff.dot(&(&scn.sigma_pop * &diff));
    let terms = [scn.mu1.dot(&diff).abs(), scn.mu2.dot(&diff).abs()];
    GroupLosses {
        loss1: common + 0.5 * terms[0] * terms[0],
        loss2: common + 0.5 * terms[1] * terms[1],
        common,
        terms,
    }
}

/// `E[x'Ax] = Tr(AΣ) + μ'Aμ`.
pub fn quadratic_form_expectation(a: &Matrix, sigma: &Matrix, mu: &Vector) -> f64 {
    (a * sigma).trace() + mu.dot(&(a * mu))
}

/// `g_i(S) = −λ' μ_i'(S + λ'I)⁻¹β*` by a dense solve.
pub fn group_disparity(scn: &RidgeScenario, gram: &Matrix) -> Result<[f64; 2]> {
    let p_beta = spd_solve(&shifted(gram, scn.lambda_prime), &scn.beta_star)?;
    Ok(scn.means().map(|mu| -scn.lambda_prime * mu.dot(&p_beta)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyRidge {
    /// `λ'|m_i| / (k_i n_i + λ')`.
    pub closed_form: [f64; 2],
    /// `|⟨μ_i, β̂ − β*⟩|` from an explicit ridge solve.
    pub solved: [f64; 2],
}

/// Orthogonal means with data at the means: the disparity terms are
/// `λ'|m_i|/(k_i n_i + λ')`, i.e. `Θ(1/k_i)`. The nonzero spectrum of `S` is
/// `k_i n_i` with `n_i = ‖μ_i‖²`.
pub fn toy_orthogonal_disparity(scn: &RidgeScenario) -> Result<ToyRidge> {
    let inner = scn.mean_inner();
    if inner.abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "means are not orthogonal (⟨μ₁, μ₂⟩ = {inner:e}); use general_gram_disparity"
        )));
    }
    let lp = scn.lambda_prime;
    let closed_form = [
        lp * scn.m1().abs() / (scn.k1 * scn.n1() + lp),
        lp * scn.m2().abs() / (scn.k2 * scn.n2() + lp),
    ];
    let beta = ridge_estimate(&scn.ideal_gram(), lp, &scn.beta_star)?;
    let solved = population_group_loss(scn, &beta).terms;
    Ok(ToyRidge { closed_form, solved })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `1/k₁ + (k₂n² + |n|)/k₁` with unit constants.
    pub envelope1: f64,
    /// `1/k₂ − k₂n²/k₁ − |n|/k₂` with unit constants.
    pub envelope2: f64,
    pub g1_within: bool,
    pub g2_beyond: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralDisparity {
    /// `g_i(S)` through the rank-2 eigendecomposition.
    pub spectral: [f64; 2],
    /// `g_i(S)` through a dense solve.
    pub dense: [f64; 2],
    pub eigen: Rank2Eigen,
    pub bounds: Option<BoundReport>,
}

/// `g_i(S) = Σ_j λ_j/(λ_j + λ')(μ_i'v_j)(v_j'β*) − m_i` over the two nonzero
/// eigenpairs of `S`.
fn spectral_disparity(scn: &RidgeScenario, eig: &Rank2Eigen) -> [f64; 2] {
    let lp = scn.lambda_prime;
    let pairs = [(eig.lambda1, &eig.v1), (eig.lambda2, &eig.v2)];
    scn.means().map(|mu| {
        let shrunk: f64 = pairs
            .iter()
            .map(|(l, v)| l / (l + lp) * mu.dot(v) * v.dot(&scn.beta_star))
            .sum();
        shrunk - mu.dot(&scn.beta_star)
    })
}

/// Exact `g₁(S)`, `g₂(S)` for data at the means, by two independent paths.
/// With `with_bounds`, also evaluates the non-orthogonal envelopes with unit
/// constants (diagnostic only); this requires `K > n₂/n₁`.
pub fn general_gram_disparity(scn: &RidgeScenario, with_bounds: bool) -> Result<GeneralDisparity> {
    let eigen = rank2_eigen(&scn.weighted_pair()?)?;
    let spectral = spectral_disparity(scn, &eigen);
    let dense = group_disparity(scn, &scn.ideal_gram())?;
    let bounds = if with_bounds {
        let (n1, n2) = (scn.n1(), scn.n2());
        if scn.imbalance() <= n2 / n1 {
            return Err(Error::invalid(
                "k1, k2",
                format!("envelopes need K > n₂/n₁ = {}, got K = {}", n2 / n1, scn.imbalance()),
            ));
        }
        let n = scn.mean_inner().abs();
        let envelope1 = 1.0 / scn.k1 + (scn.k2 * n * n + n) / scn.k1;
        let envelope2 = 1.0 / scn.k2 - scn.k2 * n * n / scn.k1 - n / scn.k2;
        Some(BoundReport {
            envelope1,
            envelope2,
            g1_within: spectral[0].abs() <= envelope1,
            g2_beyond: spectral[1].abs() >= envelope2,
        })
    } else {
        None
    };
    Ok(GeneralDisparity {
        spectral,
        dense,
        eigen,
        bounds,
    })
}

/// `(S + λ'I)⁻¹ = I/λ' + Σ_j (1/(λ_j + λ') − 1/λ') v_j v_j'` for the ideal Gram.
pub fn spectral_resolvent(scn: &RidgeScenario, eig: &Rank2Eigen) -> Matrix {
    let lp = scn.lambda_prime;
    let d = scn.dim();
    let mut p = Matrix::identity(d, d) / lp;
    for (l, v) in [(eig.lambda1, &eig.v1), (eig.lambda2, &eig.v2)] {
        p += v * v.transpose() * (1.0 / (l + lp) - 1.0 / lp);
    }
    p
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorReport {
    /// `M_i = λ' P μ_i β*' P` with `P = (S + λ'I)⁻¹`.
    pub m: [Matrix; 2],
    pub g_at_s: [f64; 2],
    /// `g̃_i(S') = g_i(S) + ⟨M_i, S' − S⟩`.
    pub g_tilde: [f64; 2],
}

fn frobenius(a: &Matrix, b: &Matrix) -> f64 {
    a.dot(b)
}

/// Derivative matrices of `g_i` at the ideal Gram `S` and the first-order
/// approximation at `S'`.
pub fn taylor_first_order(scn: &RidgeScenario, s_prime: &Matrix) -> Result<TaylorReport> {
    let eig = rank2_eigen(&scn.weighted_pair()?)?;
    let p = spectral_resolvent(scn, &eig);
    let g_at_s = spectral_disparity(scn, &eig);
    let pb = &p * &scn.beta_star;
    let m = scn.means().map(|mu| (&p * mu) * pb.transpose() * scn.lambda_prime);
    let diff = s_prime - scn.ideal_gram();
    let g_tilde = [
        g_at_s[0] + frobenius(&m[0], &diff),
        g_at_s[1] + frobenius(&m[1], &diff),
    ];
    Ok(TaylorReport { m, g_at_s, g_tilde })
}

/// `((g_i(S + tΔ) − g_i(S))/t, ⟨M_i, Δ⟩)` for both groups.
pub fn directional_derivative_check(scn: &RidgeScenario, direction: &Matrix, t: f64) -> Result<[(f64, f64); 2]> {
    let s = scn.ideal_gram();
    let base = group_disparity(scn, &s)?;
    let moved = group_disparity(scn, &(&s + direction * t))?;
    let rep = taylor_first_order(scn, &s)?;
    Ok([0, 1].map(|i| ((moved[i] - base[i]) / t, frobenius(&rep.m[i], direction))))
}

/// `(‖(S + λ'I)⁻²μ₁‖, 1/k₁² + √k₂|n|/(k₁λ₂^{3/2}))` and
/// `(‖(S + λ'I)⁻²μ₂‖, 1/λ₂²)`; unit constants, diagnostic only.
pub fn resolvent_envelopes(scn: &RidgeScenario) -> Result<[(f64, f64); 2]> {
    let eig = rank2_eigen(&scn.weighted_pair()?)?;
    let p = spectral_resolvent(scn, &eig);
    let p2 = &p * &p;
    let l2 = eig.lambda2;
    Ok([
        (
            (&p2 * &scn.mu1).norm(),
            1.0 / (scn.k1 * scn.k1) + scn.k2.sqrt() * scn.mean_inner().abs() / (scn.k1 * l2.powf(1.5)),
        ),
        ((&p2 * &scn.mu2).norm(), 1.0 / (l2 * l2)),
    ])
}

/// Ideal and noisy Gram matrices with the pieces of
/// `S' − S = εμ₁' + μ₁ε' + δμ₂' + μ₂δ' + Q`, where `ε = Σε_i`, `δ = Σδ_j` and
/// `Q = Σε_iε_i' + Σδ_jδ_j'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramPair {
    pub s: Matrix,
    pub s_prime: Matrix,
    pub eps: Vector,
    pub delta: Vector,
    pub q: Matrix,
}

impl GramPair {
    /// `‖S' − S − (εμ₁' + μ₁ε' + δμ₂' + μ₂δ' + Q)‖_max`.
    pub fn reconstruction_error(&self, scn: &RidgeScenario) -> f64 {
        let e1 = &self.eps * scn.mu1.transpose();
        let e2 = &self.delta * scn.mu2.transpose();
        let rebuilt = &e1 + e1.transpose() + &e2 + e2.transpose() + &self.q;
        (&self.s_prime - &self.s - rebuilt).amax()
    }
}

/// Rows `μ₁ + ε_i` (`k₁` of them) and `μ₂ + δ_j` (`k₂`), Gaussian noise with
/// per-coordinate variance `noise_var`.
pub fn sample_gram(scn: &RidgeScenario, noise_var: f64, rng: &mut SeededRng) -> Result<GramPair> {
    if !(noise_var >= 0.0) {
        return Err(Error::invalid("noise_var", "must be ≥ 0"));
    }
    let d = scn.dim();
    let sd = noise_var.sqrt();
    let mut s_prime = Matrix::zeros(d, d);
    let mut q = Matrix::zeros(d, d);
    let mut sums = [Vector::zeros(d), Vector::zeros(d)];
    for (group, (mu, count)) in [(&scn.mu1, scn.k1), (&scn.mu2, scn.k2)].into_iter().enumerate() {
        for _ in 0..count.round() as usize {
            let noise = Vector::from_fn(d, |_, _| sd * rng.sample::<f64, _>(StandardNormal));
            let row = mu + &noise;
            s_prime += &row * row.transpose();
            q += &noise * noise.transpose();
            sums[group] += noise;
        }
    }
    let [eps, delta] = sums;
    let rounded = RidgeScenario {
        k1: scn.k1.round(),
        k2: scn.k2.round(),
        ..scn.clone()
    };
    Ok(GramPair {
        s: rounded.ideal_gram(),
        s_prime,
        eps,
        delta,
        q,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("xs, ys", "need at least two paired points"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("xs, ys", "log-log fit needs positive values"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
