//! Optimal standard and ℓp-robust linear classifiers for two-component
//! Gaussian mixtures `N(θ⁺, Σ)` / `N(θ⁻, Σ)` with imbalance `R = P(−)/P(+)`.
//!
//! The standard direction solves `Σu = θ̄`, the robust one minimises
//! `F(v) = ½v'Σv − θ̄'v + 2ε‖v‖_q`, whose stationarity condition is
//! `Σv = θ̄ − 2ε∂‖v‖_q`. Intercepts follow from the first-order condition in `b`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};
use crate::linalg::{spd_solve, spd_sqrt};
use crate::norms::{dual_index, lp_norm, lq_norm_gradient, subgradient_gap};
use crate::prox::prox_lq;
use crate::types::{check_imbalance, LinearClassifier, LossReport, Matrix, PerturbSpec, Provenance, Vector};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub theta_plus: Vector,
    pub theta_minus: Vector,
    pub sigma: Matrix,
    pub imbalance: f64,
}

impl GaussianMixture {
    pub fn new(theta_plus: Vector, theta_minus: Vector, sigma: Matrix, imbalance: f64) -> Result<Self> {
        let d = theta_plus.len();
        if d == 0 || theta_minus.len() != d {
            return Err(Error::invalid("theta", "class means must be non-empty and of equal length"));
        }
        if sigma.shape() != (d, d) {
            return Err(Error::invalid("sigma", format!("must be {d}×{d}")));
        }
        if (&sigma - sigma.transpose()).amax() > 1e-12 * sigma.amax().max(1.0) {
            return Err(Error::invalid("sigma", "must be symmetric"));
        }
        let min = sigma.clone().symmetric_eigen().eigenvalues.min();
        if min < -1e-12 * sigma.amax().max(1.0) {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        if theta_plus == theta_minus {
            return Err(Error::invalid("theta", "class means must differ"));
        }
        check_imbalance(imbalance)?;
        Ok(Self {
            theta_plus,
            theta_minus,
            sigma,
            imbalance,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_plus.len()
    }

    pub fn theta_bar(&self) -> Vector {
        &self.theta_plus - &self.theta_minus
    }

    pub fn with_imbalance(&self, imbalance: f64) -> Result<Self> {
        check_imbalance(imbalance)?;
        Ok(Self {
            imbalance,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Target for the robust KKT residual, relative to `max(1, ‖θ̄‖)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardSolution {
    pub u: Vector,
    /// `√(u'Σu)`.
    pub r: f64,
    pub classifier: LinearClassifier,
    /// `‖Σu − θ̄‖`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustSolution {
    pub v: Vector,
    /// `√(v'Σv)`.
    pub s: f64,
    pub classifier: LinearClassifier,
    /// `g = (θ̄ − Σv)/(2ε)`, which must lie in `∂‖v‖_q`.
    pub subgradient: Vector,
    /// `2ε` times the violation of `g ∈ ∂‖v‖_q` (zero for ε = 0 where `Σv = θ̄`).
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktSolution {
    pub u: Vector,
    pub v: Vector,
    pub r: f64,
    pub s: f64,
    pub residual_u: f64,
    pub residual_v: f64,
}

fn quad_form(sigma: &Matrix, x: &Vector) -> f64 {
    x.dot(&(sigma * x)).max(0.0)
}

/// `−(2 log R + a⁺² − a⁻² − 2κ(a⁺ + a⁻)) / (2(a⁺ − a⁻ − 2κ))` with `κ = ε‖w‖_q`,
/// for `w` normalised to `w'Σw = 1`.
fn optimal_intercept(a_plus: f64, a_minus: f64, shift: f64, imbalance: f64) -> f64 {
    let gap = a_plus - a_minus - 2.0 * shift;
    -(2.0 * imbalance.ln() + a_plus * a_plus - a_minus * a_minus - 2.0 * shift * (a_plus + a_minus)) / (2.0 * gap)
}

/// `u = Σ⁺θ̄`, `w = u/r`, and the loss-minimising intercept.
pub fn solve_standard(mix: &GaussianMixture) -> Result<StandardSolution> {
    let theta_bar = mix.theta_bar();
    let u = spd_solve(&mix.sigma, &theta_bar)?;
    let r = quad_form(&mix.sigma, &u).sqrt();
    if r == 0.0 {
        return Err(Error::Domain("Σu = 0: the class means are indistinguishable".into()));
    }
    let w = &u / r;
    let b = optimal_intercept(w.dot(&mix.theta_plus), w.dot(&mix.theta_minus), 0.0, mix.imbalance);
    let residual = (&mix.sigma * &u - &theta_bar).norm();
    Ok(StandardSolution {
        classifier: LinearClassifier::new(w, b)?,
        u,
        r,
        residual,
    })
}

/// Largest eigenvalue of a PSD matrix, the Lipschitz constant of `∇(½v'Σv)`.
fn lipschitz(sigma: &Matrix) -> f64 {
    sigma.clone().symmetric_eigen().eigenvalues.max().max(f64::MIN_POSITIVE)
}

/// `2ε·dist` of `(θ̄ − Σv)/(2ε)` from `∂‖v‖_q`.
fn kkt_residual(sigma: &Matrix, theta_bar: &Vector, v: &Vector, eps: f64, q: f64) -> (Vector, f64) {
    let r = theta_bar - sigma * v;
    if eps == 0.0 {
        let n = r.norm();
        return (Vector::zeros(v.len()), n);
    }
    let g = &r / (2.0 * eps);
    let gap = subgradient_gap(g.as_slice(), v.as_slice(), q);
    (g, 2.0 * eps * gap)
}

/// `‖Σv + 2ε∇‖v‖_q − θ̄‖` for `1 < q < ∞` and `v ≠ 0`.
pub fn smooth_kkt_residual(sigma: &Matrix, theta_bar: &Vector, v: &Vector, eps: f64, q: f64) -> Option<f64> {
    let grad = lq_norm_gradient(v.as_slice(), q)?;
    let grad = Vector::from_vec(grad);
    Some((sigma * v + grad * (2.0 * eps) - theta_bar).norm())
}

/// Hessian of `‖v‖_q` where it exists (`1 < q < ∞`, and no zero coordinate when `q < 2`).
fn lq_norm_hessian(v: &Vector, q: f64) -> Option<Matrix> {
    if q < 2.0 && v.iter().any(|&x| x == 0.0) {
        return None;
    }
    let n = lp_norm(v.as_slice(), q);
    let g = Vector::from_vec(lq_norm_gradient(v.as_slice(), q)?);
    let diag = v.map(|x| (q - 1.0) * n.powf(1.0 - q) * x.abs().powf(q - 2.0));
    Some(Matrix::from_diagonal(&diag) - &g * g.transpose() * ((q - 1.0) / n))
}

/// Newton refinement of the smooth stationarity equation, accepted only while
/// it reduces the residual.
fn newton_polish(sigma: &Matrix, theta_bar: &Vector, v: &mut Vector, eps: f64, q: f64) {
    for _ in 0..20 {
        let Some(res) = smooth_kkt_residual(sigma, theta_bar, v, eps, q) else { return };
        if res == 0.0 {
            return;
        }
        let (Some(h), Some(g)) = (lq_norm_hessian(v, q), lq_norm_gradient(v.as_slice(), q)) else {
            return;
        };
        let jac = sigma + h * (2.0 * eps);
        let f = sigma * &*v + Vector::from_vec(g) * (2.0 * eps) - theta_bar;
        let Some(step) = jac.lu().solve(&f) else { return };
        let cand = &*v - step;
        // stay in the orthant so the gradient formula remains valid
        if cand.iter().zip(v.iter()).any(|(a, b)| a * b < 0.0) {
            return;
        }
        match smooth_kkt_residual(sigma, theta_bar, &cand, eps, q) {
            Some(r) if r < res => *v = cand,
            _ => return,
        }
    }
}

/// Exact solve of the stationarity system for `q ∈ {1, ∞}` on the sign and
/// support pattern of `v`, kept only if it lowers the KKT residual.
///
/// For `q = 1` the free coordinates solve `Σ_SS v_S = θ̄_S − 2ε sgn(v_S)`.
/// For `q = ∞` the coordinates in the max set `M` are tied to `±t`, and
/// `Σv + 2ε Σ_{i∈M} λ_i s_i e_i = θ̄`, `Σλ_i = 1` is solved for the free
/// coordinates, `t` and the weights `λ`.
fn active_set_polish(sigma: &Matrix, theta_bar: &Vector, v: &mut Vector, eps: f64, q: f64) {
    let d = v.len();
    let peak = v.amax();
    if peak == 0.0 {
        return;
    }
    let cand = if q == 1.0 {
        let support: Vec<usize> = (0..d).filter(|&i| v[i].abs() > 1e-9 * peak).collect();
        let k = support.len();
        let a = Matrix::from_fn(k, k, |i, j| sigma[(support[i], support[j])]);
        let rhs = Vector::from_fn(k, |i, _| theta_bar[support[i]] - 2.0 * eps * v[support[i]].signum());
        let Some(sol) = a.lu().solve(&rhs) else { return };
        let mut out = Vector::zeros(d);
        for (i, &c) in support.iter().enumerate() {
            if sol[i] * v[c] <= 0.0 {
                return;
            }
            out[c] = sol[i];
        }
        out
    } else {
        let tied: Vec<usize> = (0..d).filter(|&i| v[i].abs() >= peak * (1.0 - 1e-7)).collect();
        let free: Vec<usize> = (0..d).filter(|i| !tied.contains(i)).collect();
        let (nf, nt) = (free.len(), tied.len());
        let n = nf + 1 + nt;
        let mut a = Matrix::zeros(d + 1, n);
        let mut rhs = Vector::zeros(d + 1);
        for row in 0..d {
            for (j, &c) in free.iter().enumerate() {
                a[(row, j)] = sigma[(row, c)];
            }
            a[(row, nf)] = tied.iter().map(|&c| sigma[(row, c)] * v[c].signum()).sum();
            if let Some(k) = tied.iter().position(|&c| c == row) {
                a[(row, nf + 1 + k)] = 2.0 * eps * v[row].signum();
            }
            rhs[row] = theta_bar[row];
        }
        for k in 0..nt {
            a[(d, nf + 1 + k)] = 1.0;
        }
        rhs[d] = 1.0;
        let Some(sol) = a.lu().solve(&rhs) else { return };
        let t = sol[nf];
        if !(t > 0.0) || (0..nt).any(|k| sol[nf + 1 + k] < -1e-12) || (0..nf).any(|j| sol[j].abs() >= t) {
            return;
        }
        let mut out = Vector::zeros(d);
        for (j, &c) in free.iter().enumerate() {
            out[c] = sol[j];
        }
        for &c in &tied {
            out[c] = t * v[c].signum();
        }
        out
    };
    let before = kkt_residual(sigma, theta_bar, v, eps, q).1;
    if kkt_residual(sigma, theta_bar, &cand, eps, q).1 < before {
        *v = cand;
    }
}

fn polish(sigma: &Matrix, theta_bar: &Vector, v: &mut Vector, eps: f64, q: f64) {
    if eps == 0.0 || v.iter().all(|&c| c == 0.0) {
        return;
    }
    if q > 1.0 && q.is_finite() {
        newton_polish(sigma, theta_bar, v, eps, q);
    } else {
        active_set_polish(sigma, theta_bar, v, eps, q);
    }
}

/// Minimiser of `F(v) = ½v'Σv − θ̄'v + 2ε‖v‖_q` by accelerated proximal
/// gradient (step `1/λ_max(Σ)`, adaptive restart), then Newton refinement for
/// smooth `q` or an active-set solve for `q ∈ {1, ∞}`.
pub fn minimize_regularized_quadratic(
    sigma: &Matrix,
    theta_bar: &Vector,
    eps: f64,
    q: f64,
    opts: &SolverOptions,
) -> Result<(Vector, usize)> {
    let d = theta_bar.len();
    let lip = lipschitz(sigma);
    let step = 1.0 / lip;
    let objective = |v: &Vector| 0.5 * quad_form(sigma, v) - theta_bar.dot(v) + 2.0 * eps * lp_norm(v.as_slice(), q);
    let prox = |x: &Vector| Vector::from_vec(prox_lq(x.as_slice(), step * 2.0 * eps, q));

    let mut x = Vector::zeros(d);
    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut f_prev = objective(&x);
    let scale = theta_bar.norm().max(1.0);
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        if iterations % 200 == 0 {
            let mut trial = x.clone();
            polish(sigma, theta_bar, &mut trial, eps, q);
            if kkt_residual(sigma, theta_bar, &trial, eps, q).1 <= 1e-3 * opts.tol * scale {
                return Ok((trial, iterations));
            }
        }
        let grad = sigma * &y - theta_bar;
        let next = prox(&(&y - grad * step));
        let f_next = objective(&next);
        let moved = (&next - &x).norm();
        if f_next > f_prev + 1e-15 * f_prev.abs() {
            // restart momentum
            t = 1.0;
            y = x.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &next + (&next - &x) * ((t - 1.0) / t_next);
        x = next;
        t = t_next;
        f_prev = f_next;
        if moved <= 1e-15 * scale && it > 10 {
            break;
        }
    }
    polish(sigma, theta_bar, &mut x, eps, q);
    Ok((x, iterations))
}

/// Optimal ℓp-robust classifier. `v = 0` (which happens iff `‖θ̄‖_{q*} ≤ 2ε`)
/// is reported as [`Error::DegenerateClassifier`].
pub fn solve_robust(mix: &GaussianMixture, pert: &PerturbSpec, opts: &SolverOptions) -> Result<RobustSolution> {
    let theta_bar = mix.theta_bar();
    pert.check_radius(theta_bar.as_slice())?;
    let eps = pert.epsilon;
    let q = pert.q;
    let dual_norm = lp_norm(theta_bar.as_slice(), dual_index(q));
    if eps > 0.0 && dual_norm <= 2.0 * eps {
        return Err(Error::DegenerateClassifier {
            dual_norm,
            two_eps: 2.0 * eps,
        });
    }
    let (v, iterations) = if eps == 0.0 {
        (spd_solve(&mix.sigma, &theta_bar)?, 0)
    } else {
        minimize_regularized_quadratic(&mix.sigma, &theta_bar, eps, q, opts)?
    };
    let (subgradient, residual) = kkt_residual(&mix.sigma, &theta_bar, &v, eps, q);
    let limit = opts.tol * theta_bar.norm().max(1.0);
    if !(residual <= limit) {
        return Err(Error::NonConvergence {
            iterations,
            residual,
            best: v.iter().copied().collect(),
        });
    }
    let s = quad_form(&mix.sigma, &v).sqrt();
    if s == 0.0 {
        return Err(Error::DegenerateClassifier {
            dual_norm,
            two_eps: 2.0 * eps,
        });
    }
    let w = &v / s;
    let shift = pert.margin_shift(w.as_slice());
    let b = optimal_intercept(w.dot(&mix.theta_plus), w.dot(&mix.theta_minus), shift, mix.imbalance);
    Ok(RobustSolution {
        classifier: LinearClassifier::new(w, b)?,
        v,
        s,
        subgradient,
        residual,
        iterations,
    })
}

/// Both KKT solutions at once.
pub fn solve_kkt(mix: &GaussianMixture, pert: &PerturbSpec, opts: &SolverOptions) -> Result<KktSolution> {
    let std = solve_standard(mix)?;
    let rob = solve_robust(mix, pert, opts)?;
    Ok(KktSolution {
        u: std.u,
        v: rob.v,
        r: std.r,
        s: rob.s,
        residual_u: std.residual,
        residual_v: rob.residual,
    })
}

/// Standard (and, given `pert`, robust) class-wise losses of an arbitrary
/// linear classifier:
/// `ℓ⁺ = Φ((−b − w'θ⁺ + κ)/σ_w)`, `ℓ⁻ = Φ((b + w'θ⁻ + κ)/σ_w)`, with
/// `σ_w = √(w'Σw)` and `κ = ε‖w‖_q` for the robust variant.
/// A zero `σ_w` gives the 0/1 indicator limit.
pub fn classwise_losses(mix: &GaussianMixture, clf: &LinearClassifier, pert: Option<&PerturbSpec>) -> LossReport {
    let sd = quad_form(&mix.sigma, &clf.w).sqrt();
    let a_plus = clf.w.dot(&mix.theta_plus);
    let a_minus = clf.w.dot(&mix.theta_minus);
    let loss = |arg: f64| {
        if sd > 0.0 {
            normal_cdf(arg / sd)
        } else if arg >= 0.0 {
            1.0
        } else {
            0.0
        }
    };
    let pair = |shift: f64| (loss(-clf.b - a_plus + shift), loss(clf.b + a_minus + shift));
    let (lp, lm) = pair(0.0);
    let report = LossReport::from_class_losses(lp, lm, mix.imbalance, Provenance::ClosedForm);
    match pert {
        Some(p) => {
            let (rp, rm) = pair(p.margin_shift(clf.w.as_slice()));
            report.with_robust(rp, rm)
        }
        None => report,
    }
}

/// Class-wise standard losses of the optimal classifier from its KKT vector:
/// `ℓ⁺ = Φ((−⟨x, θ̄⟩ + 2 log R)/(2ρ))`, `ℓ⁻ = Φ((−⟨x, θ̄⟩ − 2 log R)/(2ρ))`
/// with `(x, ρ) = (u, r)` or `(v, s)`.
pub fn kkt_losses(theta_bar: &Vector, direction: &Vector, norm: f64, imbalance: f64) -> LossReport {
    let inner = direction.dot(theta_bar);
    let lr = 2.0 * imbalance.ln();
    let lp = normal_cdf((-inner + lr) / (2.0 * norm));
    let lm = normal_cdf((-inner - lr) / (2.0 * norm));
    LossReport::from_class_losses(lp, lm, imbalance, Provenance::ClosedForm)
}

/// `Φ(a) − Φ(b)` without cancellation when both arguments sit in the upper tail.
fn cdf_difference(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        normal_cdf(-b) - normal_cdf(-a)
    } else {
        normal_cdf(a) - normal_cdf(b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub imbalance: f64,
    pub ad_std: f64,
    pub ad_rob: f64,
    /// `AD(w_rob, b_rob) − AD(w_std, b_std)`, evaluated from tail
    /// probabilities so it stays resolved when the losses round to 0 or 1.
    pub gap: f64,
    /// `[ℓ⁺(std), ℓ⁻(std), ℓ⁺(rob), ℓ⁻(rob)]`, standard losses of both classifiers.
    pub losses: [f64; 4],
    /// All four losses are at most 1/2, the region where `gap` increases with `R`.
    pub in_half_region: bool,
}

/// `g(R)` on a grid of imbalance ratios. The directions `u`, `v` do not depend
/// on `R`, so the KKT systems are solved once.
pub fn disparity_gap(mix: &GaussianMixture, pert: &PerturbSpec, grid: &[f64], opts: &SolverOptions) -> Result<Vec<GapRow>> {
    for &r in grid {
        check_imbalance(r)?;
    }
    let kkt = solve_kkt(mix, pert, opts)?;
    let theta_bar = mix.theta_bar();
    Ok(grid
        .iter()
        .map(|&r| {
            let std = kkt_losses(&theta_bar, &kkt.u, kkt.r, r);
            let rob = kkt_losses(&theta_bar, &kkt.v, kkt.s, r);
            let losses = [std.loss_plus, std.loss_minus, rob.loss_plus, rob.loss_minus];
            let lr = 2.0 * r.ln();
            let z = |x: &Vector, rho: f64, shift: f64| (-x.dot(&theta_bar) + shift) / (2.0 * rho);
            let gap = cdf_difference(z(&kkt.v, kkt.s, lr), z(&kkt.u, kkt.r, lr)) + cdf_difference(z(&kkt.u, kkt.r, -lr), z(&kkt.v, kkt.s, -lr));
            GapRow {
                imbalance: r,
                ad_std: std.ad,
                ad_rob: rob.ad,
                gap,
                losses,
                in_half_region: losses.iter().all(|&l| l <= 0.5),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyReport {
    pub mixture: GaussianMixture,
    /// Closed-form `(ℓ⁺, ℓ⁻)` of the standard classifier.
    pub closed_std: (f64, f64),
    /// Closed-form `(ℓ⁺, ℓ⁻)` (standard losses) of the ℓ∞-robust classifier.
    pub closed_rob: (f64, f64),
    pub b_std: f64,
    pub b_rob: f64,
    pub std_report: LossReport,
    pub rob_report: LossReport,
    /// Largest disagreement between the closed forms and the generic solver path.
    pub max_discrepancy: f64,
}

/// Mixture with `Σ = I`, `θ⁺ = (η·1_m, γ·1_n) = −θ⁻` under ℓ∞ perturbations.
/// The first `m` coordinates are strongly but fragilely predictive; the
/// remaining `n` are weakly predictive and erased by any `ε > γ`.
pub fn toy_example(m: usize, n: usize, eta: f64, gamma: f64, epsilon: f64, imbalance: f64) -> Result<ToyReport> {
    if m == 0 || n == 0 {
        return Err(Error::Domain("m and n must be at least 1".into()));
    }
    if !(0.0 < gamma && gamma < epsilon && epsilon < eta) {
        return Err(Error::Domain(format!(
            "the construction needs 0 < γ < ε < η, got γ = {gamma}, ε = {epsilon}, η = {eta}"
        )));
    }
    check_imbalance(imbalance)?;
    let d = m + n;
    let theta_plus = Vector::from_fn(d, |i, _| if i < m { eta } else { gamma });
    let mix = GaussianMixture::new(theta_plus.clone(), -theta_plus, Matrix::identity(d, d), imbalance)?;
    let pert = PerturbSpec::new(f64::INFINITY, epsilon)?;

    let log_r = imbalance.ln();
    let (mf, nf) = (m as f64, n as f64);
    let full = (mf * eta * eta + nf * gamma * gamma).sqrt();
    let robust_scale = mf.sqrt() * (eta - epsilon);
    let closed_std = (
        normal_cdf(log_r / (2.0 * full) - full),
        normal_cdf(-log_r / (2.0 * full) - full),
    );
    let closed_rob = (
        normal_cdf(log_r / (2.0 * robust_scale) - mf.sqrt() * eta),
        normal_cdf(-log_r / (2.0 * robust_scale) - mf.sqrt() * eta),
    );

    let std = solve_standard(&mix)?;
    let rob = solve_robust(&mix, &pert, &SolverOptions::default())?;
    let std_report = classwise_losses(&mix, &std.classifier, Some(&pert));
    let rob_report = classwise_losses(&mix, &rob.classifier, Some(&pert));
    let max_discrepancy = [
        std_report.loss_plus - closed_std.0,
        std_report.loss_minus - closed_std.1,
        rob_report.loss_plus - closed_rob.0,
        rob_report.loss_minus - closed_rob.1,
    ]
    .iter()
    .fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(ToyReport {
        b_std: -log_r / (2.0 * full),
        b_rob: -log_r / (2.0 * robust_scale),
        mixture: mix,
        closed_std,
        closed_rob,
        std_report,
        rob_report,
        max_discrepancy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    /// `(⟨u, θ̄⟩/(2r), ⟨v, θ̄⟩/(2s))`; the first is never smaller.
    pub direction: (f64, f64),
    /// `(r, s)`; `r > s` whenever `ε > 0`.
    pub norm: (f64, f64),
    /// `(u'Σu − v'Σv, 4ε‖v‖_q)`; the first is never smaller.
    pub identity: (f64, f64),
    /// Angle in radians between `Σ^{1/2}w_std` and `Σ^{1/2}w_rob`.
    pub angle: f64,
    pub parallel: bool,
}

/// Numerical witnesses for the direction and norm inequalities between the
/// standard and robust KKT solutions.
pub fn direction_norm_certificates(kkt: &KktSolution, mix: &GaussianMixture, pert: &PerturbSpec) -> Result<Certificates> {
    let theta_bar = mix.theta_bar();
    let root = spd_sqrt(&mix.sigma)?;
    let a = &root * &kkt.u;
    let b = &root * &kkt.v;
    let cos = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0);
    let angle = cos.acos();
    Ok(Certificates {
        direction: (kkt.u.dot(&theta_bar) / (2.0 * kkt.r), kkt.v.dot(&theta_bar) / (2.0 * kkt.s)),
        norm: (kkt.r, kkt.s),
        identity: (
            kkt.r * kkt.r - kkt.s * kkt.s,
            4.0 * pert.epsilon * lp_norm(kkt.v.as_slice(), pert.q),
        ),
        angle,
        parallel: angle < 1e-7,
    })
}

/// Least-squares problem `min (1/2N)‖y − Xβ‖² + λ‖β‖_q` whose stationary
/// point is the robust KKT vector: `X'X = Σ`, `X'y = θ̄`, `λ = 2ε/N` with
/// `N = d` rows. Requires `Σ ≻ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionForm {
    pub design: Matrix,
    pub response: Vector,
    pub lambda: f64,
}

pub fn regression_form(mix: &GaussianMixture, pert: &PerturbSpec) -> Result<RegressionForm> {
    let design = spd_sqrt(&mix.sigma)?;
    let response = spd_solve(&design, &mix.theta_bar())?;
    let rows = mix.dim() as f64;
    Ok(RegressionForm {
        design,
        response,
        lambda: 2.0 * pert.epsilon / rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    fn iso(theta_bar: &[f64], r: f64) -> GaussianMixture {
        let d = theta_bar.len();
        let tp = v(theta_bar) * 0.5;
        GaussianMixture::new(tp.clone(), -tp, Matrix::identity(d, d), r).unwrap()
    }

    #[test]
    fn balanced_symmetric_standard() {
        let mix = iso(&[2.0, 0.0], 1.0);
        let s = solve_standard(&mix).unwrap();
        assert_eq!(s.u, v(&[2.0, 0.0]));
        assert_eq!(s.r, 2.0);
        assert_eq!(s.classifier.w, v(&[1.0, 0.0]));
        assert_eq!(s.classifier.b, 0.0);
        let rep = classwise_losses(&mix, &s.classifier, None);
        assert!((rep.loss_plus - 0.158_655_253_931_457_05).abs() < 1e-12, "{}", rep.loss_plus);
        assert!(rep.ad.abs() < 1e-15);
    }

    #[test]
    fn imbalanced_intercept() {
        let mix = iso(&[2.0, 0.0], 2f64.exp());
        let s = solve_standard(&mix).unwrap();
        assert!((s.classifier.b + 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_covariance() {
        let tp = v(&[2.0, 0.5]);
        let mix = GaussianMixture::new(tp.clone(), -tp, Matrix::from_diagonal(&v(&[4.0, 1.0])), 1.0).unwrap();
        let s = solve_standard(&mix).unwrap();
        assert!((s.u.clone() - v(&[1.0, 1.0])).norm() < 1e-15);
        assert!((s.r - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn isotropic_l2_shrinkage() {
        let mix = iso(&[3.0, 4.0], 1.0);
        let pert = PerturbSpec::from_dual(2.0, 1.0).unwrap();
        let rob = solve_robust(&mix, &pert, &SolverOptions::default()).unwrap();
        assert!((rob.v.clone() - v(&[1.8, 2.4])).norm() < 1e-12, "{}", rob.v);
        assert!((rob.s - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_radius_recovers_standard() {
        let tp = v(&[1.0, 0.3, -0.2]);
        let sigma = Matrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.5]);
        let mix = GaussianMixture::new(tp.clone(), -tp, sigma, 2.0).unwrap();
        for q in [1.0, 1.5, 2.0, f64::INFINITY] {
            let pert = PerturbSpec::from_dual(q, 0.0).unwrap();
            let rob = solve_robust(&mix, &pert, &SolverOptions::default()).unwrap();
            let std = solve_standard(&mix).unwrap();
            assert_eq!(rob.v, std.u);
        }
    }

    #[test]
    fn degenerate_certificate() {
        let mix = iso(&[1.0, 0.0], 1.0);
        let pert = PerturbSpec::from_dual(2.0, 0.6).unwrap();
        match solve_robust(&mix, &pert, &SolverOptions::default()) {
            Err(Error::DegenerateClassifier { dual_norm, two_eps }) => {
                assert_eq!(dual_norm, 1.0);
                assert!((two_eps - 1.2).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn toy_numbers() {
        let toy = toy_example(4, 48, 1.0, 0.5, 0.75, 2f64.exp()).unwrap();
        assert!((toy.closed_std.0 - normal_cdf(-3.75)).abs() < 1e-15);
        assert!((toy.closed_std.1 - normal_cdf(-4.25)).abs() < 1e-15);
        assert!((toy.closed_rob.1 - normal_cdf(-4.0)).abs() < 1e-15);
        assert!((toy.rob_report.loss_plus - 0.5).abs() < 1e-9);
        assert!(toy.max_discrepancy < 1e-9);
    }

    #[test]
    fn toy_balanced_intercepts_vanish() {
        let toy = toy_example(4, 48, 1.0, 0.5, 0.75, 1.0).unwrap();
        assert_eq!(toy.b_std, 0.0);
        assert_eq!(toy.b_rob, 0.0);
        assert!(toy.std_report.ad.abs() < 1e-12);
    }

    #[test]
    fn toy_rejects_wrong_order() {
        assert!(matches!(toy_example(4, 48, 1.0, 0.8, 0.75, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn gap_vanishes_at_balance_and_grows() {
        let tp = v(&[1.0, 0.4, 0.2]);
        let sigma = Matrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.2, 1.0, 0.1, 0.0, 0.1, 1.0]);
        let mix = GaussianMixture::new(tp.clone(), -tp, sigma, 1.0).unwrap();
        let pert = PerturbSpec::from_dual(2.0, 0.3).unwrap();
        let rows = disparity_gap(&mix, &pert, &[1.0, 2.0, 4.0, 8.0], &SolverOptions::default()).unwrap();
        assert!(rows[0].gap.abs() < 1e-12);
        for w in rows.windows(2) {
            if w[0].in_half_region && w[1].in_half_region {
                assert!(w[1].gap > w[0].gap);
            }
        }
        assert!(rows[1..].iter().all(|r| r.gap > 0.0));
    }

    #[test]
    fn isotropic_directions_are_parallel() {
        let mix = iso(&[3.0, 4.0], 2.0);
        let pert = PerturbSpec::from_dual(2.0, 0.5).unwrap();
        let kkt = solve_kkt(&mix, &pert, &SolverOptions::default()).unwrap();
        let c = direction_norm_certificates(&kkt, &mix, &pert).unwrap();
        assert!(c.parallel);
        assert!((c.direction.0 - c.direction.1).abs() < 1e-12);
        assert!(c.norm.0 > c.norm.1);
    }

    #[test]
    fn certificates_are_tight_at_zero_radius() {
        let mix = iso(&[1.0, 2.0], 3.0);
        let pert = PerturbSpec::from_dual(2.0, 0.0).unwrap();
        let kkt = solve_kkt(&mix, &pert, &SolverOptions::default()).unwrap();
        let c = direction_norm_certificates(&kkt, &mix, &pert).unwrap();
        assert_eq!(c.norm.0, c.norm.1);
        assert_eq!(c.direction.0, c.direction.1);
    }
}
