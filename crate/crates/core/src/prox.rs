//! Proximal operator of `λ‖·‖_q` and the scalar root solvers behind it.

use crate::norms::{dual_index, lp_norm};

/// `argmin_t ½‖t − x‖² + λ‖t‖_q`.
///
/// Exact for `q ∈ {1, 2, ∞}`. Otherwise the non-zero solution satisfies
/// `t_i + (λ/B)|t_i|^{q−1} = |x_i|` with `B = ‖t‖_q^{q−1}`; `B` is the unique
/// positive root of `‖t(B)‖_q^{q−1} − B`, found by bisection on `log B`.
pub fn prox_lq(x: &[f64], lambda: f64, q: f64) -> Vec<f64> {
    if lambda <= 0.0 {
        return x.to_vec();
    }
    if q == 1.0 {
        return x.iter().map(|&xi| xi.signum() * (xi.abs() - lambda).max(0.0)).collect();
    }
    let dual = lp_norm(x, dual_index(q));
    if dual <= lambda {
        return vec![0.0; x.len()];
    }
    if q == 2.0 {
        let shrink = 1.0 - lambda / dual;
        return x.iter().map(|&xi| xi * shrink).collect();
    }
    if q.is_infinite() {
        // Moreau: x − proj onto the ℓ1 ball of radius λ
        let p = project_l1_ball(x, lambda);
        return x.iter().zip(&p).map(|(a, b)| a - b).collect();
    }
    general_prox(x, lambda, q)
}

/// Euclidean projection onto `{‖y‖₁ ≤ radius}`.
pub fn project_l1_ball(x: &[f64], radius: f64) -> Vec<f64> {
    if lp_norm(x, 1.0) <= radius {
        return x.to_vec();
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        cum += m;
        let t = (cum - radius) / (k + 1) as f64;
        if m > t {
            theta = t;
        } else {
            break;
        }
    }
    x.iter().map(|&v| v.signum() * (v.abs() - theta).max(0.0)).collect()
}

/// Root in `[0, target]` of `t + c·t^{e} = target` with `c ≥ 0`, `e > 0`.
///
/// For `e ≥ 1` the left side is convex in `t`; for `e < 1` it is convex in
/// `s = t^e`. Newton from a point right of the root then decreases
/// monotonically onto it.
pub(crate) fn solve_power_sum(target: f64, c: f64, e: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    if c == 0.0 {
        return target;
    }
    // work in x = t (e ≥ 1) or x = t^e (e < 1): x^k + c·x^m = target, convex in x
    let (k, m, mut x) = if e >= 1.0 { (1.0, e, target) } else { (1.0 / e, 1.0, (target / c).min(target.powf(e))) };
    for _ in 0..100 {
        let val = x.powf(k) + c * x.powf(m) - target;
        if val <= 0.0 {
            break;
        }
        let step = val / (k * x.powf(k - 1.0) + c * m * x.powf(m - 1.0));
        x = (x - step).max(0.0);
        if step <= 2.0 * f64::EPSILON * x {
            break;
        }
    }
    if e >= 1.0 {
        x
    } else {
        x.powf(e.recip())
    }
}

fn general_prox(x: &[f64], lambda: f64, q: f64) -> Vec<f64> {
    let mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let at = |b: f64| -> Vec<f64> { mags.iter().map(|&m| solve_power_sum(m, lambda / b, q - 1.0)).collect() };
    let excess = |b: f64| lp_norm(&at(b), q).powf(q - 1.0) - b;

    let mut hi = lp_norm(&mags, q).powf(q - 1.0).max(f64::MIN_POSITIVE);
    let mut lo = hi;
    for _ in 0..2000 {
        lo *= 0.5;
        if excess(lo) > 0.0 {
            break;
        }
    }
    while excess(hi) > 0.0 {
        hi *= 2.0;
    }
    let (mut llo, mut lhi) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let mid = 0.5 * (llo + lhi);
        if excess(mid.exp()) > 0.0 {
            llo = mid;
        } else {
            lhi = mid;
        }
        if lhi - llo <= 4.0 * f64::EPSILON * llo.abs().max(lhi.abs()).max(1.0) {
            break;
        }
    }
    let t = at((0.5 * (llo + lhi)).exp());
    x.iter().zip(t).map(|(&xi, ti)| xi.signum() * ti).collect()
}
