//! ℓp norms, dual indices and the subdifferential machinery the KKT solvers
//! and certificates are built on. `f64::INFINITY` stands for p = ∞.

/// Hölder conjugate: `1/p + 1/q = 1`.
pub fn dual_index(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let max = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    if p == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    if p == 2.0 {
        return x.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    // scaled to avoid overflow for large p
    let s: f64 = x.iter().map(|v| (v.abs() / max).powf(p)).sum();
    max * s.powf(1.0 / p)
}

/// Gradient of `‖x‖_q` for `1 < q < ∞`, `x ≠ 0`; `None` where the norm is not
/// differentiable.
pub fn lq_norm_gradient(x: &[f64], q: f64) -> Option<Vec<f64>> {
    if !(q > 1.0 && q.is_finite()) {
        return None;
    }
    let n = lp_norm(x, q);
    if n == 0.0 {
        return None;
    }
    Some(
        x.iter()
            .map(|&xi| xi.signum() * (xi.abs() / n).powf(q - 1.0) * (xi != 0.0) as u8 as f64)
            .collect(),
    )
}

/// A maximiser `δ` of `⟨δ, w⟩` over the unit ball of the dual norm `‖·‖_p`
/// (p = q*), so that `⟨δ, w⟩ = ‖w‖_q`. For `q = ∞` ties go to the lowest index.
pub fn dual_direction(w: &[f64], q: f64) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    if w.iter().all(|&v| v == 0.0) {
        return out;
    }
    if q == 1.0 {
        for (o, &wi) in out.iter_mut().zip(w) {
            *o = if wi == 0.0 { 0.0 } else { wi.signum() };
        }
    } else if q.is_infinite() {
        let (idx, _) = w
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, &v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
        out[idx] = w[idx].signum();
    } else {
        out = lq_norm_gradient(w, q).expect("non-zero w");
    }
    out
}

/// Residual of the inclusion `g ∈ ∂‖v‖_q`. A norm subgradient at `v` is any `g`
/// with `‖g‖_{q*} ≤ 1` and `⟨g, v⟩ = ‖v‖_q`, so the residual is the sum of both
/// violations (zero iff the certificate holds exactly).
pub fn subgradient_gap(g: &[f64], v: &[f64], q: f64) -> f64 {
    let dual = lp_norm(g, dual_index(q));
    let ball = (dual - 1.0).max(0.0);
    let inner: f64 = g.iter().zip(v).map(|(a, b)| a * b).sum();
    ball + (inner - lp_norm(v, q)).abs()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
