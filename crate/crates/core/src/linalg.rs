//! Dense SPD solves, matrix square roots and the closed-form
//! eigendecomposition of `uu' + vv'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Matrix, Vector};

/// Relative cut-off on `c²/(ab)` beyond which `u` and `v` count as parallel.
pub const PARALLEL_TOL: f64 = 1e-12;

/// The pair `(u, v)` generating `A = uu' + vv'`, with its Gram entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rank2Gram {
    pub u: Vector,
    pub v: Vector,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Rank2Gram {
    pub fn new(u: Vector, v: Vector) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::invalid("v", "must have the same length as u"));
        }
        let a = u.norm_squared();
        let b = v.norm_squared();
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::invalid("u, v", "both vectors must be non-zero"));
        }
        let c = u.dot(&v);
        Ok(Self { u, v, a, b, c })
    }

    pub fn matrix(&self) -> Matrix {
        &self.u * self.u.transpose() + &self.v * self.v.transpose()
    }

    /// `c²/(ab) ∈ [0, 1]`; 1 means parallel.
    pub fn alignment(&self) -> f64 {
        self.c * self.c / (self.a * self.b)
    }

    /// `(a² − ab + 2c²)λ₁ + (a − b)(c² − ab)`, the squared length of `(λ₁ − b)u + cv`.
    pub fn first_denominator(&self, lambda1: f64) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        (a * a - a * b + 2.0 * c * c) * lambda1 + (a - b) * (c * c - a * b)
    }

    /// `(b² − ab + 2c²)λ₂ + (b − a)(c² − ab)`, the squared length of `cu + (λ₂ − a)v`.
    pub fn second_denominator(&self, lambda2: f64) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        (b * b - a * b + 2.0 * c * c) * lambda2 + (b - a) * (c * c - a * b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rank2Eigen {
    pub lambda1: f64,
    pub lambda2: f64,
    pub v1: Vector,
    pub v2: Vector,
}

/// Non-zero eigenpairs of `uu' + vv'` in closed form.
///
/// `λ₁,₂ = (a + b ± √((a−b)² + 4c²))/2`; `v₁ ∝ (λ₁−b)u + cv`, `v₂ ∝ cu + (λ₂−a)v`,
/// each divided by its explicit length and then renormalised. When one of these
/// combinations vanishes (`c = 0` with the opposite ordering of `a`, `b`) the
/// companion combination for the same eigenvalue is used instead.
pub fn rank2_eigen(g: &Rank2Gram) -> Result<Rank2Eigen> {
    let ratio = g.alignment();
    if ratio >= 1.0 - PARALLEL_TOL {
        return Err(Error::IllConditioned { ratio });
    }
    let (a, b, c) = (g.a, g.b, g.c);
    let root = ((a - b) * (a - b) + 4.0 * c * c).sqrt();
    let lambda1 = 0.5 * (a + b + root);
    // product of the roots is ab − c², which avoids cancellation in λ₂
    let lambda2 = (a * b - c * c) / lambda1;

    let first = |lambda: f64, denom: f64| (&g.u * (lambda - b) + &g.v * c) / denom.max(0.0).sqrt();
    let second = |lambda: f64, denom: f64| (&g.u * c + &g.v * (lambda - a)) / denom.max(0.0).sqrt();
    // squared lengths of the two candidate combinations for eigenvalue λ
    let len_first = |lambda: f64| (a * a - a * b + 2.0 * c * c) * lambda + (a - b) * (c * c - a * b);
    let len_second = |lambda: f64| (b * b - a * b + 2.0 * c * c) * lambda + (b - a) * (c * c - a * b);

    let scale = (a + b) * (a + b) * (a + b);
    let pick = |lambda: f64, prefer_first: bool| -> Option<Vector> {
        let (d1, d2) = (len_first(lambda), len_second(lambda));
        let use_first = if prefer_first { d1 > 1e-12 * scale } else { d2 <= 1e-12 * scale };
        let vec = if use_first { first(lambda, d1) } else { second(lambda, d2) };
        let n = vec.norm();
        (n > 0.0 && n.is_finite()).then(|| vec / n)
    };

    let (v1, v2) = match (pick(lambda1, true), pick(lambda2, false)) {
        (Some(v1), Some(v2)) => (v1, v2),
        // repeated eigenvalue: c = 0 and a = b, so u and v are already orthogonal
        _ => (g.u.normalize(), g.v.normalize()),
    };
    Ok(Rank2Eigen { lambda1, lambda2, v1, v2 })
}

/// Both sides of `λ₁/D₁ ≤ 1/(a−b)²` and `λ₂/D₂ ≤ 1/(a−b)²`, where `D₁`, `D₂`
/// are the eigenvector denominators. Requires `a > b`; with the roles of
/// `u` and `v` swapped the first bound fails in general.
pub fn eigen_denominator_bounds(g: &Rank2Gram) -> Result<[(f64, f64); 2]> {
    if !(g.a > g.b) {
        return Err(Error::invalid("a, b", "the bounds need ‖u‖² > ‖v‖²"));
    }
    let e = rank2_eigen(g)?;
    let rhs = 1.0 / ((g.a - g.b) * (g.a - g.b));
    Ok([
        (e.lambda1 / g.first_denominator(e.lambda1), rhs),
        (e.lambda2 / g.second_denominator(e.lambda2), rhs),
    ])
}

/// `(max{x, y}, 1 − (1−x)(1−y), x + y)` for `x, y ∈ [0, 1]`; the three are
/// non-decreasing.
pub fn zero_one_chain(x: f64, y: f64) -> Result<(f64, f64, f64)> {
    if !((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)) {
        return Err(Error::invalid("x, y", "must lie in [0, 1]"));
    }
    Ok((x.max(y), 1.0 - (1.0 - x) * (1.0 - y), x + y))
}

fn check_square(s: &Matrix, name: &'static str) -> Result<()> {
    if s.nrows() != s.ncols() {
        return Err(Error::invalid(name, "must be square"));
    }
    Ok(())
}

/// Relative threshold below which eigenvalues of a PSD matrix count as zero.
fn rank_cutoff(eigs: &Vector) -> f64 {
    let top = eigs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    top * eigs.len() as f64 * 1e-13
}

/// Solves `Sx = rhs` for symmetric PSD `S`.
///
/// Cholesky with one refinement step when `S` is definite; otherwise the
/// minimum-norm solution through the eigendecomposition, provided `rhs` lies
/// in the range of `S`.
pub fn spd_solve(s: &Matrix, rhs: &Vector) -> Result<Vector> {
    check_square(s, "S")?;
    if rhs.len() != s.nrows() {
        return Err(Error::invalid("rhs", "length must match S"));
    }
    let rhs_norm = rhs.norm();
    if rhs_norm == 0.0 {
        return Ok(Vector::zeros(rhs.len()));
    }
    if let Some(chol) = s.clone().cholesky() {
        let mut x = chol.solve(rhs);
        let r = rhs - s * &x;
        x += chol.solve(&r);
        let residual = (s * &x - rhs).norm();
        if residual <= 1e-10 * rhs_norm {
            return Ok(x);
        }
    }
    let eig = s.clone().symmetric_eigen();
    let cutoff = rank_cutoff(&eig.eigenvalues);
    let min = eig.eigenvalues.min();
    if min < -cutoff.max(1e-300) * 10.0 {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let coords = eig.eigenvectors.transpose() * rhs;
    let mut scaled = Vector::zeros(coords.len());
    for i in 0..coords.len() {
        let l = eig.eigenvalues[i];
        if l > cutoff {
            scaled[i] = coords[i] / l;
        }
    }
    let x = &eig.eigenvectors * scaled;
    let residual = (s * &x - rhs).norm() / rhs_norm;
    if residual > 1e-8 {
        return Err(Error::Inconsistent { residual });
    }
    Ok(x)
}

/// Symmetric square root of a PSD matrix.
pub fn spd_sqrt(s: &Matrix) -> Result<Matrix> {
    check_square(s, "S")?;
    let eig = s.clone().symmetric_eigen();
    let cutoff = rank_cutoff(&eig.eigenvalues);
    let min = eig.eigenvalues.min();
    if min < -cutoff.max(1e-300) * 10.0 {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let m = &eig.eigenvectors * Matrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
    Ok((&m + m.transpose()) * 0.5)
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(b: &Matrix) -> f64 {
    b.clone().singular_values().max()
}

/// `(Tr(PB), Tr(P)‖B‖₂)` for PSD `P`; the first never exceeds the second.
pub fn trace_bound_check(p: &Matrix, b: &Matrix) -> Result<(f64, f64)> {
    check_square(p, "P")?;
    if b.shape() != p.shape() {
        return Err(Error::invalid("B", "must have the same shape as P"));
    }
    let min = p.clone().symmetric_eigen().eigenvalues.min();
    if min < -1e-10 * p.amax().max(1.0) {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(((p * b).trace(), p.trace() * spectral_norm(b)))
}
