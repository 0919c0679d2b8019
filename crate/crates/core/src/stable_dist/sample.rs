use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::{MultivariateSas, SasKind, SasParams};
use crate::error::{Error, Result};
use crate::linalg::spd_sqrt;
use crate::rng::SeededRng;
use crate::types::Matrix;

/// One draw from the standard SαS law with characteristic function `exp(−|t|^α)`.
///
/// Chambers–Mallows–Stuck with `β = 0`; the Gaussian and Cauchy cases use their
/// direct generators.
pub fn standard_sas_draw<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha == 2.0 {
        let g: f64 = rng.sample(StandardNormal);
        return SQRT_2 * g;
    }
    let v = PI * (rng.random::<f64>() - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    let head = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let tail = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    head * tail
}

/// `n` i.i.d. draws from `SαS(α, c, μ)`.
pub fn sas_sample(params: &SasParams, rng: &mut SeededRng, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "must be ≥ 1"));
    }
    Ok((0..n)
        .map(|_| params.location + params.scale * standard_sas_draw(params.alpha, rng))
        .collect())
}

/// Positive `a`-stable variable with Laplace transform `E e^{−λA} = e^{−λ^a}`,
/// `0 < a < 1` (Kanter's representation).
fn positive_stable_draw<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    // U ∈ (0, π) strictly, so every sine below is positive
    let u = loop {
        let u = PI * rng.random::<f64>();
        if u > 0.0 {
            break u;
        }
    };
    let e: f64 = rng.sample(Exp1);
    let k = (1.0 - a) / a;
    (a * u).sin() * ((1.0 - a) * u).sin().powf(k) / u.sin().powf(1.0 / a) * e.powf(-k)
}

/// `n × d` draws from an independent-components law, one row per sample.
pub fn sas_ic_sample(mv: &MultivariateSas, rng: &mut SeededRng, n: usize) -> Result<Matrix> {
    let SasKind::IndependentComponents { location, scales } = &mv.kind else {
        return Err(Error::invalid("kind", "expected an independent-components law"));
    };
    let d = location.len();
    let mut out = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            out[(i, j)] = location[j] + scales[j] * standard_sas_draw(mv.alpha, rng);
        }
    }
    Ok(out)
}

/// `n × d` draws from an elliptically-contoured law via the sub-Gaussian
/// representation `X = θ + √A · √2 Σ^{1/2} G`, `A` positive `(α/2)`-stable.
pub fn sas_ec_sample(mv: &MultivariateSas, rng: &mut SeededRng, n: usize) -> Result<Matrix> {
    let SasKind::EllipticallyContoured { location, shape } = &mv.kind else {
        return Err(Error::invalid("kind", "expected an elliptically-contoured law"));
    };
    let d = location.len();
    let root = spd_sqrt(shape)?;
    let mut out = Matrix::zeros(n, d);
    let mut g = vec![0.0; d];
    for i in 0..n {
        let mix = if mv.alpha == 2.0 {
            1.0
        } else {
            positive_stable_draw(mv.alpha / 2.0, rng).sqrt()
        };
        for gj in g.iter_mut() {
            *gj = rng.sample(StandardNormal);
        }
        for j in 0..d {
            let z: f64 = (0..d).map(|k| root[(j, k)] * g[k]).sum();
            out[(i, j)] = location[j] + mix * SQRT_2 * z;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureOptions;
    use crate::rng::seeded;
    use crate::stable_dist::{linear_pushforward, sas_cdf};
    use crate::types::Vector;

    fn ecdf(xs: &[f64], x: f64) -> f64 {
        xs.iter().filter(|&&v| v <= x).count() as f64 / xs.len() as f64
    }

    #[test]
    fn deterministic_under_seed() {
        let p = SasParams::standard(1.3).unwrap();
        let a = sas_sample(&p, &mut seeded(11), 50).unwrap();
        let b = sas_sample(&p, &mut seeded(11), 50).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cauchy_median_near_zero() {
        let p = SasParams::standard(1.0).unwrap();
        let mut xs = sas_sample(&p, &mut seeded(1), 1_000_000).unwrap();
        xs.sort_by(f64::total_cmp);
        assert!(xs[xs.len() / 2].abs() < 0.01);
    }

    #[test]
    fn gaussian_mean() {
        let p = SasParams::new(2.0, 1.0, 3.0).unwrap();
        let n = 1_000_000;
        let xs = sas_sample(&p, &mut seeded(2), n).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = (2.0 / n as f64).sqrt();
        assert!((mean - 3.0).abs() < 5.0 * se);
    }

    #[test]
    fn cms_matches_cdf_for_alpha_1_5() {
        let p = SasParams::standard(1.5).unwrap();
        let n = 1_000_000;
        let xs = sas_sample(&p, &mut seeded(3), n).unwrap();
        for x in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let want = sas_cdf(&p, x, &QuadratureOptions::default()).unwrap();
            let tol = 3.0 * (want * (1.0 - want) / n as f64).sqrt();
            assert!((ecdf(&xs, x) - want).abs() < tol, "x={x}");
        }
    }

    #[test]
    fn positive_stable_laplace_transform() {
        let mut rng = seeded(4);
        for a in [0.5, 0.75, 0.9] {
            let n = 200_000;
            let m = (0..n).map(|_| (-positive_stable_draw(a, &mut rng)).exp()).sum::<f64>() / n as f64;
            // E e^{−A} = e^{−1}; the summand is bounded in [0, 1]
            assert!((m - (-1.0f64).exp()).abs() < 5.0 * 0.5 / (n as f64).sqrt(), "a={a}: {m}");
        }
    }

    #[test]
    fn ec_gaussian_covariance() {
        let mv = MultivariateSas::elliptical(2.0, Vector::zeros(2), Matrix::identity(2, 2)).unwrap();
        let n = 1_000_000;
        let xs = sas_ec_sample(&mv, &mut seeded(5), n).unwrap();
        for j in 0..2 {
            let var = xs.column(j).iter().map(|v| v * v).sum::<f64>() / n as f64;
            assert!((var - 2.0).abs() < 0.02, "{var}");
        }
    }

    #[test]
    fn ec_cauchy_marginal() {
        let mv = MultivariateSas::elliptical(1.0, Vector::zeros(3), Matrix::identity(3, 3)).unwrap();
        let n = 1_000_000;
        let xs = sas_ec_sample(&mv, &mut seeded(6), n).unwrap();
        let w = Vector::from_vec(vec![1.0, 0.0, 0.0]);
        let law = linear_pushforward(&mv, &w, 0.0).unwrap();
        let proj: Vec<f64> = xs.column(0).iter().copied().collect();
        for x in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            let want = sas_cdf(&law, x, &QuadratureOptions::default()).unwrap();
            let tol = 3.0 * (want * (1.0 - want) / n as f64).sqrt();
            assert!((ecdf(&proj, x) - want).abs() < tol + 1e-12, "x={x}");
        }
    }

    #[test]
    fn ec_median_is_location() {
        let shape = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let theta = Vector::from_vec(vec![1.0, -2.0]);
        let mv = MultivariateSas::elliptical(1.4, theta.clone(), shape).unwrap();
        let n = 200_000;
        let xs = sas_ec_sample(&mv, &mut seeded(7), n).unwrap();
        let w = [0.3, -1.1];
        let center = w[0] * theta[0] + w[1] * theta[1];
        let below = (0..n).filter(|&i| w[0] * xs[(i, 0)] + w[1] * xs[(i, 1)] <= center).count() as f64 / n as f64;
        assert!((below - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt());
    }
}
