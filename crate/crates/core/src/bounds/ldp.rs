use nalgebra::DMatrix;

use super::eta;
use crate::chain::Generator;
use crate::error::{Error, Result};

/// `|S| log(eta_S sqrt(8e) T) + log|S| + |S| / (4T)`.
pub fn ldp_error_terms(g: &Generator, subset: &[usize], horizon: f64) -> Result<f64> {
    if horizon < 1.0 {
        return Err(Error::TooEarly(horizon));
    }
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let s = subset.len() as f64;
    let e = eta(g, subset);
    Ok(s * (e * (8.0 * std::f64::consts::E).sqrt() * horizon).ln() + s.ln() + s / (4.0 * horizon))
}

/// Upper bound on `log P(l_T / T in Gamma, range in S)` given
/// `inf_rate = inf over Gamma` of the rate function.
pub fn ldp_probability_bound(g: &Generator, subset: &[usize], inf_rate: f64, horizon: f64) -> Result<f64> {
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok(-horizon * inf_rate + ldp_error_terms(g, subset, horizon)?)
}

/// Upper bound on `log E[exp(T F(l_T / T)); range in S]` given
/// `sup_value = sup_mu [F(mu) - I(mu)]`.
pub fn ldp_varadhan_bound(g: &Generator, subset: &[usize], sup_value: f64, horizon: f64) -> Result<f64> {
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    Ok(horizon * sup_value + ldp_error_terms(g, subset, horizon)?)
}

/// `A[x][y]` for `x, y` in `subset` as a dense symmetric-ready matrix.
fn block(g: &Generator, subset: &[usize]) -> DMatrix<f64> {
    let k = subset.len();
    DMatrix::from_fn(k, k, |i, j| g.rate(subset[i], subset[j]))
}

/// For linear `F(mu) = <V, mu>`: `sup_mu [<V, mu> - I(mu)]` over measures
/// on `subset`, the top eigenvalue of `A_SS + diag(V)`. `potential` is
/// aligned with `subset`.
pub fn linear_sup(g: &Generator, subset: &[usize], potential: &[f64]) -> Result<f64> {
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if potential.len() != subset.len() {
        return Err(Error::Shape("potential must match the subset".into()));
    }
    let mut m = block(g, subset);
    for (i, v) in potential.iter().enumerate() {
        m[(i, i)] += v;
    }
    Ok(m.symmetric_eigen().eigenvalues.max())
}

/// `inf { I(mu) : supp mu in S, sum_x c_x mu_x >= threshold }` via the
/// dual `sup_{lambda >= 0} [lambda_min(-A_SS - lambda C) + lambda threshold]`,
/// which is tight for one quadratic constraint on the sphere.
///
/// Returns `+inf` when the half-space misses the simplex.
pub fn halfspace_inf_rate(g: &Generator, subset: &[usize], coefficients: &[f64], threshold: f64) -> Result<f64> {
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if coefficients.len() != subset.len() {
        return Err(Error::Shape("coefficients must match the subset".into()));
    }
    let cmax = coefficients.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if threshold > cmax {
        return Ok(f64::INFINITY);
    }
    let base = -block(g, subset);
    let dual = |lambda: f64| -> f64 {
        let mut m = base.clone();
        for (i, c) in coefficients.iter().enumerate() {
            m[(i, i)] -= lambda * c;
        }
        m.symmetric_eigen().eigenvalues.min() + lambda * threshold
    };
    // Concave in lambda: bracket the maximiser, then golden-section search.
    let mut hi = 1.0;
    while dual(2.0 * hi) > dual(hi) && hi < 1e8 {
        hi *= 2.0;
    }
    let hi = 2.0 * hi;
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut up) = (0.0, hi);
    let mut x1 = up - golden * (up - lo);
    let mut x2 = lo + golden * (up - lo);
    let (mut f1, mut f2) = (dual(x1), dual(x2));
    for _ in 0..200 {
        if up - lo <= 1e-13 * (1.0 + up) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (up - lo);
            f2 = dual(x2);
        } else {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - golden * (up - lo);
            f1 = dual(x1);
        }
    }
    Ok(dual(0.0).max(f1).max(f2).max(0.0))
}

/// Exact `log E_start[exp(int_0^T V(X_s) ds); range in S]` from the matrix
/// exponential of `T (A_SS + diag V)`. `start` is a position in `subset`.
pub fn log_restricted_mgf(
    g: &Generator,
    subset: &[usize],
    potential: &[f64],
    start: usize,
    horizon: f64,
) -> Result<f64> {
    if potential.len() != subset.len() || start >= subset.len() {
        return Err(Error::Shape("potential and start must match the subset".into()));
    }
    let mut m = block(g, subset);
    for (i, v) in potential.iter().enumerate() {
        m[(i, i)] += v;
    }
    let e = (m * horizon).exp();
    Ok(e.row(start).sum().ln())
}
