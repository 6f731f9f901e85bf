use nalgebra::{DMatrix, DVector};

use crate::chain::Generator;
use crate::error::{Error, Result};

const MAX_NEWTON: usize = 200;

/// Rate-function value with the optimising positive vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSolution {
    pub value: f64,
    /// Sorted support of the measure.
    pub support: Vec<usize>,
    /// Minimiser on the support, scaled so its first entry is 1.
    pub minimizer: Vec<f64>,
    pub iterations: usize,
    pub final_gradient_norm: f64,
}

fn check_measure(g: &Generator, mu: &[f64]) -> Result<()> {
    if mu.len() != g.len() {
        return Err(Error::Shape(format!("measure has {} entries, generator {}", mu.len(), g.len())));
    }
    if mu.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
        return Err(Error::Domain("measure entries must be nonnegative".into()));
    }
    let total: f64 = mu.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("measure must sum to 1, sums to {total}")));
    }
    Ok(())
}

/// Dirichlet form `<sqrt(mu), -A sqrt(mu)>` for a symmetric generator.
pub fn rate_symmetric(g: &Generator, mu: &[f64]) -> Result<f64> {
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    check_measure(g, mu)?;
    let n = g.len();
    let root: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
    let mut value = 0.0;
    for x in 0..n {
        for y in 0..n {
            value -= root[x] * g.rate(x, y) * root[y];
        }
    }
    Ok(value.max(0.0))
}

/// `phi(u) = sum_{x != y in S} mu_x A[x][y] exp(u_y - u_x)` over the support
/// `S`, with `u` aligned to `support`.
pub fn rate_objective(g: &Generator, mu: &[f64], support: &[usize], u: &[f64]) -> f64 {
    let mut phi = 0.0;
    for (i, &x) in support.iter().enumerate() {
        for (j, &y) in support.iter().enumerate() {
            if i != j {
                phi += mu[x] * g.rate(x, y) * (u[j] - u[i]).exp();
            }
        }
    }
    phi
}

fn strongly_connected(g: &Generator, support: &[usize]) -> bool {
    let k = support.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; k];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..k {
                let r = if forward { g.rate(support[i], support[j]) } else { g.rate(support[j], support[i]) };
                if i != j && !seen[j] && r > 0.0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// Rate function `-inf_{g > 0} <A g, mu / g>` by damped Newton in
/// `u = log g`, gauge `u = 0` at the first support state.
pub fn rate_general(g: &Generator, mu: &[f64], tol: f64) -> Result<RateSolution> {
    check_measure(g, mu)?;
    let support: Vec<usize> = (0..g.len()).filter(|&x| mu[x] > 0.0).collect();
    let k = support.len();
    let diagonal_part: f64 = support.iter().map(|&x| -mu[x] * g.rate(x, x)).sum();
    if k == 1 {
        return Ok(RateSolution {
            value: diagonal_part,
            support,
            minimizer: vec![1.0],
            iterations: 0,
            final_gradient_norm: 0.0,
        });
    }
    if !strongly_connected(g, &support) {
        return Err(Error::Unbounded);
    }
    // Weights w[i][j] = mu_x A[x][y] for x = support[i], y = support[j].
    let mut w = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                w[i * k + j] = mu[support[i]] * g.rate(support[i], support[j]);
            }
        }
    }
    let phi = |u: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                if w[i * k + j] != 0.0 {
                    s += w[i * k + j] * (u[j] - u[i]).exp();
                }
            }
        }
        s
    };
    // Gradient and Hessian in the free coordinates 1..k.
    let derivatives = |u: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
        let mut grad = DVector::zeros(k);
        let mut hess = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let wij = w[i * k + j];
                if wij == 0.0 {
                    continue;
                }
                let t = wij * (u[j] - u[i]).exp();
                grad[j] += t;
                grad[i] -= t;
                hess[(i, i)] += t;
                hess[(j, j)] += t;
                hess[(i, j)] -= t;
                hess[(j, i)] -= t;
            }
        }
        (grad.rows(1, k - 1).into_owned(), hess.view((1, 1), (k - 1, k - 1)).into_owned())
    };

    // Symmetric optimum as the starting point.
    let base = mu[support[0]].ln();
    let mut u: Vec<f64> = support.iter().map(|&x| 0.5 * (mu[x].ln() - base)).collect();
    let mut value = phi(&u);
    for iteration in 0..=MAX_NEWTON {
        let (grad, hess) = derivatives(&u);
        let norm = grad.amax();
        if norm <= tol {
            let minimizer = u.iter().map(|v| v.exp()).collect();
            return Ok(RateSolution {
                value: (diagonal_part - value).max(0.0),
                support,
                minimizer,
                iterations: iteration,
                final_gradient_norm: norm,
            });
        }
        if iteration == MAX_NEWTON {
            return Err(Error::NotConverged { iterations: iteration, gradient_norm: norm });
        }
        let step = match hess.clone().cholesky() {
            Some(ch) => -ch.solve(&grad),
            None => -grad.clone(),
        };
        let slope = grad.dot(&step);
        // Below this decrement the objective cannot resolve further decrease.
        let tiny = -slope <= 1e-12 * (1.0 + value.abs());
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = std::iter::once(0.0).chain((0..k - 1).map(|i| u[i + 1] + t * step[i])).collect();
            let v = phi(&trial);
            if tiny || v <= value + 1e-4 * t * slope || t < 1e-12 {
                u = trial;
                value = v;
                break;
            }
            t *= 0.5;
        }
    }
    unreachable!()
}
