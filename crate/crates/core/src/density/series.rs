use statrs::function::factorial::ln_factorial;

use super::flows::{for_each_balanced_flow, support_edges, DEFAULT_FLOW_CAP};
use crate::error::{Error, Result};

/// Truncated series value with a certified bound on the remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    /// Largest flow total included.
    pub order: usize,
}

/// Knobs for automatic truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Absolute tolerance on the final quantity.
    pub tol: f64,
    pub max_order: usize,
    pub flow_cap: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { tol: 1e-13, max_order: 400, flow_cap: DEFAULT_FLOW_CAP }
    }
}

impl SeriesOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// `sum_{N > order} s^N N^q / N!`.
pub fn tail_sum(s: f64, order: usize, q: usize) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let n0 = order + 1;
    let ln_first = n0 as f64 * s.ln() - ln_factorial(n0 as u64) + q as f64 * (n0 as f64).ln();
    let mut term = ln_first.exp();
    if term == 0.0 {
        return 0.0;
    }
    let mut sum = term;
    let mut n = n0;
    loop {
        n += 1;
        let nf = n as f64;
        term *= s / nf * (nf / (nf - 1.0)).powi(q as i32);
        sum += term;
        // Past the peak the ratio is below one and keeps shrinking.
        if nf > s + q as f64 + 1.0 && term <= 1e-18 * sum {
            return sum;
        }
        if n > n0 + 100_000 {
            return f64::INFINITY;
        }
    }
}

/// Bound on the remainder of `d^Q S` after the flows of total `<= order`,
/// where `S` is the flow series with absolute weight sum `s`. Uses
/// `d_x <= N` for a flow of total `N`.
pub fn derivative_tail(s: f64, l: &[f64], q: &[usize], order: usize) -> f64 {
    let denom: f64 = q.iter().map(|&x| 2.0 * l[x]).product();
    tail_sum(s, order, q.len()) / denom
}

/// `sum_{x != y} |W[x][y]| sqrt(l_x l_y)`.
pub fn weight_mass(weights: &[f64], l: &[f64]) -> f64 {
    let n = l.len();
    let mut s = 0.0;
    for x in 0..n {
        for y in 0..n {
            if x != y {
                s += weights[x * n + y].abs() * (l[x] * l[y]).sqrt();
            }
        }
    }
    s
}

/// Evaluate `d^Q S(l)` for several derivative sets at once, summing every
/// balanced flow of total `<= order`. Each `Q` is a list of local indices.
pub fn flow_series_many(weights: &[f64], l: &[f64], sets: &[Vec<usize>], order: usize, cap: usize) -> Result<Vec<f64>> {
    let n = l.len();
    if weights.len() != n * n {
        return Err(Error::Shape(format!("weight matrix must be {n}x{n}")));
    }
    let edges = support_edges(weights, n);
    // powers[e][c] = w_e^c / c!
    let powers: Vec<Vec<f64>> = edges
        .iter()
        .map(|&(x, y)| {
            let w = weights[x * n + y] * (l[x] * l[y]).sqrt();
            let mut row = Vec::with_capacity(order + 1);
            let mut p = 1.0;
            row.push(p);
            for c in 1..=order {
                p *= w / c as f64;
                row.push(p);
            }
            row
        })
        .collect();
    let half_inv: Vec<f64> = l.iter().map(|v| 0.5 / v).collect();
    let mut sums = vec![0.0; sets.len()];
    let mut degree = vec![0u32; n];
    for_each_balanced_flow(n, &edges, order, cap, |counts| {
        let mut m = 1.0;
        degree.iter_mut().for_each(|d| *d = 0);
        for (e, &c) in counts.iter().enumerate() {
            if c > 0 {
                m *= powers[e][c as usize];
                let (x, y) = edges[e];
                degree[x] += c;
                degree[y] += c;
            }
        }
        for (sum, q) in sums.iter_mut().zip(sets) {
            let mut f = m;
            for &x in q {
                f *= degree[x] as f64 * half_inv[x];
            }
            *sum += f;
        }
    })?;
    Ok(sums)
}

/// `d^Q S(l)` truncated at flow total `max_total`.
///
/// `S(l) = sum_n prod_{x != y} (W[x][y] sqrt(l_x l_y))^{n_xy} / n_xy!` over
/// balanced flows `n`; each monomial is differentiated in closed form.
pub fn torus_series(
    weights: &[f64],
    l: &[f64],
    derivative_set: &[usize],
    max_total: usize,
    tol: f64,
) -> Result<SeriesValue> {
    if let Some(&x) = derivative_set.iter().find(|&&x| x >= l.len() || l[x] <= 0.0) {
        return Err(Error::Domain(format!("derivative coordinate {x} needs a positive local time")));
    }
    let s = weight_mass(weights, l);
    let tail_bound = derivative_tail(s, l, derivative_set, max_total);
    if tail_bound.is_nan() || tail_bound > tol {
        return Err(Error::NonConvergedTruncation { tail_bound, tol, order: max_total });
    }
    let value = flow_series_many(weights, l, &[derivative_set.to_vec()], max_total, DEFAULT_FLOW_CAP)?[0];
    Ok(SeriesValue { value, tail_bound, order: max_total })
}

/// Smallest order at which `scale * sum_Q |c_Q| tail_Q <= tol`.
pub fn certified_order(
    s: f64,
    l: &[f64],
    terms: &[(Vec<usize>, f64)],
    scale: f64,
    opts: &SeriesOptions,
) -> Result<(usize, f64)> {
    let bound = |order: usize| -> f64 {
        scale * terms.iter().filter(|t| t.1 != 0.0).map(|(q, c)| c.abs() * derivative_tail(s, l, q, order)).sum::<f64>()
    };
    let mut order = 0;
    loop {
        let b = bound(order);
        if b <= opts.tol {
            return Ok((order, b));
        }
        if order >= opts.max_order {
            return Err(Error::NonConvergedTruncation { tail_bound: b, tol: opts.tol, order });
        }
        order += 1;
    }
}
