//! Joint density of the local times on a fixed range, by three methods.

mod cofactor;
mod flows;
mod kernel;
mod quadrature;
mod series;
mod simplex;
mod tridiagonal;

pub use cofactor::{cofactor, CofactorOperator};
pub use flows::{enumerate_balanced_flows, for_each_balanced_flow, support_edges, BalancedFlow, DEFAULT_FLOW_CAP};
pub use kernel::EdgeKernel;
pub use quadrature::{density_quadrature, density_quadrature_refined, QuadratureValue, DEFAULT_GRID};
pub use series::{
    certified_order, derivative_tail, flow_series_many, tail_sum, torus_series, weight_mass, SeriesOptions, SeriesValue,
};
pub use simplex::{SimplexPoint, MIN_COORDINATE};
pub use tridiagonal::density_tridiagonal;

use crate::chain::Generator;
use crate::error::{Error, Result};

/// Default absolute tolerance for [`density`].
pub const DEFAULT_TOL: f64 = 1e-13;

/// Generator data seen from a range: off-diagonal block and diagonal.
#[derive(Debug, Clone)]
pub(crate) struct LocalBlock {
    pub n: usize,
    /// `B` on `R x R`, row-major, zero diagonal.
    pub off: Vec<f64>,
    /// `A[x][x]` for `x` in `R`.
    pub diag: Vec<f64>,
    pub a: usize,
    pub b: usize,
}

impl LocalBlock {
    pub fn new(g: &Generator, l: &SimplexPoint, a: usize, b: usize) -> Result<Self> {
        let states = l.range();
        if let Some(&bad) = states.iter().find(|&&x| x >= g.len()) {
            return Err(Error::UnknownLabel(format!("#{bad}")));
        }
        let locate = |s: usize| {
            l.position(s)
                .ok_or_else(|| Error::Domain(format!("state '{}' is not in the range", g.label(s.min(g.len() - 1)))))
        };
        let (a, b) = (locate(a)?, locate(b)?);
        let n = states.len();
        let mut off = vec![0.0; n * n];
        for (i, &x) in states.iter().enumerate() {
            for (j, &y) in states.iter().enumerate() {
                off[i * n + j] = g.off_diagonal(x, y);
            }
        }
        let diag = states.iter().map(|&x| g.rate(x, x)).collect();
        Ok(Self { n, off, diag, a, b })
    }

    /// `exp(sum_x l_x A[x][x])`.
    pub fn diagonal_factor(&self, l: &[f64]) -> f64 {
        self.diag.iter().zip(l).map(|(d, v)| d * v).sum::<f64>().exp()
    }
}

/// Density value with its truncation certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub value: f64,
    /// Certified bound on the absolute truncation error.
    pub tail_bound: f64,
    /// Largest flow total included.
    pub order: usize,
}

/// Density of the local times at `l` on `{range = R, endpoint = b}` for the
/// chain started at `a`, with `R` the range carried by `l`. The absolute
/// truncation error is at most `tol`.
pub fn density(g: &Generator, a: usize, b: usize, l: &SimplexPoint, tol: f64) -> Result<f64> {
    density_certified(g, a, b, l, &SeriesOptions::with_tol(tol)).map(|d| d.value)
}

/// [`density`] returning the truncation certificate.
pub fn density_certified(
    g: &Generator,
    a: usize,
    b: usize,
    l: &SimplexPoint,
    opts: &SeriesOptions,
) -> Result<DensityValue> {
    let block = LocalBlock::new(g, l, a, b)?;
    evaluate_series(&block, &block.off, l.values(), opts)
}

/// Same density, with the flow series built from the conjugated weights
/// `r_x B[x][y] / r_y`; the result does not depend on `r`.
pub fn density_conjugated(
    g: &Generator,
    a: usize,
    b: usize,
    l: &SimplexPoint,
    r: &[f64],
    opts: &SeriesOptions,
) -> Result<DensityValue> {
    let block = LocalBlock::new(g, l, a, b)?;
    let n = block.n;
    if r.len() != n || r.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("conjugation weights must be positive, one per range state".into()));
    }
    let mut w = block.off.clone();
    for x in 0..n {
        for y in 0..n {
            w[x * n + y] *= r[x] / r[y];
        }
    }
    evaluate_series(&block, &w, l.values(), opts)
}

fn evaluate_series(block: &LocalBlock, weights: &[f64], l: &[f64], opts: &SeriesOptions) -> Result<DensityValue> {
    let op = CofactorOperator::new(&block.off, block.n, block.a, block.b);
    let terms: Vec<(Vec<usize>, f64)> = op.weights.iter().filter(|t| t.1 != 0.0).cloned().collect();
    let prefactor = block.diagonal_factor(l);
    if terms.is_empty() {
        return Ok(DensityValue { value: 0.0, tail_bound: 0.0, order: 0 });
    }
    let s = weight_mass(weights, l);
    let (order, tail_bound) = certified_order(s, l, &terms, prefactor, opts)?;
    let sets: Vec<Vec<usize>> = terms.iter().map(|t| t.0.clone()).collect();
    let parts = flow_series_many(weights, l, &sets, order, opts.flow_cap)?;
    let value = prefactor * terms.iter().zip(&parts).map(|(t, p)| t.1 * p).sum::<f64>();
    Ok(DensityValue { value, tail_bound, order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{bessel_i0, bessel_i1};

    fn point(range: &[usize], l: &[f64]) -> SimplexPoint {
        SimplexPoint::new(range, l).unwrap()
    }

    #[test]
    fn two_state_off_diagonal() {
        let g = Generator::two_state(1.0);
        let rho = density(&g, 0, 1, &point(&[0, 1], &[0.5, 0.5]), 1e-15).unwrap();
        assert!((rho - 0.465_759_607_593_640_4).abs() < 1e-15);
    }

    #[test]
    fn two_state_diagonal() {
        let g = Generator::two_state(1.0);
        let (l1, l2) = (0.8, 0.45);
        let rho = density(&g, 0, 0, &point(&[0, 1], &[l1, l2]), 1e-15).unwrap();
        let exact = (-(l1 + l2)).exp() * (l1 / l2).sqrt() * bessel_i1(2.0 * (l1 * l2).sqrt());
        assert!((rho - exact).abs() < 1e-14);
    }

    #[test]
    fn singleton_range_is_no_jump_probability() {
        let g = Generator::srw_path(0, 3);
        let rho = density(&g, 1, 1, &point(&[1], &[0.7]), 1e-15).unwrap();
        assert!((rho - (-1.4f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_two_state() {
        let g = Generator::from_triples(&["1", "2"], &[("1", "2", 2.0), ("2", "1", 0.5)]).unwrap();
        let (l1, l2) = (0.6, 0.9);
        let rho = density(&g, 0, 1, &point(&[0, 1], &[l1, l2]), 1e-15).unwrap();
        let exact = (-2.0 * l1 - 0.5 * l2).exp() * 2.0 * bessel_i0(2.0 * (l1 * l2).sqrt());
        assert!((rho - exact).abs() < 1e-14);
    }

    #[test]
    fn certificate_bounds_error() {
        let g = Generator::two_state(1.0);
        let l = point(&[0, 1], &[1.5, 2.5]);
        let exact = (-4.0f64).exp() * bessel_i0(2.0 * (1.5f64 * 2.5).sqrt());
        for &tol in &[1e-3, 1e-6, 1e-10] {
            let d = density_certified(&g, 0, 1, &l, &SeriesOptions::with_tol(tol)).unwrap();
            assert!(d.tail_bound <= tol);
            assert!((d.value - exact).abs() <= d.tail_bound + 1e-15);
        }
    }

    #[test]
    fn endpoints_must_be_in_range() {
        let g = Generator::srw_path(0, 3);
        let err = density(&g, 0, 3, &point(&[0, 1], &[0.5, 0.5]), 1e-12).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
