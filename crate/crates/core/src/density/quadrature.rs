use num_complex::Complex64;
use rayon::prelude::*;

use super::{LocalBlock, SimplexPoint};
use crate::chain::Generator;
use crate::error::{Error, Result};
use crate::linalg::{apply_cofactor_replacement, lu_determinant_in_place};

pub const DEFAULT_GRID: usize = 32;
const MAX_RANGE: usize = 4;

/// Refined quadrature value and the grid it settled on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureValue {
    pub value: f64,
    pub grid_size: usize,
}

/// Derivative-free torus form of the density, by the periodic trapezoid
/// rule with `grid_size` points per angle.
///
/// The integrand depends on angle differences only, so the first angle is
/// pinned to zero and the grid has one dimension fewer than the range.
pub fn density_quadrature(g: &Generator, a: usize, b: usize, l: &SimplexPoint, grid_size: usize) -> Result<f64> {
    let block = LocalBlock::new(g, l, a, b)?;
    if block.n > MAX_RANGE {
        return Err(Error::Domain(format!("quadrature supports ranges of at most {MAX_RANGE} states")));
    }
    if grid_size == 0 {
        return Err(Error::Domain("grid size must be positive".into()));
    }
    let z = integrate(&block, l.values(), grid_size);
    if z.im.abs() > 1e-8 * z.re.abs() + 1e-12 {
        return Err(Error::ResidualImaginary { real: z.re, imag: z.im });
    }
    Ok(z.re)
}

/// Double the grid from [`DEFAULT_GRID`] until two successive values agree
/// to `tol` relative (plus `tol` absolute).
pub fn density_quadrature_refined(
    g: &Generator,
    a: usize,
    b: usize,
    l: &SimplexPoint,
    tol: f64,
    max_grid: usize,
) -> Result<QuadratureValue> {
    let mut grid = DEFAULT_GRID;
    let mut prev = density_quadrature(g, a, b, l, grid)?;
    while grid * 2 <= max_grid {
        grid *= 2;
        let next = density_quadrature(g, a, b, l, grid)?;
        if (next - prev).abs() <= tol * (next.abs() + 1.0) {
            return Ok(QuadratureValue { value: next, grid_size: grid });
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged { grid_size: grid })
}

fn integrate(block: &LocalBlock, l: &[f64], grid: usize) -> Complex64 {
    let n = block.n;
    let prefactor = block.diagonal_factor(l);
    if n == 1 {
        return Complex64::new(prefactor, 0.0);
    }
    let free = n - 1;
    let total = grid.pow(free as u32);
    let outer = grid;
    let inner = total / outer;
    let step = 2.0 * std::f64::consts::PI / grid as f64;
    let phases: Vec<Complex64> = (0..grid).map(|j| Complex64::from_polar(1.0, step * j as f64)).collect();
    let sqrt_l: Vec<f64> = l.iter().map(|v| v.sqrt()).collect();

    // Partial sums per outer index, reduced in order so results are reproducible.
    let partial: Vec<Complex64> = (0..outer)
        .into_par_iter()
        .map(|first| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
            let mut e = vec![Complex64::new(1.0, 0.0); n];
            let mut sum = Complex64::new(0.0, 0.0);
            for rest in 0..inner {
                // angle indices: state 0 pinned, state 1 = first, others from `rest`
                e[1] = phases[first];
                let mut r = rest;
                for slot in e.iter_mut().skip(2) {
                    *slot = phases[r % grid];
                    r /= grid;
                }
                sum += integrand(block, &sqrt_l, &e, &mut buf);
            }
            sum
        })
        .collect();
    let sum: Complex64 = partial.iter().fold(Complex64::new(0.0, 0.0), |acc, z| acc + z);
    sum * (prefactor / total as f64)
}

// cofactor(-B + V) * exp(sum_{x != y} B_xy sqrt(l_x l_y) e^{i(t_x - t_y)}), with
// v(x) = sum_z B_xz sqrt(l_z / l_x) e^{i(t_x - t_z)} and e[x] = e^{i t_x}.
fn integrand(block: &LocalBlock, sqrt_l: &[f64], e: &[Complex64], buf: &mut [Complex64]) -> Complex64 {
    let n = block.n;
    let mut exponent = Complex64::new(0.0, 0.0);
    for x in 0..n {
        let mut v = Complex64::new(0.0, 0.0);
        for y in 0..n {
            let bxy = block.off[x * n + y];
            if x == y {
                continue;
            }
            buf[x * n + y] = Complex64::new(-bxy, 0.0);
            if bxy != 0.0 {
                let rot = e[x] * e[y].conj();
                exponent += rot * (bxy * sqrt_l[x] * sqrt_l[y]);
                v += rot * (bxy * sqrt_l[y] / sqrt_l[x]);
            }
        }
        buf[x * n + x] = v;
    }
    apply_cofactor_replacement(buf, n, block.a, block.b);
    lu_determinant_in_place(buf, n) * exponent.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::density;
    use crate::special::bessel_i1;

    #[test]
    fn two_state_matches_series() {
        let g = Generator::two_state(1.0);
        let l = SimplexPoint::new(&[0, 1], &[0.5, 0.5]).unwrap();
        let q = density_quadrature(&g, 0, 1, &l, 32).unwrap();
        assert!((q - 0.465_759_607_593_640_4).abs() < 1e-10);
        let (l1, l2) = (0.3, 1.2);
        let l = SimplexPoint::new(&[0, 1], &[l1, l2]).unwrap();
        let q = density_quadrature(&g, 0, 0, &l, 32).unwrap();
        let exact = (-(l1 + l2)).exp() * (l1 / l2).sqrt() * bessel_i1(2.0 * (l1 * l2).sqrt());
        assert!((q - exact).abs() < 1e-12);
    }

    #[test]
    fn singleton() {
        let g = Generator::srw_path(0, 2);
        let l = SimplexPoint::new(&[2], &[0.4]).unwrap();
        let q = density_quadrature(&g, 2, 2, &l, 8).unwrap();
        assert!((q - (-0.4f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn three_state_path_matches_series() {
        let g = Generator::srw_path(0, 2);
        let l = SimplexPoint::new(&[0, 1, 2], &[0.21, 0.46, 0.33]).unwrap();
        for (a, b) in [(0, 2), (1, 1), (0, 0), (2, 1)] {
            let s = density(&g, a, b, &l, 1e-15).unwrap();
            let q = density_quadrature_refined(&g, a, b, &l, 1e-13, 512).unwrap();
            assert!((s - q.value).abs() <= 1e-8 * s.abs(), "a={a} b={b}: {s} vs {}", q.value);
        }
    }

    #[test]
    fn asymmetric_dense_matches_series() {
        let g = Generator::from_off_diagonal(
            vec!["p".into(), "q".into(), "r".into()],
            &[vec![0.0, 1.3, 0.4], vec![0.2, 0.0, 0.9], vec![1.1, 0.6, 0.0]],
        )
        .unwrap();
        let l = SimplexPoint::new(&[0, 1, 2], &[0.5, 0.9, 0.6]).unwrap();
        for (a, b) in [(0, 1), (2, 2), (1, 0)] {
            let s = density(&g, a, b, &l, 1e-15).unwrap();
            let q = density_quadrature_refined(&g, a, b, &l, 1e-13, 512).unwrap();
            assert!((s - q.value).abs() <= 1e-9 * s.abs(), "a={a} b={b}: {s} vs {}", q.value);
        }
    }
}
