use super::{EdgeKernel, LocalBlock, SimplexPoint};
use crate::chain::Generator;
use crate::error::{Error, Result};

/// Product-form density for a nearest-neighbour generator on an interval.
///
/// The range carried by `l` must be a run of consecutive generator states
/// with no rates between states two or more apart; `a <= b`. Sites left of
/// `a` and right of `b` contribute derivative kernels, the edges between
/// `a` and `b` plain kernels weighted by the rightward rate.
pub fn density_tridiagonal(g: &Generator, a: usize, b: usize, l: &SimplexPoint) -> Result<f64> {
    let range = l.range();
    if range.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::NotInterval);
    }
    let block = LocalBlock::new(g, l, a, b)?;
    let n = block.n;
    for x in 0..n {
        for y in 0..n {
            if x.abs_diff(y) >= 2 && block.off[x * n + y] != 0.0 {
                return Err(Error::NotTridiagonal);
            }
        }
    }
    let (a, b) = (block.a, block.b);
    if a > b {
        return Err(Error::Domain("product form needs a <= b".into()));
    }
    let v = l.values();
    let mut rho = block.diagonal_factor(v);
    for x in 0..n - 1 {
        let k = EdgeKernel::new(block.off[x * n + x + 1], block.off[(x + 1) * n + x]);
        rho *= if x < a {
            k.partial(v[x], v[x + 1])
        } else if x < b {
            block.off[x * n + x + 1] * k.at(v[x], v[x + 1])
        } else {
            k.partial(v[x + 1], v[x])
        };
    }
    Ok(rho)
}
