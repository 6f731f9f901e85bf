use super::{eta, rate_general, rate_symmetric};
use crate::chain::Generator;
use crate::density::SimplexPoint;
use crate::error::{Error, Result};

const RATE_TOL: f64 = 1e-11;

/// Pointwise upper bound on the local-time density at `l`.
///
/// Symmetric rates on the range use the closed-form rate function and the
/// simplified correction; otherwise the minimiser from [`rate_general`]
/// enters the correction term.
pub fn density_upper_bound(g: &Generator, a: usize, b: usize, l: &SimplexPoint) -> Result<f64> {
    let range = l.range();
    let (pa, pb) = match (l.position(a), l.position(b)) {
        (Some(pa), Some(pb)) => (pa, pb),
        _ => return Err(Error::Domain("start and end must lie in the range".into())),
    };
    let t = l.total();
    let k = range.len();
    let eta_r = eta(g, range);

    let mut mu = vec![0.0; g.len()];
    for (&x, &v) in range.iter().zip(l.values()) {
        mu[x] = v / t;
    }
    let symmetric = range.iter().all(|&x| range.iter().all(|&y| g.rate(x, y) == g.rate(y, x)));
    // Only rates touching the range matter, so the symmetric formula is
    // applied to the range block even if the generator is asymmetric elsewhere.
    let (rate, correction) = if symmetric {
        let rate = symmetric_block_rate(g, range, &mu);
        (rate, k as f64 * (1.0 + 1.0 / (4.0 * eta_r * t)))
    } else {
        let sol = rate_general(g, &mu, RATE_TOL)?;
        let gmin = &sol.minimizer;
        let mut sum = 0.0;
        for (i, &x) in range.iter().enumerate() {
            for (j, &y) in range.iter().enumerate() {
                if i != j {
                    let (lx, ly) = (l.values()[i], l.values()[j]);
                    sum += (lx / ly).sqrt() * gmin[j] * g.rate(x, y) / gmin[i];
                }
            }
        }
        (sol.value, (1.0 / eta_r + 1.0 / (4.0 * eta_r * eta_r * t)) * sum)
    };
    let volume: f64 = (0..k).filter(|&i| i != pa && i != pb).map(|i| (t / l.values()[i]).sqrt()).product();
    Ok((-t * rate).exp() * volume * eta_r.powi(k as i32 - 1) * correction.exp())
}

fn symmetric_block_rate(g: &Generator, range: &[usize], mu: &[f64]) -> f64 {
    if g.is_symmetric() {
        if let Ok(v) = rate_symmetric(g, mu) {
            return v;
        }
    }
    let mut value = 0.0;
    for &x in range {
        for &y in range {
            value -= mu[x].sqrt() * g.rate(x, y) * mu[y].sqrt();
        }
    }
    value.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::density;

    #[test]
    fn symmetric_two_state_value() {
        let g = Generator::two_state(1.0);
        let l = SimplexPoint::new(&[0, 1], &[0.5, 0.5]).unwrap();
        let bound = density_upper_bound(&g, 0, 1, &l).unwrap();
        assert!((bound - 2.5f64.exp()).abs() < 1e-12);
        assert!(density(&g, 0, 1, &l, 1e-14).unwrap() <= bound);
    }

    #[test]
    fn singleton_is_exp_rate() {
        let g = Generator::srw_path(0, 2);
        let l = SimplexPoint::new(&[1], &[2.0]).unwrap();
        // eta = 1 (floor) and the range has one state, correction exp(1 + 1/8)
        let bound = density_upper_bound(&g, 1, 1, &l).unwrap();
        let rate: f64 = 2.0;
        assert!((bound - (-2.0 * rate).exp() * (1.125f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_dominates() {
        let g = Generator::from_off_diagonal(
            vec!["p".into(), "q".into(), "r".into()],
            &[vec![0.0, 1.3, 0.4], vec![0.2, 0.0, 0.9], vec![1.1, 0.6, 0.0]],
        )
        .unwrap();
        let l = SimplexPoint::new(&[0, 1, 2], &[0.5, 0.9, 0.6]).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let rho = density(&g, a, b, &l, 1e-14).unwrap();
                assert!(rho <= density_upper_bound(&g, a, b, &l).unwrap());
            }
        }
    }
}
