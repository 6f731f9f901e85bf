//! Ray-Knight description of simple random walk local times at an inverse
//! local time: spatial Markov chains with an inner kernel between the start
//! and the pivot and an absorbing outer kernel beyond them.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::chain::Generator;
use crate::density::{density, SimplexPoint};
use crate::error::{Error, Result};
use crate::special::{bessel_i0, bessel_i1};

/// Sites sampled beyond the pivot and below the start.
pub const DEFAULT_WINDOW: usize = 10;

fn check(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be nonnegative, got {v}")))
    }
}

/// Inner kernel `f(h1, h2) = exp(-h1 - h2) I0(2 sqrt(h1 h2))`.
pub fn rk_inner_density(h1: f64, h2: f64) -> Result<f64> {
    check("h1", h1)?;
    check("h2", h2)?;
    Ok((-h1 - h2).exp() * bessel_i0(2.0 * (h1 * h2).sqrt()))
}

/// Mass of the outer kernel at zero, `exp(-h1)`.
pub fn rk_outer_atom(h1: f64) -> Result<f64> {
    check("h1", h1)?;
    Ok((-h1).exp())
}

/// Absolutely continuous part of the outer kernel,
/// `exp(-h1 - h2) sqrt(h1 / h2) I1(2 sqrt(h1 h2))` for `h2 > 0`.
pub fn rk_outer_density(h1: f64, h2: f64) -> Result<f64> {
    check("h1", h1)?;
    if !(h2 > 0.0 && h2.is_finite()) {
        return Err(Error::Domain(format!("h2 must be positive, got {h2}")));
    }
    Ok((-h1 - h2).exp() * (h1 / h2).sqrt() * bessel_i1(2.0 * (h1 * h2).sqrt()))
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let k: f64 = Poisson::new(mean).expect("finite positive mean").sample(rng);
    k as u64
}

fn gamma<R: Rng + ?Sized>(shape: u64, rng: &mut R) -> f64 {
    if shape == 0 {
        return 0.0;
    }
    Gamma::new(shape as f64, 1.0).expect("positive shape").sample(rng)
}

/// One step of the inner chain: `Gamma(K + 1, 1)` with `K ~ Poisson(h)`.
pub fn sample_inner_step<R: Rng + ?Sized>(h: f64, rng: &mut R) -> f64 {
    let k = poisson(h, rng);
    gamma(k + 1, rng)
}

/// One step of the outer chain: `Gamma(K, 1)` with `K ~ Poisson(h)`, and
/// `Gamma(0, 1)` the point mass at zero.
pub fn sample_outer_step<R: Rng + ?Sized>(h: f64, rng: &mut R) -> f64 {
    let k = poisson(h, rng);
    gamma(k, rng)
}

/// Local-time profile of walk started at 0 and stopped when the local time
/// at `pivot` reaches `level`, drawn from the three spatial chains.
///
/// Sites `pivot, pivot - 1, ..., 0` follow the inner kernel from `level`.
/// Sites above the pivot and below 0 follow the outer kernel for `window`
/// steps each, started from `level` and from the value at 0. The three
/// chains use separate random streams split off `rng`.
pub fn sample_rk_profile<R: Rng + ?Sized>(
    pivot: i64,
    level: f64,
    window: usize,
    rng: &mut R,
) -> Result<BTreeMap<i64, f64>> {
    if pivot < 1 {
        return Err(Error::Domain(format!("pivot must be at least 1, got {pivot}")));
    }
    if !(level > 0.0 && level.is_finite()) {
        return Err(Error::Domain(format!("level must be positive, got {level}")));
    }
    let mut inner = ChaCha8Rng::seed_from_u64(rng.random());
    let mut right = ChaCha8Rng::seed_from_u64(rng.random());
    let mut left = ChaCha8Rng::seed_from_u64(rng.random());

    let mut profile = BTreeMap::new();
    let mut v = level;
    profile.insert(pivot, v);
    for site in (0..pivot).rev() {
        v = sample_inner_step(v, &mut inner);
        profile.insert(site, v);
    }
    let mut v = level;
    for site in pivot + 1..=pivot + window as i64 {
        v = sample_outer_step(v, &mut right);
        profile.insert(site, v);
    }
    let mut v = profile[&0];
    for site in (-(window as i64)..0).rev() {
        v = sample_outer_step(v, &mut left);
        profile.insert(site, v);
    }
    Ok(profile)
}

/// Both sides of the fixed-time product identity for simple random walk on
/// the integers: `(density, kernel product)` at `l` on the interval range
/// carried by `l`, with `a <= b`.
///
/// Every range state must have rate 1 to each neighbour and total rate 2,
/// so the range must sit strictly inside the generator's window.
pub fn rk_fixed_time_check(g: &Generator, a: usize, b: usize, l: &SimplexPoint) -> Result<(f64, f64)> {
    let range = l.range();
    if range.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::NotInterval);
    }
    for &x in range {
        let unit_neighbours = x > 0 && x + 1 < g.len() && g.rate(x, x - 1) == 1.0 && g.rate(x, x + 1) == 1.0;
        if !unit_neighbours || g.rate(x, x) != -2.0 {
            return Err(Error::NotSrw);
        }
    }
    let (pa, pb) = match (l.position(a), l.position(b)) {
        (Some(pa), Some(pb)) if pa <= pb => (pa, pb),
        (Some(_), Some(_)) => return Err(Error::Domain("product identity needs a <= b".into())),
        _ => return Err(Error::Domain("start and end must lie in the range".into())),
    };
    let v = l.values();
    let k = v.len();
    let mut product = rk_outer_atom(v[0])? * rk_outer_atom(v[k - 1])?;
    for i in 0..k - 1 {
        product *= if i < pa {
            rk_outer_density(v[i + 1], v[i])?
        } else if i < pb {
            rk_inner_density(v[i], v[i + 1])?
        } else {
            rk_outer_density(v[i], v[i + 1])?
        };
    }
    let rho = density(g, a, b, l, 1e-15)?;
    Ok((rho, product))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Continuous, Discrete, Gamma as GammaPdf, Poisson as PoissonPmf};

    #[test]
    fn kernel_values() {
        assert_eq!(rk_inner_density(0.0, 0.0).unwrap(), 1.0);
        assert!((rk_inner_density(1.0, 1.0).unwrap() - 0.308_508_322_553_671).abs() < 1e-15);
        assert!((rk_outer_atom(1.0).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-16);
        assert_eq!(rk_outer_density(0.0, 1.0).unwrap(), 0.0);
        assert!(rk_inner_density(-1.0, 1.0).is_err());
        assert!(rk_outer_density(1.0, 0.0).is_err());
    }

    fn mixture(h1: f64, h2: f64, shift: u64) -> f64 {
        let p = PoissonPmf::new(h1).unwrap();
        (0..200u64)
            .filter(|k| k + shift > 0)
            .map(|k| p.pmf(k) * GammaPdf::new((k + shift) as f64, 1.0).unwrap().pdf(h2))
            .sum()
    }

    #[test]
    fn poisson_gamma_mixtures() {
        for i in 1..=5 {
            for j in 1..=5 {
                let (h1, h2) = (i as f64 * 0.9, j as f64 * 0.8);
                let f = rk_inner_density(h1, h2).unwrap();
                assert!((f - mixture(h1, h2, 1)).abs() < 1e-12 * (1.0 + f));
                let p = rk_outer_density(h1, h2).unwrap();
                assert!((p - mixture(h1, h2, 0)).abs() < 1e-12 * (1.0 + p));
            }
        }
    }

    #[test]
    fn profile_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let p = sample_rk_profile(2, 1.5, 6, &mut rng).unwrap();
            assert_eq!(p[&2], 1.5);
            assert_eq!(p.len(), 3 + 12);
            for w in [(3..=8).collect::<Vec<i64>>(), (-6..=-1).rev().collect()] {
                let mut dead = false;
                for s in w {
                    if dead {
                        assert_eq!(p[&s], 0.0);
                    }
                    dead |= p[&s] == 0.0;
                }
            }
        }
    }

    #[test]
    fn profile_is_reproducible() {
        let a = sample_rk_profile(3, 1.0, 4, &mut ChaCha8Rng::seed_from_u64(17)).unwrap();
        let b = sample_rk_profile(3, 1.0, 4, &mut ChaCha8Rng::seed_from_u64(17)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fixed_time_two_sites() {
        let g = Generator::srw_path(-1, 3);
        let (one, two) = (g.index_of("1").unwrap(), g.index_of("2").unwrap());
        let l = SimplexPoint::new(&[one, two], &[0.5, 0.5]).unwrap();
        let (rho, prod) = rk_fixed_time_check(&g, one, two, &l).unwrap();
        let expect = (-2.0f64).exp() * bessel_i0(1.0);
        assert!((rho - expect).abs() < 1e-14);
        assert!((prod - expect).abs() < 1e-14);
    }

    #[test]
    fn fixed_time_three_sites() {
        let g = Generator::srw_path(-1, 3);
        let r: Vec<usize> = ["0", "1", "2"].iter().map(|s| g.index_of(s).unwrap()).collect();
        let l = SimplexPoint::new(&r, &[0.3, 0.45, 0.25]).unwrap();
        for (a, b) in [(0, 2), (1, 1), (0, 1), (2, 2)] {
            let (rho, prod) = rk_fixed_time_check(&g, r[a], r[b], &l).unwrap();
            assert!((rho - prod).abs() < 1e-10 * rho, "a={a} b={b}");
        }
    }

    #[test]
    fn rejects_non_walk() {
        let g = Generator::srw_path(0, 2);
        let l = SimplexPoint::new(&[0, 1], &[0.5, 0.5]).unwrap();
        // state 0 is the window edge with a single neighbour
        assert_eq!(rk_fixed_time_check(&g, 0, 1, &l).unwrap_err(), Error::NotSrw);
    }
}
