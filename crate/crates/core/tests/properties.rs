//! Property and statistical checks on the public API.

use localtime::bounds::{chi_objective, rescaled_chi_discrete, LatticeBox, LinearFunctional, ZeroFunctional};
use localtime::chain::Simulator;
use localtime::harness::{binomial_z, chi_square_merged, parallel_chunks, z_score, Moments, CHUNK};
use localtime::{
    bessel_i0, bessel_i1, density, density_quadrature, sample_rk_profile, simulate_inverse_local_time, Generator,
    SimplexPoint,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn generator_from(off: &[Vec<f64>]) -> Generator {
    let labels = (0..off.len()).map(|i| format!("s{i}")).collect();
    Generator::from_off_diagonal(labels, off).unwrap()
}

fn rates(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), 0.05..2.0f64], n), n).prop_map(|mut m| {
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        m
    })
}

fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(0.05..1.0f64, k), 0.2..3.0f64).prop_map(|(w, t)| {
        let s: f64 = w.iter().sum();
        w.iter().map(|v| t * v / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn local_times_partition_the_horizon(off in rates(4), t in 0.01..20.0f64, seed in any::<u64>(), start in 0..4usize) {
        let g = generator_from(&off);
        let sim = Simulator::new(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = sim.fixed_time(start, t, &mut rng).unwrap();
        let total: f64 = p.local_times.iter().sum();
        prop_assert!((total - t).abs() <= 1e-12 * t);
        prop_assert!(p.range.contains(&start) && p.range.contains(&p.endpoint));
    }

    // Rates out of states outside the range, and the split of the escape
    // rate between outside targets, do not enter the density.
    #[test]
    fn density_depends_only_on_range_block(
        off in rates(5),
        l in simplex(3),
        a in 0..3usize,
        b in 0..3usize,
        outside in prop::collection::vec(0.0..3.0f64, 8),
        split in 0.0..1.0f64,
    ) {
        let g = generator_from(&off);
        let range = [0usize, 1, 2];
        let point = SimplexPoint::new(&range, &l).unwrap();
        let base = density(&g, a, b, &point, 1e-14).unwrap();

        let mut changed = off.clone();
        let mut it = outside.iter();
        for x in 3..5 {
            for y in 0..5 {
                if x != y {
                    changed[x][y] = *it.next().unwrap();
                }
            }
        }
        // move escape mass between the two outside targets of state 0
        let escape = changed[0][3] + changed[0][4];
        changed[0][3] = split * escape;
        changed[0][4] = escape - changed[0][3];
        let other = density(&generator_from(&changed), a, b, &point, 1e-14).unwrap();
        prop_assert!((base - other).abs() <= 1e-12 * (1.0 + base.abs()));
    }
}

#[test]
fn density_is_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let k = rng.random_range(1..=3usize);
        let n = k + rng.random_range(1..=2usize);
        let off: Vec<Vec<f64>> = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| if x == y || rng.random::<f64>() < 0.3 { 0.0 } else { rng.random_range(0.05..1.5) })
                    .collect()
            })
            .collect();
        let g = generator_from(&off);
        let range: Vec<usize> = (0..k).collect();
        let t = rng.random_range(0.1..3.0);
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.02..1.0)).collect();
        let s: f64 = w.iter().sum();
        let l: Vec<f64> = w.iter().map(|v| t * v / s).collect();
        let point = SimplexPoint::new(&range, &l).unwrap();
        let (a, b) = (rng.random_range(0..k), rng.random_range(0..k));
        worst = worst.min(density(&g, a, b, &point, 1e-13).unwrap());
    }
    assert!(worst >= -1e-13, "most negative density {worst}");
}

#[test]
fn two_state_jump_count_is_poisson() {
    let g = Generator::two_state(1.0);
    let t = 2.0;
    let samples = 100_000u64;
    let max = 12usize;
    let chunks = parallel_chunks(5, samples, CHUNK, |rng, n| {
        let sim = Simulator::new(&g);
        let mut counts = vec![0u64; max + 1];
        for _ in 0..n {
            let jumps = sim.fixed_time(0, t, rng)?.jumps as usize;
            counts[jumps.min(max)] += 1;
        }
        Ok(counts)
    })
    .unwrap();
    let mut observed = vec![0u64; max + 1];
    for c in &chunks {
        for (o, v) in observed.iter_mut().zip(c) {
            *o += v;
        }
    }
    // Poisson(t) cell probabilities, last cell the upper tail
    let mut probs = Vec::with_capacity(max + 1);
    let mut p = (-t).exp();
    for k in 0..max {
        probs.push(p);
        p *= t / (k + 1) as f64;
    }
    probs.push(1.0 - probs.iter().sum::<f64>());
    let expected: Vec<f64> = probs.iter().map(|p| p * samples as f64).collect();
    let result = chi_square_merged(&observed, &expected, 5.0);
    assert!(result.p_value > 1e-3, "{result:?}");
}

#[test]
fn two_state_mean_local_time_and_no_jump_probability() {
    let g = Generator::two_state(1.0);
    let t = 1.5;
    let samples = 1_000_000u64;
    let parts = parallel_chunks(6, samples, CHUNK, |rng, n| {
        let sim = Simulator::new(&g);
        let mut m = Moments::default();
        let mut stayed = 0u64;
        for _ in 0..n {
            let p = sim.fixed_time(0, t, rng)?;
            m.push(p.local_times[0]);
            stayed += (p.range.len() == 1) as u64;
        }
        Ok((m, stayed))
    })
    .unwrap();
    let mut m = Moments::default();
    let mut stayed = 0;
    for (part, s) in &parts {
        m.merge(part);
        stayed += s;
    }
    let exact = t / 2.0 + (1.0 - (-2.0 * t).exp()) / 4.0;
    assert!(z_score(m.mean(), m.mean_se(), exact, 0.0).abs() < 4.0, "mean {} vs {exact}", m.mean());
    assert!(binomial_z(stayed, samples, (-t).exp()).abs() < 4.0);
}

// Killing weights on the restricted chain reproduce the probability that
// the full chain stays inside the subset.
#[test]
fn restriction_reweighting_matches_sub_block_exponential() {
    let off =
        vec![vec![0.0, 1.0, 0.5, 0.0], vec![0.7, 0.0, 1.2, 0.4], vec![0.3, 0.9, 0.0, 1.1], vec![0.2, 0.0, 0.6, 0.0]];
    let g = generator_from(&off);
    let subset = [0usize, 1, 2];
    let (start, end, t) = (0usize, 2usize, 1.3);
    let restricted = g.restrict(&subset).unwrap();
    let inner = restricted.to_generator(&g).unwrap();

    let block = DMatrix::from_fn(3, 3, |i, j| g.rate(subset[i], subset[j]));
    let exact = (block * t).exp()[(start, end)];

    let samples = 400_000u64;
    let parts = parallel_chunks(7, samples, CHUNK, |rng, n| {
        let sim = Simulator::new(&inner);
        let mut m = Moments::default();
        for _ in 0..n {
            let p = sim.fixed_time(start, t, rng)?;
            let weight = if p.endpoint == end {
                (-p.local_times.iter().zip(&restricted.killing).map(|(l, v)| l * v).sum::<f64>()).exp()
            } else {
                0.0
            };
            m.push(weight);
        }
        Ok(m)
    })
    .unwrap();
    let mut m = Moments::default();
    parts.iter().for_each(|p| m.merge(p));
    let z = z_score(m.mean(), m.mean_se(), exact, 0.0);
    assert!(z.abs() < 4.0, "reweighted {} vs exact {exact}, z = {z}", m.mean());
}

#[test]
fn inverse_local_time_from_pivot_and_atom_beyond() {
    let g = Generator::srw_path(-30, 30);
    let zero = g.index_of("0").unwrap();
    let two = g.index_of("2").unwrap();
    let three = g.index_of("3").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let r = simulate_inverse_local_time(&g, two, two, 1.0, &mut rng).unwrap();
    assert_eq!(r.path.local_times[two], 1.0);

    let samples = 20_000u64;
    let mut hits = 0;
    for _ in 0..samples {
        let r = simulate_inverse_local_time(&g, zero, two, 1.0, &mut rng).unwrap();
        hits += (r.path.local_times[three] == 0.0) as u64;
    }
    assert!(binomial_z(hits, samples, (-1.0f64).exp()).abs() < 4.0);
}

#[test]
fn profile_atoms_and_absorption() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for &(h, samples) in &[(1.0, 100_000u64), (5.0, 100_000)] {
        let mut hits = 0;
        for _ in 0..samples {
            let p = sample_rk_profile(2, h, 6, &mut rng).unwrap();
            assert_eq!(p[&2], h);
            hits += (p[&3] == 0.0) as u64;
            // zero is absorbing going outward on both sides
            let right: Vec<f64> = (3..=8).map(|x| p[&x]).collect();
            let left: Vec<f64> = (-6..=0).rev().map(|x| p[&x]).collect();
            for side in [right, left] {
                if let Some(first) = side.iter().position(|&v| v == 0.0) {
                    assert!(side[first..].iter().all(|&v| v == 0.0));
                }
            }
        }
        let z = binomial_z(hits, samples, (-h).exp());
        assert!(z.abs() < 4.0, "h = {h}: {hits} zeros, z = {z}");
    }
}

/// Exhaustive minimum over the probability simplex on three sites of
/// `alpha^2 / 2 * dirichlet(mu) - alpha * v * mu_1` (delta potential at the
/// middle site, d = 1).
fn three_site_oracle(alpha: f64, v: f64) -> f64 {
    let objective = |m0: f64, m1: f64| {
        let m2 = (1.0 - m0 - m1).max(0.0);
        let d = (m0.sqrt() - m1.sqrt()).powi(2) + (m1.sqrt() - m2.sqrt()).powi(2);
        0.5 * alpha * alpha * d - v * alpha * m1
    };
    let (mut c0, mut c1, mut h) = (1.0 / 3.0, 1.0 / 3.0, 0.5);
    for _ in 0..60 {
        let mut best = (f64::INFINITY, c0, c1);
        for i in -40..=40 {
            for j in -40..=40 {
                let m0 = (c0 + h * i as f64 / 40.0).clamp(0.0, 1.0);
                let m1 = (c1 + h * j as f64 / 40.0).clamp(0.0, 1.0 - m0);
                let val = objective(m0, m1);
                if val < best.0 {
                    best = (val, m0, m1);
                }
            }
        }
        (c0, c1) = (best.1, best.2);
        h *= 0.5;
    }
    objective(c0, c1)
}

#[test]
fn chi_delta_potential_matches_grid_oracle() {
    let lattice = LatticeBox { radius: 1, dim: 1 };
    for &(alpha, v) in &[(1.0, 1.0), (2.0, 0.7), (0.5, 3.0)] {
        let mut potential = vec![0.0; 3];
        potential[lattice.origin()] = v;
        let sol = rescaled_chi_discrete(lattice, alpha, &LinearFunctional { potential }, 1e-9).unwrap();
        let oracle = three_site_oracle(alpha, v);
        assert!((sol.value - oracle).abs() < 1e-6, "alpha {alpha}, v {v}: {} vs {oracle}", sol.value);
    }
}

// Closed forms the acceptance criteria lean on.
#[test]
fn anchors() {
    let g = Generator::two_state(1.0);
    let l = SimplexPoint::new(&[0, 1], &[0.5, 0.5]).unwrap();
    assert!((density(&g, 0, 1, &l, 1e-15).unwrap() - (-1.0f64).exp() * bessel_i0(1.0)).abs() < 1e-15);
    assert!((density_quadrature(&g, 0, 0, &l, 32).unwrap() - (-1.0f64).exp() * bessel_i1(1.0)).abs() < 1e-14);
    let lattice = LatticeBox { radius: 1, dim: 1 };
    assert!(chi_objective(&lattice, 1.0, &ZeroFunctional, &[1.0 / 3.0; 3]).abs() < 1e-15);
}
