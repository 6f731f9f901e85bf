use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const RESTARTS: usize = 8;
const MAX_ITER: usize = 50_000;
const RESTART_SEED: u64 = 0x5eed_c41d;

/// A functional on nonnegative grid functions over a box.
pub trait DiscreteFunctional {
    fn value(&self, f: &[f64]) -> f64;

    /// Gradient; central differences unless overridden.
    fn gradient(&self, f: &[f64], out: &mut [f64]) {
        let mut probe = f.to_vec();
        for i in 0..f.len() {
            let h = 1e-6 * (1.0 + f[i].abs());
            probe[i] = f[i] + h;
            let up = self.value(&probe);
            probe[i] = f[i] - h;
            let down = self.value(&probe);
            probe[i] = f[i];
            out[i] = (up - down) / (2.0 * h);
        }
    }
}

/// `F = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFunctional;

impl DiscreteFunctional for ZeroFunctional {
    fn value(&self, _: &[f64]) -> f64 {
        0.0
    }

    fn gradient(&self, _: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// `F(f) = <V, f>`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFunctional {
    pub potential: Vec<f64>,
}

impl DiscreteFunctional for LinearFunctional {
    fn value(&self, f: &[f64]) -> f64 {
        self.potential.iter().zip(f).map(|(v, x)| v * x).sum()
    }

    fn gradient(&self, _: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.potential);
    }
}

/// Box `{-r, ..., r}^d` of the integer lattice, sites in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeBox {
    pub radius: usize,
    pub dim: usize,
}

impl LatticeBox {
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn sites(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    /// Index of the origin.
    pub fn origin(&self) -> usize {
        (0..self.dim).fold(0, |acc, _| acc * self.side() + self.radius)
    }

    /// Nearest-neighbour pairs `(i, j)`, `i < j`, both inside the box.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let side = self.side();
        let mut out = Vec::new();
        for i in 0..self.sites() {
            let mut stride = 1;
            for _ in 0..self.dim {
                let coord = (i / stride) % side;
                if coord + 1 < side {
                    out.push((i, i + stride));
                }
                stride *= side;
            }
        }
        out
    }
}

/// Minimiser of the rescaled discrete problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSolution {
    pub value: f64,
    pub measure: Vec<f64>,
    pub gradient_norm: f64,
}

/// `alpha^2 / 2 * sum_{x~y} (sqrt mu_x - sqrt mu_y)^2 - F(alpha^d mu)` at `mu`.
pub fn chi_objective<F: DiscreteFunctional + ?Sized>(lattice: &LatticeBox, alpha: f64, f: &F, mu: &[f64]) -> f64 {
    let dirichlet: f64 = lattice.edges().iter().map(|&(i, j)| (mu[i].sqrt() - mu[j].sqrt()).powi(2)).sum();
    let scale = alpha.powi(lattice.dim as i32);
    let scaled: Vec<f64> = mu.iter().map(|m| scale * m).collect();
    0.5 * alpha * alpha * dirichlet - f.value(&scaled)
}

/// Infimum over probability measures on the box of [`chi_objective`].
///
/// Free-boundary Dirichlet form (only edges inside the box). The measure is
/// a softmax of free variables; gradient descent with Barzilai-Borwein steps
/// and Armijo backtracking, eight restarts, best value kept.
pub fn rescaled_chi_discrete<F: DiscreteFunctional + ?Sized>(
    lattice: LatticeBox,
    alpha: f64,
    f: &F,
    tol: f64,
) -> Result<ChiSolution> {
    let n = lattice.sites();
    let edges = lattice.edges();
    let scale = alpha.powi(lattice.dim as i32);
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    let mut best: Option<ChiSolution> = None;
    let mut worst_norm = 0.0f64;

    let objective = |z: &[f64], grad: &mut [f64]| -> (f64, Vec<f64>) {
        let mu = softmax(z);
        let root: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
        let mut dirichlet = 0.0;
        // d/dmu_x of the Dirichlet part
        let mut g = vec![0.0; n];
        for &(i, j) in &edges {
            dirichlet += (root[i] - root[j]).powi(2);
            if root[i] > 0.0 {
                g[i] += 1.0 - root[j] / root[i];
            }
            if root[j] > 0.0 {
                g[j] += 1.0 - root[i] / root[j];
            }
        }
        let scaled: Vec<f64> = mu.iter().map(|m| scale * m).collect();
        let mut fg = vec![0.0; n];
        f.gradient(&scaled, &mut fg);
        for x in 0..n {
            g[x] = 0.5 * alpha * alpha * g[x] - scale * fg[x];
        }
        let mean: f64 = mu.iter().zip(&g).map(|(m, v)| m * v).sum();
        for x in 0..n {
            grad[x] = mu[x] * (g[x] - mean);
        }
        (0.5 * alpha * alpha * dirichlet - f.value(&scaled), mu)
    };

    for restart in 0..RESTARTS {
        let mut z: Vec<f64> =
            if restart == 0 { vec![0.0; n] } else { (0..n).map(|_| rng.sample(StandardNormal)).collect() };
        let mut grad = vec![0.0; n];
        let (mut value, mut mu) = objective(&z, &mut grad);
        let mut step = 1.0;
        let mut norm = inf_norm(&grad);
        let mut iter = 0;
        while norm > tol && iter < MAX_ITER {
            iter += 1;
            let mut t = step;
            let mut trial_grad = vec![0.0; n];
            let sq: f64 = grad.iter().map(|v| v * v).sum();
            let (trial_z, trial_value, trial_mu) = loop {
                let cand: Vec<f64> = z.iter().zip(&grad).map(|(a, b)| a - t * b).collect();
                let (v, m) = objective(&cand, &mut trial_grad);
                if v <= value - 1e-4 * t * sq || t < 1e-14 {
                    break (cand, v, m);
                }
                t *= 0.5;
            };
            // Barzilai-Borwein step for the next iteration
            let s: Vec<f64> = trial_z.iter().zip(&z).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
            let ss: f64 = s.iter().map(|a| a * a).sum();
            step = if sy > 0.0 { (ss / sy).clamp(1e-8, 1e8) } else { (2.0 * t).min(1e8) };
            z = trial_z;
            value = trial_value;
            mu = trial_mu;
            grad = trial_grad;
            norm = inf_norm(&grad);
            if t < 1e-14 {
                break;
            }
        }
        worst_norm = worst_norm.max(norm);
        if norm <= tol && best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(ChiSolution { value, measure: mu, gradient_norm: norm });
        }
    }
    best.ok_or(Error::NotConverged { iterations: MAX_ITER, gradient_norm: worst_norm })
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}
