use rand::Rng;
use rand_distr::Exp1;

use super::generator::Generator;
use crate::error::{Error, Result};

/// Outcome of one simulated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSummary {
    /// Time spent in each state, indexed like the generator's labels.
    pub local_times: Vec<f64>,
    pub endpoint: usize,
    /// Sorted indices of visited states (start included).
    pub range: Vec<usize>,
    /// Horizon `T` for fixed-time runs, the stopping time otherwise.
    pub horizon: f64,
    pub jumps: u64,
}

impl PathSummary {
    /// True when every visited state lies in `subset` (sorted).
    pub fn range_within(&self, subset: &[usize]) -> bool {
        self.range.iter().all(|x| subset.binary_search(x).is_ok())
    }
}

/// A path stopped at the first time the local time at `pivot` reaches `level`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseLocalTimeResult {
    pub path: PathSummary,
    pub level: f64,
    pub pivot: usize,
}

/// Hard caps for runs whose length is random.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub max_jumps: u64,
    pub max_time: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_jumps: 10_000_000, max_time: 1e9 }
    }
}

/// Event-driven sampler with precomputed jump tables.
#[derive(Debug, Clone)]
pub struct Simulator<'g> {
    generator: &'g Generator,
    exit: Vec<f64>,
    // (target, cumulative probability) per state
    targets: Vec<Vec<(usize, f64)>>,
}

impl<'g> Simulator<'g> {
    pub fn new(generator: &'g Generator) -> Self {
        let n = generator.len();
        let mut exit = Vec::with_capacity(n);
        let mut targets = Vec::with_capacity(n);
        for x in 0..n {
            let total: f64 = (0..n).map(|y| generator.off_diagonal(x, y)).sum();
            exit.push(total);
            let mut acc = 0.0;
            let mut row = Vec::new();
            for y in 0..n {
                let r = generator.off_diagonal(x, y);
                if r > 0.0 {
                    acc += r / total;
                    row.push((y, acc));
                }
            }
            if let Some(last) = row.last_mut() {
                last.1 = 1.0;
            }
            targets.push(row);
        }
        Self { generator, exit, targets }
    }

    pub fn generator(&self) -> &Generator {
        self.generator
    }

    #[inline]
    fn holding<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> f64 {
        if self.exit[x] > 0.0 {
            let e: f64 = rng.sample(Exp1);
            e / self.exit[x]
        } else {
            f64::INFINITY
        }
    }

    #[inline]
    fn next_state<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let row = &self.targets[x];
        row.iter().find(|&&(_, c)| u < c).map_or(row[row.len() - 1].0, |&(y, _)| y)
    }

    /// Run from `start` until time `horizon`.
    pub fn fixed_time<R: Rng + ?Sized>(&self, start: usize, horizon: f64, rng: &mut R) -> Result<PathSummary> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        self.check_state(start)?;
        let n = self.generator.len();
        let mut local = vec![0.0; n];
        let mut visited = vec![false; n];
        visited[start] = true;
        let (mut x, mut t, mut jumps) = (start, 0.0, 0u64);
        loop {
            let tau = self.holding(x, rng);
            if t + tau >= horizon {
                local[x] += horizon - t;
                break;
            }
            local[x] += tau;
            t += tau;
            x = self.next_state(x, rng);
            visited[x] = true;
            jumps += 1;
        }
        Ok(summary(local, visited, x, horizon, jumps))
    }

    /// Run from `start` until the local time at `pivot` reaches `level`;
    /// the sojourn at `pivot` in progress is clipped at exactly `level`.
    pub fn inverse_local_time<R: Rng + ?Sized>(
        &self,
        start: usize,
        pivot: usize,
        level: f64,
        budget: Budget,
        rng: &mut R,
    ) -> Result<InverseLocalTimeResult> {
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::Domain(format!("level must be positive, got {level}")));
        }
        self.check_state(start)?;
        self.check_state(pivot)?;
        let n = self.generator.len();
        let mut local = vec![0.0; n];
        let mut visited = vec![false; n];
        visited[start] = true;
        let (mut x, mut t, mut jumps) = (start, 0.0, 0u64);
        loop {
            let tau = self.holding(x, rng);
            if x == pivot && local[x] + tau >= level {
                t += level - local[x];
                local[x] = level;
                break;
            }
            if !tau.is_finite() || jumps >= budget.max_jumps || t + tau > budget.max_time {
                return Err(Error::BudgetExceeded { jumps, elapsed: t });
            }
            local[x] += tau;
            t += tau;
            x = self.next_state(x, rng);
            visited[x] = true;
            jumps += 1;
        }
        let path = summary(local, visited, x, t, jumps);
        Ok(InverseLocalTimeResult { path, level, pivot })
    }

    fn check_state(&self, x: usize) -> Result<()> {
        if x < self.generator.len() {
            Ok(())
        } else {
            Err(Error::UnknownLabel(format!("#{x}")))
        }
    }
}

fn summary(local: Vec<f64>, visited: Vec<bool>, endpoint: usize, horizon: f64, jumps: u64) -> PathSummary {
    let range = visited.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i).collect();
    PathSummary { local_times: local, endpoint, range, horizon, jumps }
}

/// One-shot fixed-time simulation.
pub fn simulate_fixed_time<R: Rng + ?Sized>(
    g: &Generator,
    start: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<PathSummary> {
    Simulator::new(g).fixed_time(start, horizon, rng)
}

/// One-shot inverse-local-time simulation with the default budget.
pub fn simulate_inverse_local_time<R: Rng + ?Sized>(
    g: &Generator,
    start: usize,
    pivot: usize,
    level: f64,
    rng: &mut R,
) -> Result<InverseLocalTimeResult> {
    Simulator::new(g).inverse_local_time(start, pivot, level, Budget::default(), rng)
}
