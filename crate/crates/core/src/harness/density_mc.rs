use serde::Serialize;

use super::histogram::{cell_mass, cell_of, to_stick};
use super::stats::{binomial_z, chi_square_merged, ChiSquareResult};
use super::{parallel_chunks, CHUNK};
use crate::chain::{Generator, Simulator};
use crate::density::{density, SimplexPoint};
use crate::error::{Error, Result};

/// Fewest conditioned samples accepted by [`verify_density_mc`].
pub const MIN_CONDITIONED: u64 = 1000;

/// Inputs of a density Monte Carlo check.
#[derive(Debug, Clone)]
pub struct DensityMcConfig {
    pub generator: Generator,
    /// Range to condition on, generator indices.
    pub range: Vec<usize>,
    pub start: usize,
    pub end: usize,
    pub horizon: f64,
    pub samples: u64,
    /// Cells per stick-breaking axis.
    pub bins: usize,
    pub seed: u64,
    /// Absolute truncation tolerance for density evaluations.
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub index: usize,
    pub observed: u64,
    /// Conditional expected count.
    pub expected: f64,
    /// Unconditional probability mass of the cell.
    pub mass: f64,
    pub flagged: bool,
}

/// Observed frequency of an event against its exact probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityCheck {
    pub name: String,
    pub exact: f64,
    pub frequency: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMcReport {
    pub samples: u64,
    pub conditioned: u64,
    /// Eliminated coordinate (a generator index): the last state of the range.
    pub eliminated: usize,
    /// Sum of the cell masses, the probability of the conditioning event.
    pub event_probability: f64,
    pub event_frequency: f64,
    pub event_z: f64,
    pub chi_square: ChiSquareResult,
    pub excluded_cells: usize,
    pub flagged_cells: usize,
    pub cells: Vec<CellReport>,
    /// Exact event probabilities for the two-state unit-rate chain.
    pub two_state: Vec<ProbabilityCheck>,
}

#[derive(Default)]
struct Tally {
    counts: Vec<u64>,
    conditioned: u64,
    stayed: u64,
    // full range, endpoint = start / endpoint != start
    full_home: u64,
    full_away: u64,
}

fn is_unit_two_state(g: &Generator) -> bool {
    g.len() == 2 && g.rate(0, 1) == 1.0 && g.rate(1, 0) == 1.0
}

/// Simulate, condition on `{range = R, endpoint = end}`, bin the local
/// times on the simplex and compare with the integrated density.
pub fn verify_density_mc(config: &DensityMcConfig) -> Result<DensityMcReport> {
    let g = &config.generator;
    let mut range = config.range.clone();
    range.sort_unstable();
    range.dedup();
    if range.is_empty() {
        return Err(Error::EmptySubset);
    }
    if !range.contains(&config.start) || !range.contains(&config.end) {
        return Err(Error::Domain("start and end must lie in the range".into()));
    }
    if config.bins == 0 {
        return Err(Error::Domain("need at least one bin".into()));
    }
    let k = range.len();
    let dim = k - 1;
    let ncells = config.bins.pow(dim as u32);
    let t = config.horizon;

    let rho = |l: &[f64]| -> Result<f64> {
        match SimplexPoint::new(&range, l) {
            Ok(p) => density(g, config.start, config.end, &p, config.tol),
            // a quadrature node on the boundary carries no mass
            Err(Error::Domain(_)) => Ok(0.0),
            Err(e) => Err(e),
        }
    };
    let masses = (0..ncells).map(|c| cell_mass(&rho, c, config.bins, dim, t)).collect::<Result<Vec<_>>>()?;
    let event_probability: f64 = masses.iter().map(|m| m.value).sum();

    let sim = Simulator::new(g);
    let chunks = parallel_chunks(config.seed, config.samples, CHUNK, |rng, count| {
        let mut tally = Tally { counts: vec![0; ncells], ..Tally::default() };
        for _ in 0..count {
            let path = sim.fixed_time(config.start, t, rng)?;
            if path.range.len() == 1 {
                tally.stayed += 1;
            }
            if path.range == range {
                if path.endpoint == config.start {
                    tally.full_home += 1;
                } else {
                    tally.full_away += 1;
                }
                if path.endpoint == config.end {
                    tally.conditioned += 1;
                    let l: Vec<f64> = range.iter().map(|&x| path.local_times[x]).collect();
                    let cell = if dim == 0 { 0 } else { cell_of(&to_stick(&l, t), config.bins) };
                    tally.counts[cell] += 1;
                }
            }
        }
        Ok(tally)
    })?;
    let mut total = Tally { counts: vec![0; ncells], ..Tally::default() };
    for c in &chunks {
        total.conditioned += c.conditioned;
        total.stayed += c.stayed;
        total.full_home += c.full_home;
        total.full_away += c.full_away;
        for (a, b) in total.counts.iter_mut().zip(&c.counts) {
            *a += b;
        }
    }
    if total.conditioned < MIN_CONDITIONED {
        return Err(Error::InsufficientConditioned { got: total.conditioned, need: MIN_CONDITIONED });
    }

    let n = config.samples;
    let mut cells = Vec::with_capacity(ncells);
    let (mut observed, mut expected) = (Vec::new(), Vec::new());
    let mut excluded = 0;
    for (index, m) in masses.iter().enumerate() {
        let e = total.conditioned as f64 * m.value / event_probability;
        if m.value <= 0.0 {
            excluded += 1;
        } else {
            observed.push(total.counts[index]);
            expected.push(e);
        }
        cells.push(CellReport { index, observed: total.counts[index], expected: e, mass: m.value, flagged: m.flagged });
    }
    let chi_square = chi_square_merged(&observed, &expected, 5.0);

    let mut two_state = Vec::new();
    if is_unit_two_state(g) && k == 2 {
        let checks = [
            ("stay", (-t).exp(), total.stayed),
            ("both_end_away", (-t).exp() * t.sinh(), total.full_away),
            ("both_end_home", (-t).exp() * (t.cosh() - 1.0), total.full_home),
        ];
        for (name, exact, hits) in checks {
            two_state.push(ProbabilityCheck {
                name: name.into(),
                exact,
                frequency: hits as f64 / n as f64,
                z: binomial_z(hits, n, exact),
            });
        }
    }

    Ok(DensityMcReport {
        samples: n,
        conditioned: total.conditioned,
        eliminated: range[k - 1],
        event_probability,
        event_frequency: total.conditioned as f64 / n as f64,
        event_z: binomial_z(total.conditioned, n, event_probability),
        chi_square,
        excluded_cells: excluded,
        flagged_cells: masses.iter().filter(|m| m.flagged).count(),
        cells,
        two_state,
    })
}
