use serde::Serialize;

use super::stats::proportion_upper;
use super::{parallel_chunks, CHUNK};
use crate::bounds::{halfspace_inf_rate, ldp_probability_bound, ldp_varadhan_bound, linear_sup, log_restricted_mgf};
use crate::chain::{Generator, Simulator};
use crate::error::{Error, Result};

/// Half-space event `{sum_x c_x l_T(x) / T >= threshold, range in S}`.
#[derive(Debug, Clone)]
pub struct LdpMcConfig {
    pub generator: Generator,
    /// `S`, generator indices.
    pub subset: Vec<usize>,
    pub start: usize,
    /// `c`, aligned with `subset`.
    pub coefficients: Vec<f64>,
    pub threshold: f64,
    pub horizon: f64,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpMcReport {
    pub samples: u64,
    pub hits: u64,
    pub estimate: f64,
    /// One-sided 99% upper confidence limit of the probability.
    pub upper_99: f64,
    pub log_upper_99: f64,
    pub inf_rate: f64,
    pub bound: f64,
    pub dominated: bool,
}

/// Monte Carlo estimate of the half-space probability against the
/// large-deviation upper bound.
pub fn verify_ldp_mc(config: &LdpMcConfig) -> Result<LdpMcReport> {
    let g = &config.generator;
    let mut subset = config.subset.clone();
    if subset.len() != config.coefficients.len() {
        return Err(Error::Shape("coefficients must match the subset".into()));
    }
    let mut order: Vec<usize> = (0..subset.len()).collect();
    order.sort_by_key(|&i| subset[i]);
    let coefficients: Vec<f64> = order.iter().map(|&i| config.coefficients[i]).collect();
    subset.sort_unstable();
    if !subset.contains(&config.start) {
        return Err(Error::Domain("start must lie in the subset".into()));
    }
    let t = config.horizon;
    let inf_rate = halfspace_inf_rate(g, &subset, &coefficients, config.threshold)?;
    let bound = ldp_probability_bound(g, &subset, inf_rate.min(f64::MAX), t)?;

    let sim = Simulator::new(g);
    let chunks = parallel_chunks(config.seed, config.samples, CHUNK, |rng, count| {
        let mut hits = 0u64;
        for _ in 0..count {
            let p = sim.fixed_time(config.start, t, rng)?;
            if p.range_within(&subset) {
                let s: f64 = subset.iter().zip(&coefficients).map(|(&x, c)| c * p.local_times[x]).sum();
                if s / t >= config.threshold {
                    hits += 1;
                }
            }
        }
        Ok(hits)
    })?;
    let hits: u64 = chunks.iter().sum();
    let n = config.samples;
    let upper = proportion_upper(hits, n, 0.99);
    Ok(LdpMcReport {
        samples: n,
        hits,
        estimate: hits as f64 / n as f64,
        upper_99: upper,
        log_upper_99: upper.ln(),
        inf_rate,
        bound,
        dominated: upper.ln() <= bound,
    })
}

/// Exact exponential moment for a linear functional against its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VaradhanCheck {
    pub horizon: f64,
    pub exact_log: f64,
    pub sup_value: f64,
    pub bound: f64,
    pub dominated: bool,
}

/// `log E_start[exp(T <V, l_T / T>); range in S]` by matrix exponential,
/// against the Varadhan-type bound with `sup = lambda_max(A_SS + V)`.
pub fn varadhan_check(
    g: &Generator,
    subset: &[usize],
    potential: &[f64],
    start: usize,
    horizon: f64,
) -> Result<VaradhanCheck> {
    let pos =
        subset.iter().position(|&x| x == start).ok_or_else(|| Error::Domain("start must lie in the subset".into()))?;
    let exact_log = log_restricted_mgf(g, subset, potential, pos, horizon)?;
    let sup_value = linear_sup(g, subset, potential)?;
    let bound = ldp_varadhan_bound(g, subset, sup_value, horizon)?;
    Ok(VaradhanCheck { horizon, exact_log, sup_value, bound, dominated: exact_log <= bound })
}
