use serde::Serialize;

use super::stats::{binomial_z, z_score, Moments};
use super::{parallel_chunks, CHUNK};
use crate::chain::{Budget, Generator, Simulator};
use crate::error::{Error, Result};
use crate::rayknight::sample_rk_profile;

/// Inputs of the Ray-Knight comparison for walk started at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RayKnightMcConfig {
    pub pivot: i64,
    pub level: f64,
    pub samples: u64,
    pub seed: u64,
    pub budget: Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiteComparison {
    pub site: i64,
    pub direct_mean: f64,
    pub direct_mean_se: f64,
    pub profile_mean: f64,
    pub profile_mean_se: f64,
    pub mean_z: f64,
    pub direct_variance: f64,
    pub direct_variance_se: f64,
    pub profile_variance: f64,
    pub profile_variance_se: f64,
    pub variance_z: f64,
    pub direct_zero_frequency: f64,
    pub profile_zero_frequency: f64,
    pub zero_z: f64,
}

/// Frequency of a zero local time against its exact probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomCheck {
    pub site: i64,
    pub exact: f64,
    pub direct_hits: u64,
    pub direct_z: f64,
    pub profile_hits: u64,
    pub profile_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayKnightReport {
    pub samples: u64,
    pub sites: Vec<SiteComparison>,
    /// Largest mean or variance z-score over the sites.
    pub max_moment_z: f64,
    pub atoms: Vec<AtomCheck>,
    /// Correlation, in direct simulation, of the step below the pivot
    /// (minus its conditional mean) with the value right of the pivot.
    pub independence_correlation: f64,
    pub independence_z: f64,
}

/// `P(l(-1) = 0) = E[exp(-l(0))]`, from the Laplace transform of the inner
/// step, `E[exp(-s X') | X = x] = exp(-x s / (1 + s)) / (1 + s)`.
pub fn left_atom_probability(pivot: i64, level: f64) -> f64 {
    let mut s = 1.0;
    let mut factor = 1.0;
    for _ in 0..pivot {
        factor /= 1.0 + s;
        s /= 1.0 + s;
    }
    factor * (-level * s).exp()
}

#[derive(Clone, Default)]
struct Acc {
    moments: Vec<Moments>,
    zeros: Vec<u64>,
    // sums for the correlation of (x, y)
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl Acc {
    fn new(sites: usize) -> Self {
        Self { moments: vec![Moments::default(); sites], zeros: vec![0; sites], ..Self::default() }
    }

    fn merge(&mut self, o: &Acc) {
        for (a, b) in self.moments.iter_mut().zip(&o.moments) {
            a.merge(b);
        }
        for (a, b) in self.zeros.iter_mut().zip(&o.zeros) {
            *a += b;
        }
        self.sx += o.sx;
        self.sy += o.sy;
        self.sxx += o.sxx;
        self.syy += o.syy;
        self.sxy += o.sxy;
    }
}

/// Compare inverse-local-time simulation of walk on the integers with the
/// spatial-chain sampler on sites `-1 ..= pivot + 1`.
///
/// The walk is simulated on the window `-1 ..= pivot + 1` with reflecting
/// ends. That chain is the walk on the integers with the time spent outside
/// the window deleted, so local times inside the window have exactly the
/// law of the unrestricted walk.
pub fn verify_rayknight_mc(config: &RayKnightMcConfig) -> Result<RayKnightReport> {
    let b = config.pivot;
    let h = config.level;
    if b < 1 {
        return Err(Error::Domain(format!("pivot must be at least 1, got {b}")));
    }
    let (lo, hi) = (-1, b + 1);
    let nsites = (hi - lo + 1) as usize;
    let g = Generator::srw_path(lo, hi);
    let sim = Simulator::new(&g);
    let index = |site: i64| (site - lo) as usize;

    let record = |acc: &mut Acc, value: &dyn Fn(i64) -> f64| {
        for site in lo..=hi {
            let v = value(site);
            acc.moments[index(site)].push(v);
            if v == 0.0 {
                acc.zeros[index(site)] += 1;
            }
        }
        let x = value(b - 1) - (h + 1.0);
        let y = value(b + 1);
        acc.sx += x;
        acc.sy += y;
        acc.sxx += x * x;
        acc.syy += y * y;
        acc.sxy += x * y;
    };

    let direct_chunks = parallel_chunks(config.seed, config.samples, CHUNK, |rng, count| {
        let mut acc = Acc::new(nsites);
        for _ in 0..count {
            let r = sim.inverse_local_time(index(0), index(b), h, config.budget, rng)?;
            record(&mut acc, &|site| r.path.local_times[index(site)]);
        }
        Ok(acc)
    })?;
    // A distinct seed family for the sampler side.
    let profile_chunks = parallel_chunks(config.seed ^ 0x9e37_79b9_7f4a_7c15, config.samples, CHUNK, |rng, count| {
        let mut acc = Acc::new(nsites);
        for _ in 0..count {
            let p = sample_rk_profile(b, h, 1, rng)?;
            record(&mut acc, &|site| p[&site]);
        }
        Ok(acc)
    })?;
    let fold = |chunks: &[Acc]| {
        let mut total = Acc::new(nsites);
        for c in chunks {
            total.merge(c);
        }
        total
    };
    let direct = fold(&direct_chunks);
    let profile = fold(&profile_chunks);
    let n = config.samples;
    let nf = n as f64;

    let mut sites = Vec::new();
    let mut max_moment_z = 0.0f64;
    for site in lo..=hi {
        let (d, p) = (&direct.moments[index(site)], &profile.moments[index(site)]);
        let mean_z = z_score(d.mean(), d.mean_se(), p.mean(), p.mean_se());
        let variance_z = z_score(d.variance(), d.variance_se(), p.variance(), p.variance_se());
        if site != b {
            max_moment_z = max_moment_z.max(mean_z.abs()).max(variance_z.abs());
        }
        let (fd, fp) = (direct.zeros[index(site)] as f64 / nf, profile.zeros[index(site)] as f64 / nf);
        let pooled = (fd + fp) / 2.0;
        let zero_z = z_score(fd, 0.0, fp, (2.0 * pooled * (1.0 - pooled) / nf).sqrt());
        sites.push(SiteComparison {
            site,
            direct_mean: d.mean(),
            direct_mean_se: d.mean_se(),
            profile_mean: p.mean(),
            profile_mean_se: p.mean_se(),
            mean_z,
            direct_variance: d.variance(),
            direct_variance_se: d.variance_se(),
            profile_variance: p.variance(),
            profile_variance_se: p.variance_se(),
            variance_z,
            direct_zero_frequency: fd,
            profile_zero_frequency: fp,
            zero_z,
        });
    }

    let atoms = [(b + 1, (-h).exp()), (-1, left_atom_probability(b, h))]
        .into_iter()
        .map(|(site, exact)| {
            let (dh, ph) = (direct.zeros[index(site)], profile.zeros[index(site)]);
            AtomCheck {
                site,
                exact,
                direct_hits: dh,
                direct_z: binomial_z(dh, n, exact),
                profile_hits: ph,
                profile_z: binomial_z(ph, n, exact),
            }
        })
        .collect();

    let cov = direct.sxy / nf - direct.sx * direct.sy / (nf * nf);
    let vx = direct.sxx / nf - (direct.sx / nf).powi(2);
    let vy = direct.syy / nf - (direct.sy / nf).powi(2);
    let corr = if vx > 0.0 && vy > 0.0 { cov / (vx * vy).sqrt() } else { 0.0 };

    Ok(RayKnightReport {
        samples: n,
        sites,
        max_moment_z,
        atoms,
        independence_correlation: corr,
        independence_z: corr * nf.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rayknight::sample_inner_step;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn left_atom_formula_matches_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (b, h, n) = (2, 1.0, 200_000);
        let mut s = 0.0;
        for _ in 0..n {
            let mut v = h;
            for _ in 0..b {
                v = sample_inner_step(v, &mut rng);
            }
            s += (-v).exp();
        }
        let est = s / n as f64;
        let exact = left_atom_probability(b, h);
        assert!((est - exact).abs() < 0.002, "{est} vs {exact}");
    }
}
