//! Monte Carlo verification experiments and their statistics.

mod density_mc;
mod histogram;
mod ldp_mc;
mod rayknight_mc;
mod stats;

pub use density_mc::{
    verify_density_mc, CellReport, DensityMcConfig, DensityMcReport, ProbabilityCheck, MIN_CONDITIONED,
};
pub use histogram::{cell_mass, cell_of, from_stick, stick_jacobian, to_stick, CellMass};
pub use ldp_mc::{varadhan_check, verify_ldp_mc, LdpMcConfig, LdpMcReport, VaradhanCheck};
pub use rayknight_mc::{
    left_atom_probability, verify_rayknight_mc, AtomCheck, RayKnightMcConfig, RayKnightReport, SiteComparison,
};
pub use stats::{binomial_z, chi_square_merged, proportion_upper, z_score, ChiSquareResult, Moments};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;

/// Samples per work item.
pub const CHUNK: u64 = 10_000;

/// Split `samples` into chunks of `chunk`, run them in parallel, and return
/// the per-chunk results in chunk order.
///
/// Chunk `i` draws from stream `i` of a ChaCha8 generator keyed by `seed`,
/// so results do not depend on the thread count.
pub fn parallel_chunks<A, F>(seed: u64, samples: u64, chunk: u64, work: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> Result<A> + Sync,
{
    let chunk = chunk.max(1);
    let count = samples.div_ceil(chunk);
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            work(&mut rng, chunk.min(samples - i * chunk))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chunks_are_deterministic_and_ordered() {
        let run = || parallel_chunks(5, 95, 10, |rng, n| Ok((n, rng.random::<u64>()))).unwrap();
        let a = run();
        assert_eq!(a.len(), 10);
        assert_eq!(a.iter().map(|x| x.0).sum::<u64>(), 95);
        assert_eq!(a[9].0, 5);
        assert_eq!(a, run());
        assert_ne!(a[0].1, a[1].1);
    }
}
