//! Local times of finite continuous-time Markov chains: exact joint
//! densities, large-deviation bounds, Ray-Knight kernels and Monte Carlo
//! checks.
//!
//! ```
//! use localtime::{density, Generator, SimplexPoint};
//!
//! let g = Generator::two_state(1.0);
//! let l = SimplexPoint::new(&[0, 1], &[0.5, 0.5]).unwrap();
//! let rho = density(&g, 0, 1, &l, 1e-14).unwrap();
//! assert!((rho - 0.4657596075936404).abs() < 1e-14);
//! ```

pub mod bounds;
pub mod chain;
pub mod density;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod quad;
pub mod rayknight;
pub mod special;

pub use bounds::{
    density_upper_bound, eta, ldp_probability_bound, ldp_varadhan_bound, rate_general, rate_symmetric,
    rescaled_chi_discrete, RateSolution,
};
pub use chain::{
    simulate_fixed_time, simulate_inverse_local_time, Generator, GeneratorSpec, InverseLocalTimeResult, PathSummary,
    RestrictedGenerator,
};
pub use density::{
    density, density_quadrature, density_tridiagonal, BalancedFlow, CofactorOperator, SeriesValue, SimplexPoint,
};
pub use error::{Error, Result};
pub use rayknight::{rk_fixed_time_check, rk_inner_density, rk_outer_atom, rk_outer_density, sample_rk_profile};
pub use special::{bessel_i0, bessel_i1};
