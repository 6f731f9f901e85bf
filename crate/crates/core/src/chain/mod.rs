//! Generators, restriction and exact path simulation.

mod generator;
mod simulate;

pub use generator::{Generator, GeneratorSpec, Label, RestrictedGenerator, CONSERVATIVE_TOL};
pub use simulate::{
    simulate_fixed_time, simulate_inverse_local_time, Budget, InverseLocalTimeResult, PathSummary, Simulator,
};
