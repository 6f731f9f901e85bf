//! Rate functions, the pointwise density bound and finite-horizon
//! large-deviation bounds.

mod chi;
mod ldp;
mod pointwise;
mod rate;

pub use chi::{
    chi_objective, rescaled_chi_discrete, ChiSolution, DiscreteFunctional, LatticeBox, LinearFunctional, ZeroFunctional,
};
pub use ldp::{
    halfspace_inf_rate, ldp_error_terms, ldp_probability_bound, ldp_varadhan_bound, linear_sup, log_restricted_mgf,
};
pub use pointwise::density_upper_bound;
pub use rate::{rate_general, rate_objective, rate_symmetric, RateSolution};

use crate::chain::Generator;

/// Largest absolute row or column sum of the off-diagonal rates within
/// `subset`, floored at 1.
pub fn eta(g: &Generator, subset: &[usize]) -> f64 {
    let mut best = 1.0f64;
    for &x in subset {
        let row: f64 = subset.iter().map(|&y| g.off_diagonal(x, y).abs()).sum();
        let col: f64 = subset.iter().map(|&y| g.off_diagonal(y, x).abs()).sum();
        best = best.max(row).max(col);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_examples() {
        let g = Generator::from_triples(&["a", "b"], &[("a", "b", 0.0)]).unwrap();
        assert_eq!(eta(&g, &[0, 1]), 1.0);
        let g = Generator::from_triples(&["1", "2"], &[("1", "2", 3.0)]).unwrap();
        assert_eq!(eta(&g, &[0, 1]), 3.0);
        let g = Generator::srw_path(-3, 3);
        assert_eq!(eta(&g, &[2, 3, 4]), 2.0);
        assert_eq!(eta(&g, &[3]), 1.0);
    }

    #[test]
    fn eta_on_two_dimensional_box() {
        // 3x3 box of Z^2; the centre has four neighbours
        let side = 3;
        let n = side * side;
        let mut off = vec![vec![0.0; n]; n];
        for i in 0..n {
            let (r, c) = (i / side, i % side);
            if c + 1 < side {
                off[i][i + 1] = 1.0;
                off[i + 1][i] = 1.0;
            }
            if r + 1 < side {
                off[i][i + side] = 1.0;
                off[i + side][i] = 1.0;
            }
        }
        let g = Generator::from_off_diagonal((0..n).map(|i| i.to_string()).collect(), &off).unwrap();
        assert_eq!(eta(&g, &(0..n).collect::<Vec<_>>()), 4.0);
    }
}
