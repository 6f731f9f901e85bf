//! Modified Bessel functions of the first kind by power series.
//!
//! Arguments in this crate stay below about fifty, where the plain series
//! converges without trouble, so there is no asymptotic branch.

const REL_STOP: f64 = 1e-17;
const MAX_TERMS: usize = 1000;

/// `I_0(x) = sum_k (x/2)^{2k} / (k!)^2`.
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= q / (kf * kf);
        sum += term;
        if term <= REL_STOP * sum {
            break;
        }
    }
    sum
}

/// `I_1(x) = sum_k (x/2)^{2k+1} / (k! (k+1)!)`, the derivative of `I_0`.
pub fn bessel_i1(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = half;
    let mut sum = half;
    if term == 0.0 {
        return 0.0;
    }
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        sum += term;
        if term.abs() <= REL_STOP * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from direct summation in extended precision.
    #[test]
    fn known_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert_eq!(bessel_i1(0.0), 0.0);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((bessel_i1(2.0) - 1.590_636_854_637_329).abs() < 1e-15);
        assert!((bessel_i0(2.0) - 2.279_585_302_336_067).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_i0_is_i1() {
        for &x in &[0.3, 1.0, 4.5, 12.0] {
            let h = 1e-5;
            let fd = (bessel_i0(x + h) - bessel_i0(x - h)) / (2.0 * h);
            assert!((fd - bessel_i1(x)).abs() < 1e-8 * bessel_i1(x).max(1.0));
        }
    }

    #[test]
    fn large_argument_relative_accuracy() {
        // Wronskian-free check: I0(x) e^{-x} sqrt(2 pi x) -> 1 + 1/(8x) + ...
        let x: f64 = 50.0;
        let scaled = bessel_i0(x) * (-x).exp() * (2.0 * std::f64::consts::PI * x).sqrt();
        let asym = 1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x) + 225.0 / (3072.0 * x.powi(3));
        assert!((scaled - asym).abs() < 1e-6);
    }
}
