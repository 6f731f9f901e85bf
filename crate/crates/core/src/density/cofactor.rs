use crate::linalg::{apply_cofactor_replacement, determinant};

/// `(b, a)` cofactor of the row-major `n x n` matrix `m`: the determinant
/// after clearing row `b` and column `a` and putting 1 at `(b, a)`.
pub fn cofactor(m: &[f64], n: usize, a: usize, b: usize) -> f64 {
    let mut buf = m.to_vec();
    apply_cofactor_replacement(&mut buf, n, a, b);
    determinant(&buf, n)
}

/// Expansion of the cofactor of `-B + D` for a diagonal `D` into
/// `sum_Q prod_{x in Q} D_x * w_Q` with `Q` ranging over subsets of the
/// states other than `a` and `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CofactorOperator {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    /// `-B`, row-major, zero diagonal.
    pub minus_b: Vec<f64>,
    /// `(Q, w_Q)` pairs; `Q` is a sorted list of local indices.
    pub weights: Vec<(Vec<usize>, f64)>,
}

impl CofactorOperator {
    /// `off` is the off-diagonal part `B` (its diagonal is ignored).
    pub fn new(off: &[f64], n: usize, a: usize, b: usize) -> Self {
        assert!(a < n && b < n, "cofactor indices out of range");
        let mut minus_b = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    minus_b[x * n + y] = -off[x * n + y];
                }
            }
        }
        let mut replaced = minus_b.clone();
        apply_cofactor_replacement(&mut replaced, n, a, b);

        let free: Vec<usize> = (0..n).filter(|&x| x != a && x != b).collect();
        let mut weights = Vec::with_capacity(1 << free.len());
        for mask in 0u32..(1 << free.len()) {
            let q: Vec<usize> =
                free.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &x)| x).collect();
            let keep: Vec<usize> = (0..n).filter(|x| !q.contains(x)).collect();
            let k = keep.len();
            let mut minor = vec![0.0; k * k];
            for (i, &x) in keep.iter().enumerate() {
                for (j, &y) in keep.iter().enumerate() {
                    minor[i * k + j] = replaced[x * n + y];
                }
            }
            weights.push((q, determinant(&minor, k)));
        }
        Self { n, a, b, minus_b, weights }
    }

    pub fn weight(&self, q: &[usize]) -> Option<f64> {
        self.weights.iter().find(|(s, _)| s == q).map(|w| w.1)
    }

    /// Evaluate the expansion for a concrete diagonal `d`.
    pub fn evaluate_with_diagonal(&self, d: &[f64]) -> f64 {
        self.weights.iter().map(|(q, w)| w * q.iter().map(|&x| d[x]).product::<f64>()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tests::leibniz;
    use proptest::prelude::*;

    #[test]
    fn identity_diagonal_cofactor_is_one() {
        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        for a in 0..3 {
            assert_eq!(cofactor(&id, 3, a, a), 1.0);
        }
    }

    #[test]
    fn two_by_two_off_diagonal() {
        let m = [2.0, -3.0, 5.0, 7.0];
        assert_eq!(cofactor(&m, 2, 0, 1), 3.0);
    }

    #[test]
    fn tridiagonal_factorisation() {
        // cofactor_ab = cof_aa(left block) * prod_{a<=i<b} (-M[i][i+1]) * cof_bb(right block)
        let m = [
            0.7, -1.3, 0.0, 0.0, //
            0.4, 1.1, 0.9, 0.0, //
            0.0, -0.6, 2.0, 0.5, //
            0.0, 0.0, 1.7, -0.8,
        ];
        let n = 4;
        let sub = |lo: usize, hi: usize| -> Vec<f64> {
            let k = hi - lo;
            (0..k * k).map(|i| m[(lo + i / k) * n + lo + i % k]).collect()
        };
        for a in 0..n {
            for b in a..n {
                let left = cofactor(&sub(0, a + 1), a + 1, a, a);
                let right = cofactor(&sub(b, n), n - b, 0, 0);
                let middle: f64 = (a..b).map(|i| -m[i * n + i + 1]).product();
                let direct = cofactor(&m, n, a, b);
                assert!((direct - left * middle * right).abs() < 1e-12, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn two_state_weights() {
        let off = [0.0, 2.5, 1.0, 0.0];
        let op = CofactorOperator::new(&off, 2, 0, 1);
        assert_eq!(op.weights, vec![(vec![], 2.5)]);
        let diag = CofactorOperator::new(&off, 2, 0, 0);
        assert_eq!(diag.weights, vec![(vec![], 0.0), (vec![1], 1.0)]);
    }

    #[test]
    fn zero_b_off_diagonal_vanishes() {
        let op = CofactorOperator::new(&[0.0; 16], 4, 0, 2);
        assert!(op.weights.iter().all(|(_, w)| *w == 0.0));
    }

    proptest! {
        // The subset expansion reproduces the cofactor of -B + diag(d).
        #[test]
        fn expansion_matches_direct(
            off in proptest::collection::vec(0.0f64..2.0, 16),
            d in proptest::collection::vec(-2.0f64..2.0, 4),
            a in 0usize..4,
            b in 0usize..4,
        ) {
            let n = 4;
            let op = CofactorOperator::new(&off, n, a, b);
            let mut m = op.minus_b.clone();
            for x in 0..n {
                m[x * n + x] = d[x];
            }
            let mut replaced = m.clone();
            apply_cofactor_replacement(&mut replaced, n, a, b);
            let direct = leibniz(&replaced, n);
            prop_assert!((op.evaluate_with_diagonal(&d) - direct).abs() < 1e-10 * (1.0 + direct.abs()));
            prop_assert!((cofactor(&m, n, a, b) - direct).abs() < 1e-10 * (1.0 + direct.abs()));
        }
    }
}
