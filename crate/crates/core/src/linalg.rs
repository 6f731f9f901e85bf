//! Small dense determinants.
//!
//! Matrices here are at most a dozen states wide, so everything is stored
//! row-major in a flat slice and factored in place.

use num_complex::Complex64;

/// Scalar types the in-place LU determinant can work over.
pub trait LuScalar: Copy {
    fn zero() -> Self;
    fn one() -> Self;
    fn magnitude(self) -> f64;
    fn mul(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn div(self, other: Self) -> Self;
    fn neg(self) -> Self;
}

impl LuScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn div(self, other: Self) -> Self {
        self / other
    }
    fn neg(self) -> Self {
        -self
    }
}

impl LuScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn div(self, other: Self) -> Self {
        self / other
    }
    fn neg(self) -> Self {
        -self
    }
}

/// Determinant of the `n x n` row-major matrix in `buf`, destroying it.
///
/// Gaussian elimination with partial pivoting. An empty matrix has
/// determinant one.
pub fn lu_determinant_in_place<T: LuScalar>(buf: &mut [T], n: usize) -> T {
    debug_assert_eq!(buf.len(), n * n);
    let mut det = T::one();
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = buf[col * n + col].magnitude();
        for row in col + 1..n {
            let m = buf[row * n + col].magnitude();
            if m > pivot_mag {
                pivot_mag = m;
                pivot_row = row;
            }
        }
        if pivot_mag == 0.0 {
            return T::zero();
        }
        if pivot_row != col {
            for j in 0..n {
                buf.swap(col * n + j, pivot_row * n + j);
            }
            det = det.neg();
        }
        let pivot = buf[col * n + col];
        det = det.mul(pivot);
        for row in col + 1..n {
            let factor = buf[row * n + col].div(pivot);
            if factor.magnitude() == 0.0 {
                continue;
            }
            for j in col + 1..n {
                let v = buf[row * n + j].sub(factor.mul(buf[col * n + j]));
                buf[row * n + j] = v;
            }
        }
    }
    det
}

/// Determinant of a row-major `n x n` matrix.
pub fn determinant<T: LuScalar>(m: &[T], n: usize) -> T {
    let mut buf = m.to_vec();
    lu_determinant_in_place(&mut buf, n)
}

/// Overwrite `buf` (row-major, `n x n`) with its `(b, a)` replacement:
/// row `b` and column `a` are cleared and entry `(b, a)` set to one.
pub fn apply_cofactor_replacement<T: LuScalar>(buf: &mut [T], n: usize, a: usize, b: usize) {
    for j in 0..n {
        buf[b * n + j] = T::zero();
    }
    for i in 0..n {
        buf[i * n + a] = T::zero();
    }
    buf[b * n + a] = T::one();
}
