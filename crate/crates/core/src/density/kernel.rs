/// Edge kernel `g(t) = sum_k c^k t^{2k} / (k!)^2` with `c = B[x][y] * B[y][x]`,
/// the angular average of `exp(t (B[x][y] e^{i theta} + B[y][x] e^{-i theta}))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeKernel {
    pub product: f64,
}

const MAX_TERMS: usize = 2000;

impl EdgeKernel {
    pub fn new(forward: f64, backward: f64) -> Self {
        Self { product: forward * backward }
    }

    /// `g(t)`.
    pub fn value(&self, t: f64) -> f64 {
        self.series_in(t * t)
    }

    /// `G(u, v) = g(sqrt(u v))` as a function of two local times.
    pub fn at(&self, u: f64, v: f64) -> f64 {
        self.series_in(u * v)
    }

    /// `d/du G(u, v) = v * sum_{k>=1} c^k (u v)^{k-1} / (k! (k-1)!)`.
    pub fn partial(&self, u: f64, v: f64) -> f64 {
        let z = self.product * u * v;
        let mut term = self.product; // k = 1
        let mut sum = term;
        for k in 2..MAX_TERMS {
            let kf = k as f64;
            term *= z / (kf * (kf - 1.0));
            sum += term;
            if kf * kf > z.abs() && term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        v * sum
    }

    fn series_in(&self, s: f64) -> f64 {
        let z = self.product * s;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..MAX_TERMS {
            let kf = k as f64;
            term *= z / (kf * kf);
            sum += term;
            if kf * kf > z.abs() && term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    }
}
