use serde::Serialize;
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};

/// Running sums for mean, variance and the fourth central moment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.s1 += x;
        self.s2 += x * x;
        self.s3 += x * x * x;
        self.s4 += x * x * x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.s1 += other.s1;
        self.s2 += other.s2;
        self.s3 += other.s3;
        self.s4 += other.s4;
    }

    pub fn mean(&self) -> f64 {
        self.s1 / self.n as f64
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.s2 / self.n as f64 - m * m).max(0.0)
    }

    pub fn mean_se(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    /// Standard error of the variance, `sqrt((m4 - s^4) / n)`.
    pub fn variance_se(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        let (e2, e3, e4) = (self.s2 / n, self.s3 / n, self.s4 / n);
        let m4 = e4 - 4.0 * m * e3 + 6.0 * m * m * e2 - 3.0 * m.powi(4);
        let v = self.variance();
        ((m4 - v * v).max(0.0) / n).sqrt()
    }
}

/// Two-sample z-score for a difference of estimates.
pub fn z_score(a: f64, se_a: f64, b: f64, se_b: f64) -> f64 {
    let se = (se_a * se_a + se_b * se_b).sqrt();
    if se == 0.0 {
        if a == b {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a - b) / se
    }
}

/// z-score of `hits` out of `n` against success probability `p`.
pub fn binomial_z(hits: u64, n: u64, p: f64) -> f64 {
    let nf = n as f64;
    let se = (p * (1.0 - p) / nf).sqrt();
    if se == 0.0 {
        return if hits as f64 == p * nf { 0.0 } else { f64::INFINITY };
    }
    (hits as f64 / nf - p) / se
}

/// One-sided Clopper-Pearson upper confidence limit for a proportion.
pub fn proportion_upper(hits: u64, n: u64, confidence: f64) -> f64 {
    if hits >= n {
        return 1.0;
    }
    let alpha = 1.0 - confidence;
    if hits == 0 {
        return 1.0 - alpha.powf(1.0 / n as f64);
    }
    Beta::new(hits as f64 + 1.0, (n - hits) as f64).expect("valid shape").inverse_cdf(confidence)
}

/// Pearson chi-square goodness of fit after merging sparse cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Cells after merging.
    pub groups: usize,
    /// Largest `|O - E| / sqrt(E)` over merged cells.
    pub worst_z: f64,
}

/// Merge consecutive cells until each group expects at least `min_expected`
/// counts (a short tail joins the previous group), then test.
pub fn chi_square_merged(observed: &[u64], expected: &[f64], min_expected: f64) -> ChiSquareResult {
    assert_eq!(observed.len(), expected.len());
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &ex) in observed.iter().zip(expected) {
        o += ob as f64;
        e += ex;
        if e >= min_expected {
            groups.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => groups.push((o, e)),
        }
    }
    let mut statistic = 0.0;
    let mut worst_z = 0.0f64;
    for &(o, e) in &groups {
        if e > 0.0 {
            statistic += (o - e) * (o - e) / e;
            worst_z = worst_z.max((o - e).abs() / e.sqrt());
        }
    }
    let dof = groups.len().saturating_sub(1);
    let p_value = if dof == 0 { 1.0 } else { ChiSquared::new(dof as f64).expect("positive dof").sf(statistic) };
    ChiSquareResult { statistic, dof, p_value, groups: groups.len(), worst_z }
}
