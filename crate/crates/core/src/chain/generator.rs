use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the row sum when a caller supplies diagonal entries.
pub const CONSERVATIVE_TOL: f64 = 1e-12;

/// A conservative rate matrix (Q-matrix) over a finite ordered label set.
///
/// Off-diagonal entries are jump rates; every row sums to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    labels: Vec<String>,
    rates: Vec<f64>,
}

impl Generator {
    /// Validate a dense rate matrix.
    ///
    /// Diagonal entries given as `None` are filled in as the negative row sum
    /// of the off-diagonal part; supplied diagonals must already satisfy it.
    pub fn new(labels: Vec<String>, rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("expected a {n}x{n} matrix")));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Shape(format!("duplicate label '{l}'")));
            }
        }
        let mut rates = vec![0.0; n * n];
        for (x, row) in rows.iter().enumerate() {
            let mut off_sum = 0.0;
            for (y, entry) in row.iter().enumerate() {
                if x == y {
                    continue;
                }
                let r = entry.unwrap_or(0.0);
                if !r.is_finite() {
                    return Err(Error::Domain(format!("non-finite rate at ({}, {})", labels[x], labels[y])));
                }
                if r < 0.0 {
                    return Err(Error::NegativeRate { from: labels[x].clone(), to: labels[y].clone(), rate: r });
                }
                rates[x * n + y] = r;
                off_sum += r;
            }
            rates[x * n + x] = match row[x] {
                None => -off_sum,
                Some(d) => {
                    if (d + off_sum).abs() > CONSERVATIVE_TOL {
                        return Err(Error::NonConservative { state: labels[x].clone(), diagonal: d, off_sum });
                    }
                    -off_sum
                }
            };
        }
        if n < 2 {
            return Err(Error::TooSmall(n));
        }
        Ok(Self { labels, rates })
    }

    /// Build from `(from, to, rate)` triples; diagonals are derived.
    pub fn from_triples<S: AsRef<str>>(labels: &[S], triples: &[(S, S, f64)]) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        let n = labels.len();
        let mut rows = vec![vec![None; n]; n];
        let find = |s: &str| labels.iter().position(|l| l == s).ok_or_else(|| Error::UnknownLabel(s.to_string()));
        for (from, to, rate) in triples {
            let (x, y) = (find(from.as_ref())?, find(to.as_ref())?);
            if x == y {
                return Err(Error::Domain(format!("self-loop rate given for '{}'", labels[x])));
            }
            let prev = rows[x][y].unwrap_or(0.0);
            rows[x][y] = Some(prev + *rate);
        }
        Self::new(labels, rows)
    }

    /// Build from a dense matrix whose diagonal is ignored and recomputed.
    pub fn from_off_diagonal(labels: Vec<String>, off: &[Vec<f64>]) -> Result<Self> {
        let rows = off
            .iter()
            .enumerate()
            .map(|(x, r)| r.iter().enumerate().map(|(y, &v)| if x == y { None } else { Some(v) }).collect())
            .collect();
        Self::new(labels, rows)
    }

    /// Two states `"1"`, `"2"` with jump rate `rate` in both directions.
    pub fn two_state(rate: f64) -> Self {
        Self::from_triples(&["1", "2"], &[("1", "2", rate), ("2", "1", rate)]).expect("valid two-state chain")
    }

    /// Conservative simple random walk on the path `lo..=hi` (labels are the
    /// integers). Interior diagonals are `-2`, the two endpoints `-1`.
    ///
    /// This is exactly the trace of simple random walk on the integers
    /// watched only while it is inside the window: an excursion that leaves
    /// through an endpoint always returns to that endpoint, so deleting the
    /// time spent outside turns those jumps into self-loops.
    pub fn srw_path(lo: i64, hi: i64) -> Self {
        assert!(hi > lo, "path needs at least two sites");
        let labels: Vec<String> = (lo..=hi).map(|i| i.to_string()).collect();
        let n = labels.len();
        let mut off = vec![vec![0.0; n]; n];
        for i in 0..n - 1 {
            off[i][i + 1] = 1.0;
            off[i + 1][i] = 1.0;
        }
        Self::from_off_diagonal(labels, &off).expect("valid path walk")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Resolve a list of labels to sorted, deduplicated state indices.
    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = labels.iter().map(|l| self.index_of(l.as_ref())).collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Rate entry `A[x][y]`.
    #[inline]
    pub fn rate(&self, x: usize, y: usize) -> f64 {
        self.rates[x * self.len() + y]
    }

    /// Off-diagonal part `B[x][y]` (zero on the diagonal).
    #[inline]
    pub fn off_diagonal(&self, x: usize, y: usize) -> f64 {
        if x == y {
            0.0
        } else {
            self.rate(x, y)
        }
    }

    /// Total exit rate `-A[x][x]`.
    #[inline]
    pub fn exit_rate(&self, x: usize) -> f64 {
        -self.rate(x, x)
    }

    /// Row-major copy of the full rate matrix.
    pub fn matrix(&self) -> &[f64] {
        &self.rates
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.len();
        (0..n)
            .all(|x| (0..x).all(|y| (self.rate(x, y) - self.rate(y, x)).abs() <= 1e-14 * (1.0 + self.rate(x, y).abs())))
    }

    /// Copy of the generator with a rescaled off-diagonal entry; the
    /// diagonal of row `x` is recomputed.
    pub fn with_rate(&self, x: usize, y: usize, rate: f64) -> Result<Self> {
        let n = self.len();
        let off: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if (i, j) == (x, y) { rate } else { self.off_diagonal(i, j) }).collect())
            .collect();
        Self::from_off_diagonal(self.labels.clone(), &off)
    }

    /// Square sub-block `A[x][y]` for `x, y` in `states`, diagonal included.
    pub fn block(&self, states: &[usize]) -> Vec<f64> {
        let k = states.len();
        let mut out = vec![0.0; k * k];
        for (i, &x) in states.iter().enumerate() {
            for (j, &y) in states.iter().enumerate() {
                out[i * k + j] = self.rate(x, y);
            }
        }
        out
    }

    /// Restrict to a subset per the conservative-restriction rule.
    pub fn restrict(&self, subset: &[usize]) -> Result<RestrictedGenerator> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut states = subset.to_vec();
        states.sort_unstable();
        states.dedup();
        if let Some(&bad) = states.iter().find(|&&x| x >= self.len()) {
            return Err(Error::UnknownLabel(format!("#{bad}")));
        }
        let k = states.len();
        let mut restricted = vec![0.0; k * k];
        let mut killing = vec![0.0; k];
        for (i, &x) in states.iter().enumerate() {
            let mut inside = 0.0;
            for (j, &y) in states.iter().enumerate() {
                if i != j {
                    restricted[i * k + j] = self.rate(x, y);
                    inside += self.rate(x, y);
                }
            }
            restricted[i * k + i] = -inside;
            killing[i] = (0..self.len()).filter(|y| !states.contains(y)).map(|y| self.rate(x, y)).sum();
        }
        Ok(RestrictedGenerator { states, restricted, killing })
    }
}

/// A generator restricted to a subset `R`: the conservative chain on `R`
/// with excursions outside suppressed, plus the diagonal escape rates.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedGenerator {
    /// Sorted base-generator indices of `R`.
    pub states: Vec<usize>,
    /// Row-major `|R| x |R|` conservative rate matrix on `R`.
    pub restricted: Vec<f64>,
    /// Escape rate out of `R` from each state, aligned with `states`.
    pub killing: Vec<f64>,
}

impl RestrictedGenerator {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[inline]
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.restricted[i * self.len() + j]
    }

    /// The restricted matrix as a stand-alone generator, with labels taken
    /// from the base. Needs `|R| >= 2`.
    pub fn to_generator(&self, base: &Generator) -> Result<Generator> {
        let k = self.len();
        let labels = self.states.iter().map(|&x| base.label(x).to_string()).collect();
        let off: Vec<Vec<f64>> =
            (0..k).map(|i| (0..k).map(|j| if i == j { 0.0 } else { self.rate(i, j) }).collect()).collect();
        Generator::from_off_diagonal(labels, &off)
    }
}

/// Serializable generator description: labels plus `(from, to, rate)`
/// triples, with optional diagonal entries that are validated if present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub states: Vec<Label>,
    pub rates: Vec<(Label, Label, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Vec<(Label, f64)>>,
}

/// A state label written either as a string or as an integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Text(String),
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Int(i) => write!(f, "{i}"),
            Label::Text(s) => f.write_str(s),
        }
    }
}

impl GeneratorSpec {
    /// Validate into a [`Generator`]. Errors name the offending field.
    pub fn build(&self) -> Result<Generator> {
        let labels: Vec<String> = self.states.iter().map(|l| l.to_string()).collect();
        let n = labels.len();
        let find = |field: &str, l: &Label| {
            let s = l.to_string();
            labels
                .iter()
                .position(|x| *x == s)
                .ok_or_else(|| Error::Domain(format!("{field}: unknown state label '{s}'")))
        };
        let mut rows = vec![vec![None; n]; n];
        for (i, (from, to, rate)) in self.rates.iter().enumerate() {
            let field = format!("rates[{i}]");
            let (x, y) = (find(&field, from)?, find(&field, to)?);
            if x == y {
                return Err(Error::Domain(format!("{field}: self-loop on '{from}'")));
            }
            if !(*rate >= 0.0 && rate.is_finite()) {
                return Err(Error::Domain(format!("{field}: rate must be finite and nonnegative, got {rate}")));
            }
            rows[x][y] = Some(rows[x][y].unwrap_or(0.0) + rate);
        }
        for (i, (l, d)) in self.diagonal.iter().flatten().enumerate() {
            let x = find(&format!("diagonal[{i}]"), l)?;
            rows[x][x] = Some(*d);
        }
        Generator::new(labels, rows)
    }

    pub fn from_generator(g: &Generator) -> Self {
        let states = g.labels().iter().map(|l| Label::Text(l.clone())).collect();
        let n = g.len();
        let mut rates = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if x != y && g.rate(x, y) != 0.0 {
                    rates.push((Label::Text(g.label(x).into()), Label::Text(g.label(y).into()), g.rate(x, y)));
                }
            }
        }
        Self { states, rates, diagonal: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_diagonal_is_forced() {
        let g = Generator::two_state(1.0);
        assert_eq!(g.rate(0, 0), -1.0);
        assert_eq!(g.rate(1, 1), -1.0);
    }

    #[test]
    fn path_graph_middle_diagonal() {
        let g = Generator::from_triples(
            &["0", "1", "2"],
            &[("0", "1", 1.0), ("1", "0", 1.0), ("1", "2", 1.0), ("2", "1", 1.0)],
        )
        .unwrap();
        assert_eq!(g.rate(1, 1), -2.0);
        assert_eq!(g.rate(0, 2), 0.0);
        assert_eq!(g, Generator::srw_path(0, 2));
    }

    #[test]
    fn rejects_negative_rate() {
        let err = Generator::from_triples(&["a", "b"], &[("a", "b", -0.5)]).unwrap_err();
        assert!(matches!(err, Error::NegativeRate { .. }));
    }

    #[test]
    fn rejects_singleton_and_bad_diagonal() {
        assert_eq!(Generator::new(vec!["a".into()], vec![vec![None]]).unwrap_err(), Error::TooSmall(1));
        let err =
            Generator::new(vec!["a".into(), "b".into()], vec![vec![Some(-2.0), Some(1.0)], vec![Some(1.0), None]])
                .unwrap_err();
        assert!(matches!(err, Error::NonConservative { .. }));
        let ok = Generator::new(vec!["a".into(), "b".into()], vec![vec![Some(-1.0), Some(1.0)], vec![Some(1.0), None]]);
        assert!(ok.is_ok());
    }

    #[test]
    fn restriction_of_walk_to_two_sites() {
        // Simple random walk window around {0, 1}: escapes to -1 and 2.
        let g = Generator::srw_path(-1, 2);
        let r = g.restrict(&g.indices_of(&["0", "1"]).unwrap()).unwrap();
        assert_eq!(r.restricted, vec![-1.0, 1.0, 1.0, -1.0]);
        assert_eq!(r.killing, vec![1.0, 1.0]);
    }

    #[test]
    fn restriction_identity_and_edge_cases() {
        let g = Generator::srw_path(0, 3);
        let all: Vec<usize> = (0..4).collect();
        let r = g.restrict(&all).unwrap();
        assert_eq!(r.restricted, g.matrix());
        assert!(r.killing.iter().all(|&v| v == 0.0));

        let single = g.restrict(&[1]).unwrap();
        assert_eq!(single.restricted, vec![0.0]);
        assert_eq!(single.killing, vec![-g.rate(1, 1)]);

        assert_eq!(g.restrict(&[]).unwrap_err(), Error::EmptySubset);
        assert!(matches!(g.restrict(&[7]).unwrap_err(), Error::UnknownLabel(_)));
    }

    proptest::proptest! {
        // A^(R)[x][y] = A[x][y] + V^(R)[x][y] for all x, y in R.
        #[test]
        fn restriction_decomposition(rates in proptest::collection::vec(0.0f64..3.0, 25), mask in 1u32..31) {
            let n = 5;
            let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
            let off: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| rates[i * n + j]).collect()).collect();
            let g = Generator::from_off_diagonal(labels, &off).unwrap();
            let subset: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let r = g.restrict(&subset).unwrap();
            let k = r.len();
            for i in 0..k {
                let row: f64 = (0..k).map(|j| r.rate(i, j)).sum();
                proptest::prop_assert!(row.abs() < 1e-12);
                for j in 0..k {
                    let v = if i == j { r.killing[i] } else { 0.0 };
                    let lhs = r.rate(i, j);
                    let rhs = g.rate(r.states[i], r.states[j]) + v;
                    proptest::prop_assert!((lhs - rhs).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn spec_round_trip_through_json() {
        let text = r#"{"states": [1, 2, "x"], "rates": [[1, 2, 0.5], [2, "x", 2.0], ["x", 1, 1.0]]}"#;
        let spec: GeneratorSpec = serde_json::from_str(text).unwrap();
        let g = spec.build().unwrap();
        assert_eq!(g.labels(), &["1", "2", "x"]);
        assert_eq!(g.rate(1, 1), -2.0);
        let again = GeneratorSpec::from_generator(&g).build().unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn spec_reports_field_of_bad_label() {
        let text = r#"{"states": ["a", "b"], "rates": [["a", "b", 1.0], ["b", "c", 1.0]]}"#;
        let spec: GeneratorSpec = serde_json::from_str(text).unwrap();
        let msg = spec.build().unwrap_err().to_string();
        assert!(msg.contains("rates[1]"), "{msg}");
    }
}
