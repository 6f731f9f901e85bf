use crate::error::{Error, Result};

/// Coordinates at or below this are rejected rather than extrapolated.
pub const MIN_COORDINATE: f64 = 1e-12;

/// A strictly positive local-time vector on a range `R` with total mass `T`.
///
/// `range` holds sorted generator indices and `values` the matching local
/// times. The eliminated coordinate is the one dropped when the surface
/// measure is written as Lebesgue measure in the remaining coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    range: Vec<usize>,
    values: Vec<f64>,
    total: f64,
    eliminated: usize,
}

impl SimplexPoint {
    /// Pair states with local times; the pairs are sorted by state.
    pub fn new(range: &[usize], values: &[f64]) -> Result<Self> {
        if range.is_empty() {
            return Err(Error::EmptySubset);
        }
        if range.len() != values.len() {
            return Err(Error::Shape(format!("{} states but {} local times", range.len(), values.len())));
        }
        let mut pairs: Vec<(usize, f64)> = range.iter().copied().zip(values.iter().copied()).collect();
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Shape("repeated state in range".into()));
        }
        for &(x, l) in &pairs {
            if !(l > MIN_COORDINATE && l.is_finite()) {
                return Err(Error::Domain(format!("local time at state #{x} must exceed {MIN_COORDINATE:e}, got {l}")));
            }
        }
        let (range, values): (Vec<usize>, Vec<f64>) = pairs.into_iter().unzip();
        let total = values.iter().sum();
        Ok(Self { range, values, total, eliminated: 0 })
    }

    /// Rebuild a point from its free coordinates and the total mass.
    pub fn from_free(range: &[usize], eliminated: usize, free: &[f64], total: f64) -> Result<Self> {
        if free.len() + 1 != range.len() || eliminated >= range.len() {
            return Err(Error::Shape("free coordinates do not match the range".into()));
        }
        let rest = total - free.iter().sum::<f64>();
        let mut values = free.to_vec();
        values.insert(eliminated, rest);
        let mut sorted: Vec<usize> = range.to_vec();
        sorted.sort_unstable();
        let mut p = Self::new(&sorted, &values)?;
        p.eliminated = eliminated;
        Ok(p)
    }

    /// Designate the coordinate (a position in `range`) to eliminate.
    pub fn with_eliminated(mut self, position: usize) -> Self {
        assert!(position < self.range.len());
        self.eliminated = position;
        self
    }

    pub fn range(&self) -> &[usize] {
        &self.range
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }

    pub fn eliminated(&self) -> usize {
        self.eliminated
    }

    pub fn position(&self, state: usize) -> Option<usize> {
        self.range.binary_search(&state).ok()
    }

    pub fn value_at(&self, state: usize) -> Option<f64> {
        self.position(state).map(|i| self.values[i])
    }

    /// Coordinates other than the eliminated one, in range order.
    pub fn free_coordinates(&self) -> Vec<f64> {
        self.values.iter().enumerate().filter(|&(i, _)| i != self.eliminated).map(|(_, &v)| v).collect()
    }

    /// Occupation profile `l / T`.
    pub fn profile(&self) -> Vec<f64> {
        self.values.iter().map(|v| v / self.total).collect()
    }
}
