use crate::error::{Error, Result};

/// Default cap on the number of enumerated flows.
pub const DEFAULT_FLOW_CAP: usize = 20_000_000;

/// A nonnegative integer edge weighting with equal in- and out-degree at
/// every state. Only nonzero counts are stored, in edge order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedFlow {
    pub counts: Vec<((usize, usize), u32)>,
}

impl BalancedFlow {
    pub fn total(&self) -> u32 {
        self.counts.iter().map(|c| c.1).sum()
    }

    pub fn count(&self, from: usize, to: usize) -> u32 {
        self.counts.iter().find(|c| c.0 == (from, to)).map_or(0, |c| c.1)
    }

    /// `d_x = sum_y (n_xy + n_yx)` for states `0..n`.
    pub fn degrees(&self, n: usize) -> Vec<u32> {
        let mut d = vec![0; n];
        for &((x, y), c) in &self.counts {
            d[x] += c;
            d[y] += c;
        }
        d
    }
}

/// Walk every balanced flow on `edges` (over states `0..n`) with total at
/// most `max_total`, calling `visit` with counts aligned to `edges`.
///
/// Order is lexicographic in the given edge order. Returns the number of
/// flows visited, or `ExplosionGuard` once more than `cap` are found.
pub fn for_each_balanced_flow<F: FnMut(&[u32])>(
    n: usize,
    edges: &[(usize, usize)],
    max_total: usize,
    cap: usize,
    mut visit: F,
) -> Result<usize> {
    for &(x, y) in edges {
        if x >= n || y >= n || x == y {
            return Err(Error::Shape(format!("bad edge ({x}, {y}) for {n} states")));
        }
    }
    // The last edge touching a state has its count fixed by that state's balance.
    let mut last = vec![usize::MAX; n];
    for (i, &(x, y)) in edges.iter().enumerate() {
        last[x] = i;
        last[y] = i;
    }
    let mut walk = Walk { edges, last, counts: vec![0; edges.len()], net: vec![0; n], visited: 0, cap, max_total };
    walk.descend(0, max_total as i64, &mut visit)?;
    Ok(walk.visited)
}

struct Walk<'e> {
    edges: &'e [(usize, usize)],
    last: Vec<usize>,
    counts: Vec<u32>,
    net: Vec<i64>,
    visited: usize,
    cap: usize,
    max_total: usize,
}

impl Walk<'_> {
    fn descend<F: FnMut(&[u32])>(&mut self, i: usize, remaining: i64, visit: &mut F) -> Result<()> {
        if i == self.edges.len() {
            self.visited += 1;
            if self.visited > self.cap {
                return Err(Error::ExplosionGuard { cap: self.cap, max_total: self.max_total });
            }
            visit(&self.counts);
            return Ok(());
        }
        let imbalance: i64 = self.net.iter().map(|v| v.abs()).sum();
        if imbalance > 2 * remaining {
            return Ok(());
        }
        let (x, y) = self.edges[i];
        let mut forced: Option<i64> = None;
        for (state, want) in [(x, -self.net[x]), (y, self.net[y])] {
            if self.last[state] == i {
                match forced {
                    Some(f) if f != want => return Ok(()),
                    _ => forced = Some(want),
                }
            }
        }
        let (lo, hi) = match forced {
            Some(f) if f < 0 || f > remaining => return Ok(()),
            Some(f) => (f, f),
            None => (0, remaining),
        };
        for c in lo..=hi {
            self.counts[i] = c as u32;
            self.net[x] += c;
            self.net[y] -= c;
            let r = self.descend(i + 1, remaining - c, visit);
            self.net[x] -= c;
            self.net[y] += c;
            r?;
        }
        self.counts[i] = 0;
        Ok(())
    }
}

/// Collect all balanced flows; see [`for_each_balanced_flow`].
pub fn enumerate_balanced_flows(
    n: usize,
    edges: &[(usize, usize)],
    max_total: usize,
    cap: usize,
) -> Result<Vec<BalancedFlow>> {
    let mut out = Vec::new();
    for_each_balanced_flow(n, edges, max_total, cap, |c| {
        let counts = edges.iter().zip(c).filter(|(_, &k)| k > 0).map(|(&e, &k)| (e, k)).collect();
        out.push(BalancedFlow { counts });
    })?;
    Ok(out)
}

/// Directed edges `(x, y)`, `x != y`, with a nonzero weight in the row-major
/// `n x n` matrix, in row-major order.
pub fn support_edges(weights: &[f64], n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x != y && weights[x * n + y] != 0.0 {
                edges.push((x, y));
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Every count vector with entries in 0..=max_total, filtered.
    fn brute_force(n: usize, edges: &[(usize, usize)], max_total: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut c = vec![0u32; edges.len()];
        loop {
            let total: usize = c.iter().map(|&v| v as usize).sum();
            if total <= max_total {
                let mut net = vec![0i64; n];
                for (&(x, y), &k) in edges.iter().zip(&c) {
                    net[x] += k as i64;
                    net[y] -= k as i64;
                }
                if net.iter().all(|&v| v == 0) {
                    out.push(c.clone());
                }
            }
            let mut i = 0;
            loop {
                if i == c.len() {
                    out.sort();
                    return out;
                }
                c[i] += 1;
                if c[i] as usize <= max_total {
                    break;
                }
                c[i] = 0;
                i += 1;
            }
        }
    }

    fn collect(n: usize, edges: &[(usize, usize)], max_total: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for_each_balanced_flow(n, edges, max_total, usize::MAX, |c| out.push(c.to_vec())).unwrap();
        out
    }

    #[test]
    fn two_states_up_to_two() {
        let flows = enumerate_balanced_flows(2, &[(0, 1), (1, 0)], 2, 100).unwrap();
        assert_eq!(flows.len(), 2);
        assert_eq!(flows[0].total(), 0);
        assert_eq!(flows[1].count(0, 1), 1);
        assert_eq!(flows[1].count(1, 0), 1);
        assert_eq!(flows[1].degrees(2), vec![2, 2]);
    }

    #[test]
    fn zero_total_is_only_empty_flow() {
        let flows = enumerate_balanced_flows(3, &[(0, 1), (1, 2), (2, 0)], 0, 100).unwrap();
        assert_eq!(flows, vec![BalancedFlow { counts: vec![] }]);
    }

    #[test]
    fn path_graph_up_to_two() {
        let edges = [(0, 1), (1, 0), (1, 2), (2, 1)];
        let flows = enumerate_balanced_flows(3, &edges, 2, 100).unwrap();
        assert_eq!(flows.len(), 3);
        assert_eq!(collect(3, &edges, 2), brute_force(3, &edges, 2));
    }

    #[test]
    fn guard_trips() {
        let edges = [(0, 1), (1, 0)];
        let err = enumerate_balanced_flows(2, &edges, 20, 5).unwrap_err();
        assert_eq!(err, Error::ExplosionGuard { cap: 5, max_total: 20 });
    }

    #[test]
    fn lexicographic_order() {
        let edges = [(0, 1), (1, 2), (2, 0), (1, 0)];
        let flows = collect(3, &edges, 6);
        let mut sorted = flows.clone();
        sorted.sort();
        assert_eq!(flows, sorted);
    }

    proptest! {
        #[test]
        fn matches_brute_force(mask in 0u32..(1 << 12), max_total in 0usize..5) {
            let all: Vec<(usize, usize)> =
                (0..4).flat_map(|x| (0..4).filter(move |&y| y != x).map(move |y| (x, y))).collect();
            let edges: Vec<(usize, usize)> =
                all.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &e)| e).collect();
            // Brute force is exponential in the edge count; keep it small.
            prop_assume!(edges.len() <= 7);
            prop_assert_eq!(collect(4, &edges, max_total), brute_force(4, &edges, max_total));
        }
    }
}
