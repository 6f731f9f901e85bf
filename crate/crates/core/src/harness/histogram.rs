use serde::Serialize;

use crate::error::Result;

/// Stick-breaking coordinates of a point of the simplex: `u_i` is `l_i`
/// over the mass left after `l_1, ..., l_{i-1}`. The last coordinate is the
/// eliminated one. Each `u_i` lies in `(0, 1)`.
pub fn to_stick(l: &[f64], total: f64) -> Vec<f64> {
    let mut rest = total;
    let mut u = Vec::with_capacity(l.len().saturating_sub(1));
    for &v in &l[..l.len() - 1] {
        u.push((v / rest).clamp(0.0, 1.0));
        rest -= v;
    }
    u
}

/// Inverse of [`to_stick`].
pub fn from_stick(u: &[f64], total: f64) -> Vec<f64> {
    let mut rest = total;
    let mut l = Vec::with_capacity(u.len() + 1);
    for &ui in u {
        l.push(rest * ui);
        rest *= 1.0 - ui;
    }
    l.push(rest);
    l
}

/// `|d(l_1, ..., l_{k-1}) / du|`.
pub fn stick_jacobian(u: &[f64], total: f64) -> f64 {
    let mut j = 1.0;
    let mut rest = total;
    for &ui in u {
        j *= rest;
        rest *= 1.0 - ui;
    }
    j
}

/// Equal-width cell of `[0, 1]^d` in stick coordinates.
pub fn cell_of(u: &[f64], bins: usize) -> usize {
    u.iter().fold(0, |acc, &ui| acc * bins + ((ui * bins as f64) as usize).min(bins - 1))
}

fn cell_corner(index: usize, bins: usize, dim: usize) -> Vec<usize> {
    let mut c = vec![0; dim];
    let mut r = index;
    for slot in c.iter_mut().rev() {
        *slot = r % bins;
        r /= bins;
    }
    c
}

/// Integral of a density over one cell: midpoint, four-way (per axis two-way)
/// refined midpoint, and their Richardson combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellMass {
    pub coarse: f64,
    pub fine: f64,
    pub value: f64,
    /// Coarse and fine differ by more than 1% of the cell mass.
    pub flagged: bool,
}

/// Integrate `rho` (a function of the full local-time vector) over cell
/// `index` of the `bins^(k-1)` stick-breaking grid.
pub fn cell_mass<F>(rho: &F, index: usize, bins: usize, dim: usize, total: f64) -> Result<CellMass>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let corner = cell_corner(index, bins, dim);
    let h = 1.0 / bins as f64;
    let eval = |u: &[f64]| -> Result<f64> { Ok(rho(&from_stick(u, total))? * stick_jacobian(u, total)) };
    let centre: Vec<f64> = corner.iter().map(|&c| (c as f64 + 0.5) * h).collect();
    let volume = h.powi(dim as i32);
    let coarse = eval(&centre)? * volume;
    let mut fine = 0.0;
    for sub in 0..(1usize << dim) {
        let u: Vec<f64> =
            corner.iter().enumerate().map(|(i, &c)| (c as f64 + 0.25 + 0.5 * ((sub >> i) & 1) as f64) * h).collect();
        fine += eval(&u)?;
    }
    fine *= volume / (1usize << dim) as f64;
    let value = (4.0 * fine - coarse) / 3.0;
    let flagged = (fine - coarse).abs() > 0.01 * fine.abs().max(coarse.abs());
    Ok(CellMass { coarse, fine, value, flagged })
}
