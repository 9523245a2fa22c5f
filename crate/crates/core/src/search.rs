//! Grid scan plus golden-section refinement of extrema on `[0, 2]`.

use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 401;

/// Resolution in `a` of refined extrema.
pub const REFINE_TOL: f64 = 1e-10;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Extremum {
    pub a: f64,
    pub value: f64,
}

/// `n` equally spaced points from 0 to 2, endpoints included.
pub fn uniform_grid(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidGrid);
    }
    let last = (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i + 1 == n { 2.0 } else { 2.0 * i as f64 / last })
        .collect())
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    let ordered = grid.windows(2).all(|w| w[0] < w[1]);
    let inside = grid.iter().all(|&a| (0.0..=2.0).contains(&a));
    if grid.len() < 2 || !ordered || !inside {
        return Err(Error::InvalidGrid);
    }
    Ok(())
}

/// Minimum of `f` on `[lo, hi]` by golden-section search down to width `tol`.
///
/// The endpoints are evaluated too, so a monotone `f` returns its boundary value.
pub fn golden_min<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Extremum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut x0, mut x3) = (lo, hi);
    let mut x1 = x3 - INV_PHI * (x3 - x0);
    let mut x2 = x0 + INV_PHI * (x3 - x0);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while x3 - x0 > tol {
        if f1 <= f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - INV_PHI * (x3 - x0);
            f1 = f(x1)?;
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + INV_PHI * (x3 - x0);
            f2 = f(x2)?;
        }
    }
    let mut best = if f1 <= f2 {
        Extremum { a: x1, value: f1 }
    } else {
        Extremum { a: x2, value: f2 }
    };
    for x in [lo, hi] {
        let fx = f(x)?;
        if fx < best.value {
            best = Extremum { a: x, value: fx };
        }
    }
    Ok(best)
}

pub fn golden_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Extremum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let e = golden_min(|x| f(x).map(|y| -y), lo, hi, tol)?;
    Ok(Extremum {
        a: e.a,
        value: -e.value,
    })
}

/// Refined `(min, max)` of `f`, given its samples on `grid`.
///
/// Each extremum is refined inside the two grid cells around the sampled
/// argmin/argmax; the sample itself wins if refinement does not improve it.
pub fn refine_extrema<F>(grid: &[f64], samples: &[f64], mut f: F, tol: f64) -> Result<(Extremum, Extremum)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if grid.len() != samples.len() || grid.len() < 2 {
        return Err(Error::InvalidGrid);
    }
    let n = grid.len();
    let bracket = |i: usize| (grid[i.saturating_sub(1)], grid[(i + 1).min(n - 1)]);

    let imin = (0..n).min_by(|&i, &j| samples[i].total_cmp(&samples[j])).unwrap();
    let imax = (0..n).max_by(|&i, &j| samples[i].total_cmp(&samples[j])).unwrap();

    let (lo, hi) = bracket(imin);
    let mut min = golden_min(&mut f, lo, hi, tol)?;
    if samples[imin] < min.value {
        min = Extremum {
            a: grid[imin],
            value: samples[imin],
        };
    }
    let (lo, hi) = bracket(imax);
    let mut max = golden_max(&mut f, lo, hi, tol)?;
    if samples[imax] > max.value {
        max = Extremum {
            a: grid[imax],
            value: samples[imax],
        };
    }
    Ok((min, max))
}
