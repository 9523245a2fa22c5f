//! Band functions `λ_k(a)`, band intervals `σ_k = λ_k([0, 2])`, gaps and
//! coverage counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{
    band_position, c_k, eigenvalue_at, eigenvalues, s_k, unperturbed_eigenvalue, JacobiMatrix, FINE_TOL,
};
use crate::lattice::RibbonParams;
use crate::search::{check_grid, refine_extrema, uniform_grid, Extremum, DEFAULT_GRID_POINTS, REFINE_TOL};

/// `λ_k(a)` for one band.
pub fn band_value(k: i64, params: &RibbonParams, a: f64) -> Result<f64> {
    let pos = band_position(k, params.width())?;
    eigenvalue_at(&JacobiMatrix::new(params, a)?, pos, FINE_TOL)
}

/// `λ_k` sampled on `grid`.
pub fn band_function(k: i64, params: &RibbonParams, grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(grid)?;
    grid.iter().map(|&a| band_value(k, params, a)).collect()
}

/// Refined `(min, max)` of `λ_k` over `[0, 2]` starting from a grid.
pub fn band_extrema(k: i64, params: &RibbonParams, grid: &[f64]) -> Result<(Extremum, Extremum)> {
    let samples = band_function(k, params, grid)?;
    refine_extrema(grid, &samples, |a| band_value(k, params, a), REFINE_TOL)
}

/// `σ_k = [min λ_k, max λ_k]` on the default grid.
pub fn band_interval(k: i64, params: &RibbonParams) -> Result<(f64, f64)> {
    let (lo, hi) = band_extrema(k, params, &uniform_grid(DEFAULT_GRID_POINTS)?)?;
    Ok((lo.value, hi.value))
}

/// All band functions on a grid, with refined extrema.
#[derive(Debug, Clone)]
pub struct BandTable {
    pub params: RibbonParams,
    pub grid: Vec<f64>,
    /// `values[k + N][i] = λ_k(grid[i])`.
    pub values: Vec<Vec<f64>>,
    /// `(min, max)` per band, same indexing as `values`.
    pub extrema: Vec<(Extremum, Extremum)>,
}

impl BandTable {
    pub fn compute(params: &RibbonParams, grid: &[f64]) -> Result<Self> {
        check_grid(grid)?;
        let p = params.p();
        let mut values = vec![Vec::with_capacity(grid.len()); p];
        for &a in grid {
            let e = eigenvalues(&JacobiMatrix::new(params, a)?, FINE_TOL)?;
            for (row, &x) in values.iter_mut().zip(e.values()) {
                row.push(x);
            }
        }
        let n = params.width() as i64;
        let extrema = (-n..=n)
            .zip(&values)
            .map(|(k, samples)| refine_extrema(grid, samples, |a| band_value(k, params, a), REFINE_TOL))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: params.clone(),
            grid: grid.to_vec(),
            values,
            extrema,
        })
    }

    pub fn band(&self, k: i64) -> &[f64] {
        &self.values[(k + self.params.width() as i64) as usize]
    }

    pub fn interval(&self, k: i64) -> (f64, f64) {
        let (lo, hi) = self.extrema[(k + self.params.width() as i64) as usize];
        (lo.value, hi.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub k: i64,
    pub lo: f64,
    pub hi: f64,
    pub is_flat: bool,
    /// Energy of a flat band, `None` for a dispersive one.
    pub value: Option<f64>,
}

/// Interval of the spectrum covered by `count` bands of `J_a`. Inside
/// `0 < a < 2` each band value is reached at two quasimomenta `±t`, so the
/// multiplicity of the full operator there is twice `count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub bands: Vec<Band>,
    /// Open intervals of the hull `[min lo, max hi]` met by no dispersive band.
    /// A flat band may sit inside a gap.
    pub gaps: Vec<(f64, f64)>,
    pub multiplicity_windows: Vec<Window>,
    pub flat_tol: f64,
}

impl SpectrumReport {
    pub fn from_intervals(intervals: Vec<(i64, f64, f64)>, flat_tol: f64) -> Self {
        let mut bands: Vec<Band> = intervals
            .into_iter()
            .map(|(k, lo, hi)| {
                let is_flat = hi - lo <= flat_tol;
                Band {
                    k,
                    lo,
                    hi,
                    is_flat,
                    value: is_flat.then_some(0.5 * (lo + hi)),
                }
            })
            .collect();
        bands.sort_by_key(|b| b.k);
        let gaps = gaps_of(&bands);
        let multiplicity_windows = windows_of(&bands);
        Self {
            bands,
            gaps,
            multiplicity_windows,
            flat_tol,
        }
    }

    pub fn band(&self, k: i64) -> Option<&Band> {
        self.bands.iter().find(|b| b.k == k)
    }

    pub fn hull(&self) -> (f64, f64) {
        hull_of(&self.bands)
    }
}

fn hull_of(bands: &[Band]) -> (f64, f64) {
    bands.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
        (lo.min(b.lo), hi.max(b.hi))
    })
}

fn gaps_of(bands: &[Band]) -> Vec<(f64, f64)> {
    let (hull_lo, hull_hi) = hull_of(bands);
    let mut spans: Vec<(f64, f64)> = bands.iter().filter(|b| !b.is_flat).map(|b| (b.lo, b.hi)).collect();
    spans.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut gaps = Vec::new();
    let mut reach = hull_lo;
    for (lo, hi) in spans {
        if lo > reach {
            gaps.push((reach, lo));
        }
        reach = reach.max(hi);
    }
    if hull_hi > reach {
        gaps.push((reach, hull_hi));
    }
    gaps
}

fn windows_of(bands: &[Band]) -> Vec<Window> {
    let covers = |x: f64| bands.iter().filter(|b| b.lo <= x && x <= b.hi).count();
    let mut cuts: Vec<f64> = bands.iter().flat_map(|b| [b.lo, b.hi]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let count = bands.iter().filter(|b| !b.is_flat && b.lo <= mid && mid <= b.hi).count();
        if count > 0 {
            out.push(Window {
                lo: w[0],
                hi: w[1],
                count,
            });
        }
    }
    for b in bands.iter().filter(|b| b.is_flat) {
        out.push(Window {
            lo: b.lo,
            hi: b.hi,
            count: covers(0.5 * (b.lo + b.hi)),
        });
    }
    out.sort_by(|x, y| x.lo.total_cmp(&y.lo).then(x.hi.total_cmp(&y.hi)));
    out
}

/// `1e−10 · max(1, ‖v‖)`.
pub fn default_flat_tol(params: &RibbonParams) -> f64 {
    1e-10 * params.norm().max(1.0)
}

pub fn spectrum_report(params: &RibbonParams, grid: &[f64], flat_tol: Option<f64>) -> Result<SpectrumReport> {
    let table = BandTable::compute(params, grid)?;
    Ok(report_from_table(&table, flat_tol))
}

pub fn report_from_table(table: &BandTable, flat_tol: Option<f64>) -> SpectrumReport {
    let n = table.params.width() as i64;
    let tol = flat_tol.unwrap_or_else(|| default_flat_tol(&table.params));
    let intervals = (-n..=n)
        .map(|k| {
            let (lo, hi) = table.interval(k);
            (k, lo, hi)
        })
        .collect();
    SpectrumReport::from_intervals(intervals, tol)
}

/// Exact test: every odd-row potential equals `v₁`.
pub fn flat_band_criterion(params: &RibbonParams) -> bool {
    first_flat_violation(params).is_none()
}

/// First odd row `2k + 1` whose potential differs from `v₁`.
pub fn first_flat_violation(params: &RibbonParams) -> Option<usize> {
    let v1 = params.v(1);
    (1..=params.width()).map(|k| 2 * k + 1).find(|&row| params.v(row) != v1)
}

/// Closed-form `σ_k⁰` at zero potential: `[s_k, λ_k⁰(2)]` if `c_k ≥ 0`,
/// `[1, λ_k⁰(2)]` otherwise, mirrored for negative `k`; `σ₀ = {0}`.
pub fn unperturbed_interval(k: i64, width: usize) -> Result<(f64, f64)> {
    band_position(k, width)?;
    if k == 0 {
        return Ok((0.0, 0.0));
    }
    let m = k.abs();
    let top = unperturbed_eigenvalue(m, 2.0, width);
    let bottom = if c_k(m, width) >= 0.0 { s_k(m, width) } else { 1.0 };
    Ok(if k > 0 { (bottom, top) } else { (-top, -bottom) })
}

pub fn unperturbed_spectrum(width: usize) -> Result<SpectrumReport> {
    if width == 0 {
        return Err(Error::ZeroWidth);
    }
    let n = width as i64;
    let intervals = (-n..=n)
        .map(|k| unperturbed_interval(k, width).map(|(lo, hi)| (k, lo, hi)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumReport::from_intervals(intervals, 1e-10))
}
