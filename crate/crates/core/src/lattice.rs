//! Real-space zigzag nanoribbon.
//!
//! Sites are labelled `(n, k)` with `n` the cell along the ribbon axis and
//! `k = 1..=p` the row across it, `p = 2N + 1`. Rows `0` and `p + 1` are the
//! Dirichlet rows and are never stored. The tight-binding Laplacian couples
//!
//! ```text
//! (Δf)_{n,2k+1} = f_{n,2k} + f_{n-1,2k+2} + f_{n,2k+2}
//! (Δf)_{n,2k}   = f_{n,2k-1} + f_{n+1,2k-1} + f_{n,2k+1}
//! ```
//!
//! and the transverse potential acts as `(Vf)_{n,k} = v_k f_{n,k}`.
//!
//! # Storage
//!
//! A finite section of `L` cells is stored row-major by cell: site `(n, k)`
//! lives at flat index `n * p + (k - 1)`. [`site_index`] is the only place this
//! bijection is written down; everything else goes through it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Largest finite section (in rows) that [`RibbonHamiltonian::build`] accepts.
pub const DEFAULT_SIZE_CAP: usize = 10_000;

/// Flat index of site `(cell, row)` with `row` in `1..=p`.
#[inline]
pub fn site_index(p: usize, cell: usize, row: usize) -> usize {
    debug_assert!((1..=p).contains(&row));
    cell * p + (row - 1)
}

/// Ribbon width and transverse potential.
#[derive(Debug, Clone, PartialEq)]
pub struct RibbonParams {
    width: usize,
    potential: Vec<f64>,
}

impl RibbonParams {
    /// `width` is N (hexagon rows); `potential` must have `2N + 1` finite entries.
    pub fn new(width: usize, potential: Vec<f64>) -> Result<Self> {
        if width == 0 {
            return Err(Error::ZeroWidth);
        }
        let expected = 2 * width + 1;
        if potential.len() != expected {
            return Err(Error::PotentialLength {
                expected,
                found: potential.len(),
            });
        }
        if let Some(i) = potential.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinitePotential { index: i + 1 });
        }
        Ok(Self { width, potential })
    }

    pub fn zero(width: usize) -> Result<Self> {
        Self::new(width, vec![0.0; 2 * width + 1])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// Chain length per cell, `2N + 1`.
    #[inline]
    pub fn p(&self) -> usize {
        2 * self.width + 1
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// `v_k` with the 1-based row label.
    #[inline]
    pub fn v(&self, row: usize) -> f64 {
        self.potential[row - 1]
    }

    /// Euclidean norm of the potential.
    pub fn norm(&self) -> f64 {
        self.potential.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Same width, potential multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            width: self.width,
            potential: self.potential.iter().map(|x| x * factor).collect(),
        }
    }

    /// Same width, potential shifted by `shift` on every row.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            width: self.width,
            potential: self.potential.iter().map(|x| x + shift).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Cell `L - 1` is glued back to cell `0`.
    Periodic,
    /// Axial couplings leaving the section are dropped.
    Open,
}

impl Boundary {
    fn min_cells(self) -> usize {
        match self {
            Boundary::Periodic => 3,
            Boundary::Open => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        }
    }
}

/// Wavefunction on a finite section.
#[derive(Debug, Clone, PartialEq)]
pub struct RibbonState {
    p: usize,
    cells: usize,
    boundary: Boundary,
    values: Vec<f64>,
}

impl RibbonState {
    pub fn zeros(p: usize, cells: usize, boundary: Boundary) -> Self {
        Self {
            p,
            cells,
            boundary,
            values: vec![0.0; p * cells],
        }
    }

    pub fn from_values(p: usize, cells: usize, boundary: Boundary, values: Vec<f64>) -> Result<Self> {
        if values.len() != p * cells {
            return Err(Error::DimensionMismatch {
                expected: p * cells,
                found: values.len(),
            });
        }
        Ok(Self {
            p,
            cells,
            boundary,
            values,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, cell: usize, row: usize) -> f64 {
        self.values[site_index(self.p, cell, row)]
    }

    pub fn set(&mut self, cell: usize, row: usize, value: f64) {
        self.values[site_index(self.p, cell, row)] = value;
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Sparse symmetric Hamiltonian `Δ + V` on a finite section, stored as
/// compressed rows.
#[derive(Debug, Clone)]
pub struct RibbonHamiltonian {
    p: usize,
    cells: usize,
    boundary: Boundary,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl RibbonHamiltonian {
    pub fn build(params: &RibbonParams, cells: usize, boundary: Boundary) -> Result<Self> {
        Self::build_with_cap(params, cells, boundary, DEFAULT_SIZE_CAP)
    }

    pub fn build_with_cap(
        params: &RibbonParams,
        cells: usize,
        boundary: Boundary,
        cap: usize,
    ) -> Result<Self> {
        let min = boundary.min_cells();
        if cells < min {
            return Err(Error::TooFewCells {
                cells,
                min,
                boundary: boundary.name(),
            });
        }
        let p = params.p();
        let rows = cells
            .checked_mul(p)
            .ok_or(Error::SizeCap { rows: usize::MAX, cap })?;
        if rows > cap {
            return Err(Error::SizeCap { rows, cap });
        }

        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for n in 0..cells {
            for k in 1..=p {
                let i = site_index(p, n, k);
                adjacency[i].push((i, params.v(k)));
            }
        }
        let mut link = |a: usize, b: usize| {
            adjacency[a].push((b, 1.0));
            adjacency[b].push((a, 1.0));
        };
        // Every edge touches exactly one even row, so enumerating the three
        // bonds of each even site lists each edge once.
        for n in 0..cells {
            for k in 1..=params.width() {
                let even = site_index(p, n, 2 * k);
                link(even, site_index(p, n, 2 * k - 1));
                link(even, site_index(p, n, 2 * k + 1));
                let next = match boundary {
                    Boundary::Periodic => Some((n + 1) % cells),
                    Boundary::Open => (n + 1 < cells).then_some(n + 1),
                };
                if let Some(m) = next {
                    link(even, site_index(p, m, 2 * k - 1));
                }
            }
        }

        let mut row_start = Vec::with_capacity(rows + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for mut entries in adjacency {
            entries.sort_by_key(|&(c, _)| c);
            for (c, x) in entries {
                cols.push(c);
                vals.push(x);
            }
            row_start.push(cols.len());
        }
        Ok(Self {
            p,
            cells,
            boundary,
            row_start,
            cols,
            vals,
        })
    }

    pub fn dim(&self) -> usize {
        self.p * self.cells
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Stored entries of row `i` as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_start[i]..self.row_start[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).filter(|&(c, _)| c == j).map(|(_, x)| x).sum()
    }

    /// Number of undirected nearest-neighbour bonds.
    pub fn edge_count(&self) -> usize {
        (0..self.dim())
            .map(|i| self.row(i).filter(|&(c, x)| c > i && x != 0.0).count())
            .sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim()).all(|i| self.row(i).all(|(j, x)| self.get(j, i) == x))
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in self.row(i) {
                row[j] += x;
            }
        }
        m
    }

    pub fn apply(&self, f: &RibbonState) -> Result<RibbonState> {
        if f.p != self.p || f.cells != self.cells {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: f.values.len(),
            });
        }
        let values = (0..self.dim())
            .map(|i| self.row(i).map(|(j, x)| x * f.values[j]).sum())
            .collect();
        Ok(RibbonState {
            p: self.p,
            cells: self.cells,
            boundary: self.boundary,
            values,
        })
    }
}

/// Binomial coefficient in exact integer arithmetic.
pub fn binomial(n: u64, k: u64) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as i128 / (j + 1) as i128;
    }
    acc as i64
}

/// Compactly supported flat-band eigenfunction anchored at cell `m`.
///
/// Odd row `2k + 1` carries `(-I - S)^k e_m` with `(Sh)_n = h_{n+1}`, so
/// `S e_m = e_{m-1}` and the row reads `(-1)^k C(k, j)` at cell `m - j`.
/// Even rows vanish.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatBandVector {
    width: usize,
    anchor: i64,
    // rows[k][j] is the coefficient at cell anchor - j on row 2k + 1.
    rows: Vec<Vec<i64>>,
}

impl FlatBandVector {
    pub fn new(width: usize, anchor: i64) -> Self {
        let rows = (0..=width as u64)
            .map(|k| {
                let sign = if k % 2 == 0 { 1 } else { -1 };
                (0..=k).map(|j| sign * binomial(k, j)).collect()
            })
            .collect();
        Self {
            width,
            anchor,
            rows,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    /// Inclusive cell range carrying nonzero amplitude.
    pub fn support(&self) -> (i64, i64) {
        (self.anchor - self.width as i64, self.anchor)
    }

    /// Coefficient at `(cell, row)` with 1-based `row`.
    pub fn coefficient(&self, cell: i64, row: usize) -> i64 {
        if row == 0 || row % 2 == 0 || row > 2 * self.width + 1 {
            return 0;
        }
        let j = self.anchor - cell;
        self.rows[(row - 1) / 2]
            .get(usize::try_from(j).unwrap_or(usize::MAX))
            .copied()
            .unwrap_or(0)
    }

    /// Nonzero entries of odd row `2k + 1` as `(cell, coefficient)`, anchor first.
    pub fn row_entries(&self, k: usize) -> Vec<(i64, i64)> {
        self.rows[k]
            .iter()
            .enumerate()
            .map(|(j, &c)| (self.anchor - j as i64, c))
            .collect()
    }

    fn check_fits(&self, cells: usize, boundary: Boundary) -> Result<()> {
        let (lo, hi) = self.support();
        if boundary == Boundary::Open && (lo < 0 || hi >= cells as i64) {
            return Err(Error::SupportTouchesBoundary { lo, hi, cells });
        }
        Ok(())
    }

    /// Integer amplitudes on a finite section; periodic sections wrap the support.
    pub fn to_integer_grid(&self, cells: usize, boundary: Boundary) -> Result<Vec<i64>> {
        self.check_fits(cells, boundary)?;
        let p = 2 * self.width + 1;
        let mut out = vec![0i64; p * cells];
        for (k, row) in self.rows.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                let cell = (self.anchor - j as i64).rem_euclid(cells as i64) as usize;
                out[site_index(p, cell, 2 * k + 1)] += c;
            }
        }
        Ok(out)
    }

    pub fn to_state(&self, cells: usize, boundary: Boundary) -> Result<RibbonState> {
        let grid = self.to_integer_grid(cells, boundary)?;
        RibbonState::from_values(
            2 * self.width + 1,
            cells,
            boundary,
            grid.into_iter().map(|c| c as f64).collect(),
        )
    }

    /// Max-norm of `Δψ` evaluated in integer arithmetic on the section.
    ///
    /// `Hψ = v₁ψ` holds exactly iff this is zero and the odd rows of the
    /// potential all equal `v₁`.
    pub fn laplacian_residual(&self, cells: usize, boundary: Boundary) -> Result<i64> {
        let psi = self.to_integer_grid(cells, boundary)?;
        let laplacian = RibbonHamiltonian::build(&RibbonParams::zero(self.width)?, cells, boundary)?;
        let mut worst = 0i64;
        for i in 0..laplacian.dim() {
            let s: i64 = laplacian.row(i).map(|(j, x)| x as i64 * psi[j]).sum();
            worst = worst.max(s.abs());
        }
        Ok(worst)
    }
}

/// Max-norm of `(H - v₁)ψ` on a section of `cells` cells, in floating point.
pub fn verify_flat_eigen(
    params: &RibbonParams,
    psi: &FlatBandVector,
    cells: usize,
    boundary: Boundary,
) -> Result<f64> {
    if psi.width() != params.width() {
        return Err(Error::DimensionMismatch {
            expected: params.p(),
            found: 2 * psi.width() + 1,
        });
    }
    let state = psi.to_state(cells, boundary)?;
    let h = RibbonHamiltonian::build(params, cells, boundary)?;
    let hf = h.apply(&state)?;
    let v1 = params.v(1);
    Ok(hf
        .values
        .iter()
        .zip(&state.values)
        .fold(0.0, |m, (a, b)| m.max((a - v1 * b).abs())))
}

/// Coordinates of a flat-band state in the basis `{ψ^m}`: `ĥ_m = f_{m,1}`.
pub fn expand_in_flat_basis(params: &RibbonParams, f: &RibbonState) -> Result<BTreeMap<i64, f64>> {
    if f.p != params.p() {
        return Err(Error::DimensionMismatch {
            expected: params.p(),
            found: f.p,
        });
    }
    let h = RibbonHamiltonian::build(params, f.cells, f.boundary)?;
    let hf = h.apply(f)?;
    let v1 = params.v(1);
    let residual = hf
        .values
        .iter()
        .zip(&f.values)
        .fold(0.0, |m: f64, (a, b)| m.max((a - v1 * b).abs()));
    let scale = f.max_norm();
    if residual > 1e-10 * scale {
        return Err(Error::NotInEigenspace {
            residual: if scale > 0.0 { residual / scale } else { residual },
        });
    }
    Ok((0..f.cells)
        .filter_map(|m| {
            let c = f.get(m, 1);
            (c != 0.0).then_some((m as i64, c))
        })
        .collect())
}

/// `Σ ĥ_m ψ^m` on a finite section. Open sections truncate each `ψ^m` to
/// the cells that exist; periodic sections wrap it.
pub fn reconstruct_from_flat_basis(
    width: usize,
    coefficients: &BTreeMap<i64, f64>,
    cells: usize,
    boundary: Boundary,
) -> RibbonState {
    let p = 2 * width + 1;
    let mut out = RibbonState::zeros(p, cells, boundary);
    for (&m, &c) in coefficients {
        let psi = FlatBandVector::new(width, m);
        for k in 0..=width {
            for (cell, coef) in psi.row_entries(k) {
                let idx = match boundary {
                    Boundary::Periodic => Some(cell.rem_euclid(cells as i64) as usize),
                    Boundary::Open => (0..cells as i64).contains(&cell).then_some(cell as usize),
                };
                if let Some(n) = idx {
                    out.values[site_index(p, n, 2 * k + 1)] += c * coef as f64;
                }
            }
        }
    }
    out
}
