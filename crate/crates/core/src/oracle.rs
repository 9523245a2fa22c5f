//! Brute-force cross-checks: a dense cyclic-Jacobi eigensolver, spectra of
//! periodic finite sections, and their comparison with the union of `J_a`
//! spectra at the discrete quasimomenta `t_j = 2πj/L`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{a_of_t, eigenvalues, JacobiMatrix, DEFAULT_TOL};
use crate::lattice::{Boundary, RibbonHamiltonian, RibbonParams};

pub const MAX_SWEEPS: usize = 50;
pub const DENSE_SIZE_GUARD: usize = 10_000;
/// Largest periodic section handed to the dense solver.
pub const ORACLE_SIZE_CAP: usize = 500;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.n + j] = x;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn off_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.get(i, j).powi(2);
                }
            }
        }
        s.sqrt()
    }

    fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
pub fn dense_symmetric_eig(m: &DenseMatrix) -> Result<Vec<f64>> {
    let n = m.dim();
    if n > DENSE_SIZE_GUARD {
        return Err(Error::SizeCap {
            rows: n,
            cap: DENSE_SIZE_GUARD,
        });
    }
    let norm = m.frobenius();
    let deviation = m.asymmetry();
    if deviation > 1e-12 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Asymmetric { deviation });
    }
    let mut a = m.clone();
    for i in 0..n {
        for j in i + 1..n {
            let x = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, x);
            a.set(j, i, x);
        }
    }

    let target = 1e-12 * norm;
    let mut sweeps = 0;
    while a.off_norm() > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::SweepCap { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Annihilate `a[p][q]` with a symmetric two-sided rotation.
fn rotate(a: &mut DenseMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.dim();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a.get(r, p);
        let arq = a.get(r, q);
        let new_p = c * arp - s * arq;
        let new_q = s * arp + c * arq;
        a.set(r, p, new_p);
        a.set(p, r, new_p);
        a.set(r, q, new_q);
        a.set(q, r, new_q);
    }
    a.set(p, p, a.get(p, p) - t * apq);
    a.set(q, q, a.get(q, q) + t * apq);
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
}

/// Spectrum of the periodic section with `cells` cells.
pub fn periodic_ribbon_spectrum(params: &RibbonParams, cells: usize) -> Result<Vec<f64>> {
    let h = RibbonHamiltonian::build_with_cap(params, cells, Boundary::Periodic, ORACLE_SIZE_CAP)?;
    dense_symmetric_eig(&DenseMatrix::from_rows(&h.to_dense())?)
}

/// `∪_j spec J_{a(t_j)}`, `t_j = 2πj/L`, with multiplicity.
pub fn bloch_union_spectrum(params: &RibbonParams, cells: usize) -> Result<Vec<f64>> {
    bloch_union_spectrum_with(params, cells, JacobiMatrix::new)
}

/// As [`bloch_union_spectrum`] with a caller-supplied `J_a` builder.
pub fn bloch_union_spectrum_with<B>(params: &RibbonParams, cells: usize, build: B) -> Result<Vec<f64>>
where
    B: Fn(&RibbonParams, f64) -> Result<JacobiMatrix>,
{
    if cells < 3 {
        return Err(Error::TooFewCells {
            cells,
            min: 3,
            boundary: "periodic",
        });
    }
    let mut out = Vec::with_capacity(cells * params.p());
    for j in 0..cells {
        let a = a_of_t(2.0 * PI * j as f64 / cells as f64);
        out.extend(eigenvalues(&build(params, a)?, DEFAULT_TOL)?.into_values());
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultisetReport {
    pub max_pairwise_deviation: f64,
    pub unmatched_count: usize,
    pub size: usize,
}

/// Pair the sorted lists index by index. A pair further apart than `tol`
/// leaves both members unmatched, and surplus elements of the longer list
/// are unmatched too.
pub fn compare_multisets(a: &[f64], b: &[f64], tol: f64) -> MultisetReport {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let mut worst: f64 = 0.0;
    let mut unmatched = x.len().abs_diff(y.len());
    for (p, q) in x.iter().zip(&y) {
        let d = (p - q).abs();
        worst = worst.max(d);
        if !(d <= tol) {
            unmatched += 2;
        }
    }
    MultisetReport {
        max_pairwise_deviation: worst,
        unmatched_count: unmatched,
        size: x.len().max(y.len()),
    }
}
