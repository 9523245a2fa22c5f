//! The tridiagonal family `J_a`, `a ∈ [0, 2]`.
//!
//! `J_a` has diagonal `v` and off-diagonal `(a, 1, a, 1, …, a, 1)`. The
//! quasimomentum `t` enters only through `a = 2|cos(t/2)|`.

mod sturm;
mod transfer;

pub use sturm::{eigenvalue_at, eigenvalues, sturm_count, DEFAULT_TOL, FINE_TOL, MAX_BISECTION_STEPS};
pub use transfer::{
    char_poly_r, fundamental_solutions, monodromy, transfer_matrix, FundamentalSolutions, Monodromy,
};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::RibbonParams;

/// `2|cos(t/2)|` with `t` reduced modulo `2π`.
pub fn a_of_t(t: f64) -> f64 {
    let t = t.rem_euclid(2.0 * PI);
    (2.0 * (0.5 * t).cos().abs()).min(2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiMatrix {
    a: f64,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl JacobiMatrix {
    pub fn new(params: &RibbonParams, a: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&a) {
            return Err(Error::HoppingOutOfRange(a));
        }
        let p = params.p();
        let offdiag = (0..p - 1).map(|j| if j % 2 == 0 { a } else { 1.0 }).collect();
        Ok(Self {
            a,
            diag: params.potential().to_vec(),
            offdiag,
        })
    }

    /// Arbitrary symmetric tridiagonal matrix. `a` is recorded as `offdiag[0]`.
    pub fn from_parts(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len().saturating_sub(1),
                found: offdiag.len(),
            });
        }
        Ok(Self {
            a: offdiag.first().copied().unwrap_or(0.0),
            diag,
            offdiag,
        })
    }

    pub fn p(&self) -> usize {
        self.diag.len()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn is_decoupled(&self) -> bool {
        self.offdiag.iter().step_by(2).all(|&x| x == 0.0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let p = self.p();
        let mut m = vec![vec![0.0; p]; p];
        for i in 0..p {
            m[i][i] = self.diag[i];
        }
        for (i, &e) in self.offdiag.iter().enumerate() {
            m[i][i + 1] = e;
            m[i + 1][i] = e;
        }
        m
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let p = self.p();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..p {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < p { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }
}

/// Eigenvalues of `J_a` sorted ascending, addressed by band index `k ∈ -N..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenList {
    values: Vec<f64>,
}

impl EigenList {
    pub fn from_sorted(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn width(&self) -> usize {
        self.values.len() / 2
    }

    /// `λ_k`, stored at position `k + N`.
    pub fn band(&self, k: i64) -> f64 {
        self.values[(k + self.width() as i64) as usize]
    }
}

/// Position of band `k` in an ascending list of length `2N + 1`.
pub fn band_position(k: i64, width: usize) -> Result<usize> {
    if k.unsigned_abs() as usize > width {
        return Err(Error::BandIndex { k, n: width });
    }
    Ok((k + width as i64) as usize)
}

/// `cos(kπ/(N+1))`.
pub fn c_k(k: i64, width: usize) -> f64 {
    (k as f64 * PI / (width + 1) as f64).cos()
}

/// `sin(kπ/(N+1))`, exactly zero when `N + 1` divides `k`.
pub fn s_k(k: i64, width: usize) -> f64 {
    if k.rem_euclid(width as i64 + 1) == 0 {
        0.0
    } else {
        (k as f64 * PI / (width + 1) as f64).sin()
    }
}

/// `λ_k⁰(a) = sign(k) √(a² − 2a c_k + 1)` at zero potential.
pub fn unperturbed_eigenvalue(k: i64, a: f64, width: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let c = c_k(k.abs(), width);
    let s = s_k(k.abs(), width);
    let r = ((a - c) * (a - c) + s * s).sqrt();
    if k > 0 {
        r
    } else {
        -r
    }
}

/// Spectrum of `J_0 = (v₁) ⊕ [[v₂, 1], [1, v₃]] ⊕ …`, sorted ascending.
pub fn decoupled_eigenvalues(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    out.push(v[0]);
    for pair in v[1..].chunks_exact(2) {
        let mean = 0.5 * (pair[0] + pair[1]);
        let half = 0.5 * (pair[0] - pair[1]);
        let r = half.hypot(1.0);
        out.push(mean - r);
        out.push(mean + r);
    }
    out.sort_by(f64::total_cmp);
    out
}
