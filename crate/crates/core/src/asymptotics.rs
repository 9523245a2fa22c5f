//! Closed-form perturbative predictions for the band edges.
//!
//! * weak field: the middle band follows `F(a, v)`, a weighted mean of the
//!   odd-row potentials, to first order in `‖v‖`;
//! * first-order corrections to the inner and outer edges of `σ_k`;
//! * the constant-field family `v_{2k+1} = εk`;
//! * strong field `Δ + tV`, `t → ∞`, by second-order perturbation in `1/t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{c_k, s_k};
use crate::lattice::RibbonParams;
use crate::search::{check_grid, refine_extrema, Extremum, REFINE_TOL};

/// `F(a, v) = Σ v_{2k+1} a^{2k} / Σ a^{2k}`, `k = 0..=N`, by Horner in `a²`.
pub fn weak_field_f(a: f64, params: &RibbonParams) -> f64 {
    let z = a * a;
    let (mut num, mut den) = (0.0, 0.0);
    for k in (0..=params.width()).rev() {
        num = num * z + params.v(2 * k + 1);
        den = den * z + 1.0;
    }
    num / den
}

/// The same function written as
/// `v_p − Σ_{k=1}^{N} (v_{2k+1} − v_{2k−1}) S_k / S_{N+1}`, `S_m = Σ_{j<m} a^{2j}`.
///
/// `S_k / S_{N+1} = (a^{2k} − 1)/(a^{2(N+1)} − 1)` away from `a = 1`; the
/// partial sums keep the value finite at `a = 1`, where it is `k/(N+1)`.
pub fn f_telescoped(a: f64, params: &RibbonParams) -> f64 {
    let z = a * a;
    let n = params.width();
    let mut partial = Vec::with_capacity(n + 2);
    let (mut s, mut zj) = (0.0, 1.0);
    partial.push(0.0);
    for _ in 0..=n {
        s += zj;
        zj *= z;
        partial.push(s);
    }
    let total = partial[n + 1];
    let mut out = params.v(params.p());
    for k in 1..=n {
        out -= (params.v(2 * k + 1) - params.v(2 * k - 1)) * partial[k] / total;
    }
    out
}

/// `F(2, v) = 3 Σ 4^k v_{2k+1} / (4^{N+1} − 1)`.
pub fn weak_field_f_at_two(params: &RibbonParams) -> f64 {
    let n = params.width() as i32;
    let sum: f64 = (0..=n).map(|k| 4f64.powi(k) * params.v(2 * k as usize + 1)).sum();
    3.0 * sum / (4f64.powi(n + 1) - 1.0)
}

fn odd_rows_monotone(params: &RibbonParams) -> Option<bool> {
    let odd: Vec<f64> = (0..=params.width()).map(|k| params.v(2 * k + 1)).collect();
    if odd.windows(2).all(|w| w[0] <= w[1]) {
        Some(true)
    } else if odd.windows(2).all(|w| w[0] >= w[1]) {
        Some(false)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakFieldPrediction {
    pub samples: Vec<f64>,
    pub lo: Extremum,
    pub hi: Extremum,
    pub width: f64,
}

/// Extremes of `F` over `[0, 2]`.
///
/// When the odd-row potential is monotone in the row index, `F` is monotone
/// in `a` and the extremes sit at `a = 0` and `a = 2`.
pub fn weak_field_edges(params: &RibbonParams, grid: &[f64]) -> Result<WeakFieldPrediction> {
    check_grid(grid)?;
    let samples: Vec<f64> = grid.iter().map(|&a| weak_field_f(a, params)).collect();
    let at = |a: f64| Extremum {
        a,
        value: weak_field_f(a, params),
    };
    let (lo, hi) = match odd_rows_monotone(params) {
        Some(true) => (at(0.0), at(2.0)),
        Some(false) => (at(2.0), at(0.0)),
        None => refine_extrema(grid, &samples, |a| Ok(weak_field_f(a, params)), REFINE_TOL)?,
    };
    Ok(WeakFieldPrediction {
        samples,
        lo,
        hi,
        width: hi.value - lo.value,
    })
}

fn sign(k: i64) -> f64 {
    if k > 0 {
        1.0
    } else {
        -1.0
    }
}

/// First-order inner edge of `σ_k` (the end nearer zero), valid for
/// `0 < |k| < (N+1)/2`:
/// `s_k sign k + (1/(N+1)) Σ_{n=1}^{N+1} (c_{nk}² v_{2n−1} + s_{nk}² v_{2n})`.
///
/// The `n = N+1` even term has coefficient `sin²(kπ) = 0` and is skipped.
pub fn inner_edge_first_order(k: i64, params: &RibbonParams) -> Result<f64> {
    let n = params.width();
    let m = k.abs();
    if m == 0 || 2 * m as usize > n {
        return Err(Error::EdgeRegime { k, n });
    }
    let mut sum = 0.0;
    for j in 1..=(n + 1) as i64 {
        let c = c_k(j * m, n);
        sum += c * c * params.v(2 * j as usize - 1);
        if (j as usize) <= n {
            let s = s_k(j * m, n);
            sum += s * s * params.v(2 * j as usize);
        }
    }
    Ok(s_k(m, n) * sign(k) + sum / (n + 1) as f64)
}

/// Weights `χ_1 ..= χ_p` of the outer-edge correction for band `|k|`.
pub fn outer_edge_weights(k: i64, width: usize) -> Result<Vec<f64>> {
    let m = k.abs();
    if m == 0 || m as usize > width {
        return Err(Error::BandIndex { k, n: width });
    }
    let denom = 5.0 - 4.0 * c_k(m, width);
    let mut chi = vec![0.0; 2 * width + 1];
    for j in 0..=width as i64 {
        let d = s_k(j * m, width) - 2.0 * s_k((j + 1) * m, width);
        chi[2 * j as usize] = d * d / denom;
        if j >= 1 {
            let s = s_k(j * m, width);
            chi[2 * j as usize - 1] = s * s;
        }
    }
    Ok(chi)
}

/// First-order outer edge of `σ_k`, attained at `a = 2`:
/// `√(5 − 4c_k) sign k + (1/(N+1)) Σ χ_n v_n`.
pub fn outer_edge_first_order(k: i64, params: &RibbonParams) -> Result<f64> {
    let n = params.width();
    let chi = outer_edge_weights(k, n)?;
    let sum: f64 = chi.iter().zip(params.potential()).map(|(w, v)| w * v).sum();
    Ok((5.0 - 4.0 * c_k(k.abs(), n)).sqrt() * sign(k) + sum / (n + 1) as f64)
}

/// Exact rational with `i128` parts, kept in lowest terms with a positive
/// denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: i128,
    pub den: i128,
}

impl Ratio {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.abs(), den.abs()).max(1);
        let s = den.signum();
        Self {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn pow4(e: u32) -> i128 {
    1i128 << (2 * e)
}

/// Constant-field family: `v_{2k+1} = εk`, even rows zero.
pub fn constant_field_potential(width: usize, eps: f64) -> Result<RibbonParams> {
    let mut v = vec![0.0; 2 * width + 1];
    for k in 0..=width {
        v[2 * k] = eps * k as f64;
    }
    RibbonParams::new(width, v)
}

/// `F(2, v)/ε` for the constant-field family: `3 Σ_k k 4^k / (4^{N+1} − 1)`.
pub fn constant_field_slope(width: usize) -> Ratio {
    let n = width as u32;
    let sum: i128 = (1..=n).map(|k| k as i128 * pow4(k)).sum();
    Ratio::new(3 * sum, pow4(n + 1) - 1)
}

/// `C_p` with `σ₀ ≈ [0, 4εC_p]`: `(4^N(3N − 1) + 1) / (3(4^{N+1} − 1))`.
pub fn c_p(width: usize) -> Ratio {
    let n = width as u32;
    Ratio::new(pow4(n) * (3 * n as i128 - 1) + 1, 3 * (pow4(n + 1) - 1))
}

/// `(4N(4^N − 1) − 3) / (3(2^{p+1} − 1))`, a second closed form in circulation
/// for `C_p`. It agrees with [`c_p`] only at `N = 1`.
pub fn c_p_alternative(width: usize) -> Ratio {
    let n = width as u32;
    let p = 2 * n + 1;
    Ratio::new(
        4 * n as i128 * (pow4(n) - 1) - 3,
        3 * ((1i128 << (p + 1)) - 1),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantFieldPrediction {
    pub lo: f64,
    pub hi: f64,
    pub c_p: f64,
}

/// First-order `σ₀` edges for `v_{2k+1} = εk`: `lo = 0`, `hi = 4εC_p`.
pub fn constant_field(width: usize, eps: f64) -> ConstantFieldPrediction {
    let c = c_p(width).to_f64();
    ConstantFieldPrediction {
        lo: 0.0,
        hi: 4.0 * eps * c,
        c_p: c,
    }
}

/// One band of the strong-field estimate; `row` is the lattice row `1..=p`
/// whose potential the band follows, `k = row − N − 1` its band index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongBand {
    pub row: usize,
    pub k: i64,
    pub center: f64,
    /// Correction at `a = 0`.
    pub xi_minus: f64,
    /// Correction at `a = 2`.
    pub xi_plus: f64,
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    /// The `1/t` term cancels; the true width is of higher order.
    pub higher_order: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongFieldEstimate {
    pub t: f64,
    pub threshold: f64,
    pub bands: Vec<StrongBand>,
}

impl StrongFieldEstimate {
    pub fn pairwise_disjoint(&self) -> bool {
        self.bands.windows(2).all(|w| w[0].hi < w[1].lo)
    }
}

/// Smallest admissible `t`: ten over the smallest spacing of `v`.
pub fn strong_field_threshold(params: &RibbonParams) -> Result<f64> {
    let v = params.potential();
    let mut gap = f64::INFINITY;
    for (i, w) in v.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NotStrictlyIncreasing { index: i + 2 });
        }
        gap = gap.min(w[1] - w[0]);
    }
    Ok(10.0 / gap)
}

/// Coupling squared between rows `row − 1` and `row` of `J_a`, or `None` at
/// the ends where there is no such coupling.
fn r_coefficient(row: usize, p: usize, a2: f64) -> Option<f64> {
    if row <= 1 || row > p {
        None
    } else if row % 2 == 0 {
        Some(a2)
    } else {
        Some(1.0)
    }
}

/// `ξ_k = r_k/(v_{k−1} − v_k) + r_{k+1}/(v_{k+1} − v_k)` with `r` the squared
/// couplings of `J_a` at `a² ∈ {0, 4}`.
pub fn strong_xi(row: usize, params: &RibbonParams, a2: f64) -> f64 {
    let p = params.p();
    let vk = params.v(row);
    let mut xi = 0.0;
    if let Some(r) = r_coefficient(row, p, a2) {
        xi += r / (params.v(row - 1) - vk);
    }
    if let Some(r) = r_coefficient(row + 1, p, a2) {
        xi += r / (params.v(row + 1) - vk);
    }
    xi
}

/// Bands of `Δ + tV` to order `1/t`: row `k` gives `[t v_k − ξ/t]` between
/// the `a = 0` and `a = 2` values of `ξ`.
pub fn strong_field(params: &RibbonParams, t: f64) -> Result<StrongFieldEstimate> {
    let threshold = strong_field_threshold(params)?;
    if !(t >= threshold) {
        return Err(Error::CouplingBelowThreshold { t, min: threshold });
    }
    let n = params.width() as i64;
    let p = params.p();
    let bands = (1..=p)
        .map(|row| {
            let center = t * params.v(row);
            let xi_minus = strong_xi(row, params, 0.0);
            let xi_plus = strong_xi(row, params, 4.0);
            let e0 = center - xi_minus / t;
            let e2 = center - xi_plus / t;
            StrongBand {
                row,
                k: row as i64 - n - 1,
                center,
                xi_minus,
                xi_plus,
                lo: e0.min(e2),
                hi: e0.max(e2),
                width: (xi_plus - xi_minus).abs() / t,
                higher_order: row == p,
            }
        })
        .collect();
    Ok(StrongFieldEstimate { t, threshold, bands })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OrderEstimate {
    /// Every sampled error was exactly zero.
    Exact,
    Fitted {
        slope: f64,
        /// Root-mean-square residual of the log-log fit.
        residual: f64,
        /// `(scale, |error|)` pairs used in the fit.
        samples: Vec<(f64, f64)>,
    },
}

impl OrderEstimate {
    pub fn slope(&self) -> Option<f64> {
        match self {
            OrderEstimate::Exact => None,
            OrderEstimate::Fitted { slope, .. } => Some(*slope),
        }
    }
}

/// Least-squares slope of `log|err|` against `log scale`.
pub fn fit_order(points: &[(f64, f64)]) -> Result<OrderEstimate> {
    let zeros = points.iter().filter(|(_, e)| *e == 0.0).count();
    if zeros == points.len() {
        return Ok(OrderEstimate::Exact);
    }
    if zeros > 0 || points.iter().any(|(x, e)| !(x.is_finite() && e.is_finite() && *x > 0.0)) {
        return Err(Error::DegenerateOrder);
    }
    let xs: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.abs().ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateOrder);
    }
    let slope = sxy / sxx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (my + slope * (x - mx));
            r * r
        })
        .sum();
    Ok(OrderEstimate::Fitted {
        slope,
        residual: (rss / m).sqrt(),
        samples: points.iter().map(|&(x, e)| (x, e.abs())).collect(),
    })
}

/// Observed order of `error(ε)` over `ε_j = ε₀/2^j`, `j = 0..=halvings`.
pub fn order_check<F>(mut error: F, eps0: f64, halvings: usize) -> Result<OrderEstimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if halvings < 3 {
        return Err(Error::TooFewHalvings(halvings));
    }
    let mut points = Vec::with_capacity(halvings + 1);
    let mut eps = eps0;
    for _ in 0..=halvings {
        points.push((eps, error(eps)?));
        eps *= 0.5;
    }
    fit_order(&points)
}

/// Observed order of `error(t)` over `t_j = t₀·2^j`; the slope is in `t`.
pub fn order_check_growing<F>(mut error: F, t0: f64, doublings: usize) -> Result<OrderEstimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if doublings < 3 {
        return Err(Error::TooFewHalvings(doublings));
    }
    let mut points = Vec::with_capacity(doublings + 1);
    let mut t = t0;
    for _ in 0..=doublings {
        points.push((t, error(t)?));
        t *= 2.0;
    }
    fit_order(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::{band_extrema, band_value};
    use crate::search::{uniform_grid, DEFAULT_GRID_POINTS};
    use proptest::prelude::*;

    fn params(v: Vec<f64>) -> RibbonParams {
        RibbonParams::new((v.len() - 1) / 2, v).unwrap()
    }

    /// `F` summed term by term, no Horner.
    fn f_direct(a: f64, p: &RibbonParams) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..=p.width() {
            let w = a.powi(2 * k as i32);
            num += p.v(2 * k + 1) * w;
            den += w;
        }
        num / den
    }

    #[test]
    fn weak_field_examples() {
        let p = params(vec![0.3, 9.0, -0.2, 4.0, 0.5]);
        assert_eq!(weak_field_f(0.0, &p), 0.3);
        let at_two = 3.0 * (0.3 + 4.0 * -0.2 + 16.0 * 0.5) / 63.0;
        assert!((weak_field_f(2.0, &p) - at_two).abs() < 1e-15);
        assert!((weak_field_f_at_two(&p) - at_two).abs() < 1e-15);
        let flat = params(vec![1.25, -3.0, 1.25, 7.0, 1.25]);
        for i in 0..=20 {
            assert!((weak_field_f(0.1 * i as f64, &flat) - 1.25).abs() < 1e-15);
        }
    }

    #[test]
    fn telescoped_limit_at_one_is_the_odd_mean() {
        let p = params(vec![0.1, 5.0, -0.4, 3.0, 0.9, 1.0, 0.2]);
        let mean = (0.1 - 0.4 + 0.9 + 0.2) / 4.0;
        assert!((f_telescoped(1.0, &p) - mean).abs() < 1e-15);
        assert!((weak_field_f(1.0, &p) - mean).abs() < 1e-15);
    }

    #[test]
    fn only_first_row_gives_the_reduced_width() {
        let grid = uniform_grid(DEFAULT_GRID_POINTS).unwrap();
        for n in 1..=4usize {
            let eps = 0.01;
            let mut v = vec![0.0; 2 * n + 1];
            v[0] = eps;
            for k in 1..=n {
                v[2 * k - 1] = 0.3 * k as f64;
            }
            let w = weak_field_edges(&params(v), &grid).unwrap();
            let want = eps * (1.0 - 3.0 / (4f64.powi(n as i32 + 1) - 1.0));
            assert!((w.width - want).abs() < 1e-15, "N={n}");
        }
    }

    #[test]
    fn monotone_edges_sit_at_the_endpoints() {
        let p = params(vec![0.0, 1.0, 0.2, -1.0, 0.5]);
        let w = weak_field_edges(&p, &uniform_grid(101).unwrap()).unwrap();
        assert_eq!(w.lo, Extremum { a: 0.0, value: 0.0 });
        assert_eq!(w.hi.a, 2.0);
        assert!((w.hi.value - weak_field_f_at_two(&p)).abs() < 1e-15);
        assert!(w.samples.windows(2).all(|x| x[0] <= x[1]));

        let flat = params(vec![0.7, 0.0, 0.7]);
        assert_eq!(weak_field_edges(&flat, &uniform_grid(11).unwrap()).unwrap().width, 0.0);
    }

    #[test]
    fn non_monotone_edges_are_refined() {
        let p = params(vec![0.0, 0.0, 1.0, 0.0, -1.0]);
        let grid = uniform_grid(401).unwrap();
        let w = weak_field_edges(&p, &grid).unwrap();
        let fine = uniform_grid(200_001).unwrap();
        let best = fine.iter().map(|&a| weak_field_f(a, &p)).fold(f64::NEG_INFINITY, f64::max);
        assert!(w.hi.value >= best - 1e-12);
        assert!(w.hi.a > 0.0 && w.hi.a < 2.0);
    }

    #[test]
    fn inner_edge_examples() {
        let v = vec![0.3, -0.1, 0.7, 0.2, -0.5];
        let p = params(v.clone());
        let want = 3f64.sqrt() / 2.0
            + (v[0] / 4.0 + 3.0 * v[1] / 4.0 + v[2] / 4.0 + 3.0 * v[3] / 4.0 + v[4]) / 3.0;
        assert!((inner_edge_first_order(1, &p).unwrap() - want).abs() < 1e-15);
        assert_eq!(
            inner_edge_first_order(2, &p),
            Err(Error::EdgeRegime { k: 2, n: 2 })
        );
        assert!(inner_edge_first_order(0, &p).is_err());
        assert!(inner_edge_first_order(1, &params(vec![0.0; 3])).is_err());
    }

    #[test]
    fn outer_edge_examples() {
        let w = outer_edge_weights(1, 1).unwrap();
        let want = [0.8, 1.0, 0.2];
        for (x, y) in w.iter().zip(want) {
            assert!((x - y).abs() < 1e-15);
        }
        let v = vec![0.3, -0.1, 0.7];
        let e = outer_edge_first_order(1, &params(v.clone())).unwrap();
        let want = 5f64.sqrt() + (0.8 * v[0] + v[1] + 0.2 * v[2]) / 2.0;
        assert!((e - want).abs() < 1e-15);
        assert!(outer_edge_first_order(0, &params(v)).is_err());
    }

    #[test]
    fn edge_weights_sum_to_n_plus_one() {
        for n in 1..=12usize {
            for k in 1..=n as i64 {
                let s: f64 = outer_edge_weights(k, n).unwrap().iter().sum();
                assert!((s - (n + 1) as f64).abs() < 1e-12, "N={n} k={k}");
            }
        }
    }

    #[test]
    fn uniform_shift_is_reproduced_exactly() {
        for n in 1..=8usize {
            let zero = RibbonParams::zero(n).unwrap();
            let shifted = RibbonParams::new(n, vec![0.37; 2 * n + 1]).unwrap();
            for k in -(n as i64)..=n as i64 {
                if k == 0 {
                    continue;
                }
                let d = outer_edge_first_order(k, &shifted).unwrap() - outer_edge_first_order(k, &zero).unwrap();
                assert!((d - 0.37).abs() < 1e-12);
                if let Ok(x) = inner_edge_first_order(k, &shifted) {
                    let d = x - inner_edge_first_order(k, &zero).unwrap();
                    assert!((d - 0.37).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn first_order_edges_track_the_bands() {
        // Independent check: measured edges of σ₁ at two field strengths.
        let w = [0.4, -0.9, 0.3, 0.8, -0.2];
        let grid = uniform_grid(DEFAULT_GRID_POINTS).unwrap();
        let mut errs = Vec::new();
        for eps in [1e-3, 5e-4] {
            let p = params(w.iter().map(|x| eps * x).collect());
            let (lo, hi) = band_extrema(1, &p, &grid).unwrap();
            errs.push((
                (lo.value - inner_edge_first_order(1, &p).unwrap()).abs(),
                (hi.value - outer_edge_first_order(1, &p).unwrap()).abs(),
            ));
        }
        let ratio_hi = errs[0].1 / errs[1].1;
        assert!((3.5..=4.5).contains(&ratio_hi), "ratio {ratio_hi}");
        assert!(errs[0].0 < 10.0 * 1e-6);
    }

    #[test]
    fn constant_field_values() {
        assert_eq!(c_p(1), Ratio::new(1, 5));
        assert_eq!(c_p(2), Ratio::new(3, 7));
        assert_eq!(c_p_alternative(1), Ratio::new(1, 5));
        assert_eq!(c_p_alternative(2), Ratio::new(13, 21));
        assert_eq!(constant_field_slope(2), Ratio::new(12, 7));
        for n in 1..=20 {
            let slope = constant_field_slope(n);
            let four_c = c_p(n);
            assert_eq!(slope, Ratio::new(4 * four_c.num, four_c.den));
            // 2^{p+1} − 1 = 4^{N+1} − 1.
            assert_eq!((1i128 << (2 * n + 2)) - 1, pow4(n as u32 + 1) - 1);
        }
        let cf = constant_field(1, 1e-3);
        assert!((cf.hi - 4e-3 / 5.0).abs() < 1e-18);
        assert_eq!(constant_field(2, 0.0).hi, 0.0);
        assert_eq!(constant_field(2, 0.0).c_p, 3.0 / 7.0);

        let p = constant_field_potential(2, 1e-3).unwrap();
        assert_eq!(p.potential(), &[0.0, 0.0, 1e-3, 0.0, 2e-3]);
        assert!((weak_field_f_at_two(&p) - constant_field(2, 1e-3).hi).abs() < 1e-18);
    }

    #[test]
    fn strong_field_small_case() {
        let p = params(vec![1.0, 2.0, 3.0]);
        let est = strong_field(&p, 100.0).unwrap();
        let b = &est.bands[0];
        assert_eq!((b.xi_minus, b.xi_plus), (0.0, 4.0));
        assert!((b.lo - (100.0 - 0.04)).abs() < 1e-12 && (b.hi - 100.0).abs() < 1e-12);
        assert!((b.width - 0.04).abs() < 1e-15);
        let top = est.bands.last().unwrap();
        assert!(top.higher_order);
        assert_eq!(top.width, 0.0);
        assert!(est.pairwise_disjoint());
    }

    #[test]
    fn strong_field_widths_follow_the_neighbour_spacing() {
        let p = params(vec![-1.0, 0.5, 1.0, 2.5, 4.0, 4.75, 7.0]);
        let t = 1000.0;
        let est = strong_field(&p, t).unwrap();
        for b in &est.bands[..6] {
            let k = b.row;
            let other = if k % 2 == 0 { k - 1 } else { k + 1 };
            let want = 4.0 / (t * (p.v(other) - p.v(k)).abs());
            assert!((b.width - want).abs() < 1e-15 * want.max(1.0), "row {k}");
        }
    }

    #[test]
    fn strong_field_preconditions() {
        assert_eq!(
            strong_field(&params(vec![1.0, 1.0, 2.0]), 100.0),
            Err(Error::NotStrictlyIncreasing { index: 2 })
        );
        assert!(matches!(
            strong_field(&params(vec![1.0, 2.0, 3.0]), 5.0),
            Err(Error::CouplingBelowThreshold { .. })
        ));
        for n in 1..=3usize {
            let ramp = RibbonParams::new(n, (1..=2 * n + 1).map(|x| x as f64).collect()).unwrap();
            assert!(strong_field(&ramp, 100.0).unwrap().pairwise_disjoint());
        }
    }

    #[test]
    fn strong_field_edges_sit_at_the_endpoints() {
        let ramp = params(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let scaled = ramp.scaled(100.0);
        let grid = uniform_grid(101).unwrap();
        for k in -2..=1i64 {
            let (lo, hi) = band_extrema(k, &scaled, &grid).unwrap();
            // Quadratic flatness at the ends limits the located position to ~sqrt(ε).
            let near = |x: f64, y: f64| (x - y).abs() < 1e-4;
            let ends = [lo.a, hi.a];
            assert!(
                (near(lo.a, 0.0) && near(hi.a, 2.0)) || (near(lo.a, 2.0) && near(hi.a, 0.0)),
                "k={k}: {ends:?}"
            );
            // The a = 2 end carries the r = 4 correction.
            let est = strong_field(&ramp, 100.0).unwrap();
            let b = &est.bands[(k + 2) as usize];
            let at_two = band_value(k, &scaled, 2.0).unwrap();
            assert!((at_two - (b.center - b.xi_plus / 100.0)).abs() < 1e-4);
        }
    }

    #[test]
    fn order_fit_on_synthetic_data() {
        let e = order_check(|x| Ok(x * x), 0.1, 5).unwrap();
        assert!((e.slope().unwrap() - 2.0).abs() < 0.05);
        let e = order_check(|x| Ok(3.0 * x * x * x + x * x * x * x), 0.1, 4).unwrap();
        assert!((e.slope().unwrap() - 3.0).abs() < 0.1);
        assert_eq!(order_check(|_| Ok(0.0), 0.1, 3).unwrap(), OrderEstimate::Exact);
        assert_eq!(
            order_check(|x| Ok(if x < 0.05 { 0.0 } else { x }), 0.1, 3),
            Err(Error::DegenerateOrder)
        );
        assert_eq!(order_check(|x| Ok(x), 0.1, 2), Err(Error::TooFewHalvings(2)));
        let g = order_check_growing(|t| Ok(1.0 / (t * t)), 50.0, 3).unwrap();
        assert!((g.slope().unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn middle_band_order_at_fixed_hopping() {
        let w = params(vec![0.6, -0.3, 0.1, 0.9, -0.7]);
        let e = order_check(
            |eps| {
                let p = w.scaled(eps);
                Ok((band_value(0, &p, 1.3)? - weak_field_f(1.3, &p)).abs())
            },
            1e-2,
            3,
        )
        .unwrap();
        assert!(e.slope().unwrap() >= 1.9, "{e:?}");
    }

    proptest! {
        #[test]
        fn telescoped_equals_direct(
            n in 1usize..=6,
            raw in prop::collection::vec(-1.0f64..1.0, 13),
            a in 0.0f64..=2.0,
        ) {
            let p = params(raw[..2 * n + 1].to_vec());
            let scale = p.potential().iter().fold(1e-300f64, |m, x| m.max(x.abs()));
            let f = weak_field_f(a, &p);
            prop_assert!((f - f_telescoped(a, &p)).abs() <= 1e-12 * scale);
            prop_assert!((f - f_direct(a, &p)).abs() <= 1e-12 * scale);
        }

        #[test]
        fn telescoped_equals_direct_near_one(
            raw in prop::collection::vec(-1.0f64..1.0, 9),
            d in -1e-6f64..1e-6,
        ) {
            let p = params(raw);
            let a = 1.0 + d;
            prop_assert!((weak_field_f(a, &p) - f_telescoped(a, &p)).abs() <= 1e-12);
        }

        #[test]
        fn sorted_odd_rows_give_monotone_f(
            n in 1usize..=5,
            raw in prop::collection::vec(0.0f64..1.0, 11),
        ) {
            let mut odd: Vec<f64> = raw[..n + 1].to_vec();
            odd.sort_by(f64::total_cmp);
            let mut v = vec![0.0; 2 * n + 1];
            for (k, x) in odd.iter().enumerate() {
                v[2 * k] = *x;
            }
            let p = params(v);
            let grid = uniform_grid(1001).unwrap();
            let vals: Vec<f64> = grid.iter().map(|&a| f_telescoped(a, &p)).collect();
            prop_assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        }
    }
}
