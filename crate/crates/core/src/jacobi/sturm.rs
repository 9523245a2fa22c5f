//! Bisection on negative-inertia counts.

use super::{decoupled_eigenvalues, EigenList, JacobiMatrix};
use crate::error::{Error, Result};

pub const MAX_BISECTION_STEPS: usize = 200;

/// Relative tolerance used when none is requested.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A few ulps relative to the spectral scale. Band-edge and strong-field
/// computations need this; the default is enough for everything else.
pub const FINE_TOL: f64 = 1e-15;

/// Number of eigenvalues strictly below `lambda`.
pub fn sturm_count(j: &JacobiMatrix, lambda: f64) -> usize {
    let (lo, hi) = j.gershgorin();
    let pivmin = f64::EPSILON * scale_of(lo, hi);
    count_below(j.diag(), j.offdiag(), lambda, pivmin)
}

fn count_below(diag: &[f64], offdiag: &[f64], lambda: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - lambda;
    if q == 0.0 {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let e = offdiag[i - 1];
        q = (diag[i] - lambda) - e * e / q;
        if q == 0.0 {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn scale_of(lo: f64, hi: f64) -> f64 {
    1f64.max(lo.abs()).max(hi.abs())
}

fn has_pattern(j: &JacobiMatrix) -> bool {
    j.offdiag()
        .iter()
        .enumerate()
        .all(|(i, &e)| e == if i % 2 == 0 { j.a() } else { 1.0 })
}

struct Bracket {
    lo: f64,
    hi: f64,
    scale: f64,
    pivmin: f64,
}

fn bracket(j: &JacobiMatrix, tol: f64) -> Result<Bracket> {
    if !(tol > 0.0) {
        return Err(Error::NonPositiveTolerance(tol));
    }
    let (lo, hi) = j.gershgorin();
    let scale = scale_of(lo, hi);
    let pad = 4.0 * f64::EPSILON * scale;
    Ok(Bracket {
        lo: lo - pad,
        hi: hi + pad,
        scale,
        pivmin: f64::EPSILON * scale,
    })
}

fn bisect(j: &JacobiMatrix, index: usize, b: &Bracket, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (b.lo, b.hi);
    let target = tol * b.scale;
    for step in 0..MAX_BISECTION_STEPS {
        if hi - lo <= target {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::NoConvergence { iterations: step });
        }
        if count_below(j.diag(), j.offdiag(), mid, b.pivmin) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi - lo <= target {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::NoConvergence {
            iterations: MAX_BISECTION_STEPS,
        })
    }
}

/// All `p` eigenvalues, ascending, each within `tol · max(1, |Gershgorin bound|)`.
///
/// At `a = 0` the matrix splits into a `1×1` and `N` `2×2` blocks that are
/// solved in closed form.
pub fn eigenvalues(j: &JacobiMatrix, tol: f64) -> Result<EigenList> {
    let b = bracket(j, tol)?;
    if j.a() == 0.0 && has_pattern(j) {
        return Ok(EigenList::from_sorted(decoupled_eigenvalues(j.diag())));
    }
    let mut values = Vec::with_capacity(j.p());
    for index in 0..j.p() {
        values.push(bisect(j, index, &b, tol)?);
    }
    // Independent bisections can disagree in the last bit on clustered values.
    values.sort_by(f64::total_cmp);
    Ok(EigenList::from_sorted(values))
}

/// The eigenvalue at 0-based position `index` in ascending order.
pub fn eigenvalue_at(j: &JacobiMatrix, index: usize, tol: f64) -> Result<f64> {
    if index >= j.p() {
        return Err(Error::DimensionMismatch {
            expected: j.p(),
            found: index,
        });
    }
    let b = bracket(j, tol)?;
    if j.a() == 0.0 && has_pattern(j) {
        return Ok(decoupled_eigenvalues(j.diag())[index]);
    }
    bisect(j, index, &b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::unperturbed_eigenvalue;
    use crate::lattice::RibbonParams;
    use proptest::prelude::*;

    fn jac(v: Vec<f64>, a: f64) -> JacobiMatrix {
        let n = (v.len() - 1) / 2;
        JacobiMatrix::new(&RibbonParams::new(n, v).unwrap(), a).unwrap()
    }

    #[test]
    fn three_by_three_at_unit_hopping() {
        let j = jac(vec![0.0; 3], 1.0);
        let e = eigenvalues(&j, DEFAULT_TOL).unwrap();
        let r = 2f64.sqrt();
        for (x, y) in e.values().iter().zip([-r, 0.0, r]) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        assert_eq!(sturm_count(&j, 1.0), 2);
        assert_eq!(sturm_count(&j, -10.0), 0);
        assert_eq!(sturm_count(&j, 10.0), 3);
    }

    #[test]
    fn matches_closed_form_at_zero_potential() {
        let j = jac(vec![0.0; 7], 1.3);
        let fine = eigenvalues(&j, FINE_TOL).unwrap();
        let coarse = eigenvalues(&j, DEFAULT_TOL).unwrap();
        let (lo, hi) = j.gershgorin();
        let bound = DEFAULT_TOL * lo.abs().max(hi.abs()).max(1.0);
        for k in -3..=3 {
            let exact = unperturbed_eigenvalue(k, 1.3, 3);
            assert!((fine.band(k) - exact).abs() < 1e-12);
            assert!((coarse.band(k) - exact).abs() <= bound);
        }
    }

    #[test]
    fn bisection_and_closed_form_agree_at_a_zero() {
        let v = vec![0.3, -1.0, 2.0, 0.5, 0.25];
        let j0 = jac(v.clone(), 0.0);
        let closed = eigenvalues(&j0, DEFAULT_TOL).unwrap();
        // Same matrix presented without the pattern shortcut.
        let generic = JacobiMatrix::from_parts(v, j0.offdiag().to_vec()).unwrap();
        let mut generic_vals = Vec::new();
        let b = bracket(&generic, DEFAULT_TOL).unwrap();
        for i in 0..5 {
            generic_vals.push(bisect(&generic, i, &b, DEFAULT_TOL).unwrap());
        }
        for (x, y) in closed.values().iter().zip(&generic_vals) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn rejects_bad_tolerance_and_reports_stalls() {
        let j = jac(vec![0.0; 3], 1.0);
        assert_eq!(eigenvalues(&j, 0.0), Err(Error::NonPositiveTolerance(0.0)));
        assert!(matches!(
            eigenvalues(&j, 1e-20),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn eigenvalue_at_matches_full_solve() {
        let j = jac(vec![0.1, -0.4, 0.9, 0.0, -0.2, 0.3, 0.7], 0.77);
        let all = eigenvalues(&j, FINE_TOL).unwrap();
        for i in 0..7 {
            assert!((eigenvalue_at(&j, i, FINE_TOL).unwrap() - all.values()[i]).abs() < 1e-14);
        }
        assert!(eigenvalue_at(&j, 7, FINE_TOL).is_err());
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, f64)> {
        (1usize..=5).prop_flat_map(|n| {
            (
                prop::collection::vec(-2.0f64..2.0, 2 * n + 1),
                0.0f64..=2.0,
            )
        })
    }

    proptest! {
        #[test]
        fn count_differences_match_the_solver((v, a) in instance(), x in -5.0f64..5.0, w in 0.0f64..3.0) {
            let j = jac(v, a);
            let e = eigenvalues(&j, DEFAULT_TOL).unwrap();
            let (lo, hi) = (x, x + w);
            let inside = e.values().iter().filter(|&&l| l >= lo && l < hi).count();
            // Skip draws that land within the solver tolerance of an eigenvalue.
            let close = e.values().iter().any(|&l| (l - lo).abs() < 1e-9 || (l - hi).abs() < 1e-9);
            prop_assume!(!close);
            prop_assert_eq!(sturm_count(&j, hi) - sturm_count(&j, lo), inside);
        }

        #[test]
        fn count_is_monotone((v, a) in instance(), x in -5.0f64..5.0, w in 0.0f64..3.0) {
            let j = jac(v, a);
            prop_assert!(sturm_count(&j, x) <= sturm_count(&j, x + w));
            let (g_lo, g_hi) = j.gershgorin();
            prop_assert_eq!(sturm_count(&j, g_lo - 1e-9), 0);
            prop_assert_eq!(sturm_count(&j, g_hi + 1e-9), j.p());
        }

        #[test]
        fn uniform_shift_commutes((v, a) in instance(), c in -3.0f64..3.0) {
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let e0 = eigenvalues(&jac(v, a), DEFAULT_TOL).unwrap();
            let e1 = eigenvalues(&jac(shifted, a), DEFAULT_TOL).unwrap();
            for (x, y) in e0.values().iter().zip(e1.values()) {
                prop_assert!((x + c - y).abs() < 1e-10);
            }
        }

        #[test]
        fn strict_separation_for_nonzero_hopping(
            n in 1usize..=5,
            a in 0.05f64..=2.0,
            seed in prop::collection::vec(-1.0f64..1.0, 11),
        ) {
            let raw: Vec<f64> = seed[..2 * n + 1].to_vec();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            let v: Vec<f64> = raw.iter().map(|x| 0.01 * x / norm.max(1.0)).collect();
            let e = eigenvalues(&jac(v, a), DEFAULT_TOL).unwrap();
            let gap = e.values().windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            prop_assert!(gap > 1e-6, "gap {}", gap);
        }

        #[test]
        fn zero_potential_spectrum_is_symmetric(n in 1usize..=8, a in 0.0f64..=2.0) {
            let e = eigenvalues(&jac(vec![0.0; 2 * n + 1], a), FINE_TOL).unwrap();
            for k in 0..=n as i64 {
                prop_assert!((e.band(k) + e.band(-k)).abs() < 1e-12);
            }
        }
    }
}
