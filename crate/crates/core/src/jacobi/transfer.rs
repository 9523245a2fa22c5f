//! Transfer matrices, fundamental solutions and the characteristic polynomial.
//!
//! A solution of `J_a y = λ y` (with `y₀ = 0` dropped) satisfies
//!
//! ```text
//! a y_{2k}   = (λ − v_{2k−1}) y_{2k−1} − y_{2k−2}
//!   y_{2k+1} = (λ − v_{2k})   y_{2k}   − a y_{2k−1}
//! ```
//!
//! `θ` starts from `(θ₀, θ₁) = (1, 0)` and `φ` from `(φ₀, φ₁) = (0, 1)`, so that
//! `M_k = T_k ⋯ T₁` has columns `(θ_{2k}, θ_{2k+1})` and `(φ_{2k}, φ_{2k+1})`.
//! Beyond the last row the bookkeeping uses `v_{p+1} = v₁`.

use crate::error::{Error, Result};
use crate::lattice::RibbonParams;

pub type Mat2 = [[f64; 2]; 2];

fn mul(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `v_idx` for `idx ∈ 1..=p+1`, wrapping `p + 1` to row 1.
fn v_ext(params: &RibbonParams, idx: usize) -> f64 {
    if idx == params.p() + 1 {
        params.v(1)
    } else {
        params.v(idx)
    }
}

fn check_hopping(a: f64) -> Result<()> {
    if a == 0.0 {
        return Err(Error::DegenerateHopping);
    }
    if !(0.0..=2.0).contains(&a) {
        return Err(Error::HoppingOutOfRange(a));
    }
    Ok(())
}

/// `T_k`, mapping `(y_{2k−2}, y_{2k−1})` to `(y_{2k}, y_{2k+1})`; `1 ≤ k ≤ N+1`.
pub fn transfer_matrix(k: usize, lambda: f64, a: f64, params: &RibbonParams) -> Result<Mat2> {
    check_hopping(a)?;
    let max = params.width() + 1;
    if k == 0 || k > max {
        return Err(Error::StepOutOfRange { step: k, max });
    }
    let odd = lambda - v_ext(params, 2 * k - 1);
    let even = lambda - v_ext(params, 2 * k);
    Ok([
        [-1.0 / a, odd / a],
        [-even / a, (even * odd - a * a) / a],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monodromy {
    pub k: usize,
    pub entries: Mat2,
}

impl Monodromy {
    pub fn det(&self) -> f64 {
        det(&self.entries)
    }

    /// `(θ_{2k}, θ_{2k+1})`.
    pub fn theta(&self) -> (f64, f64) {
        (self.entries[0][0], self.entries[1][0])
    }

    /// `(φ_{2k}, φ_{2k+1})`.
    pub fn phi(&self) -> (f64, f64) {
        (self.entries[0][1], self.entries[1][1])
    }
}

/// `M_k = T_k ⋯ T₁`.
pub fn monodromy(k: usize, lambda: f64, a: f64, params: &RibbonParams) -> Result<Monodromy> {
    if k == 0 {
        return Err(Error::StepOutOfRange {
            step: 0,
            max: params.width() + 1,
        });
    }
    let mut m = transfer_matrix(1, lambda, a, params)?;
    for step in 2..=k {
        m = mul(&transfer_matrix(step, lambda, a, params)?, &m);
    }
    Ok(Monodromy { k, entries: m })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSolutions {
    /// `θ₀ ..= θ_{p+1}`.
    pub theta: Vec<f64>,
    /// `φ₀ ..= φ_{p+1}`.
    pub phi: Vec<f64>,
}

fn run_recursion(y0: f64, y1: f64, lambda: f64, a: f64, params: &RibbonParams) -> Vec<f64> {
    let p = params.p();
    let mut y = vec![0.0; p + 2];
    y[0] = y0;
    y[1] = y1;
    for k in 1..=params.width() + 1 {
        y[2 * k] = ((lambda - params.v(2 * k - 1)) * y[2 * k - 1] - y[2 * k - 2]) / a;
        if 2 * k < p {
            y[2 * k + 1] = (lambda - params.v(2 * k)) * y[2 * k] - a * y[2 * k - 1];
        }
    }
    y
}

pub fn fundamental_solutions(lambda: f64, a: f64, params: &RibbonParams) -> Result<FundamentalSolutions> {
    check_hopping(a)?;
    Ok(FundamentalSolutions {
        theta: run_recursion(1.0, 0.0, lambda, a, params),
        phi: run_recursion(0.0, 1.0, lambda, a, params),
    })
}

/// `R(λ, a, v) = a^{N+1} φ_{p+1}`, evaluated without dividing by `a`.
///
/// With `Y_{2k} = a^k φ_{2k}` and `Y_{2k+1} = a^k φ_{2k+1}` the recursion
/// becomes `Y_{2k} = (λ − v_{2k−1}) Y_{2k−1} − Y_{2k−2}` and
/// `Y_{2k+1} = (λ − v_{2k}) Y_{2k} − a² Y_{2k−1}`, a polynomial in `a²`.
/// `R` equals `det(λI − J_a)`.
pub fn char_poly_r(lambda: f64, a: f64, params: &RibbonParams) -> f64 {
    let z = a * a;
    let (mut prev_even, mut odd) = (0.0, 1.0);
    let mut even = 0.0;
    for k in 1..=params.width() + 1 {
        even = (lambda - params.v(2 * k - 1)) * odd - prev_even;
        if k <= params.width() {
            let next_odd = (lambda - params.v(2 * k)) * even - z * odd;
            prev_even = even;
            odd = next_odd;
        }
    }
    even
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{eigenvalues, unperturbed_eigenvalue, JacobiMatrix, DEFAULT_TOL};
    use proptest::prelude::*;

    fn params(v: Vec<f64>) -> RibbonParams {
        RibbonParams::new((v.len() - 1) / 2, v).unwrap()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    fn lu_det(mut m: Vec<Vec<f64>>) -> f64 {
        let n = m.len();
        let mut d = 1.0;
        for c in 0..n {
            let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
            if m[piv][c] == 0.0 {
                return 0.0;
            }
            if piv != c {
                m.swap(piv, c);
                d = -d;
            }
            d *= m[c][c];
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        d
    }

    fn shifted_det(lambda: f64, a: f64, p: &RibbonParams) -> f64 {
        let mut m = JacobiMatrix::new(p, a).unwrap().to_dense();
        for (i, row) in m.iter_mut().enumerate() {
            for x in row.iter_mut() {
                *x = -*x;
            }
            row[i] += lambda;
        }
        lu_det(m)
    }

    #[test]
    fn first_transfer_at_zero_potential() {
        let p = params(vec![0.0; 5]);
        let (lam, a) = (0.7, 1.3);
        let t = transfer_matrix(1, lam, a, &p).unwrap();
        let want = [[-1.0 / a, lam / a], [-lam / a, (lam * lam - a * a) / a]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((t[i][j] - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn transfer_at_matching_potential_is_minus_identity() {
        let p = params(vec![0.4, 0.4, 0.4]);
        let t = transfer_matrix(1, 0.4, 1.0, &p).unwrap();
        assert_eq!(t, [[-1.0, 0.0], [-0.0, -1.0]]);
    }

    #[test]
    fn transfer_rejects_bad_inputs() {
        let p = params(vec![0.0; 3]);
        assert_eq!(transfer_matrix(1, 0.0, 0.0, &p), Err(Error::DegenerateHopping));
        assert_eq!(
            transfer_matrix(3, 0.0, 1.0, &p),
            Err(Error::StepOutOfRange { step: 3, max: 2 })
        );
        assert!(fundamental_solutions(0.0, 0.0, &p).is_err());
        assert!(monodromy(0, 0.0, 1.0, &p).is_err());
    }

    #[test]
    fn first_monodromy_is_first_transfer() {
        let p = params(vec![0.2, -0.5, 1.0, 0.3, -0.1]);
        let m = monodromy(1, 0.9, 1.7, &p).unwrap();
        assert_eq!(m.entries, transfer_matrix(1, 0.9, 1.7, &p).unwrap());
    }

    #[test]
    fn phi_closed_form_at_zero_potential() {
        // 2 cos ξ = λ²/a − a − 1/a = −1 at a = λ = 1.
        let (lam, a) = (1.0, 1.0);
        let xi = 2.0 * std::f64::consts::PI / 3.0;
        let p = params(vec![0.0; 9]);
        let fs = fundamental_solutions(lam, a, &p).unwrap();
        for k in 0..=4usize {
            let kf = k as f64;
            let even = lam / a * (kf * xi).sin() / xi.sin();
            let odd = (kf * xi).sin() / (a * xi.sin()) + ((kf + 1.0) * xi).sin() / xi.sin();
            assert!((fs.phi[2 * k] - even).abs() < 1e-12, "phi_{}", 2 * k);
            assert!((fs.phi[2 * k + 1] - odd).abs() < 1e-12, "phi_{}", 2 * k + 1);
        }
        assert_eq!(fs.phi[1], 1.0);
    }

    #[test]
    fn phi_at_zero_energy() {
        let a = 1.37;
        let p = params(vec![0.0; 7]);
        let fs = fundamental_solutions(0.0, a, &p).unwrap();
        for k in 0..=3usize {
            assert_eq!(fs.phi[2 * k], 0.0);
            assert!((fs.phi[2 * k + 1] - (-a).powi(k as i32)).abs() < 1e-14);
        }
    }

    #[test]
    fn char_poly_small_case() {
        // det(λ − J) = λ³ − λ(a² + 1) for N = 1, v = 0.
        let p = params(vec![0.0; 3]);
        for &(lam, a) in &[(0.3, 0.0), (1.1, 0.7), (-2.0, 2.0)] {
            let want = lam * lam * lam - lam * (a * a + 1.0);
            assert!((char_poly_r(lam, a, &p) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn char_poly_zeros_are_the_unperturbed_spectrum() {
        let p = params(vec![0.0; 5]);
        for &a in &[0.5, 1.0, 2.0] {
            for k in -2..=2 {
                let lam = unperturbed_eigenvalue(k, a, 2);
                assert!(char_poly_r(lam, a, &p).abs() < 1e-10, "k={k} a={a}");
            }
        }
    }

    #[test]
    fn char_poly_root_at_flat_value() {
        let p = params(vec![0.6, -1.0, 0.6, 2.5, 0.6, 0.1, 0.6]);
        for i in 0..=20 {
            let a = 0.1 * i as f64;
            assert!(char_poly_r(0.6, a, &p).abs() < 1e-12);
        }
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, f64, f64)> {
        (1usize..=4).prop_flat_map(|n| {
            (
                prop::collection::vec(-1.0f64..1.0, 2 * n + 1),
                0.05f64..=2.0,
                -3.0f64..3.0,
            )
        })
    }

    proptest! {
        #[test]
        fn transfer_is_unimodular((v, a, lam) in instance()) {
            let p = params(v);
            for k in 1..=p.width() + 1 {
                let t = transfer_matrix(k, lam, a, &p).unwrap();
                let scale = 1.0 + t.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max).powi(2);
                prop_assert!((det(&t) - 1.0).abs() <= 1e-14 * scale);
            }
        }

        #[test]
        fn monodromy_matches_the_recursion((v, a, lam) in instance()) {
            let p = params(v);
            let fs = fundamental_solutions(lam, a, &p).unwrap();
            for k in 1..=p.width() + 1 {
                let m = monodromy(k, lam, a, &p).unwrap();
                let size = m.entries.iter().flatten().map(|x| x.abs()).fold(1.0, f64::max);
                prop_assert!((m.det() - 1.0).abs() <= 1e-12 * size * size);
                let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * size;
                prop_assert!(close(m.phi().0, fs.phi[2 * k]));
                prop_assert!(close(m.theta().0, fs.theta[2 * k]));
                if 2 * k + 1 <= p.p() {
                    prop_assert!(close(m.phi().1, fs.phi[2 * k + 1]));
                    prop_assert!(close(m.theta().1, fs.theta[2 * k + 1]));
                }
            }
        }

        #[test]
        fn char_poly_is_the_determinant((v, a, lam) in instance()) {
            let p = params(v);
            let r = char_poly_r(lam, a, &p);
            let d = shifted_det(lam, a, &p);
            prop_assert!((r - d).abs() <= 1e-10 * (1.0 + d.abs()));
            let fs = fundamental_solutions(lam, a, &p).unwrap();
            let cleared = a.powi(p.width() as i32 + 1) * fs.phi[p.p() + 1];
            prop_assert!((r - cleared).abs() <= 1e-9 * (1.0 + r.abs()));
        }

        #[test]
        fn char_poly_changes_sign_p_times((v, a, _lam) in instance()) {
            let p = params(v);
            let j = JacobiMatrix::new(&p, a).unwrap();
            let e = eigenvalues(&j, DEFAULT_TOL).unwrap();
            let vals = e.values();
            prop_assume!(vals.windows(2).all(|w| w[1] - w[0] > 1e-6));
            let (lo, hi) = j.gershgorin();
            let mut probes = vec![lo - 1.0];
            probes.extend(vals.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            probes.push(hi + 1.0);
            let signs: Vec<bool> = probes.iter().map(|&x| char_poly_r(x, a, &p) > 0.0).collect();
            let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
            prop_assert_eq!(changes, p.p());
        }
    }
}
