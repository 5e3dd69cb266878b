//! Complete elliptic integral of the first kind and the `K(k)/K(k')` ratio.
//!
//! Evaluated with the arithmetic-geometric mean:
//!
//! ```text
//! K(k) = π / (2 · AGM(1, k'))        k' = sqrt(1 - k²)
//! ```
//!
//! so that `K(k)/K(k') = AGM(1, k) / AGM(1, k')`. A [`Modulus`] carries its
//! complement explicitly; callers that can form `k'` without cancellation
//! (the conformal moduli near 1) hand it over directly.

use std::f64::consts::PI;

use crate::{Error, Result};

const AGM_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 64;

/// Distance from 1 below which `ellipk` refuses to evaluate.
pub const NEAR_ONE: f64 = 1e-12;

/// Elliptic modulus `k` together with its complement `k'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    k: f64,
    kp: f64,
}

impl Modulus {
    /// Builds a modulus from `k ∈ [0, 1)`; `k'` is formed as `sqrt((1-k)(1+k))`.
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::Domain(format!("modulus k = {k} outside [0, 1)")));
        }
        Ok(Self {
            k,
            kp: ((1.0 - k) * (1.0 + k)).sqrt(),
        })
    }

    /// Builds a modulus from an independently computed pair `(k, k')`.
    ///
    /// The pair must satisfy `k² + k'² = 1` to a few ulps.
    pub fn with_complement(k: f64, kp: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) || !(0.0..=1.0).contains(&kp) || kp == 0.0 {
            return Err(Error::Domain(format!("modulus pair ({k}, {kp}) invalid")));
        }
        if (k * k + kp * kp - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "modulus pair ({k}, {kp}) violates k^2 + k'^2 = 1"
            )));
        }
        Ok(Self { k, kp })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Complementary modulus `k'`.
    pub fn kp(&self) -> f64 {
        self.kp
    }

    /// The complementary modulus as a modulus in its own right.
    pub fn complement(&self) -> Self {
        Self {
            k: self.kp,
            kp: self.k,
        }
    }
}

/// Arithmetic-geometric mean of `a` and `b` (both `> 0`).
fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind `K(k)`.
///
/// Rejects `k` within [`NEAR_ONE`] of 1 where `K` diverges logarithmically.
pub fn ellipk(m: Modulus) -> Result<f64> {
    if 1.0 - m.k < NEAR_ONE {
        return Err(Error::Domain(format!(
            "modulus k = {} too close to 1 for K(k)",
            m.k
        )));
    }
    Ok(PI / (2.0 * agm(1.0, m.kp)))
}

/// Convenience wrapper: `K(k)` from a raw modulus value.
pub fn ellipk_of(k: f64) -> Result<f64> {
    ellipk(Modulus::new(k)?)
}

/// Ratio `K(k)/K(k')`, strictly increasing in `k`, equal to 1 at `k = 1/√2`.
///
/// Undefined at the endpoints: the ratio is 0 at `k = 0` and diverges at
/// `k = 1`, so both are domain errors.
pub fn k_ratio(m: Modulus) -> Result<f64> {
    if m.k <= 0.0 || m.kp <= 0.0 {
        return Err(Error::Domain(format!(
            "K(k)/K(k') undefined at k = {}",
            m.k
        )));
    }
    Ok(agm(1.0, m.k) / agm(1.0, m.kp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Adaptive Simpson quadrature of `∫_0^{π/2} dθ / sqrt(1 - k² sin²θ)`.
    fn k_by_quadrature(k: f64) -> f64 {
        fn f(k: f64, t: f64) -> f64 {
            1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt()
        }
        fn simpson(k: f64, a: f64, b: f64) -> f64 {
            let m = 0.5 * (a + b);
            (b - a) / 6.0 * (f(k, a) + 4.0 * f(k, m) + f(k, b))
        }
        fn rec(k: f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let l = simpson(k, a, m);
            let r = simpson(k, m, b);
            if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
                return l + r + (l + r - whole) / 15.0;
            }
            rec(k, a, m, l, tol / 2.0, depth - 1) + rec(k, m, b, r, tol / 2.0, depth - 1)
        }
        let b = PI / 2.0;
        rec(k, 0.0, b, simpson(k, 0.0, b), 1e-14, 40)
    }

    #[test]
    fn k_at_zero_is_half_pi() {
        assert_eq!(ellipk_of(0.0).unwrap(), PI / 2.0);
    }

    #[test]
    fn k_at_half_matches_quadrature() {
        let agm = ellipk_of(0.5).unwrap();
        let quad = k_by_quadrature(0.5);
        assert_relative_eq!(agm, quad, max_relative = 1e-10);
        assert_relative_eq!(agm, 1.685_750_354_812_596, max_relative = 1e-12);
    }

    #[test]
    fn self_complementary_ratio_is_one() {
        let m = Modulus::new(std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert_relative_eq!(k_ratio(m).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn ratio_at_one_third() {
        let m = Modulus::new(1.0 / 3.0).unwrap();
        let oracle = k_by_quadrature(1.0 / 3.0) / k_by_quadrature(m.kp());
        let r = k_ratio(m).unwrap();
        assert_relative_eq!(r, oracle, max_relative = 1e-10);
        assert!((r - 0.6402).abs() < 1e-3);
    }

    #[test]
    fn reciprocal_identity() {
        for k in [0.2, 0.5, 0.9] {
            let m = Modulus::new(k).unwrap();
            let prod = k_ratio(m).unwrap() * k_ratio(m.complement()).unwrap();
            assert_relative_eq!(prod, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(Modulus::new(-0.1).is_err());
        assert!(Modulus::new(1.0).is_err());
        assert!(ellipk_of(1.0 - 1e-13).is_err());
        assert!(k_ratio(Modulus::new(0.0).unwrap()).is_err());
        assert!(Modulus::with_complement(0.6, 0.7).is_err());
    }

    #[test]
    fn logarithmic_asymptote_near_one() {
        let kp: f64 = 1e-4;
        let k = (1.0 - kp * kp).sqrt();
        let m = Modulus::with_complement(k, kp).unwrap();
        let kk = PI / (2.0 * agm(1.0, m.kp()));
        assert!((kk - (4.0 / kp).ln()).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn monotone_in_k(a in 0.0f64..0.999, b in 0.0f64..0.999) {
            prop_assume!((a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(ellipk_of(lo).unwrap() < ellipk_of(hi).unwrap());
            if lo > 0.0 {
                let rl = k_ratio(Modulus::new(lo).unwrap()).unwrap();
                let rh = k_ratio(Modulus::new(hi).unwrap()).unwrap();
                prop_assert!(rl < rh);
            }
        }

        #[test]
        fn reciprocity(k in 1e-6f64..(1.0 - 1e-6)) {
            let m = Modulus::new(k).unwrap();
            let prod = k_ratio(m).unwrap() * k_ratio(m.complement()).unwrap();
            prop_assert!((prod - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn bounded_below_by_half_pi(k in 0.0f64..0.9999) {
            prop_assert!(ellipk_of(k).unwrap() >= PI / 2.0);
        }
    }
}
