//! Complete elliptic integrals by the arithmetic-geometric mean.
//!
//! Both functions take the parameter `m = k²`:
//! `K(m) = ∫₀^{π/2} dθ/√(1 − m sin²θ)`, `E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const AGM_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 64;

fn check(m: f64) -> Result<()> {
    if (0.0..1.0).contains(&m) {
        Ok(())
    } else {
        Err(Error::domain(format!("elliptic parameter must lie in [0, 1), got {m}")))
    }
}

/// Returns `(K(m), E(m))` from one AGM sweep.
pub fn ellip_ke(m: f64) -> Result<(f64, f64)> {
    check(m)?;
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut pow2 = 0.5;
    let mut sum = pow2 * c * c;
    for _ in 0..AGM_MAX_ITER {
        if c.abs() <= AGM_TOL * a {
            let k = FRAC_PI_2 / a;
            return Ok((k, k * (1.0 - sum)));
        }
        let an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        pow2 *= 2.0;
        sum += pow2 * c * c;
    }
    Err(Error::ConvergenceFailure(format!("AGM did not converge for m = {m}")))
}

pub fn ellip_k(m: f64) -> Result<f64> {
    Ok(ellip_ke(m)?.0)
}

pub fn ellip_e(m: f64) -> Result<f64> {
    Ok(ellip_ke(m)?.1)
}

#[cfg(test)]
pub(crate) mod series {
    //! Maclaurin series in `m`, an oracle independent of the AGM.
    use std::f64::consts::FRAC_PI_2;

    pub fn k(m: f64) -> f64 {
        let mut coef = 1.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..20_000 {
            let r = (2 * n - 1) as f64 / (2 * n) as f64;
            coef *= r * r;
            term *= m;
            let add = coef * term;
            sum += add;
            if add < 1e-18 * sum {
                break;
            }
        }
        FRAC_PI_2 * sum
    }

    pub fn e(m: f64) -> f64 {
        let mut coef = 1.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..20_000 {
            let r = (2 * n - 1) as f64 / (2 * n) as f64;
            coef *= r * r;
            term *= m;
            let add = coef * term / (2 * n - 1) as f64;
            sum -= add;
            if add < 1e-18 * sum {
                break;
            }
        }
        FRAC_PI_2 * sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameter() {
        let (k, e) = ellip_ke(0.0).unwrap();
        assert_eq!(k, FRAC_PI_2);
        assert_eq!(e, FRAC_PI_2);
    }

    #[test]
    fn known_values() {
        // K(1/2) = Γ(1/4)² / (4 √π)
        let k_half = 1.854_074_677_301_371_918_433_850_347_195_260_046_217_598_823_521_766_905_586;
        assert!((ellip_k(0.5).unwrap() - k_half).abs() < 1e-15);
        // Legendre relation at m = 1/2: 2 E K − K² = π/2
        let (k, e) = ellip_ke(0.5).unwrap();
        assert!((2.0 * e * k - k * k - FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn agm_matches_series() {
        for i in 0..=18 {
            let m = 0.05 * i as f64;
            let (k, e) = ellip_ke(m).unwrap();
            assert!((k - series::k(m)).abs() < 1e-12 * k, "K, m = {m}");
            assert!((e - series::e(m)).abs() < 1e-12 * e, "E, m = {m}");
        }
    }

    #[test]
    fn legendre_relation_holds_generically() {
        for m in [0.1, 0.37, 0.8, 0.99, 0.999_999] {
            let (k, e) = ellip_ke(m).unwrap();
            let (kp, ep) = ellip_ke(1.0 - m).unwrap();
            let lhs = e * kp + ep * k - k * kp;
            assert!((lhs - FRAC_PI_2).abs() < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn rejects_outside_range() {
        assert!(ellip_k(1.0).is_err());
        assert!(ellip_k(-0.1).is_err());
        assert!(ellip_e(f64::NAN).is_err());
    }
}
