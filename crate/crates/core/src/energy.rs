//! The energy `Θ_p(γ) = ∫_γ κ^p ds` on closed critical curves and circles.

use std::f64::consts::PI;

use serde::Serialize;

use crate::curve::CurveTrace;
use crate::error::{Error, Result};
use crate::qpotential::{a_star, ElasticaParams};
use crate::quad::{integrate_over_arch, DEFAULT_REL_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum EnergyContext {
    ClosedCurve,
    Circle,
    InfimumSequence,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnergyReport {
    pub value: f64,
    /// `m √(2a_*) π`, the value approached as `a → a_*`.
    pub limit_at_a_star: f64,
    pub context: EnergyContext,
}

/// `Θ_p = 2m p(1−p) ∫ κ^{p−1}/√Q dκ` over `m` curvature periods.
pub fn energy_closed(params: &ElasticaParams, m: u32) -> Result<EnergyReport> {
    energy_closed_tol(params, m, DEFAULT_REL_TOL)
}

pub fn energy_closed_tol(params: &ElasticaParams, m: u32, rel_tol: f64) -> Result<EnergyReport> {
    if m == 0 {
        return Err(Error::domain("m must be at least 1"));
    }
    let p = params.p;
    let r = integrate_over_arch(params, |k| k.powf(p - 1.0), rel_tol)?;
    Ok(EnergyReport {
        value: 2.0 * m as f64 * p * (1.0 - p) * r.value,
        limit_at_a_star: energy_limit(p, m)?,
        context: EnergyContext::ClosedCurve,
    })
}

/// `m √(2a_*) π`.
pub fn energy_limit(p: f64, m: u32) -> Result<f64> {
    Ok(m as f64 * (2.0 * a_star(p)?).sqrt() * PI)
}

/// `Θ_p` on a parallel of Euclidean radius `r`: `2π r^{1−p}(1−r²)^{p/2}`.
pub fn circle_energy(r: f64, p: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!("radius must lie in (0, 1), got {r}")));
    }
    Ok(2.0 * PI * r.powf(1.0 - p) * (1.0 - r * r).powf(0.5 * p))
}

/// Geodesic curvature of a parallel of radius `r`, `κ² = (1−r²)/r²`.
pub fn circle_curvature(r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::domain(format!("radius must lie in (0, 1], got {r}")));
    }
    Ok((1.0 - r * r).sqrt() / r)
}

/// Radius `√(1−p)` of the critical circle.
pub fn circle_radius(p: f64) -> Result<f64> {
    if !(p >= 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in [0, 1), got {p}")));
    }
    Ok((1.0 - p).sqrt())
}

/// Energies of the parallels of radius `1 − 2^{−k}`, `k = 1..=k_max`, which
/// tend to the equator and drive `Θ_p` to its unattained infimum zero.
pub fn infimum_sequence(p: f64, k_max: u32) -> Result<Vec<(f64, EnergyReport)>> {
    let limit = energy_limit(p, 1)?;
    (1..=k_max)
        .map(|k| {
            let eps = 0.5f64.powi(k as i32);
            let value = circle_energy(1.0 - eps, p)?;
            Ok((eps, EnergyReport { value, limit_at_a_star: limit, context: EnergyContext::InfimumSequence }))
        })
        .collect()
}

/// `∫ κ^p ds` along a traced curve, by the trapezoid rule over its samples.
pub fn energy_along_trace(trace: &CurveTrace) -> f64 {
    let st = &trace.states;
    let mut total = 0.0;
    for w in st.windows(2) {
        total += 0.5 * (w[0].kappa.powf(trace.p) + w[1].kappa.powf(trace.p)) * (w[1].s - w[0].s);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_radius_maximizes_circle_energy() {
        for i in 1..10 {
            let p = i as f64 / 10.0;
            let n = 100_000;
            let (mut best, mut arg) = (0.0, 0.0);
            for j in 1..n {
                let r = j as f64 / n as f64;
                let e = circle_energy(r, p).unwrap();
                if e > best {
                    best = e;
                    arg = r;
                }
            }
            assert!((arg - circle_radius(p).unwrap()).abs() < 2.0 / n as f64, "p = {p}");
        }
    }

    #[test]
    fn radius_values() {
        assert_eq!(circle_radius(0.0).unwrap(), 1.0);
        assert_eq!(circle_radius(0.75).unwrap(), 0.5);
        assert!(circle_radius(1.0 - 1e-12).unwrap() < 1e-5);
        assert!(circle_radius(1.0).is_err());
    }

    #[test]
    fn curvature_of_critical_circle() {
        for p in [0.1, 0.5, 0.9] {
            let k = circle_curvature(circle_radius(p).unwrap()).unwrap();
            assert!((k - (p / (1.0 - p)).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn circle_energy_tends_to_zero_at_equator() {
        // 2π(1−ε)^{1−p}(2ε − ε²)^{p/2} ~ 2π(2ε)^{p/2}: zero is approached slowly
        let eps = 1e-12;
        let e = circle_energy(1.0 - eps, 0.3).unwrap();
        let asymptote = 2.0 * PI * (2.0 * eps).powf(0.15);
        assert!(e > 0.0 && (e - asymptote).abs() < 1e-3 * asymptote);
        assert!(circle_energy(1.0 - 1e-15, 0.9).unwrap() < 1e-5);
        assert!(circle_energy(1.0, 0.3).is_err());
        assert!(circle_energy(0.0, 0.3).is_err());
    }

    #[test]
    fn closed_energy_near_threshold_matches_limit() {
        let p = 0.3;
        let prm = ElasticaParams::new(p, a_star(p).unwrap() * (1.0 + 1e-8)).unwrap();
        let r = energy_closed(&prm, 3).unwrap();
        assert!((r.value - r.limit_at_a_star).abs() < 1e-6 * r.value);
        let expect = 3.0 * 2f64.sqrt() * 0.3f64.powf(0.15) * 0.7f64.powf(0.35) * PI;
        assert!((r.limit_at_a_star - expect).abs() < 1e-12);
    }

    #[test]
    fn infimum_sequence_decreases() {
        // beyond the critical radius √(1−p) the parallels lose energy monotonically
        let p = 0.4;
        let r_crit = circle_radius(p).unwrap();
        let seq = infimum_sequence(p, 40).unwrap();
        let tail: Vec<_> = seq.iter().filter(|(eps, _)| 1.0 - eps > r_crit).collect();
        assert!(tail.len() > 30);
        for w in tail.windows(2) {
            assert!(w[1].1.value < w[0].1.value && w[1].1.value > 0.0);
        }
        // ...but a parallel at r = 1/2 is inside the critical radius and has less
        assert!(seq[0].1.value < seq[1].1.value);
    }
}
