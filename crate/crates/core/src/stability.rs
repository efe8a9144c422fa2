//! Second variation of `Θ_p` along p-elastic curves.
//!
//! For normal variations `φN` the quadratic form is
//! `δ²Θ_p[φ] = −p(1−p)∫κ^{p−2}φ''² + (1−p)∫((2p+1)κ² + 2p)κ^{p−2}φ'² + ∫μ_p φ²`.
//! With `φ ≡ 1` and the first integral used to eliminate `κ'`, one curvature
//! period contributes `2Υ_p(a)` with `Υ_p(a) = ∫_β^α η_{p,a}(κ)/√Q dκ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::curve::CurveTrace;
use crate::elliptic::ellip_ke;
use crate::error::{Error, Result};
use crate::qpotential::{a_star, curvature_bounds, ElasticaParams};
use crate::quad::{integrate_over_arch, DEFAULT_REL_TOL};

/// Quadrature tolerance for the moments entering the rewritten forms; the
/// rewrites combine terms of opposite sign, so they need headroom.
const MOMENT_TOL: f64 = 1e-13;
pub const MIN_SAMPLES_PER_PERIOD: usize = 200;
pub const FOURIER_MAX_K: usize = 8;

/// `η_{p,a}(κ)`.
pub fn eta(params: &ElasticaParams, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::domain(format!("curvature must be positive, got {kappa}")));
    }
    Ok(eta_raw(params.p, params.a, kappa))
}

pub(crate) fn eta_raw(p: f64, a: f64, k: f64) -> f64 {
    let c = 1.0 - p;
    let kp = k.powf(p);
    let kmp = 1.0 / kp;
    -(p + 1.0) * a * k * kmp - (2.0 - p) * a * kmp / k
        + c * c * (2.0 * p + 1.0) * kp * k
        + 2.0 * (4.0 * p * p - 4.0 * p + 1.0) * kp / k
        + p * p * (3.0 - 2.0 * p) * kp / (k * k * k)
}

/// The `φ ≡ 1` integrand in arc length, written with `κ'` eliminated.
pub fn svf1_integrand(p: f64, a: f64, k: f64) -> f64 {
    let c = 1.0 - p;
    -(p + 1.0) / (p * c) * a * k.powf(2.0 - p) - (2.0 - p) / (p * c) * a * k.powf(-p)
        + c * (2.0 * p + 1.0) / p * k.powf(p + 2.0)
        + 2.0 * (4.0 * p * p - 4.0 * p + 1.0) / (p * c) * k.powf(p)
        + p * (3.0 - 2.0 * p) / c * k.powf(p - 2.0)
}

/// `μ_p` in terms of `κ` and `κ'`.
pub fn mu_p(p: f64, kappa: f64, kappa_prime: f64) -> f64 {
    let k = kappa;
    let kp = k.powf(p);
    -p * (1.0 - p) * ((p + 1.0) * k * k + 2.0 - p) * kp / (k * k * k * k) * kappa_prime * kappa_prime
        + (1.0 - p) * kp * k * k
        - 3.0 * kp
        + p * kp / (k * k)
}

/// `−4p⁴ + 8p³ + 2p² − 6p + 1`, whose sign selects among the rewrites.
pub fn c3(p: f64) -> f64 {
    (((-4.0 * p + 8.0) * p + 2.0) * p - 6.0) * p + 1.0
}

/// `(1 ∓ √(4 − √13))/2`: the roots of [`c3`] in `(0, 1)`.
pub fn rewrite_thresholds() -> (f64, f64) {
    let w = (4.0 - 13f64.sqrt()).sqrt();
    (0.5 * (1.0 - w), 0.5 * (1.0 + w))
}

/// Exponents and coefficients `(t_i, c_i)` of a three-term form
/// `Υ = Σ c_i M(t_i)` with `M(t) = ∫κ^t/√Q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThreeTerm {
    pub exponents: [f64; 3],
    pub coefficients: [f64; 3],
}

impl ThreeTerm {
    /// The form of the integration-by-parts reduction valid for all `p`.
    pub fn reduced(p: f64, a: f64) -> Self {
        ThreeTerm {
            exponents: [1.0 - p, -1.0 - p, p - 1.0],
            coefficients: [
                -a * p * p / (1.0 + p),
                -a * (1.0 - p).powi(2) / (2.0 - p),
                c3(p) / ((1.0 + p) * (2.0 - p)),
            ],
        }
    }

    /// The form used above the upper threshold.
    pub fn upper(p: f64, a: f64) -> Self {
        let c = 1.0 - p;
        let quartic = (((p - 2.0) * p - 3.0) * p + 6.0) * p - 1.0;
        let den = p * p * p * (2.0 - p);
        ThreeTerm {
            exponents: [1.0 - p, -1.0 - p, 1.0 + p],
            coefficients: [-a * c * quartic / den, -a * c * c / (2.0 - p), -c * c * c3(p) / den],
        }
    }

    /// The form used below the lower threshold.
    pub fn lower(p: f64, a: f64) -> Self {
        let c3c = (1.0 - p).powi(3);
        let quintic = ((((-p + 4.0) * p - 1.0) * p - 8.0) * p + 3.0) * p + 2.0;
        ThreeTerm {
            exponents: [1.0 - p, p - 3.0, -1.0 - p],
            coefficients: [
                -a * p * p / (1.0 + p),
                -p * p * c3(p) / ((1.0 + p) * c3c),
                -a * p * quintic / ((1.0 + p) * c3c * (2.0 - p)),
            ],
        }
    }

    pub fn evaluate(&self, params: &ElasticaParams, rel_tol: f64) -> Result<f64> {
        let mut total = 0.0;
        for (t, c) in self.exponents.iter().zip(self.coefficients) {
            total += c * integrate_over_arch(params, |k| k.powf(*t), rel_tol)?.value;
        }
        Ok(total)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Method {
    Quadrature,
    EllipticClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SecondVariationReport {
    pub p: f64,
    pub a: f64,
    pub m: u32,
    pub upsilon: f64,
    #[serde(rename = "delta2")]
    pub delta_squared: f64,
    /// Values of the three rewritten forms.
    pub rewrites: [f64; 3],
    /// `|rewrite − direct| / |direct|` for each form.
    pub residuals: [f64; 3],
    pub method: Method,
}

/// `Υ_p(a)` by direct quadrature of `η/√Q`.
pub fn upsilon(params: &ElasticaParams) -> Result<f64> {
    upsilon_tol(params, DEFAULT_REL_TOL)
}

pub fn upsilon_tol(params: &ElasticaParams, rel_tol: f64) -> Result<f64> {
    let (p, a) = (params.p, params.a);
    Ok(integrate_over_arch(params, |k| eta_raw(p, a, k), rel_tol)?.value)
}

/// Direct value plus the three rewrites and their residuals; the direct
/// value is selected.
pub fn upsilon_report(params: &ElasticaParams, m: u32) -> Result<SecondVariationReport> {
    let (p, a) = (params.p, params.a);
    let direct = upsilon_tol(params, MOMENT_TOL)?;
    let forms = [ThreeTerm::reduced(p, a), ThreeTerm::upper(p, a), ThreeTerm::lower(p, a)];
    let mut rewrites = [0.0; 3];
    let mut residuals = [0.0; 3];
    for (i, form) in forms.iter().enumerate() {
        rewrites[i] = form.evaluate(params, MOMENT_TOL)?;
        residuals[i] = (rewrites[i] - direct).abs() / direct.abs();
    }
    Ok(SecondVariationReport {
        p,
        a,
        m,
        upsilon: direct,
        delta_squared: 2.0 * m as f64 * direct,
        rewrites,
        residuals,
        method: Method::Quadrature,
    })
}

/// `lim_{a→a_*} Υ_p(a) = −√(2a_*) π`.
pub fn upsilon_limit(p: f64) -> Result<f64> {
    Ok(-(2.0 * a_star(p)?).sqrt() * PI)
}

/// Closed form for `p = 1/2`:
/// `Υ_{1/2}(a) = −(4/3)√α a E(ζ) − (4/3)√β K(ζ)`, `ζ² = (α−β)/α`,
/// where `αβ = 1` and `α + β = 4a`.
pub fn upsilon_elliptic_half(a: f64) -> Result<f64> {
    if !(a > 0.5) || !a.is_finite() {
        return Err(Error::domain(format!("need a > 1/2, got {a}")));
    }
    let disc = (4.0 * a * a - 1.0).sqrt();
    let alpha = 2.0 * a + disc;
    let beta = 1.0 / alpha;
    let (k, e) = ellip_ke(disc * 2.0 / alpha)?;
    Ok(-(4.0 / 3.0) * (alpha.sqrt() * a * e + beta.sqrt() * k))
}

/// As [`upsilon_elliptic_half`], reported with the other fields filled in.
pub fn upsilon_elliptic_report(a: f64, m: u32) -> Result<SecondVariationReport> {
    let u = upsilon_elliptic_half(a)?;
    curvature_bounds(0.5, a)?;
    Ok(SecondVariationReport {
        p: 0.5,
        a,
        m,
        upsilon: u,
        delta_squared: 2.0 * m as f64 * u,
        rewrites: [u; 3],
        residuals: [0.0; 3],
        method: Method::EllipticClosedForm,
    })
}

/// A scalar field along a trace with its first two arc-length derivatives,
/// sampled at the trace's states.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationField {
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub ddphi: Vec<f64>,
}

impl VariationField {
    pub fn constant(len: usize, value: f64) -> Self {
        VariationField { phi: vec![value; len], dphi: vec![0.0; len], ddphi: vec![0.0; len] }
    }

    /// `cos(2πks/L + shift)` over the trace length `L`.
    pub fn fourier(trace: &CurveTrace, k: usize, shift: f64) -> Self {
        let len = trace.states.last().map(|s| s.s).unwrap_or(0.0);
        let w = 2.0 * PI * k as f64 / len;
        let mut f = VariationField { phi: vec![], dphi: vec![], ddphi: vec![] };
        for st in &trace.states {
            let th = w * st.s + shift;
            f.phi.push(th.cos());
            f.dphi.push(-w * th.sin());
            f.ddphi.push(-w * w * th.cos());
        }
        f
    }

    fn check_periodic(&self) -> Result<()> {
        for (name, v) in [("phi", &self.phi), ("phi'", &self.dphi), ("phi''", &self.ddphi)] {
            let gap = (v[0] - v[v.len() - 1]).abs();
            if gap > 1e-10 {
                return Err(Error::domain(format!("{name} is not periodic (gap {gap:e})")));
            }
        }
        Ok(())
    }
}

fn check_trace(trace: &CurveTrace) -> Result<()> {
    if trace.samples_per_period < MIN_SAMPLES_PER_PERIOD {
        return Err(Error::Resolution {
            per_period: trace.samples_per_period,
            required: MIN_SAMPLES_PER_PERIOD,
        });
    }
    Ok(())
}

/// The three weights of the quadratic form at one sample.
fn weights(p: f64, k: f64, kp: f64) -> [f64; 3] {
    let base = k.powf(p - 2.0);
    [
        -p * (1.0 - p) * base,
        (1.0 - p) * ((2.0 * p + 1.0) * k * k + 2.0 * p) * base,
        mu_p(p, k, kp),
    ]
}

/// `δ²Θ_p[φ]` by the periodic trapezoid rule over the trace samples.
pub fn second_variation(trace: &CurveTrace, phi: &VariationField) -> Result<f64> {
    check_trace(trace)?;
    let n = trace.states.len();
    if phi.phi.len() != n || phi.dphi.len() != n || phi.ddphi.len() != n {
        return Err(Error::domain("variation field must be sampled at the trace states"));
    }
    phi.check_periodic()?;
    let h = trace.spacing();
    let mut total = 0.0;
    for j in 0..n - 1 {
        let st = &trace.states[j];
        let w = weights(trace.p, st.kappa, st.kappa_prime);
        total += w[0] * phi.ddphi[j].powi(2) + w[1] * phi.dphi[j].powi(2) + w[2] * phi.phi[j].powi(2);
    }
    Ok(total * h)
}

/// `−2Θ_p` at the critical circle, `−4π p^{p/2}(1−p)^{(1−p)/2}`.
pub fn circle_second_variation(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    Ok(-4.0 * PI * p.powf(0.5 * p) * (1.0 - p).powf(0.5 * (1.0 - p)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FourierDiagnostic {
    pub max_k: usize,
    /// Most negative eigenvalue of the form on the orthonormal trigonometric basis.
    pub min_eigenvalue: f64,
    /// Its eigenvector: constant, then `(cos, sin)` pairs for `k = 1..=max_k`.
    pub direction: Vec<f64>,
    /// Rayleigh quotient of the constant mode, `δ²[1]/L`.
    pub constant_mode: f64,
}

/// Restricts the second variation to `span{1, cos(2πks/L), sin(2πks/L)}`,
/// `k ≤ max_k`, and diagonalizes it.
pub fn fourier_diagnostic(trace: &CurveTrace, max_k: usize) -> Result<FourierDiagnostic> {
    check_trace(trace)?;
    if max_k > FOURIER_MAX_K {
        return Err(Error::domain(format!("max_k must not exceed {FOURIER_MAX_K}")));
    }
    let len = trace.states.last().map(|s| s.s).unwrap_or(0.0);
    let dim = 2 * max_k + 1;
    let n = trace.states.len() - 1;
    let h = trace.spacing();
    // Basis samples (value, first, second derivative), orthonormal in L².
    let mut basis = vec![vec![[0.0f64; 3]; n]; dim];
    for (j, st) in trace.states.iter().take(n).enumerate() {
        basis[0][j] = [1.0 / len.sqrt(), 0.0, 0.0];
        for k in 1..=max_k {
            let w = 2.0 * PI * k as f64 / len;
            let amp = (2.0 / len).sqrt();
            let (sn, cs) = (w * st.s).sin_cos();
            basis[2 * k - 1][j] = [amp * cs, -amp * w * sn, -amp * w * w * cs];
            basis[2 * k][j] = [amp * sn, amp * w * cs, -amp * w * w * sn];
        }
    }
    let wts: Vec<[f64; 3]> = trace
        .states
        .iter()
        .take(n)
        .map(|st| weights(trace.p, st.kappa, st.kappa_prime))
        .collect();
    let mut mat = DMatrix::<f64>::zeros(dim, dim);
    for r in 0..dim {
        for c in r..dim {
            let mut acc = 0.0;
            for j in 0..n {
                let (u, v, w) = (basis[r][j], basis[c][j], wts[j]);
                acc += w[0] * u[2] * v[2] + w[1] * u[1] * v[1] + w[2] * u[0] * v[0];
            }
            mat[(r, c)] = acc * h;
            mat[(c, r)] = acc * h;
        }
    }
    let constant_mode = mat[(0, 0)];
    let eig = SymmetricEigen::new(mat);
    let (imin, min_eigenvalue) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty spectrum");
    let direction = eig.eigenvectors.column(imin).iter().copied().collect();
    Ok(FourierDiagnostic { max_k, min_eigenvalue, direction, constant_mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::circle_trace;
    use crate::energy::circle_energy;
    use crate::quad::kappa_moment_tol;

    #[test]
    fn eta_at_unit_curvature_for_half() {
        let prm = ElasticaParams::new(0.5, 1.0).unwrap();
        assert!((eta(&prm, 1.0).unwrap() + 2.0).abs() < 1e-15);
        assert!(eta(&prm, 0.0).is_err());
    }

    #[test]
    fn eta_is_rescaled_svf1_integrand() {
        let prm = ElasticaParams::new(0.3, 1.2).unwrap();
        for i in 0..20 {
            let k = prm.beta + (prm.alpha - prm.beta) * (i as f64 + 0.5) / 20.0;
            let lhs = prm.p * (1.0 - prm.p) * svf1_integrand(prm.p, prm.a, k) / k;
            let rhs = eta(&prm, k).unwrap();
            assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn mu_matches_svf1_on_the_first_integral() {
        // eliminating κ' with the first integral turns μ_p into the svf1 integrand
        let (p, a) = (0.3, 1.2);
        let prm = ElasticaParams::new(p, a).unwrap();
        let k = 0.5 * (prm.beta + prm.alpha);
        let kp2 = k * k * prm.q(k) / (p * p * (1.0 - p).powi(2));
        let mu = mu_p(p, k, kp2.sqrt());
        let svf = svf1_integrand(p, a, k);
        assert!((mu - svf).abs() < 1e-12 * svf.abs());
    }

    #[test]
    fn eta_at_threshold_is_negative() {
        for p in [0.1, 0.3, 0.5, 0.9] {
            let a = a_star(p).unwrap();
            let ks = crate::qpotential::kappa_star(p, a);
            let e = eta_raw(p, a, ks);
            assert!(e < 0.0);
            // η(κ_*)/√(−Q''/2)·π is the closed-form limit
            let c = 1.0 - p;
            let q2 = 2.0 * c * (1.0 - 2.0 * p) * a * ks.powf(-2.0 * p) - 2.0 * c * c;
            let lim = e * PI / (-0.5 * q2).sqrt();
            assert!((lim - upsilon_limit(p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rewrites_agree_with_direct() {
        for (p, a) in [(0.3, 0.8), (0.1, 2.0), (0.92, 1.5), (0.5, 10.0)] {
            let r = upsilon_report(&ElasticaParams::new(p, a).unwrap(), 1).unwrap();
            for res in r.residuals {
                assert!(res < 1e-8, "p = {p}, a = {a}: {:?}", r.residuals);
            }
            assert!(r.upsilon < 0.0);
            assert_eq!(r.delta_squared, 2.0 * r.upsilon);
        }
    }

    #[test]
    fn parts_identity_instance() {
        let prm = ElasticaParams::new(0.4, 1.1).unwrap();
        let (p, a, t) = (prm.p, prm.a, 0.7);
        let m = |e: f64| kappa_moment_tol(&prm, e, 1e-13).unwrap();
        let lhs = (1.0 - p).powi(2) * (1.0 + t) * m(1.0 + t);
        let rhs = a * (1.0 + t - p) * m(1.0 + t - 2.0 * p) - t * p * p * m(t - 1.0);
        assert!((lhs - rhs).abs() < 1e-11 * (lhs.abs() + rhs.abs()));
    }

    #[test]
    fn coefficient_signs() {
        let (lo, hi) = rewrite_thresholds();
        assert!(c3(lo).abs() < 1e-12 && c3(hi).abs() < 1e-12);
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let f = ThreeTerm::reduced(p, 1.0);
            assert!(f.coefficients[0] < 0.0 && f.coefficients[1] < 0.0);
            assert_eq!(f.coefficients[2] <= 0.0, (lo..=hi).contains(&p), "p = {p}");
            if p > hi {
                assert!(ThreeTerm::upper(p, 1.0).coefficients.iter().all(|c| *c < 0.0), "p = {p}");
            }
            if p < lo {
                assert!(ThreeTerm::lower(p, 1.0).coefficients.iter().all(|c| *c < 0.0), "p = {p}");
            }
        }
    }

    #[test]
    fn elliptic_half_against_quadrature_and_limit() {
        for a in [0.501, 0.8, 1.0, 5.0, 40.0] {
            let q = upsilon_tol(&ElasticaParams::new(0.5, a).unwrap(), 1e-13).unwrap();
            let e = upsilon_elliptic_half(a).unwrap();
            assert!((q - e).abs() < 1e-10 * e.abs(), "a = {a}: {q} vs {e}");
        }
        assert!((upsilon_elliptic_half(0.5 * (1.0 + 1e-12)).unwrap() + PI).abs() < 1e-5);
        assert!(upsilon_elliptic_half(0.5).is_err());
    }

    #[test]
    fn elliptic_half_uses_series_independent_values() {
        use crate::elliptic::series;
        let a = 1.0;
        let alpha = 2.0 + 3f64.sqrt();
        let beta = 2.0 - 3f64.sqrt();
        let m = (alpha - beta) / alpha;
        let by_series = -(4.0 / 3.0) * (alpha.sqrt() * a * series::e(m) + beta.sqrt() * series::k(m));
        assert!((upsilon_elliptic_half(a).unwrap() - by_series).abs() < 1e-12 * by_series.abs());
    }

    #[test]
    fn circle_form_is_minus_twice_energy() {
        for p in [0.2, 0.5, 0.8] {
            let tr = circle_trace(p, 256).unwrap();
            let v = second_variation(&tr, &VariationField::constant(tr.states.len(), 1.0)).unwrap();
            let c = circle_second_variation(p).unwrap();
            assert!((v - c).abs() < 1e-10 * c.abs(), "p = {p}");
            let r = (1.0 - p).sqrt();
            assert!((c + 2.0 * circle_energy(r, p).unwrap()).abs() < 1e-12);
        }
        assert!((circle_second_variation(0.5).unwrap() + 2.0 * 2f64.sqrt() * PI).abs() < 1e-12);
        assert!(circle_second_variation(1.0).is_err());
    }

    #[test]
    fn zero_field_and_resolution_guard() {
        let tr = circle_trace(0.3, 256).unwrap();
        let z = VariationField::constant(tr.states.len(), 0.0);
        assert_eq!(second_variation(&tr, &z).unwrap(), 0.0);
        let coarse = circle_trace(0.3, 100).unwrap();
        let one = VariationField::constant(coarse.states.len(), 1.0);
        assert!(matches!(second_variation(&coarse, &one), Err(Error::Resolution { .. })));
    }

    #[test]
    fn fourier_diagnostic_bounds_constant_mode() {
        let tr = circle_trace(0.4, 256).unwrap();
        let d = fourier_diagnostic(&tr, 4).unwrap();
        assert!(d.min_eigenvalue <= d.constant_mode + 1e-12);
        assert!(d.constant_mode < 0.0);
        assert_eq!(d.direction.len(), 9);
    }
}
