//! Quadrature of `∫_β^α f(κ) / √Q(κ) dκ` over one arch of the potential.
//!
//! Both endpoints are simple zeros of `Q`, so the integrand has inverse square
//! root singularities there. The interval is split at its midpoint and each
//! half is mapped by a `sin²` substitution anchored at its own endpoint:
//! `κ = β + d sin²θ` and `κ = α − d sin²φ`, `θ, φ ∈ [0, π/4]`, `d = α − β`.
//! Then `dκ/√Q = 2 dθ / √g` with `g = Q / ((κ−β)(α−κ))`, which is smooth and
//! positive. `Q` itself is evaluated relative to the nearer root so that `g`
//! keeps full relative accuracy right up to the endpoint.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_4, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qpotential::ElasticaParams;

pub const DEFAULT_REL_TOL: f64 = 1e-10;
pub const MIN_REL_TOL: f64 = 1e-14;
pub const MAX_REL_TOL: f64 = 1e-3;
pub const PANEL_CAP: usize = 5000;

/// A point of the arch: the curvature and `Q` at that curvature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArchPoint {
    pub kappa: f64,
    /// `Q(κ)`, accurate in relative terms even next to `β` and `α`.
    pub q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SingularIntegral {
    pub params: ElasticaParams,
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
    /// The circle limit was used instead of quadrature.
    pub circle_limit: bool,
}

/// `∫_β^α numerator(κ)/√Q dκ` to relative tolerance `rel_tol`.
pub fn integrate_over_arch<F>(params: &ElasticaParams, numerator: F, rel_tol: f64) -> Result<SingularIntegral>
where
    F: Fn(f64) -> f64,
{
    integrate_points(params, |pt: ArchPoint| numerator(pt.kappa), rel_tol)
}

/// As [`integrate_over_arch`] but the integrand also sees the accurate `Q`.
pub fn integrate_points<F>(params: &ElasticaParams, f: F, rel_tol: f64) -> Result<SingularIntegral>
where
    F: Fn(ArchPoint) -> f64,
{
    if !(MIN_REL_TOL..=MAX_REL_TOL).contains(&rel_tol) {
        return Err(Error::domain(format!(
            "relative tolerance {rel_tol:e} outside [{MIN_REL_TOL:e}, {MAX_REL_TOL:e}]"
        )));
    }
    if params.near_circular {
        let value = near_circular_limit(params, &f)?;
        return Ok(SingularIntegral {
            params: *params,
            value,
            error_estimate: value.abs() * (params.alpha - params.beta) / params.kappa_star,
            panels: 0,
            circle_limit: true,
        });
    }
    Arch::new(params, f).integrate(rel_tol)
}

/// `f(κ_*) π / √(−Q''(κ_*)/2)`: the value of the integral as the arch
/// shrinks onto the maximum of `Q`.
pub fn near_circular_limit<F>(params: &ElasticaParams, f: &F) -> Result<f64>
where
    F: Fn(ArchPoint) -> f64,
{
    let k = params.kappa_star;
    let curv = -0.5 * params.d2q(k);
    if !(curv > 0.0) {
        return Err(Error::domain("Q has no strict maximum at kappa_*"));
    }
    let fv = f(ArchPoint { kappa: k, q: params.q_max().max(0.0) });
    if !fv.is_finite() {
        return Err(Error::domain(format!("integrand not finite at kappa_* = {k}")));
    }
    Ok(fv * PI / curv.sqrt())
}

/// `M(t) = ∫_β^α κ^t / √Q dκ` at the library tolerance.
pub fn kappa_moment(params: &ElasticaParams, t: f64) -> Result<f64> {
    kappa_moment_tol(params, t, DEFAULT_REL_TOL)
}

pub fn kappa_moment_tol(params: &ElasticaParams, t: f64, rel_tol: f64) -> Result<f64> {
    Ok(integrate_over_arch(params, |k| k.powf(t), rel_tol)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Beta,
    Alpha,
}

struct Arch<'a, F> {
    prm: &'a ElasticaParams,
    d: f64,
    f: F,
}

impl<'a, F> Arch<'a, F>
where
    F: Fn(ArchPoint) -> f64,
{
    fn new(prm: &'a ElasticaParams, f: F) -> Self {
        Arch { prm, d: prm.alpha - prm.beta, f }
    }

    /// Regularized integrand `2 f(κ)/√g` in the half-arch variable.
    fn eval(&self, side: Side, angle: f64) -> Result<f64> {
        let (s, c) = angle.sin_cos();
        let near = self.d * s * s;
        let far = self.d * c * c;
        let (kappa, q, g) = match side {
            Side::Beta => {
                let r = self.prm.beta;
                let slope = self.prm.q_over_offset(r, near);
                (r + near, slope * near, slope / far)
            }
            Side::Alpha => {
                let r = self.prm.alpha;
                let slope = self.prm.q_over_offset(r, -near);
                (r - near, -slope * near, -slope / far)
            }
        };
        if !(g > 0.0) {
            return Err(Error::domain(format!(
                "Q is not positive inside the arch at kappa = {kappa:e} (g = {g:e}); roots inconsistent"
            )));
        }
        let v = (self.f)(ArchPoint { kappa, q });
        if !v.is_finite() {
            return Err(Error::domain(format!("numerator not finite at kappa = {kappa:e}")));
        }
        Ok(2.0 * v / g.sqrt())
    }

    /// Breakpoints `π/4 · 2^{-j}` down to the physical length scale near the
    /// anchoring root.
    fn graded_partition(&self, side: Side) -> Vec<f64> {
        let p = self.prm.p;
        let c2 = (1.0 - p) * (1.0 - p);
        let r = match side {
            Side::Beta => self.prm.beta,
            Side::Alpha => self.prm.alpha,
        };
        let slope = self.prm.dq(r).abs();
        let mut scale = r.min(self.d);
        if slope > 0.0 {
            scale = scale.min(c2 * r * r / slope);
        }
        let floor = 1e-3 * scale;
        let mut pts = vec![FRAC_PI_4];
        let mut t = FRAC_PI_4;
        while self.d * t.sin().powi(2) > floor && pts.len() < 1100 {
            t *= 0.5;
            pts.push(t);
        }
        pts.push(0.0);
        pts.reverse();
        pts
    }

    fn integrate(&self, rel_tol: f64) -> Result<SingularIntegral> {
        let mut heap = BinaryHeap::new();
        let mut value = 0.0;
        let mut err = 0.0;
        let mut resabs = 0.0;
        for side in [Side::Beta, Side::Alpha] {
            let pts = self.graded_partition(side);
            for w in pts.windows(2) {
                let panel = self.panel(side, w[0], w[1])?;
                value += panel.value;
                err += panel.error;
                resabs += panel.resabs;
                heap.push(panel);
            }
        }
        loop {
            let target = (rel_tol * value.abs()).max(50.0 * f64::EPSILON * resabs);
            if err <= target {
                break;
            }
            if heap.len() >= PANEL_CAP {
                return Err(Error::ConvergenceFailure(format!(
                    "arch quadrature: {PANEL_CAP} panels, error {err:e} > target {target:e}"
                )));
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.lo + worst.hi);
            if !(mid > worst.lo && mid < worst.hi) {
                // Panel cannot be split further; accept its contribution.
                heap.push(Panel { error: 0.0, ..worst });
                err -= worst.error;
                continue;
            }
            let left = self.panel(worst.side, worst.lo, mid)?;
            let right = self.panel(worst.side, mid, worst.hi)?;
            value += left.value + right.value - worst.value;
            err += left.error + right.error - worst.error;
            resabs += left.resabs + right.resabs - worst.resabs;
            heap.push(left);
            heap.push(right);
        }
        // Re-sum from the panels to shed drift from the running updates.
        let mut panels: Vec<Panel> = heap.into_vec();
        panels.sort_by(|a, b| (a.side as u8, a.lo).partial_cmp(&(b.side as u8, b.lo)).unwrap());
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        Ok(SingularIntegral {
            params: *self.prm,
            value,
            error_estimate: error,
            panels: panels.len(),
            circle_limit: false,
        })
    }

    fn panel(&self, side: Side, lo: f64, hi: f64) -> Result<Panel> {
        let r = gk15(|x| self.eval(side, x), lo, hi)?;
        Ok(Panel { side, lo, hi, value: r.value, error: r.error, resabs: r.resabs })
    }
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    side: Side,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

struct Gk {
    value: f64,
    error: f64,
    resabs: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// 7-point Gauss / 15-point Kronrod panel with QUADPACK error rescaling.
fn gk15<F>(f: F, a: f64, b: f64) -> Result<Gk>
where
    F: Fn(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let res_abs = res_abs * h;
    let res_asc = res_asc * h;
    let raw = ((res_k - res_g) * half).abs();
    Ok(Gk { value: res_k * half, error: rescale_error(raw, res_abs, res_asc), resabs: res_abs })
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err;
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{ellip_e, ellip_k};

    fn half(a: f64) -> ElasticaParams {
        ElasticaParams::new(0.5, a).unwrap()
    }

    #[test]
    fn gk15_is_exact_for_polynomials() {
        let r = gk15(|x| Ok(x.powi(10) - 3.0 * x.powi(3)), -1.0, 2.0).unwrap();
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 0.75 * (16.0 - 1.0);
        assert!((r.value - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn zero_numerator() {
        let r = integrate_over_arch(&half(1.0), |_| 0.0, 1e-10).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn half_case_elementary_moments() {
        // Q = (α−κ)(κ−β)/4 for p = 1/2, so M(0) = 2π and M(1) = π(α+β) = 4πa.
        for a in [0.6, 1.0, 3.0, 20.0] {
            let prm = half(a);
            let m0 = kappa_moment_tol(&prm, 0.0, 1e-13).unwrap();
            let m1 = kappa_moment_tol(&prm, 1.0, 1e-13).unwrap();
            assert!((m0 - 2.0 * PI).abs() < 1e-11, "a = {a}: {m0}");
            assert!((m1 - 4.0 * PI * a).abs() < 1e-10 * m1, "a = {a}: {m1}");
        }
    }

    #[test]
    fn half_case_square_root_moment_is_complete_e() {
        let prm = half(1.0);
        let zeta2 = (prm.alpha - prm.beta) / prm.alpha;
        let m = kappa_moment_tol(&prm, 0.5, 1e-13).unwrap();
        let closed = 4.0 * prm.alpha.sqrt() * ellip_e(zeta2).unwrap();
        assert!((m - closed).abs() < 1e-11 * closed);
    }

    #[test]
    fn tolerance_range_enforced() {
        assert!(integrate_over_arch(&half(1.0), |_| 1.0, 1e-16).is_err());
        assert!(integrate_over_arch(&half(1.0), |_| 1.0, 1e-2).is_err());
    }

    #[test]
    fn tighter_tolerance_never_reports_larger_error() {
        let prm = ElasticaParams::new(0.3, 1.7).unwrap();
        let mut last = f64::INFINITY;
        let mut tol = 1e-3;
        while tol >= 1e-13 {
            let r = integrate_over_arch(&prm, |k| k.powf(-0.7), tol).unwrap();
            assert!(r.error_estimate <= last, "tol = {tol:e}");
            assert!(r.error_estimate <= tol * r.value.abs() || r.error_estimate < 1e-13);
            last = r.error_estimate;
            tol *= 0.5;
        }
    }

    #[test]
    fn near_circular_limit_matches_quadrature_just_outside() {
        let p = 0.3;
        let a_star = crate::qpotential::a_star(p).unwrap();
        let tagged = ElasticaParams::new(p, a_star * (1.0 + 1e-14)).unwrap();
        assert!(tagged.near_circular);
        let inside = integrate_over_arch(&tagged, |_| 1.0, 1e-10).unwrap();
        assert!(inside.circle_limit);
        let outside = ElasticaParams::new(p, a_star * (1.0 + 1e-9)).unwrap();
        assert!(!outside.near_circular);
        let q = integrate_over_arch(&outside, |_| 1.0, 1e-9).unwrap();
        assert!((q.value - inside.value).abs() < 1e-6 * inside.value);
    }

    #[test]
    fn large_momentum_sees_boundary_layer() {
        // Λ → π as a → ∞; the mass sits in a thin layer next to β.
        let p = 0.3;
        let a = crate::qpotential::a_star(p).unwrap() * 1e4;
        let prm = ElasticaParams::new(p, a).unwrap();
        let c2 = (1.0 - p) * (1.0 - p);
        let r = integrate_points(
            &prm,
            |pt| pt.kappa.powf(1.0 - p) / prm.momentum_gap(pt.kappa, pt.q),
            1e-10,
        )
        .unwrap();
        let lam = 2.0 * p * c2 * a.sqrt() * r.value;
        assert!((lam - PI).abs() < 0.05, "{lam}");
    }

    #[test]
    fn complete_k_from_inverse_sqrt_moment_is_consistent() {
        // M(-1/2)/2 for p = 1/2 equals 2K/√α (a standard reduction).
        let prm = half(2.0);
        let zeta2 = (prm.alpha - prm.beta) / prm.alpha;
        let m = kappa_moment_tol(&prm, -0.5, 1e-13).unwrap();
        let closed = 4.0 * ellip_k(zeta2).unwrap() / prm.alpha.sqrt();
        assert!((m - closed).abs() < 1e-10 * closed);
    }
}
