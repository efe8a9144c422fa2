//! The curvature potential `Q_{p,a}(κ) = a κ^{2(1-p)} − (1−p)² κ² − p²`.
//!
//! Along a p-elastic curve the first integral reads
//! `(κ')² = κ² Q_{p,a}(κ) / (p²(1−p)²)`, so a non-constant periodic curvature
//! oscillates between the two positive zeros `β < α` of `Q`. This module
//! evaluates `Q`, locates those zeros, and classifies the root structure for
//! arbitrary real exponents.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::{bisect, safeguarded_newton};

/// Relative width at which root bisection hands over to Newton polishing.
const ROOT_REL_WIDTH: f64 = 1e-12;
const NEWTON_STEPS: usize = 2;
/// Below this relative root separation the orbit is treated as a circle.
pub const NEAR_CIRCULAR_REL_GAP: f64 = 1e-6;
/// Root residual contract: `|Q| <= ROOT_TOL * (1 + |a|)`.
pub const ROOT_TOL: f64 = 1e-10;

const CLASSIFY_GRID: usize = 512;
/// Scan window in `ln κ`.
const LOG_SCAN_LIMIT: f64 = 1e5;

/// The energy exponent `p` of `∫ κ^p ds`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Exponent(f64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ExponentClass {
    Zero,
    Unit,
    OpenInterval01,
    Two,
    NaturalAbove2,
    OtherReal,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::domain(format!("exponent must be finite, got {p}")));
        }
        Ok(Exponent(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn class(self) -> ExponentClass {
        let p = self.0;
        if p == 0.0 {
            ExponentClass::Zero
        } else if p == 1.0 {
            ExponentClass::Unit
        } else if p > 0.0 && p < 1.0 {
            ExponentClass::OpenInterval01
        } else if p == 2.0 {
            ExponentClass::Two
        } else if p > 2.0 && p.fract() == 0.0 {
            ExponentClass::NaturalAbove2
        } else {
            ExponentClass::OtherReal
        }
    }

    /// Only `p = 2` and `p ∈ (0, 1)` admit non-constant periodic curvature.
    pub fn admits_periodic_curvature(self) -> bool {
        matches!(self.class(), ExponentClass::Two | ExponentClass::OpenInterval01)
    }
}

fn check_open_unit(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("p must lie in (0, 1), got {p}")))
    }
}

/// `Q_{p,a}(κ)` by direct substitution.
pub fn q_eval(p: f64, a: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::domain(format!("curvature must be positive, got {kappa}")));
    }
    Ok(q_raw(p, a, kappa))
}

#[inline]
pub(crate) fn q_raw(p: f64, a: f64, kappa: f64) -> f64 {
    let c = 1.0 - p;
    a * kappa.powf(2.0 * c) - c * c * kappa * kappa - p * p
}

/// `dQ/dκ = 2(1−p) a κ^{1−2p} − 2(1−p)² κ`.
pub fn q_derivative(p: f64, a: f64, kappa: f64) -> f64 {
    let c = 1.0 - p;
    2.0 * c * a * kappa.powf(1.0 - 2.0 * p) - 2.0 * c * c * kappa
}

/// `d²Q/dκ² = 2(1−p)(1−2p) a κ^{−2p} − 2(1−p)²`.
pub fn q_second_derivative(p: f64, a: f64, kappa: f64) -> f64 {
    let c = 1.0 - p;
    2.0 * c * (1.0 - 2.0 * p) * a * kappa.powf(-2.0 * p) - 2.0 * c * c
}

/// Threshold `a_* = p^p (1−p)^{1−p}` below which no periodic orbit exists.
pub fn a_star(p: f64) -> Result<f64> {
    check_open_unit(p)?;
    Ok(a_star_unchecked(p))
}

pub(crate) fn a_star_unchecked(p: f64) -> f64 {
    (p * p.ln() + (1.0 - p) * (1.0 - p).ln()).exp()
}

/// Location `κ_* = (a/(1−p))^{1/(2p)}` of the critical point of `Q`
/// (a maximum for `p ∈ (0,1)`, a minimum for `p < 0`).
pub fn kappa_star(p: f64, a: f64) -> f64 {
    (a / (1.0 - p)).powf(1.0 / (2.0 * p))
}

/// Validated `(p, a)` together with the derived constants of the orbit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ElasticaParams {
    pub p: f64,
    pub a: f64,
    pub a_star: f64,
    pub kappa_star: f64,
    /// Minimum curvature.
    pub beta: f64,
    /// Maximum curvature.
    pub alpha: f64,
    /// `α − β < 1e-6 κ_*`; quadratures switch to the circle limit.
    pub near_circular: bool,
}

impl ElasticaParams {
    pub fn new(p: f64, a: f64) -> Result<Self> {
        check_open_unit(p)?;
        if !a.is_finite() {
            return Err(Error::domain(format!("a must be finite, got {a}")));
        }
        let a_star = a_star_unchecked(p);
        let (beta, alpha) = curvature_bounds(p, a)?;
        let kappa_star = kappa_star(p, a);
        Ok(ElasticaParams {
            p,
            a,
            a_star,
            kappa_star,
            beta,
            alpha,
            near_circular: alpha - beta < NEAR_CIRCULAR_REL_GAP * kappa_star,
        })
    }

    pub fn q(&self, kappa: f64) -> f64 {
        q_raw(self.p, self.a, kappa)
    }

    pub fn dq(&self, kappa: f64) -> f64 {
        q_derivative(self.p, self.a, kappa)
    }

    pub fn d2q(&self, kappa: f64) -> f64 {
        q_second_derivative(self.p, self.a, kappa)
    }

    /// `Q(κ)/(κ − r)` for a root `r ∈ {β, α}`, with `κ = r + delta`.
    ///
    /// Uses `a r^{2(1−p)} = p² + (1−p)² r²` to rewrite `Q` without the
    /// cancellation of the direct formula; the value at `delta = 0` is `Q'(r)`.
    pub(crate) fn q_over_offset(&self, root: f64, delta: f64) -> f64 {
        let p = self.p;
        let c = 1.0 - p;
        let expo = 2.0 * c;
        let amp = p * p + c * c * root * root;
        let x = delta / root;
        let ratio = if x == 0.0 {
            expo
        } else {
            (expo * x.ln_1p()).exp_m1() / x
        };
        amp * ratio / root - c * c * (2.0 * root + delta)
    }

    /// `a κ^{2(1−p)} − p² = Q + (1−p)² κ²`, positive on `[β, α]`.
    pub fn momentum_gap(&self, kappa: f64, q: f64) -> f64 {
        let c = 1.0 - self.p;
        q + c * c * kappa * kappa
    }

    /// `Q(κ_*) = p(1−p) κ_*² − p²`, written without large cancelling terms.
    pub fn q_max(&self) -> f64 {
        let p = self.p;
        p * (1.0 - p) * self.kappa_star * self.kappa_star - p * p
    }
}

/// The two positive zeros `(β, α)` of `Q_{p,a}`.
///
/// `β` is bracketed on `(L/2, κ_*)` with `L = (p²/a)^{1/(2(1−p))}` (where
/// `a κ^{2(1-p)} = p²`), `α` on `(κ_*, 2U)` with `U = (a/(1−p)²)^{1/(2p)}`.
/// Both brackets have analytically known signs. `α` is located on `Q/κ²`,
/// which stays finite and keeps its sign for large `κ`.
pub fn curvature_bounds(p: f64, a: f64) -> Result<(f64, f64)> {
    check_open_unit(p)?;
    let a_star = a_star_unchecked(p);
    let ks = kappa_star(p, a);
    let c = 1.0 - p;
    let q_max = p * c * ks * ks - p * p;
    if !(a > a_star) || !(q_max > 0.0) {
        return Err(Error::NoPeriodicOrbit { p, a, a_star });
    }
    if !ks.is_finite() || ks == 0.0 {
        return Err(Error::domain(format!(
            "kappa_* = {ks:e} is not representable for p = {p}, a = {a}"
        )));
    }

    let lower = 0.5 * (p * p / a).powf(1.0 / (2.0 * c));
    let q = |k: f64| q_raw(p, a, k);
    let dq = |k: f64| q_derivative(p, a, k);
    let (lo, hi) = bisect(q, lower, ks, ROOT_REL_WIDTH)?;
    let beta = safeguarded_newton(q, dq, 0.5 * (lo + hi), lo, hi, NEWTON_STEPS);

    let upper = 2.0 * (a / (c * c)).powf(1.0 / (2.0 * p));
    if !upper.is_finite() {
        return Err(Error::domain(format!(
            "maximum curvature overflows for p = {p}, a = {a}"
        )));
    }
    let scaled = |k: f64| a * k.powf(-2.0 * p) - c * c - p * p / (k * k);
    let dscaled = |k: f64| -2.0 * p * a * k.powf(-2.0 * p - 1.0) + 2.0 * p * p / (k * k * k);
    let (lo, hi) = bisect(scaled, ks, upper, ROOT_REL_WIDTH)?;
    let alpha = safeguarded_newton(scaled, dscaled, 0.5 * (lo + hi), lo, hi, NEWTON_STEPS);

    Ok((beta, alpha))
}

/// Which bracketed function was scanned by [`classify_positive_roots`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ScannedFunction {
    /// `Q_{p,a}` (used for `p < 1`).
    Q,
    /// `Q̃_{p,a} = a − (p−1)² κ^{2p} − p² κ^{2(p−1)}` (used for `p > 1`).
    QTilde,
    /// `p = 1`: the Euler–Lagrange equation has no solutions at all.
    NoCriticalCurves,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RootStructure {
    pub function: ScannedFunction,
    /// Simple positive roots, ascending. May underflow to 0 or overflow to
    /// infinity; `log_roots` always holds the finite logarithms.
    pub roots: Vec<f64>,
    /// `ln` of each root.
    pub log_roots: Vec<f64>,
    /// The scan saw `|f|` nearly vanish without a sign change (possible
    /// double root).
    pub tangency_suspected: bool,
}

impl RootStructure {
    pub fn count(&self) -> usize {
        self.log_roots.len()
    }
}

/// Counts simple positive roots of the function governing `(κ')²` by
/// sign-change scanning in `u = ln κ` plus bisection refinement.
///
/// Working in `u` keeps roots far outside the floating-point range of `κ`
/// (for `p` near 1 the lower root can sit below `1e-300`) countable.
pub fn classify_positive_roots(p: f64, a: f64) -> Result<RootStructure> {
    if !p.is_finite() || !a.is_finite() {
        return Err(Error::domain("p and a must be finite"));
    }
    if !(a > 0.0) {
        return Err(Error::domain(format!("a must be positive, got {a}")));
    }
    if p == 1.0 {
        return Ok(RootStructure {
            function: ScannedFunction::NoCriticalCurves,
            roots: Vec::new(),
            log_roots: Vec::new(),
            tangency_suspected: false,
        });
    }

    let function = if p < 1.0 { ScannedFunction::Q } else { ScannedFunction::QTilde };
    // ln κ_* for p ∈ (0,1) and p < 0.
    let critical = (p < 1.0 && p != 0.0)
        .then(|| (a.ln() - (1.0 - p).ln()) / (2.0 * p))
        .filter(|u| u.is_finite());

    // Sign-preserving evaluations: divide by the dominant power for κ > 1 so
    // large curvatures neither overflow nor cancel.
    let f = |u: f64| -> f64 {
        let c = 1.0 - p;
        if u > 0.0 {
            return a * (-2.0 * p * u).exp() - c * c - p * p * (-2.0 * u).exp();
        }
        match function {
            ScannedFunction::Q => a * (2.0 * c * u).exp() - c * c * (2.0 * u).exp() - p * p,
            _ => a - c * c * (2.0 * p * u).exp() - p * p * (-2.0 * c * u).exp(),
        }
    };

    let decade = 10f64.ln();
    let centre = critical.unwrap_or(0.0);
    let mut lo = centre - 6.0 * decade;
    let mut hi = centre + 6.0 * decade;
    if p > 0.0 && p < 1.0 {
        let c = 1.0 - p;
        let l = -(2.0f64.ln()) + (2.0 * p.ln() - a.ln()) / (2.0 * c);
        let h = 2.0f64.ln() + (a.ln() - 2.0 * c.ln()) / (2.0 * p);
        if l.is_finite() {
            lo = lo.min(l);
        }
        if h.is_finite() {
            hi = hi.max(h);
        }
    }
    let lo = lo.max(-LOG_SCAN_LIMIT);
    let hi = hi.min(LOG_SCAN_LIMIT);

    let step = (hi - lo) / (CLASSIFY_GRID - 1) as f64;
    let mut grid: Vec<f64> = (0..CLASSIFY_GRID).map(|i| lo + step * i as f64).collect();
    if let Some(u) = critical.filter(|u| *u > lo && *u < hi) {
        grid.push(u);
    }
    grid.sort_by(|x, y| x.total_cmp(y));

    let values: Vec<f64> = grid.iter().map(|&u| f(u)).collect();
    let mut log_roots = Vec::new();
    let mut tangency_suspected = false;
    let tiny = 1e-12 * (1.0 + a.abs());
    for i in 0..grid.len() - 1 {
        let (f0, f1) = (values[i], values[i + 1]);
        if !f0.is_finite() || !f1.is_finite() {
            continue;
        }
        if f0 == 0.0 {
            log_roots.push(grid[i]);
            continue;
        }
        if f0.signum() != f1.signum() && f1 != 0.0 {
            log_roots.push(bisect_log(f, grid[i], grid[i + 1]));
        } else if f0.abs() < tiny {
            tangency_suspected = true;
        }
    }
    let roots = log_roots.iter().map(|u| u.exp()).collect();
    Ok(RootStructure { function, roots, log_roots, tangency_suspected })
}

/// Bisection on a bracket in `ln κ` down to relative width `ROOT_REL_WIDTH`
/// of `κ`, which is an absolute width in `u`.
fn bisect_log(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    while hi - lo > ROOT_REL_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
