//! Reconstruction of p-elastic curves from the Euler–Lagrange equation and
//! their embedding in the unit sphere.
//!
//! The curvature obeys the expanded Euler–Lagrange equation
//! `κ'' = [(1−p)κ³ − pκ]/(p(p−1)) − (p−2)κ'²/κ`, started at the minimum
//! `κ(0) = β, κ'(0) = 0`. Alongside runs the angular progression
//! `ψ' = (1−p)√a κ^{2−p}/(aκ^{2(1−p)} − p²)`, pinned to `ψ(0) = 0`. The point
//! on the sphere is `γ = (x, √(1−x²) sin ψ, √(1−x²) cos ψ)` with
//! `x = pκ^{p−1}/√a`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::closure::{period_tol, solve_closure, ClosureIndex};
use crate::error::{Error, Result};
use crate::ode::{fixed_step, Options, Solver};
use crate::qpotential::{a_star, ElasticaParams};
use crate::roots::brent;

pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 512;
pub const DEFAULT_STEP_TOL: f64 = 1e-10;
/// Residual of the first integral, relative to `a`, that aborts integration.
pub const BREACH_TOL: f64 = 1e-6;
const PERIOD_QUAD_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CurveState {
    pub s: f64,
    pub kappa: f64,
    pub kappa_prime: f64,
    pub psi: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CurveTrace {
    pub p: f64,
    pub a: f64,
    pub index: Option<ClosureIndex>,
    pub periods: u32,
    /// Arc length of one curvature period.
    pub period: f64,
    pub samples_per_period: usize,
    pub states: Vec<CurveState>,
    pub points: Vec<[f64; 3]>,
    pub closure_gap: f64,
    pub winding_number: i64,
    pub max_first_integral_residual: f64,
}

/// Residual of `p²(1−p)²κ^{2(p−2)}κ'² + (1−p)²κ^{2p} + p²κ^{2(p−1)} = a`.
pub fn first_integral_residual(p: f64, a: f64, kappa: f64, kappa_prime: f64) -> f64 {
    let c = 1.0 - p;
    let kp = kappa.powf(p);
    let lhs = p * p * c * c * (kp / (kappa * kappa)).powi(2) * kappa_prime * kappa_prime
        + c * c * kp * kp
        + p * p * (kp / kappa).powi(2);
    lhs - a
}

/// `ψ'(κ)` along the curve.
pub fn psi_prime(p: f64, a: f64, kappa: f64) -> f64 {
    let c = 1.0 - p;
    c * a.sqrt() * kappa.powf(2.0 - p) / (a * kappa.powf(2.0 * c) - p * p)
}

/// `x = pκ^{p−1}/√a`, the height of the curve above the plane `x = 0`.
pub fn height(p: f64, a: f64, kappa: f64) -> f64 {
    p * kappa.powf(p - 1.0) / a.sqrt()
}

pub(crate) fn rhs(p: f64, a: f64) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] {
    let lin = 1.0 / (p * (p - 1.0));
    move |_, y| {
        let (k, kp) = (y[0], y[1]);
        let kpp = lin * ((1.0 - p) * k * k * k - p * k) - (p - 2.0) * kp * kp / k;
        [kp, kpp, psi_prime(p, a, k)]
    }
}

pub(crate) fn options(step_tol: f64) -> Options {
    Options { rtol: step_tol, atol: step_tol * 1e-2, ..Options::default() }
}

/// Integrates from the curvature minimum to `s_end`, sampling at the default
/// density of [`DEFAULT_SAMPLES_PER_PERIOD`] per curvature period.
pub fn integrate_profile(params: &ElasticaParams, s_end: f64, step_tol: f64) -> Result<Vec<CurveState>> {
    let rho = period_tol(params, PERIOD_QUAD_TOL)?;
    integrate_profile_sampled(params, s_end, step_tol, rho / DEFAULT_SAMPLES_PER_PERIOD as f64)
}

/// Samples at `s = j·spacing` and at `s_end` itself.
pub fn integrate_profile_sampled(
    params: &ElasticaParams,
    s_end: f64,
    step_tol: f64,
    spacing: f64,
) -> Result<Vec<CurveState>> {
    if !(s_end > 0.0) || !(spacing > 0.0) {
        return Err(Error::domain("s_end and spacing must be positive"));
    }
    if !(step_tol > 0.0 && step_tol < 1e-2) {
        return Err(Error::domain(format!("step tolerance {step_tol:e} out of range")));
    }
    let (p, a) = (params.p, params.a);
    let f = rhs(p, a);
    let y0 = [params.beta, 0.0, 0.0];
    let mut solver = Solver::new(&f, 0.0, y0, Options { h_max: spacing, ..options(step_tol) });
    let ratio = s_end / spacing;
    let aligned = (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0);
    let count = if aligned { ratio.round() as usize } else { ratio.floor() as usize };
    let mut out = Vec::with_capacity(count + 2);
    let push = |out: &mut Vec<CurveState>, s: f64, y: [f64; 3]| -> Result<()> {
        let r = first_integral_residual(p, a, y[0], y[1]);
        if !(r.abs() <= BREACH_TOL * a) {
            return Err(Error::InvariantBreach(format!(
                "first integral residual {r:e} at s = {s} exceeds {BREACH_TOL:e}·a"
            )));
        }
        out.push(CurveState { s, kappa: y[0], kappa_prime: y[1], psi: y[2] });
        Ok(())
    };
    push(&mut out, 0.0, y0)?;
    for j in 1..=count {
        let s = if aligned { s_end * j as f64 / count as f64 } else { j as f64 * spacing };
        solver.advance_to(s)?;
        push(&mut out, s, solver.y())?;
    }
    if !aligned && count as f64 * spacing < s_end {
        solver.advance_to(s_end)?;
        push(&mut out, s_end, solver.y())?;
    }
    Ok(out)
}

/// Arc length at which `(κ, κ')` first returns to `(β, 0)`, located on the
/// ODE trajectory by a sign change of `κ'` followed by root refinement on
/// single integrator steps.
pub fn return_time(params: &ElasticaParams, step_tol: f64) -> Result<f64> {
    let (p, a) = (params.p, params.a);
    let f = rhs(p, a);
    let rho_guess = period_tol(params, 1e-8)?;
    let h_max = rho_guess / 64.0;
    let mut solver = Solver::new(&f, 0.0, [params.beta, 0.0, 0.0], Options { h_max, ..options(step_tol) });
    let limit = 2.0 * rho_guess;
    let mut seen_negative = false;
    while solver.t() < limit {
        let st = solver.step(limit)?;
        if st.y1[1] < 0.0 {
            seen_negative = true;
            continue;
        }
        if seen_negative && st.y0[1] < 0.0 {
            let (t0, y0) = (st.t0, st.y0);
            let g = |t: f64| -> Result<f64> { Ok(fixed_step(&f, t0, &y0, t - t0)[1]) };
            return brent(g, t0, st.t1(), 1e-15 * st.t1(), 0.0);
        }
    }
    Err(Error::ConvergenceFailure("curvature did not return to its minimum".into()))
}

/// Maps states to the sphere and records closure diagnostics.
pub fn embed(p: f64, a: f64, states: Vec<CurveState>) -> Result<(Vec<[f64; 3]>, f64, i64, f64)> {
    let mut points = Vec::with_capacity(states.len());
    let mut resid: f64 = 0.0;
    for st in &states {
        let x = height(p, a, st.kappa);
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::domain(format!("height x = {x} outside (0, 1) at s = {}", st.s)));
        }
        let r = (1.0 - x * x).sqrt();
        let (sn, cs) = st.psi.sin_cos();
        points.push([x, r * sn, r * cs]);
        resid = resid.max(first_integral_residual(p, a, st.kappa, st.kappa_prime).abs());
    }
    let first = points[0];
    let last = *points.last().unwrap();
    let gap = dist(first, last);
    let winding = (states.last().unwrap().psi / TAU).round() as i64;
    Ok((points, gap, winding, resid))
}

fn dist(u: [f64; 3], v: [f64; 3]) -> f64 {
    ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2)).sqrt()
}

impl CurveTrace {
    /// Traces `periods` curvature periods at `samples_per_period` samples each.
    pub fn over_periods(
        params: &ElasticaParams,
        periods: u32,
        samples_per_period: usize,
        step_tol: f64,
    ) -> Result<Self> {
        if periods == 0 || samples_per_period < 4 {
            return Err(Error::domain("need at least one period and four samples per period"));
        }
        let rho = period_tol(params, PERIOD_QUAD_TOL)?;
        let n = samples_per_period;
        let total = periods as usize * n;
        let states = integrate_profile_sampled(params, rho * periods as f64, step_tol, rho / n as f64)?;
        debug_assert_eq!(states.len(), total + 1);
        let (points, closure_gap, winding_number, resid) = embed(params.p, params.a, states.clone())?;
        Ok(CurveTrace {
            p: params.p,
            a: params.a,
            index: None,
            periods,
            period: rho,
            samples_per_period: n,
            states,
            points,
            closure_gap,
            winding_number,
            max_first_integral_residual: resid,
        })
    }

    /// Solves the closure condition for `(n, m)` and traces the closed curve.
    pub fn closed(p: f64, n: u32, m: u32, closure_tol: f64, samples_per_period: usize, step_tol: f64) -> Result<Self> {
        let idx = solve_closure(p, &ClosureIndex::new(n, m)?, closure_tol)?;
        let params = ElasticaParams::new(p, idx.a_solved.expect("solved"))?;
        let mut tr = Self::over_periods(&params, m, samples_per_period, step_tol)?;
        tr.index = Some(idx);
        Ok(tr)
    }

    /// Closed curve at a known momentum `a` (skips the closure solve).
    pub fn closed_at(p: f64, a: f64, index: ClosureIndex, samples_per_period: usize, step_tol: f64) -> Result<Self> {
        let params = ElasticaParams::new(p, a)?;
        let mut tr = Self::over_periods(&params, index.m, samples_per_period, step_tol)?;
        tr.index = Some(ClosureIndex { a_solved: Some(a), ..index });
        Ok(tr)
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.samples_per_period as f64
    }

    pub fn total_length(&self) -> f64 {
        self.period * self.periods as f64
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        let len = self.states.last().map(|s| s.s).unwrap_or(0.0);
        let mut tr = self.clone();
        tr.states = self
            .states
            .iter()
            .rev()
            .map(|st| CurveState { s: len - st.s, kappa_prime: -st.kappa_prime, ..*st })
            .collect();
        tr.points.reverse();
        tr
    }
}

/// The critical circle of radius `√(1−p)`: constant curvature `√(p/(1−p))`
/// at height `x = √p`, with `a = a_*`.
pub fn circle_trace(p: f64, samples: usize) -> Result<CurveTrace> {
    let a = a_star(p)?;
    if samples < 4 {
        return Err(Error::domain("a circle trace needs at least four samples"));
    }
    let kappa = (p / (1.0 - p)).sqrt();
    let r = (1.0 - p).sqrt();
    let x = p.sqrt();
    let length = TAU * r;
    let h = length / samples as f64;
    let mut states = Vec::with_capacity(samples + 1);
    let mut points = Vec::with_capacity(samples + 1);
    for j in 0..=samples {
        let s = j as f64 * h;
        let psi = s / r;
        states.push(CurveState { s, kappa, kappa_prime: 0.0, psi });
        let (sn, cs) = psi.sin_cos();
        points.push([x, r * sn, r * cs]);
    }
    let gap = dist(points[0], points[samples]);
    Ok(CurveTrace {
        p,
        a,
        index: None,
        periods: 1,
        period: length,
        samples_per_period: samples,
        states,
        points,
        closure_gap: gap,
        winding_number: 1,
        max_first_integral_residual: first_integral_residual(p, a, kappa, 0.0).abs(),
    })
}

/// Fourth-order central differences of the sampled points, `(γ', γ'')`,
/// at every interior index with two neighbours on each side.
fn derivatives(tr: &CurveTrace) -> Vec<(usize, [f64; 3], [f64; 3])> {
    let h = tr.spacing();
    let pts = &tr.points;
    let mut out = Vec::new();
    if pts.len() < 5 {
        return out;
    }
    for j in 2..pts.len() - 2 {
        let mut d1 = [0.0; 3];
        let mut d2 = [0.0; 3];
        for c in 0..3 {
            let (m2, m1, z, p1, p2) = (pts[j - 2][c], pts[j - 1][c], pts[j][c], pts[j + 1][c], pts[j + 2][c]);
            d1[c] = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
            d2[c] = (-p2 + 16.0 * p1 - 30.0 * z + 16.0 * m1 - m2) / (12.0 * h * h);
        }
        out.push((j, d1, d2));
    }
    out
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Geodesic curvature recomputed from the embedded points,
/// `κ_g = det(T, γ, γ'')/|γ'|³` (normal `N = T × γ`), against the state
/// curvature. Returns the largest absolute deviation.
pub fn geodesic_curvature_check(tr: &CurveTrace) -> f64 {
    derivatives(tr)
        .into_iter()
        .map(|(j, d1, d2)| {
            let kg = det3(d1, tr.points[j], d2) / norm(d1).powi(3);
            (kg - tr.states[j].kappa).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest `| |γ'| − 1 |` over the trace.
pub fn unit_speed_residual(tr: &CurveTrace) -> f64 {
    derivatives(tr)
        .into_iter()
        .map(|(_, d1, _)| (norm(d1) - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Largest `|x'|` at samples where the curvature is extremal (`κ' = 0` at
/// multiples of half a period): the bounding parallels are met tangentially.
pub fn tangential_contact_residual(tr: &CurveTrace) -> f64 {
    let half = tr.samples_per_period / 2;
    if tr.samples_per_period % 2 != 0 {
        return f64::NAN;
    }
    derivatives(tr)
        .into_iter()
        .filter(|(j, _, _)| j % half == 0)
        .map(|(_, d1, _)| d1[0].abs())
        .fold(0.0, f64::max)
}

/// `ψ` strictly increasing across samples.
pub fn monotone_progression_check(tr: &CurveTrace) -> bool {
    tr.states.windows(2).all(|w| w[1].psi > w[0].psi)
}

/// Smallest and largest height `x` along the trace.
pub fn height_range(tr: &CurveTrace) -> (f64, f64) {
    tr.points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| (lo.min(q[0]), hi.max(q[0])))
}

/// Half a period after the start the curvature sits at its maximum.
pub fn half_period_state(tr: &CurveTrace) -> Option<CurveState> {
    tr.states.get(tr.samples_per_period / 2).copied()
}
