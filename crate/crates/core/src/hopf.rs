//! Hopf tori over closed curves in `S²`.
//!
//! `S³` is the sphere of radius 2 in `ℂ² ≅ ℝ⁴` and the Hopf map is
//! `π̃(z, ω) = ¼(|z|² − |ω|², 2z̄ω)`, read as `(x, y + iz) ∈ ℝ × ℂ`. Over a
//! point `(x, √(1−x²) sin ψ, √(1−x²) cos ψ)` the fiber is
//!
//! `z = √(2(1+x)) e^{iθ}`, `ω = i√(2(1−x)) e^{i(θ−ψ)}`, `θ ∈ ℝ/2π`,
//!
//! and the lift is horizontal (orthogonal to `iγ̄`) exactly when
//! `θ' = ½(1−x)ψ'`. The phase picked up around a closed base curve is half
//! the area it encloses, so a great circle returns with phase `π`.
//!
//! The torus `X(t, s) = e^{it}γ̄(s)` is flat with mean curvature `κ/2`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{height, options, psi_prime, rhs, CurveTrace, DEFAULT_STEP_TOL};
use crate::error::{Error, Result};
use crate::mesh::{dot, norm, split_quads, TriMesh};
use crate::ode::{Options, Solver};

/// Radius of the sphere carrying the tori.
pub const RADIUS: f64 = 2.0;
pub const SEED_TOL: f64 = 1e-8;
pub const ANGLE_TOL: f64 = 1e-6;
pub const MAX_COVERS: u32 = 64;
pub const POLE_TOL: f64 = 1e-6;
pub const DEFAULT_T_SAMPLES: usize = 256;
pub const DEFAULT_S_SAMPLES_PER_PERIOD: usize = 128;
pub const DEFAULT_POLE: [f64; 4] = [0.0, 0.0, 0.0, -1.0];
/// Base curves whose endpoints are farther apart than this are meshed as
/// open cylinders.
const CLOSED_GAP: f64 = 1e-6;

pub fn to_r4(q: [Complex64; 2]) -> [f64; 4] {
    [q[0].re, q[0].im, q[1].re, q[1].im]
}

pub fn from_r4(v: [f64; 4]) -> [Complex64; 2] {
    [Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])]
}

/// `π̃(z, ω)` as a point `(x, y, z)` of `ℝ³`.
pub fn hopf_project(v: [f64; 4]) -> [f64; 3] {
    let [z, w] = from_r4(v);
    let c = z.conj() * w * 0.5;
    [0.25 * (z.norm_sqr() - w.norm_sqr()), c.re, c.im]
}

fn fiber_point(x: f64, psi: f64, theta: f64) -> [Complex64; 2] {
    let z = Complex64::from_polar((2.0 * (1.0 + x)).max(0.0).sqrt(), theta);
    let w = Complex64::i() * Complex64::from_polar((2.0 * (1.0 - x)).max(0.0).sqrt(), theta - psi);
    [z, w]
}

fn rotate(v: [f64; 4], phase: f64) -> [f64; 4] {
    let e = Complex64::from_polar(1.0, phase);
    let [z, w] = from_r4(v);
    to_r4([e * z, e * w])
}

fn dist3(u: [f64; 3], v: [f64; 3]) -> f64 {
    ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2)).sqrt()
}

/// Distance from `angle` to the nearest multiple of `2π`.
fn angle_to_lattice(angle: f64) -> f64 {
    ((angle + PI).rem_euclid(TAU) - PI).abs()
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Lift {
    pub s: Vec<f64>,
    /// `γ̄(s)` as `(Re z, Im z, Re ω, Im ω)`.
    pub points: Vec<[f64; 4]>,
    pub theta: Vec<f64>,
    /// Phase `H ∈ [0, 2π)` with `γ̄(L) = e^{iH}γ̄(0)`.
    pub holonomy_angle: f64,
    /// The base curve closes, so the holonomy is meaningful.
    pub base_closed: bool,
}

/// Lifts the trace horizontally from `seed` (default: the fiber point over
/// `γ(0)` with real, positive first component).
pub fn horizontal_lift(trace: &CurveTrace, seed: Option<[f64; 4]>) -> Result<Lift> {
    let (p, a) = (trace.p, trace.a);
    let st0 = *trace.states.first().ok_or_else(|| Error::domain("empty trace"))?;
    let x0 = height(p, a, st0.kappa);
    let theta0 = match seed {
        None => 0.0,
        Some(v) => {
            let dev = (norm(&v) - RADIUS).abs().max(dist3(hopf_project(v), trace.points[0]));
            if !(dev <= SEED_TOL) {
                return Err(Error::Seed { deviation: dev });
            }
            let [z, w] = from_r4(v);
            if 1.0 + x0 > 1e-12 {
                z.arg()
            } else {
                (w / (Complex64::i() * Complex64::from_polar(1.0, -st0.psi))).arg()
            }
        }
    };

    let base = rhs(p, a);
    let f = move |s: f64, y: &[f64; 4]| {
        let d = base(s, &[y[0], y[1], y[2]]);
        [d[0], d[1], d[2], 0.5 * (1.0 - height(p, a, y[0])) * psi_prime(p, a, y[0])]
    };
    let h_max = trace.spacing();
    let opts = Options { h_max, ..options(DEFAULT_STEP_TOL) };
    let mut solver = Solver::new(&f, st0.s, [st0.kappa, st0.kappa_prime, st0.psi, theta0], opts);
    let mut theta = Vec::with_capacity(trace.states.len());
    theta.push(theta0);
    for st in &trace.states[1..] {
        solver.advance_to(st.s)?;
        theta.push(solver.y()[3]);
    }

    let points: Vec<[f64; 4]> = trace
        .states
        .iter()
        .zip(&theta)
        .map(|(st, &th)| to_r4(fiber_point(height(p, a, st.kappa), st.psi, th)))
        .collect();
    let (first, last) = (from_r4(points[0]), from_r4(*points.last().unwrap()));
    let overlap = first[0].conj() * last[0] + first[1].conj() * last[1];
    Ok(Lift {
        s: trace.states.iter().map(|st| st.s).collect(),
        points,
        theta,
        holonomy_angle: overlap.arg().rem_euclid(TAU),
        base_closed: trace.closure_gap < CLOSED_GAP,
    })
}

/// Largest `| |γ̄| − 2 |`.
pub fn norm_residual(points: &[[f64; 4]]) -> f64 {
    points.iter().map(|v| (norm(v) - RADIUS).abs()).fold(0.0, f64::max)
}

/// Largest `|π̃(γ̄(s)) − γ(s)|` over the samples.
pub fn projection_residual(lift: &Lift, trace: &CurveTrace) -> f64 {
    lift.points
        .iter()
        .zip(&trace.points)
        .map(|(v, g)| dist3(hopf_project(*v), *g))
        .fold(0.0, f64::max)
}

/// Largest `|⟨γ̄', iγ̄⟩|`, with `γ̄'` from sixth-order central differences
/// of the samples. Over a closed base the samples are continued past the
/// ends by `γ̄(s ± L) = e^{±iH}γ̄(s)`; otherwise the three samples at each
/// end use fourth-order one-sided differences.
pub fn horizontality_residual(lift: &Lift) -> f64 {
    let pts = &lift.points;
    let n = pts.len();
    if n < 7 {
        return f64::NAN;
    }
    let h = lift.s[1] - lift.s[0];
    let period = (n - 1) as isize;
    let at = |k: isize| -> [f64; 4] {
        if (0..n as isize).contains(&k) {
            pts[k as usize]
        } else {
            let wraps = k.div_euclid(period);
            rotate(pts[k.rem_euclid(period) as usize], wraps as f64 * lift.holonomy_angle)
        }
    };
    let central = [(-3, -1.0), (-2, 9.0), (-1, -45.0), (1, 45.0), (2, -9.0), (3, 1.0)];
    (0..n)
        .map(|j| {
            let mut d = [0.0; 4];
            let near_end = j < 3 || j + 3 >= n;
            if near_end && !lift.base_closed {
                let (start, w): (usize, [f64; 5]) = match j {
                    0 => (0, [-25.0, 48.0, -36.0, 16.0, -3.0]),
                    1 => (0, [-3.0, -10.0, 18.0, -6.0, 1.0]),
                    2 => (0, [1.0, -8.0, 0.0, 8.0, -1.0]),
                    _ if j == n - 3 => (n - 5, [1.0, -8.0, 0.0, 8.0, -1.0]),
                    _ if j == n - 2 => (n - 5, [-1.0, 6.0, -18.0, 10.0, 3.0]),
                    _ => (n - 5, [3.0, -16.0, 36.0, -48.0, 25.0]),
                };
                for (k, wk) in w.iter().enumerate() {
                    for c in 0..4 {
                        d[c] += wk * pts[start + k][c] / (12.0 * h);
                    }
                }
            } else {
                for &(off, wk) in &central {
                    let q = at(j as isize + off);
                    for c in 0..4 {
                        d[c] += wk * q[c] / (60.0 * h);
                    }
                }
            }
            let v = pts[j];
            dot(&d, &[-v[1], v[0], -v[3], v[2]]).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CoverPolicy {
    /// Fail with `CoverOverflow` unless some cover of at most 64 sheets closes.
    Strict,
    /// Otherwise glue the last fiber to the first through the holonomy.
    Twisted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", rename_all_fields = "camelCase", tag = "kind")]
pub enum Gluing {
    /// The lift of `covers` copies of the base closes up.
    Closed { covers: u32 },
    /// Fibers matched across the seam by the phase `e^{iH}`.
    Twisted { residual_twist: f64 },
    /// Open base curve: a cylinder segment with two boundary fibers.
    CylinderSegment,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HopfPatch {
    #[serde(skip)]
    pub base_trace: CurveTrace,
    #[serde(skip)]
    pub lift: Lift,
    pub holonomy_angle: f64,
    pub covers: u32,
    pub gluing: Gluing,
    pub t_samples: usize,
    /// Fiber rings along `s`.
    pub s_samples: usize,
    /// `X(t_i, s_j)` at index `j·t_samples + i`.
    pub vertices: Vec<[f64; 4]>,
    pub quads: Vec<[usize; 4]>,
    /// `H = κ/2` at every vertex.
    pub mean_curvature: Vec<f64>,
    pub projected: Option<Vec<[f64; 3]>>,
    pub pole: Option<[f64; 4]>,
}

/// Smallest `k ≤ 64` with `kH ≡ 0 (mod 2π)` to within [`ANGLE_TOL`].
pub fn closing_cover(holonomy: f64) -> Option<u32> {
    (1..=MAX_COVERS).find(|&k| angle_to_lattice(k as f64 * holonomy) < ANGLE_TOL)
}

/// Meshes `X(t, s) = e^{it}γ̄(s)` with `t_samples` points per fiber and
/// `s_per_period` rings per curvature period, which must divide the
/// trace sampling.
pub fn build_torus(
    trace: &CurveTrace,
    lift: &Lift,
    t_samples: usize,
    s_per_period: usize,
    policy: CoverPolicy,
) -> Result<HopfPatch> {
    if t_samples < 3 || s_per_period < 3 {
        return Err(Error::domain("need at least three samples in each direction"));
    }
    if trace.samples_per_period % s_per_period != 0 {
        return Err(Error::domain(format!(
            "{s_per_period} rings per period do not divide the {} trace samples per period",
            trace.samples_per_period
        )));
    }
    if lift.points.len() != trace.states.len() {
        return Err(Error::domain("lift and trace lengths differ"));
    }
    let stride = trace.samples_per_period / s_per_period;
    let per_cover = (lift.points.len() - 1) / stride;
    let hol = lift.holonomy_angle;

    let (covers, gluing) = if !lift.base_closed {
        (1, Gluing::CylinderSegment)
    } else if let Some(k) = closing_cover(hol) {
        (k, Gluing::Closed { covers: k })
    } else if policy == CoverPolicy::Strict {
        return Err(Error::CoverOverflow { max: MAX_COVERS });
    } else {
        (1, Gluing::Twisted { residual_twist: 0.0 })
    };
    let closed = !matches!(gluing, Gluing::CylinderSegment);
    let rings = if closed { covers as usize * per_cover } else { per_cover + 1 };
    let length = lift.s[per_cover * stride] - lift.s[0];
    let total_length = covers as f64 * length;

    // shift the seam by whole t-steps and spread the rest of the twist
    let total_hol = covers as f64 * hol;
    let wrapped = (total_hol + PI).rem_euclid(TAU) - PI;
    let (offset, twist) = if closed {
        let j0 = (wrapped * t_samples as f64 / TAU).round();
        (j0.rem_euclid(t_samples as f64) as usize, wrapped - TAU * j0 / t_samples as f64)
    } else {
        (0, 0.0)
    };
    let gluing = match gluing {
        Gluing::Twisted { .. } => Gluing::Twisted { residual_twist: twist },
        g => g,
    };

    let ring_source = |j: usize| -> (f64, [f64; 4], usize) {
        let (c, local) = (j / per_cover, (j % per_cover) * stride);
        let c = if closed { c } else { 0 };
        let local = if closed { local } else { j * stride };
        let s = c as f64 * length + lift.s[local] - lift.s[0];
        (s, rotate(lift.points[local], c as f64 * hol), local)
    };
    let vertices: Vec<[f64; 4]> = (0..rings * t_samples)
        .into_par_iter()
        .map(|idx| {
            let (j, i) = (idx / t_samples, idx % t_samples);
            let (s, v, _) = ring_source(j);
            let t = TAU * i as f64 / t_samples as f64 - twist * s / total_length;
            rotate(v, t)
        })
        .collect();
    let mean_curvature: Vec<f64> = (0..rings)
        .flat_map(|j| {
            let k = trace.states[ring_source(j).2].kappa;
            std::iter::repeat_n(0.5 * k, t_samples)
        })
        .collect();

    let id = |i: usize, j: usize| -> usize {
        if j == rings {
            (i + offset) % t_samples
        } else {
            j * t_samples + i % t_samples
        }
    };
    let ring_pairs = if closed { rings } else { rings - 1 };
    let mut quads = Vec::with_capacity(ring_pairs * t_samples);
    for j in 0..ring_pairs {
        for i in 0..t_samples {
            quads.push([id(i, j), id(i, j + 1), id(i + 1, j + 1), id(i + 1, j)]);
        }
    }
    Ok(HopfPatch {
        base_trace: trace.clone(),
        lift: lift.clone(),
        holonomy_angle: hol,
        covers,
        gluing,
        t_samples,
        s_samples: rings,
        vertices,
        quads,
        mean_curvature,
        projected: None,
        pole: None,
    })
}

/// Lifts and meshes at the default resolution with twisted gluing allowed.
pub fn hopf_torus(trace: &CurveTrace) -> Result<HopfPatch> {
    let lift = horizontal_lift(trace, None)?;
    build_torus(trace, &lift, DEFAULT_T_SAMPLES, DEFAULT_S_SAMPLES_PER_PERIOD, CoverPolicy::Twisted)
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CurvatureCheck {
    /// Largest `|H_mesh − κ/2| / (κ/2)` over interior vertices.
    pub max_relative_h_error: f64,
    pub max_abs_gaussian: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl HopfPatch {
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        split_quads(&self.quads)
    }

    pub fn mesh(&self) -> TriMesh<4> {
        TriMesh::new(self.vertices.clone(), self.triangles())
    }

    pub fn is_closed(&self) -> bool {
        !matches!(self.gluing, Gluing::CylinderSegment)
    }

    /// Discrete mean curvature `|Δx/2 + x/4|` and angle-defect Gaussian
    /// curvature against the exact `κ/2` and `0`. Boundary rings of a
    /// cylinder segment are skipped.
    pub fn curvature_check(&self) -> CurvatureCheck {
        let m = self.mesh();
        let g = m.geometry();
        let t = self.t_samples;
        let skip = if self.is_closed() { 0 } else { t };
        let range = skip..self.vertices.len() - skip;
        let inv_r2 = 1.0 / (RADIUS * RADIUS);
        let h_err = range
            .clone()
            .into_par_iter()
            .map(|i| {
                let x = &self.vertices[i];
                let hv: [f64; 4] = std::array::from_fn(|c| 0.5 * g.laplacian[i][c] + inv_r2 * x[c]);
                let exact = self.mean_curvature[i];
                (norm(&hv) - exact).abs() / exact
            })
            .reduce(|| 0.0, f64::max);
        let k_max = range
            .map(|i| ((TAU - g.angle_sum[i]) / g.mixed_area[i]).abs())
            .fold(0.0, f64::max);
        let (h_min, h_max) = self
            .mean_curvature
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &h| (lo.min(h), hi.max(h)));
        CurvatureCheck { max_relative_h_error: h_err, max_abs_gaussian: k_max, h_min, h_max }
    }

    /// Projects from `pole` and stores the result.
    pub fn project(&mut self, pole: [f64; 4]) -> Result<&[[f64; 3]]> {
        let proj = stereographic_project(&self.vertices, pole)?;
        self.pole = Some(unit(pole)?);
        Ok(self.projected.insert(proj))
    }

    pub fn metadata(&self) -> HopfMetadata {
        HopfMetadata {
            p: self.base_trace.p,
            a: self.base_trace.a,
            n: self.base_trace.index.as_ref().map(|i| i.n),
            m: self.base_trace.index.as_ref().map(|i| i.m),
            holonomy_angle: self.holonomy_angle,
            covers: self.covers,
            gluing: self.gluing,
            t_samples: self.t_samples,
            s_samples: self.s_samples,
            vertex_count: self.vertices.len(),
            triangle_count: 2 * self.quads.len(),
            pole: self.pole,
            norm_residual: norm_residual(&self.vertices),
            projection_residual: projection_residual(&self.lift, &self.base_trace),
            horizontality_residual: horizontality_residual(&self.lift),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HopfMetadata {
    pub p: f64,
    pub a: f64,
    pub n: Option<u32>,
    pub m: Option<u32>,
    pub holonomy_angle: f64,
    pub covers: u32,
    pub gluing: Gluing,
    pub t_samples: usize,
    pub s_samples: usize,
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub pole: Option<[f64; 4]>,
    pub norm_residual: f64,
    pub projection_residual: f64,
    pub horizontality_residual: f64,
}

fn unit(v: [f64; 4]) -> Result<[f64; 4]> {
    let n = norm(&v);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::domain("projection pole must be a nonzero vector"));
    }
    Ok(v.map(|c| c / n))
}

/// Orthonormal basis of `P^⊥`: Gram–Schmidt on the three coordinate axes
/// least aligned with `P`, in coordinate order.
fn complement_basis(pole: &[f64; 4]) -> [[f64; 4]; 3] {
    let drop = (0..4).max_by(|&i, &j| pole[i].abs().total_cmp(&pole[j].abs())).unwrap();
    let mut basis: Vec<[f64; 4]> = Vec::with_capacity(3);
    for axis in (0..4).filter(|&i| i != drop) {
        let mut v = [0.0; 4];
        v[axis] = 1.0;
        for b in std::iter::once(pole).chain(basis.iter()) {
            let d = dot(&v, b);
            for c in 0..4 {
                v[c] -= d * b[c];
            }
        }
        let n = norm(&v);
        basis.push(v.map(|c| c / n));
    }
    [basis[0], basis[1], basis[2]]
}

/// Stereographic projection of the radius-2 sphere from `2P` onto `P^⊥`:
/// `Y = 2(X − ⟨X,P⟩P)/(2 − ⟨X,P⟩)`.
pub fn stereographic_project(vertices: &[[f64; 4]], pole: [f64; 4]) -> Result<Vec<[f64; 3]>> {
    let p = unit(pole)?;
    let basis = complement_basis(&p);
    if let Some(index) = vertices
        .iter()
        .position(|v| norm(&std::array::from_fn::<f64, 4, _>(|c| v[c] / RADIUS - p[c])) < POLE_TOL)
    {
        return Err(Error::PoleCollision { index });
    }
    Ok(vertices
        .par_iter()
        .map(|v| {
            let scale = RADIUS / (RADIUS - dot(v, &p));
            basis.map(|b| scale * dot(v, &b))
        })
        .collect())
}

/// Inverse of [`stereographic_project`] for the same pole.
pub fn stereographic_inverse(points: &[[f64; 3]], pole: [f64; 4]) -> Result<Vec<[f64; 4]>> {
    let p = unit(pole)?;
    let basis = complement_basis(&p);
    let r2 = RADIUS * RADIUS;
    Ok(points
        .par_iter()
        .map(|y| {
            let rho2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
            let (along, across) = (RADIUS * (rho2 - r2) / (rho2 + r2), 2.0 * r2 / (rho2 + r2));
            std::array::from_fn(|c| along * p[c] + across * (0..3).map(|k| y[k] * basis[k][c]).sum::<f64>())
        })
        .collect())
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WillmoreCheck {
    /// Largest `|p(κ^{p−1})'' + (p−1)κ^{p+1} + pκ^{p−1}|` along the trace.
    pub curve_residual: f64,
    /// Largest `|pΔ(H^{p−1}) + 4(p−1)H^{p+1} + p(1−2K)H^{p−1}|` with
    /// `H = κ/2`, `K = 0` and `Δ = d²/ds²`.
    pub surface_residual: f64,
    /// Largest `|surface − 2^{1−p}·curve|`.
    pub identity_gap: f64,
}

/// Evaluates both Euler–Lagrange expressions at the interior samples, with
/// second derivatives from fourth-order central differences in `s`: of
/// `κ^{p−1}` for the curve and of `H^{p−1}` along a generator for the torus.
pub fn willmore_check(trace: &CurveTrace) -> WillmoreCheck {
    let p = trace.p;
    let h = trace.spacing();
    let kappa: Vec<f64> = trace.states.iter().map(|st| st.kappa).collect();
    let hfield: Vec<f64> = kappa.iter().map(|k| 0.5 * k).collect();
    let d2 = |u: &[f64], j: usize| {
        let f = |i: usize| u[i].powf(p - 1.0);
        (-f(j + 2) + 16.0 * f(j + 1) - 30.0 * f(j) + 16.0 * f(j - 1) - f(j - 2)) / (12.0 * h * h)
    };
    let scale = 2f64.powf(1.0 - p);
    let gauss = 0.0;
    let mut out = WillmoreCheck { curve_residual: 0.0, surface_residual: 0.0, identity_gap: 0.0 };
    for j in 2..kappa.len().saturating_sub(2) {
        let k = kappa[j];
        let curve = p * d2(&kappa, j) + (p - 1.0) * k.powf(p + 1.0) + p * k.powf(p - 1.0);
        let hj = hfield[j];
        let surface =
            p * d2(&hfield, j) + 4.0 * (p - 1.0) * hj.powf(p + 1.0) + p * (1.0 - 2.0 * gauss) * hj.powf(p - 1.0);
        out.curve_residual = out.curve_residual.max(curve.abs());
        out.surface_residual = out.surface_residual.max(surface.abs());
        out.identity_gap = out.identity_gap.max((surface - scale * curve).abs());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::circle_trace;

    #[test]
    fn fiber_points_project_back() {
        for &(x, psi, th) in &[(0.3, 1.0, 0.2), (-0.9, 4.0, -2.0), (0.0, 0.0, 3.0)] {
            let v = to_r4(fiber_point(x, psi, th));
            assert!((norm(&v) - 2.0).abs() < 1e-14);
            let r = (1.0f64 - x * x).sqrt();
            let g = [x, r * psi.sin(), r * psi.cos()];
            assert!(dist3(hopf_project(v), g) < 1e-14);
            // the whole fiber maps to the same point
            assert!(dist3(hopf_project(rotate(v, 1.234)), g) < 1e-14);
        }
    }

    #[test]
    fn parallel_holonomy_is_half_the_cap_area() {
        // the critical circle sits at height √p; the cap above it has area 2π(1−√p)
        for p in [0.2, 0.5, 0.7] {
            let tr = circle_trace(p, 512).unwrap();
            let lift = horizontal_lift(&tr, None).unwrap();
            let expect = (PI * (1.0 - p.sqrt())).rem_euclid(TAU);
            assert!(angle_to_lattice(lift.holonomy_angle - expect) < 1e-9, "p = {p}");
            assert!(horizontality_residual(&lift) < 1e-8);
            assert!(norm_residual(&lift.points) < 1e-12);
            assert!(projection_residual(&lift, &tr) < 1e-12);
        }
    }

    #[test]
    fn seed_validation() {
        let tr = circle_trace(0.3, 64).unwrap();
        let good = to_r4(fiber_point(0.3f64.sqrt(), 0.0, 0.7));
        let lift = horizontal_lift(&tr, Some(good)).unwrap();
        assert!((lift.theta[0] - 0.7).abs() < 1e-12);
        let bad = to_r4(fiber_point(0.3f64.sqrt() + 1e-3, 0.0, 0.7));
        assert!(matches!(horizontal_lift(&tr, Some(bad)), Err(Error::Seed { .. })));
    }

    #[test]
    fn covers_for_rational_holonomy() {
        assert_eq!(closing_cover(0.0), Some(1));
        assert_eq!(closing_cover(PI), Some(2));
        assert_eq!(closing_cover(TAU * 3.0 / 7.0), Some(7));
        assert_eq!(closing_cover(TAU / 65.0), None);
        assert_eq!(closing_cover(1.0), None);
    }

    #[test]
    fn strict_policy_overflows_on_irrational_phase() {
        let tr = circle_trace(0.3, 256).unwrap();
        let lift = horizontal_lift(&tr, None).unwrap();
        assert!(closing_cover(lift.holonomy_angle).is_none());
        assert!(matches!(
            build_torus(&tr, &lift, 32, 64, CoverPolicy::Strict),
            Err(Error::CoverOverflow { max: 64 })
        ));
        let patch = build_torus(&tr, &lift, 32, 64, CoverPolicy::Twisted).unwrap();
        assert!(matches!(patch.gluing, Gluing::Twisted { .. }));
    }

    #[test]
    fn circle_torus_is_flat_with_constant_h() {
        let p = 0.5;
        let tr = circle_trace(p, 512).unwrap();
        let lift = horizontal_lift(&tr, None).unwrap();
        let patch = build_torus(&tr, &lift, 128, 256, CoverPolicy::Twisted).unwrap();
        let c = patch.curvature_check();
        assert!(c.max_relative_h_error < 2e-3, "{c:?}");
        assert!(c.max_abs_gaussian < 1e-2, "{c:?}");
        // holonomy π/2·(2 − √2) is not a rational turn, so the seam is twisted
        assert_eq!(patch.covers, 1);
        assert_eq!(patch.vertices.len(), 128 * 256);
        assert!((patch.mesh().total_area() - 4.0 * PI * tr.total_length()).abs() < 1e-2 * 4.0 * PI * tr.total_length());
    }

    #[test]
    fn stereographic_round_trip_and_antipode() {
        let verts: Vec<[f64; 4]> = (0..50)
            .map(|k| to_r4(fiber_point((k as f64 * 0.37).sin() * 0.9, k as f64, 0.1 * k as f64)))
            .collect();
        for pole in [DEFAULT_POLE, [1.0, 2.0, -0.5, 0.3]] {
            let y = stereographic_project(&verts, pole).unwrap();
            let back = stereographic_inverse(&y, pole).unwrap();
            for (u, v) in verts.iter().zip(&back) {
                for c in 0..4 {
                    assert!((u[c] - v[c]).abs() < 1e-10);
                }
            }
            let p = unit(pole).unwrap();
            let anti = [p.map(|c| -2.0 * c)];
            let o = stereographic_project(&anti, pole).unwrap()[0];
            assert!(o.iter().all(|c| c.abs() < 1e-15));
            let at_pole = [p.map(|c| 2.0 * c)];
            assert!(matches!(stereographic_project(&at_pole, pole), Err(Error::PoleCollision { index: 0 })));
        }
    }

    #[test]
    fn willmore_identity_on_the_circle() {
        let tr = circle_trace(0.4, 32).unwrap();
        let w = willmore_check(&tr);
        assert!(w.curve_residual < 1e-12 && w.surface_residual < 1e-12 && w.identity_gap < 1e-12);
    }
}
