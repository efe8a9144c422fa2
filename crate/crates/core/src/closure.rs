//! Angular progression per curvature period and the closure condition
//! `Λ_p(a) = 2πn/m`.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qpotential::{a_star, ElasticaParams};
use crate::quad::{integrate_points, DEFAULT_REL_TOL};
use crate::roots::brent;

/// Quadrature tolerance used inside the closure solver.
const SOLVE_QUAD_TOL: f64 = 1e-12;
/// Closure targets this close to `√2 π` are refused.
pub const CIRCLE_GUARD: f64 = 1e-6;
/// Largest `a/a_*` scanned by [`solve_closure`].
pub const GRID_CAP: f64 = 1e6;

/// `Λ_p(a) = 2p(1−p)²√a ∫ κ^{1−p} / ((aκ^{2(1−p)} − p²)√Q) dκ`.
pub fn lambda_p(params: &ElasticaParams) -> Result<f64> {
    lambda_p_tol(params, DEFAULT_REL_TOL)
}

pub fn lambda_p_tol(params: &ElasticaParams, rel_tol: f64) -> Result<f64> {
    let p = params.p;
    let c = 1.0 - p;
    let r = integrate_points(
        params,
        |pt| pt.kappa.powf(c) / params.momentum_gap(pt.kappa, pt.q),
        rel_tol,
    )?;
    Ok(2.0 * p * c * c * params.a.sqrt() * r.value)
}

/// Arc length of one curvature period, `ρ = 2p(1−p) ∫ dκ/(κ√Q)`.
pub fn period(params: &ElasticaParams) -> Result<f64> {
    period_tol(params, DEFAULT_REL_TOL)
}

pub fn period_tol(params: &ElasticaParams, rel_tol: f64) -> Result<f64> {
    let p = params.p;
    let r = integrate_points(params, |pt| 1.0 / pt.kappa, rel_tol)?;
    Ok(2.0 * p * (1.0 - p) * r.value)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `gcd(n, m) = 1` and `m < 2n < √2 m`, the last test as `4n² < 2m²`.
pub fn is_admissible(n: u32, m: u32) -> bool {
    if n == 0 || m == 0 {
        return false;
    }
    let (n, m) = (n as u64, m as u64);
    gcd(n, m) == 1 && m < 2 * n && 4 * n * n < 2 * m * m
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClosureIndex {
    pub n: u32,
    pub m: u32,
    pub q: f64,
    /// Smallest solution of the closure condition, once solved.
    pub a_solved: Option<f64>,
    /// Every solution found by the scan, ascending.
    pub solutions: Vec<f64>,
}

impl ClosureIndex {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if !is_admissible(n, m) {
            return Err(Error::Inadmissible { n, m });
        }
        Ok(ClosureIndex { n, m, q: n as f64 / m as f64, a_solved: None, solutions: Vec::new() })
    }

    pub fn target(&self) -> f64 {
        2.0 * PI * self.n as f64 / self.m as f64
    }
}

/// The scan grid `a_k = a_*(1 + 2^k·1e-4)` up to `10⁶ a_*`, stopping early
/// where the root magnitudes leave the comfortable `f64` range.
pub fn closure_grid(p: f64) -> Result<Vec<ElasticaParams>> {
    let a_star = a_star(p)?;
    let mut grid = Vec::new();
    let mut k = 0;
    loop {
        let a = a_star * (1.0 + 2f64.powi(k) * 1e-4);
        if a > GRID_CAP * a_star {
            break;
        }
        match ElasticaParams::new(p, a) {
            Ok(prm) if prm.alpha < 1e150 && prm.beta > 1e-100 => grid.push(prm),
            _ => break,
        }
        k += 1;
    }
    if grid.len() < 2 {
        return Err(Error::NotFound(format!("closure grid for p = {p} is degenerate")));
    }
    Ok(grid)
}

/// Solves `Λ_p(a) = 2πn/m`, refining every sign change on the scan grid.
pub fn solve_closure(p: f64, index: &ClosureIndex, tol: f64) -> Result<ClosureIndex> {
    if !is_admissible(index.n, index.m) {
        return Err(Error::Inadmissible { n: index.n, m: index.m });
    }
    if !(tol >= 1e-10) {
        return Err(Error::domain(format!("closure tolerance must be at least 1e-10, got {tol:e}")));
    }
    let target = index.target();
    if (SQRT_2 * PI - target).abs() < CIRCLE_GUARD {
        return Err(Error::NearCircularTarget { q: index.q });
    }
    let grid = closure_grid(p)?;
    let values = grid
        .par_iter()
        .map(|prm| lambda_p_tol(prm, SOLVE_QUAD_TOL).map(|l| l - target))
        .collect::<Result<Vec<f64>>>()?;

    let mut solutions = Vec::new();
    for i in 0..grid.len() - 1 {
        let (f0, f1) = (values[i], values[i + 1]);
        if f0 == 0.0 {
            solutions.push(grid[i].a);
            continue;
        }
        if f0.signum() == f1.signum() {
            continue;
        }
        let residual = |a: f64| -> Result<f64> {
            let prm = ElasticaParams::new(p, a)?;
            Ok(lambda_p_tol(&prm, SOLVE_QUAD_TOL)? - target)
        };
        let (lo, hi) = (grid[i].a, grid[i + 1].a);
        let a = brent(residual, lo, hi, 1e-15 * hi, 0.25 * tol)?;
        let r = residual(a)?;
        if r.abs() >= tol {
            return Err(Error::ConvergenceFailure(format!(
                "closure residual {r:e} at a = {a} exceeds {tol:e}"
            )));
        }
        solutions.push(a);
    }
    if solutions.is_empty() {
        return Err(Error::NotFound(format!(
            "Λ_p − 2π·{}/{} has no sign change for a up to {:e}",
            index.n,
            index.m,
            grid.last().map(|g| g.a).unwrap_or(f64::NAN)
        )));
    }
    Ok(ClosureIndex {
        a_solved: Some(solutions[0]),
        solutions,
        ..index.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_boundaries() {
        assert!(is_admissible(2, 3));
        assert!(!is_admissible(1, 2));
        assert!(!is_admissible(5, 7));
        assert!(!is_admissible(4, 6));
        assert!(is_admissible(3, 5));
        assert!(is_admissible(6, 11));
        assert!(!is_admissible(0, 3));
    }

    #[test]
    fn admissibility_matches_float_window() {
        for m in 1..200u32 {
            for n in 1..200u32 {
                let q = n as f64 / m as f64;
                let window = 0.5 < q && q < SQRT_2 / 2.0;
                assert_eq!(is_admissible(n, m), window && gcd(n as u64, m as u64) == 1);
            }
        }
    }

    #[test]
    fn new_rejects_inadmissible() {
        assert!(matches!(ClosureIndex::new(5, 7), Err(Error::Inadmissible { n: 5, m: 7 })));
    }

    #[test]
    fn lambda_near_threshold_and_far() {
        let p = 0.3;
        let a_star = a_star(p).unwrap();
        let near = lambda_p(&ElasticaParams::new(p, a_star * (1.0 + 1e-6)).unwrap()).unwrap();
        assert!((near - SQRT_2 * PI).abs() < 1e-4);
        let far = lambda_p(&ElasticaParams::new(p, a_star * 1e6).unwrap()).unwrap();
        assert!((far - PI).abs() < 2e-2);
    }

    #[test]
    fn lambda_two_thirds_near_seventy_nine_hundredths() {
        let l = lambda_p(&ElasticaParams::new(0.3, 0.79).unwrap()).unwrap();
        assert!((l - 4.0 * PI / 3.0).abs() < 5e-3, "{l}");
    }

    #[test]
    fn period_is_positive_and_has_circle_limit() {
        let p = 0.3;
        let a_star = a_star(p).unwrap();
        let prm = ElasticaParams::new(p, a_star * (1.0 + 1e-8)).unwrap();
        let rho = period(&prm).unwrap();
        // circle limit: 2p(1−p)·π/(κ_*·√(−Q''(κ_*)/2))
        let ks = prm.kappa_star;
        let limit = 2.0 * p * (1.0 - p) * PI / (ks * (-0.5 * prm.d2q(ks)).sqrt());
        assert!((rho - limit).abs() < 1e-6 * limit);
        assert!(period(&ElasticaParams::new(p, 3.0).unwrap()).unwrap() > 0.0);
    }

    #[test]
    fn solves_two_thirds() {
        let idx = ClosureIndex::new(2, 3).unwrap();
        let sol = solve_closure(0.3, &idx, 1e-10).unwrap();
        let a = sol.a_solved.unwrap();
        assert!((a - 0.79).abs() < 0.01, "{a}");
        let l = lambda_p(&ElasticaParams::new(0.3, a).unwrap()).unwrap();
        assert!((l - idx.target()).abs() < 1e-9);
    }

    #[test]
    fn rejects_tight_tolerance() {
        let idx = ClosureIndex::new(2, 3).unwrap();
        assert!(solve_closure(0.3, &idx, 1e-12).is_err());
    }

    #[test]
    fn grid_starts_just_above_threshold() {
        let g = closure_grid(0.5).unwrap();
        assert!((g[0].a - 0.5 * (1.0 + 1e-4)).abs() < 1e-15);
        assert!(g.last().unwrap().a <= 0.5 * GRID_CAP);
        assert!(g.len() > 30);
    }
}
