//! Dormand–Prince 5(4) with the standard quartic dense output.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; `None` picks one from the initial slope.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { rtol: 1e-10, atol: 1e-12, h_init: None, h_max: f64::INFINITY, max_steps: 10_000_000 }
    }
}

/// One accepted step together with its interpolant.
#[derive(Clone, Copy, Debug)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    r: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.y0[i]
                + th * (self.r[0][i] + th1 * (self.r[1][i] + th * (self.r[2][i] + th1 * self.r[3][i])));
        }
        out
    }
}

pub struct Solver<const N: usize, F> {
    f: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    opts: Options,
    steps: usize,
}

impl<const N: usize, F> Solver<N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(f: F, t0: f64, y0: [f64; N], opts: Options) -> Self {
        let k1 = f(t0, &y0);
        let h = opts.h_init.unwrap_or_else(|| {
            let mut ny = 0.0f64;
            let mut nf = 0.0f64;
            for i in 0..N {
                let sc = opts.atol + opts.rtol * y0[i].abs();
                ny += (y0[i] / sc).powi(2);
                nf += (k1[i] / sc).powi(2);
            }
            let (ny, nf) = ((ny / N as f64).sqrt(), (nf / N as f64).sqrt());
            if ny < 1e-5 || nf < 1e-5 { 1e-6 } else { 0.01 * ny / nf }
        });
        Solver { f, t: t0, y: y0, k1, h: h.min(opts.h_max), opts, steps: 0 }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; N] {
        self.y
    }

    /// Takes one accepted step that does not pass `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<DenseStep<N>> {
        let dir = (t_limit - self.t).signum();
        let mut h = self.h.abs().min(self.opts.h_max) * dir;
        loop {
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(Error::ConvergenceFailure(format!(
                    "integrator exceeded {} steps",
                    self.opts.max_steps
                )));
            }
            let remaining = t_limit - self.t;
            let landing = h.abs() >= remaining.abs();
            if landing {
                h = remaining;
            }
            let h_min = 16.0 * f64::EPSILON * self.t.abs().max(1.0);
            if h.abs() < h_min && !landing {
                return Err(Error::StepFailure { s: self.t, step: h.abs() });
            }
            let (k, y1) = stages(&self.f, self.t, &self.y, &self.k1, h);
            let mut err = 0.0;
            for i in 0..N {
                let mut e = 0.0;
                for s in 0..7 {
                    e += E[s] * k[s][i];
                }
                let sc = self.opts.atol + self.opts.rtol * self.y[i].abs().max(y1[i].abs());
                err += (h * e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                h *= FAC_MIN;
                continue;
            }
            let fac = if err == 0.0 { FAC_MAX } else { (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX) };
            if err <= 1.0 {
                let mut r = [[0.0; N]; 4];
                for i in 0..N {
                    let dy = y1[i] - self.y[i];
                    let bspl = h * k[0][i] - dy;
                    r[0][i] = dy;
                    r[1][i] = bspl;
                    r[2][i] = dy - h * k[6][i] - bspl;
                    let mut acc = 0.0;
                    for s in 0..7 {
                        acc += D[s] * k[s][i];
                    }
                    r[3][i] = h * acc;
                }
                let out = DenseStep { t0: self.t, h, y0: self.y, y1, r };
                self.t = if landing { t_limit } else { self.t + h };
                self.y = y1;
                self.k1 = k[6];
                if !landing || h.abs() >= self.h.abs() {
                    self.h = (h * fac).abs();
                }
                return Ok(out);
            }
            h *= fac.min(1.0);
        }
    }

    /// Advances exactly to `t_end`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.t != t_end {
            self.step(t_end)?;
        }
        Ok(())
    }

    /// A single fixed step of size `h` from the current state, not committed.
    pub fn probe(&self, h: f64) -> [f64; N] {
        stages(&self.f, self.t, &self.y, &self.k1, h).1
    }
}

fn stages<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> ([[f64; N]; 7], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; 7];
    k[0] = *k1;
    let mut ys = [0.0; N];
    for s in 1..7 {
        for i in 0..N {
            let mut acc = 0.0;
            for j in 0..s {
                acc += A[s][j] * k[j][i];
            }
            ys[i] = y[i] + h * acc;
        }
        k[s] = f(t + C[s] * h, &ys);
    }
    (k, ys)
}

/// One fixed Dormand–Prince step of size `h` from `(t, y)`.
pub fn fixed_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    stages(f, t, y, &k1, h).1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut s = Solver::new(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], Options::default());
        s.advance_to(5.0).unwrap();
        assert_eq!(s.t(), 5.0);
        assert!((s.y()[0] - (-5f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_long_run() {
        let opts = Options { rtol: 1e-12, atol: 1e-14, ..Options::default() };
        let mut s = Solver::new(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], opts);
        let t = 20.0 * std::f64::consts::PI;
        s.advance_to(t).unwrap();
        assert!((s.y()[0] - 1.0).abs() < 1e-9);
        assert!(s.y()[1].abs() < 1e-9);
    }

    #[test]
    fn dense_output_is_accurate_inside_steps() {
        let opts = Options { rtol: 1e-10, atol: 1e-12, ..Options::default() };
        let mut s = Solver::new(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], opts);
        let mut worst: f64 = 0.0;
        while s.t() < 3.0 {
            let st = s.step(3.0).unwrap();
            for j in 1..10 {
                let t = st.t0 + st.h * j as f64 / 10.0;
                worst = worst.max((st.eval(t)[0] - t.sin()).abs());
            }
            assert!((st.eval(st.t1())[0] - st.y1[0]).abs() < 1e-15);
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn integrates_backwards() {
        let mut s = Solver::new(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0], Options::default());
        s.advance_to(0.0).unwrap();
        assert!((s.y()[0] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn blow_up_reports_failure() {
        let opts = Options { max_steps: 100_000, ..Options::default() };
        let mut s = Solver::new(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], opts);
        assert!(s.advance_to(2.0).is_err());
    }
}
