//! Floating-point kernels: explicit ODE integration, central-difference
//! Jacobians and damped Newton iteration.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-9;

pub struct OdeProblem<F> {
    pub rhs: F,
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<f64>,
}

impl<F> OdeProblem<F>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    pub fn new(rhs: F, t0: f64, t1: f64, y0: Vec<f64>) -> Result<Self> {
        if !(t1 >= t0) {
            return Err(Error::InvalidInput(format!("t1 = {t1} precedes t0 = {t0}")));
        }
        if y0.is_empty() {
            return Err(Error::InvalidInput("empty initial state".into()));
        }
        Ok(Self { rhs, t0, t1, y0 })
    }

    pub fn dimension(&self) -> usize {
        self.y0.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Rk4 { dt: f64 },
    /// Dormand-Prince 5(4) with per-step error control.
    Rk45 { tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    pub max_steps: usize,
}

impl SolveOptions {
    pub fn rk4(dt: f64) -> Self {
        Self {
            method: Method::Rk4 { dt },
            max_steps: 10_000_000,
        }
    }

    pub fn rk45(tol: f64) -> Self {
        Self {
            method: Method::Rk45 { tol },
            max_steps: 10_000_000,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self.method {
            Method::Rk4 { dt } => dt > 0.0 && dt.is_finite(),
            Method::Rk45 { tol } => tol > 0.0 && tol.is_finite(),
        };
        if !ok || self.max_steps == 0 {
            return Err(Error::InvalidInput(format!("invalid solver options {self:?}")));
        }
        Ok(())
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self::rk4(DEFAULT_DT)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least one sample")
    }
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

fn check_finite(t: f64, y: &[f64]) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState(t))
    }
}

/// One classical Runge-Kutta step.
pub fn rk4_step<F>(rhs: &F, t: f64, y: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = rhs(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = rhs(t + h, &axpy(y, h, &k3));
    y.iter()
        .enumerate()
        .map(|(i, v)| v + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

pub fn integrate<F>(problem: &OdeProblem<F>, opts: &SolveOptions) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    opts.validate()?;
    check_finite(problem.t0, &problem.y0)?;
    match opts.method {
        Method::Rk4 { dt } => integrate_rk4(problem, dt, opts.max_steps),
        Method::Rk45 { tol } => integrate_dopri(problem, tol, opts.max_steps),
    }
}

fn integrate_rk4<F>(problem: &OdeProblem<F>, dt: f64, max_steps: usize) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let span = problem.t1 - problem.t0;
    let steps = (span / dt).ceil() as usize;
    if steps > max_steps {
        return Err(Error::StepLimitExceeded(max_steps));
    }
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut y = problem.y0.clone();
    times.push(problem.t0);
    states.push(y.clone());
    for k in 0..steps {
        let t = problem.t0 + k as f64 * dt;
        let t_next = if k + 1 == steps {
            problem.t1
        } else {
            problem.t0 + (k + 1) as f64 * dt
        };
        y = rk4_step(&problem.rhs, t, &y, t_next - t);
        check_finite(t_next, &y)?;
        times.push(t_next);
        states.push(y.clone());
    }
    Ok(Trajectory { times, states })
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn integrate_dopri<F>(problem: &OdeProblem<F>, tol: f64, max_steps: usize) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let dim = problem.dimension();
    let mut t = problem.t0;
    let mut y = problem.y0.clone();
    let mut times = vec![t];
    let mut states = vec![y.clone()];
    let span = problem.t1 - problem.t0;
    if span == 0.0 {
        return Ok(Trajectory { times, states });
    }
    let mut h = (span * 1e-3).max(1e-12).min(span);
    let mut steps = 0;
    while t < problem.t1 {
        if steps >= max_steps {
            return Err(Error::StepLimitExceeded(max_steps));
        }
        steps += 1;
        let last = t + h >= problem.t1;
        if last {
            h = problem.t1 - t;
        }
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        for s in 0..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                for i in 0..dim {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k.push((problem.rhs)(t + C[s] * h, &ys));
        }
        let mut y5 = y.clone();
        let mut err: f64 = 0.0;
        for i in 0..dim {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            let scale = tol * y[i].abs().max(y5[i].abs()).max(1.0);
            err = err.max((h * (d5 - d4)).abs() / scale);
        }
        if !err.is_finite() {
            return Err(Error::NonFiniteState(t + h));
        }
        if err <= 1.0 {
            t = if last { problem.t1 } else { t + h };
            y = y5;
            check_finite(t, &y)?;
            times.push(t);
            states.push(y.clone());
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * span.max(1.0) {
            return Err(Error::StepLimitExceeded(steps));
        }
    }
    Ok(Trajectory { times, states })
}

/// Central-difference Jacobian, row `i` = component `i` of `f`.
pub fn fd_jacobian<F>(f: &F, x: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = f(x).len();
    let mut jac = DMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        xp[j] = x[j] + h;
        let fp = f(&xp);
        xp[j] = x[j] - h;
        let fm = f(&xp);
        xp[j] = x[j];
        for i in 0..m {
            let d = (fp[i] - fm[i]) / (2.0 * h);
            if !d.is_finite() {
                return Err(Error::NonFiniteValue);
            }
            jac[(i, j)] = d;
        }
    }
    Ok(jac)
}

/// Default step for [`fd_jacobian`] at `x`.
pub fn default_fd_step(x: &[f64]) -> f64 {
    1e-6 * x.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

const MIN_STEP_FRACTION: f64 = 1e-4;

/// Damped Newton iteration on a square system. Steps are halved while the
/// sup-norm residual fails to decrease, down to a fraction of 1e-4.
pub fn newton_solve<F>(f: &F, x0: &[f64], tol: f64, max_iter: usize) -> Result<NewtonResult>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if fx.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue);
    }
    let mut res = sup_norm(&fx);
    for iter in 0..max_iter {
        if res <= tol {
            return Ok(NewtonResult {
                x,
                residual: res,
                iterations: iter,
            });
        }
        let jac = fd_jacobian(f, &x, default_fd_step(&x))?;
        let rhs = DVector::from_iterator(fx.len(), fx.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs).ok_or(Error::SingularJacobian(iter))?;
        if step.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularJacobian(iter));
        }
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            let ft = f(&trial);
            let rt = if ft.iter().all(|v| v.is_finite()) {
                sup_norm(&ft)
            } else {
                f64::INFINITY
            };
            if rt < res || lambda * 0.5 < MIN_STEP_FRACTION {
                if rt.is_finite() {
                    x = trial;
                    fx = ft;
                    res = rt;
                }
                break;
            }
            lambda *= 0.5;
        }
    }
    if res <= tol {
        return Ok(NewtonResult {
            x,
            residual: res,
            iterations: max_iter,
        });
    }
    Err(Error::MaxIterationsExceeded {
        iterations: max_iter,
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_problem() -> OdeProblem<impl Fn(f64, &[f64]) -> Vec<f64>> {
        OdeProblem::new(|_t, y: &[f64]| vec![y[0]], 0.0, 1.0, vec![1.0]).unwrap()
    }

    // e as a partial sum of 1/k!
    fn e_series() -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..30 {
            term /= k as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn rk4_exponential() {
        let traj = integrate(&exp_problem(), &SolveOptions::rk4(1e-3)).unwrap();
        assert!((traj.last()[0] - e_series()).abs() < 1e-9);
        assert_eq!(traj.times[0], 0.0);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
    }

    #[test]
    fn rk4_order() {
        let e = e_series();
        let err = |dt: f64| (integrate(&exp_problem(), &SolveOptions::rk4(dt)).unwrap().last()[0] - e).abs();
        let ratio = err(0.02) / err(0.01);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn harmonic_energy_drift() {
        let p = OdeProblem::new(|_t, s: &[f64]| vec![-s[1], s[0]], 0.0, 100.0, vec![1.0, 0.0]).unwrap();
        let traj = integrate(&p, &SolveOptions::rk4(1e-3)).unwrap();
        let energy = |s: &[f64]| 0.5 * (s[0] * s[0] + s[1] * s[1]);
        assert!((energy(traj.last()) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn constant_trajectory() {
        let p = OdeProblem::new(|_t, _s: &[f64]| vec![0.0, 0.0], 0.0, 2.0, vec![3.0, -1.0]).unwrap();
        for opts in [SolveOptions::rk4(0.1), SolveOptions::rk45(1e-9)] {
            let traj = integrate(&p, &opts).unwrap();
            assert!(traj.states.iter().all(|s| s == &[3.0, -1.0]));
        }
    }

    #[test]
    fn adaptive_exponential() {
        let traj = integrate(&exp_problem(), &SolveOptions::rk45(1e-10)).unwrap();
        assert!((traj.last()[0] - e_series()).abs() < 1e-8);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
    }

    #[test]
    fn step_limit_and_non_finite() {
        let mut opts = SolveOptions::rk4(1e-3);
        opts.max_steps = 10;
        assert_eq!(integrate(&exp_problem(), &opts).unwrap_err(), Error::StepLimitExceeded(10));
        let blow = OdeProblem::new(|t, _s: &[f64]| vec![1.0 / (0.5 - t)], 0.0, 1.0, vec![0.0]).unwrap();
        let err = integrate(&blow, &SolveOptions::rk4(0.25)).unwrap_err();
        assert!(matches!(err, Error::NonFiniteState(_)));
    }

    #[test]
    fn jacobian_examples() {
        let id = |x: &[f64]| x.to_vec();
        let j = fd_jacobian(&id, &[0.5, -2.0, 7.0], 1.0 / 1024.0).unwrap();
        assert!((j - DMatrix::identity(3, 3)).abs().max() <= 1e-12);

        let f = |x: &[f64]| vec![x[0] * x[0], x[0] * x[1]];
        let j = fd_jacobian(&f, &[1.0, 1.0], 1e-5).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 1.0]);
        assert!((j - expected).abs().max() <= 1e-8);

        let c = |_x: &[f64]| vec![4.0, 5.0];
        assert_eq!(fd_jacobian(&c, &[1.0, 2.0], 1e-6).unwrap(), DMatrix::zeros(2, 2));

        let bad = |x: &[f64]| vec![1.0 / x[0]];
        assert_eq!(fd_jacobian(&bad, &[0.0], 1e-300).unwrap_err(), Error::NonFiniteValue);
    }

    #[test]
    fn newton_sqrt2() {
        let f = |x: &[f64]| vec![x[0] * x[0] - 2.0];
        let r = newton_solve(&f, &[1.0], 1e-10, 50).unwrap();
        assert!((r.x[0] - std::f64::consts::SQRT_2).abs() < 1e-10);
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn newton_linear() {
        let f = |x: &[f64]| vec![x[0]];
        let r = newton_solve(&f, &[5.0], 1e-12, 10).unwrap();
        assert!(r.x[0].abs() <= 1e-12);
    }

    #[test]
    fn newton_no_real_root() {
        let f = |x: &[f64]| vec![x[0] * x[0] + 1.0];
        // From x0 = 1 the first full step lands exactly on the critical point.
        let err = newton_solve(&f, &[1.0], 1e-10, 50).unwrap_err();
        assert!(matches!(err, Error::MaxIterationsExceeded { .. } | Error::SingularJacobian(_)), "{err:?}");
        let err = newton_solve(&f, &[0.7], 1e-10, 50).unwrap_err();
        assert!(matches!(err, Error::MaxIterationsExceeded { .. } | Error::SingularJacobian(_)), "{err:?}");
    }

    #[test]
    fn newton_deterministic() {
        let f = |x: &[f64]| vec![x[0].sin() + x[1] - 0.3, x[0] * x[1] - 0.02];
        let a = newton_solve(&f, &[0.2, 0.2], 1e-12, 50).unwrap();
        let b = newton_solve(&f, &[0.2, 0.2], 1e-12, 50).unwrap();
        assert_eq!(a, b);
    }
}
