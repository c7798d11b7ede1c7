//! Sub-Riemannian extremals: fiber-linear Hamiltonians, the normal
//! Hamiltonian flow, closed-form extremals, the abnormal test and the
//! two-point shooting solver.
//!
//! For a covector `lambda = xi dx + eta dy + zeta dz` the frame Hamiltonians are
//! `h_i = xi_i - y_i zeta`, `k_i = eta_i + x_i zeta`, `h_T = zeta`, and the
//! flow of `H = (1/2) sum (h_i^2 + k_i^2)` rotates `h_i + i k_i` at angular
//! rate `2 zeta`.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{frame_field, lie_bracket, Frame, GroupPoint, PolyVectorField};
use crate::numerics::{integrate, newton_solve, OdeProblem, SolveOptions};
use crate::special::{chord_factor, sine_deficit};

/// Orientation of the control rotation `u_i + i v_i = r_i exp(i ORIENTATION (2 zeta t + theta_i))`,
/// fixed by agreement with [`hamiltonian_rhs`].
pub const ORIENTATION: f64 = 1.0;

const NORMALIZATION_TOL: f64 = 1e-9;
const GAUGE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CotangentState {
    pub q: GroupPoint,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub zeta: f64,
}

impl CotangentState {
    pub fn new(q: GroupPoint, xi: Vec<f64>, eta: Vec<f64>, zeta: f64) -> Result<Self> {
        let n = q.n();
        if xi.len() != n || eta.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: xi.len().max(eta.len()),
            });
        }
        if !zeta.is_finite() || xi.iter().chain(&eta).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("covector entries must be finite".into()));
        }
        Ok(Self { q, xi, eta, zeta })
    }

    pub fn n(&self) -> usize {
        self.q.n()
    }

    /// Flat layout `(x1, y1, ..., z, xi1, eta1, ..., zeta)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.q.coords();
        for i in 0..self.n() {
            v.push(self.xi[i]);
            v.push(self.eta[i]);
        }
        v.push(self.zeta);
        v
    }

    pub fn from_vec(n: usize, v: &[f64]) -> Result<Self> {
        if v.len() != 4 * n + 2 {
            return Err(Error::InvalidInput(format!(
                "cotangent vector for n = {n} needs {} entries",
                4 * n + 2
            )));
        }
        let q = GroupPoint::from_coords(&v[..2 * n + 1])?;
        let p = &v[2 * n + 1..];
        let xi = (0..n).map(|i| p[2 * i]).collect();
        let eta = (0..n).map(|i| p[2 * i + 1]).collect();
        Self::new(q, xi, eta, p[2 * n])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberHamiltonians {
    pub h: Vec<f64>,
    pub k: Vec<f64>,
    pub h_t: f64,
}

/// Evaluates the fiber-linear function `lambda(V)` of a polynomial field.
pub fn fiber_linear(v: &PolyVectorField, s: &CotangentState) -> f64 {
    let vq = v.eval_f64(&s.q);
    let n = s.n();
    let mut acc = s.zeta * vq[2 * n];
    for i in 0..n {
        acc += s.xi[i] * vq[2 * i] + s.eta[i] * vq[2 * i + 1];
    }
    acc
}

pub fn fiber_hamiltonians(s: &CotangentState) -> FiberHamiltonians {
    let n = s.n();
    let h = (0..n).map(|i| s.xi[i] - s.q.y(i) * s.zeta).collect();
    let k = (0..n).map(|i| s.eta[i] + s.q.x(i) * s.zeta).collect();
    FiberHamiltonians { h, k, h_t: s.zeta }
}

pub fn sr_hamiltonian(s: &CotangentState) -> f64 {
    let fh = fiber_hamiltonians(s);
    0.5 * fh.h.iter().chain(&fh.k).map(|v| v * v).sum::<f64>()
}

/// Hamilton's equations of [`sr_hamiltonian`], as a tangent vector in the
/// same layout as the state.
pub fn hamiltonian_rhs(s: &CotangentState) -> CotangentState {
    let n = s.n();
    let FiberHamiltonians { h, k, .. } = fiber_hamiltonians(s);
    let mut xy = Vec::with_capacity(2 * n);
    let mut zdot = 0.0;
    for i in 0..n {
        xy.push(h[i]);
        xy.push(k[i]);
        zdot += s.q.x(i) * k[i] - s.q.y(i) * h[i];
    }
    CotangentState {
        q: GroupPoint::new(xy, zdot).expect("finite derivative"),
        xi: k.iter().map(|kv| -s.zeta * kv).collect(),
        eta: h.iter().map(|hv| s.zeta * hv).collect(),
        zeta: 0.0,
    }
}

fn rhs_flat(n: usize) -> impl Fn(f64, &[f64]) -> Vec<f64> {
    move |_t, y| {
        let s = CotangentState::from_vec(n, y).expect("well-formed state");
        hamiltonian_rhs(&s).to_vec()
    }
}

/// `theta(q')` along the flow at state `s`.
pub fn contact_defect(s: &CotangentState) -> f64 {
    let d = hamiltonian_rhs(s);
    let n = s.n();
    let mut acc = *d.q.z();
    for i in 0..n {
        acc += s.q.y(i) * d.q.x(i) - s.q.x(i) * d.q.y(i);
    }
    acc
}

/// Numerically integrates the normal flow from `initial` over `[0, t_max]`.
pub fn integrate_flow(initial: &CotangentState, t_max: f64, opts: &SolveOptions) -> Result<Vec<(f64, CotangentState)>> {
    let n = initial.n();
    let problem = OdeProblem::new(rhs_flat(n), 0.0, t_max, initial.to_vec())?;
    let traj = integrate(&problem, opts)?;
    traj.times
        .into_iter()
        .zip(traj.states)
        .map(|(t, y)| Ok((t, CotangentState::from_vec(n, &y)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalExtremalParams {
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub zeta: f64,
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl NormalExtremalParams {
    pub fn new(r: Vec<f64>, theta: Vec<f64>, zeta: f64) -> Result<Self> {
        if r.is_empty() || r.len() != theta.len() {
            return Err(Error::InvalidInput(format!(
                "need one angle per amplitude (got {} amplitudes, {} angles)",
                r.len(),
                theta.len()
            )));
        }
        if !zeta.is_finite() || r.iter().chain(&theta).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        if r.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("amplitudes must be nonnegative".into()));
        }
        let norm2: f64 = r.iter().map(|v| v * v).sum();
        if (norm2 - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        let theta = r
            .iter()
            .zip(theta)
            .map(|(&ri, th)| if ri < GAUGE_EPS { 0.0 } else { wrap_angle(th) })
            .collect();
        Ok(Self { r, theta, zeta })
    }

    /// Rescales `r` onto the unit sphere before validating.
    pub fn normalized(r: Vec<f64>, theta: Vec<f64>, zeta: f64) -> Result<Self> {
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        Self::new(r.iter().map(|v| v / norm).collect(), theta, zeta)
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// `(A_i, B_i) = (r_i sin theta_i, r_i cos theta_i)`.
    pub fn amplitudes(&self) -> Vec<(f64, f64)> {
        self.r
            .iter()
            .zip(&self.theta)
            .map(|(r, th)| (r * th.sin(), r * th.cos()))
            .collect()
    }

    /// Covector at the origin whose normal extremal is this one.
    pub fn initial_covector(&self) -> CotangentState {
        let n = self.n();
        let (xi, eta) = self
            .r
            .iter()
            .zip(&self.theta)
            .map(|(r, th)| (r * (ORIENTATION * th).cos(), r * (ORIENTATION * th).sin()))
            .unzip();
        CotangentState::new(GroupPoint::origin(n), xi, eta, self.zeta).expect("finite parameters")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalSample {
    pub point: GroupPoint,
    /// Interleaved `(u1, v1, ..., un, vn)`.
    pub controls: Vec<f64>,
}

/// Endpoint at unit time of the extremal with horizontal covector `a`
/// (interleaved complex pairs) and vertical covector `c`, for a given rotation
/// orientation. Length of the curve is `|a|`.
fn endpoint_scaled_oriented(a: &[f64], c: f64, orientation: f64) -> GroupPoint {
    let n = a.len() / 2;
    let s = orientation * 2.0 * c;
    let (pr, pi) = chord_factor(s);
    let mut xy = Vec::with_capacity(2 * n);
    let mut norm2 = 0.0;
    for i in 0..n {
        let (ar, ai) = (a[2 * i], a[2 * i + 1]);
        xy.push(ar * pr - ai * pi);
        xy.push(ar * pi + ai * pr);
        norm2 += ar * ar + ai * ai;
    }
    GroupPoint::new(xy, norm2 * sine_deficit(s)).expect("finite endpoint")
}

pub fn endpoint_scaled(a: &[f64], c: f64) -> GroupPoint {
    endpoint_scaled_oriented(a, c, ORIENTATION)
}

fn closed_form_oriented(p: &NormalExtremalParams, t: f64, orientation: f64) -> Result<ExtremalSample> {
    let norm2: f64 = p.r.iter().map(|v| v * v).sum();
    if (norm2 - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(norm2));
    }
    let mut a = Vec::with_capacity(2 * p.n());
    let mut controls = Vec::with_capacity(2 * p.n());
    for (r, th) in p.r.iter().zip(&p.theta) {
        let base = orientation * th;
        a.push(t * r * base.cos());
        a.push(t * r * base.sin());
        let phase = orientation * (2.0 * p.zeta * t + th);
        controls.push(r * phase.cos());
        controls.push(r * phase.sin());
    }
    Ok(ExtremalSample {
        point: endpoint_scaled_oriented(&a, p.zeta * t, orientation),
        controls,
    })
}

/// Normal extremal from the origin at arc length `t`, with its controls.
pub fn closed_form_extremal(p: &NormalExtremalParams, t: f64) -> Result<ExtremalSample> {
    closed_form_oriented(p, t, ORIENTATION)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub times: Vec<f64>,
    pub points: Vec<GroupPoint>,
    /// Per sample, interleaved `(u1, v1, ..., un, vn)`.
    pub controls: Option<Vec<Vec<f64>>>,
}

impl SampledCurve {
    pub fn new(times: Vec<f64>, points: Vec<GroupPoint>, controls: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if times.len() != points.len() || controls.as_ref().is_some_and(|c| c.len() != times.len()) {
            return Err(Error::InvalidInput("sample arrays differ in length".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("times must be strictly increasing".into()));
        }
        Ok(Self { times, points, controls })
    }

    pub fn n(&self) -> Option<usize> {
        self.points.first().map(GroupPoint::n)
    }
}

/// Sample grid `0, dt, 2 dt, ..., t_max` with the endpoint included exactly.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_max >= 0.0) || !(dt > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidInput(format!("bad grid t_max = {t_max}, dt = {dt}")));
    }
    let steps = (t_max / dt - 1e-9).ceil().max(0.0) as usize;
    let mut times: Vec<f64> = (0..steps).map(|k| k as f64 * dt).collect();
    times.push(t_max);
    if times.len() >= 2 && times[times.len() - 2] >= t_max {
        times.remove(times.len() - 2);
    }
    Ok(times)
}

pub fn sample_closed_form(p: &NormalExtremalParams, t_max: f64, dt: f64) -> Result<SampledCurve> {
    let times = time_grid(t_max, dt)?;
    let samples = times
        .iter()
        .map(|&t| closed_form_extremal(p, t))
        .collect::<Result<Vec<_>>>()?;
    let (points, controls) = samples.into_iter().map(|s| (s.point, s.controls)).unzip();
    SampledCurve::new(times, points, Some(controls))
}

/// Numeric twin of [`sample_closed_form`]: RK4 on the Hamiltonian flow from
/// the matched covector, sampled on the same grid.
pub fn sample_numeric(p: &NormalExtremalParams, t_max: f64, dt: f64) -> Result<SampledCurve> {
    let times = time_grid(t_max, dt)?;
    let n = p.n();
    let rhs = rhs_flat(n);
    let sub = ((dt / crate::numerics::DEFAULT_DT).ceil() as usize).max(1);
    let mut y = p.initial_covector().to_vec();
    let mut points = Vec::with_capacity(times.len());
    let mut controls = Vec::with_capacity(times.len());
    let mut t = 0.0;
    for &target in &times {
        let h = (target - t) / sub as f64;
        if target > t {
            for k in 0..sub {
                y = crate::numerics::rk4_step(&rhs, t + k as f64 * h, &y, h);
            }
        }
        t = target;
        let s = CotangentState::from_vec(n, &y)?;
        let fh = fiber_hamiltonians(&s);
        controls.push(fh.h.iter().zip(&fh.k).flat_map(|(a, b)| [*a, *b]).collect());
        points.push(s.q);
    }
    SampledCurve::new(times, points, Some(controls))
}

/// Trapezoidal sub-Riemannian length `int sqrt(sum u_i^2 + v_i^2)`.
pub fn sr_length(c: &SampledCurve) -> Result<f64> {
    let controls = c.controls.as_ref().ok_or(Error::MissingControls)?;
    let speed: Vec<f64> = controls
        .iter()
        .map(|u| u.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    Ok(c
        .times
        .windows(2)
        .zip(speed.windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0] + s[1]))
        .sum())
}

/// Field whose fiber-linear Hamiltonian is `{lambda(V), lambda(W)}`, with the
/// convention `{lambda(V), lambda(W)} = lambda([V, W])`.
pub fn poisson_bracket(v: &PolyVectorField, w: &PolyVectorField) -> Result<PolyVectorField> {
    lie_bracket(v, w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbnormalReport {
    pub n: usize,
    pub zeta: f64,
    /// `{h_i, k_j}` on the annihilator.
    pub bracket_matrix: Vec<Vec<f64>>,
    pub determinant: f64,
    /// Determinant of the full `2n x 2n` bracket matrix of `(h_1, k_1, ..., h_n, k_n)`.
    pub full_determinant: f64,
    pub constant_curves_only: bool,
    pub conclusion: String,
}

/// Characteristic curves of the annihilator `h_i = k_i = 0`: a curve
/// `sum a_i h_i + b_i k_i` stays on it only if the bracket matrix kills
/// `(a, b)`, so an invertible matrix forces a constant base curve.
pub fn abnormal_classifier(n: usize, zeta: f64) -> Result<AbnormalReport> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if zeta == 0.0 {
        return Err(Error::ZeroCovector);
    }
    let state = CotangentState::new(GroupPoint::origin(n), vec![0.0; n], vec![0.0; n], zeta)?;
    let fields: Vec<PolyVectorField> = (1..=n)
        .flat_map(|i| [Frame::X(i), Frame::Y(i)])
        .map(|f| frame_field(n, f))
        .collect::<Result<_>>()?;
    let mut full = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..2 * n {
        for b in 0..2 * n {
            full[(a, b)] = fiber_linear(&poisson_bracket(&fields[a], &fields[b])?, &state);
        }
    }
    let bracket_matrix: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| full[(2 * i, 2 * j + 1)]).collect())
        .collect();
    let determinant = DMatrix::from_fn(n, n, |i, j| bracket_matrix[i][j]).determinant();
    let full_determinant = full.determinant();
    let constant_curves_only = full_determinant != 0.0 && determinant != 0.0;
    let conclusion = if constant_curves_only {
        "constant curves only".to_string()
    } else {
        "bracket matrix is degenerate".to_string()
    };
    Ok(AbnormalReport {
        n,
        zeta,
        bracket_matrix,
        determinant,
        full_determinant,
        constant_curves_only,
        conclusion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectSolution {
    pub params: NormalExtremalParams,
    pub t: f64,
    pub residual: f64,
    pub starts: usize,
}

const START_ZETAS: [f64; 13] = [0.0, 0.1, -0.1, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0];
const START_LENGTH_FACTORS: [f64; 3] = [1.0, 2.0, 4.0];

fn params_from_scaled(a: &[f64], c: f64) -> Option<(NormalExtremalParams, f64)> {
    let t = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(t > 0.0) || !t.is_finite() {
        return None;
    }
    let n = a.len() / 2;
    let r = (0..n).map(|i| a[2 * i].hypot(a[2 * i + 1]) / t).collect();
    let theta = (0..n).map(|i| a[2 * i + 1].atan2(a[2 * i]) / ORIENTATION).collect();
    NormalExtremalParams::normalized(r, theta, c / t).ok().map(|p| (p, t))
}

fn residual_of(p: &NormalExtremalParams, t: f64, target: &GroupPoint) -> f64 {
    closed_form_extremal(p, t)
        .map(|s| s.point.sup_distance(target))
        .unwrap_or(f64::INFINITY)
}

fn better(a: &ConnectSolution, b: &ConnectSolution) -> bool {
    a.t.total_cmp(&b.t)
        .then(a.params.zeta.total_cmp(&b.params.zeta))
        .then_with(|| {
            a.params
                .theta
                .iter()
                .zip(&b.params.theta)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .is_lt()
}

/// Finds the shortest normal extremal from the origin to `target` by
/// multi-start damped-Newton shooting on the endpoint map.
pub fn connect(target: &GroupPoint, options: &ConnectOptions) -> Result<ConnectSolution> {
    if target.is_origin() {
        return Err(Error::InvalidInput("target must differ from the origin".into()));
    }
    if !(options.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let n = target.n();
    let horiz = target.xy().iter().map(|v| v * v).sum::<f64>().sqrt();
    let z = *target.z();

    if horiz <= 0.1 * options.tol {
        // Vertical target: one full turn of the horizontal circle.
        let c = PI * z.signum();
        let len = (TAU * z.abs()).sqrt();
        let mut a = vec![0.0; 2 * n];
        a[0] = len;
        let (params, t) = params_from_scaled(&a, c).ok_or(Error::NoSolutionFound { starts: 1 })?;
        let residual = residual_of(&params, t, target);
        if residual <= options.tol {
            return Ok(ConnectSolution {
                params,
                t,
                residual,
                starts: 1,
            });
        }
    }

    let gauge = horiz + z.abs().sqrt();
    let direction: Vec<f64> = if horiz > 0.0 {
        target.xy().iter().map(|v| v / horiz).collect()
    } else {
        let mut d = vec![0.0; 2 * n];
        d[0] = 1.0;
        d
    };
    let mut starts = Vec::new();
    for &zeta in &START_ZETAS {
        for &f in &START_LENGTH_FACTORS {
            let t0 = f * gauge;
            let c0 = zeta * t0;
            // The chord of a turning extremal leads its initial direction by
            // an angle c, so rotate the target direction back.
            let rot = -ORIENTATION * c0;
            let (cr, sr) = (rot.cos(), rot.sin());
            let mut x0 = Vec::with_capacity(2 * n + 1);
            for i in 0..n {
                let (dr, di) = (direction[2 * i], direction[2 * i + 1]);
                x0.push(t0 * (dr * cr - di * sr));
                x0.push(t0 * (dr * sr + di * cr));
            }
            x0.push(c0);
            starts.push(x0);
        }
    }
    let target_coords = target.coords();
    let shoot = |x: &[f64]| -> Vec<f64> {
        let e = endpoint_scaled(&x[..2 * n], x[2 * n]);
        e.coords().iter().zip(&target_coords).map(|(a, b)| a - b).collect()
    };
    let newton_tol = (options.tol * 1e-4).max(1e-13);
    let solve_one = |x0: &Vec<f64>| -> Option<ConnectSolution> {
        let r = newton_solve(&shoot, x0, newton_tol, options.max_iter).ok()?;
        let (params, t) = params_from_scaled(&r.x[..2 * n], r.x[2 * n])?;
        let residual = residual_of(&params, t, target);
        (residual <= options.tol).then_some(ConnectSolution {
            params,
            t,
            residual,
            starts: 0,
        })
    };

    #[cfg(feature = "parallel")]
    let found: Vec<Option<ConnectSolution>> = {
        use rayon::prelude::*;
        starts.par_iter().map(solve_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let found: Vec<Option<ConnectSolution>> = starts.iter().map(solve_one).collect();

    let total = starts.len();
    let best = found.into_iter().flatten().fold(None::<ConnectSolution>, |acc, s| match acc {
        Some(b) if !better(&s, &b) => Some(b),
        _ => Some(s),
    });
    best.map(|mut s| {
        s.starts = total;
        s
    })
    .ok_or(Error::NoSolutionFound { starts: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SolveOptions;

    fn state(q: &[f64], xi: &[f64], eta: &[f64], zeta: f64) -> CotangentState {
        CotangentState::new(GroupPoint::from_coords(q).unwrap(), xi.to_vec(), eta.to_vec(), zeta).unwrap()
    }

    #[test]
    fn fiber_hamiltonian_examples() {
        let f = fiber_hamiltonians(&state(&[0.0, 0.0, 0.0], &[1.0], &[0.0], 0.0));
        assert_eq!((f.h, f.k, f.h_t), (vec![1.0], vec![0.0], 0.0));
        let f = fiber_hamiltonians(&state(&[0.0, 1.0, 0.0], &[0.0], &[0.0], 1.0));
        assert_eq!((f.h, f.k), (vec![-1.0], vec![0.0]));
        let f = fiber_hamiltonians(&state(&[1.0, 0.0, 0.0], &[0.0], &[0.0], 1.0));
        assert_eq!(f.k, vec![1.0]);
    }

    #[test]
    fn fiber_hamiltonians_match_frame_pairing() {
        let s = state(&[0.3, -1.1, 2.0, 0.7, 0.2], &[0.5, -0.25], &[1.5, 0.1], -0.8);
        let f = fiber_hamiltonians(&s);
        for i in 1..=2 {
            let x = fiber_linear(&frame_field(2, Frame::X(i)).unwrap(), &s);
            let y = fiber_linear(&frame_field(2, Frame::Y(i)).unwrap(), &s);
            assert!((x - f.h[i - 1]).abs() < 1e-15);
            assert!((y - f.k[i - 1]).abs() < 1e-15);
        }
        assert_eq!(fiber_linear(&frame_field(2, Frame::T).unwrap(), &s), f.h_t);
    }

    #[test]
    fn hamiltonian_values() {
        assert_eq!(sr_hamiltonian(&state(&[0.0; 3], &[1.0], &[0.0], 0.0)), 0.5);
        assert!((sr_hamiltonian(&state(&[0.0; 3], &[0.6], &[0.8], 0.0)) - 0.5).abs() < 1e-15);
        assert_eq!(sr_hamiltonian(&state(&[0.0, 0.0, 0.0], &[0.0], &[0.0], 2.0)), 0.0);
    }

    /// Hamilton's equations against finite differences of H.
    #[test]
    fn rhs_is_canonical() {
        let s = state(&[0.4, -0.3, 1.2, 0.9, -0.6], &[0.2, 0.7], &[-0.5, 0.3], 0.45);
        let n = 2;
        let v = s.to_vec();
        let d = hamiltonian_rhs(&s).to_vec();
        let h = 1e-6;
        let dh = |k: usize| {
            let mut p = v.clone();
            let mut m = v.clone();
            p[k] += h;
            m[k] -= h;
            (sr_hamiltonian(&CotangentState::from_vec(n, &p).unwrap())
                - sr_hamiltonian(&CotangentState::from_vec(n, &m).unwrap()))
                / (2.0 * h)
        };
        let q_dim = 2 * n + 1;
        for k in 0..q_dim {
            assert!((d[k] - dh(q_dim + k)).abs() < 1e-8, "q component {k}");
            assert!((d[q_dim + k] + dh(k)).abs() < 1e-8, "p component {k}");
        }
    }

    #[test]
    fn flow_consequences() {
        let p = NormalExtremalParams::normalized(vec![0.6, 0.8], vec![0.3, 2.0], 0.7).unwrap();
        let flow = integrate_flow(&p.initial_covector(), 20.0, &SolveOptions::rk4(1e-3)).unwrap();
        let h0 = sr_hamiltonian(&flow[0].1);
        for (_, s) in &flow {
            assert_eq!(s.zeta, 0.7);
            assert!((sr_hamiltonian(s) - h0).abs() < 1e-8);
            assert!(contact_defect(s).abs() < 1e-9);
        }
        // Second derivatives rotate at frequency 2 zeta: x'' = -2 zeta y', y'' = 2 zeta x'.
        for (_, s) in flow.iter().step_by(997) {
            let d = hamiltonian_rhs(s);
            let f = fiber_hamiltonians(s);
            // h' = xi' - y' zeta, k' = eta' + x' zeta
            for i in 0..2 {
                let hdot = d.xi[i] - d.q.y(i) * s.zeta;
                let kdot = d.eta[i] + d.q.x(i) * s.zeta;
                assert!((hdot + 2.0 * s.zeta * f.k[i]).abs() < 1e-12);
                assert!((kdot - 2.0 * s.zeta * f.h[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_zeta_is_straight_line() {
        let s = state(&[0.0; 3], &[0.6], &[0.8], 0.0);
        let flow = integrate_flow(&s, 3.0, &SolveOptions::rk4(1e-2)).unwrap();
        for (t, st) in &flow {
            assert!((st.q.x(0) - 0.6 * t).abs() < 1e-12);
            assert!((st.q.y(0) - 0.8 * t).abs() < 1e-12);
            assert!(st.q.z().abs() < 1e-12);
        }
    }

    /// Fixes the rotation orientation: only one sign reproduces the flow.
    #[test]
    fn orientation_matches_flow() {
        let p = NormalExtremalParams::new(vec![1.0], vec![0.4], 0.5).unwrap();
        let flow = integrate_flow(&p.initial_covector(), 3.0, &SolveOptions::rk4(1e-3)).unwrap();
        let (t, s) = flow.last().unwrap();
        let dev = |sigma: f64| closed_form_oriented(&p, *t, sigma).unwrap().point.sup_distance(&s.q);
        assert!(dev(1.0) < 1e-9);
        assert!(dev(-1.0) > 1e-1);
        assert_eq!(ORIENTATION, 1.0);
    }

    #[test]
    fn closed_form_examples() {
        let line = closed_form_extremal(&NormalExtremalParams::new(vec![1.0], vec![0.0], 0.0).unwrap(), 2.0).unwrap();
        assert!(line.point.sup_distance(&GroupPoint::from_coords(&[2.0, 0.0, 0.0]).unwrap()) < 1e-15);

        let p = NormalExtremalParams::new(vec![1.0], vec![0.0], 0.5).unwrap();
        let half = closed_form_extremal(&p, PI).unwrap();
        assert!(half.point.sup_distance(&GroupPoint::from_coords(&[0.0, 2.0, PI]).unwrap()) < 1e-12);
        let full = closed_form_extremal(&p, TAU).unwrap();
        assert!(full.point.sup_distance(&GroupPoint::from_coords(&[0.0, 0.0, TAU]).unwrap()) < 1e-12);

        let flow = integrate_flow(&p.initial_covector(), PI, &SolveOptions::rk4(1e-3)).unwrap();
        assert!(flow.last().unwrap().1.q.sup_distance(&half.point) < 1e-6);

        let bad = NormalExtremalParams {
            r: vec![0.5],
            theta: vec![0.0],
            zeta: 1.0,
        };
        assert!(matches!(closed_form_extremal(&bad, 1.0), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn small_zeta_limit() {
        let a = NormalExtremalParams::new(vec![0.6, 0.8], vec![0.2, 1.0], 1e-6).unwrap();
        let b = NormalExtremalParams::new(vec![0.6, 0.8], vec![0.2, 1.0], 0.0).unwrap();
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            let d = closed_form_extremal(&a, t)
                .unwrap()
                .point
                .sup_distance(&closed_form_extremal(&b, t).unwrap().point);
            assert!(d <= 1e-4);
        }
    }

    #[test]
    fn length_examples() {
        let p = NormalExtremalParams::normalized(vec![1.0, 2.0], vec![0.1, 0.2], 0.8).unwrap();
        let c = sample_closed_form(&p, 5.0, 0.01).unwrap();
        assert!((sr_length(&c).unwrap() - 5.0).abs() < 1e-6);

        let origin = GroupPoint::origin(1);
        let constant = SampledCurve::new(vec![0.0, 1.0], vec![origin.clone(), origin.clone()], Some(vec![vec![0.0, 0.0]; 2])).unwrap();
        assert_eq!(sr_length(&constant).unwrap(), 0.0);

        let pts = vec![origin.clone(), GroupPoint::from_coords(&[2.0, 0.0, 0.0]).unwrap()];
        let line = SampledCurve::new(vec![0.0, 1.0], pts.clone(), Some(vec![vec![2.0, 0.0]; 2])).unwrap();
        assert_eq!(sr_length(&line).unwrap(), 2.0);

        let bare = SampledCurve::new(vec![0.0, 1.0], pts, None).unwrap();
        assert_eq!(sr_length(&bare).unwrap_err(), Error::MissingControls);
    }

    #[test]
    fn time_grid_includes_endpoints() {
        let g = time_grid(1.0, 0.3).unwrap();
        assert_eq!(g.first(), Some(&0.0));
        assert_eq!(g.last(), Some(&1.0));
        assert_eq!(g.len(), 5);
        assert_eq!(time_grid(0.9, 0.3).unwrap().len(), 4);
    }

    /// Canonical Poisson bracket by finite differences, convention
    /// `{f, g} = sum df/dp dg/dq - df/dq dg/dp`.
    fn numeric_poisson(v: &PolyVectorField, w: &PolyVectorField, s: &CotangentState) -> f64 {
        let n = s.n();
        let base = s.to_vec();
        let q_dim = 2 * n + 1;
        let grad = |f: &PolyVectorField| -> Vec<f64> {
            (0..base.len())
                .map(|k| {
                    let h = 1e-6;
                    let mut p = base.clone();
                    let mut m = base.clone();
                    p[k] += h;
                    m[k] -= h;
                    (fiber_linear(f, &CotangentState::from_vec(n, &p).unwrap())
                        - fiber_linear(f, &CotangentState::from_vec(n, &m).unwrap()))
                        / (2.0 * h)
                })
                .collect()
        };
        let gv = grad(v);
        let gw = grad(w);
        (0..q_dim).map(|k| gv[q_dim + k] * gw[k] - gv[k] * gw[q_dim + k]).sum()
    }

    #[test]
    fn poisson_bracket_examples() {
        let s = state(&[0.3, 0.5, -0.2, 0.1, 0.9], &[0.4, -0.6], &[0.2, 0.8], 1.3);
        let x1 = frame_field(2, Frame::X(1)).unwrap();
        let y1 = frame_field(2, Frame::Y(1)).unwrap();
        let x2 = frame_field(2, Frame::X(2)).unwrap();
        let t = frame_field(2, Frame::T).unwrap();

        let hk = poisson_bracket(&x1, &y1).unwrap();
        assert_eq!(hk, t.scale(&crate::poly::int(2)));
        assert!((fiber_linear(&hk, &s) - 2.0 * s.zeta).abs() < 1e-15);
        assert!((numeric_poisson(&x1, &y1, &s) - 2.0 * s.zeta).abs() < 1e-6);

        assert!(poisson_bracket(&x1, &x2).unwrap().is_zero());
        assert!(numeric_poisson(&x1, &x2, &s).abs() < 1e-6);
        assert!(poisson_bracket(&x1, &t).unwrap().is_zero());
        assert!(poisson_bracket(&x1, &frame_field(1, Frame::T).unwrap()).is_err());
    }

    #[test]
    fn abnormal_examples() {
        let r = abnormal_classifier(1, 1.0).unwrap();
        assert_eq!(r.bracket_matrix, vec![vec![2.0]]);
        assert_eq!(r.determinant, 2.0);
        assert_eq!(r.conclusion, "constant curves only");
        let r = abnormal_classifier(3, -0.5).unwrap();
        assert!((r.determinant + 1.0).abs() < 1e-15);
        assert!(r.constant_curves_only);
        assert_eq!(abnormal_classifier(2, 0.0).unwrap_err(), Error::ZeroCovector);
    }

    #[test]
    fn connect_examples() {
        let opts = ConnectOptions::default();
        let s = connect(&GroupPoint::from_coords(&[2.0, 0.0, 0.0]).unwrap(), &opts).unwrap();
        assert!(s.params.zeta.abs() < 1e-9);
        assert!((s.t - 2.0).abs() < 1e-9);
        assert!(s.params.theta[0].abs() < 1e-9 || (s.params.theta[0] - TAU).abs() < 1e-9);

        let s = connect(&GroupPoint::from_coords(&[0.0, 2.0, PI]).unwrap(), &opts).unwrap();
        assert!((s.params.zeta - 0.5).abs() < 1e-6, "{s:?}");
        assert!((s.t - PI).abs() < 1e-6);
        assert!(s.params.theta[0].abs() < 1e-6 || (s.params.theta[0] - TAU).abs() < 1e-6);

        let s = connect(&GroupPoint::from_coords(&[0.0, 0.0, TAU]).unwrap(), &opts).unwrap();
        assert!((s.params.zeta.abs() - 0.5).abs() < 1e-9);
        assert!((s.t - TAU).abs() < 1e-9);

        assert!(matches!(connect(&GroupPoint::origin(1), &opts), Err(Error::InvalidInput(_))));
    }
}
