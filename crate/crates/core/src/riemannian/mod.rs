//! The left-invariant Riemannian metric with `X_i, Y_i, T` orthonormal:
//! connection and curvature from structure constants, geodesics in closed
//! form, parallel fields and conjugate points along the vertical geodesic.
//!
//! Frame indices run over `(X_1, Y_1, ..., X_n, Y_n, T)`.

mod probe;

pub use probe::{
    distance_probe, minimality_probe, ray_scan, DistanceProbe, ProbeOptions, ProbeResult, RayRow,
    RayScanOptions, RayStatus, Witness,
};

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{frame_coefficients_at_origin, frame_field, lie_bracket, Frame, GroupPoint};
use crate::numerics::rk4_step;
use crate::poly::rat_to_f64;
use crate::special::{chord_factor, sine_deficit};
use crate::sr::{time_grid, SampledCurve};

const UNIT_SPEED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    n: usize,
    c: Vec<f64>,
}

impl StructureConstants {
    /// `c[i][j][k]`, coefficient of `e_k` in `[e_i, e_j]`, flattened row-major.
    pub fn new(n: usize, c: Vec<f64>) -> Result<Self> {
        let d = 2 * n + 1;
        if n == 0 || c.len() != d * d * d {
            return Err(Error::InvalidInput(format!("need {} structure constants", d * d * d)));
        }
        let s = Self { n, c };
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if s.get(i, j, k) != -s.get(j, i, k) {
                        return Err(Error::InvalidStructureConstants(i, j, k));
                    }
                }
            }
        }
        Ok(s)
    }

    /// Brackets of the frame fields, computed exactly from the polynomial
    /// frames and read off at the origin.
    pub fn heisenberg(n: usize) -> Self {
        let d = 2 * n + 1;
        let frames: Vec<_> = Frame::all(n)
            .into_iter()
            .map(|f| frame_field(n, f).expect("valid frame"))
            .collect();
        let mut c = vec![0.0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                let br = lie_bracket(&frames[i], &frames[j]).expect("same n");
                for (k, v) in frame_coefficients_at_origin(&br).iter().enumerate() {
                    c[(i * d + j) * d + k] = rat_to_f64(v);
                }
            }
        }
        Self { n, c }
    }

    pub fn abelian(n: usize) -> Self {
        let d = 2 * n + 1;
        Self {
            n,
            c: vec![0.0; d * d * d],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.c[(i * d + j) * d + k]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionTable {
    n: usize,
    gamma: Vec<f64>,
}

impl ConnectionTable {
    pub fn from_entries(n: usize, gamma: Vec<f64>) -> Result<Self> {
        let d = 2 * n + 1;
        if gamma.len() != d * d * d {
            return Err(Error::InvalidInput(format!("need {} connection coefficients", d * d * d)));
        }
        Ok(Self { n, gamma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Coefficient of `e_k` in `nabla_{e_i} e_j`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.gamma[(i * d + j) * d + k]
    }

    /// `nabla_{e_i} e_j` as a frame vector.
    pub fn entry(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.dim()).map(|k| self.get(i, j, k)).collect()
    }

    /// `nabla_A B` for constant frame combinations `A`, `B`.
    pub fn covariant(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for i in 0..d {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if b[j] == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += a[i] * b[j] * self.get(i, j, k);
                }
            }
        }
        out
    }

    /// Largest violation of `Gamma[i][j][k] = -Gamma[i][k][j]`.
    pub fn metric_defect(&self) -> f64 {
        let d = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    m = m.max((self.get(i, j, k) + self.get(i, k, j)).abs());
                }
            }
        }
        m
    }

    /// Largest violation of `nabla_i e_j - nabla_j e_i = [e_i, e_j]`, with its location.
    pub fn torsion_defect(&self, c: &StructureConstants) -> (f64, usize, usize) {
        let d = self.dim();
        let mut worst = (0.0, 0, 0);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let t = (self.get(i, j, k) - self.get(j, i, k) - c.get(i, j, k)).abs();
                    if t > worst.0 {
                        worst = (t, i, j);
                    }
                }
            }
        }
        worst
    }
}

/// Koszul formula for an orthonormal left-invariant frame:
/// `nabla_{e_i} e_j = (1/2) sum_k (c_ij^k + c_ki^j - c_jk^i) e_k`.
pub fn connection_from_structure_constants(c: &StructureConstants) -> Result<ConnectionTable> {
    let d = c.dim();
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                if c.get(i, j, k) != -c.get(j, i, k) {
                    return Err(Error::InvalidStructureConstants(i, j, k));
                }
            }
        }
    }
    let mut gamma = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                gamma[(i * d + j) * d + k] = 0.5 * (c.get(i, j, k) + c.get(k, i, j) - c.get(j, k, i));
            }
        }
    }
    Ok(ConnectionTable { n: c.n(), gamma })
}

pub fn heisenberg_connection(n: usize) -> ConnectionTable {
    connection_from_structure_constants(&StructureConstants::heisenberg(n)).expect("antisymmetric")
}

/// Frame ODEs of a geodesic `c' = sum u_i X_i + v_i Y_i + gamma T`.
pub fn geodesic_frame_rhs(u: &[f64], v: &[f64], gamma: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let du = v.iter().map(|vi| -2.0 * gamma * vi).collect();
    let dv = u.iter().map(|ui| 2.0 * gamma * ui).collect();
    (du, dv, 0.0)
}

/// `-nabla_w w`: the frame-component acceleration forced by the connection.
pub fn geodesic_acceleration(conn: &ConnectionTable, w: &[f64]) -> Vec<f64> {
    conn.covariant(w, w).into_iter().map(|v| -v).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiemGeodesicParams {
    pub rho: Vec<f64>,
    pub phi: Vec<f64>,
    pub gamma: f64,
}

impl RiemGeodesicParams {
    pub fn new(rho: Vec<f64>, phi: Vec<f64>, gamma: f64) -> Result<Self> {
        if rho.is_empty() || rho.len() != phi.len() {
            return Err(Error::InvalidInput(format!(
                "need one phase per amplitude (got {} amplitudes, {} phases)",
                rho.len(),
                phi.len()
            )));
        }
        if !gamma.is_finite() || rho.iter().chain(&phi).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        if rho.iter().any(|&r| r < 0.0) {
            return Err(Error::InvalidInput("amplitudes must be nonnegative".into()));
        }
        if gamma.abs() > 1.0 + UNIT_SPEED_TOL {
            return Err(Error::NotUnitSpeed(gamma * gamma));
        }
        let speed2 = rho.iter().map(|r| r * r).sum::<f64>() + gamma * gamma;
        if (speed2 - 1.0).abs() > UNIT_SPEED_TOL {
            return Err(Error::NotUnitSpeed(speed2));
        }
        let phi = rho
            .iter()
            .zip(phi)
            .map(|(&r, p)| if r < 1e-12 { 0.0 } else { p.rem_euclid(TAU) })
            .collect();
        Ok(Self { rho, phi, gamma })
    }

    /// From the initial frame velocity `(u_i(0), v_i(0))` and `gamma`.
    pub fn from_initial_velocity(u0: &[f64], v0: &[f64], gamma: f64) -> Result<Self> {
        if u0.len() != v0.len() {
            return Err(Error::InvalidInput("u0 and v0 differ in length".into()));
        }
        let rho = u0.iter().zip(v0).map(|(u, v)| u.hypot(*v)).collect();
        let phi = u0.iter().zip(v0).map(|(u, v)| v.atan2(*u)).collect();
        Self::new(rho, phi, gamma)
    }

    pub fn vertical(n: usize, up: bool) -> Self {
        Self {
            rho: vec![0.0; n],
            phi: vec![0.0; n],
            gamma: if up { 1.0 } else { -1.0 },
        }
    }

    pub fn n(&self) -> usize {
        self.rho.len()
    }

    fn scaled(&self, t: f64) -> (Vec<f64>, f64) {
        let a = self
            .rho
            .iter()
            .zip(&self.phi)
            .flat_map(|(r, p)| {
                [t * r * p.cos(), t * r * p.sin()]
            })
            .collect();
        (a, self.gamma * t)
    }
}

/// Candidate linear drift coefficients of `z(t)` for unit-speed geodesics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZDrift {
    /// `(3 gamma^2 - 1) / (2 gamma)`
    Printed,
    /// `(1 + gamma^2) / (2 gamma)`, from integrating `z' = gamma + sum (v_i x_i - u_i y_i)`.
    Derived,
}

impl ZDrift {
    pub fn coefficient(self, gamma: f64) -> f64 {
        match self {
            ZDrift::Printed => (3.0 * gamma * gamma - 1.0) / (2.0 * gamma),
            ZDrift::Derived => (1.0 + gamma * gamma) / (2.0 * gamma),
        }
    }
}

/// The drift coefficient the closed form uses; selected by agreement with
/// numeric integration of the geodesic equations.
pub const SHIPPED_Z_DRIFT: ZDrift = ZDrift::Derived;

/// Oscillatory part of `z(t)`: `z = C(gamma) t + z_osc(t)` for unit speed.
pub fn z_oscillation(p: &RiemGeodesicParams, t: f64) -> f64 {
    let rho2: f64 = p.rho.iter().map(|r| r * r).sum();
    let g = p.gamma;
    -rho2 * (2.0 * g * t).sin() / (4.0 * g * g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiemSample {
    pub point: GroupPoint,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub gamma: f64,
}

/// Endpoint at unit time of the geodesic with initial frame velocity
/// `(a_1, ..., a_2n, b)`; its length is `|(a, b)|`.
pub fn riem_endpoint_scaled(a: &[f64], b: f64) -> GroupPoint {
    let n = a.len() / 2;
    let s = 2.0 * b;
    let (pr, pi) = chord_factor(s);
    let mut xy = Vec::with_capacity(2 * n);
    let mut norm2 = 0.0;
    for i in 0..n {
        let (ar, ai) = (a[2 * i], a[2 * i + 1]);
        xy.push(ar * pr - ai * pi);
        xy.push(ar * pi + ai * pr);
        norm2 += ar * ar + ai * ai;
    }
    GroupPoint::new(xy, b + norm2 * sine_deficit(s)).expect("finite endpoint")
}

/// Unit-speed geodesic from the origin at parameter `t`.
pub fn closed_form_riem_geodesic(p: &RiemGeodesicParams, t: f64) -> Result<RiemSample> {
    let speed2 = p.rho.iter().map(|r| r * r).sum::<f64>() + p.gamma * p.gamma;
    if (speed2 - 1.0).abs() > UNIT_SPEED_TOL {
        return Err(Error::NotUnitSpeed(speed2));
    }
    let (a, b) = p.scaled(t);
    let mut point = riem_endpoint_scaled(&a, b);
    if p.gamma.abs() >= 1e-4 {
        // Away from the horizontal limit the drift form is well conditioned.
        let z = SHIPPED_Z_DRIFT.coefficient(p.gamma) * t + z_oscillation(p, t);
        point = GroupPoint::new(point.xy().to_vec(), z)?;
    }
    let (u, v) = p
        .rho
        .iter()
        .zip(&p.phi)
        .map(|(r, ph)| {
            let phase = 2.0 * p.gamma * t + ph;
            (r * phase.cos(), r * phase.sin())
        })
        .unzip();
    Ok(RiemSample {
        point,
        u,
        v,
        gamma: p.gamma,
    })
}

/// Right-hand side of the coordinate geodesic system, state
/// `(x1, y1, ..., z, u1, v1, ..., gamma)`.
pub fn riem_rhs_flat(n: usize) -> impl Fn(f64, &[f64]) -> Vec<f64> {
    move |_t, s| {
        let q = &s[..2 * n + 1];
        let w = &s[2 * n + 1..];
        let gamma = w[2 * n];
        let u: Vec<f64> = (0..n).map(|i| w[2 * i]).collect();
        let v: Vec<f64> = (0..n).map(|i| w[2 * i + 1]).collect();
        let (du, dv, dg) = geodesic_frame_rhs(&u, &v, gamma);
        let mut out = Vec::with_capacity(s.len());
        let mut zdot = gamma;
        for i in 0..n {
            out.push(u[i]);
            out.push(v[i]);
            zdot += v[i] * q[2 * i] - u[i] * q[2 * i + 1];
        }
        out.push(zdot);
        for i in 0..n {
            out.push(du[i]);
            out.push(dv[i]);
        }
        out.push(dg);
        out
    }
}

pub fn riem_initial_state(p: &RiemGeodesicParams) -> Vec<f64> {
    let n = p.n();
    let mut s = vec![0.0; 2 * n + 1];
    for (r, ph) in p.rho.iter().zip(&p.phi) {
        s.push(r * ph.cos());
        s.push(r * ph.sin());
    }
    s.push(p.gamma);
    s
}

pub fn sample_riem_closed_form(p: &RiemGeodesicParams, t_max: f64, dt: f64) -> Result<SampledCurve> {
    let times = time_grid(t_max, dt)?;
    let mut points = Vec::with_capacity(times.len());
    let mut controls = Vec::with_capacity(times.len());
    for &t in &times {
        let s = closed_form_riem_geodesic(p, t)?;
        controls.push(s.u.iter().zip(&s.v).flat_map(|(a, b)| [*a, *b]).collect());
        points.push(s.point);
    }
    SampledCurve::new(times, points, Some(controls))
}

/// RK4 twin of [`sample_riem_closed_form`] with substeps of at most 1e-3.
pub fn sample_riem_numeric(p: &RiemGeodesicParams, t_max: f64, dt: f64) -> Result<SampledCurve> {
    let n = p.n();
    let times = time_grid(t_max, dt)?;
    let rhs = riem_rhs_flat(n);
    let sub = ((dt / crate::numerics::DEFAULT_DT).ceil() as usize).max(1);
    let mut y = riem_initial_state(p);
    let mut t = 0.0;
    let mut points = Vec::with_capacity(times.len());
    let mut controls = Vec::with_capacity(times.len());
    for &target in &times {
        if target > t {
            let h = (target - t) / sub as f64;
            for k in 0..sub {
                y = rk4_step(&rhs, t + k as f64 * h, &y, h);
            }
        }
        t = target;
        points.push(GroupPoint::from_coords(&y[..2 * n + 1])?);
        controls.push(y[2 * n + 1..4 * n + 1].to_vec());
    }
    SampledCurve::new(times, points, Some(controls))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    r: Vec<f64>,
}

impl CurvatureTensor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    /// Coefficient of `e_l` in `R(e_i, e_j) e_k`.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = self.dim();
        self.r[((i * d + j) * d + k) * d + l]
    }

    /// `R(A, B) C` for frame combinations.
    pub fn apply(&self, a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for i in 0..d {
            for j in 0..d {
                let ab = a[i] * b[j];
                if ab == 0.0 {
                    continue;
                }
                for k in 0..d {
                    if c[k] == 0.0 {
                        continue;
                    }
                    for (l, o) in out.iter_mut().enumerate() {
                        *o += ab * c[k] * self.get(i, j, k, l);
                    }
                }
            }
        }
        out
    }

    /// Largest entry of `R(i,j)k + R(j,k)i + R(k,i)j`.
    pub fn bianchi_defect(&self) -> f64 {
        let d = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let s = self.get(i, j, k, l) + self.get(j, k, i, l) + self.get(k, i, j, l);
                        m = m.max(s.abs());
                    }
                }
            }
        }
        m
    }

    /// Largest entry of `R(i,j) + R(j,i)`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let d = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        m = m.max((self.get(i, j, k, l) + self.get(j, i, k, l)).abs());
                    }
                }
            }
        }
        m
    }
}

/// `R(A,B)C = nabla_A nabla_B C - nabla_B nabla_A C - nabla_[A,B] C` on the
/// left-invariant frame, where all coefficients are constant.
pub fn curvature_tensor(conn: &ConnectionTable, c: &StructureConstants) -> Result<CurvatureTensor> {
    if conn.n() != c.n() {
        return Err(Error::DimensionMismatch {
            expected: conn.n(),
            found: c.n(),
        });
    }
    let (defect, i, j) = conn.torsion_defect(c);
    if defect > 1e-12 {
        return Err(Error::InconsistentInputs(i, j));
    }
    let d = conn.dim();
    let mut r = vec![0.0; d * d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let mut acc = 0.0;
                    for m in 0..d {
                        acc += conn.get(j, k, m) * conn.get(i, m, l) - conn.get(i, k, m) * conn.get(j, m, l)
                            - c.get(i, j, m) * conn.get(m, k, l);
                    }
                    r[((i * d + j) * d + k) * d + l] = acc;
                }
            }
        }
    }
    Ok(CurvatureTensor { n: conn.n(), r })
}

pub fn heisenberg_curvature(n: usize) -> CurvatureTensor {
    curvature_tensor(&heisenberg_connection(n), &StructureConstants::heisenberg(n)).expect("consistent")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `K(A, B) = <R(A,B)B, A> / (|A|^2 |B|^2 - <A,B>^2)`.
pub fn sectional_curvature(r: &CurvatureTensor, a: &[f64], b: &[f64]) -> Result<f64> {
    let d = r.dim();
    if a.len() != d || b.len() != d {
        return Err(Error::InvalidInput(format!("frame vectors need {d} components")));
    }
    let area = dot(a, a) * dot(b, b) - dot(a, b).powi(2);
    if area <= 1e-14 * dot(a, a).max(1.0) * dot(b, b).max(1.0) {
        return Err(Error::DegeneratePlane);
    }
    Ok(dot(&r.apply(a, b, b), a) / area)
}

pub fn frame_vector(n: usize, f: Frame) -> Vec<f64> {
    let mut v = vec![0.0; 2 * n + 1];
    v[f.index(n)] = 1.0;
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParallelFieldReport {
    pub samples: usize,
    /// Largest frame component of `dZ/ds + nabla_T Z`.
    pub max_residual: f64,
    /// Largest deviation of `K(Z(s), T)` from 1.
    pub max_curvature_deviation: f64,
}

/// `Z(s) = X_1 cos s + Y_1 sin s` along the vertical geodesic `z(s) = (0, ..., 0, s)`.
pub fn parallel_field_check(n: usize, s_grid: &[f64]) -> Result<ParallelFieldReport> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let conn = heisenberg_connection(n);
    let curv = heisenberg_curvature(n);
    let t = frame_vector(n, Frame::T);
    let mut max_residual: f64 = 0.0;
    let mut max_curv: f64 = 0.0;
    for &s in s_grid {
        let mut z = vec![0.0; 2 * n + 1];
        z[0] = s.cos();
        z[1] = s.sin();
        let mut dz = vec![0.0; 2 * n + 1];
        dz[0] = -s.sin();
        dz[1] = s.cos();
        let nab = conn.covariant(&t, &z);
        max_residual = dz
            .iter()
            .zip(&nab)
            .fold(max_residual, |m, (a, b)| m.max((a + b).abs()));
        max_curv = max_curv.max((sectional_curvature(&curv, &z, &t)? - 1.0).abs());
    }
    Ok(ParallelFieldReport {
        samples: s_grid.len(),
        max_residual,
        max_curvature_deviation: max_curv,
    })
}

/// First conjugate point along the vertical geodesic: integrates the Jacobi
/// equation `D^2 J + R(J, c')c' = 0` in the left-invariant frame together with
/// a parallel field `E`, `J(0) = 0`, `DJ(0) = E(0) = X_1`, and locates the first
/// sign change of `<J, E>`.
pub fn conjugate_point_scan(n: usize, t_max: f64) -> Result<f64> {
    if n == 0 || !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidInput(format!("need n > 0 and t_max > 0 (got n = {n}, t_max = {t_max})")));
    }
    let d = 2 * n + 1;
    let conn = heisenberg_connection(n);
    let curv = heisenberg_curvature(n);
    let cdot = frame_vector(n, Frame::T);
    let rhs = |_t: f64, y: &[f64]| -> Vec<f64> {
        let (j, rest) = y.split_at(d);
        let (p, e) = rest.split_at(d);
        let gj = conn.covariant(&cdot, j);
        let gp = conn.covariant(&cdot, p);
        let ge = conn.covariant(&cdot, e);
        let rj = curv.apply(j, &cdot, &cdot);
        let mut out = Vec::with_capacity(3 * d);
        out.extend((0..d).map(|l| p[l] - gj[l]));
        out.extend((0..d).map(|l| -rj[l] - gp[l]));
        out.extend((0..d).map(|l| -ge[l]));
        out
    };
    let signal = |y: &[f64]| dot(&y[..d], &y[2 * d..]);
    let mut y = vec![0.0; 3 * d];
    y[d] = 1.0;
    y[2 * d] = 1.0;
    let dt: f64 = 1e-3;
    let mut t = 0.0;
    let mut prev: Option<f64> = None;
    while t < t_max {
        let h = dt.min(t_max - t);
        let next = rk4_step(&rhs, t, &y, h);
        let f_next = signal(&next);
        if let Some(f_prev) = prev {
            if f_prev > 0.0 && f_next <= 0.0 {
                let (mut lo, mut hi) = (0.0, h);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if signal(&rk4_step(&rhs, t, &y, mid)) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Ok(t + 0.5 * (lo + hi));
            }
        }
        prev = Some(f_next);
        y = next;
        t += h;
    }
    Err(Error::NoConjugatePointFound(t_max))
}
