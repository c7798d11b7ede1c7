//! Searches for shorter geodesics: a geodesic is beaten at `t` once another
//! geodesic from the origin reaches the same endpoint with length at most
//! `t - margin`. Failing to find one is only evidence of minimality.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::Serialize;

use super::{closed_form_riem_geodesic, riem_endpoint_scaled, RiemGeodesicParams};
use crate::error::{Error, Result};
use crate::group::GroupPoint;
use crate::numerics::newton_solve;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOptions {
    /// Endpoint agreement a witness must reach under the closed form.
    pub tol: f64,
    /// Required length advantage of a witness.
    pub margin: f64,
    /// Starting values of `gamma'` for the Newton search.
    pub gamma_starts: Vec<f64>,
    /// Starting lengths as fractions of `t`.
    pub length_fractions: Vec<f64>,
    /// Number of extra phase offsets tried per start.
    pub phase_starts: usize,
    pub max_iter: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            margin: 1e-3,
            gamma_starts: vec![-0.95, -0.8, -0.6, -0.4, -0.2, -0.05, 0.05, 0.2, 0.4, 0.6, 0.8, 0.95],
            length_fractions: vec![0.2, 0.4, 0.6, 0.8, 0.95],
            phase_starts: 4,
            max_iter: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub params: RiemGeodesicParams,
    /// Length of the witness, which is also its parameter.
    pub t: f64,
    pub endpoint_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub beaten: bool,
    pub endpoint: Vec<f64>,
    pub witness: Option<Witness>,
}

fn witness_from_scaled(a: &[f64], b: f64, target: &GroupPoint) -> Option<Witness> {
    let len = (a.iter().map(|v| v * v).sum::<f64>() + b * b).sqrt();
    if !(len > 0.0) || !len.is_finite() {
        return None;
    }
    let n = a.len() / 2;
    let rho = (0..n).map(|i| a[2 * i].hypot(a[2 * i + 1]) / len).collect::<Vec<_>>();
    let phi = (0..n).map(|i| a[2 * i + 1].atan2(a[2 * i])).collect();
    // Rescale away rounding so the unit-speed check holds to 1e-12.
    let gamma = b / len;
    let norm = (rho.iter().map(|r| r * r).sum::<f64>() + gamma * gamma).sqrt();
    let rho = rho.into_iter().map(|r| r / norm).collect();
    let params = RiemGeodesicParams::new(rho, phi, gamma / norm).ok()?;
    let endpoint_error = closed_form_riem_geodesic(&params, len).ok()?.point.sup_distance(target);
    Some(Witness {
        params,
        t: len,
        endpoint_error,
    })
}

/// Geodesics from the origin returning to the `z`-axis at `(0, ..., 0, z)`:
/// the horizontal projection closes after `k` full turns, so `b = k pi` and
/// `|a|^2 = 2 pi k (|z| - pi k)`.
fn axis_family(n: usize, z: f64) -> Vec<(Vec<f64>, f64)> {
    let mut out = Vec::new();
    let mut k = 1usize;
    while PI * (k as f64) < z.abs() {
        let kp = PI * k as f64;
        let mut a = vec![0.0; 2 * n];
        a[0] = (TAU * k as f64 * (z.abs() - kp)).sqrt();
        out.push((a, kp * z.signum()));
        k += 1;
    }
    out
}

fn better(a: &Witness, b: &Witness) -> bool {
    a.t.total_cmp(&b.t).then(a.params.gamma.total_cmp(&b.params.gamma)).is_lt()
}

/// Looks for a geodesic shorter than `t - margin` that reaches the endpoint
/// of `p` at parameter `t`.
pub fn minimality_probe(p: &RiemGeodesicParams, t: f64, opts: &ProbeOptions) -> Result<ProbeResult> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("parameter must be finite and nonnegative (got {t})")));
    }
    let n = p.n();
    let target = closed_form_riem_geodesic(p, t)?.point;
    let coords = target.coords();
    let horiz = target.xy().iter().map(|v| v * v).sum::<f64>().sqrt();
    let limit = t - opts.margin;

    let accept = |w: Witness| (w.t <= limit && w.endpoint_error <= opts.tol).then_some(w);
    let mut candidates: Vec<Witness> = Vec::new();
    if horiz <= 1e-12 {
        for (a, b) in axis_family(n, *target.z()) {
            if let Some(w) = witness_from_scaled(&a, b, &target).and_then(accept) {
                candidates.push(w);
            }
        }
    }

    let direction: Vec<f64> = if horiz > 1e-12 {
        target.xy().iter().map(|v| v / horiz).collect()
    } else {
        let mut d = vec![0.0; 2 * n];
        d[0] = 1.0;
        d
    };
    let mut starts = Vec::new();
    for &g in &opts.gamma_starts {
        for &f in &opts.length_fractions {
            let len = f * t;
            let b = g * len;
            let h = len * (1.0 - g * g).max(0.0).sqrt();
            for k in 0..opts.phase_starts.max(1) {
                // The chord leads the initial direction by the angle b.
                let rot = TAU * k as f64 / opts.phase_starts.max(1) as f64 - b;
                let (c, s) = (rot.cos(), rot.sin());
                let mut x0 = Vec::with_capacity(2 * n + 1);
                for i in 0..n {
                    let (dr, di) = (direction[2 * i], direction[2 * i + 1]);
                    x0.push(h * (dr * c - di * s));
                    x0.push(h * (dr * s + di * c));
                }
                x0.push(b);
                starts.push(x0);
            }
        }
    }

    let shoot = |x: &[f64]| -> Vec<f64> {
        let e = riem_endpoint_scaled(&x[..2 * n], x[2 * n]);
        e.coords().iter().zip(&coords).map(|(a, b)| a - b).collect()
    };
    let newton_tol = (opts.tol * 1e-4).max(1e-12 * (1.0 + t));
    let solve_one = |x0: &Vec<f64>| -> Option<Witness> {
        let r = newton_solve(&shoot, x0, newton_tol, opts.max_iter).ok()?;
        witness_from_scaled(&r.x[..2 * n], r.x[2 * n], &target).and_then(accept)
    };

    #[cfg(feature = "parallel")]
    let found: Vec<Option<Witness>> = {
        use rayon::prelude::*;
        starts.par_iter().map(solve_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let found: Vec<Option<Witness>> = starts.iter().map(solve_one).collect();

    candidates.extend(found.into_iter().flatten());
    let witness = candidates.into_iter().fold(None::<Witness>, |acc, w| match acc {
        Some(b) if !better(&w, &b) => Some(b),
        _ => Some(w),
    });
    Ok(ProbeResult {
        beaten: witness.is_some(),
        endpoint: coords,
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RayStatus {
    /// No witness found up to the horizon.
    Ray,
    Beaten,
}

impl fmt::Display for RayStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RayStatus::Ray => "ray",
            RayStatus::Beaten => "beaten",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayRow {
    pub gamma: f64,
    pub direction_id: usize,
    pub status: RayStatus,
    pub first_beaten_t: Option<f64>,
    pub witness: Option<Witness>,
}

impl RayRow {
    pub const CSV_HEADER: &'static str = "gamma,direction_id,status,first_beaten_t,witness_gamma,witness_t";

    pub fn csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(crate::export::fmt_f64).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            crate::export::fmt_f64(self.gamma),
            self.direction_id,
            self.status,
            opt(self.first_beaten_t),
            opt(self.witness.as_ref().map(|w| w.params.gamma)),
            opt(self.witness.as_ref().map(|w| w.t)),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayScanOptions {
    pub t_step: f64,
    /// Initial horizontal phases `2 pi k / directions` tried for each `gamma`.
    pub directions: usize,
    pub probe: ProbeOptions,
}

impl Default for RayScanOptions {
    fn default() -> Self {
        Self {
            t_step: 0.25,
            directions: 1,
            probe: ProbeOptions::default(),
        }
    }
}

fn ray_params(n: usize, gamma: f64, phase: f64) -> Result<RiemGeodesicParams> {
    let mut rho = vec![0.0; n];
    rho[0] = (1.0 - gamma * gamma).max(0.0).sqrt();
    let mut phi = vec![0.0; n];
    phi[0] = phase;
    RiemGeodesicParams::new(rho, phi, gamma)
}

/// Probes each direction on the grid `t_step, 2 t_step, ...` up to the
/// horizon and records the first parameter at which it is beaten.
pub fn ray_scan(n: usize, gamma_grid: &[f64], horizon: f64, opts: &RayScanOptions) -> Result<Vec<RayRow>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidInput(format!("horizon must be positive (got {horizon})")));
    }
    if !(opts.t_step > 0.0) || opts.directions == 0 {
        return Err(Error::InvalidInput("t_step and directions must be positive".into()));
    }
    let mut jobs = Vec::new();
    for &g in gamma_grid {
        for d in 0..opts.directions {
            jobs.push((g, d, ray_params(n, g, TAU * d as f64 / opts.directions as f64)?));
        }
    }
    let steps = (horizon / opts.t_step - 1e-9).ceil().max(1.0) as usize;
    let run = |(g, d, p): &(f64, usize, RiemGeodesicParams)| -> Result<RayRow> {
        for k in 1..=steps {
            let t = (k as f64 * opts.t_step).min(horizon);
            let r = minimality_probe(p, t, &opts.probe)?;
            if r.beaten {
                return Ok(RayRow {
                    gamma: *g,
                    direction_id: *d,
                    status: RayStatus::Beaten,
                    first_beaten_t: Some(t),
                    witness: r.witness,
                });
            }
        }
        Ok(RayRow {
            gamma: *g,
            direction_id: *d,
            status: RayStatus::Ray,
            first_beaten_t: None,
            witness: None,
        })
    };

    #[cfg(feature = "parallel")]
    let rows: Vec<Result<RayRow>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Result<RayRow>> = jobs.iter().map(run).collect();
    rows.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceProbe {
    #[serde(rename = "Z")]
    pub z: f64,
    pub best_length: f64,
    pub best_gamma: f64,
    pub vertical_length: f64,
    /// Number of turns of the horizontal projection of the best geodesic.
    pub turns: usize,
}

/// Shortest geodesic from the origin to `(0, ..., 0, z)` among the vertical
/// segment and the geodesics closing their horizontal projection on the way.
pub fn distance_probe(n: usize, z: f64) -> Result<DistanceProbe> {
    if n == 0 || !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidInput(format!("need n > 0 and a positive height (got n = {n}, z = {z})")));
    }
    let mut best = DistanceProbe {
        z,
        best_length: z,
        best_gamma: 1.0,
        vertical_length: z,
        turns: 0,
    };
    for (k, (a, b)) in axis_family(n, z).into_iter().enumerate() {
        let len = (a.iter().map(|v| v * v).sum::<f64>() + b * b).sqrt();
        if len < best.best_length {
            best.best_length = len;
            best.best_gamma = b / len;
            best.turns = k + 1;
        }
    }
    Ok(best)
}
