//! wasm-bindgen bindings for the demo page in `www/`. Everything works on the
//! first Heisenberg group (n = 1) and returns flat `[x, y, z, x, y, z, ...]`
//! arrays so the page can draw them without any glue.

use std::f64::consts::TAU;

use heisenberg::riemannian::{closed_form_riem_geodesic, RiemGeodesicParams};
use heisenberg::sr::{closed_form_extremal, connect, ConnectOptions, NormalExtremalParams};
use heisenberg::{GroupPoint, Result};
use wasm_bindgen::prelude::*;

fn grid(t_max: f64, samples: usize) -> impl Iterator<Item = f64> {
    let samples = samples.max(2);
    (0..samples).map(move |k| t_max * k as f64 / (samples - 1) as f64)
}

fn flatten(points: impl Iterator<Item = Result<GroupPoint>>) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for p in points {
        out.extend(p?.coords());
    }
    Ok(out)
}

/// Unit-speed normal extremal with initial phase `theta` and vertical covector `zeta`.
pub fn sr_curve_points(theta: f64, zeta: f64, t_max: f64, samples: usize) -> Result<Vec<f64>> {
    let p = NormalExtremalParams::new(vec![1.0], vec![theta.rem_euclid(TAU)], zeta)?;
    flatten(grid(t_max, samples).map(|t| closed_form_extremal(&p, t).map(|s| s.point)))
}

/// Unit-speed Riemannian geodesic with vertical component `gamma` and phase `phi`.
pub fn riem_curve_points(gamma: f64, phi: f64, t_max: f64, samples: usize) -> Result<Vec<f64>> {
    let rho = (1.0 - gamma * gamma).max(0.0).sqrt();
    let p = RiemGeodesicParams::new(vec![rho], vec![phi], gamma)?;
    flatten(grid(t_max, samples).map(|t| closed_form_riem_geodesic(&p, t).map(|s| s.point)))
}

/// Shortest extremal from the origin to `(x, y, z)`, as `[theta, zeta, length, residual]`.
pub fn connect_params(x: f64, y: f64, z: f64) -> Result<Vec<f64>> {
    let target = GroupPoint::new(vec![x, y], z)?;
    let sol = connect(&target, &ConnectOptions::default())?;
    Ok(vec![sol.params.theta[0], sol.params.zeta, sol.t, sol.residual])
}

fn js(e: heisenberg::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn sr_curve(theta: f64, zeta: f64, t_max: f64, samples: usize) -> std::result::Result<Vec<f64>, JsError> {
    sr_curve_points(theta, zeta, t_max, samples).map_err(js)
}

#[wasm_bindgen]
pub fn riem_curve(gamma: f64, phi: f64, t_max: f64, samples: usize) -> std::result::Result<Vec<f64>, JsError> {
    riem_curve_points(gamma, phi, t_max, samples).map_err(js)
}

#[wasm_bindgen]
pub fn connect_to(x: f64, y: f64, z: f64) -> std::result::Result<Vec<f64>, JsError> {
    connect_params(x, y, z).map_err(js)
}
