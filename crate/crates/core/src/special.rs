//! Cancellation-free kernels shared by the closed-form geodesics.

/// `(e^{is} - 1) / (is)` as `(re, im)`; equals `(1, 0)` at `s = 0`.
pub fn chord_factor(s: f64) -> (f64, f64) {
    if s.abs() < 1e-4 {
        let s2 = s * s;
        (1.0 - s2 / 6.0 + s2 * s2 / 120.0, s / 2.0 - s * s2 / 24.0 + s * s2 * s2 / 720.0)
    } else {
        let half = (0.5 * s).sin();
        (s.sin() / s, 2.0 * half * half / s)
    }
}

/// `(s - sin s) / s^2`, odd in `s`, zero at the origin.
pub fn sine_deficit(s: f64) -> f64 {
    if s.abs() < 0.1 {
        // Taylor series; the first omitted term is below 2e-20.
        let s2 = s * s;
        s * (1.0 / 6.0 - s2 * (1.0 / 120.0 - s2 * (1.0 / 5040.0 - s2 * (1.0 / 362880.0 - s2 / 39916800.0))))
    } else {
        (s - s.sin()) / (s * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chord_factor_branches_agree() {
        for &s in &[1e-4, -1e-4, 2e-4] {
            let (r0, i0) = chord_factor(s);
            let half = (0.5 * s).sin();
            assert!((r0 - s.sin() / s).abs() < 1e-15);
            assert!((i0 - 2.0 * half * half / s).abs() < 1e-15);
        }
        assert_eq!(chord_factor(0.0), (1.0, 0.0));
        let (r, i) = chord_factor(std::f64::consts::TAU);
        assert!(r.abs() < 1e-15 && i.abs() < 1e-15);
    }

    #[test]
    fn sine_deficit_branches_agree() {
        for &s in &[0.1, -0.1, 0.0999999] {
            assert!((sine_deficit(s) - (s - s.sin()) / (s * s)).abs() < 1e-14);
        }
        assert_eq!(sine_deficit(0.0), 0.0);
        let tau = std::f64::consts::TAU;
        assert!((sine_deficit(tau) - 1.0 / tau).abs() < 1e-15);
    }
}
