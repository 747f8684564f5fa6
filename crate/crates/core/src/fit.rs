//! Linear least-squares fit of a position trace to the slow-plus-Zitterbewegung
//! template
//!
//! `y(t) ≈ a₀ + a₁ cos ωt + a₂ sin ωt + sin²(ωt/2)·[b_s sin Ωt + b_c cos Ωt]`
//!
//! with the fast frequency `Ω` refined by a bracketed scan followed by golden
//! section search on the variable-projection residual. The fast line is
//! modulated by the `sin²` envelope, so the template fit is the primary
//! estimator and the windowed DFT peak is only a cross-check.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Matrix5, Vector3, Vector5};

use crate::math::{cos, sin, sqrt};
use crate::{Error, Result, C64};

/// Relative residual above which the template no longer describes the trace.
pub const ZB_RESIDUAL_THRESHOLD: f64 = 0.05;

/// Scan half-width as a fraction of the expected fast frequency.
const SCAN_RELATIVE_WIDTH: f64 = 0.05;
/// Cap on the scan half-width in units of the Fourier resolution `2π/T`.
const SCAN_MAX_BINS: f64 = 16.0;
/// Scan points per Fourier resolution bin.
const SCAN_STEPS_PER_BIN: f64 = 4.0;
const GOLDEN_ITERATIONS: usize = 48;
/// Phasor recurrence is reseeded this often to bound drift.
const RESEED: usize = 512;

/// Result of [`fit_zitterbewegung_template`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplateFit {
    /// `[a₀, a₁, a₂, b_s, b_c]`
    pub coefficients: [f64; 5],
    pub frequency: f64,
    pub dft_frequency: f64,
    /// `‖y − fit‖₂ / ‖y‖₂`
    pub residual: f64,
}

impl TemplateFit {
    /// `√(b_s² + b_c²)`, the peak fast displacement per unit envelope.
    pub fn fast_amplitude(&self) -> f64 {
        let [_, _, _, bs, bc] = self.coefficients;
        sqrt(bs * bs + bc * bc)
    }

    /// Slow force `f` from `−2f sin²(ωt/2) = −f + f cos ωt`.
    pub fn force(&self) -> f64 {
        0.5 * (self.coefficients[1] - self.coefficients[0])
    }
}

struct Samples {
    t0: f64,
    dt: f64,
    y: Vec<f64>,
    env: Vec<f64>,
    cos1: Vec<f64>,
    sin1: Vec<f64>,
    y2: f64,
}

impl Samples {
    fn new(times: &[f64], values: &[f64]) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
        }
        let m = times.len();
        if m < 16 {
            return Err(Error::invalid("times", "need at least 16 samples"));
        }
        let t0 = times[0];
        let dt = (times[m - 1] - t0) / (m - 1) as f64;
        if !(dt > 0.0) {
            return Err(Error::invalid("times", "must span a positive interval"));
        }
        let tol = 1e-9 * times[m - 1].abs().max(1.0);
        if times.iter().enumerate().any(|(k, &t)| (t - t0 - k as f64 * dt).abs() > tol) {
            return Err(Error::invalid("times", "template fit needs a uniform grid"));
        }
        let mut env = Vec::with_capacity(m);
        let mut cos1 = Vec::with_capacity(m);
        let mut sin1 = Vec::with_capacity(m);
        for &t in times {
            let s = sin(0.5 * t);
            env.push(s * s);
            cos1.push(cos(t));
            sin1.push(sin(t));
        }
        let y2 = values.iter().map(|v| v * v).sum();
        Ok(Self { t0, dt, y: values.to_vec(), env, cos1, sin1, y2 })
    }

    fn span(&self) -> f64 {
        self.dt * (self.y.len() - 1) as f64
    }

    /// Calls `f(k, e^{iΩt_k})` for every sample.
    fn for_each_phasor(&self, omega: f64, mut f: impl FnMut(usize, C64)) {
        let step = C64::new(cos(omega * self.dt), sin(omega * self.dt));
        let mut z = C64::new(0.0, 0.0);
        for k in 0..self.y.len() {
            if k % RESEED == 0 {
                let theta = omega * (self.t0 + k as f64 * self.dt);
                z = C64::new(cos(theta), sin(theta));
            }
            f(k, z);
            z *= step;
        }
    }

    fn normal_equations(&self, omega: f64) -> (Matrix5<f64>, Vector5<f64>) {
        let mut g = Matrix5::<f64>::zeros();
        let mut b = Vector5::<f64>::zeros();
        self.for_each_phasor(omega, |k, z| {
            let e = self.env[k];
            let phi = Vector5::new(1.0, self.cos1[k], self.sin1[k], e * z.im, e * z.re);
            let y = self.y[k];
            for i in 0..5 {
                b[i] += phi[i] * y;
                for j in i..5 {
                    g[(i, j)] += phi[i] * phi[j];
                }
            }
        });
        for i in 0..5 {
            for j in 0..i {
                g[(i, j)] = g[(j, i)];
            }
        }
        (g, b)
    }

    fn solve(&self, omega: f64) -> Option<(Vector5<f64>, f64)> {
        let (g, b) = self.normal_equations(omega);
        let coef = g.cholesky()?.solve(&b);
        Some((coef, self.y2 - b.dot(&coef)))
    }

    fn slow_residual(&self) -> Option<Vec<f64>> {
        let mut g = Matrix3::<f64>::zeros();
        let mut b = Vector3::<f64>::zeros();
        for k in 0..self.y.len() {
            let phi = Vector3::new(1.0, self.cos1[k], self.sin1[k]);
            g += phi * phi.transpose();
            b += phi * self.y[k];
        }
        let c = g.cholesky()?.solve(&b);
        Some((0..self.y.len()).map(|k| self.y[k] - c[0] - c[1] * self.cos1[k] - c[2] * self.sin1[k]).collect())
    }

    fn dft_power(&self, r: &[f64], omega: f64) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        self.for_each_phasor(omega, |k, z| acc += z * r[k]);
        acc.norm_sqr()
    }

    fn exact_residual(&self, coef: &Vector5<f64>, omega: f64) -> f64 {
        let mut r2 = 0.0;
        self.for_each_phasor(omega, |k, z| {
            let e = self.env[k];
            let fit = coef[0] + coef[1] * self.cos1[k] + coef[2] * self.sin1[k] + e * (coef[3] * z.im + coef[4] * z.re);
            let d = self.y[k] - fit;
            r2 += d * d;
        });
        r2
    }
}

/// Minimizes `f` over a scan grid around `center`, then refines by golden section.
fn scan_then_refine(center: f64, half_width: f64, step: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = libm::ceil(half_width / step) as i64;
    let mut best = (center, f(center));
    for k in -n..=n {
        let w = center + k as f64 * step;
        let v = f(w);
        if v < best.1 {
            best = (w, v);
        }
    }
    let inv_phi = 0.5 * (sqrt(5.0) - 1.0);
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    if f(mid) <= best.1 {
        mid
    } else {
        best.0
    }
}

/// Fits `values(times)` to the template with the fast frequency searched near
/// `expected_frequency`. The grid must be uniform with spacing below `πε/4`.
pub fn fit_zitterbewegung_template(
    times: &[f64],
    values: &[f64],
    epsilon: f64,
    expected_frequency: f64,
) -> Result<TemplateFit> {
    let s = Samples::new(times, values)?;
    let required = core::f64::consts::PI * epsilon / 4.0;
    if !(s.dt < required) {
        return Err(Error::Undersampled { spacing: s.dt, required });
    }
    if s.y2 == 0.0 {
        return Ok(TemplateFit {
            coefficients: [0.0; 5],
            frequency: expected_frequency,
            dft_frequency: expected_frequency,
            residual: 0.0,
        });
    }
    let bin = 2.0 * core::f64::consts::PI / s.span();
    let half_width = (SCAN_RELATIVE_WIDTH * expected_frequency).min(SCAN_MAX_BINS * bin);
    let step = bin / SCAN_STEPS_PER_BIN;

    let objective = |w: f64| s.solve(w).map_or(f64::INFINITY, |(_, r)| r);
    let frequency = scan_then_refine(expected_frequency, half_width, step, objective);
    let (coef, _) = s
        .solve(frequency)
        .ok_or_else(|| Error::FitFailed { reason: "singular normal equations".into() })?;
    let residual = sqrt(s.exact_residual(&coef, frequency) / s.y2);

    let dft_frequency = match s.slow_residual() {
        Some(r) => scan_then_refine(expected_frequency, half_width, step, |w| -s.dft_power(&r, w)),
        None => frequency,
    };
    Ok(TemplateFit {
        coefficients: [coef[0], coef[1], coef[2], coef[3], coef[4]],
        frequency,
        dft_frequency,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backaction::{analytic_x_corrected, uniform_times};

    #[test]
    fn recovers_synthetic_template() {
        let eps = 1e-2;
        let omega = 2.0 / eps * 1.013;
        let times = uniform_times(2.0 * core::f64::consts::PI, 4001);
        let (f, amp, phase) = (0.1, 0.03, 0.4);
        let y: Vec<f64> = times
            .iter()
            .map(|&t| {
                let e = sin(0.5 * t).powi(2);
                -2.0 * f * e + e * amp * sin(omega * t + phase)
            })
            .collect();
        let fit = fit_zitterbewegung_template(&times, &y, eps, 2.0 / eps).unwrap();
        assert!((fit.frequency - omega).abs() < 1e-6, "{}", fit.frequency);
        assert!((fit.fast_amplitude() - amp).abs() < 1e-9);
        assert!((fit.force() - f).abs() < 1e-9);
        assert!(fit.residual < 1e-7, "{fit:?}");
        assert!((fit.dft_frequency - omega).abs() < 0.5);
    }

    #[test]
    fn matches_closed_form_correction() {
        let eps = 1e-3;
        let times = crate::backaction::zitterbewegung_resolved_times(eps, 2.0 * core::f64::consts::PI, 8);
        let y: Vec<f64> = times.iter().map(|&t| analytic_x_corrected(t, 0.1, 2, eps, 0.25)).collect();
        let fit = fit_zitterbewegung_template(&times, &y, eps, 2.0 / eps).unwrap();
        let delta = 0.5 * fit.fast_amplitude();
        assert!((delta - (4.0 * eps).sqrt() * 0.25).abs() < 1e-9);
    }

    #[test]
    fn rejects_undersampled_and_irregular_grids() {
        let times = uniform_times(1.0, 64);
        let y = alloc::vec![1.0; 64];
        assert!(matches!(fit_zitterbewegung_template(&times, &y, 1e-3, 2e3), Err(Error::Undersampled { .. })));
        let mut bad = uniform_times(0.01, 64);
        bad[10] += 1e-5;
        assert!(fit_zitterbewegung_template(&bad, &y, 1.0, 2.0).is_err());
    }

    #[test]
    fn zero_trace() {
        let times = uniform_times(1.0, 400);
        let fit = fit_zitterbewegung_template(&times, &alloc::vec![0.0; 400], 1.0, 2.0).unwrap();
        assert_eq!(fit.fast_amplitude(), 0.0);
    }
}
