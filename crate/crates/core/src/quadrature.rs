//! Numerical integration: adaptive Gauss–Kronrod for smooth integrands on
//! finite intervals and a Filon rule for half-Fourier transforms of
//! tabulated functions.

use num_complex::Complex64;

use crate::{Error, Result};

// 15-point Kronrod abscissae on [0, 1] (symmetric), with the embedded
// 7-point Gauss rule living on the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive 7/15-point Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Panels with the largest error estimate are bisected until the summed
/// estimate drops below `max(abs_tol, rel_tol·|I|)`. The Kronrod nodes are
/// interior, so integrands with a removable singularity at an endpoint are
/// fine.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate<f64>> {
    const MAX_PANELS: usize = 4000;
    let (v, e) = kronrod15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if panels.len() >= MAX_PANELS || !total.is_finite() {
            return Err(Error::QuadratureNoConvergence {
                estimate: total,
                error: err,
                tolerance: abs_tol.max(rel_tol * total.abs()),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (pa, pb, pv, pe) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        let (lv, le) = kronrod15(&f, pa, mid);
        let (rv, re) = kronrod15(&f, mid, pb);
        total += lv + rv - pv;
        err += le + re - pe;
        panels.push((pa, mid, lv, le));
        panels.push((mid, pb, rv, re));
    }
    // Re-sum to shed accumulated rounding from the running updates.
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    let value = panels.iter().map(|p| p.2).sum();
    let error = panels.iter().map(|p| p.3).sum();
    Ok(Estimate { value, error })
}

/// Fixed composite 15-point Kronrod rule on `[a, b]` split into `panels`
/// equal pieces: returns (nodes, weights).
pub fn composite_nodes(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(15 * panels);
    let mut weights = Vec::with_capacity(15 * panels);
    let w = (b - a) / panels as f64;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * w;
        let h = 0.5 * w;
        for j in 0..7 {
            nodes.push(c - h * XGK[j]);
            weights.push(h * WGK[j]);
            nodes.push(c + h * XGK[j]);
            weights.push(h * WGK[j]);
        }
        nodes.push(c);
        weights.push(h * WGK[7]);
    }
    (nodes, weights)
}

/// A complex function sampled on the uniform grid τ_k = k·step, k = 0..len.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedFn {
    step: f64,
    values: Vec<Complex64>,
}

impl TabulatedFn {
    pub fn new(step: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(step > 0.0) || values.len() < 5 {
            return Err(Error::Domain(format!(
                "tabulation needs step > 0 and at least 5 samples (step {step}, {} samples)",
                values.len()
            )));
        }
        Ok(Self { step, values })
    }

    /// Samples `f` on `[0, tau_max]`; the interval count is rounded up to a
    /// multiple of 4 so that the Filon rule and its half-resolution copy apply.
    pub fn sample<F: Fn(f64) -> Complex64>(f: F, step: f64, tau_max: f64) -> Result<Self> {
        let n = ((tau_max / step).ceil() as usize).div_ceil(4) * 4;
        Self::new(step, (0..=n).map(|k| f(k as f64 * step)).collect())
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Last grid point.
    pub fn tau_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// Pointwise map onto a new table on the same grid.
    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self {
            step: self.step,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Linear interpolation; zero beyond the grid end.
    pub fn eval(&self, tau: f64) -> Complex64 {
        let x = tau / self.step;
        let k = x.floor();
        if k < 0.0 || k as usize >= self.values.len() - 1 {
            return if (x - (self.values.len() - 1) as f64).abs() < 1e-12 {
                *self.values.last().unwrap()
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        let i = k as usize;
        let t = x - k;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

fn filon_coefficients(theta: f64) -> (f64, f64, f64) {
    if theta.abs() < 0.2 {
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let alpha = t3
            * (2.0 / 45.0
                + t2 * (-2.0 / 315.0
                    + t2 * (2.0 / 4725.0 + t2 * (-8.0 / 467_775.0 + t2 * 4.0 / 8_513_505.0))));
        let beta = 2.0 / 3.0
            + t2 * (2.0 / 15.0
                + t2 * (-4.0 / 105.0
                    + t2 * (2.0 / 567.0 + t2 * (-4.0 / 22275.0 + t2 * 4.0 / 675_675.0))));
        let gamma = 4.0 / 3.0
            + t2 * (-2.0 / 15.0
                + t2 * (1.0 / 210.0
                    + t2 * (-1.0 / 11340.0 + t2 * (1.0 / 997_920.0 - t2 / 129_729_600.0))));
        (alpha, beta, gamma)
    } else {
        let (s, c) = theta.sin_cos();
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let alpha = 1.0 / theta + 2.0 * s * c / (2.0 * t2) - 2.0 * s * s / t3;
        let beta = 2.0 * ((1.0 + c * c) / t2 - 2.0 * s * c / t3);
        let gamma = 4.0 * (s / t3 - c / t2);
        (alpha, beta, gamma)
    }
}

/// Filon–Simpson approximations to ∫₀^{n·step} f(τ) e^{ikτ} dτ at step
/// `step` and at `2·step` (every second sample), from one pass over the data.
fn filon_pair(values: &[Complex64], step: f64, k: f64) -> (Complex64, Complex64) {
    let n = values.len() - 1;
    debug_assert!(n % 4 == 0);
    let one = Complex64::new(1.0, 0.0);
    // Sums over even / odd fine indices, and over indices ≡ 0 / 2 (mod 4).
    let mut even = Complex64::new(0.0, 0.0);
    let mut odd = Complex64::new(0.0, 0.0);
    let mut quad0 = Complex64::new(0.0, 0.0);
    let mut quad2 = Complex64::new(0.0, 0.0);
    let rot = Complex64::from_polar(1.0, k * step);
    let mut phase = one;
    for (j, &v) in values.iter().enumerate() {
        // Re-anchor the recurrence periodically to bound rounding drift.
        if j % 256 == 0 {
            phase = Complex64::from_polar(1.0, k * step * j as f64);
        }
        let t = v * phase;
        if j % 2 == 1 {
            odd += t;
        } else {
            let w = if j == 0 || j == n { 0.5 * t } else { t };
            even += w;
            if j % 4 == 0 {
                quad0 += w;
            } else {
                quad2 += t;
            }
        }
        phase *= rot;
    }
    let ends = values[n] * Complex64::from_polar(1.0, k * step * n as f64) - values[0];
    let combine = |h: f64, e: Complex64, o: Complex64| {
        let (alpha, beta, gamma) = filon_coefficients(k * h);
        h * (Complex64::new(0.0, -alpha) * ends + beta * e + gamma * o)
    };
    (combine(step, even, odd), combine(2.0 * step, quad0, quad2))
}

/// Half-Fourier transform ∫₀^{tau_max} f(τ) e^{−iωτ} dτ of a tabulated
/// function.
///
/// `tau_max` is rounded down to the nearest grid point whose index is a
/// multiple of 4. The error estimate compares the full-resolution Filon
/// result with the one using every second sample.
pub fn half_fourier(
    f: &TabulatedFn,
    omega: f64,
    tau_max: f64,
    tol: f64,
) -> Result<Estimate<Complex64>> {
    let avail = f.values.len() - 1;
    let n = (((tau_max / f.step) + 1e-9).floor() as usize).min(avail) / 4 * 4;
    if n < 4 {
        return Err(Error::Domain(format!(
            "tau_max = {tau_max} ps covers fewer than 4 grid steps"
        )));
    }
    let end = n as f64 * f.step;
    let tail = f.values[n].norm();
    if tail > tol {
        return Err(Error::TailNotDecayed {
            tau_max: end,
            tail,
            tolerance: tol,
        });
    }
    let vals = &f.values[..=n];
    let (fine, coarse) = filon_pair(vals, f.step, -omega);
    let error = (fine - coarse).norm() / 15.0;
    if !(error <= tol) {
        return Err(Error::QuadratureNoConvergence {
            estimate: fine.norm(),
            error,
            tolerance: tol,
        });
    }
    Ok(Estimate { value: fine, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn gauss_kronrod_polynomial_and_gaussian() {
        let r = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-12, 1e-12).unwrap();
        assert_relative_eq!(r.value, 64.0 / 6.0 - 4.0, max_relative = 1e-13);
        let r = integrate(|x| (-0.5 * x * x).exp(), 0.0, 12.0, 1e-13, 1e-13).unwrap();
        assert_relative_eq!(r.value, (std::f64::consts::PI / 2.0).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn gauss_kronrod_oscillatory() {
        let r = integrate(|x| (40.0 * x).cos(), 0.0, 3.0, 1e-12, 0.0).unwrap();
        assert!((r.value - (120.0f64).sin() / 40.0).abs() < 1e-11);
    }

    #[test]
    fn gauss_kronrod_reports_failure() {
        let e = integrate(|x| 1.0 / x, 0.0, 1.0, 1e-12, 0.0).unwrap_err();
        assert!(matches!(e, Error::QuadratureNoConvergence { .. }));
    }

    #[test]
    fn composite_rule_integrates_exponential() {
        let (x, w) = composite_nodes(0.0, 2.0, 3);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert_relative_eq!(s, 2.0f64.exp() - 1.0, max_relative = 1e-14);
    }

    fn decaying_exponential(tau_max: f64) -> TabulatedFn {
        TabulatedFn::sample(|t| Complex64::new((-t).exp(), 0.0), 0.01, tau_max).unwrap()
    }

    #[test]
    fn exponential_at_zero_frequency() {
        let f = decaying_exponential(40.0);
        let r = half_fourier(&f, 0.0, 40.0, 1e-8).unwrap();
        assert!((r.value - 1.0).norm() < 1e-9);
        assert!(r.error <= 1e-8);
    }

    #[test]
    fn tail_must_decay() {
        let f = decaying_exponential(5.0);
        let e = half_fourier(&f, 0.0, 5.0, 1e-6).unwrap_err();
        assert!(matches!(e, Error::TailNotDecayed { .. }));
    }

    #[test]
    fn extending_the_window_is_stable() {
        let f = decaying_exponential(60.0);
        let a = half_fourier(&f, 2.0, 40.0, 1e-8).unwrap().value;
        let b = half_fourier(&f, 2.0, 60.0, 1e-8).unwrap().value;
        assert!((a - b).norm() < 1e-8);
    }

    #[test]
    fn filon_coefficient_branches_agree() {
        for &t in &[0.15, 0.2, 0.25] {
            let s = {
                let t2: f64 = t * t;
                let t3 = t2 * t;
                let (si, c) = (t as f64).sin_cos();
                (
                    1.0 / t + si * c / t2 - 2.0 * si * si / t3,
                    2.0 * ((1.0 + c * c) / t2 - 2.0 * si * c / t3),
                    4.0 * (si / t3 - c / t2),
                )
            };
            let (a, b, g) = filon_coefficients(t);
            assert!((a - s.0).abs() < 1e-10 && (b - s.1).abs() < 1e-10 && (g - s.2).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn exponential_transform_matches_closed_form(omega in -12.0f64..12.0) {
            let f = decaying_exponential(40.0);
            let r = half_fourier(&f, omega, 40.0, 1e-7).unwrap();
            let exact = Complex64::new(1.0, 0.0) / Complex64::new(1.0, omega);
            prop_assert!((r.value - exact).norm() < 1e-9);
        }
    }
}
