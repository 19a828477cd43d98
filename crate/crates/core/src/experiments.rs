//! Photoluminescence sweeps over laser detuning and the quantities extracted
//! from them: Lorentzian linewidths, integrated intensities and truncation
//! convergence.

use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;

use crate::hilbert::build_operators;
use crate::master_eq::{liouvillian_with_channels, ChannelSelection};
use crate::params::{BathParams, DriveKind, ModelVariant, SystemParams};
use crate::solver::{expectation, steady_state_with, SteadyStateOptions};
use crate::{Error, Result};

/// Which steady-state intensity to read off a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Exciton population n̄_x = ⟨σ⁺σ⁻⟩.
    Exciton,
    /// Cavity photon number n̄_c = ⟨a†a⟩.
    Cavity,
}

impl Channel {
    pub fn label(self) -> &'static str {
        match self {
            Self::Exciton => "i_x",
            Self::Cavity => "i_c",
        }
    }
}

/// Run description stored with every curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveMeta {
    pub drive: DriveKind,
    pub variant: ModelVariant,
    pub temperature: f64,
    /// Amplitude of the driven mode (μeV).
    pub eta: f64,
    pub delta_cx: f64,
    pub n_max: usize,
}

/// Steady-state intensities sampled against ω_L − ω_x (μeV).
#[derive(Debug, Clone, PartialEq)]
pub struct PLCurve {
    pub detuning: Vec<f64>,
    pub i_x: Vec<f64>,
    pub i_c: Vec<f64>,
    pub meta: CurveMeta,
}

impl PLCurve {
    pub fn channel(&self, ch: Channel) -> &[f64] {
        match ch {
            Channel::Exciton => &self.i_x,
            Channel::Cavity => &self.i_c,
        }
    }

    /// Copy with each channel divided by its own maximum (left unchanged if
    /// the channel is identically zero).
    pub fn normalized(&self) -> Self {
        let norm = |v: &[f64]| {
            let m = v.iter().copied().fold(0.0, f64::max);
            if m > 0.0 {
                v.iter().map(|x| x / m).collect()
            } else {
                v.to_vec()
            }
        };
        Self {
            detuning: self.detuning.clone(),
            i_x: norm(&self.i_x),
            i_c: norm(&self.i_c),
            meta: self.meta,
        }
    }

    /// Linear interpolation of a channel at detuning `x` (clamped to the grid).
    pub fn interpolate(&self, ch: Channel, x: f64) -> f64 {
        let y = self.channel(ch);
        let g = &self.detuning;
        if x <= g[0] {
            return y[0];
        }
        if x >= g[g.len() - 1] {
            return y[y.len() - 1];
        }
        let i = g.partition_point(|&v| v <= x) - 1;
        let t = (x - g[i]) / (g[i + 1] - g[i]);
        y[i] * (1.0 - t) + y[i + 1] * t
    }
}

/// Per-sweep switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Effective-phonon channels to keep (other variants ignore this).
    pub channels: ChannelSelection,
    pub steady_state: SteadyStateOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            channels: ChannelSelection::All,
            steady_state: SteadyStateOptions::default(),
        }
    }
}

/// Sweeps the laser across `grid` (ω_L − ω_x in μeV) at fixed Δ_cx.
pub fn sweep_detuning(
    params: &SystemParams,
    bath: &BathParams,
    variant: ModelVariant,
    grid: &[f64],
) -> Result<PLCurve> {
    sweep_detuning_with(params, bath, variant, grid, SweepOptions::default())
}

pub fn sweep_detuning_with(
    params: &SystemParams,
    bath: &BathParams,
    variant: ModelVariant,
    grid: &[f64],
    opts: SweepOptions,
) -> Result<PLCurve> {
    params.validate()?;
    bath.validate()?;
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("detuning grid must be non-empty and strictly increasing".into()));
    }
    let points: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&det| {
            steady_intensities(params, bath, variant, det, opts).map_err(|e| Error::AtDetuning {
                detuning_uev: det,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    Ok(PLCurve {
        detuning: grid.to_vec(),
        i_x: points.iter().map(|p| p.0).collect(),
        i_c: points.iter().map(|p| p.1).collect(),
        meta: CurveMeta {
            drive: params.drive,
            variant,
            temperature: bath.temperature,
            eta: params.drive_amplitude(),
            delta_cx: params.delta_cx,
            n_max: params.n_max,
        },
    })
}

fn steady_intensities(
    params: &SystemParams,
    bath: &BathParams,
    variant: ModelVariant,
    detuning: f64,
    opts: SweepOptions,
) -> Result<(f64, f64)> {
    let p = params.with_laser_detuning(detuning);
    if p.drive_amplitude() == 0.0 {
        return Ok((0.0, 0.0));
    }
    let l = liouvillian_with_channels(&p, bath, variant, opts.channels)?;
    let ss = steady_state_with(&l, opts.steady_state)?;
    let floor = match variant {
        ModelVariant::FullTcl | ModelVariant::OnePhonon => -1e-6,
        ModelVariant::Epme | ModelVariant::NoPhonon => -1e-10,
    };
    if ss.min_eigenvalue < floor {
        log::warn!(
            "{variant} steady state at detuning {detuning} ueV has eigenvalue {:.3e}",
            ss.min_eigenvalue
        );
    }
    let ops = build_operators(l.space());
    let nx = expectation(&ss.rho, &ops.sig_11)?.re;
    let nc = expectation(&ss.rho, &ops.n_photon)?.re;
    Ok((nx, nc))
}

/// Grid over ±6 meV: 5 μeV steps within ±0.4 meV of the exciton (0) and the
/// cavity (`delta_cx`), 25 μeV elsewhere.
pub fn default_grid(delta_cx: f64) -> Vec<f64> {
    let mut pts = uniform_grid(0.0, 6000.0, 25.0);
    for c in [0.0, delta_cx] {
        pts.extend(uniform_grid(c, 400.0, 5.0).into_iter().filter(|x| x.abs() <= 6000.0));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    pts
}

/// Uniform grid of spacing `step` on [center − half_width, center + half_width].
pub fn uniform_grid(center: f64, half_width: f64, step: f64) -> Vec<f64> {
    let n = (half_width / step).round() as i64;
    (-n..=n).map(|k| center + k as f64 * step).collect()
}

/// Lorentzian fit of one resonance.
#[derive(Debug, Clone, PartialEq)]
pub struct FwhmResult {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
    pub baseline: f64,
    /// RMS fit residual divided by the peak height.
    pub fit_residual: f64,
    /// Width between the discrete half-maximum crossings (μeV).
    pub crossing_width: f64,
    /// Fit window (inclusive detuning bounds).
    pub window: (f64, f64),
    /// Other local maxima above half height inside the fit window.
    pub other_peaks: Vec<f64>,
}

/// Peak search and fit window controls for [`fwhm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwhmOptions {
    /// The peak is the largest sample within this distance of the guess.
    pub search_half_width: f64,
    /// Fit window half-width as a multiple of the crossing width.
    pub window_multiple: f64,
    /// Fixed fit window half-width, overriding `window_multiple`.
    pub window_half_width: Option<f64>,
}

impl Default for FwhmOptions {
    fn default() -> Self {
        Self {
            search_half_width: 300.0,
            window_multiple: 3.0,
            window_half_width: None,
        }
    }
}

/// FWHM of the resonance nearest `center_guess`, with default options.
pub fn fwhm(curve: &PLCurve, channel: Channel, center_guess: f64) -> Result<FwhmResult> {
    fwhm_with(curve, channel, center_guess, FwhmOptions::default())
}

fn half_crossing(x: &[f64], y: &[f64], i0: usize, forward: bool, half: f64) -> Option<f64> {
    let mut i = i0;
    loop {
        let j = if forward {
            (i + 1 < y.len()).then(|| i + 1)?
        } else {
            i.checked_sub(1)?
        };
        if y[j] <= half {
            return Some(x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]));
        }
        if y[j] > y[i] {
            // Rises again before dropping to half height.
            return None;
        }
        i = j;
    }
}

/// Fits A(Γ/2)²/((x − x₀)² + (Γ/2)²) + B around the peak nearest
/// `center_guess`.
///
/// The fit is started from the discrete half-maximum crossings. If only one
/// side crosses, the width is mirrored from it. The window is
/// ±`window_multiple` × crossing width about the peak unless fixed.
pub fn fwhm_with(
    curve: &PLCurve,
    channel: Channel,
    center_guess: f64,
    opts: FwhmOptions,
) -> Result<FwhmResult> {
    let x = &curve.detuning;
    let y = curve.channel(channel);
    let i0 = (0..x.len())
        .filter(|&i| (x[i] - center_guess).abs() <= opts.search_half_width)
        .max_by(|&a, &b| y[a].total_cmp(&y[b]))
        .ok_or_else(|| Error::NoPeak(format!("no samples within {} ueV of {center_guess}", opts.search_half_width)))?;
    let peak = y[i0];
    if !(peak > 0.0) {
        return Err(Error::NoPeak(format!("{} is not positive near {center_guess} ueV", channel.label())));
    }
    let half = 0.5 * peak;
    let left = half_crossing(x, y, i0, false, half).map(|c| x[i0] - c);
    let right = half_crossing(x, y, i0, true, half).map(|c| c - x[i0]);
    let (hl, hr) = match (left, right) {
        (Some(l), Some(r)) => (l, r),
        (Some(l), None) => (l, l),
        (None, Some(r)) => (r, r),
        (None, None) => {
            return Err(Error::NoPeak(format!(
                "no half-maximum crossing on either side of {} ueV",
                x[i0]
            )))
        }
    };
    let w = hl + hr;
    let hw = opts.window_half_width.unwrap_or(opts.window_multiple * w);
    let (lo, hi) = (x[i0] - hw, x[i0] + hw);
    let idx: Vec<usize> = (0..x.len()).filter(|&i| x[i] >= lo && x[i] <= hi).collect();
    if idx.len() < 5 {
        return Err(Error::NoPeak(format!("only {} samples in the fit window", idx.len())));
    }
    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let q = levenberg_marquardt(&xs, &ys, Vector4::new(peak, x[i0], w, 0.0))?;
    let (amp, x0, gamma, base) = (q[0], q[1], q[2].abs(), q[3]);
    let span = xs[xs.len() - 1] - xs[0];
    if !gamma.is_finite() || gamma <= 0.0 || gamma > span || !amp.is_finite() {
        return Err(Error::FitDiverged(format!(
            "width {gamma:.4e} ueV for a {span:.1} ueV window (crossing width {w:.2})"
        )));
    }
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(&xi, &yi)| (lorentzian(xi, &q) - yi).powi(2))
        .sum();
    let fit_residual = (rss / xs.len() as f64).sqrt() / peak;
    let other_peaks = (1..idx.len() - 1)
        .filter(|&k| ys[k] > ys[k - 1] && ys[k] >= ys[k + 1] && ys[k] > half && idx[k] != i0)
        .map(|k| xs[k])
        .collect();
    Ok(FwhmResult {
        center: x0,
        fwhm: gamma,
        amplitude: amp,
        baseline: base,
        fit_residual,
        crossing_width: w,
        window: (lo, hi),
        other_peaks,
    })
}

fn lorentzian(x: f64, q: &Vector4<f64>) -> f64 {
    let hw2 = 0.25 * q[2] * q[2];
    q[0] * hw2 / ((x - q[1]).powi(2) + hw2) + q[3]
}

fn levenberg_marquardt(xs: &[f64], ys: &[f64], start: Vector4<f64>) -> Result<Vector4<f64>> {
    let cost = |q: &Vector4<f64>| -> f64 {
        xs.iter().zip(ys).map(|(&x, &y)| (lorentzian(x, q) - y).powi(2)).sum()
    };
    let mut q = start;
    let mut c = cost(&q);
    let mut lambda = 1e-3;
    for _ in 0..2000 {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        let hw = 0.5 * q[2];
        let hw2 = hw * hw;
        for (&x, &y) in xs.iter().zip(ys) {
            let u = (x - q[1]).powi(2);
            let den = u + hw2;
            let shape = hw2 / den;
            let j = Vector4::new(
                shape,
                q[0] * hw2 * 2.0 * (x - q[1]) / (den * den),
                q[0] * hw * u / (den * den),
                1.0,
            );
            let r = q[0] * shape + q[3] - y;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for k in 0..4 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = q + step;
            let ct = cost(&trial);
            if ct.is_finite() && ct <= c {
                let small = step.iter().zip(q.iter()).all(|(s, v)| s.abs() <= 1e-12 * v.abs().max(1e-12));
                let rel = (c - ct) / c.max(1e-300);
                q = trial;
                c = ct;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                if small || rel < 1e-15 {
                    return Ok(q);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // No downhill step at any damping: a (local) minimum.
            return Ok(q);
        }
    }
    Err(Error::FitDiverged("Levenberg-Marquardt iteration limit reached".into()))
}

/// How [`integrated_pl`] integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IplMode {
    /// Trapezoidal integral of the sampled curve.
    Total,
    /// Area A·π·Γ/2 of the Lorentzian fitted to the peak nearest the
    /// center, excluding the baseline. The half width is not used.
    LorentzianOnly,
}

/// Integrated intensity of a channel over [center − half_width, center + half_width].
pub fn integrated_pl(
    curve: &PLCurve,
    channel: Channel,
    mode: IplMode,
    center: f64,
    half_width: f64,
) -> Result<f64> {
    let y = curve.channel(channel);
    if y.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    match mode {
        IplMode::Total => {
            let (lo, hi) = (center - half_width, center + half_width);
            let x = &curve.detuning;
            if x[0] > lo + 1e-9 || x[x.len() - 1] < hi - 1e-9 {
                return Err(Error::Domain(format!(
                    "curve [{}, {}] does not cover [{lo}, {hi}]",
                    x[0],
                    x[x.len() - 1]
                )));
            }
            let mut s = 0.0;
            for i in 0..x.len() - 1 {
                let (a, b) = (x[i].max(lo), x[i + 1].min(hi));
                if b > a {
                    let ya = curve.interpolate(channel, a);
                    let yb = curve.interpolate(channel, b);
                    s += 0.5 * (ya + yb) * (b - a);
                }
            }
            Ok(s)
        }
        IplMode::LorentzianOnly => {
            let f = fwhm(curve, channel, center)?;
            Ok(f.amplitude * std::f64::consts::PI * f.fwhm / 2.0)
        }
    }
}

/// Largest deviation between two curves on the same grid, relative to the
/// peak of `reference`, over both channels.
pub fn relative_deviation(curve: &PLCurve, reference: &PLCurve) -> Result<f64> {
    if curve.detuning != reference.detuning {
        return Err(Error::DimensionMismatch {
            expected: reference.detuning.len(),
            found: curve.detuning.len(),
        });
    }
    let mut worst: f64 = 0.0;
    for ch in [Channel::Exciton, Channel::Cavity] {
        let (a, b) = (curve.channel(ch), reference.channel(ch));
        let scale = b.iter().copied().fold(0.0, f64::max);
        if scale > 0.0 {
            let d = a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            worst = worst.max(d / scale);
        }
    }
    Ok(worst)
}

/// Truncation convergence of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub n_max: Vec<usize>,
    /// `deviations[k]` compares n_max[k] with n_max[k + 1].
    pub deviations: Vec<f64>,
    /// First truncation whose deviation from the next is below `tolerance`.
    pub converged_at: Option<usize>,
    pub tolerance: f64,
}

/// Repeats a sweep for each truncation and compares consecutive levels.
pub fn convergence_study(
    params: &SystemParams,
    bath: &BathParams,
    variant: ModelVariant,
    n_max_list: &[usize],
    grid: &[f64],
    tolerance: f64,
) -> Result<ConvergenceReport> {
    if n_max_list.windows(2).any(|w| w[1] <= w[0]) || n_max_list.len() < 2 {
        return Err(Error::Domain("n_max list must have at least two ascending entries".into()));
    }
    let curves: Vec<PLCurve> = n_max_list
        .iter()
        .map(|&n| {
            let p = SystemParams { n_max: n, ..*params };
            sweep_detuning(&p, bath, variant, grid)
        })
        .collect::<Result<_>>()?;
    let deviations: Vec<f64> = curves
        .windows(2)
        .map(|w| relative_deviation(&w[0], &w[1]))
        .collect::<Result<_>>()?;
    let converged_at = deviations
        .iter()
        .position(|&d| d < tolerance)
        .map(|k| n_max_list[k]);
    Ok(ConvergenceReport {
        n_max: n_max_list.to_vec(),
        deviations,
        converged_at,
        tolerance,
    })
}

/// One row of a linewidth-versus-pump table.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpRow {
    pub pump: f64,
    pub channel: Channel,
    pub result: FwhmResult,
}

/// Sweeps and fits once per drive amplitude in `pumps`.
pub fn fwhm_vs_pump(
    params: &SystemParams,
    bath: &BathParams,
    variant: ModelVariant,
    pumps: &[f64],
    grid: &[f64],
    channel: Channel,
    center_guess: f64,
    opts: FwhmOptions,
) -> Result<Vec<PumpRow>> {
    pumps
        .iter()
        .map(|&eta| {
            let p = params.with_drive_amplitude(eta);
            let curve = sweep_detuning(&p, bath, variant, grid)?;
            Ok(PumpRow {
                pump: eta,
                channel,
                result: fwhm_with(&curve, channel, center_guess, opts)?,
            })
        })
        .collect()
}

/// The detection channel and resonance conventionally used for linewidths:
/// an exciton-driven system is read out through the cavity at the exciton
/// line, a cavity-driven one through the exciton at the cavity line.
pub fn linewidth_probe(params: &SystemParams) -> (Channel, f64) {
    match params.drive {
        DriveKind::Exciton => (Channel::Cavity, 0.0),
        DriveKind::Cavity => (Channel::Exciton, params.delta_cx),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(gamma: f64, center: f64, amp: f64, base: f64) -> PLCurve {
        let grid = uniform_grid(0.0, 1500.0, 5.0);
        let y: Vec<f64> = grid
            .iter()
            .map(|&x| amp * (gamma / 2.0).powi(2) / ((x - center).powi(2) + (gamma / 2.0).powi(2)) + base)
            .collect();
        PLCurve {
            detuning: grid,
            i_x: y.clone(),
            i_c: y,
            meta: CurveMeta {
                drive: DriveKind::Exciton,
                variant: ModelVariant::NoPhonon,
                temperature: 4.0,
                eta: 1.0,
                delta_cx: 0.0,
                n_max: 2,
            },
        }
    }

    #[test]
    fn exact_lorentzian_self_fit() {
        let c = synthetic(100.0, 12.0, 0.3, 0.0);
        let f = fwhm(&c, Channel::Cavity, 0.0).unwrap();
        assert!((f.fwhm - 100.0).abs() < 0.1);
        assert!((f.center - 12.0).abs() < 1e-6);
        assert!(f.fit_residual < 1e-8);
        let g = fwhm(&c.normalized(), Channel::Cavity, 0.0).unwrap();
        assert!((g.fwhm - f.fwhm).abs() < 1e-9);
    }

    #[test]
    fn lorentzian_with_baseline() {
        let c = synthetic(250.0, -40.0, 2.0, 0.1);
        let f = fwhm(&c, Channel::Exciton, 0.0).unwrap();
        assert!((f.fwhm - 250.0).abs() < 0.1);
        assert!((f.baseline - 0.1).abs() < 1e-6);
    }

    #[test]
    fn flat_curve_has_no_peak() {
        let mut c = synthetic(100.0, 0.0, 0.0, 0.0);
        assert!(matches!(fwhm(&c, Channel::Exciton, 0.0), Err(Error::NoPeak(_))));
        c.i_x.iter_mut().for_each(|v| *v = 1.0);
        assert!(matches!(fwhm(&c, Channel::Exciton, 0.0), Err(Error::NoPeak(_))));
    }

    #[test]
    fn crossing_walk_stops_at_a_second_rise() {
        let x: Vec<f64> = (0..9).map(|k| k as f64).collect();
        let y = [0.1, 0.4, 0.8, 1.0, 0.9, 0.7, 0.8, 0.9, 0.2];
        let left = half_crossing(&x, &y, 3, false, 0.5).unwrap();
        assert!((left - 1.25).abs() < 1e-12);
        assert_eq!(half_crossing(&x, &y, 3, true, 0.5), None);
    }

    #[test]
    fn one_sided_crossing_is_mirrored() {
        let mut c = synthetic(100.0, 0.0, 1.0, 0.0);
        // A neighbouring peak keeps the right flank above half height.
        for (x, y) in c.detuning.iter().zip(c.i_x.iter_mut()) {
            *y += 0.9 * 900.0 / ((x - 120.0).powi(2) + 900.0);
        }
        match fwhm_with(&c, Channel::Exciton, 0.0, FwhmOptions { search_half_width: 20.0, ..Default::default() }) {
            Ok(f) => assert!((f.crossing_width - 100.0).abs() < 2.0, "{}", f.crossing_width),
            Err(e) => assert!(matches!(e, Error::FitDiverged(_)), "{e}"),
        }
    }

    #[test]
    fn integrated_intensity() {
        let zero = synthetic(100.0, 0.0, 0.0, 0.0);
        assert_eq!(integrated_pl(&zero, Channel::Exciton, IplMode::Total, 0.0, 500.0).unwrap(), 0.0);
        let c = synthetic(100.0, 0.0, 1.0, 0.05);
        let lor = integrated_pl(&c, Channel::Exciton, IplMode::LorentzianOnly, 0.0, 300.0).unwrap();
        assert!((lor - std::f64::consts::PI * 50.0).abs() < 1e-3);
        // Exact area of the sampled function over ±1000: Lorentzian arctan part + baseline.
        let exact = 100.0 * (1000.0f64 / 50.0).atan() + 0.05 * 2000.0;
        let tot = integrated_pl(&c, Channel::Exciton, IplMode::Total, 0.0, 1000.0).unwrap();
        assert!((tot - exact).abs() / exact < 1e-3);
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid(3000.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g[0], -6000.0);
        assert!((g[g.len() - 1] - 6000.0).abs() < 1e-9);
        for w in g.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let near = mid.abs() < 400.0 || (mid - 3000.0).abs() < 400.0;
            let step = w[1] - w[0];
            if near {
                assert!((step - 5.0).abs() < 1e-9, "at {mid}");
            } else {
                assert!(step <= 25.0 + 1e-9);
            }
        }
    }

    #[test]
    fn zero_drive_gives_zero_curve() {
        let p = SystemParams::exciton_driven(0.0, 3000.0);
        let c = sweep_detuning(&p, &BathParams::reference(4.0), ModelVariant::FullTcl, &uniform_grid(0.0, 100.0, 10.0)).unwrap();
        assert!(c.i_x.iter().chain(&c.i_c).all(|&v| v == 0.0));
    }

    #[test]
    fn sweep_errors_carry_the_detuning() {
        let mut p = SystemParams::exciton_driven(30.0, 0.0);
        p.gamma = 0.0;
        p.gamma_prime = 0.0;
        p.kappa = 0.0;
        let e = sweep_detuning(&p, &BathParams::reference(4.0), ModelVariant::NoPhonon, &[5.0]).unwrap_err();
        assert!(matches!(e, Error::AtDetuning { detuning_uev, .. } if detuning_uev == 5.0));
    }

    #[test]
    fn no_phonon_linewidth_matches_bloch_broadening() {
        // With g = 0 the exciton line is the optical Bloch Lorentzian of
        // FWHM 2√(γ⊥² + 4η²γ⊥/γ).
        let mut p = SystemParams::exciton_driven(30.0, 3000.0);
        p.g = 0.0;
        let grid = uniform_grid(0.0, 800.0, 2.0);
        let c = sweep_detuning(&p, &BathParams::reference(4.0), ModelVariant::NoPhonon, &grid).unwrap();
        let f = fwhm(&c, Channel::Exciton, 0.0).unwrap();
        let gp = 0.5 * (p.gamma + p.gamma_prime);
        let want = 2.0 * (gp * gp + 4.0 * p.eta_x * p.eta_x * gp / p.gamma).sqrt();
        assert!((f.fwhm - want).abs() < 0.05, "{} vs {want}", f.fwhm);
    }

    // Physical runs.

    fn dot3(eta: f64) -> SystemParams {
        SystemParams::exciton_driven(eta, 3000.0)
    }

    #[test]
    fn no_phonon_power_broadening_column() {
        let bath = BathParams::reference(4.0);
        let p = dot3(0.0);
        let (ch, center) = linewidth_probe(&p);
        let rows = fwhm_vs_pump(
            &p,
            &bath,
            ModelVariant::NoPhonon,
            &[20.0, 40.0, 60.0],
            &default_grid(p.delta_cx),
            ch,
            center,
            FwhmOptions::default(),
        )
        .unwrap();
        for (row, want) in rows.iter().zip([80.0, 159.0, 240.0]) {
            let w = row.result.fwhm;
            assert!((w - want).abs() <= 0.05 * want, "eta {}: {w} vs {want}", row.pump);
        }
    }

    #[test]
    fn warmer_bath_broadens_more() {
        let p = dot3(40.0);
        let grid = default_grid(p.delta_cx);
        let (ch, center) = linewidth_probe(&p);
        let w = |t: f64| {
            let c = sweep_detuning(&p, &BathParams::reference(t), ModelVariant::FullTcl, &grid).unwrap();
            fwhm(&c, ch, center).unwrap().fwhm
        };
        let (w4, w20) = (w(4.0), w(20.0));
        assert!(w20 > w4, "20 K {w20} vs 4 K {w4}");
    }

    #[test]
    fn normalization_leaves_linewidth_unchanged() {
        let p = dot3(30.0);
        let c = sweep_detuning(&p, &BathParams::reference(4.0), ModelVariant::Epme, &default_grid(p.delta_cx)).unwrap();
        for ch in [Channel::Exciton, Channel::Cavity] {
            let a = fwhm(&c, ch, 0.0).unwrap();
            let b = fwhm(&c.normalized(), ch, 0.0).unwrap();
            assert!((a.fwhm - b.fwhm).abs() <= 1e-6 * a.fwhm, "{} vs {}", a.fwhm, b.fwhm);
            assert!((a.center - b.center).abs() <= 1e-6);
        }
    }

    #[test]
    fn undriven_sweep_is_dark() {
        let p = dot3(0.0);
        for variant in ModelVariant::ALL {
            let c = sweep_detuning(&p, &BathParams::reference(4.0), variant, &[-500.0, 0.0, 800.0]).unwrap();
            assert!(c.i_x.iter().chain(&c.i_c).all(|&v| v.abs() < 1e-12), "{variant}");
        }
    }

    #[test]
    fn intensities_are_physical() {
        let bath = BathParams::reference(10.0);
        for p in [dot3(50.0), SystemParams::cavity_driven(40.0, 500.0)] {
            let grid: Vec<f64> = (-20..=20).map(|k| 100.0 * k as f64).collect();
            let c = sweep_detuning(&p, &bath, ModelVariant::FullTcl, &grid).unwrap();
            assert!(c.i_x.iter().all(|&v| (-1e-9..=1.0 + 1e-9).contains(&v)));
            assert!(c.i_c.iter().all(|&v| v >= -1e-9));
        }
    }
}
