//! Steady-state and time-domain solutions of a Liouvillian.

use std::sync::Arc;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::hilbert::{devectorize, max_abs, vectorize, CMatrix, OperatorMatrix, Superoperator, TruncatedSpace};
use crate::{Error, Result};

/// Solution of L vec(ρ) = 0 with Tr ρ = 1.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: OperatorMatrix,
    /// ‖L vec(ρ)‖_max.
    pub residual: f64,
    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub min_eigenvalue: f64,
}

/// Controls the optional null-space uniqueness check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateOptions {
    /// Verify that the second-smallest singular value of L exceeds
    /// `gap` times the smallest (costs one SVD).
    pub check_uniqueness: bool,
    pub gap: f64,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            check_uniqueness: true,
            gap: 1e3,
        }
    }
}

/// Steady state with the uniqueness check enabled.
pub fn steady_state(l: &Superoperator) -> Result<SteadyState> {
    steady_state_with(l, SteadyStateOptions::default())
}

/// Solves the bordered system [L; vec(I)†] x = [0; 1].
///
/// Because vec(I)† L = 0, the row of L belonging to ρ₀₀ is a combination
/// of the other population rows; replacing it with the trace row gives a
/// square system that is nonsingular exactly when the null space is
/// one-dimensional. It is solved by LU and the residual is checked against
/// the full L.
pub fn steady_state_with(l: &Superoperator, opts: SteadyStateOptions) -> Result<SteadyState> {
    let space = l.space().clone();
    let d = space.dim();
    let n = d * d;
    let lm = l.matrix();
    let scale = max_abs(lm);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::NoConvergence(format!("Liouvillian has max entry {scale}")));
    }
    if opts.check_uniqueness {
        check_unique(lm, opts.gap)?;
    }
    // Row scaling keeps the trace row commensurate with L.
    let mut m = lm / Complex64::new(scale, 0.0);
    for c in 0..n {
        m[(0, c)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..d {
        m[(0, i * d + i)] = Complex64::new(1.0, 0.0);
    }
    let mut rhs = DVector::zeros(n);
    rhs[0] = Complex64::new(1.0, 0.0);
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NoConvergence("bordered steady-state system is singular".into()))?;
    let mut rho = devectorize(&space, &x)?;
    let tr = rho.trace();
    rho = rho.scale(tr.inv());
    let residual = (lm * vectorize(&rho)).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if !(residual < 1e-9 * scale) {
        return Err(Error::NoConvergence(format!(
            "steady-state residual {residual:e} exceeds 1e-9 x {scale:e}"
        )));
    }
    let min_eigenvalue = min_eigenvalue(&rho);
    Ok(SteadyState {
        rho,
        residual,
        min_eigenvalue,
    })
}

fn check_unique(lm: &CMatrix, gap: f64) -> Result<()> {
    let sv = lm.clone().singular_values();
    let mut s: Vec<f64> = sv.iter().copied().collect();
    s.sort_by(f64::total_cmp);
    if s.len() >= 2 && !(s[1] > gap * s[0]) {
        return Err(Error::DegenerateNullSpace {
            smallest: s[0],
            second: s[1],
        });
    }
    Ok(())
}

/// Smallest eigenvalue of (ρ + ρ†)/2.
pub fn min_eigenvalue(rho: &OperatorMatrix) -> f64 {
    let h = (rho.matrix() + rho.matrix().adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Tr(Aρ).
pub fn expectation(rho: &OperatorMatrix, a: &OperatorMatrix) -> Result<Complex64> {
    if rho.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: a.dim(),
        });
    }
    let (r, m) = (rho.matrix(), a.matrix());
    let d = rho.dim();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            s += m[(i, k)] * r[(k, i)];
        }
    }
    Ok(s)
}

/// Tolerances for [`evolve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Smallest allowed step (ps).
    pub min_step: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            min_step: 1e-12,
        }
    }
}

pub fn evolve(rho0: &OperatorMatrix, l: &Superoperator, t_grid: &[f64]) -> Result<Vec<OperatorMatrix>> {
    evolve_with(rho0, l, t_grid, EvolveOptions::default())
}

// Dormand–Prince 5(4) tableau.
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

/// Integrates vec(ρ)′ = L vec(ρ) with adaptive Dormand–Prince 5(4) steps
/// and returns ρ at each time of `t_grid` (ascending, starting at or after 0).
pub fn evolve_with(
    rho0: &OperatorMatrix,
    l: &Superoperator,
    t_grid: &[f64],
    opts: EvolveOptions,
) -> Result<Vec<OperatorMatrix>> {
    let space: Arc<TruncatedSpace> = l.space().clone();
    if rho0.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: rho0.dim(),
        });
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) || t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Domain("time grid must be ascending and non-negative".into()));
    }
    let lm = l.matrix();
    let mut y = vectorize(rho0);
    let mut t = 0.0;
    let mut h = 1.0 / max_abs(lm).max(1e-300) * 0.1;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut k: Vec<DVector<Complex64>> = vec![lm * &y; 7];
    let mut fsal = false;
    for &target in t_grid {
        while t < target {
            let step = h.min(target - t);
            if step < opts.min_step && target - t > opts.min_step {
                return Err(Error::StepSizeUnderflow { t, step });
            }
            if !fsal {
                k[0] = lm * &y;
            }
            for s in 1..7 {
                let mut ys = y.clone();
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        ys.axpy(Complex64::new(step * A[s][j], 0.0), kj, Complex64::new(1.0, 0.0));
                    }
                }
                k[s] = lm * ys;
            }
            let _ = C;
            let mut y5 = y.clone();
            let mut err = DVector::<Complex64>::zeros(y.len());
            for s in 0..7 {
                if B5[s] != 0.0 {
                    y5.axpy(Complex64::new(step * B5[s], 0.0), &k[s], Complex64::new(1.0, 0.0));
                }
                let e = B5[s] - B4[s];
                if e != 0.0 {
                    err.axpy(Complex64::new(step * e, 0.0), &k[s], Complex64::new(1.0, 0.0));
                }
            }
            let mut ratio: f64 = 0.0;
            for i in 0..y.len() {
                let sc = opts.abs_tol + opts.rel_tol * y[i].norm().max(y5[i].norm());
                ratio = ratio.max(err[i].norm() / sc);
            }
            if ratio <= 1.0 {
                t += step;
                y = y5;
                // Stage 7 was evaluated at the new point.
                k[0] = k[6].clone();
                fsal = true;
                let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).min(5.0) };
                if step == h {
                    h *= grow;
                } else {
                    h = h.max(step * grow);
                }
            } else {
                fsal = true;
                k[0] = lm * &y;
                h = step * (0.9 * ratio.powf(-0.2)).max(0.1);
                if h < opts.min_step {
                    return Err(Error::StepSizeUnderflow { t, step: h });
                }
            }
        }
        out.push(devectorize(&space, &y)?);
    }
    Ok(out)
}
