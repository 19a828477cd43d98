//! Polaron-frame system Hamiltonian, interaction operators and Liouvillian
//! assembly for every model variant.

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::hilbert::{
    build_operators, dissipator, hamiltonian_generator, spost, spre, sprepost, CMatrix,
    OperatorMatrix, Operators, Superoperator, TruncatedSpace,
};
use crate::params::{BathParams, ModelVariant, SystemParams};
use crate::phonon::{BathFunctions, GreenFunction, PhononRates, RateChannel};
use crate::units::energy_to_angular;
use crate::{Error, Result};

/// H′_sys with its spectral decomposition and the two interaction operators.
/// Everything is in rad/ps.
#[derive(Debug, Clone)]
pub struct HamiltonianSet {
    pub ops: Operators,
    pub h_sys: OperatorMatrix,
    pub x_g: OperatorMatrix,
    pub x_u: OperatorMatrix,
    pub eigvals: Vec<f64>,
    /// Columns are eigenvectors of `h_sys`.
    pub eigvecs: CMatrix,
}

impl HamiltonianSet {
    pub fn space(&self) -> &Arc<TruncatedSpace> {
        self.h_sys.space()
    }
}

#[cfg(test)]
fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Interaction operators X_g = g(a†σ⁻ + σ⁺a) + η_x(σ⁻ + σ⁺) and
/// X_u = i[g(σ⁺a − a†σ⁻) + η_x(σ⁺ − σ⁻)], in rad/ps.
fn interaction_operators(ops: &Operators, params: &SystemParams) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let g = energy_to_angular(params.g);
    let eta = energy_to_angular(params.eta_x);
    let feed = ops.a_dag.mul(&ops.sig_minus)?;
    let defeed = ops.sig_plus.mul(&ops.a)?;
    let x_g = feed
        .add(&defeed)?
        .scale_re(g)
        .add(&ops.sig_minus.add(&ops.sig_plus)?.scale_re(eta))?;
    let x_u = defeed
        .sub(&feed)?
        .scale_re(g)
        .add(&ops.sig_plus.sub(&ops.sig_minus)?.scale_re(eta))?
        .scale(Complex64::new(0.0, 1.0));
    Ok((x_g, x_u))
}

/// H′_sys = Δ_xL σ⁺σ⁻ + Δ_cL a†a + ⟨B⟩X_g + η_c(a + a†).
///
/// With `explicit_polaron_shift` set, `delta_p` (rad/ps) is subtracted from
/// the exciton detuning; otherwise it is taken as part of ω_x and ignored.
pub fn build_system_hamiltonian(
    params: &SystemParams,
    b_mean: f64,
    delta_p: f64,
) -> Result<HamiltonianSet> {
    params.validate()?;
    if !(b_mean > 0.0 && b_mean <= 1.0) {
        return Err(Error::Domain(format!("<B> must lie in (0, 1], got {b_mean}")));
    }
    let space = TruncatedSpace::new(params.n_max)?;
    let ops = build_operators(&space);
    let (x_g, x_u) = interaction_operators(&ops, params)?;
    let mut dxl = energy_to_angular(params.delta_xl);
    if params.explicit_polaron_shift {
        dxl -= delta_p;
    }
    let dcl = energy_to_angular(params.delta_cl());
    let eta_c = energy_to_angular(params.eta_c);
    let h_sys = ops
        .sig_11
        .scale_re(dxl)
        .add(&ops.n_photon.scale_re(dcl))?
        .add(&x_g.scale_re(b_mean))?
        .add(&ops.a.add(&ops.a_dag)?.scale_re(eta_c))?;
    let (eigvals, eigvecs) = hermitian_eigen(&h_sys)?;
    Ok(HamiltonianSet {
        ops,
        h_sys,
        x_g,
        x_u,
        eigvals,
        eigvecs,
    })
}

fn hermitian_eigen(h: &OperatorMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !h.is_hermitian(1e-12 * h.max_abs().max(1.0)) {
        return Err(Error::EigenFailure(format!(
            "matrix is not Hermitian (defect {:e})",
            h.hermiticity_error()
        )));
    }
    let eig = SymmetricEigen::try_new(h.matrix().clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::EigenFailure("Hermitian eigensolver did not converge".into()))?;
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure("non-finite eigenvalue".into()));
    }
    Ok((vals, eig.eigenvectors))
}

/// (γ̃/2)D[σ⁻] + κD[a] + (γ′/2)D[σ₁₁] with γ̃ = γ⟨B⟩², in rad/ps.
pub fn background_lindblad(params: &SystemParams, b_mean: f64) -> Result<Superoperator> {
    let space = TruncatedSpace::new(params.n_max)?;
    let ops = build_operators(&space);
    Ok(background_from_ops(&ops, params, b_mean))
}

fn background_from_ops(ops: &Operators, params: &SystemParams, b_mean: f64) -> Superoperator {
    let gamma_t = energy_to_angular(params.gamma) * b_mean * b_mean;
    let kappa = energy_to_angular(params.kappa);
    let gp = energy_to_angular(params.gamma_prime);
    let mut l = dissipator(&ops.sig_minus).scale(0.5 * gamma_t);
    l.add_assign(&dissipator(&ops.a).scale(kappa)).unwrap();
    l.add_assign(&dissipator(&ops.sig_11).scale(0.5 * gp)).unwrap();
    l
}

/// Phonon scattering term of the Markovian polaron master equation,
/// ρ ↦ −Σ_m ([X_m, χ_m ρ] + H.c.) with χ_m = ∫₀^∞ G_m(τ) X_m(−τ) dτ evaluated
/// in the eigenbasis of H′_sys.
pub fn tcl_scattering_superop(hset: &HamiltonianSet, funcs: &BathFunctions) -> Result<Superoperator> {
    let space = hset.space();
    let mut total = Superoperator::zeros(space);
    if funcs.variant == ModelVariant::NoPhonon || funcs.bath.alpha_p == 0.0 {
        return Ok(total);
    }
    let d = space.dim();
    let u = &hset.eigvecs;
    let ud = u.adjoint();
    for (x, which) in [(&hset.x_g, GreenFunction::Even), (&hset.x_u, GreenFunction::Odd)] {
        let xe = &ud * x.matrix() * u;
        let mut weighted = CMatrix::zeros(d, d);
        let mut zero_freq: Option<Complex64> = None;
        for j in 0..d {
            for k in 0..d {
                if xe[(j, k)].norm() == 0.0 {
                    continue;
                }
                let w = hset.eigvals[j] - hset.eigvals[k];
                let t = if w == 0.0 {
                    *zero_freq.get_or_insert(funcs.green_transform(which, 0.0)?)
                } else {
                    funcs.green_transform(which, w)?
                };
                weighted[(j, k)] = xe[(j, k)] * t;
            }
        }
        let chi = OperatorMatrix::new(space, u * weighted * &ud)?;
        let chi_d = chi.adjoint();
        let term = spre(&x.mul(&chi)?).scale(-1.0);
        total.add_assign(&term)?;
        total.add_assign(&sprepost(&chi, x)?)?;
        total.add_assign(&spost(&chi_d.mul(x)?).scale(-1.0))?;
        total.add_assign(&sprepost(x, &chi_d)?)?;
    }
    Ok(total)
}

/// Collapse operator of each effective phonon channel.
fn channel_operator(ops: &Operators, channel: RateChannel) -> Result<OperatorMatrix> {
    match channel {
        RateChannel::SigMinus => Ok(ops.sig_minus.clone()),
        RateChannel::SigPlus => Ok(ops.sig_plus.clone()),
        RateChannel::Feed => ops.a_dag.mul(&ops.sig_minus),
        RateChannel::Defeed => ops.sig_plus.mul(&ops.a),
    }
}

/// Effective phonon Lindblad Liouvillian: coherent part of H′_sys plus the
/// Stark-shift Hamiltonian Σ Δ_D D†D, the background dissipators and
/// Σ (Γ_D/2) D[D] over the four channels.
pub fn epme_liouvillian(
    params: &SystemParams,
    rates: &PhononRates,
    b_mean: f64,
    delta_p: f64,
) -> Result<Superoperator> {
    let hset = build_system_hamiltonian(params, b_mean, delta_p)?;
    let ops = &hset.ops;
    let mut h = hset.h_sys.clone();
    let mut l = background_from_ops(ops, params, b_mean);
    for ch in RateChannel::ALL {
        let (rate, shift) = (rates.rate(ch), rates.shift(ch));
        if rate == 0.0 && shift == 0.0 {
            continue;
        }
        let op = channel_operator(ops, ch)?;
        if rate != 0.0 {
            l.add_assign(&dissipator(&op).scale(0.5 * energy_to_angular(rate)))?;
        }
        if shift != 0.0 {
            h = h.add(&op.adjoint().mul(&op)?.scale_re(energy_to_angular(shift)))?;
        }
    }
    l.add_assign(&hamiltonian_generator(&h))?;
    Ok(l)
}

/// Which phonon channels an effective-phonon run keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelSelection {
    #[default]
    All,
    Only(RateChannel),
}

impl ChannelSelection {
    fn apply(self, rates: PhononRates) -> PhononRates {
        match self {
            Self::All => rates,
            Self::Only(c) => rates.restricted_to(&[c]),
        }
    }
}

/// Assembles the complete Liouvillian for a variant.
///
/// No-phonon uses ⟨B⟩ = 1 and no phonon terms; one-phonon uses the
/// scattering term with (G_g, G_u) = (0, φ) and ⟨B⟩ = 1.
pub fn full_liouvillian(
    params: &SystemParams,
    bath: &BathParams,
    variant: ModelVariant,
) -> Result<Superoperator> {
    liouvillian_with_channels(params, bath, variant, ChannelSelection::All)
}

/// As [`full_liouvillian`], with the effective-phonon channels restricted by
/// `channels` (ignored by the other variants).
pub fn liouvillian_with_channels(
    params: &SystemParams,
    bath: &BathParams,
    variant: ModelVariant,
    channels: ChannelSelection,
) -> Result<Superoperator> {
    params.validate()?;
    bath.validate()?;
    match variant {
        ModelVariant::NoPhonon => {
            let hset = build_system_hamiltonian(params, 1.0, 0.0)?;
            let mut l = background_from_ops(&hset.ops, params, 1.0);
            l.add_assign(&hamiltonian_generator(&hset.h_sys))?;
            Ok(l)
        }
        ModelVariant::Epme => {
            let funcs = BathFunctions::shared(bath, ModelVariant::Epme)?;
            let rates = channels.apply(PhononRates::compute(params, &funcs)?);
            epme_liouvillian(params, &rates, funcs.b_mean, funcs.delta_p)
        }
        ModelVariant::FullTcl | ModelVariant::OnePhonon => {
            let funcs = BathFunctions::shared(bath, variant)?;
            let hset = build_system_hamiltonian(params, funcs.b_mean, funcs.delta_p)?;
            let mut l = background_from_ops(&hset.ops, params, funcs.b_mean);
            l.add_assign(&hamiltonian_generator(&hset.h_sys))?;
            l.add_assign(&tcl_scattering_superop(&hset, &funcs)?)?;
            Ok(l)
        }
    }
}
