//! Parameter records shared by every stage of a calculation.

use std::fmt;
use std::str::FromStr;

use crate::units::energy_to_angular;
use crate::{Error, Result};

/// How the configured phonon coupling constant maps onto the spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaConvention {
    /// The configured value multiplies ω³ exp(−ω²/2ω_b²) as is.
    #[default]
    Direct,
    /// The configured value is α_p/(2π)², so the spectral density uses (2π)² times it.
    TwoPiSquared,
}

impl FromStr for AlphaConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "two-pi-squared" => Ok(Self::TwoPiSquared),
            other => Err(Error::InvalidParameter {
                key: "alpha_convention",
                reason: format!("expected `direct` or `two-pi-squared`, got `{other}`"),
            }),
        }
    }
}

impl fmt::Display for AlphaConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::TwoPiSquared => "two-pi-squared",
        })
    }
}

/// Acoustic-phonon bath: spectral-density coefficients and temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// Coupling strength in ps², interpreted through `alpha_convention`.
    pub alpha_p: f64,
    /// Spectral-density cutoff in rad/ps.
    pub omega_b: f64,
    /// Bath temperature in K.
    pub temperature: f64,
    pub alpha_convention: AlphaConvention,
}

impl BathParams {
    pub fn new(alpha_p: f64, omega_b: f64, temperature: f64) -> Result<Self> {
        let bath = Self {
            alpha_p,
            omega_b,
            temperature,
            alpha_convention: AlphaConvention::Direct,
        };
        bath.validate()?;
        Ok(bath)
    }

    /// InAs/GaAs-like bath: α_p = 0.06 ps², ω_b = 1 meV.
    pub fn reference(temperature: f64) -> Self {
        Self {
            alpha_p: 0.06,
            omega_b: energy_to_angular(1000.0),
            temperature,
            alpha_convention: AlphaConvention::Direct,
        }
    }

    /// A bath with no phonon coupling at all.
    pub fn uncoupled(temperature: f64) -> Self {
        Self {
            alpha_p: 0.0,
            ..Self::reference(temperature)
        }
    }

    /// Coefficient multiplying ω³ exp(−ω²/2ω_b²) in the spectral density.
    pub fn coupling(&self) -> f64 {
        match self.alpha_convention {
            AlphaConvention::Direct => self.alpha_p,
            AlphaConvention::TwoPiSquared => self.alpha_p * (2.0 * std::f64::consts::PI).powi(2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_p >= 0.0) || !self.alpha_p.is_finite() {
            return Err(Error::InvalidParameter {
                key: "alpha_p",
                reason: format!("must be finite and >= 0, got {}", self.alpha_p),
            });
        }
        if !(self.omega_b > 0.0) || !self.omega_b.is_finite() {
            return Err(Error::InvalidParameter {
                key: "omega_b",
                reason: format!("must be finite and > 0, got {}", self.omega_b),
            });
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidParameter {
                key: "temperature",
                reason: format!("must be finite and >= 0, got {}", self.temperature),
            });
        }
        Ok(())
    }
}

/// Which mode the coherent cw laser drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DriveKind {
    Exciton,
    Cavity,
}

impl FromStr for DriveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exciton" | "x" | "dot" => Ok(Self::Exciton),
            "cavity" | "c" => Ok(Self::Cavity),
            other => Err(Error::InvalidParameter {
                key: "drive",
                reason: format!("expected `exciton` or `cavity`, got `{other}`"),
            }),
        }
    }
}

impl fmt::Display for DriveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exciton => "exciton",
            Self::Cavity => "cavity",
        })
    }
}

/// Level of phonon physics included in the Liouvillian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelVariant {
    /// Markovian polaron time-convolutionless master equation.
    FullTcl,
    /// Lindblad-form effective phonon master equation.
    Epme,
    /// Polaron TCL expanded to one phonon: G_g = 0, G_u = φ, ⟨B⟩ = 1.
    OnePhonon,
    /// Zero-phonon-line broadening only, ⟨B⟩ = 1.
    NoPhonon,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [Self::FullTcl, Self::Epme, Self::OnePhonon, Self::NoPhonon];

    /// Whether the variant dresses couplings with the Franck-Condon factor.
    pub fn uses_mean_displacement(self) -> bool {
        matches!(self, Self::FullTcl | Self::Epme)
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "full-tcl" => Ok(Self::FullTcl),
            "epme" => Ok(Self::Epme),
            "one-phonon" => Ok(Self::OnePhonon),
            "no-phonon" => Ok(Self::NoPhonon),
            other => Err(Error::InvalidParameter {
                key: "variant",
                reason: format!("expected one of full, epme, one-phonon, no-phonon; got `{other}`"),
            }),
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FullTcl => "full",
            Self::Epme => "epme",
            Self::OnePhonon => "one-phonon",
            Self::NoPhonon => "no-phonon",
        })
    }
}

/// Dot, cavity and drive parameters. Energies and rates are in μeV.
///
/// Detunings are stored as Δ_xL = ω_x − ω_L and Δ_cx = ω_c − ω_x; the
/// cavity-laser detuning is derived, so Δ_cx = Δ_cL − Δ_xL holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub delta_xl: f64,
    pub delta_cx: f64,
    pub g: f64,
    pub eta_x: f64,
    pub eta_c: f64,
    /// Exciton radiative decay rate.
    pub gamma: f64,
    /// Cavity field decay rate (energy decay is 2κ).
    pub kappa: f64,
    /// Zero-phonon-line pure dephasing rate.
    pub gamma_prime: f64,
    /// Maximum total excitation number of the truncated basis.
    pub n_max: usize,
    pub drive: DriveKind,
    /// Subtract the polaron shift from Δ_xL instead of treating it as absorbed.
    pub explicit_polaron_shift: bool,
}

impl SystemParams {
    /// Exciton-driven system with g = 20, γ = 2, κ = 50, γ′ = 2 μeV and a
    /// two-excitation basis.
    pub fn exciton_driven(eta_x: f64, delta_cx: f64) -> Self {
        Self {
            delta_xl: 0.0,
            delta_cx,
            g: 20.0,
            eta_x,
            eta_c: 0.0,
            gamma: 2.0,
            kappa: 50.0,
            gamma_prime: 2.0,
            n_max: 2,
            drive: DriveKind::Exciton,
            explicit_polaron_shift: false,
        }
    }

    /// Cavity-driven counterpart of [`SystemParams::exciton_driven`] with a
    /// six-excitation basis.
    pub fn cavity_driven(eta_c: f64, delta_cx: f64) -> Self {
        Self {
            eta_x: 0.0,
            eta_c,
            n_max: 6,
            drive: DriveKind::Cavity,
            ..Self::exciton_driven(0.0, delta_cx)
        }
    }

    /// Default truncation for each drive kind.
    pub fn default_n_max(drive: DriveKind) -> usize {
        match drive {
            DriveKind::Exciton => 2,
            DriveKind::Cavity => 6,
        }
    }

    /// Δ_cL = ω_c − ω_L.
    pub fn delta_cl(&self) -> f64 {
        self.delta_cx + self.delta_xl
    }

    /// Laser detuning from the exciton, ω_L − ω_x.
    pub fn laser_detuning(&self) -> f64 {
        -self.delta_xl
    }

    /// Copy with the laser placed at ω_L − ω_x = `detuning` μeV; Δ_cx is kept.
    pub fn with_laser_detuning(mut self, detuning: f64) -> Self {
        self.delta_xl = -detuning;
        self
    }

    /// Drive amplitude of whichever mode is driven.
    pub fn drive_amplitude(&self) -> f64 {
        match self.drive {
            DriveKind::Exciton => self.eta_x,
            DriveKind::Cavity => self.eta_c,
        }
    }

    /// Copy with the active drive amplitude replaced.
    pub fn with_drive_amplitude(mut self, eta: f64) -> Self {
        match self.drive {
            DriveKind::Exciton => self.eta_x = eta,
            DriveKind::Cavity => self.eta_c = eta,
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("delta_xl", self.delta_xl),
            ("delta_cx", self.delta_cx),
            ("g", self.g),
            ("eta_x", self.eta_x),
            ("eta_c", self.eta_c),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    key,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        let rates = [
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("gamma_prime", self.gamma_prime),
        ];
        for (key, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    key,
                    reason: format!("rates must be finite and >= 0, got {v}"),
                });
            }
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParameter {
                key: "n_max",
                reason: "must be >= 1".into(),
            });
        }
        match self.drive {
            DriveKind::Exciton if self.eta_c != 0.0 => Err(Error::InvalidParameter {
                key: "eta_c",
                reason: "an exciton-driven run must have eta_c = 0".into(),
            }),
            DriveKind::Cavity if self.eta_x != 0.0 => Err(Error::InvalidParameter {
                key: "eta_x",
                reason: "a cavity-driven run must have eta_x = 0".into(),
            }),
            _ => Ok(()),
        }
    }
}
