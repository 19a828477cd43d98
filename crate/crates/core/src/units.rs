//! Unit system and thermal helpers.
//!
//! Internally every frequency is an angular frequency in rad/ps and every
//! time is in ps. Energies enter and leave the library in μeV.

/// Reduced Planck constant in μeV·ps.
pub const HBAR_UEV_PS: f64 = 658.211_956_9;

/// Boltzmann constant in μeV/K.
pub const KB_UEV_PER_K: f64 = 86.173_33;

/// Converts an energy in μeV to an angular frequency in rad/ps.
#[inline]
pub fn energy_to_angular(e_uev: f64) -> f64 {
    e_uev / HBAR_UEV_PS
}

/// Converts an angular frequency in rad/ps to an energy in μeV.
#[inline]
pub fn angular_to_energy(omega: f64) -> f64 {
    omega * HBAR_UEV_PS
}

/// Inverse thermal energy ħ/(k_B T) in ps, or `None` at zero temperature.
#[inline]
pub fn hbar_beta(temperature: f64) -> Option<f64> {
    (temperature > 0.0).then(|| HBAR_UEV_PS / (KB_UEV_PER_K * temperature))
}

/// Bose-Einstein occupation 1/(exp(ħω/k_B T) − 1).
pub fn thermal_occupation(omega: f64, temperature: f64) -> crate::Result<f64> {
    if !(omega > 0.0) {
        return Err(crate::Error::Domain(format!(
            "thermal occupation needs omega > 0, got {omega}"
        )));
    }
    if temperature < 0.0 {
        return Err(crate::Error::Domain(format!(
            "negative temperature {temperature} K"
        )));
    }
    Ok(match hbar_beta(temperature) {
        None => 0.0,
        Some(hb) => 1.0 / (hb * omega).exp_m1(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn conversion_examples() {
        assert_eq!(energy_to_angular(0.0), 0.0);
        assert_relative_eq!(energy_to_angular(658.2119569), 1.0, max_relative = 1e-15);
        assert_relative_eq!(energy_to_angular(1000.0), 1.519_267, max_relative = 1e-6);
    }

    #[test]
    fn round_trip() {
        for &e in &[1e-3, 0.5, 42.0, 1000.0, 6.0e3, 1.0e6] {
            assert_relative_eq!(angular_to_energy(energy_to_angular(e)), e, max_relative = 1e-12);
        }
    }

    #[test]
    fn occupation_at_zero_temperature() {
        assert_eq!(thermal_occupation(0.3, 0.0).unwrap(), 0.0);
        assert_eq!(thermal_occupation(12.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn occupation_at_unit_argument() {
        let t = 4.0;
        let omega = KB_UEV_PER_K * t / HBAR_UEV_PS;
        let n = thermal_occupation(omega, t).unwrap();
        assert_relative_eq!(n, 1.0 / (std::f64::consts::E - 1.0), max_relative = 1e-12);
        assert_relative_eq!(n, 0.581_976_7, max_relative = 1e-6);
    }

    #[test]
    fn occupation_rejects_nonpositive_frequency() {
        assert!(thermal_occupation(0.0, 4.0).is_err());
        assert!(thermal_occupation(-1.0, 4.0).is_err());
    }

    #[test]
    fn coth_identity_one_mev_four_kelvin() {
        let omega = energy_to_angular(1000.0);
        let t = 4.0;
        let x = HBAR_UEV_PS * omega / (2.0 * KB_UEV_PER_K * t);
        // independent evaluation of coth through exponentials
        let coth = (x.exp() + (-x).exp()) / (x.exp() - (-x).exp());
        let n = thermal_occupation(omega, t).unwrap();
        assert_relative_eq!(coth, 1.0 + 2.0 * n, max_relative = 1e-12);
    }
}
