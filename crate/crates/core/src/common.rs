//! Physical primitives shared by the BB84 and twin-field rate models.
//!
//! Everything here is a pure function of its value inputs. Probabilities are
//! `f64` throughout; rates below [`RATE_FLOOR`] are treated as exactly zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-pulse rates smaller than this are reported as 0.
pub const RATE_FLOOR: f64 = 1e-300;

/// Gate window shared by both detector families, in seconds.
pub const DETECTOR_WINDOW_S: f64 = 3.5e-9;

/// Single-photon detector model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorProfile {
    /// Dark count rate in Hz.
    pub dark_count_rate: f64,
    /// Detection efficiency in `[0, 1]`.
    pub efficiency: f64,
    /// Dead time in seconds.
    pub dead_time: f64,
    /// Detection gate in seconds.
    pub window: f64,
}

impl DetectorProfile {
    /// Cooled superconducting nanowire detector.
    pub const fn cold() -> Self {
        Self {
            dark_count_rate: 100.0,
            efficiency: 0.85,
            dead_time: 1e-6,
            window: DETECTOR_WINDOW_S,
        }
    }

    /// Uncooled avalanche photodiode.
    pub const fn hot() -> Self {
        Self {
            dark_count_rate: 200.0,
            efficiency: 0.2,
            dead_time: 50e-6,
            window: DETECTOR_WINDOW_S,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_range("efficiency", self.efficiency, 0.0, 1.0, "[0, 1]")?;
        check_non_negative("dark_count_rate", self.dark_count_rate)?;
        check_non_negative("dead_time", self.dead_time)?;
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(Error::Domain {
                what: "window",
                value: self.window,
                domain: "(0, inf)",
            });
        }
        Ok(())
    }
}

/// Which detector family a solution uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Hot,
    Cold,
}

impl Profile {
    pub fn detector(self) -> DetectorProfile {
        match self {
            Profile::Hot => DetectorProfile::hot(),
            Profile::Cold => DetectorProfile::cold(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Hot => "hot",
            Profile::Cold => "cold",
        }
    }
}

/// Source, channel and post-processing constants for both protocols.
///
/// Deserialisation fills missing fields from the cooled defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolParams {
    /// Signal mean photon number for BB84.
    pub mu: f64,
    /// Fibre attenuation in dB/km.
    pub alpha_db_per_km: f64,
    /// Pulse repetition rate in Hz.
    pub f_rep_hz: f64,
    /// Error-correction inefficiency relative to the Shannon limit.
    pub f_ec: f64,
    /// Intrinsic error-click probability added to the dark-count probability.
    pub p_e_base: f64,
    /// Twin-field intensity of the lossier arm.
    pub s_strong: f64,
    /// Phase misalignment between the senders (radians).
    pub phi: f64,
    /// Polarisation misalignment between the senders (radians).
    pub theta: f64,
    /// Phase misalignment of Alice relative to the measuring node (radians).
    pub theta_a: f64,
    /// Phase misalignment of Bob relative to the measuring node (radians).
    pub theta_b: f64,
    /// BB84 intensities used in the single-photon error fit; includes `mu`.
    pub decoy_intensities: Vec<f64>,
    pub detector: DetectorProfile,
    /// How the twin-field phase-error bound enters the key rate.
    #[serde(default)]
    pub phase_error_norm: PhaseErrorNorm,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self::cold()
    }
}

/// Normalisation of the twin-field phase-error bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseErrorNorm {
    /// Divide the bound by the announcement probability `p_XX`, giving an
    /// error rate per announced click.
    #[default]
    PerClick,
    /// Use the squared amplitude sum directly.
    Unnormalized,
}

impl ProtocolParams {
    pub fn with_detector(detector: DetectorProfile) -> Self {
        Self {
            mu: 0.1,
            alpha_db_per_km: 0.2,
            f_rep_hz: 1e8,
            f_ec: 1.2,
            p_e_base: 5.3e-7,
            s_strong: 0.01,
            phi: 0.0,
            theta: 0.0,
            theta_a: 0.0,
            theta_b: 0.0,
            decoy_intensities: vec![0.1, 0.05, 0.0],
            detector,
            phase_error_norm: PhaseErrorNorm::default(),
        }
    }

    pub fn cold() -> Self {
        Self::with_detector(DetectorProfile::cold())
    }

    pub fn hot() -> Self {
        Self::with_detector(DetectorProfile::hot())
    }

    pub fn for_profile(profile: Profile) -> Self {
        Self::with_detector(profile.detector())
    }

    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        check_positive("mu", self.mu)?;
        check_positive("alpha_db_per_km", self.alpha_db_per_km)?;
        check_positive("f_rep_hz", self.f_rep_hz)?;
        check_positive("s_strong", self.s_strong)?;
        check_non_negative("p_e_base", self.p_e_base)?;
        if !(self.f_ec >= 1.0 && self.f_ec.is_finite()) {
            return Err(Error::Domain {
                what: "f_ec",
                value: self.f_ec,
                domain: "[1, inf)",
            });
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        check_range("phi", self.phi, 0.0, half_pi, "[0, pi/2]")?;
        check_range("theta", self.theta, 0.0, half_pi, "[0, pi/2]")?;
        check_range("theta_a", self.theta_a, 0.0, half_pi, "[0, pi/2]")?;
        check_range("theta_b", self.theta_b, 0.0, half_pi, "[0, pi/2]")?;
        if !self.decoy_intensities.contains(&self.mu) {
            return Err(Error::InvalidParams("decoy_intensities must contain mu".into()));
        }
        if !self.decoy_intensities.iter().any(|&v| (0.0..self.mu).contains(&v)) {
            return Err(Error::InvalidParams(
                "decoy_intensities needs at least one value in [0, mu)".into(),
            ));
        }
        Ok(())
    }

    /// Fibre loss in dB for `length_km` of fibre.
    pub fn fibre_loss_db(&self, length_km: f64) -> f64 {
        self.alpha_db_per_km * length_km
    }
}

fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            domain: "(0, inf)",
        })
    }
}

fn check_non_negative(what: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            domain: "[0, inf)",
        })
    }
}

fn check_range(what: &'static str, value: f64, lo: f64, hi: f64, domain: &'static str) -> Result<()> {
    if (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain { what, value, domain })
    }
}

/// Binary Shannon entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_range("x", x, 0.0, 1.0, "[0, 1]")?;
    Ok(h2(x))
}

/// Unchecked entropy for callers that already hold a probability.
pub(crate) fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Fraction of power surviving `loss_db` of attenuation.
pub fn transmittance(loss_db: f64) -> Result<f64> {
    if !(loss_db >= 0.0) {
        return Err(Error::NegativeLoss(loss_db));
    }
    Ok(10f64.powf(-loss_db / 10.0))
}

/// Probability of a dark count inside one gate.
pub fn dark_count_prob(profile: &DetectorProfile) -> f64 {
    profile.dark_count_rate * profile.window
}

/// Throughput left after dead time, `1 / (1 + tau * f_rep * p_click)`.
pub fn dead_time_factor(click_prob: f64, profile: &DetectorProfile, f_rep: f64) -> f64 {
    1.0 / (1.0 + profile.dead_time * f_rep * click_prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn entropy_anchors() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        // mpmath, 30 digits: 0.811278124459132864087...
        assert_relative_eq!(
            binary_entropy(0.25).unwrap(),
            0.811_278_124_459_132_9,
            max_relative = 1e-15
        );
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn transmittance_anchors() {
        assert_eq!(transmittance(0.0).unwrap(), 1.0);
        assert_relative_eq!(transmittance(10.0).unwrap(), 0.1, max_relative = 1e-15);
        let p = ProtocolParams::cold();
        assert_relative_eq!(transmittance(p.fibre_loss_db(50.0)).unwrap(), 0.1, max_relative = 1e-15);
        assert!(matches!(transmittance(-1.0), Err(Error::NegativeLoss(_))));
    }

    #[test]
    fn dark_counts() {
        assert_relative_eq!(dark_count_prob(&DetectorProfile::cold()), 3.5e-7, max_relative = 1e-12);
        assert_relative_eq!(dark_count_prob(&DetectorProfile::hot()), 7.0e-7, max_relative = 1e-12);
        let silent = DetectorProfile {
            dark_count_rate: 0.0,
            ..DetectorProfile::cold()
        };
        assert_eq!(dark_count_prob(&silent), 0.0);
    }

    #[test]
    fn dead_time() {
        let hot = DetectorProfile::hot();
        assert_eq!(dead_time_factor(0.0, &hot, 1e8), 1.0);
        let no_dead = DetectorProfile { dead_time: 0.0, ..hot };
        assert_eq!(dead_time_factor(0.3, &no_dead, 1e8), 1.0);
        assert_relative_eq!(dead_time_factor(0.01, &hot, 1e8), 1.0 / 51.0, max_relative = 1e-12);
    }

    #[test]
    fn default_params_validate() {
        ProtocolParams::cold().validate().unwrap();
        ProtocolParams::hot().validate().unwrap();
        let mut p = ProtocolParams::cold();
        p.decoy_intensities = vec![0.1];
        assert!(p.validate().is_err());
        let mut p = ProtocolParams::cold();
        p.f_ec = 0.9;
        assert!(p.validate().is_err());
        let mut p = ProtocolParams::cold();
        p.theta_a = 2.0;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn entropy_symmetric(x in 0.0f64..=1.0) {
            let a = binary_entropy(x).unwrap();
            let b = binary_entropy(1.0 - x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn transmittance_multiplicative(a in 0.0f64..150.0, b in 0.0f64..150.0) {
            let lhs = transmittance(a + b).unwrap();
            let rhs = transmittance(a).unwrap() * transmittance(b).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(f64::MIN_POSITIVE));
            prop_assert!(transmittance(a + 0.5).unwrap() < transmittance(a).unwrap());
        }

        #[test]
        fn dead_time_decreasing(p in 0.0f64..0.99, dp in 1e-4f64..0.01, tau in 1e-7f64..1e-4) {
            let prof = DetectorProfile { dead_time: tau, ..DetectorProfile::hot() };
            let longer = DetectorProfile { dead_time: tau * 1.5, ..prof };
            prop_assert!(dead_time_factor(p + dp, &prof, 1e8) < dead_time_factor(p, &prof, 1e8));
            prop_assert!(dead_time_factor(p + dp, &longer, 1e8) < dead_time_factor(p + dp, &prof, 1e8));
        }
    }
}
