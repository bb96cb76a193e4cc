//! Decoy-state BB84 secret key rate from a total channel loss.
//!
//! The single-photon error rate is recovered by a least-squares fit over the
//! configured decoy intensities with the closure `e_0 = 1/2`, `e_n = e_1` for
//! `n >= 1`. The dead-time factor is taken from the signal intensity only.

use serde::Serialize;

use crate::common::{dark_count_prob, dead_time_factor, h2, transmittance, ProtocolParams, RATE_FLOOR};
use crate::error::{Error, Result};

/// Poisson tail mass at which the photon-number sum stops.
const POISSON_TAIL: f64 = 1e-12;

/// Intermediate quantities of one BB84 evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bb84Intermediate {
    pub p_mu: f64,
    pub eta_dead: f64,
    pub q_mu: f64,
    pub q_1: f64,
    pub visibility: f64,
    pub e_mu: f64,
    pub e_1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bb84Rate {
    /// Secret bits per pulse, clamped at zero.
    pub per_pulse: f64,
    pub bits_per_s: f64,
    pub detail: Bb84Intermediate,
}

/// Click probability for an `n`-photon pulse over end-to-end efficiency `eta`.
pub fn yield_n(n: u32, eta: f64, p_dc: f64) -> f64 {
    let miss = (1.0 - eta).powi(n as i32);
    (1.0 - miss) + miss * p_dc
}

fn poisson_terms(mu: f64) -> impl Iterator<Item = (u32, f64)> {
    let mut n = 0u32;
    let mut term = (-mu).exp();
    let mut mass = 0.0;
    std::iter::from_fn(move || {
        if 1.0 - mass < POISSON_TAIL || n > 10_000 {
            return None;
        }
        let out = (n, term);
        mass += term;
        n += 1;
        term *= mu / n as f64;
        Some(out)
    })
}

/// Per-pulse click probability `sum_n Y_n Poisson_n(mu)`, truncated once the
/// remaining Poisson mass drops below 1e-12.
pub fn gain_mu(mu: f64, eta: f64, p_dc: f64) -> f64 {
    poisson_terms(mu).map(|(n, w)| yield_n(n, eta, p_dc) * w).sum()
}

/// Closed form of [`gain_mu`], `1 - (1 - p_dc) exp(-mu eta)`.
pub fn gain_mu_closed(mu: f64, eta: f64, p_dc: f64) -> f64 {
    -(1.0 - p_dc) * (-mu * eta).exp_m1() + p_dc
}

/// Interference visibility `mu eta_f eta_d / (mu eta_f eta_d + 2 P_e)` with
/// `P_e = p_e_base + p_dc`.
pub fn visibility(mu: f64, eta_f: f64, eta_d: f64, p_dc: f64, p_e_base: f64) -> f64 {
    let signal = mu * eta_f * eta_d;
    let denom = signal + 2.0 * (p_e_base + p_dc);
    if denom <= 0.0 {
        0.0
    } else {
        signal / denom
    }
}

pub fn qber(visibility: f64) -> f64 {
    (1.0 - visibility) / 2.0
}

/// One row of the decoy system: intensity, its gain and its measured QBER.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyObservation {
    pub intensity: f64,
    /// Click probability before dead time, `p_nu`.
    pub gain: f64,
    pub qber: f64,
}

/// Least-squares `e_1` from decoy observations.
///
/// Each row reads `p E = Y_0 P_0 / 2 + e_1 (p - Y_0 P_0)` once the common
/// dead-time factor is divided out.
pub fn fit_from_observations(rows: &[DecoyObservation], p_dc: f64) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for row in rows {
        let vacuum = p_dc * (-row.intensity).exp();
        let a = row.gain - vacuum;
        let b = row.gain * row.qber - vacuum / 2.0;
        num += a * b;
        den += a * a;
    }
    if !(den > 0.0) {
        return Err(Error::DegenerateFit);
    }
    Ok((num / den).clamp(0.0, 0.5))
}

/// Single-photon error rate fitted over `params.decoy_intensities` at
/// end-to-end efficiency `eta`.
pub fn fit_single_photon_error(params: &ProtocolParams, eta: f64) -> Result<f64> {
    if params.decoy_intensities.len() < 2 {
        return Err(Error::InvalidParams("need at least two decoy intensities".into()));
    }
    let p_dc = dark_count_prob(&params.detector);
    let rows: Vec<_> = params
        .decoy_intensities
        .iter()
        .map(|&nu| DecoyObservation {
            intensity: nu,
            gain: gain_mu(nu, eta, p_dc),
            qber: qber(visibility(nu, eta, 1.0, p_dc, params.p_e_base)),
        })
        .collect();
    fit_from_observations(&rows, p_dc)
}

/// Rate over a total channel loss in dB.
pub fn secure_rate_bb84(loss_db: f64, params: &ProtocolParams) -> Result<Bb84Rate> {
    let eta_f = transmittance(loss_db)?;
    let det = &params.detector;
    let eta = eta_f * det.efficiency;
    let p_dc = dark_count_prob(det);
    let mu = params.mu;

    let p_mu = gain_mu(mu, eta, p_dc);
    let eta_dead = dead_time_factor(p_mu, det, params.f_rep_hz);
    let q_mu = p_mu * eta_dead;
    let q_1 = yield_n(1, eta, p_dc) * mu * (-mu).exp() * eta_dead;
    let v = visibility(mu, eta_f, det.efficiency, p_dc, params.p_e_base);
    let e_mu = qber(v);
    let e_1 = match fit_single_photon_error(params, eta) {
        Ok(e) => e,
        Err(Error::DegenerateFit) => 0.5,
        Err(e) => return Err(e),
    };

    let raw = -q_mu * params.f_ec * h2(e_mu) + q_1 * (1.0 - h2(e_1));
    let per_pulse = if raw < RATE_FLOOR { 0.0 } else { raw };
    Ok(Bb84Rate {
        per_pulse,
        bits_per_s: per_pulse * params.f_rep_hz,
        detail: Bb84Intermediate {
            p_mu,
            eta_dead,
            q_mu,
            q_1,
            visibility: v,
            e_mu,
            e_1,
        },
    })
}

/// Rate over `length_km` of fibre.
pub fn secure_rate_bb84_km(length_km: f64, params: &ProtocolParams) -> Result<Bb84Rate> {
    secure_rate_bb84(params.fibre_loss_db(length_km), params)
}
