//! Twin-field QKD key rate for asymmetric arms.
//!
//! The lossier arm always sends the strong intensity and the other arm is
//! attenuated so that both arrive at the measuring node with the same mean
//! photon number. Phase errors are bounded with the photon-number expansion,
//! truncated at `2 * truncation + 1` photons per arm; all terms beyond it are
//! charged as certain clicks.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::common::{
    dark_count_prob, dead_time_factor, h2, transmittance, DetectorProfile, PhaseErrorNorm, ProtocolParams, RATE_FLOOR,
};
use crate::error::{Error, Result};

/// Default photon-pair truncation index of the phase-error sum.
pub const DEFAULT_TRUNCATION: usize = 5;

/// Largest photon number the combinatorial tables support.
pub const MAX_PHOTONS: usize = 17;

/// Loss quantum of the rate cache, in dB.
pub const CACHE_QUANTUM_DB: f64 = 0.01;

static CLAMP_LOGGED: AtomicBool = AtomicBool::new(false);

/// One twin-field link as seen from the measuring node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TfArms {
    /// Channel loss of each arm in dB, detector efficiency excluded.
    pub loss_a_db: f64,
    pub loss_b_db: f64,
    /// Arm transmittance including detector efficiency.
    pub eta_a: f64,
    pub eta_b: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
}

impl TfArms {
    /// Arms from explicit transmittances and intensities. Losses are recorded
    /// as the equivalent dB of `eta`.
    pub fn new(eta_a: f64, eta_b: f64, s_a: f64, s_b: f64) -> Self {
        Self {
            loss_a_db: -10.0 * eta_a.log10(),
            loss_b_db: -10.0 * eta_b.log10(),
            eta_a,
            eta_b,
            s_a,
            s_b,
            gamma_a: s_a * eta_a,
            gamma_b: s_b * eta_b,
        }
    }

    /// Arms for channel losses in dB with matched intensities.
    pub fn from_losses(loss_a_db: f64, loss_b_db: f64, params: &ProtocolParams) -> Result<Self> {
        let eff = params.detector.efficiency;
        let eta_a = transmittance(loss_a_db)? * eff;
        let eta_b = transmittance(loss_b_db)? * eff;
        let (s_a, s_b) = match_intensities(eta_a, eta_b, params.s_strong)?;
        Ok(Self {
            loss_a_db,
            loss_b_db,
            ..Self::new(eta_a, eta_b, s_a, s_b)
        })
    }
}

/// Intensities that equalise the arrival intensity `s_i * eta_i`.
pub fn match_intensities(eta_a: f64, eta_b: f64, s_strong: f64) -> Result<(f64, f64)> {
    if !(eta_a > 0.0 && eta_b > 0.0) {
        return Err(Error::UnusableLink);
    }
    Ok(if eta_a < eta_b {
        (s_strong, s_strong * eta_a / eta_b)
    } else if eta_b < eta_a {
        (s_strong * eta_b / eta_a, s_strong)
    } else {
        (s_strong, s_strong)
    })
}

/// X-basis announcement probabilities with and without dead time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClickProbs {
    /// `p'_XX`, identical for both single-click outcomes.
    pub p_prime: f64,
    pub eta_dead_10: f64,
    pub eta_dead_01: f64,
    pub p_xx_10: f64,
    pub p_xx_01: f64,
}

fn interference(arms: &TfArms, phi: f64, theta: f64) -> (f64, f64) {
    let x = (arms.gamma_a * arms.gamma_b).sqrt() * phi.cos() * theta.cos();
    let mean = 0.5 * (arms.gamma_a + arms.gamma_b);
    (x, mean)
}

pub fn click_probability(
    arms: &TfArms,
    p_dc: f64,
    phi: f64,
    theta: f64,
    profile: &DetectorProfile,
    f_rep: f64,
) -> ClickProbs {
    let (x, mean) = interference(arms, phi, theta);
    // 1/2 (1-p)(e^-x + e^x) e^-m - (1-p)^2 e^-2m, rearranged so that the
    // low-intensity cancellation happens inside expm1.
    let half_sinh = (0.5 * x).sinh();
    let bracket = 2.0 * half_sinh * half_sinh - (-mean).exp_m1() + p_dc * (-mean).exp();
    let p_prime = ((1.0 - p_dc) * (-mean).exp() * bracket).clamp(0.0, 1.0);
    // p'_XX(1,1) is dropped from the dead-time load.
    let eta_dead = dead_time_factor(p_prime, profile, f_rep);
    ClickProbs {
        p_prime,
        eta_dead_10: eta_dead,
        eta_dead_01: eta_dead,
        p_xx_10: p_prime * eta_dead,
        p_xx_01: p_prime * eta_dead,
    }
}

/// X-basis bit error rate. Returns 1/2 when the ratio is 0/0.
pub fn bit_error_x(arms: &TfArms, p_dc: f64, phi: f64, theta: f64) -> f64 {
    let (x, mean) = interference(arms, phi, theta);
    let dark = p_dc * (-mean).exp();
    let num = (-x).exp_m1() - (-mean).exp_m1() + dark;
    let half_sinh = (0.5 * x).sinh();
    let den = 2.0 * (2.0 * half_sinh * half_sinh - (-mean).exp_m1() + dark);
    if den == 0.0 {
        return 0.5;
    }
    let e = num / den;
    if e.is_nan() {
        0.5
    } else {
        e.clamp(0.0, 1.0)
    }
}

fn factorials() -> [u128; 2 * MAX_PHOTONS + 1] {
    let mut f = [1u128; 2 * MAX_PHOTONS + 1];
    for i in 1..f.len() {
        f[i] = f[i - 1] * i as u128;
    }
    f
}

fn binomials() -> Vec<Vec<u128>> {
    let n = 2 * MAX_PHOTONS + 1;
    let mut c = vec![vec![0u128; n]; n];
    for i in 0..n {
        c[i][0] = 1;
        for j in 1..=i {
            c[i][j] = c[i - 1][j - 1] + if j < i { c[i - 1][j] } else { 0 };
        }
    }
    c
}

/// Misalignment-dependent weights of the Z-basis click sum.
///
/// `weight[k][l]` is everything in the printed `q_ZZ` expression that depends
/// on the number of arriving photons `(k, l)` but not on the transmittances.
#[derive(Debug, Clone)]
pub struct QzzTable {
    max_photons: usize,
    weight: Vec<Vec<f64>>,
    binom: Vec<Vec<f64>>,
}

impl QzzTable {
    pub fn new(theta_a: f64, theta_b: f64, max_photons: usize) -> Self {
        assert!(
            max_photons <= MAX_PHOTONS,
            "photon bound {max_photons} exceeds {MAX_PHOTONS}"
        );
        let fact = factorials();
        let c = binomials();
        let ff = |n: usize| fact[n] as f64;
        let cc = |n: usize, k: usize| c[n][k] as f64;
        let (ca, sa) = (theta_a.cos(), theta_a.sin());
        let (cb, sb) = (theta_b.cos(), theta_b.sin());
        let pw = |base: f64, e: usize| base.powi(e as i32);

        let n = max_photons + 1;
        let mut weight = vec![vec![0.0; n]; n];
        for k in 0..n {
            for l in 0..n {
                let mut inner = 0.0;
                for m in 0..=k {
                    for p in 0..=l {
                        let lo = (m + p).saturating_sub(l);
                        let hi = k.min(m + p);
                        for q in lo..=hi {
                            inner += cc(k, m)
                                * cc(l, p)
                                * cc(k, q)
                                * cc(l, m + p - q)
                                * ff(m + p)
                                * ff(k + l - m - p)
                                * pw(ca, m + q)
                                * pw(cb, m + p - q)
                                * pw(sa, 2 * k - m - q)
                                * pw(sb, 2 * l + q - m - 2 * p);
                        }
                    }
                }
                weight[k][l] = inner / (2f64.powi(k as i32 + 1) * ff(k) * ff(l));
            }
        }
        let binom = (0..n).map(|i| (0..n).map(|j| cc(i, j)).collect()).collect();
        Self {
            max_photons,
            weight,
            binom,
        }
    }

    pub fn max_photons(&self) -> usize {
        self.max_photons
    }

    /// Binomial arrival probabilities `C(n,k) eta^k (1-eta)^(n-k)` for all
    /// `n, k <= max_photons`.
    fn arrivals(&self, eta: f64) -> Vec<Vec<f64>> {
        let n = self.max_photons + 1;
        let mut up = vec![1.0; n];
        let mut down = vec![1.0; n];
        for i in 1..n {
            up[i] = up[i - 1] * eta;
            down[i] = down[i - 1] * (1.0 - eta);
        }
        (0..n)
            .map(|total| {
                (0..=total)
                    .map(|k| self.binom[total][k] * up[k] * down[total - k])
                    .collect()
            })
            .collect()
    }

    /// The printed `q_ZZ(n_a, n_b)`, before clamping.
    pub fn raw(&self, n_a: usize, n_b: usize, eta_a: f64, eta_b: f64) -> f64 {
        self.raw_with(&self.arrivals(eta_a)[n_a], &self.arrivals(eta_b)[n_b], eta_a, eta_b)
    }

    fn raw_with(&self, arr_a: &[f64], arr_b: &[f64], eta_a: f64, eta_b: f64) -> f64 {
        let n_a = arr_a.len() - 1;
        let n_b = arr_b.len() - 1;
        let mut sum = 0.0;
        for (k, &wa) in arr_a.iter().enumerate() {
            let row = &self.weight[k];
            let mut acc = 0.0;
            for (l, &wb) in arr_b.iter().enumerate() {
                acc += wb * row[l];
            }
            sum += wa * acc;
        }
        sum - (1.0 - eta_a).powi(n_a as i32) * (1.0 - eta_b).powi(n_b as i32)
    }

    /// `q_ZZ` clamped to `[0, 1]`.
    pub fn clamped(&self, n_a: usize, n_b: usize, eta_a: f64, eta_b: f64) -> f64 {
        clamp_probability(self.raw(n_a, n_b, eta_a, eta_b))
    }
}

fn clamp_probability(raw: f64) -> f64 {
    if raw < 0.0 && !CLAMP_LOGGED.swap(true, Ordering::Relaxed) {
        log::info!("q_ZZ evaluated to {raw:e}; clamping negative Z-basis click probabilities to 0");
    }
    raw.clamp(0.0, 1.0)
}

/// The printed Z-basis click sum, before clamping.
pub fn q_zz_printed(n_a: usize, n_b: usize, eta_a: f64, eta_b: f64, theta_a: f64, theta_b: f64) -> f64 {
    QzzTable::new(theta_a, theta_b, n_a.max(n_b)).raw(n_a, n_b, eta_a, eta_b)
}

/// Z-basis click probability for `(n_a, n_b)` photons, clamped to `[0, 1]`.
pub fn q_zz(n_a: usize, n_b: usize, eta_a: f64, eta_b: f64, theta_a: f64, theta_b: f64) -> f64 {
    clamp_probability(q_zz_printed(n_a, n_b, eta_a, eta_b, theta_a, theta_b))
}

/// Z-basis click probability after dark counts and dead time. Photon numbers
/// above the table bound are charged as certain clicks.
pub fn p_zz(n_a: usize, n_b: usize, arms: &TfArms, p_dc: f64, eta_dead: f64, table: &QzzTable) -> f64 {
    if n_a > table.max_photons() || n_b > table.max_photons() {
        return 1.0;
    }
    let q = table.clamped(n_a, n_b, arms.eta_a, arms.eta_b);
    p_zz_from_q(q, n_a, n_b, arms, p_dc, eta_dead)
}

fn p_zz_from_q(q: f64, n_a: usize, n_b: usize, arms: &TfArms, p_dc: f64, eta_dead: f64) -> f64 {
    let miss = (1.0 - arms.eta_a).powi(n_a as i32) * (1.0 - arms.eta_b).powi(n_b as i32);
    ((1.0 - p_dc) * q + (1.0 - p_dc) * p_dc * miss) * eta_dead
}

/// Coherent-state amplitudes `alpha^n / sqrt(n!)` for `n = j, j + 2, ...`,
/// returned as (terms up to the truncation, sum of the remaining tail).
fn amplitudes(alpha: f64, parity: usize, truncation: usize) -> (Vec<f64>, f64) {
    let mut head = Vec::with_capacity(truncation + 1);
    let mut tail = 0.0;
    // c_n built incrementally: c_n = c_{n-1} * alpha / sqrt(n)
    let mut c = 1.0;
    let mut n = 0usize;
    let mut m = 0usize;
    loop {
        if n % 2 == parity {
            if m <= truncation {
                head.push(c);
            } else {
                tail += c;
                if c == 0.0 || c < tail * 1e-18 || m > truncation + 200 {
                    break;
                }
            }
            m += 1;
        }
        n += 1;
        c *= alpha / (n as f64).sqrt();
    }
    (head, tail)
}

/// Upper bound on the phase error rate for one announcement outcome.
pub fn phase_error_upper(arms: &TfArms, p_dc: f64, eta_dead: f64, table: &QzzTable, truncation: usize) -> f64 {
    assert!(
        2 * truncation < table.max_photons(),
        "table bound {} too small for truncation {truncation}",
        table.max_photons()
    );
    let alpha_a = arms.s_a.sqrt();
    let alpha_b = arms.s_b.sqrt();
    let arr_a = table.arrivals(arms.eta_a);
    let arr_b = table.arrivals(arms.eta_b);

    let mut bound = 0.0;
    for j in 0..2 {
        let (head_a, tail_a) = amplitudes(alpha_a, j, truncation);
        let (head_b, tail_b) = amplitudes(alpha_b, j, truncation);
        let mut inner = 0.0;
        for (ma, &ca) in head_a.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let na = 2 * ma + j;
            for (mb, &cb) in head_b.iter().enumerate() {
                if cb == 0.0 {
                    continue;
                }
                let nb = 2 * mb + j;
                let q = clamp_probability(table.raw_with(&arr_a[na], &arr_b[nb], arms.eta_a, arms.eta_b));
                let p = p_zz_from_q(q, na, nb, arms, p_dc, eta_dead);
                inner += ca * cb * p.sqrt();
            }
        }
        // Every term with either index past the truncation has p_ZZ = 1.
        let head_sum_a: f64 = head_a.iter().sum();
        let head_sum_b: f64 = head_b.iter().sum();
        inner += tail_a * (head_sum_b + tail_b) + head_sum_a * tail_b;
        bound += inner * inner;
    }
    bound
}

/// Intermediate quantities of one twin-field evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TfIntermediate {
    pub p_xx_10: f64,
    pub p_xx_01: f64,
    pub eta_dead: f64,
    pub e_x: f64,
    /// Phase-error bound before any normalisation.
    pub e_z_upp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TfRate {
    pub per_pulse: f64,
    pub bits_per_s: f64,
    pub arms: Option<TfArms>,
    pub detail: Option<TfIntermediate>,
}

impl TfRate {
    const ZERO: TfRate = TfRate {
        per_pulse: 0.0,
        bits_per_s: 0.0,
        arms: None,
        detail: None,
    };
}

/// Twin-field rate evaluator with its combinatorial tables built once.
#[derive(Debug, Clone)]
pub struct TfModel {
    params: ProtocolParams,
    table: QzzTable,
    truncation: usize,
}

impl TfModel {
    pub fn new(params: &ProtocolParams) -> Result<Self> {
        Self::with_truncation(params, DEFAULT_TRUNCATION)
    }

    pub fn with_truncation(params: &ProtocolParams, truncation: usize) -> Result<Self> {
        params.validate()?;
        let photons = 2 * truncation + 1;
        if photons > MAX_PHOTONS {
            return Err(Error::InvalidParams(format!(
                "truncation {truncation} needs {photons} photons, limit is {MAX_PHOTONS}"
            )));
        }
        Ok(Self {
            params: params.clone(),
            table: QzzTable::new(params.theta_a, params.theta_b, photons),
            truncation,
        })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn table(&self) -> &QzzTable {
        &self.table
    }

    /// Rate for arm losses in dB (channel only, detector efficiency is
    /// applied per arm).
    ///
    /// The printed Z-basis sum is not symmetric under exchanging the senders,
    /// so the lossier arm is always evaluated as arm A; the result does not
    /// depend on how the two senders are labelled.
    pub fn rate(&self, loss_a_db: f64, loss_b_db: f64) -> Result<TfRate> {
        for loss in [loss_a_db, loss_b_db] {
            if !(loss >= 0.0) {
                return Err(Error::NegativeLoss(loss));
            }
        }
        let (hi, lo) = if loss_a_db >= loss_b_db {
            (loss_a_db, loss_b_db)
        } else {
            (loss_b_db, loss_a_db)
        };
        let arms = match TfArms::from_losses(hi, lo, &self.params) {
            Ok(arms) => arms,
            Err(Error::UnusableLink) => return Ok(TfRate::ZERO),
            Err(e) => return Err(e),
        };
        Ok(self.rate_for_arms(&arms))
    }

    pub fn rate_for_arms(&self, arms: &TfArms) -> TfRate {
        let p = &self.params;
        let p_dc = dark_count_prob(&p.detector);
        let clicks = click_probability(arms, p_dc, p.phi, p.theta, &p.detector, p.f_rep_hz);
        let e_x = bit_error_x(arms, p_dc, p.phi, p.theta);
        let e_z = phase_error_upper(arms, p_dc, clicks.eta_dead_10, &self.table, self.truncation);
        let e_z_01 = if clicks.eta_dead_01 == clicks.eta_dead_10 {
            e_z
        } else {
            phase_error_upper(arms, p_dc, clicks.eta_dead_01, &self.table, self.truncation)
        };
        let outcome = |p_xx: f64, bound: f64| {
            let e_z = match p.phase_error_norm {
                PhaseErrorNorm::PerClick if p_xx > 0.0 => bound / p_xx,
                PhaseErrorNorm::PerClick => 0.5,
                PhaseErrorNorm::Unnormalized => bound,
            };
            p_xx * (1.0 - h2(e_x) - h2(e_z.min(0.5)))
        };
        let raw = outcome(clicks.p_xx_10, e_z).max(0.0) + outcome(clicks.p_xx_01, e_z_01).max(0.0);
        let per_pulse = if raw < RATE_FLOOR { 0.0 } else { raw };
        TfRate {
            per_pulse,
            bits_per_s: per_pulse * p.f_rep_hz,
            arms: Some(*arms),
            detail: Some(TfIntermediate {
                p_xx_10: clicks.p_xx_10,
                p_xx_01: clicks.p_xx_01,
                eta_dead: clicks.eta_dead_10,
                e_x,
                e_z_upp: e_z,
            }),
        }
    }

    /// Rate for a symmetric link of `total_km` with the measuring node at the
    /// midpoint.
    pub fn symmetric_rate_km(&self, total_km: f64) -> Result<TfRate> {
        let arm = self.params.fibre_loss_db(total_km / 2.0);
        self.rate(arm, arm)
    }
}

/// One-shot twin-field rate; builds a [`TfModel`] per call.
pub fn secure_rate_tf(loss_a_db: f64, loss_b_db: f64, params: &ProtocolParams) -> Result<TfRate> {
    TfModel::new(params)?.rate(loss_a_db, loss_b_db)
}

/// Snap a loss onto the cache grid.
pub fn quantize_loss(loss_db: f64) -> i64 {
    (loss_db / CACHE_QUANTUM_DB).round() as i64
}

/// Rate lookups on a 0.01 dB grid, optionally memoised.
///
/// Losses are always snapped to the grid before evaluation, so a cached and
/// an uncached evaluator return bit-identical values.
#[derive(Debug)]
pub struct TfRateCache {
    model: TfModel,
    memo: Option<Mutex<HashMap<(i64, i64), f64>>>,
}

impl TfRateCache {
    pub fn new(model: TfModel) -> Self {
        Self {
            model,
            memo: Some(Mutex::new(HashMap::new())),
        }
    }

    pub fn uncached(model: TfModel) -> Self {
        Self { model, memo: None }
    }

    pub fn model(&self) -> &TfModel {
        &self.model
    }

    /// Secret bits per second for arm losses in dB.
    pub fn bits_per_s(&self, loss_a_db: f64, loss_b_db: f64) -> Result<f64> {
        let (a, b) = (quantize_loss(loss_a_db), quantize_loss(loss_b_db));
        let key = if a >= b { (a, b) } else { (b, a) };
        if let Some(memo) = &self.memo {
            if let Some(&hit) = memo.lock().expect("rate cache poisoned").get(&key) {
                return Ok(hit);
            }
        }
        let value = self
            .model
            .rate(key.0 as f64 * CACHE_QUANTUM_DB, key.1 as f64 * CACHE_QUANTUM_DB)?
            .bits_per_s;
        if let Some(memo) = &self.memo {
            memo.lock().expect("rate cache poisoned").insert(key, value);
        }
        Ok(value)
    }

    pub fn len(&self) -> usize {
        self.memo
            .as_ref()
            .map_or(0, |m| m.lock().expect("rate cache poisoned").len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
