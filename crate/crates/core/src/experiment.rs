//! Monte Carlo sweeps over box sizes: zero-capacity thresholds and capacity
//! ratios between the four solutions.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::common::{DetectorProfile, ProtocolParams};
use crate::error::{Error, Result};
use crate::graph::{generate, GeneratorKind, GraphSpec};
use crate::pathloss::{build_loss_table, LossModel, SWITCH_ACCOUNTING};
use crate::placement::{optimize_placement, CandidateRates, GraphCapacities, RateModels, Solution};

/// A graph fails a solution when this fraction or more of the ensemble has a
/// zero-capacity pair.
pub const ZERO_FRACTION_LIMIT: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub box_sizes_km: Vec<f64>,
    pub n_graphs: usize,
    pub n_sources: usize,
    pub n_candidates: usize,
    pub n_bob: usize,
    pub target_mean_degree: f64,
    pub switch_db: f64,
    pub master_seed: u64,
    /// Box size at which the headline ratios are reported; must be on the grid.
    pub reference_box_km: f64,
    pub generator: GeneratorKind,
    /// Detector counts evaluated on every graph besides `n_bob`.
    pub bob_sweep: Vec<usize>,
    /// Shared protocol constants; the detector field is ignored.
    pub params: ProtocolParams,
    pub hot_detector: DetectorProfile,
    pub cold_detector: DetectorProfile,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            box_sizes_km: (1..=20).map(|k| 10.0 * k as f64).collect(),
            n_graphs: 50,
            n_sources: 40,
            n_candidates: 10,
            n_bob: 4,
            target_mean_degree: 3.5,
            switch_db: 0.0,
            master_seed: 2024,
            reference_box_km: 100.0,
            generator: GeneratorKind::default(),
            bob_sweep: vec![2, 3, 4, 5],
            params: ProtocolParams::default(),
            hot_detector: DetectorProfile::hot(),
            cold_detector: DetectorProfile::cold(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.box_sizes_km.is_empty() {
            return bad("box_sizes_km is empty".into());
        }
        if self.box_sizes_km.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return bad("box sizes must be finite and non-negative".into());
        }
        if self.box_sizes_km.windows(2).any(|w| w[0] >= w[1]) {
            return bad("box sizes must be strictly increasing".into());
        }
        if !self.box_sizes_km.contains(&self.reference_box_km) {
            return bad(format!("reference box {} km is not on the grid", self.reference_box_km));
        }
        if self.n_graphs == 0 {
            return bad("n_graphs must be at least 1".into());
        }
        for &n in std::iter::once(&self.n_bob).chain(&self.bob_sweep) {
            if n == 0 || n > self.n_candidates {
                return bad(format!("cannot switch on {n} of {} candidates", self.n_candidates));
            }
        }
        LossModel::new(self.params.alpha_db_per_km, self.switch_db)?;
        self.graph_spec(self.box_sizes_km[0]).validate()?;
        self.params.validate()?;
        self.hot_detector.validate()?;
        self.cold_detector.validate()
    }

    pub fn graph_spec(&self, box_km: f64) -> GraphSpec {
        GraphSpec::new(box_km, self.n_sources, self.n_candidates, self.target_mean_degree)
            .with_generator(self.generator)
    }

    pub fn loss_model(&self) -> Result<LossModel> {
        LossModel::new(self.params.alpha_db_per_km, self.switch_db)
    }

    pub fn rate_models(&self) -> Result<RateModels> {
        RateModels::with_detectors(&self.params, self.hot_detector, self.cold_detector, true)
    }
}

/// Seed for one trial, independent of scheduling order.
pub fn trial_seed(master_seed: u64, box_km: f64, trial: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(box_km.to_bits().to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// One value per solution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PerSolution<T> {
    pub bb84_uncooled: T,
    pub bb84_cooled: T,
    pub tf_uncooled: T,
    pub tf_cooled: T,
}

impl<T: Copy> PerSolution<T> {
    pub fn from_fn(mut f: impl FnMut(Solution) -> T) -> Self {
        Self {
            bb84_uncooled: f(Solution::Bb84Uncooled),
            bb84_cooled: f(Solution::Bb84Cooled),
            tf_uncooled: f(Solution::TfUncooled),
            tf_cooled: f(Solution::TfCooled),
        }
    }

    pub fn get(&self, s: Solution) -> T {
        match s {
            Solution::Bb84Uncooled => self.bb84_uncooled,
            Solution::Bb84Cooled => self.bb84_cooled,
            Solution::TfUncooled => self.tf_uncooled,
            Solution::TfCooled => self.tf_cooled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub box_km: f64,
    pub trial: usize,
    pub seed: u64,
    pub graph_sha256: String,
    pub capacity: PerSolution<f64>,
    pub zero_pairs: PerSolution<usize>,
    pub chosen_detectors: Vec<usize>,
    /// `(n_bob, network capacity)` of the cooled twin-field solution.
    pub bob_sweep: Vec<(usize, f64)>,
}

impl TrialRecord {
    pub fn has_zero(&self, s: Solution) -> bool {
        self.zero_pairs.get(s) > 0
    }
}

pub fn run_trial(box_km: f64, trial: usize, cfg: &ExperimentConfig, models: &RateModels) -> Result<TrialRecord> {
    let seed = trial_seed(cfg.master_seed, box_km, trial);
    let g = generate(&cfg.graph_spec(box_km), seed)?;
    let losses = build_loss_table(&g, &cfg.loss_model()?)?;
    let rates = CandidateRates::compute(&losses, models)?;
    let caps = GraphCapacities {
        baselines: crate::placement::baseline_capacities(&losses, models)?,
        placement: optimize_placement(&rates, cfg.n_bob)?,
    };
    let bob_sweep = cfg
        .bob_sweep
        .iter()
        .map(|&n| Ok((n, optimize_placement(&rates, n)?.network_capacity)))
        .collect::<Result<_>>()?;
    Ok(TrialRecord {
        box_km,
        trial,
        seed,
        graph_sha256: g.digest(),
        capacity: PerSolution::from_fn(|s| caps.capacity(s)),
        zero_pairs: PerSolution::from_fn(|s| caps.matrix(s).zero_pairs()),
        chosen_detectors: caps.placement.chosen.clone(),
        bob_sweep,
    })
}

/// Largest box size a solution survives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    Km(f64),
    /// Even the smallest grid size fails; carries that size.
    BelowMinimum(f64),
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Km(km) => write!(f, "{km}"),
            Threshold::BelowMinimum(min) => write!(f, "<{min}"),
        }
    }
}

/// Largest size whose zero-capacity fraction is below the limit.
///
/// `fractions` must be sorted by size and non-empty.
pub fn threshold(fractions: &[(f64, f64)]) -> Threshold {
    fractions
        .iter()
        .rev()
        .find(|&&(_, frac)| frac < ZERO_FRACTION_LIMIT)
        .map(|&(km, _)| Threshold::Km(km))
        .unwrap_or(Threshold::BelowMinimum(fractions[0].0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub mean: f64,
    /// Sample standard deviation; absent with fewer than two usable graphs.
    pub std: Option<f64>,
    pub n_used: usize,
    pub n_excluded: usize,
}

/// Per-graph `numer / denom`, then sample mean and standard deviation.
/// Graphs with a zero denominator are excluded and counted.
pub fn capacity_ratios(numer: &[f64], denom: &[f64]) -> Result<RatioStats> {
    assert_eq!(numer.len(), denom.len(), "one total per graph on both sides");
    if numer.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: numer.len(),
        });
    }
    let ratios: Vec<f64> = numer
        .iter()
        .zip(denom)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&n, &d)| n / d)
        .collect();
    if ratios.is_empty() {
        return Err(Error::AllDegenerate);
    }
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let std = (ratios.len() >= 2).then(|| (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    Ok(RatioStats {
        mean,
        std,
        n_used: ratios.len(),
        n_excluded: numer.len() - ratios.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionRow {
    pub solution: Solution,
    pub box_km: f64,
    pub zero_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    /// Denominator solution; the numerator is always the cooled twin-field one.
    pub solution: Solution,
    pub box_km: f64,
    /// Absent when fewer than two graphs exist or every denominator is zero.
    pub stats: Option<RatioStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BobRow {
    pub box_km: f64,
    pub n_bob: usize,
    pub mean_capacity: f64,
    /// Graphs on which capacity dropped when one more detector was allowed.
    pub decreases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub switch_accounting: String,
    pub fractions: Vec<FractionRow>,
    pub thresholds: PerSolution<Threshold>,
    pub ratios: Vec<RatioRow>,
    pub bob_sweep: Vec<BobRow>,
    pub trials: Vec<TrialRecord>,
}

pub const RATIO_DENOMINATORS: [Solution; 3] = [Solution::Bb84Uncooled, Solution::Bb84Cooled, Solution::TfUncooled];

impl ExperimentSummary {
    pub fn fractions_for(&self, s: Solution) -> Vec<(f64, f64)> {
        self.fractions
            .iter()
            .filter(|r| r.solution == s)
            .map(|r| (r.box_km, r.zero_fraction))
            .collect()
    }

    pub fn ratio(&self, denom: Solution, box_km: f64) -> Option<RatioStats> {
        self.ratios
            .iter()
            .find(|r| r.solution == denom && r.box_km == box_km)
            .and_then(|r| r.stats)
    }

    /// Ratios at the reference box size.
    pub fn reference_ratio(&self, denom: Solution) -> Option<RatioStats> {
        self.ratio(denom, self.config.reference_box_km)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_fractions_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["solution", "box_km", "zero_fraction"])?;
        for r in &self.fractions {
            w.write_record([
                r.solution.as_str().to_string(),
                r.box_km.to_string(),
                r.zero_fraction.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reference-size ratios, one row per denominator solution.
    pub fn write_ratios_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["solution", "mean", "std", "n_excluded"])?;
        for s in RATIO_DENOMINATORS {
            let (mean, std, excl) = match self.reference_ratio(s) {
                Some(r) => (
                    r.mean.to_string(),
                    r.std.map(|x| x.to_string()).unwrap_or_default(),
                    r.n_excluded.to_string(),
                ),
                None => Default::default(),
            };
            w.write_record([s.as_str().to_string(), mean, std, excl])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Plain-text table shaped like the published summary.
    pub fn render_table(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "|S|={} |C|={} |B|={} degree={} switch={} dB graphs={} generator={}\n",
            c.n_sources,
            c.n_candidates,
            c.n_bob,
            c.target_mean_degree,
            c.switch_db,
            c.n_graphs,
            c.generator.as_str()
        );
        out += &format!(
            "{:<16}{:>18}{:>28}\n",
            "solution",
            "0 capacity size/km",
            format!("ratio at {} km", c.reference_box_km)
        );
        for s in Solution::ALL {
            let ratio = if s == Solution::TfCooled {
                "-".to_string()
            } else {
                match self.reference_ratio(s) {
                    Some(RatioStats {
                        mean, std: Some(sd), ..
                    }) => format!("{mean:.3} +/- {sd:.3}"),
                    Some(RatioStats { mean, std: None, .. }) => format!("{mean:.3}"),
                    None => "n/a".to_string(),
                }
            };
            out += &format!(
                "{:<16}{:>18}{:>28}\n",
                s.as_str(),
                self.thresholds.get(s).to_string(),
                ratio
            );
        }
        out
    }
}

/// Fractions, thresholds, ratios and detector sweep from trial records.
pub fn summarize(cfg: &ExperimentConfig, trials: Vec<TrialRecord>) -> ExperimentSummary {
    let at = |km: f64| trials.iter().filter(move |t| t.box_km == km);
    let mut fractions = Vec::new();
    for s in Solution::ALL {
        for &km in &cfg.box_sizes_km {
            let n = at(km).count();
            let zeros = at(km).filter(|t| t.has_zero(s)).count();
            fractions.push(FractionRow {
                solution: s,
                box_km: km,
                zero_fraction: if n == 0 { f64::NAN } else { zeros as f64 / n as f64 },
            });
        }
    }
    let thresholds = PerSolution::from_fn(|s| {
        let f: Vec<(f64, f64)> = fractions
            .iter()
            .filter(|r| r.solution == s)
            .map(|r| (r.box_km, r.zero_fraction))
            .collect();
        threshold(&f)
    });
    let mut ratios = Vec::new();
    for s in RATIO_DENOMINATORS {
        for &km in &cfg.box_sizes_km {
            let numer: Vec<f64> = at(km).map(|t| t.capacity.tf_cooled).collect();
            let denom: Vec<f64> = at(km).map(|t| t.capacity.get(s)).collect();
            ratios.push(RatioRow {
                solution: s,
                box_km: km,
                stats: capacity_ratios(&numer, &denom).ok(),
            });
        }
    }
    let mut bob_sweep = Vec::new();
    let mut sweep = cfg.bob_sweep.clone();
    sweep.sort_unstable();
    sweep.dedup();
    for &km in &cfg.box_sizes_km {
        let n = at(km).count() as f64;
        for (k, &n_bob) in sweep.iter().enumerate() {
            let cap =
                |t: &TrialRecord, nb: usize| t.bob_sweep.iter().find(|(b, _)| *b == nb).map_or(f64::NAN, |&(_, c)| c);
            let decreases = if k == 0 {
                0
            } else {
                at(km).filter(|t| cap(t, n_bob) < cap(t, sweep[k - 1])).count()
            };
            bob_sweep.push(BobRow {
                box_km: km,
                n_bob,
                mean_capacity: at(km).map(|t| cap(t, n_bob)).sum::<f64>() / n,
                decreases,
            });
        }
    }
    ExperimentSummary {
        config: cfg.clone(),
        switch_accounting: SWITCH_ACCOUNTING.to_string(),
        fractions,
        thresholds,
        ratios,
        bob_sweep,
        trials,
    }
}

/// Run every (size, trial) cell and summarise.
pub fn sweep_and_summarize(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let models = cfg.rate_models()?;
    let cells: Vec<(f64, usize)> = cfg
        .box_sizes_km
        .iter()
        .flat_map(|&km| (0..cfg.n_graphs).map(move |t| (km, t)))
        .collect();
    let trials = cells
        .par_iter()
        .map(|&(km, t)| {
            let r = run_trial(km, t, cfg, &models);
            if t + 1 == cfg.n_graphs {
                log::info!("box {km} km done");
            }
            r
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(cfg, trials))
}

pub const RESULTS_JSON: &str = "results.json";
pub const FRACTIONS_CSV: &str = "fractions.csv";
pub const RATIOS_CSV: &str = "ratios.csv";

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Write the three result files into `dir`.
///
/// If any write fails, the full summary is saved to the system temp directory
/// before the first error is returned.
pub fn write_outputs(summary: &ExperimentSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    let json = summary.to_json()?;
    let mut fractions = Vec::new();
    summary.write_fractions_csv(&mut fractions)?;
    let mut ratios = Vec::new();
    summary.write_ratios_csv(&mut ratios)?;

    let mut written = Vec::new();
    let mut first_err = None;
    for (name, bytes) in [
        (RESULTS_JSON, json.as_bytes()),
        (FRACTIONS_CSV, &fractions[..]),
        (RATIOS_CSV, &ratios[..]),
    ] {
        let path = dir.join(name);
        match write_atomic(&path, bytes) {
            Ok(()) => written.push(path),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        None => Ok(written),
        Some(e) => {
            let salvage = std::env::temp_dir().join(format!("qkdnet-salvage-{}.json", std::process::id()));
            match std::fs::write(&salvage, &json) {
                Ok(()) => log::error!("results salvaged to {}", salvage.display()),
                Err(se) => log::error!("salvage to {} failed too: {se}", salvage.display()),
            }
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            box_sizes_km: vec![20.0, 60.0],
            reference_box_km: 60.0,
            n_graphs: 3,
            n_sources: 6,
            n_candidates: 4,
            n_bob: 2,
            bob_sweep: vec![1, 2, 3],
            ..Default::default()
        }
    }

    #[test]
    fn threshold_rule() {
        let f = [(90.0, 0.0), (100.0, 0.04), (110.0, 0.08), (120.0, 0.12)];
        assert_eq!(threshold(&f), Threshold::Km(110.0));
        assert_eq!(threshold(&[(10.0, 0.1), (20.0, 0.5)]), Threshold::BelowMinimum(10.0));
        assert_eq!(threshold(&[(10.0, 0.0), (20.0, 0.0)]), Threshold::Km(20.0));
        assert_eq!(Threshold::BelowMinimum(10.0).to_string(), "<10");
    }

    #[test]
    fn ratio_statistics() {
        let r = capacity_ratios(&[2.0, 4.0], &[1.0, 2.0]).unwrap();
        assert_eq!((r.mean, r.std, r.n_used, r.n_excluded), (2.0, Some(0.0), 2, 0));
        let same = capacity_ratios(&[3.0, 5.0, 7.0], &[3.0, 5.0, 7.0]).unwrap();
        assert_eq!((same.mean, same.std), (1.0, Some(0.0)));
        let r = capacity_ratios(&[1.0, 3.0, 5.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!((r.mean, r.n_excluded), (3.0, 1));
        assert_eq!(r.std, Some(8.0f64.sqrt()));
        assert!(matches!(
            capacity_ratios(&[1.0, 1.0], &[0.0, 0.0]),
            Err(Error::AllDegenerate)
        ));
        assert!(matches!(
            capacity_ratios(&[1.0], &[1.0]),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn seeds_differ_by_cell() {
        let a = trial_seed(1, 100.0, 0);
        assert_eq!(a, trial_seed(1, 100.0, 0));
        assert_ne!(a, trial_seed(1, 100.0, 1));
        assert_ne!(a, trial_seed(1, 110.0, 0));
        assert_ne!(a, trial_seed(2, 100.0, 0));
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let bad = [
            ExperimentConfig {
                box_sizes_km: vec![20.0, 10.0],
                ..tiny()
            },
            ExperimentConfig { n_graphs: 0, ..tiny() },
            ExperimentConfig {
                reference_box_km: 35.0,
                ..tiny()
            },
            ExperimentConfig { n_bob: 5, ..tiny() },
            ExperimentConfig {
                switch_db: -1.0,
                ..tiny()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(ExperimentConfig::from_json(r#"{"n_graphs": 2, "bogus": 1}"#).is_err());
        let cfg = ExperimentConfig::from_json(r#"{"n_graphs": 2, "params": {"mu": 0.1}}"#).unwrap();
        assert_eq!(cfg.n_graphs, 2);
    }

    #[test]
    fn extreme_boxes() {
        let cfg = ExperimentConfig {
            box_sizes_km: vec![1.0, 1000.0],
            reference_box_km: 1.0,
            ..tiny()
        };
        let models = cfg.rate_models().unwrap();
        let small = run_trial(1.0, 0, &cfg, &models).unwrap();
        let huge = run_trial(1000.0, 0, &cfg, &models).unwrap();
        for s in Solution::ALL {
            assert!(!small.has_zero(s), "{}", s.as_str());
            assert!(huge.has_zero(s), "{}", s.as_str());
        }
        assert_eq!(small, run_trial(1.0, 0, &cfg, &models).unwrap());
    }

    #[test]
    fn sweep_shape_and_replay() {
        let cfg = tiny();
        let s = sweep_and_summarize(&cfg).unwrap();
        assert_eq!(s.trials.len(), 6);
        assert_eq!(s.fractions.len(), 8);
        assert!(s.fractions.iter().all(|r| (0.0..=1.0).contains(&r.zero_fraction)));
        let text = s.to_json().unwrap();
        let back = ExperimentSummary::from_json(&text).unwrap();
        let replay = summarize(&back.config, back.trials.clone());
        assert_eq!(replay.to_json().unwrap(), text);
        assert!(s.render_table().contains("tf_cooled"));
    }

    #[test]
    fn outputs_written_atomically() {
        let dir = tempfile::tempdir().unwrap();
        let s = summarize(&tiny(), Vec::new());
        let files = write_outputs(&s, dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        let ratios = std::fs::read_to_string(dir.path().join(RATIOS_CSV)).unwrap();
        assert!(ratios.starts_with("solution,mean,std,n_excluded\n"));
        let missing = dir.path().join("nope");
        assert!(matches!(write_outputs(&s, &missing), Err(Error::Io { .. })));
    }
}
