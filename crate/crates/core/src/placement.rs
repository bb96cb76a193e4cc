//! Cooled-detector placement and network capacity for the four solutions.

use std::io::Write;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bb84::secure_rate_bb84;
use crate::common::{DetectorProfile, Profile, ProtocolParams};
use crate::error::{Error, Result};
use crate::pathloss::LossTable;
use crate::tf::{TfModel, TfRateCache};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solution {
    Bb84Uncooled,
    Bb84Cooled,
    TfUncooled,
    TfCooled,
}

impl Solution {
    pub const ALL: [Solution; 4] = [
        Solution::Bb84Uncooled,
        Solution::Bb84Cooled,
        Solution::TfUncooled,
        Solution::TfCooled,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Solution::Bb84Uncooled => "bb84_uncooled",
            Solution::Bb84Cooled => "bb84_cooled",
            Solution::TfUncooled => "tf_uncooled",
            Solution::TfCooled => "tf_cooled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCapacity {
    pub i: usize,
    pub j: usize,
    pub capacity: f64,
    /// Detector site serving the pair, for placed solutions with a nonzero rate.
    pub detector: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityMatrix {
    pub solution: Solution,
    pub pairs: Vec<PairCapacity>,
}

impl CapacityMatrix {
    /// Network capacity, summed in pair order.
    pub fn total(&self) -> f64 {
        self.pairs.iter().map(|p| p.capacity).sum()
    }

    pub fn zero_pairs(&self) -> usize {
        self.pairs.iter().filter(|p| p.capacity == 0.0).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_matrices_csv(std::slice::from_ref(self), out)
    }
}

/// `(i, j, solution, capacity_bits_per_s, detector)` rows for several matrices.
pub fn write_matrices_csv<W: Write>(matrices: &[CapacityMatrix], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "solution", "capacity_bits_per_s", "detector"])?;
    for m in matrices {
        for p in &m.pairs {
            w.write_record([
                p.i.to_string(),
                p.j.to_string(),
                m.solution.as_str().to_string(),
                p.capacity.to_string(),
                p.detector.map(|d| d.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementResult {
    pub chosen: Vec<usize>,
    pub network_capacity: f64,
    pub matrix: CapacityMatrix,
    pub zero_capacity_pairs: usize,
    pub subsets_evaluated: usize,
}

/// Rate evaluators for both detector profiles, sharing memo tables across
/// graphs.
#[derive(Debug)]
pub struct RateModels {
    bb84_hot: ProtocolParams,
    bb84_cold: ProtocolParams,
    tf_hot: TfRateCache,
    tf_cold: TfRateCache,
}

impl RateModels {
    /// `base` supplies everything except the detectors, which take their
    /// default hot and cold profiles.
    pub fn new(base: &ProtocolParams) -> Result<Self> {
        Self::with_detectors(base, DetectorProfile::hot(), DetectorProfile::cold(), true)
    }

    /// Same models with memoisation off.
    pub fn uncached(base: &ProtocolParams) -> Result<Self> {
        Self::with_detectors(base, DetectorProfile::hot(), DetectorProfile::cold(), false)
    }

    pub fn with_detectors(
        base: &ProtocolParams,
        hot: DetectorProfile,
        cold: DetectorProfile,
        memo: bool,
    ) -> Result<Self> {
        let with = |profile: Profile| ProtocolParams {
            detector: match profile {
                Profile::Hot => hot,
                Profile::Cold => cold,
            },
            ..base.clone()
        };
        let cache = |p: &ProtocolParams| -> Result<TfRateCache> {
            let model = TfModel::new(p)?;
            Ok(if memo {
                TfRateCache::new(model)
            } else {
                TfRateCache::uncached(model)
            })
        };
        let hot = with(Profile::Hot);
        let cold = with(Profile::Cold);
        Ok(Self {
            tf_hot: cache(&hot)?,
            tf_cold: cache(&cold)?,
            bb84_hot: hot,
            bb84_cold: cold,
        })
    }

    pub fn tf(&self, profile: Profile) -> &TfRateCache {
        match profile {
            Profile::Hot => &self.tf_hot,
            Profile::Cold => &self.tf_cold,
        }
    }

    pub fn bb84_params(&self, profile: Profile) -> &ProtocolParams {
        match profile {
            Profile::Hot => &self.bb84_hot,
            Profile::Cold => &self.bb84_cold,
        }
    }
}

/// Unordered source pairs `(i, j)` with `i < j`.
pub fn source_pairs(losses: &LossTable) -> Vec<(usize, usize)> {
    let mut s = losses.sources().to_vec();
    s.sort_unstable();
    s.iter().tuple_combinations().map(|(&i, &j)| (i, j)).collect()
}

/// Cooled twin-field rate for sources `i` and `j` measured at site `b`.
pub fn pair_capacity_tf(i: usize, j: usize, b: usize, losses: &LossTable, models: &RateModels) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidParams(format!("self pair ({i}, {i})")));
    }
    models
        .tf(Profile::Cold)
        .bits_per_s(losses.loss(i, b), losses.loss(j, b))
}

/// Cooled twin-field rate of every pair at every candidate site.
#[derive(Debug, Clone)]
pub struct CandidateRates {
    pub pairs: Vec<(usize, usize)>,
    pub candidates: Vec<usize>,
    /// `rates[pair][candidate]`, indices into the two lists above.
    pub rates: Vec<Vec<f64>>,
}

impl CandidateRates {
    pub fn compute(losses: &LossTable, models: &RateModels) -> Result<Self> {
        let pairs = source_pairs(losses);
        let candidates = losses.candidates().to_vec();
        let rates = pairs
            .par_iter()
            .map(|&(i, j)| {
                candidates
                    .iter()
                    .map(|&b| pair_capacity_tf(i, j, b, losses, models))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            pairs,
            candidates,
            rates,
        })
    }

    /// Network capacity with the given candidate indices switched on.
    pub fn score(&self, subset: &[usize]) -> f64 {
        self.rates
            .iter()
            .map(|row| subset.iter().map(|&c| row[c]).fold(0.0, f64::max))
            .sum()
    }

    fn matrix(&self, subset: &[usize]) -> CapacityMatrix {
        let pairs = self
            .pairs
            .iter()
            .zip(&self.rates)
            .map(|(&(i, j), row)| {
                let mut best: Option<(usize, f64)> = None;
                for &c in subset {
                    if row[c] > best.map_or(0.0, |b| b.1) {
                        best = Some((c, row[c]));
                    }
                }
                PairCapacity {
                    i,
                    j,
                    capacity: best.map_or(0.0, |b| b.1),
                    detector: best.map(|b| self.candidates[b.0]),
                }
            })
            .collect();
        CapacityMatrix {
            solution: Solution::TfCooled,
            pairs,
        }
    }

    /// Result for a fixed subset of candidate indices.
    pub fn result_for(&self, subset: &[usize], subsets_evaluated: usize) -> PlacementResult {
        let matrix = self.matrix(subset);
        PlacementResult {
            chosen: subset.iter().map(|&c| self.candidates[c]).collect(),
            network_capacity: matrix.total(),
            zero_capacity_pairs: matrix.zero_pairs(),
            matrix,
            subsets_evaluated,
        }
    }
}

fn check_n_bob(n_bob: usize, n_candidates: usize) -> Result<()> {
    if n_bob == 0 || n_bob > n_candidates {
        return Err(Error::InvalidParams(format!(
            "cannot switch on {n_bob} of {n_candidates} candidate sites"
        )));
    }
    Ok(())
}

/// Exhaustive search over every `n_bob`-subset of candidate sites.
///
/// Subsets are visited in lexicographic order and only a strictly better
/// score replaces the incumbent, so ties go to the smallest subset.
pub fn optimize_placement(rates: &CandidateRates, n_bob: usize) -> Result<PlacementResult> {
    check_n_bob(n_bob, rates.candidates.len())?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut evaluated = 0;
    for subset in (0..rates.candidates.len()).combinations(n_bob) {
        evaluated += 1;
        let score = rates.score(&subset);
        if best.as_ref().is_none_or(|b| score > b.1) {
            best = Some((subset, score));
        }
    }
    let (subset, _) = best.expect("at least one subset");
    Ok(rates.result_for(&subset, evaluated))
}

/// Greedy forward selection, used as a cross-check on the exhaustive search.
pub fn greedy_placement(rates: &CandidateRates, n_bob: usize) -> Result<PlacementResult> {
    check_n_bob(n_bob, rates.candidates.len())?;
    let mut chosen: Vec<usize> = Vec::with_capacity(n_bob);
    let mut evaluated = 0;
    while chosen.len() < n_bob {
        let mut best: Option<(usize, f64)> = None;
        for c in (0..rates.candidates.len()).filter(|c| !chosen.contains(c)) {
            let mut trial = chosen.clone();
            trial.push(c);
            evaluated += 1;
            let score = rates.score(&trial);
            if best.is_none_or(|b| score > b.1) {
                best = Some((c, score));
            }
        }
        chosen.push(best.expect("candidates remain").0);
    }
    chosen.sort_unstable();
    Ok(rates.result_for(&chosen, evaluated))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Baselines {
    pub bb84_uncooled: CapacityMatrix,
    pub bb84_cooled: CapacityMatrix,
    pub tf_uncooled: CapacityMatrix,
}

/// Point-to-point BB84 with each detector type, and uncooled twin-field with
/// the measuring node at the fibre midpoint of the route.
pub fn baseline_capacities(losses: &LossTable, models: &RateModels) -> Result<Baselines> {
    let pairs = source_pairs(losses);
    let rows = pairs
        .par_iter()
        .map(|&(i, j)| {
            let loss = losses.loss(i, j);
            let hot = secure_rate_bb84(loss, models.bb84_params(Profile::Hot))?.bits_per_s;
            let cold = secure_rate_bb84(loss, models.bb84_params(Profile::Cold))?.bits_per_s;
            let (a, b) = losses.midpoint_arms(i, j);
            let tf = models.tf(Profile::Hot).bits_per_s(a, b)?;
            Ok([hot, cold, tf])
        })
        .collect::<Result<Vec<[f64; 3]>>>()?;
    let matrix = |solution, k: usize| CapacityMatrix {
        solution,
        pairs: pairs
            .iter()
            .zip(&rows)
            .map(|(&(i, j), r)| PairCapacity {
                i,
                j,
                capacity: r[k],
                detector: None,
            })
            .collect(),
    };
    Ok(Baselines {
        bb84_uncooled: matrix(Solution::Bb84Uncooled, 0),
        bb84_cooled: matrix(Solution::Bb84Cooled, 1),
        tf_uncooled: matrix(Solution::TfUncooled, 2),
    })
}

/// Capacities of all four solutions on one graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphCapacities {
    pub baselines: Baselines,
    pub placement: PlacementResult,
}

impl GraphCapacities {
    pub fn evaluate(losses: &LossTable, models: &RateModels, n_bob: usize) -> Result<Self> {
        let rates = CandidateRates::compute(losses, models)?;
        Ok(Self {
            baselines: baseline_capacities(losses, models)?,
            placement: optimize_placement(&rates, n_bob)?,
        })
    }

    pub fn matrix(&self, s: Solution) -> &CapacityMatrix {
        match s {
            Solution::Bb84Uncooled => &self.baselines.bb84_uncooled,
            Solution::Bb84Cooled => &self.baselines.bb84_cooled,
            Solution::TfUncooled => &self.baselines.tf_uncooled,
            Solution::TfCooled => &self.placement.matrix,
        }
    }

    pub fn capacity(&self, s: Solution) -> f64 {
        match s {
            Solution::TfCooled => self.placement.network_capacity,
            _ => self.matrix(s).total(),
        }
    }
}
