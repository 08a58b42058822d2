//! Probability schemes, severity, risk index and the spread across schemes.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::case::BusId;
use crate::engine::ScenarioOutcome;
use crate::powerflow::PowerFlowStatus;
use crate::relay::RelayType;

/// Value carried by every score field of an unavailable relay.
pub const SENTINEL: f64 = -1.0;

/// Share of each relay in the substation's total severe-set cardinality.
/// `None` when every size is zero.
pub fn probability_connectivity(severe_sizes: &[usize]) -> Option<Vec<f64>> {
    let total: usize = severe_sizes.iter().sum();
    (total > 0).then(|| {
        severe_sizes
            .iter()
            .map(|&s| s as f64 / total as f64)
            .collect()
    })
}

pub fn probability_equal(k_count: usize) -> Vec<f64> {
    vec![1.0 / k_count as f64; k_count]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomDraw {
    /// Uniform draws on the open interval (0, 1).
    pub raw: Vec<f64>,
    /// `raw` divided by its sum.
    pub scaled: Vec<f64>,
    pub seed: u64,
}

impl RandomDraw {
    pub fn from_raw(raw: Vec<f64>, seed: u64) -> Self {
        let sum: f64 = raw.iter().sum();
        let scaled = raw.iter().map(|r| r / sum).collect();
        Self { raw, scaled, seed }
    }

    fn sample(rng: &mut ChaCha8Rng, k_count: usize, seed: u64) -> Self {
        let raw = (0..k_count).map(|_| rng.sample(Open01)).collect();
        Self::from_raw(raw, seed)
    }
}

pub fn probability_random(k_count: usize, seed: u64) -> RandomDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RandomDraw::sample(&mut rng, k_count, seed)
}

/// Random-scheme probabilities for one substation, averaged over `trials`
/// draws. The stream depends only on the master seed and the substation id.
pub fn substation_random(master_seed: u64, substation: BusId, k_count: usize, trials: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(substation as u64);
    let mut acc = vec![0.0; k_count];
    for _ in 0..trials {
        let draw = RandomDraw::sample(&mut rng, k_count, master_seed);
        for (a, p) in acc.iter_mut().zip(&draw.scaled) {
            *a += p;
        }
    }
    if trials > 1 {
        acc.iter_mut().for_each(|a| *a /= trials as f64);
    }
    acc
}

/// Converged: share of the substation's controlled power. Otherwise: the
/// system total over the substation total, which is at least 1. `None` when
/// the substation controls nothing.
pub fn severity(
    status: PowerFlowStatus,
    controlled_power: f64,
    substation_power_sum: f64,
    system_power_sum: f64,
) -> Option<f64> {
    if substation_power_sum <= 0.0 {
        return None;
    }
    Some(if status.is_converged() {
        controlled_power / substation_power_sum
    } else {
        system_power_sum / substation_power_sum
    })
}

/// Returns the index and whether it was capped.
pub fn risk_index(pr: f64, sr: f64, diverged: bool) -> (f64, bool) {
    if diverged {
        (1.0, true)
    } else {
        (pr * sr, false)
    }
}

/// Mean and population standard deviation of the three scheme indices.
pub fn sigma(r_c: f64, r_r: f64, r_e: f64) -> (f64, f64) {
    if r_c == r_r && r_r == r_e {
        return (r_c, 0.0);
    }
    let mean = (r_c + r_r + r_e) / 3.0;
    let var = ((r_c - mean).powi(2) + (r_r - mean).powi(2) + (r_e - mean).powi(2)) / 3.0;
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiskRecord {
    pub substation: BusId,
    pub relay_type: RelayType,
    pub available: bool,
    pub status: Option<PowerFlowStatus>,
    pub controlled_power_mw: f64,
    pub severe_size: usize,
    pub pr_connectivity: f64,
    pub pr_random: f64,
    pub pr_equal: f64,
    /// Uncapped severity.
    pub severity: f64,
    pub r_connectivity: f64,
    pub r_random: f64,
    pub r_equal: f64,
    pub r_average: f64,
    pub sigma: f64,
    pub capped: bool,
}

impl RiskRecord {
    fn sentinel(o: &ScenarioOutcome) -> Self {
        Self {
            substation: o.substation,
            relay_type: o.relay_type,
            available: false,
            status: None,
            controlled_power_mw: o.controlled_power_mw,
            severe_size: o.severe_size,
            pr_connectivity: SENTINEL,
            pr_random: SENTINEL,
            pr_equal: SENTINEL,
            severity: SENTINEL,
            r_connectivity: SENTINEL,
            r_random: SENTINEL,
            r_equal: SENTINEL,
            r_average: SENTINEL,
            sigma: SENTINEL,
            capped: false,
        }
    }

    pub fn is_critical(&self) -> bool {
        self.available && self.r_average == 1.0
    }
}

/// Scores an ordered outcome list (grouped by substation).
pub fn score(outcomes: &[ScenarioOutcome], seed: u64, trials: usize) -> Vec<RiskRecord> {
    let groups: Vec<&[ScenarioOutcome]> = outcomes
        .chunk_by(|a, b| a.substation == b.substation)
        .collect();
    let substation_sum = |g: &[ScenarioOutcome]| -> f64 {
        g.iter()
            .filter(|o| o.available)
            .map(|o| o.controlled_power_mw)
            .sum()
    };
    let system_sum: f64 = groups.iter().map(|g| substation_sum(g)).sum();

    let mut records = Vec::with_capacity(outcomes.len());
    for group in groups {
        let live: Vec<&ScenarioOutcome> = group.iter().filter(|o| o.available).collect();
        let sub_sum = substation_sum(group);
        let sizes: Vec<usize> = live.iter().map(|o| o.severe_size).collect();
        let scored = match (live.is_empty(), probability_connectivity(&sizes)) {
            (false, Some(pr_c)) if sub_sum > 0.0 => Some(pr_c),
            _ => None,
        };
        let Some(pr_c) = scored else {
            records.extend(group.iter().map(RiskRecord::sentinel));
            continue;
        };
        let pr_r = substation_random(seed, group[0].substation, live.len(), trials);
        let pr_e = probability_equal(live.len());

        let mut j = 0;
        for o in group {
            if !o.available {
                records.push(RiskRecord::sentinel(o));
                continue;
            }
            let status = o.status.unwrap_or(PowerFlowStatus::Diverged);
            let diverged = !status.is_converged();
            let sr = severity(status, o.controlled_power_mw, sub_sum, system_sum).expect("positive sum");
            let (r_c, capped) = risk_index(pr_c[j], sr, diverged);
            let (r_r, _) = risk_index(pr_r[j], sr, diverged);
            let (r_e, _) = risk_index(pr_e[j], sr, diverged);
            let (r_a, s) = sigma(r_c, r_r, r_e);
            records.push(RiskRecord {
                substation: o.substation,
                relay_type: o.relay_type,
                available: true,
                status: Some(status),
                controlled_power_mw: o.controlled_power_mw,
                severe_size: o.severe_size,
                pr_connectivity: pr_c[j],
                pr_random: pr_r[j],
                pr_equal: pr_e[j],
                severity: sr,
                r_connectivity: r_c,
                r_random: r_r,
                r_equal: r_e,
                r_average: r_a,
                sigma: s,
                capped,
            });
            j += 1;
        }
    }
    records
}

/// Spread buckets. Risk indices lie in [0, 1], so no spread exceeds 1.
pub const SIGMA_BUCKETS: [(f64, f64); 4] = [(0.0, 0.01), (0.01, 0.05), (0.05, 0.1), (0.1, 1.0)];

pub const BIN_WIDTH: f64 = 0.025;
/// Three values in [0, 1] cannot spread further than sqrt(2)/3.
pub const BIN_COUNT: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_start: f64,
    pub bin_end: f64,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaHistogram {
    pub total: usize,
    /// Right-closed buckets; the first also holds 0.
    pub buckets: Vec<HistogramBin>,
    /// Right-closed bins of width 0.025 from 0; the first also holds 0.
    pub bins: Vec<HistogramBin>,
}

impl SigmaHistogram {
    /// Fraction of values at or below 0.1.
    pub fn fraction_within_tenth(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let n: usize = self.buckets[..3].iter().map(|b| b.count).sum();
        n as f64 / self.total as f64
    }
}

fn finish(edges: impl Iterator<Item = (f64, f64)>, counts: Vec<usize>, total: usize) -> Vec<HistogramBin> {
    edges
        .zip(counts)
        .map(|((bin_start, bin_end), count)| HistogramBin {
            bin_start,
            bin_end,
            count,
            fraction: if total == 0 { 0.0 } else { count as f64 / total as f64 },
        })
        .collect()
}

/// Bins finite, non-negative sigmas; anything else (sentinels) is skipped.
pub fn sigma_histogram(sigmas: &[f64]) -> SigmaHistogram {
    let values: Vec<f64> = sigmas
        .iter()
        .copied()
        .filter(|s| s.is_finite() && *s >= 0.0)
        .collect();
    let edge = |k: usize| k as f64 * BIN_WIDTH;

    let mut buckets = vec![0; SIGMA_BUCKETS.len()];
    let mut bins = vec![0; BIN_COUNT];
    for &s in &values {
        let b = SIGMA_BUCKETS
            .iter()
            .position(|&(_, hi)| s <= hi)
            .unwrap_or(SIGMA_BUCKETS.len() - 1);
        buckets[b] += 1;
        let k = (0..BIN_COUNT).find(|&k| s <= edge(k + 1)).unwrap_or(BIN_COUNT - 1);
        bins[k] += 1;
    }
    let total = values.len();
    SigmaHistogram {
        total,
        buckets: finish(SIGMA_BUCKETS.into_iter(), buckets, total),
        bins: finish((0..BIN_COUNT).map(|k| (edge(k), edge(k + 1))), bins, total),
    }
}
