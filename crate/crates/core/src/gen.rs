//! Seeded random markets.
//!
//! Streams: the root generator is `SplitMix64::new(seed)`. Contract slots of
//! the pair `(w, f)` draw from `root.fork(PAIRS).fork(w).fork(f)`; worker `w`'s
//! preferences from `root.fork(WORKERS).fork(w)` and firm `f`'s from
//! `root.fork(FIRMS).fork(f)`. Growing a market therefore leaves the draws of
//! existing pairs and agents alone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::choice::{verify_all, ChoiceSpec, VerificationReport, DEFAULT_VERIFY_CAP};
use crate::error::{Error, Result};
use crate::format::{ContractEntry, MarketFile};
use crate::model::Market;
use crate::rng::SplitMix64;

const PAIRS: u64 = 1;
const WORKERS: u64 = 2;
const FIRMS: u64 = 3;

/// Entries per random table, not counting the empty allocation.
const MAX_TABLE_ENTRIES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Every agent uses greedy choice: substitutable and LAD by construction.
    GreedyOnly,
    /// Each agent flips a coin between greedy choice and a random ranked table.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n_workers: usize,
    pub n_firms: usize,
    pub max_contracts_per_pair: usize,
    /// Probability that each contract slot of a pair is filled.
    pub density: f64,
    /// Inclusive quota bounds, used on both sides.
    pub quota_range: (usize, usize),
    /// Probability that an agent finds an incident contract acceptable.
    pub acceptability_rate: f64,
    pub seed: u64,
    pub family: Family,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n_workers: 2,
            n_firms: 2,
            max_contracts_per_pair: 1,
            density: 1.0,
            quota_range: (1, 1),
            acceptability_rate: 1.0,
            seed: 0,
            family: Family::GreedyOnly,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Input(m.to_string()));
        if self.n_workers == 0 || self.n_firms == 0 {
            return bad("need at least one worker and one firm");
        }
        if self.max_contracts_per_pair == 0 {
            return bad("max_contracts_per_pair must be positive");
        }
        if !(0.0..=1.0).contains(&self.density) {
            return bad("density must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.acceptability_rate) {
            return bad("acceptability_rate must lie in [0, 1]");
        }
        let (lo, hi) = self.quota_range;
        if lo == 0 || lo > hi {
            return bad("quota_range must satisfy 1 <= min <= max");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedMarket {
    pub market: Market,
    /// All four verifiers on every agent, in agent order.
    pub reports: Vec<VerificationReport>,
}

impl GeneratedMarket {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }
}

fn greedy(rng: &mut SplitMix64, incident: &[&ContractEntry], params: &GenParams) -> ChoiceSpec {
    let quota = rng.range_inclusive(params.quota_range.0, params.quota_range.1);
    let mut priority: Vec<String> = incident.iter().map(|c| c.id.clone()).collect();
    rng.shuffle(&mut priority);
    let acceptable = incident
        .iter()
        .filter(|_| rng.chance(params.acceptability_rate))
        .map(|c| c.id.clone())
        .collect();
    ChoiceSpec::Greedy {
        quota,
        priority,
        acceptable,
    }
}

/// Random ranked table; `counterpart` names the other endpoint of each contract.
fn table(
    rng: &mut SplitMix64,
    incident: &[&ContractEntry],
    counterpart: impl Fn(&ContractEntry) -> String,
) -> ChoiceSpec {
    let entries = rng.range_inclusive(0, MAX_TABLE_ENTRIES);
    let mut ranking: Vec<Vec<String>> = Vec::new();
    for _ in 0..entries {
        let mut used = Vec::new();
        let mut entry = Vec::new();
        for c in incident {
            let other = counterpart(c);
            if rng.coin() && !used.contains(&other) {
                used.push(other);
                entry.push(c.id.clone());
            }
        }
        entry.sort();
        if !entry.is_empty() && !ranking.contains(&entry) {
            ranking.push(entry);
        }
    }
    let at = rng.range_inclusive(0, ranking.len());
    ranking.insert(at, Vec::new());
    ChoiceSpec::Table { ranking }
}

pub fn gen_market(params: &GenParams) -> Result<GeneratedMarket> {
    params.validate()?;
    let root = SplitMix64::new(params.seed);
    let workers: Vec<String> = (1..=params.n_workers).map(|i| format!("w{i}")).collect();
    let firms: Vec<String> = (1..=params.n_firms).map(|i| format!("f{i}")).collect();

    let pairs = root.fork(PAIRS);
    let mut contracts = Vec::new();
    for (wi, w) in workers.iter().enumerate() {
        let per_worker = pairs.fork(wi as u64);
        for (fi, f) in firms.iter().enumerate() {
            let mut rng = per_worker.fork(fi as u64);
            for k in 0..params.max_contracts_per_pair {
                if rng.chance(params.density) {
                    contracts.push(ContractEntry {
                        id: format!("x_{w}_{f}_{k}"),
                        worker: w.clone(),
                        firm: f.clone(),
                        terms: format!("slot {k}"),
                    });
                }
            }
        }
    }
    contracts.sort_by(|a, b| a.id.cmp(&b.id));

    let mut choices = BTreeMap::new();
    for (side_tag, names, is_worker) in [(WORKERS, &workers, true), (FIRMS, &firms, false)] {
        let side = root.fork(side_tag);
        for (i, name) in names.iter().enumerate() {
            let incident: Vec<&ContractEntry> = contracts
                .iter()
                .filter(|c| if is_worker { &c.worker == name } else { &c.firm == name })
                .collect();
            if incident.len() > DEFAULT_VERIFY_CAP {
                return Err(Error::TooLarge {
                    what: format!("contracts of {name}"),
                    size: incident.len(),
                    cap: DEFAULT_VERIFY_CAP,
                });
            }
            let mut rng = side.fork(i as u64);
            let use_table = params.family == Family::Mixed && rng.coin();
            let spec = if use_table {
                table(&mut rng, &incident, |c| {
                    if is_worker {
                        c.firm.clone()
                    } else {
                        c.worker.clone()
                    }
                })
            } else {
                greedy(&mut rng, &incident, params)
            };
            choices.insert(name.clone(), spec);
        }
    }

    let market = Market::from_file(MarketFile {
        workers,
        firms,
        contracts,
        choices,
    })?;
    let reports = verify_all(&market, DEFAULT_VERIFY_CAP)?;
    if params.family == Family::GreedyOnly {
        if let Some(r) = reports.iter().find(|r| !r.passed) {
            return Err(Error::Internal(format!(
                "generated greedy agent {} fails {}",
                r.agent, r.property
            )));
        }
    }
    Ok(GeneratedMarket { market, reports })
}
