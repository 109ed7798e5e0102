//! Agent preferences, the choice and rejection functions they induce, and
//! exhaustive verifiers for the preference conditions the rest of the crate
//! relies on.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::model::{Agent, Contract, Market, Side};
use crate::set::{select, ContractSet};

/// Verifiers refuse agents with more incident contracts than this.
pub const DEFAULT_VERIFY_CAP: usize = 12;

/// How an agent ranks the allocations of its incident contracts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChoiceSpec {
    /// Strictly descending list of acceptable allocations. Must contain the empty
    /// allocation; anything not listed ranks below it.
    Table { ranking: Vec<Vec<String>> },
    /// Scan `priority`, keeping an acceptable contract when its counterpart is not
    /// already used and fewer than `quota` contracts are held.
    Greedy {
        quota: usize,
        priority: Vec<String>,
        acceptable: Vec<String>,
    },
}

impl ChoiceSpec {
    /// The only choice function on an empty ground set.
    pub fn trivial() -> ChoiceSpec {
        ChoiceSpec::Table {
            ranking: vec![Vec::new()],
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Choice {
    Table {
        ranking: Vec<ContractSet>,
    },
    Greedy {
        quota: usize,
        priority: Vec<usize>,
        acceptable: ContractSet,
    },
}

pub(crate) struct CompileContext<'a> {
    pub agent: Agent,
    pub ground: &'a ContractSet,
    pub contract_ids: &'a HashMap<String, usize>,
    pub contracts: &'a [Contract],
    pub path: String,
}

impl CompileContext<'_> {
    fn err(&self, field: &str, message: impl Into<String>) -> Error {
        Error::Format {
            location: format!("{}{field}", self.path),
            message: message.into(),
        }
    }

    fn lookup(&self, field: &str, id: &str) -> Result<usize> {
        let idx = self
            .contract_ids
            .get(id)
            .copied()
            .ok_or_else(|| self.err(field, format!("unknown contract id {id:?}")))?;
        if !self.ground.contains(idx) {
            return Err(self.err(field, format!("contract {id:?} does not involve this agent")));
        }
        Ok(idx)
    }

    fn counterpart(&self, x: usize) -> usize {
        match self.agent.side() {
            Side::Workers => self.contracts[x].firm,
            Side::Firms => self.contracts[x].worker,
        }
    }

    fn ids(&self, set: &ContractSet) -> Vec<String> {
        set.iter().map(|x| self.contracts[x].id.clone()).collect()
    }
}

impl Choice {
    /// Validates `spec` against the agent's ground set `X_i` and returns the compiled
    /// choice function together with the normalized spec (member lists in id order).
    pub(crate) fn compile(spec: &ChoiceSpec, ctx: &CompileContext<'_>) -> Result<(Choice, ChoiceSpec)> {
        match spec {
            ChoiceSpec::Table { ranking } => {
                let mut entries = Vec::with_capacity(ranking.len());
                let mut seen = HashSet::new();
                let mut has_empty = false;
                for (i, entry) in ranking.iter().enumerate() {
                    let mut set = ContractSet::new();
                    let mut partners = HashSet::new();
                    for (j, id) in entry.iter().enumerate() {
                        let field = format!(".ranking[{i}][{j}]");
                        let x = ctx.lookup(&field, id)?;
                        if !set.insert(x) {
                            return Err(ctx.err(&field, format!("contract {id:?} repeated")));
                        }
                        if !partners.insert(ctx.counterpart(x)) {
                            return Err(ctx.err(&field, "entry holds two contracts with the same counterpart"));
                        }
                    }
                    if !seen.insert(set.clone()) {
                        return Err(ctx.err(&format!(".ranking[{i}]"), "allocation listed twice"));
                    }
                    has_empty |= set.is_empty();
                    entries.push(set);
                }
                if !has_empty {
                    return Err(ctx.err(".ranking", "the empty allocation must be listed"));
                }
                let normalized = ChoiceSpec::Table {
                    ranking: entries.iter().map(|s| ctx.ids(s)).collect(),
                };
                Ok((Choice::Table { ranking: entries }, normalized))
            }
            ChoiceSpec::Greedy {
                quota,
                priority,
                acceptable,
            } => {
                if *quota == 0 {
                    return Err(ctx.err(".quota", "quota must be positive"));
                }
                let mut order = Vec::with_capacity(priority.len());
                let mut covered = ContractSet::new();
                for (j, id) in priority.iter().enumerate() {
                    let field = format!(".priority[{j}]");
                    let x = ctx.lookup(&field, id)?;
                    if !covered.insert(x) {
                        return Err(ctx.err(&field, format!("contract {id:?} ranked twice")));
                    }
                    order.push(x);
                }
                if &covered != ctx.ground {
                    let missing = ctx.ids(&ctx.ground.difference(&covered));
                    return Err(ctx.err(
                        ".priority",
                        format!("priority must cover every incident contract; missing {missing:?}"),
                    ));
                }
                let mut acc = ContractSet::new();
                for (j, id) in acceptable.iter().enumerate() {
                    let field = format!(".acceptable[{j}]");
                    let x = ctx.lookup(&field, id)?;
                    if !acc.insert(x) {
                        return Err(ctx.err(&field, format!("contract {id:?} listed twice")));
                    }
                }
                let normalized = ChoiceSpec::Greedy {
                    quota: *quota,
                    priority: priority.clone(),
                    acceptable: ctx.ids(&acc),
                };
                Ok((
                    Choice::Greedy {
                        quota: *quota,
                        priority: order,
                        acceptable: acc,
                    },
                    normalized,
                ))
            }
        }
    }
}

/// `C_i(Y)`. Contracts of `y` not involving `agent` are ignored.
pub fn choose(market: &Market, agent: Agent, y: &ContractSet) -> ContractSet {
    let yi = market.agent_slice(y, agent);
    if yi.is_empty() {
        return yi;
    }
    match market.choice(agent) {
        Choice::Table { ranking } => ranking
            .iter()
            .find(|entry| entry.is_subset(&yi))
            .cloned()
            .unwrap_or_default(),
        Choice::Greedy {
            quota,
            priority,
            acceptable,
        } => {
            let other = agent.side().opposite();
            let mut taken = ContractSet::new();
            let mut used: SmallVec<[usize; 8]> = SmallVec::new();
            for &x in priority {
                if used.len() == *quota {
                    break;
                }
                if !yi.contains(x) || !acceptable.contains(x) {
                    continue;
                }
                let partner = market.endpoint(x, other);
                if !used.contains(&partner) {
                    used.push(partner);
                    taken.insert(x);
                }
            }
            taken
        }
    }
}

/// `R_i(Y) = Y_i \ C_i(Y)`.
pub fn reject(market: &Market, agent: Agent, y: &ContractSet) -> ContractSet {
    market.agent_slice(y, agent).difference(&choose(market, agent, y))
}

/// `C_A(Y)` for agents `A` all on `side`.
pub fn choose_group(market: &Market, side: Side, agents: &[usize], y: &ContractSet) -> ContractSet {
    let mut out = ContractSet::new();
    for &i in agents {
        out = out.union(&choose(market, Agent::on(side, i), y));
    }
    out
}

/// `R_A(Y)` for agents `A` all on `side`.
pub fn reject_group(market: &Market, side: Side, agents: &[usize], y: &ContractSet) -> ContractSet {
    let mut out = ContractSet::new();
    for &i in agents {
        out = out.union(&reject(market, Agent::on(side, i), y));
    }
    out
}

fn one_side(agents: &[Agent]) -> Result<(Side, Vec<usize>)> {
    let Some(first) = agents.first() else {
        // the empty union; either side gives the same answer
        return Ok((Side::Workers, Vec::new()));
    };
    let side = first.side();
    if agents.iter().any(|a| a.side() != side) {
        return Err(Error::Input("agent set mixes workers and firms".into()));
    }
    Ok((side, agents.iter().map(|a| a.index()).collect()))
}

/// Union of the agents' choices. All agents must be on one side.
pub fn choose_side(market: &Market, agents: &[Agent], y: &ContractSet) -> Result<ContractSet> {
    let (side, idx) = one_side(agents)?;
    Ok(choose_group(market, side, &idx, y))
}

/// Union of the agents' rejections. All agents must be on one side.
pub fn reject_side(market: &Market, agents: &[Agent], y: &ContractSet) -> Result<ContractSet> {
    let (side, idx) = one_side(agents)?;
    Ok(reject_group(market, side, &idx, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Substitutability,
    PathIndependence,
    RejectionMonotonicity,
    LawOfAggregateDemand,
}

impl Property {
    pub const ALL: [Property; 4] = [
        Property::Substitutability,
        Property::PathIndependence,
        Property::RejectionMonotonicity,
        Property::LawOfAggregateDemand,
    ];
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Substitutability => "substitutability",
            Property::PathIndependence => "path-independence",
            Property::RejectionMonotonicity => "rejection-monotonicity",
            Property::LawOfAggregateDemand => "law-of-aggregate-demand",
        })
    }
}

/// A pair of contract sets on which a property fails. For every property except
/// path independence, `z ⊆ y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub y: Vec<String>,
    pub z: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub agent: String,
    pub property: Property,
    pub passed: bool,
    pub witness: Option<Witness>,
}

/// `C_i` tabulated over every subset of `X_i`, indexed by local bitmask.
struct ChoiceTable {
    members: Vec<usize>,
    chosen: Vec<u32>,
}

impl ChoiceTable {
    fn build(market: &Market, agent: Agent, cap: usize) -> Result<ChoiceTable> {
        let members: Vec<usize> = market.incident(agent).iter().collect();
        if members.len() > cap {
            return Err(Error::TooLarge {
                what: format!("agent {}", market.agent_name(agent)),
                size: members.len(),
                cap,
            });
        }
        let n = members.len();
        let chosen = (0u32..(1u32 << n))
            .map(|mask| {
                let c = choose(market, agent, &select(&members, mask as u64));
                members
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| c.contains(x))
                    .fold(0u32, |acc, (i, _)| acc | (1 << i))
            })
            .collect();
        Ok(ChoiceTable { members, chosen })
    }

    fn full(&self) -> u32 {
        ((1u64 << self.members.len()) - 1) as u32
    }

    /// Every pair `z ⊆ y`, `y` ascending and `z` ascending within it.
    fn find_nested(&self, mut bad: impl FnMut(u32, u32) -> bool) -> Option<(u32, u32)> {
        for y in 0..=self.full() {
            let mut z = 0u32;
            loop {
                if bad(y, z) {
                    return Some((y, z));
                }
                if z == y {
                    break;
                }
                z = (z | !y).wrapping_add(1) & y;
            }
        }
        None
    }

    fn ids(&self, market: &Market, mask: u32) -> Vec<String> {
        market.ids(&select(&self.members, mask as u64))
    }
}

/// Exhaustively checks `property` for `agent` over all relevant pairs of subsets of `X_i`.
pub fn verify(market: &Market, agent: Agent, property: Property, cap: usize) -> Result<VerificationReport> {
    let t = ChoiceTable::build(market, agent, cap)?;
    let c = &t.chosen;
    let found = match property {
        Property::Substitutability => t.find_nested(|y, z| c[y as usize] & z & !c[z as usize] != 0),
        Property::RejectionMonotonicity => t.find_nested(|y, z| (z & !c[z as usize]) & !(y & !c[y as usize]) != 0),
        Property::LawOfAggregateDemand => t.find_nested(|y, z| c[z as usize].count_ones() > c[y as usize].count_ones()),
        Property::PathIndependence => {
            let full = t.full();
            let mut hit = None;
            'outer: for y in 0..=full {
                for z in 0..=full {
                    if c[(y | z) as usize] != c[(c[y as usize] | z) as usize] {
                        hit = Some((y, z));
                        break 'outer;
                    }
                }
            }
            hit
        }
    };
    Ok(VerificationReport {
        agent: market.agent_name(agent).to_string(),
        property,
        passed: found.is_none(),
        witness: found.map(|(y, z)| Witness {
            y: t.ids(market, y),
            z: t.ids(market, z),
        }),
    })
}

pub fn verify_substitutable(market: &Market, agent: Agent) -> Result<VerificationReport> {
    verify(market, agent, Property::Substitutability, DEFAULT_VERIFY_CAP)
}

pub fn verify_path_independent(market: &Market, agent: Agent) -> Result<VerificationReport> {
    verify(market, agent, Property::PathIndependence, DEFAULT_VERIFY_CAP)
}

pub fn verify_rejection_monotone(market: &Market, agent: Agent) -> Result<VerificationReport> {
    verify(market, agent, Property::RejectionMonotonicity, DEFAULT_VERIFY_CAP)
}

pub fn verify_lad(market: &Market, agent: Agent) -> Result<VerificationReport> {
    verify(market, agent, Property::LawOfAggregateDemand, DEFAULT_VERIFY_CAP)
}

/// Every property for every agent, agents in market order (workers first).
pub fn verify_all(market: &Market, cap: usize) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for agent in market.all_agents() {
        for p in Property::ALL {
            out.push(verify(market, agent, p, cap)?);
        }
    }
    Ok(out)
}

/// Whether every agent satisfies `property`.
pub fn all_agents_satisfy(market: &Market, property: Property, cap: usize) -> Result<bool> {
    for agent in market.all_agents() {
        if !verify(market, agent, property, cap)?.passed {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Re-evaluates a failing report's witness directly through the definition.
/// Returns true iff the witness reproduces a violation.
pub fn replay_witness(market: &Market, report: &VerificationReport) -> Result<bool> {
    let Some(w) = &report.witness else {
        return Ok(false);
    };
    let agent = market.agent_by_id(&report.agent)?;
    let y = market.parse_set(&w.y)?;
    let z = market.parse_set(&w.z)?;
    let c = |s: &ContractSet| choose(market, agent, s);
    let r = |s: &ContractSet| reject(market, agent, s);
    Ok(match report.property {
        Property::Substitutability => z.is_subset(&y) && !c(&y).intersection(&z).is_subset(&c(&z)),
        Property::RejectionMonotonicity => z.is_subset(&y) && !r(&z).is_subset(&r(&y)),
        Property::LawOfAggregateDemand => z.is_subset(&y) && c(&z).len() > c(&y).len(),
        Property::PathIndependence => c(&y.union(&z)) != c(&c(&y).union(&z)),
    })
}
