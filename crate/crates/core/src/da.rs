//! Generalized firm-proposing deferred acceptance.
//!
//! Starting from a firm-quasi-stable `Y⁰`, each step offers some `X^t` with
//! `Y^{t-1} ⊊ X^t ⊆ C_F(Γ(Y^{t-1}))` and sets `Y^t = C_W(X^t)`, stopping at the
//! first stable `Y^t`. How much of the bound is offered is up to a
//! [`ProposalRule`]; the outcome does not depend on it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::choice::choose_group;
use crate::error::{Error, Result};
use crate::lattice::{step_cap, BlairOrder};
use crate::model::{Market, Side, View};
use crate::rng::SplitMix64;
use crate::set::ContractSet;
use crate::stability::{
    blocks_unchecked, firm_choice_of_gamma, quasi_stable_unchecked, satisfy_unchecked, stable_unchecked,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProposalStrategy {
    /// Offer the whole bound.
    Full,
    /// Add the eligible contract with the least id.
    SingleLex,
    /// Add a non-empty random subset of the eligible contracts.
    RandomSubset { seed: u64 },
}

impl ProposalStrategy {
    /// Parses the command-line names `full`, `single` and `random`.
    pub fn from_name(name: &str, seed: u64) -> Result<Self> {
        match name {
            "full" => Ok(Self::Full),
            "single" => Ok(Self::SingleLex),
            "random" => Ok(Self::RandomSubset { seed }),
            other => Err(Error::Input(format!(
                "unknown strategy {other:?} (expected full, single or random)"
            ))),
        }
    }

    pub fn rule(self) -> Box<dyn ProposalRule> {
        match self {
            Self::Full => Box::new(FullRule),
            Self::SingleLex => Box::new(SingleLexRule),
            Self::RandomSubset { seed } => Box::new(RandomSubsetRule {
                rng: SplitMix64::new(seed),
            }),
        }
    }
}

impl fmt::Display for ProposalStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Full => f.write_str("full"),
            Self::SingleLex => f.write_str("single"),
            Self::RandomSubset { seed } => write!(f, "random(seed={seed})"),
        }
    }
}

/// Picks `X^t` given `Y^{t-1}` and the bound `C_F(Γ(Y^{t-1}))`.
///
/// `eligible = bound \ current` is never empty when this is called. Returning a
/// set outside `current ⊊ X ⊆ bound` aborts the run.
pub trait ProposalRule {
    fn propose(&mut self, current: &ContractSet, bound: &ContractSet, eligible: &ContractSet) -> ContractSet;
}

struct FullRule;

impl ProposalRule for FullRule {
    fn propose(&mut self, _current: &ContractSet, bound: &ContractSet, _eligible: &ContractSet) -> ContractSet {
        bound.clone()
    }
}

/// Contract indices follow id order, so the least index is the least id.
struct SingleLexRule;

impl ProposalRule for SingleLexRule {
    fn propose(&mut self, current: &ContractSet, _bound: &ContractSet, eligible: &ContractSet) -> ContractSet {
        current.with(eligible.first().expect("eligible set is non-empty"))
    }
}

/// One coin per eligible contract in id order; if every coin is tails, one
/// uniformly drawn eligible contract instead.
struct RandomSubsetRule {
    rng: SplitMix64,
}

impl ProposalRule for RandomSubsetRule {
    fn propose(&mut self, current: &ContractSet, _bound: &ContractSet, eligible: &ContractSet) -> ContractSet {
        let picked: ContractSet = eligible.iter().filter(|_| self.rng.coin()).collect();
        if picked.is_empty() {
            let all: Vec<usize> = eligible.iter().collect();
            current.with(all[self.rng.below(all.len())])
        } else {
            current.union(&picked)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaStep {
    /// `X^t`.
    pub proposals: ContractSet,
    /// `Y^t = C_W(X^t)`.
    pub allocation: ContractSet,
    /// `Z^t = Y^t \ Y^{t-1}`.
    pub added: ContractSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaTrace {
    pub start: ContractSet,
    pub steps: Vec<DaStep>,
    pub outcome: ContractSet,
    pub strategy: String,
}

impl DaTrace {
    /// `Y^t`, with `Y^0` the start.
    pub fn allocation_at(&self, t: usize) -> &ContractSet {
        if t == 0 {
            &self.start
        } else {
            &self.steps[t - 1].allocation
        }
    }
}

fn workers_choice(view: &View<'_>, y: &ContractSet) -> ContractSet {
    choose_group(view.market(), Side::Workers, view.workers(), y)
}

pub fn da_run(view: &View<'_>, start: &ContractSet, strategy: ProposalStrategy) -> Result<DaTrace> {
    let mut rule = strategy.rule();
    da_run_with(view, start, rule.as_mut(), &strategy.to_string())
}

/// Runs with a caller-supplied rule; `label` is recorded as the trace's strategy.
pub fn da_run_with(view: &View<'_>, start: &ContractSet, rule: &mut dyn ProposalRule, label: &str) -> Result<DaTrace> {
    view.check_within(start, "starting allocation")?;
    let m = view.market();
    if !quasi_stable_unchecked(view, start) {
        return Err(Error::Precondition(format!(
            "{} is not firm-quasi-stable in {view}",
            m.format_set(start)
        )));
    }
    let cap = step_cap(view);
    let mut steps = Vec::new();
    let mut current = start.clone();
    loop {
        let bound = firm_choice_of_gamma(view, &current);
        if !current.is_subset(&bound) {
            return Err(Error::Internal(format!(
                "step {}: Y = {} is not contained in C_F(Γ(Y)) = {}",
                steps.len() + 1,
                m.format_set(&current),
                m.format_set(&bound)
            )));
        }
        if bound == current {
            break;
        }
        if steps.len() >= cap {
            return Err(Error::Internal(format!("deferred acceptance exceeded {cap} steps")));
        }
        let eligible = bound.difference(&current);
        let proposals = rule.propose(&current, &bound, &eligible);
        if !(current.is_subset(&proposals) && proposals != current && proposals.is_subset(&bound)) {
            return Err(Error::Internal(format!(
                "step {}: proposal {} violates {} ⊊ X ⊆ {}",
                steps.len() + 1,
                m.format_set(&proposals),
                m.format_set(&current),
                m.format_set(&bound)
            )));
        }
        let allocation = workers_choice(view, &proposals);
        let added = allocation.difference(&current);
        current = allocation.clone();
        steps.push(DaStep {
            proposals,
            allocation,
            added,
        });
    }
    debug_assert!(stable_unchecked(view, &current));
    Ok(DaTrace {
        start: start.clone(),
        steps,
        outcome: current,
        strategy: label.to_string(),
    })
}

/// The outcome `DA(Y⁰)`, computed with the full strategy.
pub fn da_outcome(view: &View<'_>, start: &ContractSet) -> Result<ContractSet> {
    Ok(da_run(view, start, ProposalStrategy::Full)?.outcome)
}

/// `DA(∅)`: the worker-pessimal, firm-optimal stable allocation.
pub fn worker_pessimal(view: &View<'_>) -> Result<ContractSet> {
    da_outcome(view, &ContractSet::new())
}

/// A trace property that failed, with the step it failed at (0 is the start,
/// `steps.len() + 1` the outcome).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceDefect {
    pub step: usize,
    pub property: &'static str,
    pub detail: String,
}

impl fmt::Display for TraceDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {} ({})", self.step, self.property, self.detail)
    }
}

impl std::error::Error for TraceDefect {}

impl From<TraceDefect> for Error {
    fn from(d: TraceDefect) -> Error {
        Error::violation(d.property, format!("step {}: {}", d.step, d.detail))
    }
}

/// Re-derives every step of `trace` from the definitions.
pub fn verify_trace(view: &View<'_>, trace: &DaTrace) -> Result<(), TraceDefect> {
    let m = view.market();
    let fmt = |y: &ContractSet| m.format_set(y);
    let defect = |step, property, detail: String| Err(TraceDefect { step, property, detail });
    let inside = |y: &ContractSet| y.is_subset(view.contracts()) && m.is_allocation(y);
    let workers = BlairOrder::of(view, Side::Workers);

    if !inside(&trace.start) || !quasi_stable_unchecked(view, &trace.start) {
        return defect(0, "start is quasi-stable", fmt(&trace.start));
    }
    let mut prev = trace.start.clone();
    for (i, step) in trace.steps.iter().enumerate() {
        let t = i + 1;
        let (x, y, z) = (&step.proposals, &step.allocation, &step.added);
        if stable_unchecked(view, &prev) {
            return defect(
                t,
                "runs only from unstable allocations",
                format!("{} is already stable", fmt(&prev)),
            );
        }
        let bound = firm_choice_of_gamma(view, &prev);
        if !(prev.is_subset(x) && x != &prev && x.is_subset(&bound)) {
            return defect(
                t,
                "step rule",
                format!(
                    "X = {} is not strictly above {} within {}",
                    fmt(x),
                    fmt(&prev),
                    fmt(&bound)
                ),
            );
        }
        let chosen = workers_choice(view, x);
        if y != &chosen {
            return defect(
                t,
                "Y = C_W(X)",
                format!("recorded {}, recomputed {}", fmt(y), fmt(&chosen)),
            );
        }
        if !inside(y) || !quasi_stable_unchecked(view, y) {
            return defect(t, "every iterate is quasi-stable", fmt(y));
        }
        if !workers.dominates_unchecked(m, y, &prev) {
            return defect(
                t,
                "iterates ascend for workers",
                format!("{} does not dominate {}", fmt(y), fmt(&prev)),
            );
        }
        if z != &y.difference(&prev) {
            return defect(
                t,
                "Z = Y \\ Y_prev",
                format!("recorded {}, recomputed {}", fmt(z), fmt(&y.difference(&prev))),
            );
        }
        if z.is_empty() || !blocks_unchecked(view, &prev, z) {
            return defect(
                t,
                "Z blocks the previous allocation",
                format!("{} against {}", fmt(z), fmt(&prev)),
            );
        }
        let satisfied = satisfy_unchecked(view, &prev, z);
        if &satisfied != y {
            return defect(
                t,
                "Y is the previous allocation with Z satisfied",
                format!("satisfying {} gives {}, recorded {}", fmt(z), fmt(&satisfied), fmt(y)),
            );
        }
        prev = y.clone();
    }
    let end = trace.steps.len() + 1;
    if trace.outcome != prev {
        return defect(
            end,
            "outcome is the last iterate",
            format!("{} vs {}", fmt(&trace.outcome), fmt(&prev)),
        );
    }
    if !stable_unchecked(view, &trace.outcome) {
        return defect(end, "outcome is stable", fmt(&trace.outcome));
    }
    Ok(())
}

/// `t X^t Z^t Y^t` per line, ids sorted, with a header and the outcome.
pub fn format_trace(market: &Market, trace: &DaTrace) -> String {
    let mut out = format!(
        "strategy {}\nstart {}\n",
        trace.strategy,
        market.format_set(&trace.start)
    );
    for (i, s) in trace.steps.iter().enumerate() {
        out.push_str(&format!(
            "t={} X={} Z={} Y={}\n",
            i + 1,
            market.format_set(&s.proposals),
            market.format_set(&s.added),
            market.format_set(&s.allocation)
        ));
    }
    out.push_str(&format!("outcome {}\n", market.format_set(&trace.outcome)));
    out
}
