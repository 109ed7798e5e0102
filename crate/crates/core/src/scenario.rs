//! Disruptions: firms entering and workers leaving a market that was in
//! equilibrium, and the re-equilibration that follows.
//!
//! An event is a transition between two views of one base market. Before the
//! event only the incumbent firms `F'` trade, in `(W, F', X_{F'})`; afterwards
//! only the remaining workers `W'` do, in `(W', F, X_{W'})`. Dropping the
//! departed workers' contracts from an allocation of the first view gives a
//! quasi-stable restart in the second, and deferred acceptance from there
//! restores stability.
//!
//! Every operation checks its guarantees on the fly and reports a
//! [`Error::Violation`] if one fails.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::choice::{choose_group, verify, Property, DEFAULT_VERIFY_CAP};
use crate::da::{da_outcome, da_run, verify_trace, worker_pessimal, ProposalStrategy};
use crate::error::{Error, Result};
use crate::format::{json_error, load_market};
use crate::lattice::{join_w, BlairOrder};
use crate::model::{Agent, Market, Side, View};
use crate::set::ContractSet;
use crate::stability::{quasi_stable_unchecked, stable_unchecked};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    AddFirms,
    RemoveWorkers,
    Combined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisruptionEvent<'m> {
    pub kind: EventKind,
    pub entering_firms: Vec<usize>,
    pub exiting_workers: Vec<usize>,
    /// `(W, F', X_{F'})`.
    pub before: View<'m>,
    /// `(W', F, X_{W'})`.
    pub after: View<'m>,
}

impl<'m> DisruptionEvent<'m> {
    pub fn new(market: &'m Market, entering_firms: &[usize], exiting_workers: &[usize]) -> Result<Self> {
        let kind = match (entering_firms.is_empty(), exiting_workers.is_empty()) {
            (false, false) => EventKind::Combined,
            (true, false) => EventKind::RemoveWorkers,
            _ => EventKind::AddFirms,
        };
        Self::with_kind(market, kind, entering_firms, exiting_workers)
    }

    fn with_kind(
        market: &'m Market,
        kind: EventKind,
        entering_firms: &[usize],
        exiting_workers: &[usize],
    ) -> Result<Self> {
        let mut entering_firms = entering_firms.to_vec();
        let mut exiting_workers = exiting_workers.to_vec();
        entering_firms.sort_unstable();
        entering_firms.dedup();
        exiting_workers.sort_unstable();
        exiting_workers.dedup();
        let all_workers: Vec<usize> = (0..market.workers().len()).collect();
        let all_firms: Vec<usize> = (0..market.firms().len()).collect();
        if let Some(f) = entering_firms.iter().find(|&&f| f >= all_firms.len()) {
            return Err(Error::Input(format!("firm index {f} out of range")));
        }
        if let Some(w) = exiting_workers.iter().find(|&&w| w >= all_workers.len()) {
            return Err(Error::Input(format!("worker index {w} out of range")));
        }
        let incumbents: Vec<usize> = all_firms
            .iter()
            .copied()
            .filter(|f| !entering_firms.contains(f))
            .collect();
        let stayers: Vec<usize> = all_workers
            .iter()
            .copied()
            .filter(|w| !exiting_workers.contains(w))
            .collect();
        Ok(Self {
            kind,
            before: market.submarket(&all_workers, &incumbents)?,
            after: market.submarket(&stayers, &all_firms)?,
            entering_firms,
            exiting_workers,
        })
    }

    pub fn from_ids<S: AsRef<str>>(market: &'m Market, entering_firms: &[S], exiting_workers: &[S]) -> Result<Self> {
        let firms = market.parse_agents(Side::Firms, entering_firms)?;
        let workers = market.parse_agents(Side::Workers, exiting_workers)?;
        Self::new(market, &firms, &workers)
    }

    pub fn from_spec(market: &'m Market, spec: &EventSpec) -> Result<Self> {
        let (kind, firms, workers) = match spec {
            EventSpec::AddFirms { firms } => (EventKind::AddFirms, firms.as_slice(), &[][..]),
            EventSpec::RemoveWorkers { workers } => (EventKind::RemoveWorkers, &[][..], workers.as_slice()),
            EventSpec::Combined { firms, workers } => (EventKind::Combined, firms.as_slice(), workers.as_slice()),
        };
        let firms = market.parse_agents(Side::Firms, firms)?;
        let workers = market.parse_agents(Side::Workers, workers)?;
        Self::with_kind(market, kind, &firms, &workers)
    }

    pub fn market(&self) -> &'m Market {
        self.before.market()
    }

    pub fn is_identity(&self) -> bool {
        self.entering_firms.is_empty() && self.exiting_workers.is_empty()
    }

    /// `Y_{W'}`: drops the departed workers' contracts.
    pub fn restrict(&self, y: &ContractSet) -> ContractSet {
        self.market().restrict_allocation(y, self.after.workers())
    }
}

/// How an event appears in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EventSpec {
    AddFirms { firms: Vec<String> },
    RemoveWorkers { workers: Vec<String> },
    Combined { firms: Vec<String>, workers: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntrantSlice {
    pub firm: usize,
    /// The firm's contracts in the re-equilibrated outcome.
    pub outcome: ContractSet,
    /// The firm's contracts in the worker-pessimal allocation of the after-view.
    pub worker_pessimal: ContractSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioReport {
    pub kind: EventKind,
    pub start: ContractSet,
    /// `Y_{W'}`.
    pub restart: ContractSet,
    pub outcome: ContractSet,
    pub steps: usize,
    pub strategy: String,
    /// The after-view's worker-pessimal stable allocation.
    pub worker_pessimal: ContractSet,
    /// `outcome ⪰^B_{W'} Y`.
    pub remaining_workers_gain: bool,
    /// `Y ⪰^B_{F'} outcome`.
    pub incumbent_firms_lose: bool,
    pub new_entrant_slices: Vec<EntrantSlice>,
}

fn require_quasi_stable(view: &View<'_>, y: &ContractSet, what: &str) -> Result<()> {
    view.check_within(y, what)?;
    if quasi_stable_unchecked(view, y) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{what} {} is not firm-quasi-stable in {view}",
            view.market().format_set(y)
        )))
    }
}

fn require_stable(view: &View<'_>, y: &ContractSet, what: &str) -> Result<()> {
    view.check_within(y, what)?;
    if stable_unchecked(view, y) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{what} {} is not stable in {view}",
            view.market().format_set(y)
        )))
    }
}

/// `Y ↦ Y_{W'}` for `Y` quasi-stable before the event; the result is
/// quasi-stable after it.
pub fn apply_disruption(event: &DisruptionEvent<'_>, y: &ContractSet) -> Result<ContractSet> {
    require_quasi_stable(&event.before, y, "allocation")?;
    let restart = event.restrict(y);
    if !quasi_stable_unchecked(&event.after, &restart) {
        let m = event.market();
        return Err(Error::violation(
            "restart is quasi-stable",
            format!(
                "{} restricted to {} is {}",
                m.format_set(y),
                event.after,
                m.format_set(&restart)
            ),
        ));
    }
    Ok(restart)
}

/// Restarts from `Y_{W'}` and runs deferred acceptance in the after-view.
pub fn reequilibrate(
    event: &DisruptionEvent<'_>,
    y: &ContractSet,
    strategy: ProposalStrategy,
) -> Result<ScenarioReport> {
    require_stable(&event.before, y, "allocation")?;
    let m = event.market();
    let restart = apply_disruption(event, y)?;
    let trace = da_run(&event.after, &restart, strategy)?;
    verify_trace(&event.after, &trace)?;
    let outcome = trace.outcome.clone();

    let remaining_workers_gain = BlairOrder::of(&event.after, Side::Workers).dominates_unchecked(m, &outcome, y);
    let incumbent_firms_lose = BlairOrder::of(&event.before, Side::Firms).dominates_unchecked(m, y, &outcome);
    if !remaining_workers_gain {
        return Err(Error::violation(
            "remaining workers weakly gain",
            format!(
                "{} does not dominate {} for {:?}",
                m.format_set(&outcome),
                m.format_set(y),
                event.after.worker_names()
            ),
        ));
    }
    if !incumbent_firms_lose {
        return Err(Error::violation(
            "incumbent firms weakly lose",
            format!(
                "{} does not dominate {} for {:?}",
                m.format_set(y),
                m.format_set(&outcome),
                event.before.firm_names()
            ),
        ));
    }

    let pessimal = worker_pessimal(&event.after)?;
    let new_entrant_slices = event
        .entering_firms
        .iter()
        .map(|&f| EntrantSlice {
            firm: f,
            outcome: m.agent_slice(&outcome, Agent::Firm(f)),
            worker_pessimal: m.agent_slice(&pessimal, Agent::Firm(f)),
        })
        .collect();
    Ok(ScenarioReport {
        kind: event.kind,
        start: y.clone(),
        restart,
        outcome,
        steps: trace.steps.len(),
        strategy: trace.strategy,
        worker_pessimal: pessimal,
        remaining_workers_gain,
        incumbent_firms_lose,
        new_entrant_slices,
    })
}

/// `DA(∅)` before the event, restricted and re-equilibrated, equals `DA(∅)` after it.
pub fn worker_pessimal_transfer(event: &DisruptionEvent<'_>) -> Result<ContractSet> {
    let m = event.market();
    let before = worker_pessimal(&event.before)?;
    let transferred = da_outcome(&event.after, &apply_disruption(event, &before)?)?;
    let direct = worker_pessimal(&event.after)?;
    if transferred != direct {
        return Err(Error::violation(
            "worker-pessimal allocation transfers",
            format!(
                "from {} the after-view reaches {}, but its worker-pessimal allocation is {}",
                m.format_set(&before),
                m.format_set(&transferred),
                m.format_set(&direct)
            ),
        ));
    }
    Ok(transferred)
}

/// Runs deferred acceptance before the event up to step `interrupt_at`
/// (clamped to the last step), then moves to the after-view. Returns the
/// outcome from the interrupted state and the outcome from `Y⁰_{W'}`, which
/// must agree.
pub fn mid_run_disruption(
    event: &DisruptionEvent<'_>,
    start: &ContractSet,
    interrupt_at: usize,
    strategy: ProposalStrategy,
) -> Result<(ContractSet, ContractSet)> {
    require_quasi_stable(&event.before, start, "starting allocation")?;
    let m = event.market();
    let trace = da_run(&event.before, start, strategy)?;
    let t = interrupt_at.min(trace.steps.len());
    let workers = event.after.workers();
    for s in 1..=t {
        let prev = event.restrict(trace.allocation_at(s - 1));
        let offered = event.restrict(&trace.steps[s - 1].proposals);
        let chosen = event.restrict(trace.allocation_at(s));
        if !prev.is_subset(&offered) {
            return Err(Error::violation(
                "restricted offers contain the restricted allocation",
                format!("step {s}: {} ⊄ {}", m.format_set(&prev), m.format_set(&offered)),
            ));
        }
        if chosen != choose_group(m, Side::Workers, workers, &offered) {
            return Err(Error::violation(
                "remaining workers choose the restricted allocation",
                format!("step {s}: C_W'({}) ≠ {}", m.format_set(&offered), m.format_set(&chosen)),
            ));
        }
    }
    let interrupted = da_outcome(&event.after, &apply_disruption(event, trace.allocation_at(t))?)?;
    let immediate = da_outcome(&event.after, &apply_disruption(event, start)?)?;
    if interrupted != immediate {
        return Err(Error::violation(
            "disruption timing does not matter",
            format!(
                "interrupting at step {t} gives {}, disrupting at once gives {}",
                m.format_set(&interrupted),
                m.format_set(&immediate)
            ),
        ));
    }
    Ok((interrupted, immediate))
}

/// Checks that every agent's preferences satisfy the law of aggregate demand.
fn require_lad(market: &Market) -> Result<()> {
    for agent in market.all_agents() {
        if !verify(market, agent, Property::LawOfAggregateDemand, DEFAULT_VERIFY_CAP)?.passed {
            return Err(Error::Precondition(format!(
                "{} violates the law of aggregate demand",
                market.agent_name(agent)
            )));
        }
    }
    Ok(())
}

/// Under the law of aggregate demand: the join of a quasi-stable and a stable
/// allocation is stable.
pub fn join_with_stable(view: &View<'_>, y: &ContractSet, stable: &ContractSet) -> Result<ContractSet> {
    require_lad(view.market())?;
    require_stable(view, stable, "allocation")?;
    let m = view.market();
    let joined = join_w(view, y, stable)?;
    if !stable_unchecked(view, &joined) {
        return Err(Error::violation(
            "join with a stable allocation is stable",
            format!(
                "{} ∨ {} = {}",
                m.format_set(y),
                m.format_set(stable),
                m.format_set(&joined)
            ),
        ));
    }
    Ok(joined)
}

/// Under the law of aggregate demand: `DA(Y) = Y ∨_W DA(∅)` for quasi-stable `Y`.
pub fn outcome_as_join(view: &View<'_>, y: &ContractSet) -> Result<ContractSet> {
    require_lad(view.market())?;
    require_quasi_stable(view, y, "allocation")?;
    let m = view.market();
    let outcome = da_outcome(view, y)?;
    let pessimal = worker_pessimal(view)?;
    let joined = join_w(view, y, &pessimal)?;
    if joined != outcome {
        return Err(Error::violation(
            "outcome is the join with the worker-pessimal allocation",
            format!(
                "DA({}) = {} but {} ∨ {} = {}",
                m.format_set(y),
                m.format_set(&outcome),
                m.format_set(y),
                m.format_set(&pessimal),
                m.format_set(&joined)
            ),
        ));
    }
    Ok(outcome)
}

/// Pure firm entry under the law of aggregate demand: the re-equilibrated
/// outcome is the join of the restart with the worker-pessimal allocation, and
/// each entrant ends up with its worker-pessimal contracts.
pub fn new_entrant_report(
    event: &DisruptionEvent<'_>,
    y: &ContractSet,
    strategy: ProposalStrategy,
) -> Result<ScenarioReport> {
    if !event.exiting_workers.is_empty() || event.entering_firms.is_empty() || event.before.firms().is_empty() {
        return Err(Error::Precondition(
            "new-entrant analysis needs a pure firm entry with at least one incumbent firm".into(),
        ));
    }
    let m = event.market();
    require_lad(m)?;
    let report = reequilibrate(event, y, strategy)?;
    let joined = join_with_stable(&event.after, &report.restart, &report.worker_pessimal)?;
    if joined != report.outcome {
        return Err(Error::violation(
            "outcome is the join with the worker-pessimal allocation",
            format!(
                "DA({}) = {} but {} ∨ {} = {}",
                m.format_set(&report.restart),
                m.format_set(&report.outcome),
                m.format_set(&report.restart),
                m.format_set(&report.worker_pessimal),
                m.format_set(&joined)
            ),
        ));
    }
    if let Some(s) = report
        .new_entrant_slices
        .iter()
        .find(|s| s.outcome != s.worker_pessimal)
    {
        return Err(Error::violation(
            "entrants get their worker-pessimal contracts",
            format!(
                "{} holds {} but {} in the worker-pessimal allocation",
                m.agent_name(Agent::Firm(s.firm)),
                m.format_set(&s.outcome),
                m.format_set(&s.worker_pessimal)
            ),
        ));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Polarity {
    /// `Y' ⪰^B_{W'} Y`.
    pub workers_prefer_after: bool,
    /// `Y ⪰^B_{F'} Y'`.
    pub firms_prefer_before: bool,
}

/// For `Y` stable before the event and `Y'` stable after it, remaining workers
/// prefer `Y'` exactly when incumbent firms prefer `Y`.
pub fn polarity_check(event: &DisruptionEvent<'_>, y: &ContractSet, after: &ContractSet) -> Result<Polarity> {
    let m = event.market();
    for (view, s) in [(&event.before, y), (&event.after, after)] {
        view.check_within(s, "allocation")?;
        if !stable_unchecked(view, s) {
            return Err(Error::Input(format!("{} is not stable in {view}", m.format_set(s))));
        }
    }
    let p = Polarity {
        workers_prefer_after: BlairOrder::of(&event.after, Side::Workers).dominates_unchecked(m, after, y),
        firms_prefer_before: BlairOrder::of(&event.before, Side::Firms).dominates_unchecked(m, y, after),
    };
    if p.workers_prefer_after != p.firms_prefer_before {
        return Err(Error::violation(
            "polarity of workers' and firms' preferences",
            format!(
                "Y = {}, Y' = {}: workers prefer Y' is {}, firms prefer Y is {}",
                m.format_set(y),
                m.format_set(after),
                p.workers_prefer_after,
                p.firms_prefer_before
            ),
        ));
    }
    Ok(p)
}

/// Where re-equilibration starts, in a scenario file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Allocation(Vec<String>),
    /// Only `"worker-pessimal"` (of the before-view) is accepted.
    Named(String),
}

fn default_strategy() -> String {
    "full".into()
}

/// `{market, event, start, strategy, seed}`; `market` is resolved relative to
/// the scenario file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub market: PathBuf,
    pub event: EventSpec,
    pub start: StartSpec,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    #[serde(default)]
    pub seed: u64,
    /// Also replays the event interrupting the before-view run at this step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interrupt_at: Option<usize>,
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile> {
    serde_json::from_str(text).map_err(json_error)
}

/// A loaded scenario file together with its market.
#[derive(Debug)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub market: Market,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let file = parse_scenario(&text).map_err(|e| match e {
        Error::Format { location, message } => Error::Format {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })?;
    let market_path = match path.parent() {
        Some(dir) if file.market.is_relative() => dir.join(&file.market),
        _ => file.market.clone(),
    };
    let market = load_market(market_path)?;
    Ok(Scenario { file, market })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioOutcome {
    pub report: ScenarioReport,
    /// The after-view's worker-pessimal allocation reached from the before-view's.
    pub transferred_worker_pessimal: ContractSet,
    /// Outcomes after interrupting at `interrupt_at` and after disrupting at once.
    pub interrupted: Option<(ContractSet, ContractSet)>,
    pub polarity: Polarity,
}

impl Scenario {
    pub fn event(&self) -> Result<DisruptionEvent<'_>> {
        DisruptionEvent::from_spec(&self.market, &self.file.event)
    }

    pub fn strategy(&self) -> Result<ProposalStrategy> {
        ProposalStrategy::from_name(&self.file.strategy, self.file.seed)
    }

    pub fn start(&self, event: &DisruptionEvent<'_>) -> Result<ContractSet> {
        match &self.file.start {
            StartSpec::Allocation(ids) => self.market.parse_set(ids),
            StartSpec::Named(name) if name == "worker-pessimal" => worker_pessimal(&event.before),
            StartSpec::Named(name) => Err(Error::Input(format!(
                "start must be a list of contract ids or \"worker-pessimal\", not {name:?}"
            ))),
        }
    }

    pub fn run(&self) -> Result<ScenarioOutcome> {
        let event = self.event()?;
        let strategy = self.strategy()?;
        let start = self.start(&event)?;
        let report = reequilibrate(&event, &start, strategy)?;
        let transferred_worker_pessimal = worker_pessimal_transfer(&event)?;
        let interrupted = match self.file.interrupt_at {
            Some(t) => Some(mid_run_disruption(&event, &start, t, strategy)?),
            None => None,
        };
        let polarity = polarity_check(&event, &start, &report.outcome)?;
        Ok(ScenarioOutcome {
            report,
            transferred_worker_pessimal,
            interrupted,
            polarity,
        })
    }
}
