//! Contracts, agents, markets and submarket views.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::choice::{Choice, ChoiceSpec, CompileContext};
use crate::error::{Error, Result};
use crate::format::{ContractEntry, MarketFile};
use crate::set::ContractSet;

/// Alias used where a contract set is expected to satisfy the allocation
/// invariant (at most one contract per worker-firm pair).
pub type Allocation = ContractSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Workers,
    Firms,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Workers => Side::Firms,
            Side::Firms => Side::Workers,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Workers => "workers",
            Side::Firms => "firms",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Agent {
    Worker(usize),
    Firm(usize),
}

impl Agent {
    pub fn side(self) -> Side {
        match self {
            Agent::Worker(_) => Side::Workers,
            Agent::Firm(_) => Side::Firms,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Agent::Worker(i) | Agent::Firm(i) => i,
        }
    }

    pub fn on(side: Side, index: usize) -> Agent {
        match side {
            Side::Workers => Agent::Worker(index),
            Side::Firms => Agent::Firm(index),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    pub id: String,
    pub worker: usize,
    pub firm: usize,
    /// Opaque label (wages, duties, ...). Never interpreted.
    pub terms: String,
}

/// A market `(W, F, X)` with one choice function per agent.
///
/// Contracts are kept sorted by id; a contract's index is its rank in that order.
#[derive(Debug, Clone)]
pub struct Market {
    workers: Vec<String>,
    firms: Vec<String>,
    contracts: Vec<Contract>,
    specs: BTreeMap<String, ChoiceSpec>,

    contract_ids: HashMap<String, usize>,
    agent_ids: HashMap<String, Agent>,
    incident_w: Vec<ContractSet>,
    incident_f: Vec<ContractSet>,
    choices_w: Vec<Choice>,
    choices_f: Vec<Choice>,
}

impl PartialEq for Market {
    fn eq(&self, other: &Self) -> bool {
        self.workers == other.workers
            && self.firms == other.firms
            && self.contracts == other.contracts
            && self.specs == other.specs
    }
}

impl Eq for Market {}

fn field_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Format {
        location: location.into(),
        message: message.into(),
    }
}

impl Market {
    /// Validates a parsed market file and compiles every agent's choice function.
    pub fn from_file(file: MarketFile) -> Result<Market> {
        let mut agent_ids = HashMap::new();
        for (i, w) in file.workers.iter().enumerate() {
            if agent_ids.insert(w.clone(), Agent::Worker(i)).is_some() {
                return Err(field_err(format!("workers[{i}]"), format!("duplicate agent id {w:?}")));
            }
        }
        for (i, f) in file.firms.iter().enumerate() {
            if agent_ids.insert(f.clone(), Agent::Firm(i)).is_some() {
                return Err(field_err(format!("firms[{i}]"), format!("duplicate agent id {f:?}")));
            }
        }

        let mut seen = HashSet::new();
        let mut contracts = Vec::with_capacity(file.contracts.len());
        for (i, c) in file.contracts.iter().enumerate() {
            if !seen.insert(c.id.as_str()) {
                return Err(field_err(
                    format!("contracts[{i}].id"),
                    format!("duplicate contract id {:?}", c.id),
                ));
            }
            let worker = match agent_ids.get(&c.worker) {
                Some(Agent::Worker(w)) => *w,
                _ => {
                    return Err(field_err(
                        format!("contracts[{i}].worker"),
                        format!("unknown worker {:?}", c.worker),
                    ))
                }
            };
            let firm = match agent_ids.get(&c.firm) {
                Some(Agent::Firm(f)) => *f,
                _ => {
                    return Err(field_err(
                        format!("contracts[{i}].firm"),
                        format!("unknown firm {:?}", c.firm),
                    ))
                }
            };
            contracts.push(Contract {
                id: c.id.clone(),
                worker,
                firm,
                terms: c.terms.clone(),
            });
        }
        contracts.sort_by(|a, b| a.id.cmp(&b.id));
        let contract_ids: HashMap<String, usize> =
            contracts.iter().enumerate().map(|(i, c)| (c.id.clone(), i)).collect();

        let mut incident_w = vec![ContractSet::new(); file.workers.len()];
        let mut incident_f = vec![ContractSet::new(); file.firms.len()];
        for (i, c) in contracts.iter().enumerate() {
            incident_w[c.worker].insert(i);
            incident_f[c.firm].insert(i);
        }

        for name in file.choices.keys() {
            if !agent_ids.contains_key(name) {
                return Err(field_err(format!("choices.{name}"), "choice spec for an unknown agent"));
            }
        }

        let mut specs = BTreeMap::new();
        let mut compile_side = |side: Side, names: &[String], incident: &[ContractSet]| -> Result<Vec<Choice>> {
            let mut out = Vec::with_capacity(names.len());
            for (i, name) in names.iter().enumerate() {
                let spec = match file.choices.get(name) {
                    Some(spec) => spec.clone(),
                    // isolated agents get the trivial choice function on the empty ground set
                    None if incident[i].is_empty() => ChoiceSpec::trivial(),
                    None => return Err(field_err(format!("choices.{name}"), "missing choice spec")),
                };
                let ctx = CompileContext {
                    agent: Agent::on(side, i),
                    ground: &incident[i],
                    contract_ids: &contract_ids,
                    contracts: &contracts,
                    path: format!("choices.{name}"),
                };
                let (choice, normalized) = Choice::compile(&spec, &ctx)?;
                specs.insert(name.clone(), normalized);
                out.push(choice);
            }
            Ok(out)
        };
        let choices_w = compile_side(Side::Workers, &file.workers, &incident_w)?;
        let choices_f = compile_side(Side::Firms, &file.firms, &incident_f)?;

        Ok(Market {
            workers: file.workers,
            firms: file.firms,
            contracts,
            specs,
            contract_ids,
            agent_ids,
            incident_w,
            incident_f,
            choices_w,
            choices_f,
        })
    }

    /// The file representation (contracts in id order, specs normalized).
    pub fn to_file(&self) -> MarketFile {
        MarketFile {
            workers: self.workers.clone(),
            firms: self.firms.clone(),
            contracts: self
                .contracts
                .iter()
                .map(|c| ContractEntry {
                    id: c.id.clone(),
                    worker: self.workers[c.worker].clone(),
                    firm: self.firms[c.firm].clone(),
                    terms: c.terms.clone(),
                })
                .collect(),
            choices: self.specs.clone(),
        }
    }

    pub fn workers(&self) -> &[String] {
        &self.workers
    }

    pub fn firms(&self) -> &[String] {
        &self.firms
    }

    pub fn contracts(&self) -> &[Contract] {
        &self.contracts
    }

    pub fn contract(&self, idx: usize) -> &Contract {
        &self.contracts[idx]
    }

    pub fn num_contracts(&self) -> usize {
        self.contracts.len()
    }

    pub fn all_contracts(&self) -> ContractSet {
        ContractSet::full(self.contracts.len())
    }

    pub fn contract_index(&self, id: &str) -> Option<usize> {
        self.contract_ids.get(id).copied()
    }

    pub fn agent(&self, id: &str) -> Option<Agent> {
        self.agent_ids.get(id).copied()
    }

    pub fn agent_by_id(&self, id: &str) -> Result<Agent> {
        self.agent(id)
            .ok_or_else(|| Error::Input(format!("unknown agent {id:?}")))
    }

    pub fn agents(&self, side: Side) -> &[String] {
        match side {
            Side::Workers => &self.workers,
            Side::Firms => &self.firms,
        }
    }

    pub fn agent_name(&self, agent: Agent) -> &str {
        match agent {
            Agent::Worker(i) => &self.workers[i],
            Agent::Firm(i) => &self.firms[i],
        }
    }

    pub fn all_agents(&self) -> impl Iterator<Item = Agent> + '_ {
        (0..self.workers.len())
            .map(Agent::Worker)
            .chain((0..self.firms.len()).map(Agent::Firm))
    }

    pub fn spec(&self, agent: Agent) -> &ChoiceSpec {
        &self.specs[self.agent_name(agent)]
    }

    pub(crate) fn choice(&self, agent: Agent) -> &Choice {
        match agent {
            Agent::Worker(i) => &self.choices_w[i],
            Agent::Firm(i) => &self.choices_f[i],
        }
    }

    /// `X_i`: the contracts incident to `agent`.
    pub fn incident(&self, agent: Agent) -> &ContractSet {
        match agent {
            Agent::Worker(i) => &self.incident_w[i],
            Agent::Firm(i) => &self.incident_f[i],
        }
    }

    /// The agent on `side` that contract `x` involves.
    pub fn endpoint(&self, x: usize, side: Side) -> usize {
        match side {
            Side::Workers => self.contracts[x].worker,
            Side::Firms => self.contracts[x].firm,
        }
    }

    /// `Y_i`.
    pub fn agent_slice(&self, y: &ContractSet, agent: Agent) -> ContractSet {
        y.intersection(self.incident(agent))
    }

    /// `Y_{A}` for a set of agents on one side.
    pub fn restrict(&self, y: &ContractSet, side: Side, agents: &[usize]) -> ContractSet {
        y.iter().filter(|&x| agents.contains(&self.endpoint(x, side))).collect()
    }

    /// `Y_{W'}`.
    pub fn restrict_allocation(&self, y: &ContractSet, workers: &[usize]) -> ContractSet {
        self.restrict(y, Side::Workers, workers)
    }

    /// At most one contract per worker-firm pair.
    pub fn is_allocation(&self, y: &ContractSet) -> bool {
        let mut pairs = HashSet::new();
        y.iter().all(|x| {
            let c = &self.contracts[x];
            pairs.insert((c.worker, c.firm))
        })
    }

    pub fn is_allocation_ids<S: AsRef<str>>(&self, ids: &[S]) -> Result<bool> {
        Ok(self.is_allocation(&self.parse_set(ids)?))
    }

    pub fn parse_set<S: AsRef<str>>(&self, ids: &[S]) -> Result<ContractSet> {
        ids.iter()
            .map(|id| {
                let id = id.as_ref();
                self.contract_index(id)
                    .ok_or_else(|| Error::Input(format!("unknown contract id {id:?}")))
            })
            .collect()
    }

    /// Parses a comma-separated contract id list; the empty string is the empty set.
    pub fn parse_list(&self, list: &str) -> Result<ContractSet> {
        let ids: Vec<&str> = split_list(list);
        self.parse_set(&ids)
    }

    pub fn parse_agents<S: AsRef<str>>(&self, side: Side, ids: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let id = id.as_ref();
            match self.agent(id) {
                Some(a) if a.side() == side => out.push(a.index()),
                Some(_) => return Err(Error::Input(format!("{id:?} is not one of the {side}"))),
                None => return Err(Error::Input(format!("unknown agent {id:?}"))),
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    pub fn ids(&self, y: &ContractSet) -> Vec<String> {
        y.iter().map(|x| self.contracts[x].id.clone()).collect()
    }

    /// `{a,d}`-style rendering in canonical order.
    pub fn format_set(&self, y: &ContractSet) -> String {
        format!("{{{}}}", self.ids(y).join(","))
    }

    pub fn full_view(&self) -> View<'_> {
        View {
            market: self,
            workers: (0..self.workers.len()).collect(),
            firms: (0..self.firms.len()).collect(),
            contracts: self.all_contracts(),
        }
    }

    /// The market `(W', F', X_{W'} ∩ X_{F'})`. Either side may be empty.
    pub fn submarket(&self, workers: &[usize], firms: &[usize]) -> Result<View<'_>> {
        let mut workers = workers.to_vec();
        let mut firms = firms.to_vec();
        workers.sort_unstable();
        workers.dedup();
        firms.sort_unstable();
        firms.dedup();
        if let Some(&w) = workers.iter().find(|&&w| w >= self.workers.len()) {
            return Err(Error::Input(format!("worker index {w} out of range")));
        }
        if let Some(&f) = firms.iter().find(|&&f| f >= self.firms.len()) {
            return Err(Error::Input(format!("firm index {f} out of range")));
        }
        let contracts = self
            .contracts
            .iter()
            .enumerate()
            .filter(|(_, c)| workers.binary_search(&c.worker).is_ok() && firms.binary_search(&c.firm).is_ok())
            .map(|(i, _)| i)
            .collect();
        Ok(View {
            market: self,
            workers,
            firms,
            contracts,
        })
    }

    /// Builds a view from agent id lists; `None` means the full side.
    pub fn view_from_ids<S: AsRef<str>>(&self, workers: Option<&[S]>, firms: Option<&[S]>) -> Result<View<'_>> {
        let workers = match workers {
            Some(ids) => self.parse_agents(Side::Workers, ids)?,
            None => (0..self.workers.len()).collect(),
        };
        let firms = match firms {
            Some(ids) => self.parse_agents(Side::Firms, ids)?,
            None => (0..self.firms.len()).collect(),
        };
        self.submarket(&workers, &firms)
    }

    /// Swaps the roles of workers and firms. Choice specs travel with their agents.
    pub fn dualize(&self) -> Market {
        let mut file = self.to_file();
        std::mem::swap(&mut file.workers, &mut file.firms);
        for c in file.contracts.iter_mut() {
            std::mem::swap(&mut c.worker, &mut c.firm);
        }
        Market::from_file(file).expect("the dual of a valid market is valid")
    }
}

pub(crate) fn split_list(list: &str) -> Vec<&str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// A submarket `(W', F', X')` of a base market, with `X' = X_{W'} ∩ X_{F'}`.
#[derive(Debug, Clone)]
pub struct View<'m> {
    market: &'m Market,
    workers: Vec<usize>,
    firms: Vec<usize>,
    contracts: ContractSet,
}

impl PartialEq for View<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.market, other.market) && self.workers == other.workers && self.firms == other.firms
    }
}

impl<'m> View<'m> {
    pub fn market(&self) -> &'m Market {
        self.market
    }

    pub fn workers(&self) -> &[usize] {
        &self.workers
    }

    pub fn firms(&self) -> &[usize] {
        &self.firms
    }

    pub fn agents(&self, side: Side) -> &[usize] {
        match side {
            Side::Workers => &self.workers,
            Side::Firms => &self.firms,
        }
    }

    /// `X'`.
    pub fn contracts(&self) -> &ContractSet {
        &self.contracts
    }

    pub fn is_full(&self) -> bool {
        self.workers.len() == self.market.workers.len() && self.firms.len() == self.market.firms.len()
    }

    pub fn worker_names(&self) -> Vec<String> {
        self.workers.iter().map(|&w| self.market.workers[w].clone()).collect()
    }

    pub fn firm_names(&self) -> Vec<String> {
        self.firms.iter().map(|&f| self.market.firms[f].clone()).collect()
    }

    pub(crate) fn check_within(&self, y: &ContractSet, what: &str) -> Result<()> {
        if y.is_subset(&self.contracts) {
            Ok(())
        } else {
            let outside = y.difference(&self.contracts);
            Err(Error::Input(format!(
                "{what} contains contracts outside the view: {}",
                self.market.format_set(&outside)
            )))
        }
    }
}

impl fmt::Display for View<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({{{}}}, {{{}}})",
            self.worker_names().join(","),
            self.firm_names().join(",")
        )
    }
}
