//! Blair dominance, the lattice operations on firm-quasi-stable allocations and
//! the Tarski operator `T_F(Y) = C_W(C_F(Γ(Y)))`.

use crate::choice::choose_group;
use crate::error::{Error, Result};
use crate::model::{Market, Side, View};
use crate::oracle::Enumeration;
use crate::set::ContractSet;
use crate::stability::{firm_choice_of_gamma, gamma_unchecked, ir_unchecked, quasi_stable_unchecked, stable_unchecked};

/// `⪰^B_A` for a set of agents `A` on one side: `Y ⪰ Y'` iff `C_A(Y ∪ Y') = Y`.
///
/// Only defined on individually rational allocations. Individual rationality
/// of a set does not depend on the view it is read in, so it is checked
/// against the whole market.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlairOrder {
    pub side: Side,
    pub agents: Vec<usize>,
}

impl BlairOrder {
    pub fn new(side: Side, agents: &[usize]) -> Self {
        let mut agents = agents.to_vec();
        agents.sort_unstable();
        agents.dedup();
        Self { side, agents }
    }

    /// The order for all of a view's agents on `side`.
    pub fn of(view: &View<'_>, side: Side) -> Self {
        Self::new(side, view.agents(side))
    }

    pub fn dominates(&self, market: &Market, y: &ContractSet, other: &ContractSet) -> Result<bool> {
        let full = market.full_view();
        for s in [y, other] {
            if !ir_unchecked(&full, s) {
                return Err(Error::Precondition(format!(
                    "Blair dominance is only defined on individually rational allocations; {} is not",
                    market.format_set(s)
                )));
            }
        }
        Ok(self.dominates_unchecked(market, y, other))
    }

    pub(crate) fn dominates_unchecked(&self, market: &Market, y: &ContractSet, other: &ContractSet) -> bool {
        &choose_group(market, self.side, &self.agents, &y.union(other)) == y
    }
}

/// `Y ⪰^B Y'` for the view's workers or firms.
pub fn blair_dominates(view: &View<'_>, y: &ContractSet, other: &ContractSet, side: Side) -> Result<bool> {
    view.check_within(y, "allocation")?;
    view.check_within(other, "allocation")?;
    BlairOrder::of(view, side).dominates(view.market(), y, other)
}

fn require_quasi_stable(view: &View<'_>, y: &ContractSet) -> Result<()> {
    view.check_within(y, "allocation")?;
    if quasi_stable_unchecked(view, y) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{} is not firm-quasi-stable in {view}",
            view.market().format_set(y)
        )))
    }
}

fn workers_choice(view: &View<'_>, y: &ContractSet) -> ContractSet {
    choose_group(view.market(), Side::Workers, view.workers(), y)
}

/// `Y ∨_W Y' = C_W(Y ∪ Y')` on firm-quasi-stable allocations.
pub fn join_w(view: &View<'_>, y: &ContractSet, other: &ContractSet) -> Result<ContractSet> {
    require_quasi_stable(view, y)?;
    require_quasi_stable(view, other)?;
    Ok(workers_choice(view, &y.union(other)))
}

/// `Y ∧_W Y'`: the workers' choice from the union of every common lower bound in
/// `Q_F`. Needs the complete enumeration of the view's quasi-stable allocations.
pub fn meet_w(view: &View<'_>, y: &ContractSet, other: &ContractSet, q: &Enumeration) -> Result<ContractSet> {
    if q.workers != view.workers() || q.firms != view.firms() {
        return Err(Error::Input("the enumeration was computed for a different view".into()));
    }
    let m = view.market();
    for s in [y, other] {
        if q.quasi_stable.binary_search(s).is_err() {
            return Err(Error::Precondition(format!(
                "{} is not in the enumerated quasi-stable set",
                m.format_set(s)
            )));
        }
    }
    let order = BlairOrder::of(view, Side::Workers);
    let mut lower = ContractSet::new();
    for z in &q.quasi_stable {
        if order.dominates_unchecked(m, y, z) && order.dominates_unchecked(m, other, z) {
            lower = lower.union(z);
        }
    }
    let meet = workers_choice(view, &lower);
    if q.quasi_stable.binary_search(&meet).is_err() {
        return Err(Error::violation(
            "meet closure",
            format!(
                "{} ∧ {} = {} is not quasi-stable",
                m.format_set(y),
                m.format_set(other),
                m.format_set(&meet)
            ),
        ));
    }
    Ok(meet)
}

/// `T_F(Y) = C_W(C_F(Γ(Y)))` on a firm-quasi-stable allocation.
pub fn tarski(view: &View<'_>, y: &ContractSet) -> Result<ContractSet> {
    require_quasi_stable(view, y)?;
    Ok(tarski_unchecked(view, y))
}

pub(crate) fn tarski_unchecked(view: &View<'_>, y: &ContractSet) -> ContractSet {
    workers_choice(view, &firm_choice_of_gamma(view, y))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TarskiTrace {
    /// `Y, T_F(Y), T_F²(Y), ...` ending at the fixed point.
    pub iterates: Vec<ContractSet>,
    pub fixed_point: ContractSet,
}

impl TarskiTrace {
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }
}

/// Iterates `T_F` from `y` until `T_F(Y) = Y`, which happens exactly at a stable allocation.
pub fn tarski_iterate(view: &View<'_>, y: &ContractSet) -> Result<TarskiTrace> {
    require_quasi_stable(view, y)?;
    let cap = step_cap(view);
    let mut iterates = vec![y.clone()];
    loop {
        let current = iterates.last().expect("non-empty");
        let next = tarski_unchecked(view, current);
        if &next == current {
            break;
        }
        if iterates.len() > cap {
            return Err(Error::Internal(format!("Tarski iteration exceeded {cap} steps")));
        }
        iterates.push(next);
    }
    let fixed_point = iterates.last().cloned().expect("non-empty");
    if !stable_unchecked(view, &fixed_point) {
        return Err(Error::violation(
            "fixed points are stable",
            format!(
                "T_F fixes {} but it is not stable",
                view.market().format_set(&fixed_point)
            ),
        ));
    }
    Ok(TarskiTrace { iterates, fixed_point })
}

/// Upper bound on the number of quasi-stable allocations of a view.
pub(crate) fn step_cap(view: &View<'_>) -> usize {
    1usize.checked_shl(view.contracts().len() as u32).unwrap_or(usize::MAX)
}

/// For quasi-stable `Y ⪰^B_W Y'`: `Γ(Y) ⊆ Γ(Y')` and `T_F(Y) ⪰^B_W T_F(Y')`.
pub fn isotone_check(view: &View<'_>, y: &ContractSet, other: &ContractSet) -> Result<()> {
    require_quasi_stable(view, y)?;
    require_quasi_stable(view, other)?;
    let m = view.market();
    let order = BlairOrder::of(view, Side::Workers);
    if !order.dominates_unchecked(m, y, other) {
        return Err(Error::Input(format!(
            "{} does not Blair-dominate {} for workers",
            m.format_set(y),
            m.format_set(other)
        )));
    }
    let (gy, go) = (gamma_unchecked(view, y), gamma_unchecked(view, other));
    if !gy.is_subset(&go) {
        return Err(Error::violation(
            "Γ is antitone",
            format!(
                "Γ({}) = {} ⊄ Γ({}) = {}",
                m.format_set(y),
                m.format_set(&gy),
                m.format_set(other),
                m.format_set(&go)
            ),
        ));
    }
    let (ty, to) = (tarski_unchecked(view, y), tarski_unchecked(view, other));
    if !order.dominates_unchecked(m, &ty, &to) {
        return Err(Error::violation(
            "T_F is isotone",
            format!(
                "T_F({}) = {} does not dominate T_F({}) = {}",
                m.format_set(y),
                m.format_set(&ty),
                m.format_set(other),
                m.format_set(&to)
            ),
        ));
    }
    Ok(())
}
