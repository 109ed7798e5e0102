//! Brute-force ground truth for small views.
//!
//! Everything here classifies allocations straight from the definitions:
//! stability by searching every candidate blocking set, quasi-stability through
//! the set of blocking contracts. Nothing goes through `Γ`, so these results are
//! independent evidence for [`crate::stability`] and [`crate::lattice`].

use serde::Serialize;

use crate::choice::{choose, choose_group, verify, Property, DEFAULT_VERIFY_CAP};
use crate::error::{Error, Result};
use crate::lattice::{join_w, meet_w, tarski, BlairOrder};
use crate::model::{Agent, Side, View};
use crate::set::{select, ContractSet};
use crate::stability;

/// Enumeration refuses views with more contracts than this.
pub const DEFAULT_ENUMERATION_CAP: usize = 16;

/// Every allocation of a view, classified. Lists are in canonical order
/// (size, then lexicographic ids).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub workers: Vec<usize>,
    pub firms: Vec<usize>,
    pub all_allocations: Vec<ContractSet>,
    pub ir: Vec<ContractSet>,
    pub quasi_stable: Vec<ContractSet>,
    pub stable: Vec<ContractSet>,
}

impl Enumeration {
    pub fn is_quasi_stable(&self, y: &ContractSet) -> bool {
        self.quasi_stable.binary_search(y).is_ok()
    }

    pub fn is_stable(&self, y: &ContractSet) -> bool {
        self.stable.binary_search(y).is_ok()
    }

    pub fn is_ir(&self, y: &ContractSet) -> bool {
        self.ir.binary_search(y).is_ok()
    }
}

/// `C_{W'}(Y) = C_{F'}(Y) = Y`, evaluated directly.
pub fn def_individually_rational(view: &View<'_>, y: &ContractSet) -> bool {
    let m = view.market();
    m.is_allocation(y)
        && &choose_group(m, Side::Workers, view.workers(), y) == y
        && &choose_group(m, Side::Firms, view.firms(), y) == y
}

/// `B(Y) ∩ X'` evaluated contract by contract from both endpoints' choices.
pub fn def_blocking_contracts(view: &View<'_>, y: &ContractSet) -> ContractSet {
    let m = view.market();
    view.contracts()
        .difference(y)
        .iter()
        .filter(|&x| {
            let c = m.contract(x);
            let yx = y.with(x);
            choose(m, Agent::Worker(c.worker), &yx).contains(x) && choose(m, Agent::Firm(c.firm), &yx).contains(x)
        })
        .collect()
}

/// First non-empty `Z ⊆ X' \ Y` with `Z ⊆ C_{W'}(Y ∪ Z) ∩ C_{F'}(Y ∪ Z)`, if any.
pub fn find_blocking_set(view: &View<'_>, y: &ContractSet) -> Option<ContractSet> {
    let m = view.market();
    let outside: Vec<usize> = view.contracts().difference(y).iter().collect();
    (1u64..(1u64 << outside.len()))
        .map(|mask| select(&outside, mask))
        .find(|z| {
            let yz = y.union(z);
            z.is_subset(&choose_group(m, Side::Workers, view.workers(), &yz))
                && z.is_subset(&choose_group(m, Side::Firms, view.firms(), &yz))
        })
}

/// Individually rational with no blocking set inside the view.
pub fn def_stable(view: &View<'_>, y: &ContractSet) -> bool {
    def_individually_rational(view, y) && find_blocking_set(view, y).is_none()
}

/// Individually rational and `Y ⊆ C_{F'}(Y ∪ (B(Y) ∩ X'))`.
pub fn def_firm_quasi_stable(view: &View<'_>, y: &ContractSet) -> bool {
    def_side_quasi_stable(view, y, Side::Firms)
}

/// Individually rational and `Y ⊆ C_{W'}(Y ∪ (B(Y) ∩ X'))`.
pub fn def_worker_quasi_stable(view: &View<'_>, y: &ContractSet) -> bool {
    def_side_quasi_stable(view, y, Side::Workers)
}

fn def_side_quasi_stable(view: &View<'_>, y: &ContractSet, side: Side) -> bool {
    def_individually_rational(view, y)
        && y.is_subset(&choose_group(
            view.market(),
            side,
            view.agents(side),
            &y.union(&def_blocking_contracts(view, y)),
        ))
}

pub fn enumerate(view: &View<'_>) -> Result<Enumeration> {
    enumerate_with_cap(view, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_with_cap(view: &View<'_>, cap: usize) -> Result<Enumeration> {
    let n = view.contracts().len();
    if n > cap {
        return Err(Error::TooLarge {
            what: format!("view {view}"),
            size: n,
            cap,
        });
    }
    let m = view.market();
    let mut all: Vec<ContractSet> = view.contracts().subsets().filter(|y| m.is_allocation(y)).collect();
    all.sort();
    let ir: Vec<ContractSet> = all
        .iter()
        .filter(|y| def_individually_rational(view, y))
        .cloned()
        .collect();
    let quasi_stable = ir.iter().filter(|y| def_firm_quasi_stable(view, y)).cloned().collect();
    let stable = ir
        .iter()
        .filter(|y| find_blocking_set(view, y).is_none())
        .cloned()
        .collect();
    Ok(Enumeration {
        workers: view.workers().to_vec(),
        firms: view.firms().to_vec(),
        all_allocations: all,
        ir,
        quasi_stable,
        stable,
    })
}

/// Elements with no strictly dominating element in `set`.
pub fn maximal_elements(view: &View<'_>, set: &[ContractSet], side: Side) -> Result<Vec<ContractSet>> {
    let m = view.market();
    let order = BlairOrder::of(view, side);
    for y in set {
        if !def_individually_rational(view, y) {
            return Err(Error::Precondition(format!(
                "{} is not individually rational",
                m.format_set(y)
            )));
        }
    }
    Ok(set
        .iter()
        .filter(|y| {
            !set.iter()
                .any(|other| other != *y && order.dominates_unchecked(m, other, y))
        })
        .cloned()
        .collect())
}

/// The workers' minimal elements among stable allocations that dominate `y` for
/// workers. Deferred acceptance from a quasi-stable `y` must land on the single
/// element of this list.
pub fn minimal_stable_above(view: &View<'_>, e: &Enumeration, y: &ContractSet) -> Vec<ContractSet> {
    let m = view.market();
    let order = BlairOrder::of(view, Side::Workers);
    let above: Vec<&ContractSet> = e.stable.iter().filter(|s| order.dominates_unchecked(m, s, y)).collect();
    above
        .iter()
        .filter(|s| !above.iter().any(|t| t != *s && order.dominates_unchecked(m, s, t)))
        .map(|s| (*s).clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Human-readable counterexamples (at most a handful are kept).
    pub witnesses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certification {
    pub view: String,
    pub allocations: usize,
    pub individually_rational: usize,
    pub quasi_stable: usize,
    pub stable: usize,
    pub checks: Vec<CertCheck>,
    /// Agents of the view whose preferences fail the substitutability verifier.
    pub non_substitutable_agents: Vec<String>,
}

impl Certification {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const MAX_WITNESSES: usize = 5;

struct Check {
    name: &'static str,
    witnesses: Vec<String>,
    failures: usize,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            witnesses: Vec::new(),
            failures: 0,
        }
    }

    fn fail(&mut self, why: impl FnOnce() -> String) {
        self.failures += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(why());
        }
    }

    fn finish(self) -> CertCheck {
        CertCheck {
            name: self.name,
            passed: self.failures == 0,
            witnesses: self.witnesses,
        }
    }
}

/// Cross-checks the `Γ`-based predicates, the Tarski operator and the lattice
/// operations of a view against its enumeration.
pub fn certify(view: &View<'_>) -> Result<Certification> {
    let e = enumerate(view)?;
    let m = view.market();
    let fmt = |y: &ContractSet| m.format_set(y);

    // predicates: Γ forms against definitional forms, on every allocation
    let mut predicates = Check::new("predicates");
    for y in &e.all_allocations {
        let ir = stability::is_individually_rational(view, y)?;
        let qs = stability::is_quasi_stable(view, y)?;
        let st = stability::is_stable(view, y)?;
        if ir != e.is_ir(y) || qs != e.is_quasi_stable(y) || st != e.is_stable(y) {
            predicates.fail(|| {
                format!(
                    "{}: gamma forms (ir={ir}, quasi={qs}, stable={st}) vs definitions (ir={}, quasi={}, stable={})",
                    fmt(y),
                    e.is_ir(y),
                    e.is_quasi_stable(y),
                    e.is_stable(y)
                )
            });
        }
        if ir {
            let g = stability::gamma(view, y)?;
            let with_blocks = y.union(&def_blocking_contracts(view, y));
            if !y.is_subset(&g)
                || choose_group(m, Side::Firms, view.firms(), &with_blocks)
                    != choose_group(m, Side::Firms, view.firms(), &g)
            {
                predicates.fail(|| {
                    format!(
                        "{}: firms' choice from Y ∪ B(Y) differs from their choice from Γ(Y)",
                        fmt(y)
                    )
                });
            }
        }
    }

    // the Tarski operator maps Q_F into itself, ascends, and fixes exactly the stable set
    let mut fixed = Check::new("tarski-fixed-points");
    let workers = BlairOrder::of(view, Side::Workers);
    let mut fixed_points = Vec::new();
    for y in &e.quasi_stable {
        let t = tarski(view, y)?;
        if !e.is_quasi_stable(&t) {
            fixed.fail(|| format!("T_F({}) = {} leaves the quasi-stable set", fmt(y), fmt(&t)));
            continue;
        }
        if !workers.dominates_unchecked(m, &t, y) {
            fixed.fail(|| format!("T_F({}) = {} does not dominate its argument", fmt(y), fmt(&t)));
        }
        if &t == y {
            fixed_points.push(y.clone());
        }
    }
    if fixed_points != e.stable {
        let fp: Vec<String> = fixed_points.iter().map(fmt).collect();
        let st: Vec<String> = e.stable.iter().map(fmt).collect();
        fixed.fail(|| {
            format!(
                "fixed points [{}] differ from stable set [{}]",
                fp.join(" "),
                st.join(" ")
            )
        });
    }

    // join and meet are the least upper and greatest lower bounds within Q_F
    let mut lattice = Check::new("lattice");
    let q = &e.quasi_stable;
    let dom: Vec<Vec<bool>> = q
        .iter()
        .map(|a| q.iter().map(|b| workers.dominates_unchecked(m, a, b)).collect())
        .collect();
    let index = |y: &ContractSet| q.binary_search(y).ok();
    for i in 0..q.len() {
        for j in i..q.len() {
            let (a, b) = (&q[i], &q[j]);
            match join_w(view, a, b).map(|z| (index(&z), z)) {
                Ok((Some(k), _)) => {
                    let bounded = dom[k][i] && dom[k][j];
                    let least = (0..q.len()).all(|u| !(dom[u][i] && dom[u][j]) || dom[u][k]);
                    if !bounded || !least {
                        lattice
                            .fail(|| format!("{} ∨ {} = {} is not the least upper bound", fmt(a), fmt(b), fmt(&q[k])));
                    }
                }
                Ok((None, z)) => lattice.fail(|| format!("{} ∨ {} = {} is not quasi-stable", fmt(a), fmt(b), fmt(&z))),
                Err(err) => lattice.fail(|| format!("{} ∨ {}: {err}", fmt(a), fmt(b))),
            }
            match meet_w(view, a, b, &e).map(|z| (index(&z), z)) {
                Ok((Some(k), _)) => {
                    let bounded = dom[i][k] && dom[j][k];
                    let greatest = (0..q.len()).all(|l| !(dom[i][l] && dom[j][l]) || dom[k][l]);
                    if !bounded || !greatest {
                        lattice.fail(|| {
                            format!(
                                "{} ∧ {} = {} is not the greatest lower bound",
                                fmt(a),
                                fmt(b),
                                fmt(&q[k])
                            )
                        });
                    }
                }
                Ok((None, z)) => lattice.fail(|| format!("{} ∧ {} = {} is not quasi-stable", fmt(a), fmt(b), fmt(&z))),
                Err(err) => lattice.fail(|| format!("{} ∧ {}: {err}", fmt(a), fmt(b))),
            }
        }
    }

    // maximal quasi-stable allocations are stable
    let mut maximal = Check::new("maximal-quasi-stable-are-stable");
    for y in maximal_elements(view, q, Side::Workers)? {
        if !e.is_stable(&y) {
            maximal.fail(|| format!("{} is maximal in Q_F but not stable", fmt(&y)));
        }
    }

    // no blocking contract iff no blocking set
    let mut pairwise = Check::new("pairwise-equals-setwise");
    for y in &e.ir {
        let pairwise_stable = stability::blocking_contracts(view, y)?.is_empty();
        let setwise = find_blocking_set(view, y);
        if pairwise_stable != setwise.is_none() {
            pairwise.fail(|| match &setwise {
                Some(z) => format!("{} has no blocking contract but is blocked by {}", fmt(y), fmt(z)),
                None => format!("{} has a blocking contract but no blocking set", fmt(y)),
            });
        }
    }

    let mut non_substitutable_agents = Vec::new();
    let agents = view
        .workers()
        .iter()
        .map(|&w| Agent::Worker(w))
        .chain(view.firms().iter().map(|&f| Agent::Firm(f)));
    for agent in agents {
        match verify(m, agent, Property::Substitutability, DEFAULT_VERIFY_CAP) {
            Ok(r) if r.passed => {}
            Ok(_) => non_substitutable_agents.push(m.agent_name(agent).to_string()),
            Err(Error::TooLarge { .. }) => {
                non_substitutable_agents.push(format!("{} (unverified)", m.agent_name(agent)))
            }
            Err(e) => return Err(e),
        }
    }

    Ok(Certification {
        view: view.to_string(),
        allocations: e.all_allocations.len(),
        individually_rational: e.ir.len(),
        quasi_stable: e.quasi_stable.len(),
        stable: e.stable.len(),
        checks: vec![
            predicates.finish(),
            fixed.finish(),
            lattice.finish(),
            maximal.finish(),
            pairwise.finish(),
        ],
        non_substitutable_agents,
    })
}
