//! Individual rationality, blocking, firm-quasi-stability and stability on a view.
//!
//! The quasi-stability and stability predicates go through the `Γ` operator,
//! which costs one choice evaluation per contract of the view. The definitional
//! forms (setwise blocking search) live in [`crate::oracle`].

use crate::choice::{choose, choose_group, reject_group};
use crate::error::{Error, Result};
use crate::model::{Agent, Side, View};
use crate::set::ContractSet;

/// Summary of an allocation's standing in a view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockReport {
    /// `B(Y) ∩ X'`.
    pub blocking_contracts: ContractSet,
    pub is_ir: bool,
    pub is_quasi_stable: bool,
    pub is_stable: bool,
}

/// `C_{W'}(Y) = C_{F'}(Y) = Y`.
pub fn is_individually_rational(view: &View<'_>, y: &ContractSet) -> Result<bool> {
    view.check_within(y, "allocation")?;
    Ok(ir_unchecked(view, y))
}

pub(crate) fn ir_unchecked(view: &View<'_>, y: &ContractSet) -> bool {
    let m = view.market();
    m.is_allocation(y)
        && &choose_group(m, Side::Workers, view.workers(), y) == y
        && &choose_group(m, Side::Firms, view.firms(), y) == y
}

/// Whether `x` is chosen by its own endpoint on `side` when offered alongside `y`.
fn wanted_by(view: &View<'_>, y: &ContractSet, x: usize, side: Side) -> bool {
    let m = view.market();
    let agent = Agent::on(side, m.endpoint(x, side));
    choose(m, agent, &y.with(x)).contains(x)
}

/// `Γ^{X'}_{W'}(Y) = {x ∈ X' : x ∈ C_{W'}(Y ∪ {x})}` for an individually rational `Y`.
pub fn gamma(view: &View<'_>, y: &ContractSet) -> Result<ContractSet> {
    view.check_within(y, "allocation")?;
    if !ir_unchecked(view, y) {
        return Err(Error::Precondition(format!(
            "{} is not individually rational",
            view.market().format_set(y)
        )));
    }
    Ok(gamma_unchecked(view, y))
}

pub(crate) fn gamma_unchecked(view: &View<'_>, y: &ContractSet) -> ContractSet {
    view.contracts()
        .iter()
        .filter(|&x| wanted_by(view, y, x, Side::Workers))
        .collect()
}

/// `B(Y) ∩ X'`: contracts outside `Y` that both endpoints would take alongside `Y`.
pub fn blocking_contracts(view: &View<'_>, y: &ContractSet) -> Result<ContractSet> {
    view.check_within(y, "allocation")?;
    Ok(view
        .contracts()
        .difference(y)
        .iter()
        .filter(|&x| wanted_by(view, y, x, Side::Workers) && wanted_by(view, y, x, Side::Firms))
        .collect())
}

/// `C_{F'}(Γ(Y))` for an individually rational `Y`.
pub(crate) fn firm_choice_of_gamma(view: &View<'_>, y: &ContractSet) -> ContractSet {
    choose_group(view.market(), Side::Firms, view.firms(), &gamma_unchecked(view, y))
}

/// Individually rational and `Y ⊆ C_{F'}(Γ(Y))`. Non-IR sets are not quasi-stable.
pub fn is_quasi_stable(view: &View<'_>, y: &ContractSet) -> Result<bool> {
    view.check_within(y, "allocation")?;
    Ok(quasi_stable_unchecked(view, y))
}

pub(crate) fn quasi_stable_unchecked(view: &View<'_>, y: &ContractSet) -> bool {
    ir_unchecked(view, y) && y.is_subset(&firm_choice_of_gamma(view, y))
}

/// Individually rational and `Y = C_{F'}(Γ(Y))`.
pub fn is_stable(view: &View<'_>, y: &ContractSet) -> Result<bool> {
    view.check_within(y, "allocation")?;
    Ok(stable_unchecked(view, y))
}

pub(crate) fn stable_unchecked(view: &View<'_>, y: &ContractSet) -> bool {
    ir_unchecked(view, y) && y == &firm_choice_of_gamma(view, y)
}

/// `Z ⊆ C_{W'}(Y ∪ Z) ∩ C_{F'}(Y ∪ Z)` for non-empty `Z` disjoint from `Y`.
pub fn is_blocking_set(view: &View<'_>, y: &ContractSet, z: &ContractSet) -> Result<bool> {
    view.check_within(y, "allocation")?;
    view.check_within(z, "candidate blocking set")?;
    if z.is_empty() {
        return Err(Error::Input("a blocking set must be non-empty".into()));
    }
    if !z.is_disjoint(y) {
        return Err(Error::Input(
            "a blocking set must be disjoint from the allocation".into(),
        ));
    }
    Ok(blocks_unchecked(view, y, z))
}

pub(crate) fn blocks_unchecked(view: &View<'_>, y: &ContractSet, z: &ContractSet) -> bool {
    let m = view.market();
    let yz = y.union(z);
    z.is_subset(&choose_group(m, Side::Workers, view.workers(), &yz))
        && z.is_subset(&choose_group(m, Side::Firms, view.firms(), &yz))
}

/// `Y^Z = (Y ∪ Z) \ (R_{W'}(Y ∪ Z) ∪ R_{F'}(Y ∪ Z))` for a blocking set `Z` of `Y`.
pub fn satisfy(view: &View<'_>, y: &ContractSet, z: &ContractSet) -> Result<ContractSet> {
    if !is_blocking_set(view, y, z)? {
        let m = view.market();
        return Err(Error::Precondition(format!(
            "{} is not a blocking set of {}",
            m.format_set(z),
            m.format_set(y)
        )));
    }
    Ok(satisfy_unchecked(view, y, z))
}

pub(crate) fn satisfy_unchecked(view: &View<'_>, y: &ContractSet, z: &ContractSet) -> ContractSet {
    let m = view.market();
    let yz = y.union(z);
    let rejected =
        reject_group(m, Side::Workers, view.workers(), &yz).union(&reject_group(m, Side::Firms, view.firms(), &yz));
    yz.difference(&rejected)
}

pub fn block_report(view: &View<'_>, y: &ContractSet) -> Result<BlockReport> {
    let blocking = blocking_contracts(view, y)?;
    let is_ir = ir_unchecked(view, y);
    Ok(BlockReport {
        blocking_contracts: blocking,
        is_ir,
        is_quasi_stable: is_ir && quasi_stable_unchecked(view, y),
        is_stable: is_ir && stable_unchecked(view, y),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::m1;
    use crate::model::Market;

    fn set(m: &Market, ids: &[&str]) -> ContractSet {
        m.parse_set(ids).unwrap()
    }

    #[test]
    fn gamma_on_m1() {
        let m = m1();
        let v = m.full_view();
        assert_eq!(gamma(&v, &ContractSet::new()).unwrap(), m.all_contracts());
        assert_eq!(gamma(&v, &set(&m, &["c"])).unwrap(), m.all_contracts());
        let vf1 = m.view_from_ids(None, Some(&["f1"])).unwrap();
        assert_eq!(gamma(&vf1, &ContractSet::new()).unwrap(), set(&m, &["a", "c"]));
        assert!(matches!(gamma(&v, &set(&m, &["b", "d"])), Err(Error::Precondition(_))));
    }

    #[test]
    fn blocking_contracts_on_m1() {
        let m = m1();
        let v = m.full_view();
        assert_eq!(blocking_contracts(&v, &set(&m, &["a"])).unwrap(), set(&m, &["c", "d"]));
        assert_eq!(
            blocking_contracts(&v, &set(&m, &["a", "d"])).unwrap(),
            ContractSet::new()
        );
        assert_eq!(blocking_contracts(&v, &set(&m, &["c"])).unwrap(), set(&m, &["b", "d"]));
    }

    #[test]
    fn individual_rationality_on_m1() {
        let m = m1();
        let v = m.full_view();
        assert!(is_individually_rational(&v, &set(&m, &["a", "d"])).unwrap());
        assert!(is_individually_rational(&v, &ContractSet::new()).unwrap());
        assert!(!is_individually_rational(&v, &set(&m, &["b", "d"])).unwrap());
    }

    #[test]
    fn quasi_stability_and_stability_on_m1() {
        let m = m1();
        let v = m.full_view();
        assert!(is_quasi_stable(&v, &ContractSet::new()).unwrap());
        assert!(is_quasi_stable(&v, &set(&m, &["c"])).unwrap());
        assert!(!is_quasi_stable(&v, &set(&m, &["a"])).unwrap());
        assert!(!is_quasi_stable(&v, &set(&m, &["b", "d"])).unwrap());

        assert!(is_stable(&v, &set(&m, &["a", "d"])).unwrap());
        assert!(is_stable(&v, &set(&m, &["b", "c"])).unwrap());
        assert!(!is_stable(&v, &set(&m, &["c"])).unwrap());
    }

    #[test]
    fn predicates_reject_sets_outside_the_view() {
        let m = m1();
        let vf1 = m.view_from_ids(None, Some(&["f1"])).unwrap();
        assert!(matches!(is_stable(&vf1, &set(&m, &["b"])), Err(Error::Input(_))));
    }

    #[test]
    fn blocking_sets_on_m1() {
        let m = m1();
        let v = m.full_view();
        assert!(is_blocking_set(&v, &set(&m, &["c"]), &set(&m, &["b"])).unwrap());
        assert!(!is_blocking_set(&v, &set(&m, &["a", "d"]), &set(&m, &["c"])).unwrap());
        assert!(is_blocking_set(&v, &ContractSet::new(), &set(&m, &["b", "c"])).unwrap());
        assert!(is_blocking_set(&v, &set(&m, &["c"]), &ContractSet::new()).is_err());
        assert!(is_blocking_set(&v, &set(&m, &["c"]), &set(&m, &["c"])).is_err());
    }

    #[test]
    fn satisfying_blocks_on_m1() {
        let m = m1();
        let v = m.full_view();
        assert_eq!(
            satisfy(&v, &set(&m, &["c"]), &set(&m, &["b"])).unwrap(),
            set(&m, &["b", "c"])
        );
        assert_eq!(
            satisfy(&v, &ContractSet::new(), &set(&m, &["b", "c"])).unwrap(),
            set(&m, &["b", "c"])
        );
        assert_eq!(
            satisfy(&v, &set(&m, &["a"]), &set(&m, &["d"])).unwrap(),
            set(&m, &["a", "d"])
        );
        assert!(matches!(
            satisfy(&v, &set(&m, &["a", "d"]), &set(&m, &["c"])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn satisfying_a_block_can_displace_contracts() {
        // from {a}, satisfying {c} makes f1 drop a
        let m = m1();
        let v = m.full_view();
        assert_eq!(
            satisfy(&v, &set(&m, &["a"]), &set(&m, &["c"])).unwrap(),
            set(&m, &["c"])
        );
    }

    #[test]
    fn report_respects_implication_chain() {
        let m = m1();
        let v = m.full_view();
        for y in m.all_contracts().subsets() {
            let r = block_report(&v, &y).unwrap();
            assert!(!r.is_stable || r.is_quasi_stable);
            assert!(!r.is_quasi_stable || r.is_ir);
            assert_eq!(r.is_stable, r.is_ir && r.blocking_contracts.is_empty());
        }
    }

    #[test]
    fn gamma_contains_ir_allocations_and_matches_blocking_form() {
        // Y ⊆ Γ(Y), and C_F(Y ∪ B(Y)) = C_F(Γ(Y)), on every IR allocation of M1
        let m = m1();
        let v = m.full_view();
        for y in m.all_contracts().subsets() {
            if !is_individually_rational(&v, &y).unwrap() {
                continue;
            }
            let g = gamma(&v, &y).unwrap();
            assert!(y.is_subset(&g));
            let with_blocks = y.union(&blocking_contracts(&v, &y).unwrap());
            assert_eq!(
                choose_group(&m, Side::Firms, v.firms(), &with_blocks),
                choose_group(&m, Side::Firms, v.firms(), &g)
            );
        }
    }
}
