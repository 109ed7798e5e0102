mod common;

use proptest::prelude::*;

use quasistable::choice::{choose_group, reject_group, Property};
use quasistable::da::{da_outcome, da_run, verify_trace, worker_pessimal, ProposalStrategy};
use quasistable::fixtures::{complementary_table_market, m1};
use quasistable::format::{market_to_string, parse_market};
use quasistable::gen::{gen_market, Family, GenParams};
use quasistable::lattice::{isotone_check, tarski, BlairOrder};
use quasistable::oracle::{
    certify, def_firm_quasi_stable, def_worker_quasi_stable, enumerate, maximal_elements, minimal_stable_above,
};
use quasistable::scenario::{polarity_check, DisruptionEvent};
use quasistable::stability::{gamma, is_individually_rational, is_quasi_stable, is_stable};
use quasistable::{ContractSet, Side};

/// Unit quotas and full density on a square market: many stable allocations.
fn dense(n: usize, seed: u64) -> GenParams {
    GenParams {
        n_workers: n,
        n_firms: n,
        seed,
        ..GenParams::default()
    }
}

fn small_market() -> impl Strategy<Value = GenParams> {
    (
        1usize..=3,
        1usize..=3,
        1usize..=2,
        0.4f64..=1.0,
        1usize..=2,
        0.6f64..=1.0,
        any::<u64>(),
    )
        .prop_map(
            |(n_workers, n_firms, max_contracts_per_pair, density, quota_max, acceptability_rate, seed)| GenParams {
                n_workers,
                n_firms,
                max_contracts_per_pair,
                density,
                quota_range: (1, quota_max),
                acceptability_rate,
                seed,
                family: Family::GreedyOnly,
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn side_choices_inherit_substitutability_and_path_independence(p in small_market(), ya in any::<u64>(), za in any::<u64>()) {
        let m = gen_market(&p).unwrap().market;
        let n = m.num_contracts();
        let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        let y: ContractSet = (0..n).filter(|i| ya & mask & (1 << i) != 0).collect();
        let z: ContractSet = (0..n).filter(|i| za & mask & (1 << i) != 0).collect::<ContractSet>().intersection(&y);
        for side in [Side::Workers, Side::Firms] {
            let agents: Vec<usize> = (0..m.agents(side).len()).collect();
            let cy = choose_group(&m, side, &agents, &y);
            let cz = choose_group(&m, side, &agents, &z);
            prop_assert!(cy.intersection(&z).is_subset(&cz));
            prop_assert!(reject_group(&m, side, &agents, &z).is_subset(&reject_group(&m, side, &agents, &y)));
            let w: ContractSet = (0..n).filter(|i| za & mask & (1 << i) != 0).collect();
            let direct = choose_group(&m, side, &agents, &y.union(&w));
            let staged = choose_group(&m, side, &agents, &cy.union(&w));
            prop_assert_eq!(direct, staged);
        }
    }

    #[test]
    fn stability_implication_chain(p in small_market()) {
        let m = gen_market(&p).unwrap().market;
        prop_assume!(m.num_contracts() <= 12);
        let v = m.full_view();
        for y in m.all_contracts().subsets().filter(|y| m.is_allocation(y)) {
            let ir = is_individually_rational(&v, &y).unwrap();
            let qs = is_quasi_stable(&v, &y).unwrap();
            let st = is_stable(&v, &y).unwrap();
            prop_assert!(!st || qs);
            prop_assert!(!qs || ir);
            if ir {
                prop_assert!(y.is_subset(&gamma(&v, &y).unwrap()));
            }
        }
    }

    #[test]
    fn blair_order_is_a_partial_order_on_ir_allocations(p in small_market()) {
        let m = gen_market(&p).unwrap().market;
        prop_assume!(m.num_contracts() <= 12);
        let v = m.full_view();
        let ir = enumerate(&v).unwrap().ir;
        for side in [Side::Workers, Side::Firms] {
            let o = BlairOrder::of(&v, side);
            let d: Vec<Vec<bool>> = ir.iter().map(|a| ir.iter().map(|b| o.dominates(&m, a, b).unwrap()).collect()).collect();
            for i in 0..ir.len() {
                prop_assert!(d[i][i]);
                for j in 0..ir.len() {
                    prop_assert!(!(d[i][j] && d[j][i]) || i == j);
                    for k in 0..ir.len() {
                        prop_assert!(!(d[i][j] && d[j][k]) || d[i][k]);
                    }
                }
            }
        }
    }

    #[test]
    fn tarski_is_isotone_on_quasi_stable_allocations(p in small_market()) {
        let m = gen_market(&p).unwrap().market;
        prop_assume!(m.num_contracts() <= 12);
        let v = m.full_view();
        let q = enumerate(&v).unwrap().quasi_stable;
        let o = BlairOrder::of(&v, Side::Workers);
        for a in &q {
            prop_assert!(q.contains(&tarski(&v, a).unwrap()));
            for b in &q {
                if o.dominates(&m, a, b).unwrap() {
                    prop_assert!(isotone_check(&v, a, b).is_ok());
                }
            }
        }
    }

    #[test]
    fn worker_pessimal_is_firm_optimal(p in small_market()) {
        let m = gen_market(&p).unwrap().market;
        prop_assume!(m.num_contracts() <= 12);
        let v = m.full_view();
        let e = enumerate(&v).unwrap();
        let wp = worker_pessimal(&v).unwrap();
        prop_assert_eq!(maximal_elements(&v, &e.stable, Side::Firms).unwrap(), vec![wp.clone()]);
        let workers = BlairOrder::of(&v, Side::Workers);
        for s in &e.stable {
            prop_assert!(workers.dominates(&m, s, &wp).unwrap());
        }
    }

    #[test]
    fn market_files_round_trip(p in small_market()) {
        let m = gen_market(&p).unwrap().market;
        let text = market_to_string(&m);
        let back = parse_market(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(market_to_string(&back), text);
        prop_assert_eq!(m.dualize().dualize(), m);
    }

    #[test]
    fn dual_firm_quasi_stability_is_worker_quasi_stability(p in small_market()) {
        let m = gen_market(&p).unwrap().market;
        prop_assume!(m.num_contracts() <= 12);
        let d = m.dualize();
        let (v, dv) = (m.full_view(), d.full_view());
        for y in m.all_contracts().subsets().filter(|y| m.is_allocation(y)) {
            let dy = d.parse_set(&m.ids(&y)).unwrap();
            prop_assert_eq!(def_worker_quasi_stable(&v, &y), def_firm_quasi_stable(&dv, &dy));
            prop_assert_eq!(def_firm_quasi_stable(&v, &y), def_worker_quasi_stable(&dv, &dy));
        }
        // worker-proposing deferred acceptance in the dual reaches the worker-optimal allocation
        let e = enumerate(&v).unwrap();
        let top = maximal_elements(&v, &e.stable, Side::Workers).unwrap();
        let dual_outcome = m.parse_set(&d.ids(&worker_pessimal(&dv).unwrap())).unwrap();
        prop_assert_eq!(top, vec![dual_outcome]);
    }

    #[test]
    fn polarity_holds_across_random_views(p in small_market(), pick in any::<u64>()) {
        let m = gen_market(&p).unwrap().market;
        prop_assume!(m.num_contracts() <= 12);
        let nf = m.firms().len();
        let nw = m.workers().len();
        let entering: Vec<usize> = (0..nf).filter(|f| pick >> f & 1 == 1).collect();
        let exiting: Vec<usize> = (0..nw).filter(|w| pick >> (8 + w) & 1 == 1).collect();
        let e = DisruptionEvent::new(&m, &entering, &exiting).unwrap();
        let before = enumerate(&e.before).unwrap().stable;
        let after = enumerate(&e.after).unwrap().stable;
        for y in &before {
            for y2 in &after {
                prop_assert!(polarity_check(&e, y, y2).is_ok());
            }
        }
    }
}

#[test]
fn dense_markets_have_rich_lattices_and_certify() {
    let mut several = 0;
    for seed in 0..40 {
        let m = gen_market(&dense(3, seed)).unwrap().market;
        let v = m.full_view();
        let c = certify(&v).unwrap();
        assert!(c.passed(), "seed {seed}: {c:#?}");
        let e = enumerate(&v).unwrap();
        if e.stable.len() > 1 {
            several += 1;
        }
        for y in &e.quasi_stable {
            let expected = minimal_stable_above(&v, &e, y);
            for s in [
                ProposalStrategy::Full,
                ProposalStrategy::SingleLex,
                ProposalStrategy::RandomSubset { seed },
            ] {
                let t = da_run(&v, y, s).unwrap();
                verify_trace(&v, &t).unwrap();
                assert_eq!(expected, vec![t.outcome]);
            }
        }
    }
    assert!(several >= 5, "only {several} markets with several stable allocations");
}

#[test]
fn four_by_four_unit_markets() {
    for seed in 0..10 {
        let m = gen_market(&dense(4, seed)).unwrap().market;
        let v = m.full_view();
        let e = enumerate(&v).unwrap();
        let wp = worker_pessimal(&v).unwrap();
        assert_eq!(maximal_elements(&v, &e.stable, Side::Firms).unwrap(), vec![wp]);
        for y in &e.quasi_stable {
            assert_eq!(minimal_stable_above(&v, &e, y), vec![da_outcome(&v, y).unwrap()]);
        }
    }
}

#[test]
fn certification_names_non_substitutable_agents() {
    let m = complementary_table_market();
    let c = certify(&m.full_view()).unwrap();
    assert_eq!(c.non_substitutable_agents, vec!["f".to_string()]);
}

#[test]
fn mixed_family_reports_match_verifiers() {
    let markets = common::markets_with(3, 30, 12, Family::Mixed);
    let mut failing = 0;
    for g in &markets {
        for r in &g.reports {
            if !r.passed {
                failing += 1;
                assert!(r.witness.is_some());
                assert!(quasistable::choice::replay_witness(&g.market, r).unwrap());
            }
        }
    }
    assert!(failing > 0);
}

#[test]
fn m1_values() {
    let m = m1();
    let v = m.full_view();
    let e = enumerate(&v).unwrap();
    let ids: Vec<Vec<String>> = e.stable.iter().map(|y| m.ids(y)).collect();
    assert_eq!(ids, vec![vec!["a", "d"], vec!["b", "c"]]);
    assert!(
        quasistable::choice::verify(&m, m.agent("w1").unwrap(), Property::LawOfAggregateDemand, 12)
            .unwrap()
            .passed
    );
}
