#![allow(dead_code)]

use quasistable::gen::{gen_market, Family, GenParams, GeneratedMarket};
use quasistable::rng::SplitMix64;
use quasistable::Error;

/// Parameters for the `i`-th market of a batch: 1-4 agents per side, up to two
/// contracts per pair.
pub fn draw_params(master: u64, i: u64, family: Family) -> GenParams {
    let mut r = SplitMix64::new(master).fork(i);
    GenParams {
        n_workers: r.range_inclusive(1, 4),
        n_firms: r.range_inclusive(1, 4),
        max_contracts_per_pair: r.range_inclusive(1, 2),
        density: 0.5 + 0.5 * r.next_f64(),
        quota_range: (1, r.range_inclusive(1, 2)),
        acceptability_rate: 0.7 + 0.3 * r.next_f64(),
        seed: r.next_u64(),
        family,
    }
}

/// The first `count` markets of the batch with at most `max_contracts` contracts.
pub fn markets_with(master: u64, count: usize, max_contracts: usize, family: Family) -> Vec<GeneratedMarket> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count {
        match gen_market(&draw_params(master, i, family)) {
            Ok(g) if g.market.num_contracts() <= max_contracts => out.push(g),
            Ok(_) | Err(Error::TooLarge { .. }) => {}
            Err(e) => panic!("generation failed: {e}"),
        }
        i += 1;
    }
    out
}

pub fn greedy_markets(master: u64, count: usize, max_contracts: usize) -> Vec<GeneratedMarket> {
    markets_with(master, count, max_contracts, Family::GreedyOnly)
}
