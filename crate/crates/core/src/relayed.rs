//! Max-min consumption rate of the relayed architecture.
//!
//! Every node pair is served over its unique shortest ring path; forwarding
//! a key over a path consumes one-time-pad material from every traversed
//! link. On a uniform ring with equal per-link generation `G(A^e)`, the
//! fair optimum splits each link's keys equally among the `(N^2 - 1) / 8`
//! pairs crossing it, so the closed form is
//! `C_R = 8 * G(A^e) / (N^2 - 1)`.
//!
//! [`allocation_oracle`] rebuilds that allocation from explicit path
//! enumeration and is used to confirm the closed form exactly.

use std::collections::BTreeMap;

use crate::ring::{self, RingScenario};
use crate::skr::GenerationModel;

/// An adjacent ring link, stored as `(i, i % N + 1)`.
pub type Link = (usize, usize);
/// An unordered node pair, stored as `(min, max)`.
pub type Pair = (usize, usize);

/// Explicit per-link key split and the resulting per-pair rates.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayAllocation {
    /// For each link, the rate contributed to each pair crossing it.
    pub per_link_contributions_bps: BTreeMap<Link, BTreeMap<Pair, f64>>,
    /// Bottleneck rate of each pair: the minimum contribution on its path.
    pub per_pair_rate_bps: BTreeMap<Pair, f64>,
}

impl RelayAllocation {
    /// Smallest per-pair rate, the quantity the architecture maximizes.
    pub fn min_pair_rate_bps(&self) -> f64 {
        self.per_pair_rate_bps.values().fold(f64::INFINITY, |acc, &r| acc.min(r))
    }
}

/// Closed-form max-min consumption rate, `8 * G(a_c * Le) / (N^2 - 1)`.
///
/// Switched-path penalties never apply here: relayed links connect
/// factory-matched modules over plain fiber, so callers must pass the raw
/// model.
pub fn consumption_bps(scenario: &RingScenario, model: &GenerationModel) -> f64 {
    let n = scenario.node_count as f64;
    let per_link = model.rate_bps(scenario.adjacent_attenuation_db());
    8.0 * per_link / (n * n - 1.0)
}

/// Brute-force fair allocation by path enumeration.
///
/// Splits every link's generation equally among the pairs crossing it and
/// takes each pair's bottleneck. The minimum pair rate equals
/// [`consumption_bps`] exactly; both expressions round the same real
/// quotient.
pub fn allocation_oracle(scenario: &RingScenario, model: &GenerationModel) -> RelayAllocation {
    let n = scenario.node_count;
    let per_link_rate = model.rate_bps(scenario.adjacent_attenuation_db());

    let mut per_link_contributions_bps: BTreeMap<Link, BTreeMap<Pair, f64>> = BTreeMap::new();
    let mut per_pair_rate_bps: BTreeMap<Pair, f64> = BTreeMap::new();

    for a in 1..=n {
        let link = (a, a % n + 1);
        let crossing = ring::enumerate_crossing_paths(n, link)
            .expect("scenario was validated, links are adjacent");
        let share = per_link_rate / crossing.len() as f64;
        let mut contributions = BTreeMap::new();
        for (s, d) in crossing {
            let pair = (s.min(d), s.max(d));
            contributions.insert(pair, share);
            per_pair_rate_bps
                .entry(pair)
                .and_modify(|rate| *rate = rate.min(share))
                .or_insert(share);
        }
        per_link_contributions_bps.insert(link, contributions);
    }

    RelayAllocation { per_link_contributions_bps, per_pair_rate_bps }
}
