//! Deterministic discrete-event simulation of the key-management layer.
//!
//! Key material is discretized into fixed-size blocks so the one-time-pad
//! relay can be exercised on real bits, while application consumption
//! drains the per-pair quantum key pools as a fluid. One logical event
//! loop per run with a fixed tie-breaking order makes every report
//! bit-reproducible from its seed.
//!
//! * **Relayed** runs generate pad blocks on every adjacent link, split
//!   them round-robin across the pairs whose shortest path crosses the
//!   link (exactly equal over a full round), and deliver an end-to-end key
//!   block once a pad from every path link is available. Each delivery is
//!   relayed hop by hop with XOR re-encryption and checked bit-exact at
//!   the far end.
//! * **Switched** runs execute the periodic TDM schedule: a pair's pool
//!   fills only while its hop phase is active and nothing fills during
//!   reconfiguration gaps. Pools are pre-charged with one full period of
//!   generation before consumption starts, since a cold start would starve
//!   trivially; measurement additionally begins only after the configured
//!   warmup.
//!
//! Consumption below capacity drains exactly the demanded bits; when a
//! pool empties with unmet demand the shortfall is dropped, the stall is
//! counted as a starvation event and the pool is flagged starved.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{self, RingScenario};
use crate::rng::SplitMix64;
use crate::skr::GenerationModel;
use crate::switched::{self, SwitchedConfig};

/// A fixed-size block of symmetric key material.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyBlock {
    /// Key bits, packed little-endian into bytes.
    pub bits: Vec<u8>,
    /// Link or pair that produced the block.
    pub origin: (usize, usize),
    /// Per-origin emission counter.
    pub sequence: u64,
}

impl KeyBlock {
    fn random(rng: &mut SplitMix64, block_bits: usize, origin: (usize, usize), sequence: u64) -> Self {
        let mut bits = vec![0u8; block_bits / 8];
        rng.fill_bytes(&mut bits);
        Self { bits, origin, sequence }
    }
}

/// Forwards `end_key` over a chain of per-link pads by XOR re-encryption.
///
/// Hop `i` transmits `end_key XOR link_keys[i]` after decrypting the
/// previous hop's ciphertext, so the transcript carries one ciphertext per
/// hop and the last node recovers the end key bit-exactly. An empty chain
/// is the identity.
pub fn relay_chain_xor(
    end_key: &KeyBlock,
    link_keys: &[KeyBlock],
) -> Result<(Vec<Vec<u8>>, KeyBlock)> {
    let mut transcript = Vec::with_capacity(link_keys.len());
    let mut plain = end_key.bits.clone();
    for pad in link_keys {
        if pad.bits.len() != end_key.bits.len() {
            return Err(Error::BlockSizeMismatch {
                expected: end_key.bits.len() * 8,
                got: pad.bits.len() * 8,
            });
        }
        // Previous hop has decrypted back to `plain`; re-encrypt for this hop.
        let cipher: Vec<u8> = plain.iter().zip(&pad.bits).map(|(p, k)| p ^ k).collect();
        transcript.push(cipher.clone());
        plain = cipher.iter().zip(&pad.bits).map(|(c, k)| c ^ k).collect();
    }
    let recovered = KeyBlock { bits: plain, origin: end_key.origin, sequence: end_key.sequence };
    Ok((transcript, recovered))
}

/// Simulation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Key block size in bits (multiple of 8).
    pub block_bits: usize,
    /// Time before measurement starts, seconds. For switched runs the
    /// pre-charge period is in addition to this.
    pub warmup_s: f64,
    /// Measurement window length, seconds.
    pub measure_s: f64,
    /// Demand drained from every pair pool, bits/s.
    pub consumption_rate_bps: f64,
    /// Seed for key material generation.
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_bits == 0 || !self.block_bits.is_multiple_of(8) {
            return Err(Error::InvalidParameter {
                name: "block_bits",
                reason: format!("{} is not a positive multiple of 8", self.block_bits),
            });
        }
        if self.warmup_s.is_nan() || self.warmup_s < 0.0 {
            return Err(Error::InvalidParameter {
                name: "warmup_s",
                reason: format!("{} is negative", self.warmup_s),
            });
        }
        if self.measure_s.is_nan() || self.measure_s <= 0.0 {
            return Err(Error::NonPositive { name: "measure_s", value: self.measure_s });
        }
        if self.consumption_rate_bps.is_nan() || self.consumption_rate_bps < 0.0 {
            return Err(Error::InvalidParameter {
                name: "consumption_rate_bps",
                reason: format!("{} is negative", self.consumption_rate_bps),
            });
        }
        Ok(())
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            block_bits: 256,
            warmup_s: 30.0,
            measure_s: 60.0,
            consumption_rate_bps: 0.0,
            seed: 1,
        }
    }
}

/// Steady-state statistics for one SAE pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub pair: (usize, usize),
    /// Bits actually handed to the consuming applications per second of
    /// the measurement window.
    pub delivered_bps: f64,
    /// Lowest pool fill observed during the window, bits.
    pub min_pool_bits: f64,
    /// Highest pool fill observed during the window, bits.
    pub max_pool_bits: f64,
    /// Transitions into an empty-pool stall during the window.
    pub starvation_events: u64,
    pub starved: bool,
}

/// Result of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub pairs: Vec<PairStats>,
    pub total_starvation_events: u64,
    /// `Some(true)` when every relayed delivery recovered the injected end
    /// key bit-exactly; `None` for switched runs (nothing is relayed).
    pub relay_symmetry_ok: Option<bool>,
}

impl SimReport {
    pub fn any_starved(&self) -> bool {
        self.total_starvation_events > 0
    }
}

// ---------------------------------------------------------------------------
// Event loop plumbing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    PeriodStart,
    PhaseEnd { phase: usize },
    ConsumptionStart,
    PhaseStart { phase: usize },
    LinkBlock { link: usize },
    PairBlock { pair: usize, epoch: u64 },
    StatsStart,
    StatsEnd,
}

impl EventKind {
    fn rank(&self) -> u8 {
        match self {
            EventKind::PeriodStart => 0,
            EventKind::PhaseEnd { .. } => 1,
            EventKind::ConsumptionStart => 2,
            EventKind::PhaseStart { .. } => 3,
            EventKind::LinkBlock { .. } | EventKind::PairBlock { .. } => 4,
            EventKind::StatsStart => 5,
            EventKind::StatsEnd => 6,
        }
    }

    fn key(&self) -> usize {
        match self {
            EventKind::PhaseEnd { phase } | EventKind::PhaseStart { phase } => *phase,
            EventKind::LinkBlock { link } => *link,
            EventKind::PairBlock { pair, .. } => *pair,
            _ => 0,
        }
    }
}

#[derive(Debug)]
struct Event {
    time_s: f64,
    seq: u64,
    kind: EventKind,
}

impl Event {
    fn order(&self) -> (f64, u8, usize, u64) {
        (self.time_s, self.kind.rank(), self.kind.key(), self.seq)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.order().0.total_cmp(&other.order().0) == Ordering::Equal
            && self.order().1 == other.order().1
            && self.order().2 == other.order().2
            && self.order().3 == other.order().3
    }
}
impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed so the BinaryHeap pops the earliest event first.
        let a = self.order();
        let b = other.order();
        b.0.total_cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(b.2.cmp(&a.2))
            .then(b.3.cmp(&a.3))
    }
}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct EventQueue {
    heap: BinaryHeap<Event>,
    seq: u64,
}

impl EventQueue {
    fn new() -> Self {
        Self { heap: BinaryHeap::new(), seq: 0 }
    }

    fn push(&mut self, time_s: f64, kind: EventKind) {
        self.heap.push(Event { time_s, seq: self.seq, kind });
        self.seq += 1;
    }

    fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }
}

/// Per-pair quantum key pool with fluid drain accounting.
#[derive(Debug, Clone)]
struct KeyPool {
    level_bits: f64,
    last_update_s: f64,
    drain_bps: f64,
    draining: bool,
    in_stall: bool,
    stats_active: bool,
    consumed_bits: f64,
    min_level_bits: f64,
    max_level_bits: f64,
    starvation_events: u64,
}

impl KeyPool {
    fn new() -> Self {
        Self {
            level_bits: 0.0,
            last_update_s: 0.0,
            drain_bps: 0.0,
            draining: false,
            in_stall: false,
            stats_active: false,
            consumed_bits: 0.0,
            min_level_bits: f64::INFINITY,
            max_level_bits: 0.0,
            starvation_events: 0,
        }
    }

    /// Integrates the continuous drain up to `now`. Fill level never goes
    /// negative: unmet demand stalls and is counted instead.
    fn advance(&mut self, now: f64) {
        let dt = now - self.last_update_s;
        self.last_update_s = now;
        if dt <= 0.0 {
            return;
        }
        if self.draining && self.drain_bps > 0.0 {
            let demand = self.drain_bps * dt;
            if demand <= self.level_bits {
                self.level_bits -= demand;
                if self.stats_active {
                    self.consumed_bits += demand;
                }
                self.in_stall = false;
            } else {
                let served = self.level_bits;
                self.level_bits = 0.0;
                if self.stats_active {
                    self.consumed_bits += served;
                    if !self.in_stall {
                        self.starvation_events += 1;
                    }
                }
                self.in_stall = true;
            }
        }
        if self.stats_active {
            self.min_level_bits = self.min_level_bits.min(self.level_bits);
        }
    }

    fn deposit(&mut self, now: f64, bits: f64) {
        self.advance(now);
        self.level_bits += bits;
        if bits > 0.0 {
            self.in_stall = false;
        }
        if self.stats_active {
            self.max_level_bits = self.max_level_bits.max(self.level_bits);
        }
    }

    fn start_stats(&mut self, now: f64) {
        self.advance(now);
        self.stats_active = true;
        self.consumed_bits = 0.0;
        self.min_level_bits = self.level_bits;
        self.max_level_bits = self.level_bits;
        self.starvation_events = 0;
        // A stall in progress at the window start counts once it persists.
        self.in_stall = false;
    }

    fn end_stats(&mut self, now: f64) {
        self.advance(now);
        self.stats_active = false;
    }
}

fn pair_key(s: usize, d: usize) -> (usize, usize) {
    (s.min(d), s.max(d))
}

fn report_from_pools(
    pairs: &[(usize, usize)],
    pools: &[KeyPool],
    measure_s: f64,
    relay_symmetry_ok: Option<bool>,
) -> SimReport {
    let mut stats = Vec::with_capacity(pairs.len());
    let mut total = 0u64;
    for (idx, &pair) in pairs.iter().enumerate() {
        let pool = &pools[idx];
        total += pool.starvation_events;
        stats.push(PairStats {
            pair,
            delivered_bps: pool.consumed_bits / measure_s,
            min_pool_bits: if pool.min_level_bits.is_finite() { pool.min_level_bits } else { 0.0 },
            max_pool_bits: pool.max_level_bits,
            starvation_events: pool.starvation_events,
            starved: pool.starvation_events > 0,
        });
    }
    SimReport { pairs: stats, total_starvation_events: total, relay_symmetry_ok }
}

// ---------------------------------------------------------------------------
// Relayed architecture
// ---------------------------------------------------------------------------

/// Runs the relayed key-management simulation.
///
/// Consumption is active from t = 0; statistics cover
/// `[warmup_s, warmup_s + measure_s)`. Demand above the sustainable rate is
/// reported as starvation, not as an error.
pub fn run_relayed(
    scenario: &RingScenario,
    model: &GenerationModel,
    sim: &SimConfig,
) -> Result<SimReport> {
    scenario.validate()?;
    sim.validate()?;
    let n = scenario.node_count;
    let block_bits = sim.block_bits;
    let link_rate = model.rate_bps(scenario.adjacent_attenuation_db());

    // Pair table and per-pair shortest paths (link indices, in relay order).
    let mut pairs = Vec::new();
    for s in 1..=n {
        for d in s + 1..=n {
            pairs.push((s, d));
        }
    }
    let pair_index = |p: (usize, usize)| -> usize {
        pairs.binary_search(&p).expect("pair table covers all pairs")
    };
    let mut paths: Vec<Vec<usize>> = Vec::with_capacity(pairs.len());
    for &(s, d) in &pairs {
        let forward = d - s;
        let (start, hops) =
            if forward <= (n - 1) / 2 { (s, forward) } else { (d, n - forward) };
        let path = (0..hops).map(|j| (start - 1 + j) % n).collect();
        paths.push(path);
    }

    // Round-robin split targets per link: (pair index, slot on its path).
    let mut split_targets: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
    for a in 1..=n {
        let crossing = ring::enumerate_crossing_paths(n, (a, a % n + 1))?;
        let mut targets: Vec<(usize, usize)> = crossing
            .into_iter()
            .map(|(s, d)| {
                let idx = pair_index(pair_key(s, d));
                let slot = paths[idx]
                    .iter()
                    .position(|&l| l == a - 1)
                    .expect("crossing pair path contains the link");
                (idx, slot)
            })
            .collect();
        targets.sort_unstable();
        split_targets.push(targets);
    }

    let mut pad_pools: Vec<Vec<VecDeque<KeyBlock>>> =
        paths.iter().map(|path| vec![VecDeque::new(); path.len()]).collect();
    let mut pools: Vec<KeyPool> = vec![KeyPool::new(); pairs.len()];
    for pool in &mut pools {
        pool.drain_bps = sim.consumption_rate_bps;
        pool.draining = true;
    }

    let mut rng = SplitMix64::new(sim.seed);
    let mut queue = EventQueue::new();
    let stats_start = sim.warmup_s;
    let stats_end = sim.warmup_s + sim.measure_s;
    queue.push(stats_start, EventKind::StatsStart);
    queue.push(stats_end, EventKind::StatsEnd);

    let block_interval_s = if link_rate > 0.0 { block_bits as f64 / link_rate } else { f64::NAN };
    if block_interval_s.is_finite() {
        for link in 0..n {
            queue.push(block_interval_s, EventKind::LinkBlock { link });
        }
    }

    let mut rr_cursor = vec![0usize; n];
    let mut link_sequence = vec![0u64; n];
    let mut pair_sequence = vec![0u64; pairs.len()];
    let mut pads_generated = vec![0u64; n];
    let mut pads_consumed = vec![0u64; n];
    let mut symmetry_ok = true;

    while let Some(event) = queue.pop() {
        let now = event.time_s;
        match event.kind {
            EventKind::LinkBlock { link } => {
                let pad = KeyBlock::random(
                    &mut rng,
                    block_bits,
                    (link + 1, (link + 1) % n + 1),
                    link_sequence[link],
                );
                link_sequence[link] += 1;
                pads_generated[link] += 1;

                let targets = &split_targets[link];
                let (pair_idx, slot) = targets[rr_cursor[link]];
                rr_cursor[link] = (rr_cursor[link] + 1) % targets.len();
                pad_pools[pair_idx][slot].push_back(pad);

                // Deliver an end-to-end block once every hop has a pad.
                if pad_pools[pair_idx].iter().all(|q| !q.is_empty()) {
                    let pads: Vec<KeyBlock> = pad_pools[pair_idx]
                        .iter_mut()
                        .map(|q| q.pop_front().expect("checked non-empty"))
                        .collect();
                    for &l in &paths[pair_idx] {
                        pads_consumed[l] += 1;
                    }
                    let end_key = KeyBlock::random(
                        &mut rng,
                        block_bits,
                        pairs[pair_idx],
                        pair_sequence[pair_idx],
                    );
                    pair_sequence[pair_idx] += 1;
                    let (transcript, recovered) = relay_chain_xor(&end_key, &pads)?;
                    symmetry_ok &=
                        recovered.bits == end_key.bits && transcript.len() == pads.len();
                    pools[pair_idx].deposit(now, block_bits as f64);
                }

                let next = now + block_interval_s;
                if next <= stats_end {
                    queue.push(next, EventKind::LinkBlock { link });
                }
            }
            EventKind::StatsStart => {
                for pool in &mut pools {
                    pool.start_stats(now);
                }
            }
            EventKind::StatsEnd => {
                for pool in &mut pools {
                    pool.end_stats(now);
                }
                break;
            }
            _ => unreachable!("relayed runs schedule only block and stats events"),
        }
    }

    for link in 0..n {
        debug_assert!(
            pads_consumed[link] <= pads_generated[link],
            "link {link} consumed more pads than it generated"
        );
    }

    Ok(report_from_pools(&pairs, &pools, sim.measure_s, Some(symmetry_ok)))
}

// ---------------------------------------------------------------------------
// Switched architecture
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct PairGeneration {
    active: bool,
    epoch: u64,
    rate_bps: f64,
    /// Bits accrued toward the next block; carried across phases so no key
    /// material is lost at phase boundaries.
    progress_bits: f64,
    credit_from_s: f64,
}

/// Runs the switched key-management simulation over the built TDM schedule.
///
/// Timeline: `[0, T)` pre-charges the pools (generation only), consumption
/// starts at `T`, and statistics cover
/// `[T + warmup_s, T + warmup_s + measure_s)`.
pub fn run_switched(
    scenario: &RingScenario,
    model: &GenerationModel,
    cfg: &SwitchedConfig,
    sim: &SimConfig,
) -> Result<SimReport> {
    sim.validate()?;
    let schedule = switched::build_schedule(scenario, model, cfg)?;
    let n = scenario.node_count;
    let period = schedule.period_s;
    let block_bits = sim.block_bits as f64;

    // Pairs grouped by hop distance; each phase serves all pairs of its hop.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut phase_members: Vec<Vec<usize>> = Vec::new();
    for phase in &schedule.phases {
        let mut members = Vec::with_capacity(n);
        for i in 1..=n {
            let j = (i - 1 + phase.hop) % n + 1;
            pairs.push(pair_key(i, j));
            members.push(pairs.len() - 1);
        }
        phase_members.push(members);
    }
    // Keep reports sorted by pair while phases address members by index.
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_unstable_by_key(|&i| pairs[i]);

    let mut pools: Vec<KeyPool> = vec![KeyPool::new(); pairs.len()];
    for pool in &mut pools {
        pool.drain_bps = sim.consumption_rate_bps;
    }
    let mut generation: Vec<PairGeneration> = schedule
        .phases
        .iter()
        .flat_map(|phase| {
            std::iter::repeat_n(
                PairGeneration {
                    active: false,
                    epoch: 0,
                    rate_bps: phase.rate_bps,
                    progress_bits: 0.0,
                    credit_from_s: 0.0,
                },
                n,
            )
        })
        .collect();

    // Phase offsets within a period: [phase][gap][phase][gap]...
    let mut phase_offsets = Vec::with_capacity(schedule.phases.len());
    let mut offset = 0.0;
    for phase in &schedule.phases {
        phase_offsets.push((offset, offset + phase.duration_s));
        offset += phase.duration_s + schedule.reconfig_time_s;
    }

    let consumption_start = period;
    let stats_start = consumption_start + sim.warmup_s;
    let stats_end = stats_start + sim.measure_s;

    let mut queue = EventQueue::new();
    queue.push(0.0, EventKind::PeriodStart);
    queue.push(consumption_start, EventKind::ConsumptionStart);
    queue.push(stats_start, EventKind::StatsStart);
    queue.push(stats_end, EventKind::StatsEnd);

    while let Some(event) = queue.pop() {
        let now = event.time_s;
        match event.kind {
            EventKind::PeriodStart => {
                for (phase_idx, &(start, end)) in phase_offsets.iter().enumerate() {
                    if now + start < stats_end {
                        queue.push(now + start, EventKind::PhaseStart { phase: phase_idx });
                    }
                    if now + end <= stats_end + period {
                        queue.push(now + end, EventKind::PhaseEnd { phase: phase_idx });
                    }
                }
                if now + period < stats_end {
                    queue.push(now + period, EventKind::PeriodStart);
                }
            }
            EventKind::PhaseStart { phase } => {
                for &idx in &phase_members[phase] {
                    let gen = &mut generation[idx];
                    gen.active = true;
                    gen.epoch += 1;
                    gen.credit_from_s = now;
                    let due = now + (block_bits - gen.progress_bits) / gen.rate_bps;
                    queue.push(due, EventKind::PairBlock { pair: idx, epoch: gen.epoch });
                }
            }
            EventKind::PhaseEnd { phase } => {
                for &idx in &phase_members[phase] {
                    let gen = &mut generation[idx];
                    if gen.active {
                        gen.progress_bits += gen.rate_bps * (now - gen.credit_from_s);
                        gen.active = false;
                        gen.epoch += 1; // invalidates pending block arrivals
                    }
                }
            }
            EventKind::PairBlock { pair, epoch } => {
                let gen = &mut generation[pair];
                if !gen.active || gen.epoch != epoch {
                    continue; // stale arrival from a finished phase
                }
                pools[pair].deposit(now, block_bits);
                gen.progress_bits = 0.0;
                gen.credit_from_s = now;
                queue.push(now + block_bits / gen.rate_bps, EventKind::PairBlock { pair, epoch });
            }
            EventKind::ConsumptionStart => {
                for pool in &mut pools {
                    pool.advance(now);
                    pool.draining = true;
                }
            }
            EventKind::StatsStart => {
                for pool in &mut pools {
                    pool.start_stats(now);
                }
            }
            EventKind::StatsEnd => {
                for pool in &mut pools {
                    pool.end_stats(now);
                }
                break;
            }
            _ => unreachable!("switched runs schedule no link events"),
        }
    }

    let sorted_pairs: Vec<(usize, usize)> = order.iter().map(|&i| pairs[i]).collect();
    let sorted_pools: Vec<KeyPool> = order.iter().map(|&i| pools[i].clone()).collect();
    Ok(report_from_pools(&sorted_pairs, &sorted_pools, sim.measure_s, None))
}
