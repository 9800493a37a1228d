//! Uniform ring geometry and shortest-path crossing combinatorics.
//!
//! Nodes are labeled 1..=N clockwise. Node counts are restricted to odd
//! values: every non-adjacent pair then has a unique shortest path, which
//! keeps both architectures' closed forms exact. Even counts are rejected
//! rather than approximated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the fiber distance between nodes `k` hops apart is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChordMode {
    /// Straight chord of a circular embedding with circumference `N * Le`.
    /// Default; matches fibers laid point to point across the ring.
    Circle,
    /// Distance along the ring itself, `min(k, N - k) * Le`. A sensitivity
    /// knob for cable plants that follow the ring conduit.
    Arc,
}

/// A uniform odd ring: node count, adjacent link length and fiber loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingScenario {
    pub node_count: usize,
    pub adjacent_link_km: f64,
    pub attenuation_db_per_km: f64,
    pub chord_mode: ChordMode,
}

impl RingScenario {
    pub fn new(
        node_count: usize,
        adjacent_link_km: f64,
        attenuation_db_per_km: f64,
        chord_mode: ChordMode,
    ) -> Result<Self> {
        let scenario =
            Self { node_count, adjacent_link_km, attenuation_db_per_km, chord_mode };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        check_node_count(self.node_count)?;
        if self.adjacent_link_km.is_nan() || self.adjacent_link_km <= 0.0 {
            return Err(Error::NonPositive {
                name: "adjacent_link_km",
                value: self.adjacent_link_km,
            });
        }
        // Zero loss is a legal degenerate case (all hops free); negative is not.
        if self.attenuation_db_per_km.is_nan() || self.attenuation_db_per_km < 0.0 {
            return Err(Error::InvalidParameter {
                name: "attenuation_db_per_km",
                reason: format!("{} is negative", self.attenuation_db_per_km),
            });
        }
        Ok(())
    }

    /// Largest hop distance on an odd ring, `(N - 1) / 2`.
    pub fn max_hop(&self) -> usize {
        (self.node_count - 1) / 2
    }

    /// Fiber length in km between nodes `k` hops apart, `1 <= k <= N - 1`.
    pub fn chord_km(&self, hop: usize) -> Result<f64> {
        let n = self.node_count;
        if hop == 0 || hop > n - 1 {
            return Err(Error::HopOutOfRange { hop, max: n - 1, nodes: n });
        }
        let le = self.adjacent_link_km;
        Ok(match self.chord_mode {
            ChordMode::Circle => {
                let circumference = n as f64 * le;
                (circumference / std::f64::consts::PI)
                    * (std::f64::consts::PI * hop as f64 / n as f64).sin()
            }
            ChordMode::Arc => hop.min(n - hop) as f64 * le,
        })
    }

    /// Attenuation in dB over the chord between nodes `k` hops apart,
    /// `1 <= k <= (N - 1) / 2`.
    pub fn hop_attenuation_db(&self, hop: usize) -> Result<f64> {
        if hop == 0 || hop > self.max_hop() {
            return Err(Error::HopOutOfRange {
                hop,
                max: self.max_hop(),
                nodes: self.node_count,
            });
        }
        Ok(self.attenuation_db_per_km * self.chord_km(hop)?)
    }

    /// Attenuation of an adjacent ring link, `a_c * Le`. Used by the relayed
    /// architecture, whose links follow the ring itself rather than chords.
    pub fn adjacent_attenuation_db(&self) -> f64 {
        self.attenuation_db_per_km * self.adjacent_link_km
    }
}

fn check_node_count(n: usize) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::BadNodeCount(n));
    }
    Ok(())
}

/// Number of node pairs whose shortest path crosses any given adjacent
/// link: `(N^2 - 1) / 8`, an integer for every odd `N`.
pub fn crossing_paths_per_link(node_count: usize) -> Result<u64> {
    check_node_count(node_count)?;
    let n = node_count as u64;
    Ok((n * n - 1) / 8)
}

/// Lists every unordered node pair whose unique shortest ring path crosses
/// the adjacent link `(a, a+1)`.
///
/// This is the brute-force oracle behind [`crossing_paths_per_link`]. Pairs
/// are reported as `(s, d)` where the clockwise walk from `s` to `d`
/// traverses the link, sorted ascending.
pub fn enumerate_crossing_paths(
    node_count: usize,
    link: (usize, usize),
) -> Result<Vec<(usize, usize)>> {
    check_node_count(node_count)?;
    let n = node_count;
    let (a, b) = link;
    if a == 0 || a > n || b != a % n + 1 {
        return Err(Error::NotAdjacentLink(a, b));
    }

    let mut crossing = Vec::new();
    for s in 1..=n {
        for d in s + 1..=n {
            let forward = (d + n - s) % n; // clockwise hops s -> d
            let (start, hops) = if forward <= (n - 1) / 2 { (s, forward) } else { (d, n - forward) };
            // The clockwise walk covers links (start, start+1) .. (start+hops-1, start+hops).
            if (a + n - start) % n < hops {
                let end = (start - 1 + hops) % n + 1;
                crossing.push((start, end));
            }
        }
    }
    crossing.sort_unstable();
    Ok(crossing)
}

/// Hop distance between two nodes on the ring (shortest of the two ways).
pub fn hop_distance(node_count: usize, s: usize, d: usize) -> usize {
    let n = node_count;
    let forward = (d + n - s) % n;
    forward.min(n - forward)
}
