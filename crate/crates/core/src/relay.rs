//! Cooperative relay selection.
//!
//! Each source keeps, per relay candidate, a success history and an
//! interference estimate and ranks candidates by
//! `SF = HF / (1 + IF)`, where `HF = (successes + 1) / (attempts + 1)` and
//! `IF = neighbors / max_neighbors + concurrent_tx`.

use crate::channel::{NodeId, RateClass, Topology};
use crate::defense::Blacklist;
use crate::engine::SimTime;
use crate::mac::{
    compute_duration, t_data_us, FrameKind, Outcome, Route, SIFS_US, T_ACK_US, T_CTS_US,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RelayStats {
    pub successes: u32,
    pub attempts: u32,
    pub neighbors: u32,
    pub concurrent_tx: u32,
}

pub fn history_factor(successes: u32, attempts: u32) -> f64 {
    assert!(
        successes <= attempts,
        "relay accounting: {successes} successes out of {attempts} attempts"
    );
    (successes as f64 + 1.0) / (attempts as f64 + 1.0)
}

/// `max_neighbors` is the network size minus one; zero means a single-node
/// network, which has no interference.
pub fn interference_factor(neighbors: u32, max_neighbors: u32, concurrent_tx: u32) -> f64 {
    if max_neighbors == 0 {
        return 0.0;
    }
    neighbors as f64 / max_neighbors as f64 + concurrent_tx as f64
}

pub fn selection_factor(hf: f64, if_: f64) -> f64 {
    debug_assert!(hf > 0.0 && hf <= 1.0, "HF {hf} outside ]0, 1]");
    debug_assert!(if_ >= 0.0, "IF {if_} negative");
    hf / (1.0 + if_)
}

impl RelayStats {
    pub fn hf(&self) -> f64 {
        history_factor(self.successes, self.attempts)
    }

    pub fn if_(&self, max_neighbors: u32) -> f64 {
        interference_factor(self.neighbors, max_neighbors, self.concurrent_tx)
    }

    pub fn sf(&self, max_neighbors: u32) -> f64 {
        selection_factor(self.hf(), self.if_(max_neighbors))
    }

    pub fn record(&mut self, outcome: Outcome) {
        self.attempts += 1;
        if outcome == Outcome::Success {
            self.successes += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: NodeId,
    pub stats: RelayStats,
    /// Source to candidate.
    pub first_hop: RateClass,
    /// Candidate to AP.
    pub second_hop: RateClass,
}

impl Candidate {
    pub fn route(&self) -> Route {
        Route::Relayed {
            first: self.first_hop,
            second: self.second_hop,
        }
    }
}

/// Whether relaying over `(first, second)` is worth it for a source whose
/// direct rate is `direct`: both hops strictly faster, and the two-hop
/// reservation strictly shorter than the direct one.
pub fn relay_admissible(
    payload_bytes: u64,
    direct: RateClass,
    first: RateClass,
    second: RateClass,
) -> bool {
    if !direct.is_reachable() || !first.faster_than(direct) || !second.faster_than(direct) {
        return false;
    }
    match (
        compute_duration(payload_bytes, Route::Relayed { first, second }),
        compute_duration(payload_bytes, Route::Direct(direct)),
    ) {
        (Ok(coop), Ok(direct)) => coop < direct,
        (Ok(_), Err(_)) => true,
        _ => false,
    }
}

/// Per-source relay candidates, built once from the static topology.
#[derive(Debug, Clone)]
pub struct CandidateTable {
    per_source: Vec<Vec<Candidate>>,
    max_neighbors: u32,
}

impl CandidateTable {
    /// Candidates for every station. The AP is never a candidate.
    pub fn build(topo: &Topology, payload_bytes: u64) -> Self {
        let n = topo.len();
        let ap = NodeId::AP;
        let mut per_source = vec![Vec::new(); n];
        for s in topo.nodes().filter(|&s| s != ap) {
            let direct = topo.rate(s, ap);
            for c in topo.nodes().filter(|&c| c != ap && c != s) {
                let first = topo.rate(s, c);
                let second = topo.rate(c, ap);
                if relay_admissible(payload_bytes, direct, first, second) {
                    per_source[s.idx()].push(Candidate {
                        id: c,
                        stats: RelayStats {
                            neighbors: topo.neighbors(c).len() as u32,
                            ..RelayStats::default()
                        },
                        first_hop: first,
                        second_hop: second,
                    });
                }
            }
        }
        CandidateTable {
            per_source,
            max_neighbors: n.saturating_sub(1) as u32,
        }
    }

    pub fn candidates(&self, source: NodeId) -> &[Candidate] {
        &self.per_source[source.idx()]
    }

    pub fn max_neighbors(&self) -> u32 {
        self.max_neighbors
    }

    pub fn stats(&self, source: NodeId, relay: NodeId) -> Option<&RelayStats> {
        self.candidates(source)
            .iter()
            .find(|c| c.id == relay)
            .map(|c| &c.stats)
    }

    /// Refresh each candidate's concurrent-transmission sample, then pick
    /// the non-blacklisted candidate with the largest SF. Ties go to the
    /// lowest node id.
    pub fn select_relay<F>(
        &mut self,
        source: NodeId,
        blacklist: &Blacklist,
        mut concurrent_tx: F,
    ) -> Option<&Candidate>
    where
        F: FnMut(NodeId) -> u32,
    {
        let max_n = self.max_neighbors;
        let list = &mut self.per_source[source.idx()];
        for c in list.iter_mut() {
            c.stats.concurrent_tx = concurrent_tx(c.id);
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in list.iter().enumerate() {
            if blacklist.contains(c.id) {
                continue;
            }
            let sf = c.stats.sf(max_n);
            if best.is_none_or(|(_, b)| sf > b) {
                best = Some((i, sf));
            }
        }
        best.map(|(i, _)| &list[i])
    }

    pub fn record_outcome(
        &mut self,
        source: NodeId,
        relay: NodeId,
        outcome: Outcome,
    ) -> RelayStats {
        let c = self.per_source[source.idx()]
            .iter_mut()
            .find(|c| c.id == relay)
            .expect("outcome recorded for a node that is not a candidate");
        c.stats.record(outcome);
        c.stats
    }
}

/// Who puts a frame on the air during an exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Source,
    Relay,
    Ap,
}

/// One frame of a planned exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannedFrame {
    pub kind: FrameKind,
    pub sender: Role,
    pub start: SimTime,
    pub end: SimTime,
}

/// The frames that follow a granted RTS ending at `rts_end`, assuming no
/// losses. For a relayed route the source's DATA goes to the relay, which
/// forwards it after SIFS; the AP then acknowledges to the source.
pub fn exchange_timeline(rts_end: SimTime, payload_bytes: u64, route: Route) -> Vec<PlannedFrame> {
    let mut out = Vec::new();
    let mut t = rts_end + SIFS_US;
    let mut push = |kind, sender, len: u64, t: &mut SimTime| {
        out.push(PlannedFrame {
            kind,
            sender,
            start: *t,
            end: *t + len,
        });
        *t = *t + len + SIFS_US;
    };
    push(FrameKind::Cts, Role::Ap, T_CTS_US, &mut t);
    match route {
        Route::Direct(r) => push(
            FrameKind::Data,
            Role::Source,
            t_data_us(payload_bytes, r),
            &mut t,
        ),
        Route::Relayed { first, second } => {
            push(
                FrameKind::Data,
                Role::Source,
                t_data_us(payload_bytes, first),
                &mut t,
            );
            push(
                FrameKind::Data,
                Role::Relay,
                t_data_us(payload_bytes, second),
                &mut t,
            );
        }
    }
    push(FrameKind::Ack, Role::Ap, T_ACK_US, &mut t);
    out
}
