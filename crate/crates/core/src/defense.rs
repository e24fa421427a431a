//! Duration revalidation at the AP and the replicated blacklist.
//!
//! The AP recomputes the longest reservation any legitimate sender could
//! need for the scenario's payload. An RTS claiming more than that ceiling
//! (plus a 5% margin) marks its sender as malicious: the AP withholds the
//! CTS and broadcasts the offender's address once. Every node that decodes
//! the broadcast stops honoring the offender's NAV claims and stops
//! choosing it as a relay.

use std::collections::BTreeMap;

use crate::channel::{NodeId, RateClass};
use crate::engine::SimTime;
use crate::mac::{compute_duration, Frame, FrameKind, Route};

/// Addresses flagged as malicious, with the time each was learned.
/// Entries are never removed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Blacklist {
    entries: BTreeMap<NodeId, SimTime>,
}

impl Blacklist {
    pub fn contains(&self, n: NodeId) -> bool {
        self.entries.contains_key(&n)
    }

    /// Returns false if `n` was already present; the original time is kept.
    pub fn insert(&mut self, n: NodeId, at: SimTime) -> bool {
        if self.entries.contains_key(&n) {
            return false;
        }
        self.entries.insert(n, at);
        true
    }

    pub fn flagged_at(&self, n: NodeId) -> Option<SimTime> {
        self.entries.get(&n).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, SimTime)> + '_ {
        self.entries.iter().map(|(&n, &t)| (n, t))
    }

    pub fn is_subset_of(&self, other: &Blacklist) -> bool {
        self.entries.keys().all(|k| other.contains(*k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Legitimate,
    Malicious { claimed_us: u32, ceiling_us: u32 },
}

/// Multiplicative slack applied to the ceiling, in percent.
pub const TOLERANCE_PERCENT: u64 = 5;

/// Longest reservation a legitimate sender can need for `payload_bytes`:
/// a direct exchange at 1 Mbit/s, or a two-hop exchange with both hops at
/// 2 Mbit/s (the slowest pair that may relay for a 1 Mbit/s source).
pub fn legit_duration_ceiling(payload_bytes: u64) -> u32 {
    let direct = compute_duration(payload_bytes, Route::Direct(RateClass::Mbps1));
    let relayed = compute_duration(
        payload_bytes,
        Route::Relayed {
            first: RateClass::Mbps2,
            second: RateClass::Mbps2,
        },
    );
    match (direct, relayed) {
        (Ok(a), Ok(b)) => a.max(b),
        _ => panic!("payload of {payload_bytes} B cannot be reserved legitimately"),
    }
}

/// `ceil(ceiling * 1.05)`, computed in integers.
pub fn validation_threshold(ceiling_us: u32) -> u32 {
    (ceiling_us as u64 * (100 + TOLERANCE_PERCENT)).div_ceil(100) as u32
}

pub fn validate_rts(frame: &Frame, ceiling_us: u32) -> Verdict {
    debug_assert_eq!(frame.kind, FrameKind::Rts);
    if frame.duration_us > validation_threshold(ceiling_us) {
        Verdict::Malicious {
            claimed_us: frame.duration_us,
            ceiling_us,
        }
    } else {
        Verdict::Legitimate
    }
}

/// What the AP does with a decoded RTS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RtsDecision {
    /// Reply with a CTS.
    Grant,
    /// First detection: no CTS, broadcast this frame after SIFS.
    Flag { broadcast: Frame },
    /// Sender already blacklisted: no CTS, nothing else.
    Refuse,
}

/// AP-side revalidation state.
#[derive(Debug, Clone)]
pub struct Revalidator {
    enabled: bool,
    ceiling_us: u32,
    broadcasts_sent: u32,
}

impl Revalidator {
    pub fn new(enabled: bool, nominal_payload_bytes: u64) -> Self {
        Revalidator {
            enabled,
            ceiling_us: legit_duration_ceiling(nominal_payload_bytes),
            broadcasts_sent: 0,
        }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn ceiling_us(&self) -> u32 {
        self.ceiling_us
    }

    pub fn threshold_us(&self) -> u32 {
        validation_threshold(self.ceiling_us)
    }

    /// Decide on an RTS the AP decoded at `now`, updating the AP's own
    /// blacklist on a first detection.
    pub fn on_rts(
        &mut self,
        ap: NodeId,
        rts: &Frame,
        now: SimTime,
        ap_blacklist: &mut Blacklist,
    ) -> (Verdict, RtsDecision) {
        if !self.enabled {
            return (Verdict::Legitimate, RtsDecision::Grant);
        }
        let verdict = validate_rts(rts, self.ceiling_us);
        let decision = if ap_blacklist.contains(rts.src) {
            RtsDecision::Refuse
        } else if let Verdict::Malicious { .. } = verdict {
            ap_blacklist.insert(rts.src, now);
            self.broadcasts_sent += 1;
            RtsDecision::Flag {
                broadcast: Frame::blacklist(ap, rts.src, self.broadcasts_sent),
            }
        } else {
            RtsDecision::Grant
        };
        (verdict, decision)
    }
}
