//! Streaming invariant checks over a run's log.
//!
//! The checker rebuilds every node's NAV and blacklist from the decoded
//! frames in the log, without looking at simulator state, and flags:
//! - a contention-initiated transmission while a NAV set by a
//!   non-blacklisted node is running
//! - a relay selection naming a node the source has already blacklisted
//! - a blacklist that shrinks or learns an entry the AP does not hold
//! - two decodes at one receiver at the same instant
//! - a CTS whose duration breaks the RTS cascade
//! - time going backwards

use std::collections::BTreeSet;

use crate::channel::NodeId;
use crate::engine::SimTime;
use crate::mac::{Dest, FrameKind, SIFS_US, T_CTS_US};

use super::log::{Access, LogRecord, LogSink};

#[derive(Debug, Clone)]
pub struct InvariantChecker {
    attackers: BTreeSet<NodeId>,
    threshold_us: u32,
    nav: Vec<(SimTime, Option<NodeId>)>,
    blacklists: Vec<BTreeSet<NodeId>>,
    last_rx: Vec<Option<SimTime>>,
    last_rts_at_ap: Vec<Option<u32>>,
    last_t: SimTime,
    violations: Vec<String>,
    /// First AP decode of an attacker RTS claiming more than the threshold.
    pub first_forged_rx_at_ap: Option<SimTime>,
    pub first_detection: Option<SimTime>,
    pub contention_starts_checked: u64,
    pub cts_checked: u64,
    pub relay_selections_checked: u64,
    pub blacklist_events: u64,
}

const MAX_REPORTED: usize = 20;

impl InvariantChecker {
    /// `n_nodes_with_ap` sizes the per-node state; `threshold_us` is the
    /// revalidation threshold used to recognise forged RTS frames.
    pub fn new(
        n_nodes_with_ap: usize,
        attackers: impl IntoIterator<Item = NodeId>,
        threshold_us: u32,
    ) -> Self {
        InvariantChecker {
            attackers: attackers.into_iter().collect(),
            threshold_us,
            nav: vec![(SimTime::ZERO, None); n_nodes_with_ap],
            blacklists: vec![BTreeSet::new(); n_nodes_with_ap],
            last_rx: vec![None; n_nodes_with_ap],
            last_rts_at_ap: vec![None; n_nodes_with_ap],
            last_t: SimTime::ZERO,
            violations: Vec::new(),
            first_forged_rx_at_ap: None,
            first_detection: None,
            contention_starts_checked: 0,
            cts_checked: 0,
            relay_selections_checked: 0,
            blacklist_events: 0,
        }
    }

    pub fn violations(&self) -> &[String] {
        &self.violations
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn violate(&mut self, msg: String) {
        if self.violations.len() < MAX_REPORTED {
            self.violations.push(msg);
        }
    }

    fn nav_active(&self, node: NodeId, t: SimTime) -> bool {
        let (until, by) = self.nav[node.idx()];
        t < until && !by.is_some_and(|b| self.blacklists[node.idx()].contains(&b))
    }
}

impl LogSink for InvariantChecker {
    fn record(&mut self, rec: &LogRecord) {
        let t = rec.time();
        if t < self.last_t {
            self.violate(format!("time went backwards: {t} after {}", self.last_t));
        }
        self.last_t = t;

        match rec {
            LogRecord::TxStart {
                node,
                access,
                frame,
                ..
            } => {
                if *access == Access::Contention {
                    self.contention_starts_checked += 1;
                    if self.nav_active(*node, t) {
                        let (until, by) = self.nav[node.idx()];
                        self.violate(format!(
                            "{node} sent {} at {t} during NAV until {until} set by {by:?}",
                            frame.kind
                        ));
                    }
                }
                if frame.kind == FrameKind::Cts && *node == NodeId::AP {
                    self.cts_checked += 1;
                    let Dest::Unicast(to) = frame.dst else {
                        unreachable!()
                    };
                    match self.last_rts_at_ap[to.idx()] {
                        Some(rts)
                            if frame.duration_us as u64 + SIFS_US + T_CTS_US == rts as u64 => {}
                        other => self.violate(format!(
                            "CTS to {to} at {t} with duration {} does not follow RTS {other:?}",
                            frame.duration_us
                        )),
                    }
                }
            }
            LogRecord::Rx { node, frame, .. } => {
                if self.last_rx[node.idx()] == Some(t) {
                    self.violate(format!("{node} decoded two frames at {t}"));
                }
                self.last_rx[node.idx()] = Some(t);
                if *node == NodeId::AP && frame.kind == FrameKind::Rts {
                    self.last_rts_at_ap[frame.src.idx()] = Some(frame.duration_us);
                    if self.first_forged_rx_at_ap.is_none()
                        && self.attackers.contains(&frame.src)
                        && frame.duration_us > self.threshold_us
                    {
                        self.first_forged_rx_at_ap = Some(t);
                    }
                }
                if let Dest::Unicast(dst) = frame.dst {
                    if dst != *node && !self.blacklists[node.idx()].contains(&frame.src) {
                        let until = t + frame.duration_us as u64;
                        let nav = &mut self.nav[node.idx()];
                        if until > nav.0 {
                            *nav = (until, Some(frame.src));
                        }
                    }
                }
            }
            LogRecord::BlacklistLearned {
                node,
                offender,
                size_after,
                ..
            } => {
                self.blacklist_events += 1;
                if *node != NodeId::AP && !self.blacklists[NodeId::AP.idx()].contains(offender) {
                    self.violate(format!(
                        "{node} learned {offender} before the AP flagged it"
                    ));
                }
                let bl = &mut self.blacklists[node.idx()];
                let before = bl.len();
                if !bl.insert(*offender) || *size_after != before + 1 {
                    self.violate(format!(
                        "{node} blacklist went from {before} to {size_after} learning {offender}"
                    ));
                }
            }
            LogRecord::RtsChecked {
                first_detection, ..
            } => {
                if *first_detection && self.first_detection.is_none() {
                    self.first_detection = Some(t);
                }
            }
            LogRecord::RelaySelected { source, relay, .. } => {
                self.relay_selections_checked += 1;
                if let Some(r) = relay {
                    if self.blacklists[source.idx()].contains(r) {
                        self.violate(format!("{source} selected blacklisted relay {r} at {t}"));
                    }
                }
            }
            LogRecord::RelayOutcome {
                relay,
                success,
                source,
                ..
            } => {
                if *success && self.attackers.contains(relay) {
                    self.violate(format!(
                        "attacker {relay} credited with relaying for {source} at {t}"
                    ));
                }
            }
            LogRecord::ResponseSkipped { .. }
            | LogRecord::RelayDropped { .. }
            | LogRecord::Delivered { .. } => {}
        }
    }
}
