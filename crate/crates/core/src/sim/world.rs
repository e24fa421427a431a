//! One WLAN cell: the AP, honest saturated stations, and attackers, all
//! running as event handlers on the kernel.

use crate::channel::{airtime_us, Medium, NodeId, RateClass, Topology, TxId};
use crate::defense::{Blacklist, Revalidator, RtsDecision, Verdict};
use crate::engine::{Kernel, SimTime, Stream};
use crate::harness::config::ScenarioConfig;
use crate::harness::metrics::RunMetrics;
use crate::mac::{
    ack_timeout_us, compute_duration, cts_timeout_us, derive_response_duration, Action, Dcf, Dest,
    Frame, FrameKind, NavTimer, Outcome, Pending, Phase, Response, Route, Stimulus, BASE_RATE,
    DIFS_US, SIFS_US, SLOT_US,
};
use crate::relay::CandidateTable;
use crate::threat::{next_attack_frame, AttackMode, AttackerConfig};

use super::log::{Access, LogDigest, LogRecord, LogSink};

#[derive(Debug, Clone)]
enum Event {
    /// DIFS or backoff timer.
    Wake {
        node: NodeId,
        gen: u64,
    },
    Timeout {
        node: NodeId,
        gen: u64,
    },
    NavCheck {
        node: NodeId,
    },
    /// Put a SIFS-spaced response on the air.
    Respond {
        node: NodeId,
        frame: Frame,
    },
    TxEnd {
        node: NodeId,
        tx: TxId,
        frame: Frame,
    },
    Activate {
        node: NodeId,
    },
    /// An inflation attacker's bogus reservation ran out.
    AttackResume {
        node: NodeId,
    },
    FloodTick {
        node: NodeId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Ap,
    Honest,
    Attacker(AttackerConfig),
}

/// The attempt a station is currently running.
#[derive(Debug, Clone, Copy)]
struct Attempt {
    pending: Pending,
    route: Route,
    relay: Option<NodeId>,
    /// Set once the CTS arrived, so the outcome says something about the relay.
    granted: bool,
}

#[derive(Debug, Clone)]
struct Node {
    role: Role,
    dcf: Dcf,
    nav: NavTimer,
    blacklist: Blacklist,
    timer_gen: u64,
    timeout_gen: u64,
    nav_check_at: Option<SimTime>,
    next_seq: u32,
    attempt: Option<Attempt>,
}

impl Node {
    fn new(role: Role) -> Self {
        Node {
            role,
            dcf: Dcf::default(),
            nav: NavTimer::default(),
            blacklist: Blacklist::default(),
            timer_gen: 0,
            timeout_gen: 0,
            nav_check_at: None,
            next_seq: 1,
            attempt: None,
        }
    }

    fn uses_dcf(&self) -> bool {
        match self.role {
            Role::Ap => false,
            Role::Honest => true,
            Role::Attacker(a) => matches!(a.mode, AttackMode::DurationInflation { .. }),
        }
    }

    fn is_attacker(&self) -> bool {
        matches!(self.role, Role::Attacker(_))
    }
}

/// A single run. Build with [`Simulation::new`], drive with
/// [`Simulation::run`].
pub struct Simulation<S: LogSink> {
    cfg: ScenarioConfig,
    topo: Topology,
    medium: Medium,
    nodes: Vec<Node>,
    relays: CandidateTable,
    revalidator: Revalidator,
    /// Highest sequence number the AP has accepted from each origin.
    accepted: Vec<u32>,
    metrics: RunMetrics,
    digest: LogDigest,
    sink: S,
}

impl<S: LogSink> Simulation<S> {
    /// `topo` must hold the AP at index 0 followed by `cfg.n_nodes` stations.
    pub fn new(cfg: &ScenarioConfig, topo: Topology, sink: S) -> Self {
        assert_eq!(
            topo.len(),
            cfg.n_nodes as usize + 1,
            "topology size does not match n_nodes"
        );
        let mut nodes = Vec::with_capacity(topo.len());
        nodes.push(Node::new(Role::Ap));
        for id in 1..=cfg.n_nodes {
            let role = match cfg.attacker(NodeId(id)) {
                Some(a) => Role::Attacker(*a),
                None => Role::Honest,
            };
            nodes.push(Node::new(role));
        }
        let relays = CandidateTable::build(&topo, cfg.payload_bytes as u64);
        Simulation {
            medium: Medium::new(topo.len()),
            relays,
            revalidator: Revalidator::new(cfg.defense_enabled, cfg.payload_bytes as u64),
            accepted: vec![0; topo.len()],
            metrics: RunMetrics::new(cfg, topo.len()),
            digest: LogDigest::default(),
            nodes,
            topo,
            cfg: cfg.clone(),
            sink,
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn relay_table(&self) -> &CandidateTable {
        &self.relays
    }

    /// Blacklist held by `n`.
    pub fn blacklist(&self, n: NodeId) -> &Blacklist {
        &self.nodes[n.idx()].blacklist
    }

    /// Run for the configured duration with the backoff stream seeded by
    /// `seed`, and return the metrics and the sink.
    pub fn run(mut self, seed: u64) -> (RunMetrics, S) {
        let mut kernel = Kernel::new(seed);
        for n in 1..self.nodes.len() {
            let node = NodeId(n as u16);
            let start = match self.nodes[n].role {
                Role::Attacker(a) => a.start_at,
                _ => SimTime::ZERO,
            };
            kernel.schedule(start, Event::Activate { node });
        }
        let end = self.cfg.sim_duration();
        kernel.run_until(end, |k, ev| self.handle(k, ev));
        self.metrics.sim_duration_us = end.micros();
        self.metrics.events = kernel.processed();
        self.metrics.log_records = self.digest.records();
        self.metrics.log_digest = self.digest.finish();
        (self.metrics, self.sink)
    }

    fn log(&mut self, rec: LogRecord) {
        self.digest.push(&rec);
        self.sink.record(&rec);
    }

    fn handle(&mut self, k: &mut Kernel<Event>, ev: Event) {
        match ev {
            Event::Activate { node } => self.activate(k, node),
            Event::Wake { node, gen } => {
                if self.nodes[node.idx()].timer_gen != gen {
                    return;
                }
                let stim = match self.nodes[node.idx()].dcf.phase() {
                    Phase::Difs => Stimulus::DifsElapsed,
                    Phase::Backoff => Stimulus::BackoffElapsed,
                    p => panic!("live timer fired for {node} in phase {p:?}"),
                };
                self.step(k, node, stim);
            }
            Event::Timeout { node, gen } => {
                let n = &self.nodes[node.idx()];
                if n.timeout_gen != gen
                    || !matches!(n.dcf.phase(), Phase::AwaitCts | Phase::AwaitAck)
                {
                    return;
                }
                self.step(k, node, Stimulus::Timeout);
            }
            Event::NavCheck { node } => {
                let n = &mut self.nodes[node.idx()];
                if n.nav_check_at == Some(k.now()) {
                    n.nav_check_at = None;
                }
                self.sense(k, node);
            }
            Event::Respond { node, frame } => {
                if self.medium.is_transmitting(node, k.now()) {
                    self.log(LogRecord::ResponseSkipped {
                        t: k.now(),
                        node,
                        kind: frame.kind,
                    });
                    let own_data = frame.kind == FrameKind::Data && frame.origin == node;
                    if own_data && self.nodes[node.idx()].dcf.phase() == Phase::SendData {
                        self.step(k, node, Stimulus::DataSent);
                        self.step(k, node, Stimulus::Timeout);
                    }
                    return;
                }
                let rate = self.frame_rate(node, &frame);
                self.transmit(k, node, frame, rate, Access::Response);
            }
            Event::TxEnd { node, tx, frame } => self.tx_end(k, node, tx, frame),
            Event::AttackResume { node } => {
                self.nodes[node.idx()]
                    .dcf
                    .on(Stimulus::Release, k.now(), |_| 0);
                self.sense(k, node);
            }
            Event::FloodTick { node } => {
                let Role::Attacker(cfg) = self.nodes[node.idx()].role else {
                    unreachable!("flood tick for non-attacker")
                };
                let direct = self.topo.rate(node, NodeId::AP);
                let looks_legit =
                    compute_duration(self.cfg.payload_bytes as u64, Route::Direct(direct))
                        .expect("validated payload");
                let step = next_attack_frame(&cfg, k.now(), looks_legit);
                if !self.medium.is_transmitting(node, k.now()) {
                    self.transmit(k, node, step.frame, BASE_RATE, Access::Flood);
                }
                k.schedule(step.next_fire, Event::FloodTick { node });
            }
        }
    }

    fn activate(&mut self, k: &mut Kernel<Event>, node: NodeId) {
        let n = &self.nodes[node.idx()];
        match n.role {
            Role::Ap => {}
            Role::Attacker(AttackerConfig {
                mode: AttackMode::Flood { .. },
                ..
            }) => {
                k.schedule(k.now(), Event::FloodTick { node });
            }
            _ => {
                self.queue_payload(k.now(), node);
                self.sense(k, node);
            }
        }
    }

    fn queue_payload(&mut self, now: SimTime, node: NodeId) {
        let n = &mut self.nodes[node.idx()];
        let p = Pending {
            seq: n.next_seq,
            payload_bytes: self.cfg.payload_bytes,
        };
        n.next_seq += 1;
        n.dcf
            .on(Stimulus::PayloadQueued(p), now, |_| unreachable!());
    }

    fn frame_rate(&self, node: NodeId, frame: &Frame) -> RateClass {
        match (frame.kind, frame.dst) {
            (FrameKind::Data, Dest::Unicast(to)) => self.topo.rate(node, to),
            _ => BASE_RATE,
        }
    }

    /// Re-run carrier sense for `node` and feed the result to its DCF.
    fn sense(&mut self, k: &mut Kernel<Event>, node: NodeId) {
        let now = k.now();
        let busy = self.medium.is_busy(node, now);
        let n = &mut self.nodes[node.idx()];
        if !n.uses_dcf() {
            return;
        }
        let nav_active = n.nav.is_active(now, &n.blacklist);
        if nav_active && n.nav_check_at.is_none_or(|t| t < n.nav.quiet_until) {
            n.nav_check_at = Some(n.nav.quiet_until);
            k.schedule(n.nav.quiet_until, Event::NavCheck { node });
        }
        let stim = if busy {
            Stimulus::MediumBusy
        } else if nav_active {
            Stimulus::NavBusy
        } else {
            Stimulus::MediumIdle
        };
        self.step(k, node, stim);
    }

    /// Feed one stimulus to a station's DCF and carry out the actions.
    fn step(&mut self, k: &mut Kernel<Event>, node: NodeId, stim: Stimulus) {
        let now = k.now();
        let n = &mut self.nodes[node.idx()];
        let before = n.dcf.phase();
        let actions = n.dcf.on(stim, now, |cw| {
            k.draw_uniform_int(Stream::Backoff, 0, cw as i64) as u32
        });
        if matches!(before, Phase::Difs | Phase::Backoff) && n.dcf.phase() != before {
            n.timer_gen += 1;
        }
        for a in actions {
            self.act(k, node, a);
        }
    }

    fn act(&mut self, k: &mut Kernel<Event>, node: NodeId, action: Action) {
        let now = k.now();
        match action {
            Action::WaitDifs => {
                let n = &mut self.nodes[node.idx()];
                n.timer_gen += 1;
                k.schedule(
                    now + DIFS_US,
                    Event::Wake {
                        node,
                        gen: n.timer_gen,
                    },
                );
            }
            Action::CountDown { slots } => {
                let n = &mut self.nodes[node.idx()];
                n.timer_gen += 1;
                k.schedule(
                    now + slots as u64 * SLOT_US,
                    Event::Wake {
                        node,
                        gen: n.timer_gen,
                    },
                );
            }
            Action::SendRts => self.send_rts(k, node),
            Action::SendDataAfterSifs => {
                let n = &self.nodes[node.idx()];
                let att = n.attempt.expect("CTS without an attempt");
                let frame = match (att.route, att.relay) {
                    (Route::Relayed { second, .. }, Some(relay)) => {
                        let mut f = Frame::data(
                            node,
                            relay,
                            0,
                            att.pending.payload_bytes,
                            true,
                            node,
                            att.pending.seq,
                        );
                        f.duration_us = derive_response_duration(
                            &f,
                            Response::RelayBoundData { second_hop: second },
                        );
                        f
                    }
                    _ => {
                        let mut f = Frame::data(
                            node,
                            NodeId::AP,
                            0,
                            att.pending.payload_bytes,
                            false,
                            node,
                            att.pending.seq,
                        );
                        f.duration_us = derive_response_duration(&f, Response::DirectData);
                        f
                    }
                };
                k.schedule(now + SIFS_US, Event::Respond { node, frame });
            }
            Action::Succeeded(_) => {
                self.finish_attempt(now, node, Outcome::Success);
                self.queue_payload(now, node);
                self.sense(k, node);
            }
            Action::Failed => {
                self.finish_attempt(now, node, Outcome::Failure);
                self.sense(k, node);
            }
            Action::Dropped(_) => {
                self.queue_payload(now, node);
                self.sense(k, node);
            }
        }
    }

    fn finish_attempt(&mut self, now: SimTime, node: NodeId, outcome: Outcome) {
        let n = &mut self.nodes[node.idx()];
        n.timeout_gen += 1;
        let Some(att) = n.attempt.take() else { return };
        if let (Some(relay), true) = (att.relay, att.granted) {
            self.relays.record_outcome(node, relay, outcome);
            self.log(LogRecord::RelayOutcome {
                t: now,
                source: node,
                relay,
                success: outcome == Outcome::Success,
            });
        }
    }

    fn send_rts(&mut self, k: &mut Kernel<Event>, node: NodeId) {
        let now = k.now();
        match self.nodes[node.idx()].role {
            Role::Attacker(cfg) => {
                let step = next_attack_frame(&cfg, now, 0);
                self.transmit(k, node, step.frame, BASE_RATE, Access::Contention);
                k.schedule(step.next_fire, Event::AttackResume { node });
            }
            Role::Honest => {
                let pending = self.nodes[node.idx()]
                    .dcf
                    .pending()
                    .expect("RTS without payload");
                let medium = &self.medium;
                let n = &self.nodes[node.idx()];
                let pick = self
                    .relays
                    .select_relay(node, &n.blacklist, |c| medium.heard_count(c, now) as u32)
                    .map(|c| (c.id, c.route()));
                self.log(LogRecord::RelaySelected {
                    t: now,
                    source: node,
                    relay: pick.map(|p| p.0),
                });
                let route = pick.map_or(Route::Direct(self.topo.rate(node, NodeId::AP)), |p| p.1);
                let duration = compute_duration(pending.payload_bytes as u64, route)
                    .expect("validated payload");
                let n = &mut self.nodes[node.idx()];
                n.attempt = Some(Attempt {
                    pending,
                    route,
                    relay: pick.map(|p| p.0),
                    granted: false,
                });
                n.timeout_gen += 1;
                let gen = n.timeout_gen;
                let end = self.transmit(
                    k,
                    node,
                    Frame::rts(node, Dest::Unicast(NodeId::AP), duration),
                    BASE_RATE,
                    Access::Contention,
                );
                k.schedule(end + cts_timeout_us(), Event::Timeout { node, gen });
            }
            Role::Ap => unreachable!("AP does not contend"),
        }
    }

    /// Put `frame` on the air now; returns its end time.
    fn transmit(
        &mut self,
        k: &mut Kernel<Event>,
        node: NodeId,
        frame: Frame,
        rate: RateClass,
        access: Access,
    ) -> SimTime {
        let now = k.now();
        let end = now + airtime_us(frame.size_bytes(), rate);
        let tx = self.medium.begin(&self.topo, node, now, end);
        if frame.kind == FrameKind::Rts {
            self.metrics.rts_sent += 1;
        }
        if frame.kind == FrameKind::Blacklist {
            self.metrics.blacklist_broadcasts += 1;
            self.metrics.broadcast_airtime_us += end - now;
        }
        self.log(LogRecord::TxStart {
            t: now,
            node,
            end,
            access,
            frame: frame.clone(),
        });
        k.schedule(end, Event::TxEnd { node, tx, frame });
        self.sense(k, node);
        for i in 0..self.topo.neighbors(node).len() {
            let r = self.topo.neighbors(node)[i];
            self.sense(k, r);
        }
        end
    }

    fn tx_end(&mut self, k: &mut Kernel<Event>, sender: NodeId, tx: TxId, frame: Frame) {
        let now = k.now();
        let deliveries = self.medium.finish(&self.topo, tx);
        if let Dest::Unicast(dst) = frame.dst {
            if deliveries.iter().any(|d| d.receiver == dst && !d.decoded) {
                self.metrics.collisions += 1;
            }
        }
        // own DATA finished: now wait for the ACK
        if frame.kind == FrameKind::Data
            && frame.origin == sender
            && self.nodes[sender.idx()].dcf.phase() == Phase::SendData
        {
            self.step(k, sender, Stimulus::DataSent);
            let n = &mut self.nodes[sender.idx()];
            let att = n.attempt.expect("DATA without attempt");
            n.timeout_gen += 1;
            let gen = n.timeout_gen;
            k.schedule(
                now + ack_timeout_us(att.pending.payload_bytes as u64, att.route),
                Event::Timeout { node: sender, gen },
            );
        }
        for d in &deliveries {
            if d.decoded {
                self.receive(k, d.receiver, &frame);
            }
        }
        self.sense(k, sender);
        for d in deliveries {
            self.sense(k, d.receiver);
        }
    }

    fn receive(&mut self, k: &mut Kernel<Event>, node: NodeId, frame: &Frame) {
        let now = k.now();
        self.log(LogRecord::Rx {
            t: now,
            node,
            frame: frame.clone(),
        });
        if frame.kind == FrameKind::Blacklist {
            if let Some(off) = frame.offender {
                self.learn_blacklist(now, node, off);
            }
            return;
        }
        let Dest::Unicast(dst) = frame.dst else {
            return;
        };
        if dst != node {
            let n = &mut self.nodes[node.idx()];
            n.nav = n.nav.update(frame, now, &n.blacklist);
            return;
        }
        match (node == NodeId::AP, frame.kind) {
            (true, FrameKind::Rts) => self.ap_on_rts(k, frame),
            (true, FrameKind::Data) => self.ap_on_data(k, frame),
            (false, FrameKind::Cts) => {
                let n = &mut self.nodes[node.idx()];
                if n.role == Role::Honest && n.dcf.phase() == Phase::AwaitCts {
                    if let Some(att) = n.attempt.as_mut() {
                        att.granted = true;
                        n.timeout_gen += 1;
                    }
                    self.step(k, node, Stimulus::CtsDecoded);
                }
            }
            (false, FrameKind::Data) if frame.relay_flag => {
                if self.nodes[node.idx()].is_attacker() {
                    self.log(LogRecord::RelayDropped {
                        t: now,
                        node,
                        origin: frame.origin,
                    });
                    return;
                }
                let fwd = Frame::data(
                    node,
                    NodeId::AP,
                    derive_response_duration(frame, Response::DirectData),
                    frame.payload_bytes,
                    false,
                    frame.origin,
                    frame.seq,
                );
                k.schedule(now + SIFS_US, Event::Respond { node, frame: fwd });
            }
            (false, FrameKind::Ack) => {
                let n = &self.nodes[node.idx()];
                let matches = n.dcf.phase() == Phase::AwaitAck
                    && n.attempt.is_some_and(|a| a.pending.seq == frame.seq);
                if matches {
                    self.step(k, node, Stimulus::AckDecoded);
                }
            }
            _ => {}
        }
    }

    fn learn_blacklist(&mut self, now: SimTime, node: NodeId, offender: NodeId) {
        let n = &mut self.nodes[node.idx()];
        if n.blacklist.insert(offender, now) {
            let size_after = n.blacklist.len();
            self.log(LogRecord::BlacklistLearned {
                t: now,
                node,
                offender,
                size_after,
            });
        }
    }

    fn ap_on_rts(&mut self, k: &mut Kernel<Event>, rts: &Frame) {
        let now = k.now();
        let ap = NodeId::AP;
        let forged = self.nodes[rts.src.idx()].is_attacker()
            && rts.duration_us > self.revalidator.threshold_us();
        if forged && self.metrics.first_forged_decode_at.is_none() {
            self.metrics.first_forged_decode_at = Some(now);
        }
        let (verdict, decision) =
            self.revalidator
                .on_rts(ap, rts, now, &mut self.nodes[ap.idx()].blacklist);
        if self.revalidator.enabled() {
            self.log(LogRecord::RtsChecked {
                t: now,
                src: rts.src,
                claimed_us: rts.duration_us,
                malicious: matches!(verdict, Verdict::Malicious { .. }),
                first_detection: matches!(decision, RtsDecision::Flag { .. }),
            });
        }
        match decision {
            RtsDecision::Grant => {
                let cts = Frame::cts(ap, rts.src, derive_response_duration(rts, Response::Cts));
                k.schedule(
                    now + SIFS_US,
                    Event::Respond {
                        node: ap,
                        frame: cts,
                    },
                );
            }
            RtsDecision::Flag { broadcast } => {
                self.metrics.detections += 1;
                if !self.nodes[rts.src.idx()].is_attacker() {
                    self.metrics.false_positives += 1;
                }
                if self.metrics.first_detection_at.is_none() {
                    self.metrics.first_detection_at = Some(now);
                }
                let size_after = self.nodes[ap.idx()].blacklist.len();
                self.log(LogRecord::BlacklistLearned {
                    t: now,
                    node: ap,
                    offender: rts.src,
                    size_after,
                });
                k.schedule(
                    now + SIFS_US,
                    Event::Respond {
                        node: ap,
                        frame: broadcast,
                    },
                );
            }
            RtsDecision::Refuse => {}
        }
    }

    fn ap_on_data(&mut self, k: &mut Kernel<Event>, data: &Frame) {
        let now = k.now();
        let ap = NodeId::AP;
        if self.nodes[ap.idx()].blacklist.contains(data.src) {
            return;
        }
        let origin = data.origin;
        if data.seq > self.accepted[origin.idx()] {
            self.accepted[origin.idx()] = data.seq;
            let bits = 8 * data.payload_bytes as u64;
            self.metrics.delivered_payload_bits += bits;
            self.metrics.per_node_bits[origin.idx()] += bits;
            self.metrics.delivered_frames += 1;
            let via = (data.src != origin).then_some(data.src);
            if via.is_some() {
                self.metrics.relayed_frames += 1;
            }
            self.log(LogRecord::Delivered {
                t: now,
                origin,
                seq: data.seq,
                via,
            });
        }
        let mut ack = Frame::ack(ap, origin);
        ack.seq = data.seq;
        k.schedule(
            now + SIFS_US,
            Event::Respond {
                node: ap,
                frame: ack,
            },
        );
    }
}
