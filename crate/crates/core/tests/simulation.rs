use coopdos::channel::{NodeId, Position, RateClass, Topology};
use coopdos::defense::{legit_duration_ceiling, validation_threshold};
use coopdos::engine::RandomStreams;
use coopdos::harness::{
    generate_topology, run_scenario, run_scenario_with_sink, ScenarioConfig, AP_POSITION,
};
use coopdos::mac::{compute_duration, Dest, FrameKind, Route};
use coopdos::sim::check::InvariantChecker;
use coopdos::sim::{Access, LogDigest, LogRecord, LogSink, NullSink, Simulation, VecSink};
use coopdos::threat::AttackMode;

fn cfg(n: u16, secs: u64) -> ScenarioConfig {
    ScenarioConfig {
        sim_duration_s: secs,
        ..ScenarioConfig::with_nodes(n)
    }
}

fn checker(cfg: &ScenarioConfig) -> InvariantChecker {
    let threshold = validation_threshold(legit_duration_ceiling(cfg.payload_bytes as u64));
    InvariantChecker::new(
        cfg.n_nodes as usize + 1,
        cfg.attackers.iter().map(|a| a.node),
        threshold,
    )
}

#[test]
fn lone_station_near_the_ap() {
    let topo = Topology::new(vec![
        AP_POSITION,
        Position::new(AP_POSITION.x + 100.0, AP_POSITION.y),
    ]);
    assert_eq!(topo.rate(NodeId(1), NodeId::AP), RateClass::Mbps11);
    let c = cfg(1, 20);
    let (m, _) = Simulation::new(&c, topo, NullSink).run(3);
    let tput = m.throughput_bps();
    println!("lone station: {tput:.0} bit/s");
    assert!((tput - 7.17e6).abs() <= 0.05 * 7.17e6, "{tput}");
    assert_eq!(m.collisions, 0);
    assert_eq!(m.relayed_frames, 0);
}

#[test]
fn invariants_hold_across_scenarios() {
    let cases = [
        cfg(20, 20),
        cfg(20, 20).with_attackers(1, AttackMode::inflation()),
        cfg(30, 20).with_attackers(3, AttackMode::inflation()),
        cfg(20, 20).with_attackers(2, AttackMode::flood()),
        ScenarioConfig {
            defense_enabled: false,
            ..cfg(20, 20).with_attackers(2, AttackMode::inflation())
        },
    ];
    for c in &cases {
        for seed in 1..=3 {
            let (m, chk) = run_scenario_with_sink(c, seed, checker(c)).unwrap();
            println!(
                "n={} atk={} def={} seed={seed}: tput={:.0} relayed={} coll={} cts_checked={} bl_events={}",
                c.n_nodes,
                c.attackers.len(),
                c.defense_enabled,
                m.throughput_bps(),
                m.relayed_frames,
                m.collisions,
                chk.cts_checked,
                chk.blacklist_events
            );
            assert!(chk.is_clean(), "{:?}", chk.violations());
            assert!(chk.contention_starts_checked > 0);
            assert_eq!(m.false_positives, 0);
        }
    }
}

#[test]
fn detection_happens_at_the_first_forged_decode() {
    let c = cfg(20, 20).with_attackers(1, AttackMode::inflation());
    for seed in 1..=5 {
        let (m, chk) = run_scenario_with_sink(&c, seed, checker(&c)).unwrap();
        assert_eq!(m.detections, 1);
        assert!(chk.first_forged_rx_at_ap.is_some());
        assert_eq!(chk.first_detection, chk.first_forged_rx_at_ap);
        assert_eq!(m.first_detection_at, m.first_forged_decode_at);
    }
}

/// Collects the frames of the first completed relayed exchange.
#[derive(Default)]
struct FirstRelayed {
    log: Vec<LogRecord>,
}

impl LogSink for FirstRelayed {
    fn record(&mut self, rec: &LogRecord) {
        if self.log.len() < 200_000 {
            self.log.push(rec.clone());
        }
    }
}

#[test]
fn relayed_exchange_matches_the_reservation() {
    // Find a run with relaying and check one complete exchange against the
    // RTS duration: RTS, CTS, DATA, DATA, ACK, each SIFS apart.
    let c = cfg(30, 5);
    for seed in 1..=20 {
        let (m, sink) = run_scenario_with_sink(&c, seed, FirstRelayed::default()).unwrap();
        if m.relayed_frames == 0 {
            continue;
        }
        let starts: Vec<_> = sink
            .log
            .iter()
            .filter_map(|r| match r {
                LogRecord::TxStart { t, end, frame, .. } => Some((*t, *end, frame.clone())),
                _ => None,
            })
            .collect();
        for (i, (t, end, f)) in starts.iter().enumerate() {
            if f.kind != FrameKind::Data || !f.relay_flag {
                continue;
            }
            // walk back to the RTS by the same source, forward to the ACK
            let Some((_, rts_end, rts)) = starts[..i]
                .iter()
                .rev()
                .find(|(_, _, g)| g.kind == FrameKind::Rts && g.src == f.src)
            else {
                continue;
            };
            let Some((_, ack_end, _)) = starts[i..]
                .iter()
                .find(|(_, _, g)| g.kind == FrameKind::Ack && g.dst == Dest::Unicast(f.src))
            else {
                continue;
            };
            let fwd = starts[i..].iter().find(|(_, _, g)| {
                g.kind == FrameKind::Data && g.src != f.src && g.origin == f.src && g.seq == f.seq
            });
            let Some((fwd_t, _, _)) = fwd else { continue };
            assert_eq!(*fwd_t, *end + 10);
            assert_eq!(*ack_end, *rts_end + rts.duration_us as u64, "seed {seed}");
            assert!(t > rts_end);
            return;
        }
    }
    panic!("no completed relayed exchange found");
}

#[test]
fn runs_are_deterministic_and_streaming_digest_matches_buffered() {
    let c = cfg(15, 10).with_attackers(1, AttackMode::inflation());
    let (a, (_, buf)) = run_scenario_with_sink(&c, 9, (NullSink, VecSink::default())).unwrap();
    let b = run_scenario(&c, 9).unwrap();
    assert_eq!(a, b);
    let mut d = LogDigest::default();
    for r in &buf.0 {
        d.push(r);
    }
    assert_eq!(d.finish(), a.log_digest);
    let other = run_scenario(&c, 10).unwrap();
    assert_ne!(other.log_digest, a.log_digest);
}

/// Digest of everything except the AP's validation records.
#[derive(Default)]
struct BehaviourDigest(LogDigest);

impl LogSink for BehaviourDigest {
    fn record(&mut self, rec: &LogRecord) {
        if !matches!(rec, LogRecord::RtsChecked { .. }) {
            self.0.push(rec);
        }
    }
}

#[test]
fn no_attackers_defense_is_free() {
    let on = cfg(20, 20);
    let off = ScenarioConfig {
        defense_enabled: false,
        ..on.clone()
    };
    for seed in 1..=3 {
        let (a, da) = run_scenario_with_sink(&on, seed, BehaviourDigest::default()).unwrap();
        let (b, db) = run_scenario_with_sink(&off, seed, BehaviourDigest::default()).unwrap();
        assert_eq!(a.delivered_payload_bits, b.delivered_payload_bits);
        assert_eq!(a.per_node_bits, b.per_node_bits);
        assert_eq!(da.0.finish(), db.0.finish());
    }
}

#[test]
fn defense_never_hurts_under_inflation() {
    for k in [1, 3] {
        let on = cfg(20, 20).with_attackers(k, AttackMode::inflation());
        let off = ScenarioConfig {
            defense_enabled: false,
            ..on.clone()
        };
        for seed in 1..=4 {
            let a = run_scenario(&on, seed).unwrap().throughput_bps();
            let b = run_scenario(&off, seed).unwrap().throughput_bps();
            assert!(a >= b, "k={k} seed={seed}: on {a} < off {b}");
        }
    }
}

#[test]
fn every_contention_rts_is_legitimate_or_forged() {
    // Honest RTS durations never exceed the ceiling; attacker ones always do.
    let c = cfg(25, 10).with_attackers(2, AttackMode::inflation());
    let (_, buf) = run_scenario_with_sink(&c, 4, VecSink::default()).unwrap();
    let ceiling = legit_duration_ceiling(c.payload_bytes as u64);
    let mut honest = 0;
    for r in &buf.0 {
        if let LogRecord::TxStart {
            frame,
            access: Access::Contention,
            ..
        } = r
        {
            if frame.kind != FrameKind::Rts {
                continue;
            }
            if c.attacker(frame.src).is_some() {
                assert!(frame.duration_us > ceiling);
            } else {
                honest += 1;
                assert!(frame.duration_us <= ceiling);
            }
        }
    }
    assert!(honest > 100);
}

#[test]
fn topology_and_simulation_share_the_seed_stream() {
    let c = cfg(10, 1);
    let topo = generate_topology(&c, &mut RandomStreams::new(77));
    let direct = Simulation::new(&c, topo, NullSink).run(77).0;
    assert_eq!(direct, run_scenario(&c, 77).unwrap());
    let worst = compute_duration(c.payload_bytes as u64, Route::Direct(RateClass::Mbps1)).unwrap();
    assert!(worst <= legit_duration_ceiling(c.payload_bytes as u64));
}

#[test]
fn undefended_stations_stay_quiet_for_the_forged_reservation() {
    let c = ScenarioConfig {
        defense_enabled: false,
        ..cfg(20, 10).with_attackers(1, AttackMode::inflation())
    };
    let attacker = c.attackers[0].node;
    let (_, buf) = run_scenario_with_sink(&c, 2, VecSink::default()).unwrap();
    let mut quiet_from: Vec<Option<(u64, u64)>> = vec![None; c.n_nodes as usize + 1];
    let mut forged_heard = 0;
    for r in &buf.0 {
        match r {
            LogRecord::Rx { t, node, frame }
                if frame.src == attacker && frame.kind == FrameKind::Rts =>
            {
                if *node != NodeId::AP {
                    forged_heard += 1;
                    quiet_from[node.idx()] =
                        Some((t.micros(), t.micros() + frame.duration_us as u64));
                }
            }
            LogRecord::TxStart {
                t,
                node,
                access: Access::Contention,
                ..
            } => {
                if let Some((from, until)) = quiet_from[node.idx()] {
                    assert!(
                        t.micros() < from || t.micros() >= until,
                        "{node} contended at {t} inside [{from}, {until})"
                    );
                }
            }
            _ => {}
        }
    }
    assert!(forged_heard > 100);
}

#[test]
fn dropping_the_attackers_restores_the_baseline_log() {
    let baseline = cfg(15, 5);
    let mut attacked = baseline.clone().with_attackers(2, AttackMode::inflation());
    assert_ne!(
        run_scenario(&attacked, 3).unwrap().log_digest,
        run_scenario(&baseline, 3).unwrap().log_digest
    );
    attacked.attackers.clear();
    assert_eq!(
        run_scenario(&attacked, 3).unwrap(),
        run_scenario(&baseline, 3).unwrap()
    );
}
