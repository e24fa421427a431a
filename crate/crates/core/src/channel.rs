//! Static geometry, distance-based rate adaptation, airtime, and the
//! unit-disk collision model.

use std::fmt;

use crate::engine::SimTime;
use crate::mac::Frame;

/// Side of the square playground in meters.
pub const PLAYGROUND_M: f64 = 500.0;
/// Unit-disk communication (and carrier-sense) range in meters.
pub const RANGE_M: f64 = 500.0;

/// Node identifier. Node 0 is the access point; the MAC address of a node
/// is its id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u16);

impl NodeId {
    pub const AP: NodeId = NodeId(0);

    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(Self::in_playground(x, y), "({x}, {y}) outside playground");
        Position { x, y }
    }

    pub fn in_playground(x: f64, y: f64) -> bool {
        (0.0..=PLAYGROUND_M).contains(&x) && (0.0..=PLAYGROUND_M).contains(&y)
    }
}

pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// 802.11b-style rate classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateClass {
    Mbps11,
    Mbps5_5,
    Mbps2,
    Mbps1,
    Unreachable,
}

impl RateClass {
    /// All usable rates, fastest first.
    pub const USABLE: [RateClass; 4] = [
        RateClass::Mbps11,
        RateClass::Mbps5_5,
        RateClass::Mbps2,
        RateClass::Mbps1,
    ];

    /// Rate in units of 0.5 Mbit/s, so 5.5 Mbit/s stays integral.
    pub fn half_mbps(self) -> Option<u64> {
        match self {
            RateClass::Mbps11 => Some(22),
            RateClass::Mbps5_5 => Some(11),
            RateClass::Mbps2 => Some(4),
            RateClass::Mbps1 => Some(2),
            RateClass::Unreachable => None,
        }
    }

    pub fn mbps(self) -> Option<f64> {
        self.half_mbps().map(|h| h as f64 / 2.0)
    }

    pub fn is_reachable(self) -> bool {
        self != RateClass::Unreachable
    }

    /// Strict "faster than" comparison. Unreachable is slower than everything.
    pub fn faster_than(self, other: RateClass) -> bool {
        self.half_mbps().unwrap_or(0) > other.half_mbps().unwrap_or(0)
    }
}

impl fmt::Display for RateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mbps() {
            Some(m) => write!(f, "{m} Mbps"),
            None => f.write_str("unreachable"),
        }
    }
}

pub fn rate_for_distance(d: f64) -> RateClass {
    debug_assert!(d >= 0.0);
    if d <= 125.0 {
        RateClass::Mbps11
    } else if d <= 250.0 {
        RateClass::Mbps5_5
    } else if d <= 375.0 {
        RateClass::Mbps2
    } else if d <= RANGE_M {
        RateClass::Mbps1
    } else {
        RateClass::Unreachable
    }
}

/// `ceil(8 * size_bytes / rate_mbps)` microseconds.
///
/// Panics on an unreachable rate; callers must never try to send over a
/// link that does not exist.
pub fn airtime_us(size_bytes: u64, rate: RateClass) -> u64 {
    let half = rate
        .half_mbps()
        .unwrap_or_else(|| panic!("airtime requested for unreachable link"));
    // 8 * size / (half / 2) = 16 * size / half
    (16 * size_bytes).div_ceil(half)
}

/// Node placement plus the derived static neighbor sets and link rates.
#[derive(Debug, Clone)]
pub struct Topology {
    positions: Vec<Position>,
    neighbors: Vec<Vec<NodeId>>,
    rates: Vec<Vec<RateClass>>,
}

impl Topology {
    /// `positions[0]` is the AP.
    pub fn new(positions: Vec<Position>) -> Self {
        let n = positions.len();
        let mut rates = vec![vec![RateClass::Unreachable; n]; n];
        let mut neighbors = vec![Vec::new(); n];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let r = rate_for_distance(distance(positions[a], positions[b]));
                rates[a][b] = r;
                if r.is_reachable() {
                    neighbors[a].push(NodeId(b as u16));
                }
            }
        }
        Topology {
            positions,
            neighbors,
            rates,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, n: NodeId) -> Position {
        self.positions[n.idx()]
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    /// Nodes within communication range of `n`, ascending by id.
    pub fn neighbors(&self, n: NodeId) -> &[NodeId] {
        &self.neighbors[n.idx()]
    }

    pub fn rate(&self, from: NodeId, to: NodeId) -> RateClass {
        self.rates[from.idx()][to.idx()]
    }

    pub fn in_range(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.rate(a, b).is_reachable()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.positions.len() as u16).map(NodeId)
    }
}

/// One frame on the air.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub frame: Frame,
    pub sender: NodeId,
    pub start: SimTime,
    pub end: SimTime,
}

/// What a given node got out of a transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RxOutcome {
    Decoded,
    Corrupted,
    NotHeard,
}

fn overlaps(a: (SimTime, SimTime), b: (SimTime, SimTime)) -> bool {
    a.0 < b.1 && b.0 < a.1
}

/// Batch form of the collision model: the outcome of `txs[i]` at every node,
/// indexed `[i][node]`. The sender's own entry is `NotHeard`.
///
/// A receiver decodes a frame iff it is in range of the sender, it is not
/// transmitting itself during the frame, and no other in-range transmission
/// overlaps the frame's `[start, end)` interval.
pub fn decode_outcomes(topo: &Topology, txs: &[Transmission]) -> Vec<Vec<RxOutcome>> {
    txs.iter()
        .enumerate()
        .map(|(i, tx)| {
            topo.nodes()
                .map(|r| {
                    if !topo.in_range(tx.sender, r) {
                        return RxOutcome::NotHeard;
                    }
                    let clash = txs.iter().enumerate().any(|(j, other)| {
                        j != i
                            && (other.sender == r || topo.in_range(other.sender, r))
                            && overlaps((tx.start, tx.end), (other.start, other.end))
                    });
                    if clash {
                        RxOutcome::Corrupted
                    } else {
                        RxOutcome::Decoded
                    }
                })
                .collect()
        })
        .collect()
}

/// Identifies an on-air transmission inside a [`Medium`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TxId(pub u64);

#[derive(Debug, Clone)]
struct Reception {
    tx: TxId,
    end: SimTime,
    corrupted: bool,
}

#[derive(Debug, Clone)]
struct OnAir {
    id: TxId,
    sender: NodeId,
    end: SimTime,
}

/// Incremental form of the collision model, driven by transmission start
/// and end events.
#[derive(Debug, Clone)]
pub struct Medium {
    receptions: Vec<Vec<Reception>>,
    sending: Vec<Option<(TxId, SimTime)>>,
    on_air: Vec<OnAir>,
    next_id: u64,
}

/// Per-receiver result of a finished transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub receiver: NodeId,
    pub decoded: bool,
}

impl Medium {
    pub fn new(n_nodes: usize) -> Self {
        Medium {
            receptions: vec![Vec::new(); n_nodes],
            sending: vec![None; n_nodes],
            on_air: Vec::new(),
            next_id: 0,
        }
    }

    pub fn is_transmitting(&self, n: NodeId, now: SimTime) -> bool {
        matches!(self.sending[n.idx()], Some((_, end)) if end > now)
    }

    /// Physical carrier sense: own transmission or any audible one in flight.
    pub fn is_busy(&self, n: NodeId, now: SimTime) -> bool {
        self.is_transmitting(n, now) || self.heard_count(n, now) > 0
    }

    /// Distinct transmissions currently audible at `n`.
    pub fn heard_count(&self, n: NodeId, now: SimTime) -> usize {
        self.receptions[n.idx()]
            .iter()
            .filter(|r| r.end > now)
            .count()
    }

    /// Put a transmission on the air. Every in-range node starts receiving
    /// it; overlaps corrupt every reception involved at that receiver.
    ///
    /// Panics if the sender is already transmitting.
    pub fn begin(&mut self, topo: &Topology, sender: NodeId, start: SimTime, end: SimTime) -> TxId {
        assert!(end > start, "zero-length transmission");
        assert!(
            !self.is_transmitting(sender, start),
            "{sender} started a transmission while already sending"
        );
        let id = TxId(self.next_id);
        self.next_id += 1;

        // Half duplex: whatever the sender was receiving is lost.
        for r in &mut self.receptions[sender.idx()] {
            if r.end > start {
                r.corrupted = true;
            }
        }
        self.sending[sender.idx()] = Some((id, end));

        for &r in topo.neighbors(sender) {
            let rx = &mut self.receptions[r.idx()];
            let mut corrupted = matches!(self.sending[r.idx()], Some((_, e)) if e > start);
            for other in rx.iter_mut().filter(|o| o.end > start) {
                other.corrupted = true;
                corrupted = true;
            }
            rx.push(Reception {
                tx: id,
                end,
                corrupted,
            });
        }
        self.on_air.push(OnAir { id, sender, end });
        id
    }

    /// Take a transmission off the air and report, per in-range receiver in
    /// ascending id order, whether it was decoded.
    pub fn finish(&mut self, topo: &Topology, id: TxId) -> Vec<Delivery> {
        let pos = self
            .on_air
            .iter()
            .position(|t| t.id == id)
            .expect("finish of unknown transmission");
        let tx = self.on_air.swap_remove(pos);
        if matches!(self.sending[tx.sender.idx()], Some((sid, _)) if sid == id) {
            self.sending[tx.sender.idx()] = None;
        }
        let mut out = Vec::with_capacity(topo.neighbors(tx.sender).len());
        for &r in topo.neighbors(tx.sender) {
            let rx = &mut self.receptions[r.idx()];
            let i = rx
                .iter()
                .position(|x| x.tx == id)
                .expect("reception missing for in-range node");
            let rec = rx.swap_remove(i);
            debug_assert_eq!(rec.end, tx.end);
            out.push(Delivery {
                receiver: r,
                decoded: !rec.corrupted,
            });
        }
        out
    }
}
